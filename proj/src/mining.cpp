// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include "omniemb/mining.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "omniemb/errors.hpp"

namespace omniemb {

using nlohmann::json;

void validate(const MiningConfig& cfg) {
    if (!(cfg.threshold > 0.0) || cfg.threshold > 1.0) {
        throw ValidationError("mining threshold must be in (0, 1]");
    }
    if (cfg.k_negatives < 1) {
        throw ValidationError("mining k_negatives must be >= 1");
    }
}

void validate(const TrainingTriple& t) {
    if (t.query_id.empty() || t.positive_doc_id.empty()) {
        throw ValidationError("training triple needs non-empty query and positive ids");
    }
    std::set<std::string> negs;
    for (const std::string& id : t.negative_doc_ids) {
        if (id == t.positive_doc_id) {
            throw ValidationError("triple for '" + t.query_id +
                                  "': positive listed among negatives");
        }
        if (!negs.insert(id).second) {
            throw ValidationError("triple for '" + t.query_id + "': duplicate negative '" + id +
                                  "'");
        }
    }
}

MinedNegatives mine_hard_negatives(const Embedding& q, const Embedding& pos,
                                   const std::vector<std::pair<std::string, Embedding>>& candidates,
                                   const MiningConfig& cfg, SimilarityFn fn) {
    validate(cfg);
    const double positive_sim = similarity(q, pos, fn);

    std::vector<std::pair<double, const std::string*>> scored;
    scored.reserve(candidates.size());
    for (const auto& [id, emb] : candidates) {
        scored.push_back({similarity(q, emb, fn), &id});
    }

    MinedNegatives result;
    // A non-positive anchor similarity makes "below p * s+" meaningless
    // (everything or nothing passes depending on sign), so fall back to the
    // plain top-k and flag the query for the mining report.
    result.degenerate_positive = positive_sim <= 0.0;
    if (!result.degenerate_positive) {
        const double cutoff = cfg.threshold * positive_sim;
        std::erase_if(scored, [&](const auto& s) { return !(s.first < cutoff); });
    }

    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return *a.second < *b.second;
    });
    const std::size_t n = std::min(cfg.k_negatives, scored.size());
    result.ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        result.ids.push_back(*scored[i].second);
    }
    return result;
}

void write_triples(const std::vector<TrainingTriple>& triples,
                   const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    for (const TrainingTriple& t : triples) {
        validate(t);
        json j{{"query_id", t.query_id},
               {"positive_doc_id", t.positive_doc_id},
               {"negative_doc_ids", t.negative_doc_ids},
               {"degenerate_positive", t.degenerate_positive}};
        out << j.dump() << '\n';
    }
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

std::vector<TrainingTriple> load_triples(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::vector<TrainingTriple> triples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const std::string ctx = path.string() + ":" + std::to_string(lineno);
        json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded() || !j.is_object() || !j.contains("query_id") ||
            !j.contains("positive_doc_id") || !j.contains("negative_doc_ids")) {
            throw ValidationError(ctx + ": malformed training triple");
        }
        TrainingTriple t;
        t.query_id = j.at("query_id").get<std::string>();
        t.positive_doc_id = j.at("positive_doc_id").get<std::string>();
        t.negative_doc_ids = j.at("negative_doc_ids").get<std::vector<std::string>>();
        t.degenerate_positive = j.value("degenerate_positive", false);
        validate(t);
        triples.push_back(std::move(t));
    }
    return triples;
}

}  // namespace omniemb
