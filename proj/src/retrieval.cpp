// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include "omniemb/retrieval.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "omniemb/errors.hpp"

namespace omniemb {

using nlohmann::json;

bool operator==(const ScoredHit& a, const ScoredHit& b) {
    return a.doc_id == b.doc_id && a.score == b.score && a.rank == b.rank;
}

void validate(const RunResult& run) {
    std::set<std::string> qids;
    for (const auto& [qid, hits] : run.queries) {
        if (!qids.insert(qid).second) {
            throw ValidationError("run has duplicate query '" + qid + "'");
        }
        std::set<std::string> dids;
        for (std::size_t i = 0; i < hits.size(); ++i) {
            const ScoredHit& hit = hits[i];
            if (hit.rank != i + 1) {
                throw ValidationError("run query '" + qid + "': ranks not contiguous from 1");
            }
            if (!dids.insert(hit.doc_id).second) {
                throw ValidationError("run query '" + qid + "': duplicate doc '" + hit.doc_id +
                                      "'");
            }
            if (i > 0 && ranks_before(hit.score, hit.doc_id, hits[i - 1].score,
                                      hits[i - 1].doc_id)) {
                throw ValidationError("run query '" + qid + "': hits out of order at rank " +
                                      std::to_string(hit.rank));
            }
        }
    }
}

bool ranks_before(double score_a, const std::string& id_a, double score_b,
                  const std::string& id_b) {
    if (score_a != score_b) {
        return score_a > score_b;
    }
    return id_a < id_b;
}

std::vector<ScoredHit> search_topk(const Embedding& q, const EmbeddingStore& store,
                                   std::size_t k, SimilarityFn fn,
                                   LateFusionCombiner combiner) {
    if (k < 1) {
        throw ValidationError("search_topk: k must be >= 1");
    }
    if (store.entries.empty()) {
        throw ValidationError("search_topk: store is empty");
    }
    if (q.dim != store.dim) {
        throw ValidationError("search_topk: query dim " + std::to_string(q.dim) +
                              " does not match store dim " + std::to_string(store.dim));
    }

    // Group stream embeddings by document, preserving first-appearance order.
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, Embedding>>>> docs;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& entry : store.entries) {
        auto [it, inserted] = index.emplace(entry.doc_id, docs.size());
        if (inserted) {
            docs.push_back({entry.doc_id, {}});
        }
        docs[it->second].second.push_back({entry.stream_label, entry.embedding});
    }

    // Bounded heap: top() is the worst hit kept so far, so a better candidate
    // evicts it in O(log k). Selection cost O(n log k), exact results.
    const auto worse = [](const ScoredHit& a, const ScoredHit& b) {
        return ranks_before(a.score, a.doc_id, b.score, b.doc_id);
    };
    std::vector<ScoredHit> heap;
    heap.reserve(std::min(k, docs.size()) + 1);
    for (const auto& [doc_id, streams] : docs) {
        ScoredHit hit{doc_id, score_document(q, streams, fn, combiner), 0};
        if (heap.size() < k) {
            heap.push_back(std::move(hit));
            std::push_heap(heap.begin(), heap.end(), worse);
        } else if (ranks_before(hit.score, hit.doc_id, heap.front().score, heap.front().doc_id)) {
            std::pop_heap(heap.begin(), heap.end(), worse);
            heap.back() = std::move(hit);
            std::push_heap(heap.begin(), heap.end(), worse);
        }
    }

    std::sort(heap.begin(), heap.end(), worse);
    for (std::size_t i = 0; i < heap.size(); ++i) {
        heap[i].rank = i + 1;
    }
    return heap;
}

void write_run(const RunResult& run, const std::filesystem::path& path) {
    validate(run);
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    for (const auto& [qid, hits] : run.queries) {
        for (const ScoredHit& hit : hits) {
            json j{{"query_id", qid},
                   {"doc_id", hit.doc_id},
                   {"rank", hit.rank},
                   {"score", hit.score}};
            out << j.dump() << '\n';
        }
    }
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

RunResult load_run(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    RunResult run;
    std::unordered_map<std::string, std::size_t> index;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const std::string ctx = path.string() + ":" + std::to_string(lineno);
        json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded() || !j.is_object()) {
            throw ValidationError(ctx + ": not a JSON object");
        }
        if (!j.contains("query_id") || !j.contains("doc_id") || !j.contains("rank") ||
            !j.contains("score")) {
            throw ValidationError(ctx + ": run record needs query_id, doc_id, rank, score");
        }
        const std::string qid = j.at("query_id").get<std::string>();
        auto [it, inserted] = index.emplace(qid, run.queries.size());
        if (inserted) {
            run.queries.push_back({qid, {}});
        }
        ScoredHit hit;
        hit.doc_id = j.at("doc_id").get<std::string>();
        hit.rank = j.at("rank").get<std::size_t>();
        hit.score = j.at("score").get<double>();
        run.queries[it->second].second.push_back(std::move(hit));
    }
    validate(run);
    return run;
}

}  // namespace omniemb
