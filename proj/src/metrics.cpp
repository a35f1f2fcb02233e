// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include "omniemb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "omniemb/errors.hpp"

namespace omniemb {

using nlohmann::json;

namespace {

int grade_of(const std::map<std::string, int>& judgments, const std::string& doc_id) {
    auto it = judgments.find(doc_id);
    return it == judgments.end() ? 0 : it->second;
}

double gain(int grade) { return std::exp2(static_cast<double>(grade)) - 1.0; }

double discount(std::size_t rank_1based) {
    return std::log2(static_cast<double>(rank_1based) + 1.0);
}

bool has_relevant(const std::map<std::string, int>& judgments) {
    return std::any_of(judgments.begin(), judgments.end(),
                       [](const auto& kv) { return kv.second > 0; });
}

}  // namespace

double ndcg_at_k(const std::vector<std::string>& ranked,
                 const std::map<std::string, int>& judgments, std::size_t k) {
    if (k < 1) {
        throw ValidationError("ndcg_at_k: k must be >= 1");
    }
    double dcg = 0.0;
    const std::size_t depth = std::min(k, ranked.size());
    for (std::size_t i = 0; i < depth; ++i) {
        dcg += gain(grade_of(judgments, ranked[i])) / discount(i + 1);
    }

    std::vector<int> grades;
    grades.reserve(judgments.size());
    for (const auto& [doc, grade] : judgments) {
        grades.push_back(grade);
    }
    std::sort(grades.begin(), grades.end(), std::greater<>());
    double idcg = 0.0;
    for (std::size_t i = 0; i < std::min(k, grades.size()); ++i) {
        idcg += gain(grades[i]) / discount(i + 1);
    }
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

double recall_at_k(const std::vector<std::string>& ranked,
                   const std::map<std::string, int>& judgments, std::size_t k) {
    if (k < 1) {
        throw ValidationError("recall_at_k: k must be >= 1");
    }
    std::size_t relevant = 0;
    for (const auto& [doc, grade] : judgments) {
        if (grade > 0) {
            ++relevant;
        }
    }
    if (relevant == 0) {
        return 0.0;
    }
    std::size_t found = 0;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
        if (grade_of(judgments, ranked[i]) > 0) {
            ++found;
        }
    }
    return static_cast<double>(found) / static_cast<double>(relevant);
}

MetricReport evaluate_run(const RunResult& run, const Qrels& qrels,
                          const std::vector<std::size_t>& ks) {
    if (ks.empty()) {
        throw ValidationError("evaluate_run: need at least one k");
    }
    std::vector<std::string> missing;
    for (const auto& [qid, hits] : run.queries) {
        if (qrels.judgments.find(qid) == qrels.judgments.end()) {
            missing.push_back(qid);
        }
    }
    if (!missing.empty()) {
        std::string ids;
        for (const std::string& id : missing) {
            ids += (ids.empty() ? "" : ", ") + id;
        }
        throw ValidationError("evaluate_run: run queries missing from qrels: " + ids);
    }

    MetricReport report;
    for (std::size_t k : ks) {
        report.metrics["ndcg@" + std::to_string(k)] = {};
        report.metrics["recall@" + std::to_string(k)] = {};
    }

    for (const auto& [qid, hits] : run.queries) {
        const auto& judgments = qrels.judgments.at(qid);
        if (!has_relevant(judgments)) {
            report.excluded_queries.push_back(qid);
            continue;
        }
        std::vector<std::string> ranked;
        ranked.reserve(hits.size());
        for (const ScoredHit& hit : hits) {
            ranked.push_back(hit.doc_id);
        }
        for (std::size_t k : ks) {
            report.metrics["ndcg@" + std::to_string(k)].per_query[qid] =
                ndcg_at_k(ranked, judgments, k);
            report.metrics["recall@" + std::to_string(k)].per_query[qid] =
                recall_at_k(ranked, judgments, k);
        }
    }

    for (auto& [name, values] : report.metrics) {
        double sum = 0.0;
        for (const auto& [qid, score] : values.per_query) {
            sum += score;
        }
        values.evaluated = values.per_query.size();
        values.average = values.evaluated > 0 ? sum / static_cast<double>(values.evaluated) : 0.0;
    }
    return report;
}

std::string report_to_json(const MetricReport& report) {
    json j;
    j["metrics"] = json::object();
    for (const auto& [name, values] : report.metrics) {
        json m;
        m["average"] = values.average;
        m["evaluated_queries"] = values.evaluated;
        m["per_query"] = values.per_query;
        j["metrics"][name] = std::move(m);
    }
    j["excluded_queries"] = report.excluded_queries;
    j["exclusion_rule"] = "queries with all-zero judgments are excluded from macro-averages";
    return j.dump(2);
}

std::string TextTable::render() const {
    std::vector<std::size_t> widths(header.size(), 0);
    for (std::size_t c = 0; c < header.size(); ++c) {
        widths[c] = header[c].size();
    }
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size() && c < widths.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }
    std::ostringstream out;
    const auto emit_row = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < widths.size(); ++c) {
            const std::string& cell = c < cells.size() ? cells[c] : "";
            out << (c == 0 ? "" : "  ") << cell
                << std::string(widths[c] - std::min(widths[c], cell.size()), ' ');
        }
        out << '\n';
    };
    emit_row(header);
    std::size_t total = 0;
    for (std::size_t w : widths) {
        total += w;
    }
    out << std::string(total + 2 * (widths.empty() ? 0 : widths.size() - 1), '-') << '\n';
    for (const auto& row : rows) {
        emit_row(row);
    }
    return out.str();
}

std::string format_metric(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", value);
    return buf;
}

}  // namespace omniemb
