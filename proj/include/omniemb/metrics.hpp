// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "omniemb/dataio.hpp"
#include "omniemb/retrieval.hpp"

namespace omniemb {

/// Per-query scores plus their macro-average for one metric. Queries whose
/// judgments are all zero are excluded from the average (undefined ideal
/// gain); their ids are recorded on the report so the exclusion is visible.
struct MetricValues {
    std::map<std::string, double> per_query;
    double average = 0.0;
    std::size_t evaluated = 0;
};

struct MetricReport {
    std::map<std::string, MetricValues> metrics;  // "ndcg@10" -> values
    std::vector<std::string> excluded_queries;
};

/// NDCG@k with gain 2^grade - 1 and discount log2(rank + 1); the ideal DCG
/// is computed over the judgments sorted by grade and truncated at k.
/// Documents missing from the judgments count as grade 0. Returns 0 when
/// the ideal gain is zero (caller decides whether to exclude such queries).
double ndcg_at_k(const std::vector<std::string>& ranked,
                 const std::map<std::string, int>& judgments, std::size_t k);

/// Fraction of the relevant documents (grade > 0) found in the top k.
/// Returns 0 when nothing is relevant.
double recall_at_k(const std::vector<std::string>& ranked,
                   const std::map<std::string, int>& judgments, std::size_t k);

/// NDCG@k and Recall@k per query for every k, plus macro-averages over the
/// evaluated (non-excluded) queries. Every run query must appear in the
/// qrels; missing ones are reported together in one error.
MetricReport evaluate_run(const RunResult& run, const Qrels& qrels,
                          const std::vector<std::size_t>& ks);

/// Report serialization: machine-readable JSON and a fixed-width text table
/// (rows = configurations, columns = settings/metrics).
std::string report_to_json(const MetricReport& report);

struct TextTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Fixed-width rendering with a rule under the header.
    std::string render() const;
};

/// Formats a metric value for table cells (4 decimals, "--" when absent).
std::string format_metric(double value);

}  // namespace omniemb
