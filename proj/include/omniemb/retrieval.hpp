// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "omniemb/core.hpp"
#include "omniemb/dataio.hpp"
#include "omniemb/fusion.hpp"

namespace omniemb {

/// One retrieved document. Ranks are 1-based and contiguous; within a
/// result list scores are non-increasing and ties sit in ascending doc_id
/// order.
struct ScoredHit {
    std::string doc_id;
    double score = 0.0;
    std::size_t rank = 0;
};

bool operator==(const ScoredHit& a, const ScoredHit& b);

/// Ranked lists per query, in query order. No duplicate doc ids per query.
struct RunResult {
    std::vector<std::pair<std::string, std::vector<ScoredHit>>> queries;
};

void validate(const RunResult& run);

/// True when a is ranked ahead of b: higher score first, then ascending
/// doc_id. The tie rule is the single source of ordering truth shared by
/// search and its oracle.
bool ranks_before(double score_a, const std::string& id_a, double score_b,
                  const std::string& id_b);

/// Exact top-k search. Store entries are grouped by doc_id, every document
/// is scored with score_document over its stream embeddings, and the k best
/// (per ranks_before) are returned with ranks 1..min(k, n_docs). No
/// approximation. Throws on an empty store, k < 1, or a dim mismatch.
std::vector<ScoredHit> search_topk(const Embedding& q, const EmbeddingStore& store,
                                   std::size_t k, SimilarityFn fn,
                                   LateFusionCombiner combiner);

/// Run files are JSON lines {query_id, doc_id, rank, score}, diffable
/// against oracle runs.
void write_run(const RunResult& run, const std::filesystem::path& path);
RunResult load_run(const std::filesystem::path& path);

}  // namespace omniemb
