// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "omniemb/core.hpp"

namespace omniemb {

/// "Top-k with percentage to positive threshold": keep only candidates whose
/// similarity is strictly below threshold * sim(q, positive), then take the
/// k_negatives most similar. The strict cutoff drops likely false negatives.
struct MiningConfig {
    double threshold = 0.95;
    std::size_t k_negatives = 2;
};

void validate(const MiningConfig& cfg);

/// One training example: a query, its judged positive, and the mined
/// negatives (at most k_negatives, possibly fewer). degenerate_positive
/// marks queries whose positive similarity was <= 0, where the percentage
/// cutoff is meaningless and mining fell back to the overall top-k.
struct TrainingTriple {
    std::string query_id;
    std::string positive_doc_id;
    std::vector<std::string> negative_doc_ids;
    bool degenerate_positive = false;
};

void validate(const TrainingTriple& t);

struct MinedNegatives {
    std::vector<std::string> ids;  // descending similarity, ties by ascending id
    bool degenerate_positive = false;
};

/// Candidates must exclude the positive document. Ordering of the result is
/// by descending similarity with ties broken by ascending doc_id, so mining
/// is deterministic for float-identical scores.
MinedNegatives mine_hard_negatives(const Embedding& q, const Embedding& pos,
                                   const std::vector<std::pair<std::string, Embedding>>& candidates,
                                   const MiningConfig& cfg, SimilarityFn fn);

/// Triples travel between `mine` and `train` as JSON lines
/// {query_id, positive_doc_id, negative_doc_ids, degenerate_positive}.
void write_triples(const std::vector<TrainingTriple>& triples,
                   const std::filesystem::path& path);
std::vector<TrainingTriple> load_triples(const std::filesystem::path& path);

}  // namespace omniemb
