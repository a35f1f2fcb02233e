// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "omniemb/core.hpp"

namespace omniemb {

/// How a multi-stream document becomes embeddings: interleave all media
/// frames into one sequence before encoding, or encode every stream on its
/// own and combine scores at query time.
enum class FusionStrategy { interleaved, separate };

const char* to_string(FusionStrategy s);
FusionStrategy fusion_from_string(const std::string& s);

/// Score combiner for documents that carry one embedding per stream.
enum class LateFusionCombiner { max, mean, sum };

const char* to_string(LateFusionCombiner c);
LateFusionCombiner combiner_from_string(const std::string& s);

/// Merges two or more media streams into a single stream ordered by
/// timestamp. Ties are broken by a fixed modality priority
/// (audio < video < image) so the result is deterministic. Text streams are
/// rejected: only feature-frame media can be interleaved.
Stream interleave(const std::vector<Stream>& streams);

/// Late-fusion document score: applies the combiner to the per-stream
/// similarities {sim(q, e_i)}. A single-embedding document returns that
/// similarity under every combiner.
double score_document(const Embedding& query,
                      const std::vector<std::pair<std::string, Embedding>>& doc,
                      SimilarityFn fn,
                      LateFusionCombiner combiner);

}  // namespace omniemb
