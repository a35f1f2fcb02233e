// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "omniemb/core.hpp"
#include "omniemb/dataio.hpp"

namespace omniemb {

/// Precomputed line packing: 32 unit vectors in R^16 with pairwise
/// |cosine| <= 0.195. Source of all topic prototypes.
extern const double kTopicPacking[32][16];

inline constexpr std::size_t kMaxTopics = 32;
inline constexpr std::size_t kPackingDim = 16;

struct SynthSpec {
    std::size_t n_queries = 16;
    std::size_t n_docs = 64;
    std::uint32_t d_in = 18;  // >= kPackingDim; extra dims carry separable noise
    std::uint64_t seed = 7;
    double noise_level = 0.25;
    double av_conflict_fraction = 0.5;
};

void validate(const SynthSpec& spec);

struct SynthDataset {
    std::vector<MediaItem> corpus;
    std::vector<MediaItem> queries;
    Qrels qrels;
};

/// Topic directions: the packing rows zero-padded to d_in and passed through
/// a seeded random rotation. Rotation preserves every pairwise cosine, so
/// distinct topics stay near-orthogonal (|cos| <= 0.195) for any seed.
std::vector<std::vector<double>> topic_prototypes(std::size_t n_topics, std::uint32_t d_in,
                                                  std::uint64_t seed);

/// Separable retrieval set: one topic per query; documents are their topic
/// prototype plus Gaussian noise of scale noise_level confined to two
/// rotated directions orthogonal to every prototype (so a rank-2 adapter can
/// learn to suppress it). All documents sharing the query's topic are judged
/// relevant (binary). Queries are clean prototypes. Requires d_in >= 18.
SynthDataset generate_separable(const SynthSpec& spec);

/// Adversarial audio+video set: each query has exactly one positive
/// document. A conflicted positive carries the query topic on its audio
/// stream and a strong distractor topic (same frame norm, three times the
/// frames) on its video stream: interleaving dilutes the signal, separate
/// encoding isolates it. Unconflicted documents duplicate identical content
/// into both streams. Requires n_queries < 32 so distractor topics exist.
SynthDataset generate_av_conflict(const SynthSpec& spec);

/// Convenience: writes corpus, queries and qrels of a dataset side by side.
void write_dataset(const SynthDataset& data, const std::filesystem::path& corpus_path,
                   const std::filesystem::path& queries_path,
                   const std::filesystem::path& qrels_path);

}  // namespace omniemb
