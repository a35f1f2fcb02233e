// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "omniemb/core.hpp"
#include "omniemb/dataio.hpp"
#include "omniemb/encoder.hpp"
#include "omniemb/fusion.hpp"
#include "omniemb/mining.hpp"
#include "omniemb/retrieval.hpp"
#include "omniemb/rng.hpp"
#include "omniemb/training.hpp"

namespace omniemb {

// ---------------------------------------------------------------------------
// Independent reference implementations. Each one re-derives its result from
// first principles with a different algorithmic shape than the engine
// (direct formulas, full sorts, numeric differentiation), so agreement is
// evidence rather than tautology. They share only the scalar similarity
// function, because tie semantics are defined on bit-identical scores.
// ---------------------------------------------------------------------------

/// NDCG@k evaluated directly from the definition, in long double.
double oracle_ndcg(const std::vector<std::string>& ranked,
                   const std::map<std::string, int>& judgments, std::size_t k);

/// Top-k by scoring every document, fully sorting, then truncating.
std::vector<ScoredHit> oracle_topk(const Embedding& q, const EmbeddingStore& store,
                                   std::size_t k, SimilarityFn fn,
                                   LateFusionCombiner combiner);

/// Hard-negative mining as filter -> stable sort -> truncate.
MinedNegatives oracle_mine(const Embedding& q, const Embedding& pos,
                           const std::vector<std::pair<std::string, Embedding>>& candidates,
                           const MiningConfig& cfg, SimilarityFn fn);

/// InfoNCE evaluated without the max-shift, in long double.
double oracle_infonce(double positive_sim, const std::vector<double>& negative_sims,
                      double temperature);

/// Central finite differences of batch_loss over every LoRA entry.
LoraGrads fd_gradients(const Batch& batch, const EncoderWeights& w, const TrainConfig& cfg,
                       double epsilon);

/// Largest relative error between analytic and reference gradients, with
/// |reference| and an absolute floor in the denominator.
double max_relative_error(const LoraGrads& analytic, const LoraGrads& reference);

/// The frozen encoder path with no LoRA branch at all: inputs -> attention
/// -> mean pool -> W p -> normalize. A fresh encoder (B = 0) must reproduce
/// this bit for bit.
Embedding base_encode(const Stream& s, const EncoderConfig& cfg, const EncoderWeights& w);

// ---------------------------------------------------------------------------
// Seeded random-instance generators used by the self-check, the unit tests
// and the acceptance suite.
// ---------------------------------------------------------------------------

/// Store with n_docs documents of 1..max_streams embeddings each. Roughly a
/// tenth of the documents duplicate an earlier embedding byte for byte, so
/// score ties genuinely occur.
EmbeddingStore random_store(Pcg32& rng, std::size_t n_docs, std::uint32_t dim,
                            std::size_t max_streams);

Embedding random_unit_embedding(Pcg32& rng, std::uint32_t dim);

/// Ranked lists plus judgments over a shared doc-id universe; some queries
/// get all-zero judgments to exercise the exclusion rule.
void random_run_and_qrels(Pcg32& rng, std::size_t n_queries, std::size_t n_docs,
                          RunResult& run, Qrels& qrels);

/// Random pooled-feature batch plus weights with non-zero LoRA factors.
void random_batch_and_weights(Pcg32& rng, std::uint32_t model_dim, std::uint32_t rank,
                              std::size_t batch_size, std::size_t n_negatives, Batch& batch,
                              EncoderWeights& weights);

Stream random_media_stream(Pcg32& rng, std::uint32_t d_in, std::size_t n_frames);

/// Runs compact versions of every oracle suite, printing one line per suite
/// to out. Returns true when all suites pass.
bool run_selfcheck(std::ostream& out);

}  // namespace omniemb
