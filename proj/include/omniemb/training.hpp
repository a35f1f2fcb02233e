// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "omniemb/core.hpp"
#include "omniemb/dataio.hpp"
#include "omniemb/encoder.hpp"
#include "omniemb/mining.hpp"

namespace omniemb {

struct TrainConfig {
    double temperature = 0.05;
    double learning_rate = 0.05;
    std::size_t epochs = 10;
    std::size_t batch_size = 8;
    bool in_batch_negatives = true;
    std::uint64_t seed = 42;
    MiningConfig mining;
    SimilarityFn similarity = SimilarityFn::cosine;
    LoraConfig lora;  // shape of the trained adapter
};

void validate(const TrainConfig& cfg);

/// One contrastive example in pooled-feature space. Pooled features do not
/// depend on the LoRA factors, so they are computed once and reused across
/// every optimizer step and finite-difference probe.
struct TrainExample {
    std::vector<double> query;
    std::vector<double> positive;
    std::vector<std::vector<double>> negatives;
};

using Batch = std::vector<TrainExample>;

/// Pooled features of an item: its single stream, or the timestamp-
/// interleaved merge of its streams. Multi-stream items therefore train
/// against one fused vector per document.
std::vector<double> pooled_item_features(const MediaItem& item, const EncoderConfig& cfg,
                                         const EncoderWeights& w);

/// InfoNCE over precomputed similarities; sims enter as (positive, negatives).
/// L = -log[exp(s+/t) / sum exp(s_j/t)], evaluated with the log-sum-exp max
/// shift. Zero negatives give exactly 0.
double infonce_from_sims(double positive_sim, const std::vector<double>& negative_sims,
                         double temperature);

/// Embedding-level convenience form of the same loss.
double infonce_loss(const Embedding& q, const Embedding& pos,
                    const std::vector<Embedding>& negs, double temperature, SimilarityFn fn);

/// Mean InfoNCE over a batch, forward pass only: pooled -> LoRA projection
/// -> l2 normalize -> similarities. This is the target the gradient check
/// differentiates numerically.
double batch_loss(const Batch& batch, const EncoderWeights& w, const TrainConfig& cfg);

struct LoraGrads {
    Mat a;  // same shape as weights.lora_a
    Mat b;  // same shape as weights.lora_b
};

/// Exact analytic gradient of batch_loss with respect to the LoRA factors
/// only (every other weight is frozen). Backpropagates through projection
/// and normalization for query, positive and negative encodings alike.
LoraGrads infonce_grad(const Batch& batch, const EncoderWeights& w, const TrainConfig& cfg);

struct TrainResult {
    EncoderWeights weights;
    std::vector<double> step_losses;        // one entry per optimizer step
    std::vector<double> epoch_mean_losses;  // one entry per epoch
    std::size_t degenerate_mining_queries = 0;
};

/// Plain SGD on the LoRA factors. Per epoch: re-embed the corpus with the
/// current weights, re-mine hard negatives, then sweep seeded-shuffled
/// batches where each example sees its mined negatives plus (optionally) the
/// other in-batch positives. Mined lists are deduplicated against the
/// batch's positives first. Deterministic for a given (seed, data).
/// Queries without a judged positive in qrels fail before any step runs.
TrainResult train(const std::vector<MediaItem>& corpus, const std::vector<MediaItem>& queries,
                  const Qrels& qrels, const EncoderConfig& enc_cfg, const TrainConfig& cfg);

/// Loss trace as CSV with a "step,loss" header.
void write_loss_trace(const std::vector<double>& step_losses,
                      const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Weights persistence. The file is an ordinary embedding store (dim =
// model_dim) holding the encoder seed and shape metadata plus the A and B
// factors; the frozen weights are regenerated from the seed on load.
// ---------------------------------------------------------------------------

void save_lora(const EncoderConfig& cfg, const EncoderWeights& w,
               const std::filesystem::path& path);

/// Rebuilds the full encoder from a weights file. The stored encoder config
/// is returned through out_cfg.
EncoderWeights load_lora(const std::filesystem::path& path, EncoderConfig& out_cfg);

}  // namespace omniemb
