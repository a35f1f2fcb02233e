// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "omniemb/core.hpp"
#include "omniemb/fusion.hpp"

namespace omniemb {

enum class AttentionMaskMode { causal, bidirectional };

const char* to_string(AttentionMaskMode m);
AttentionMaskMode mask_mode_from_string(const std::string& s);

inline constexpr std::uint32_t kDefaultVocabSize = 4096;
inline constexpr std::uint32_t kDefaultModelDim = 32;
inline constexpr std::uint32_t kDefaultInputDim = 16;

struct EncoderConfig {
    std::uint32_t vocab_size = kDefaultVocabSize;
    std::uint32_t model_dim = kDefaultModelDim;   // d
    std::uint32_t input_dim = kDefaultInputDim;   // d_in of feature frames
    AttentionMaskMode mask_mode = AttentionMaskMode::bidirectional;
    std::uint64_t seed = 42;
};

void validate(const EncoderConfig& cfg);

/// Low-rank adapter on the output projection. Full-scale models typically
/// run r=16, alpha=32; the toy defaults keep the same alpha/r ratio of 2.
struct LoraConfig {
    std::uint32_t rank = 2;
    double alpha = 4.0;

    double scaling() const { return alpha / static_cast<double>(rank); }
};

void validate(const LoraConfig& lora, std::uint32_t model_dim);

/// Row-major dense matrix of doubles. All encoder math runs in fp64; only
/// the final embedding is stored as f32.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// y = M x (column-vector convention).
std::vector<double> matvec(const Mat& m, const std::vector<double>& x);

/// All model parameters. Everything except the LoRA factors is a pure
/// function of the seed and never changes; training mutates only lora_a and
/// lora_b. lora_b starts at zero so a fresh encoder is exactly the base model.
struct EncoderWeights {
    Mat token_table;    // vocab_size x d
    Mat frame_adapter;  // d_in x d
    Mat wq, wk, wv, wo; // d x d
    Mat projection;     // d x d
    Mat lora_a;         // r x d
    Mat lora_b;         // d x r
    LoraConfig lora;
};

EncoderWeights init_weights(const EncoderConfig& cfg, const LoraConfig& lora);

/// Whitespace-split, lowercase, FNV-1a 64-bit hash reduced modulo
/// vocab_size. Empty text gives an empty sequence.
std::vector<std::uint32_t> tokenize(const std::string& text, std::uint32_t vocab_size);

/// Single-head scaled dot-product attention over the rows of x (n x d).
/// Causal mode masks attention to positions j > i; bidirectional applies no
/// mask. Attention rows are softmax-normalized (each sums to 1).
Mat attention_forward(const Mat& x, AttentionMaskMode mode, const EncoderWeights& w);

/// Input lookup/adaptation: token rows from the embedding table, or frames
/// mapped through the frame adapter. Result is n x d.
Mat input_matrix(const Stream& s, const EncoderConfig& cfg, const EncoderWeights& w);

/// attention -> mean pool, in fp64. This stage is independent of the LoRA
/// factors, so the training loop caches its output per stream.
std::vector<double> pooled_features(const Stream& s, const EncoderConfig& cfg,
                                    const EncoderWeights& w);

/// projection(x) = W x + (alpha/r) * B (A x)
std::vector<double> project(const EncoderWeights& w, const std::vector<double>& pooled);

/// Full pipeline: inputs -> attention -> mean pool -> project -> l2 normalize.
/// Deterministic given (cfg.seed, input). Throws on an empty stream.
Embedding encode_stream(const Stream& s, const EncoderConfig& cfg, const EncoderWeights& w);

/// Encodes one document or query. separate: one embedding per stream,
/// labeled with the modality name. interleaved: multi-stream items are
/// merged into one frame sequence and produce a single "fused" embedding;
/// single-stream items have nothing to fuse and keep their modality label.
std::vector<std::pair<std::string, Embedding>> encode_item(const MediaItem& item,
                                                           FusionStrategy strategy,
                                                           const EncoderConfig& cfg,
                                                           const EncoderWeights& w);

}  // namespace omniemb
