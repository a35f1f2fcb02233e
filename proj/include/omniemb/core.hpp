// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "omniemb/errors.hpp"

namespace omniemb {

// ---------------------------------------------------------------------------
// Domain types shared by all modules. Everything here is an immutable value
// type; operations are pure functions.
// ---------------------------------------------------------------------------

enum class Modality { text, image, audio, video };

const char* to_string(Modality m);
Modality modality_from_string(const std::string& s);

/// Dense vector produced by the encoder. Stored as 32-bit floats; all
/// arithmetic on it accumulates in 64-bit (sequential, index-ascending) so
/// scores are bit-reproducible across runs.
struct Embedding {
    std::vector<float> values;
    std::uint32_t dim = 0;
    bool normalized = false;
};

Embedding make_embedding(std::vector<float> values, bool normalized = false);

/// Throws ValidationError when an invariant is broken: values.size() == dim,
/// all entries finite, and |l2 norm - 1| <= 1e-6 when flagged normalized.
void validate(const Embedding& e, const std::string& context = "embedding");

/// One timestamped feature frame of a media stream.
struct Frame {
    double t = 0.0;
    std::vector<float> values;
};

/// A single modality stream: token ids for text, a timestamped frame
/// timeline for image/audio/video. Exactly one of the two is populated.
struct Stream {
    Modality modality = Modality::text;
    std::vector<std::uint32_t> token_ids;
    std::vector<Frame> timeline;
};

void validate(const Stream& s, const std::string& context = "stream");

/// A document or query: one or more streams with distinct modalities.
struct MediaItem {
    std::string id;
    std::vector<Stream> streams;
};

void validate(const MediaItem& item);

enum class SimilarityFn { cosine, dot };

const char* to_string(SimilarityFn fn);
SimilarityFn similarity_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Vector math. Internal accumulation is double precision with a fixed
// index-ascending order; results are deterministic for a given input.
// ---------------------------------------------------------------------------

/// Returns the unit-norm copy of e (direction preserved, normalized flag set).
/// Embeddings already flagged normalized are returned unchanged, which makes
/// the operation exactly idempotent. Throws ValidationError on a zero vector.
Embedding l2_normalize(const Embedding& e);

double l2_norm(const Embedding& e);

/// similarity(a, b, fn): cosine = a.b / (|a||b|), dot = a.b. Symmetric in its
/// arguments bit-for-bit. Throws on dimension mismatch, and on a zero vector
/// under cosine.
double similarity(const Embedding& a, const Embedding& b, SimilarityFn fn);

// double-precision helpers used by the training path
double dot_f64(const std::vector<double>& a, const std::vector<double>& b);
double norm_f64(const std::vector<double>& v);
std::vector<double> l2_normalize_f64(const std::vector<double>& v);

}  // namespace omniemb
