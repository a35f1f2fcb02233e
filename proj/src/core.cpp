// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include "omniemb/core.hpp"

#include <cmath>
#include <set>

namespace omniemb {

const char* to_string(Modality m) {
    switch (m) {
        case Modality::text: return "text";
        case Modality::image: return "image";
        case Modality::audio: return "audio";
        case Modality::video: return "video";
    }
    return "unknown";
}

Modality modality_from_string(const std::string& s) {
    if (s == "text") return Modality::text;
    if (s == "image") return Modality::image;
    if (s == "audio") return Modality::audio;
    if (s == "video") return Modality::video;
    throw ValidationError("unknown modality '" + s + "' (expected text|image|audio|video)");
}

const char* to_string(SimilarityFn fn) {
    return fn == SimilarityFn::cosine ? "cosine" : "dot";
}

SimilarityFn similarity_from_string(const std::string& s) {
    if (s == "cosine") return SimilarityFn::cosine;
    if (s == "dot") return SimilarityFn::dot;
    throw ValidationError("unknown similarity '" + s + "' (expected cosine|dot)");
}

Embedding make_embedding(std::vector<float> values, bool normalized) {
    Embedding e;
    e.dim = static_cast<std::uint32_t>(values.size());
    e.values = std::move(values);
    e.normalized = normalized;
    validate(e);
    return e;
}

void validate(const Embedding& e, const std::string& context) {
    if (e.values.size() != e.dim) {
        throw ValidationError(context + ": values.size() != dim");
    }
    if (e.dim == 0) {
        throw ValidationError(context + ": dim must be positive");
    }
    for (float v : e.values) {
        if (!std::isfinite(v)) {
            throw ValidationError(context + ": non-finite entry");
        }
    }
    if (e.normalized) {
        double n = l2_norm(e);
        if (std::fabs(n - 1.0) > 1e-6) {
            throw ValidationError(context + ": flagged normalized but |norm-1| > 1e-6");
        }
    }
}

void validate(const Stream& s, const std::string& context) {
    bool has_tokens = !s.token_ids.empty();
    bool has_timeline = !s.timeline.empty();
    if (has_tokens == has_timeline) {
        throw ValidationError(context + ": exactly one of token_ids/timeline must be populated");
    }
    if (s.modality == Modality::text) {
        if (!has_tokens) {
            throw ValidationError(context + ": text stream requires token_ids");
        }
        return;
    }
    if (!has_timeline) {
        throw ValidationError(context + ": " + to_string(s.modality) + " stream requires a timeline");
    }
    std::size_t d_in = s.timeline.front().values.size();
    double prev_t = -1.0;
    for (const Frame& f : s.timeline) {
        if (f.t < 0.0 || !std::isfinite(f.t)) {
            throw ValidationError(context + ": timestamps must be finite and non-negative");
        }
        if (f.t < prev_t) {
            throw ValidationError(context + ": timestamps must be non-decreasing");
        }
        prev_t = f.t;
        if (f.values.size() != d_in) {
            throw ValidationError(context + ": frames must share one input dim");
        }
        if (f.values.empty()) {
            throw ValidationError(context + ": empty frame");
        }
        for (float v : f.values) {
            if (!std::isfinite(v)) {
                throw ValidationError(context + ": non-finite frame entry");
            }
        }
    }
}

void validate(const MediaItem& item) {
    if (item.id.empty()) {
        throw ValidationError("media item with empty id");
    }
    if (item.streams.empty()) {
        throw ValidationError("item '" + item.id + "': streams must be non-empty");
    }
    std::set<Modality> seen;
    for (const Stream& s : item.streams) {
        validate(s, "item '" + item.id + "'");
        if (!seen.insert(s.modality).second) {
            throw ValidationError("item '" + item.id + "': duplicate modality " +
                                  to_string(s.modality));
        }
    }
}

double l2_norm(const Embedding& e) {
    double acc = 0.0;
    for (float v : e.values) {
        acc += static_cast<double>(v) * static_cast<double>(v);
    }
    return std::sqrt(acc);
}

Embedding l2_normalize(const Embedding& e) {
    validate(e);
    if (e.normalized) {
        return e;
    }
    double n = l2_norm(e);
    if (n == 0.0) {
        throw ValidationError("l2_normalize: zero vector");
    }
    Embedding out;
    out.dim = e.dim;
    out.values.reserve(e.dim);
    for (float v : e.values) {
        out.values.push_back(static_cast<float>(static_cast<double>(v) / n));
    }
    out.normalized = true;
    return out;
}

double similarity(const Embedding& a, const Embedding& b, SimilarityFn fn) {
    if (a.dim != b.dim) {
        throw ValidationError("similarity: dimension mismatch (" + std::to_string(a.dim) +
                              " vs " + std::to_string(b.dim) + ")");
    }
    double dot = 0.0;
    for (std::uint32_t i = 0; i < a.dim; ++i) {
        dot += static_cast<double>(a.values[i]) * static_cast<double>(b.values[i]);
    }
    if (fn == SimilarityFn::dot) {
        return dot;
    }
    double na = l2_norm(a);
    double nb = l2_norm(b);
    if (na == 0.0 || nb == 0.0) {
        throw ValidationError("similarity: cosine with zero vector");
    }
    return dot / (na * nb);
}

double dot_f64(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double norm_f64(const std::vector<double>& v) {
    return std::sqrt(dot_f64(v, v));
}

std::vector<double> l2_normalize_f64(const std::vector<double>& v) {
    double n = norm_f64(v);
    if (n == 0.0) {
        throw ValidationError("l2_normalize: zero vector");
    }
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = v[i] / n;
    }
    return out;
}

}  // namespace omniemb
