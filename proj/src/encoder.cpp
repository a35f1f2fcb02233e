// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include "omniemb/encoder.hpp"

#include <cctype>
#include <cmath>

#include "omniemb/rng.hpp"

namespace omniemb {

const char* to_string(AttentionMaskMode m) {
    return m == AttentionMaskMode::causal ? "causal" : "bidirectional";
}

AttentionMaskMode mask_mode_from_string(const std::string& s) {
    if (s == "causal") return AttentionMaskMode::causal;
    if (s == "bidirectional") return AttentionMaskMode::bidirectional;
    throw ValidationError("unknown mask mode '" + s + "' (expected causal|bidirectional)");
}

void validate(const EncoderConfig& cfg) {
    if (cfg.vocab_size < 2) {
        throw ValidationError("encoder.vocab_size must be >= 2");
    }
    if (cfg.model_dim == 0 || cfg.input_dim == 0) {
        throw ValidationError("encoder dims must be positive");
    }
}

void validate(const LoraConfig& lora, std::uint32_t model_dim) {
    if (lora.rank == 0 || lora.rank > model_dim) {
        throw ValidationError("lora.r must satisfy 1 <= r <= model_dim");
    }
    if (!(lora.alpha > 0.0)) {
        throw ValidationError("lora.alpha must be positive");
    }
}

std::vector<double> matvec(const Mat& m, const std::vector<double>& x) {
    std::vector<double> y(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) {
            acc += m(i, j) * x[j];
        }
        y[i] = acc;
    }
    return y;
}

namespace {

void fill_uniform(Mat& m, Pcg32& rng, double bound) {
    for (double& v : m.data) {
        v = rng.uniform(-bound, bound);
    }
}

}  // namespace

EncoderWeights init_weights(const EncoderConfig& cfg, const LoraConfig& lora) {
    validate(cfg);
    validate(lora, cfg.model_dim);
    const std::size_t d = cfg.model_dim;
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));

    EncoderWeights w;
    w.lora = lora;
    w.token_table = Mat(cfg.vocab_size, d);
    w.frame_adapter = Mat(cfg.input_dim, d);
    w.wq = Mat(d, d);
    w.wk = Mat(d, d);
    w.wv = Mat(d, d);
    w.wo = Mat(d, d);
    w.projection = Mat(d, d);
    w.lora_a = Mat(lora.rank, d);
    w.lora_b = Mat(d, lora.rank);  // zero-initialized: fresh encoder == base model

    // Frozen parameters are drawn in a fixed order from one seeded generator.
    Pcg32 frozen(derive_seed(cfg.seed, "encoder.frozen"));
    fill_uniform(w.token_table, frozen, bound);
    fill_uniform(w.frame_adapter, frozen, bound);
    fill_uniform(w.wq, frozen, bound);
    fill_uniform(w.wk, frozen, bound);
    fill_uniform(w.wv, frozen, bound);
    fill_uniform(w.wo, frozen, bound);
    fill_uniform(w.projection, frozen, bound);

    Pcg32 adapter(derive_seed(cfg.seed, "encoder.lora_a"));
    fill_uniform(w.lora_a, adapter, bound);
    return w;
}

std::vector<std::uint32_t> tokenize(const std::string& text, std::uint32_t vocab_size) {
    if (vocab_size < 2) {
        throw ValidationError("tokenize: vocab_size must be >= 2");
    }
    std::vector<std::uint32_t> ids;
    std::string token;
    auto flush = [&] {
        if (!token.empty()) {
            ids.push_back(static_cast<std::uint32_t>(fnv1a64(token) % vocab_size));
            token.clear();
        }
    };
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            flush();
        } else {
            token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    flush();
    return ids;
}

Mat attention_forward(const Mat& x, AttentionMaskMode mode, const EncoderWeights& w) {
    const std::size_t n = x.rows;
    const std::size_t d = x.cols;
    if (n == 0) {
        throw ValidationError("attention_forward: empty input");
    }
    if (d != w.wq.cols) {
        throw ValidationError("attention_forward: input dim does not match weights");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));

    // per-position q/k/v projections
    Mat q(n, d), k(n, d), v(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < d; ++r) {
            double aq = 0.0, ak = 0.0, av = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                double xv = x(i, c);
                aq += w.wq(r, c) * xv;
                ak += w.wk(r, c) * xv;
                av += w.wv(r, c) * xv;
            }
            q(i, r) = aq;
            k(i, r) = ak;
            v(i, r) = av;
        }
    }

    Mat out(n, d);
    std::vector<double> scores(n);
    std::vector<double> mixed(d);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t limit = (mode == AttentionMaskMode::causal) ? i + 1 : n;
        double max_score = -1e300;
        for (std::size_t j = 0; j < limit; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                s += q(i, c) * k(j, c);
            }
            s *= scale;
            scores[j] = s;
            if (s > max_score) {
                max_score = s;
            }
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < limit; ++j) {
            scores[j] = std::exp(scores[j] - max_score);
            denom += scores[j];
        }
        for (std::size_t c = 0; c < d; ++c) {
            mixed[c] = 0.0;
        }
        for (std::size_t j = 0; j < limit; ++j) {
            double weight = scores[j] / denom;
            for (std::size_t c = 0; c < d; ++c) {
                mixed[c] += weight * v(j, c);
            }
        }
        for (std::size_t r = 0; r < d; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                acc += w.wo(r, c) * mixed[c];
            }
            out(i, r) = acc;
        }
    }
    return out;
}

Mat input_matrix(const Stream& s, const EncoderConfig& cfg, const EncoderWeights& w) {
    validate(s, "encode input");
    const std::size_t d = cfg.model_dim;
    if (s.modality == Modality::text) {
        Mat x(s.token_ids.size(), d);
        for (std::size_t i = 0; i < s.token_ids.size(); ++i) {
            std::uint32_t id = s.token_ids[i];
            if (id >= cfg.vocab_size) {
                throw ValidationError("token id " + std::to_string(id) +
                                      " out of range for vocab_size " +
                                      std::to_string(cfg.vocab_size));
            }
            for (std::size_t c = 0; c < d; ++c) {
                x(i, c) = w.token_table(id, c);
            }
        }
        return x;
    }
    const std::size_t d_in = s.timeline.front().values.size();
    if (d_in != cfg.input_dim) {
        throw ValidationError("frame dim " + std::to_string(d_in) +
                              " does not match encoder.input_dim " +
                              std::to_string(cfg.input_dim));
    }
    Mat x(s.timeline.size(), d);
    for (std::size_t i = 0; i < s.timeline.size(); ++i) {
        const Frame& f = s.timeline[i];
        for (std::size_t c = 0; c < d; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < d_in; ++k) {
                acc += static_cast<double>(f.values[k]) * w.frame_adapter(k, c);
            }
            x(i, c) = acc;
        }
    }
    return x;
}

std::vector<double> pooled_features(const Stream& s, const EncoderConfig& cfg,
                                    const EncoderWeights& w) {
    Mat x = input_matrix(s, cfg, w);
    if (x.rows == 0) {
        throw ValidationError("encode_stream: empty stream");
    }
    Mat h = attention_forward(x, cfg.mask_mode, w);
    std::vector<double> pooled(h.cols, 0.0);
    for (std::size_t i = 0; i < h.rows; ++i) {
        for (std::size_t c = 0; c < h.cols; ++c) {
            pooled[c] += h(i, c);
        }
    }
    for (double& v : pooled) {
        v /= static_cast<double>(h.rows);
    }
    return pooled;
}

std::vector<double> project(const EncoderWeights& w, const std::vector<double>& pooled) {
    std::vector<double> z = matvec(w.projection, pooled);
    std::vector<double> ax = matvec(w.lora_a, pooled);
    const double scaling = w.lora.scaling();
    for (std::size_t i = 0; i < z.size(); ++i) {
        double acc = 0.0;
        for (std::size_t r = 0; r < w.lora_b.cols; ++r) {
            acc += w.lora_b(i, r) * ax[r];
        }
        z[i] += scaling * acc;
    }
    return z;
}

Embedding encode_stream(const Stream& s, const EncoderConfig& cfg, const EncoderWeights& w) {
    std::vector<double> z = l2_normalize_f64(project(w, pooled_features(s, cfg, w)));
    Embedding e;
    e.dim = cfg.model_dim;
    e.values.reserve(z.size());
    for (double v : z) {
        e.values.push_back(static_cast<float>(v));
    }
    e.normalized = true;
    return e;
}

std::vector<std::pair<std::string, Embedding>> encode_item(const MediaItem& item,
                                                           FusionStrategy strategy,
                                                           const EncoderConfig& cfg,
                                                           const EncoderWeights& w) {
    validate(item);
    std::vector<std::pair<std::string, Embedding>> out;
    if (item.streams.size() == 1 || strategy == FusionStrategy::separate) {
        for (const Stream& s : item.streams) {
            out.emplace_back(to_string(s.modality), encode_stream(s, cfg, w));
        }
        return out;
    }
    Stream fused = interleave(item.streams);
    out.emplace_back("fused", encode_stream(fused, cfg, w));
    return out;
}

}  // namespace omniemb
