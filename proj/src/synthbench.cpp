// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include "omniemb/synthbench.hpp"

#include <cmath>
#include <cstdio>

#include "omniemb/errors.hpp"
#include "omniemb/rng.hpp"

namespace omniemb {

void validate(const SynthSpec& spec) {
    if (spec.n_queries < 1) {
        throw ValidationError("synth spec needs n_queries >= 1");
    }
    if (spec.n_docs < spec.n_queries) {
        throw ValidationError("synth spec needs n_docs >= n_queries");
    }
    if (spec.d_in < kPackingDim) {
        throw ValidationError("synth spec needs d_in >= " + std::to_string(kPackingDim));
    }
    if (!std::isfinite(spec.noise_level) || spec.noise_level < 0.0) {
        throw ValidationError("noise_level must be finite and >= 0");
    }
    if (!(spec.av_conflict_fraction >= 0.0) || !(spec.av_conflict_fraction <= 1.0)) {
        throw ValidationError("av_conflict_fraction must be in [0, 1]");
    }
}

namespace {

/// Random rotation via Gram-Schmidt on a seeded Gaussian matrix (columns
/// orthonormalized in fixed order, fp64 throughout).
std::vector<std::vector<double>> random_rotation(std::uint32_t dim, std::uint64_t seed) {
    Pcg32 rng(seed);
    std::vector<std::vector<double>> cols(dim, std::vector<double>(dim));
    for (auto& col : cols) {
        for (double& v : col) {
            v = rng.next_gaussian();
        }
    }
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t p = 0; p < c; ++p) {
            const double proj = dot_f64(cols[c], cols[p]);
            for (std::size_t i = 0; i < dim; ++i) {
                cols[c][i] -= proj * cols[p][i];
            }
        }
        cols[c] = l2_normalize_f64(cols[c]);
    }
    // Row-major rotation matrix Q with Q[i][j] = cols[j][i].
    std::vector<std::vector<double>> q(dim, std::vector<double>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            q[i][j] = cols[j][i];
        }
    }
    return q;
}

std::vector<double> rotate(const std::vector<std::vector<double>>& q,
                           const std::vector<double>& x) {
    std::vector<double> y(q.size(), 0.0);
    for (std::size_t i = 0; i < q.size(); ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) {
            y[i] += q[i][j] * x[j];
        }
    }
    return y;
}

std::string make_id(const char* prefix, std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%s%04zu", prefix, i);
    return buf;
}

Frame make_frame(double t, const std::vector<double>& values) {
    Frame f;
    f.t = t;
    f.values.assign(values.begin(), values.end());
    return f;
}

MediaItem prototype_query(std::size_t index, const std::vector<double>& prototype) {
    MediaItem q;
    q.id = make_id("q", index);
    Stream s;
    s.modality = Modality::audio;
    for (int t = 0; t < 3; ++t) {
        s.timeline.push_back(make_frame(t, prototype));
    }
    q.streams.push_back(std::move(s));
    return q;
}

}  // namespace

std::vector<std::vector<double>> topic_prototypes(std::size_t n_topics, std::uint32_t d_in,
                                                  std::uint64_t seed) {
    if (n_topics > kMaxTopics) {
        throw ValidationError("at most " + std::to_string(kMaxTopics) + " topics available");
    }
    if (d_in < kPackingDim) {
        throw ValidationError("topic prototypes need d_in >= " + std::to_string(kPackingDim));
    }
    const auto q = random_rotation(d_in, derive_seed(seed, "synth.rotation"));
    std::vector<std::vector<double>> protos(n_topics);
    for (std::size_t t = 0; t < n_topics; ++t) {
        std::vector<double> padded(d_in, 0.0);
        for (std::size_t i = 0; i < kPackingDim; ++i) {
            padded[i] = kTopicPacking[t][i];
        }
        protos[t] = rotate(q, padded);
    }
    return protos;
}

SynthDataset generate_separable(const SynthSpec& spec) {
    validate(spec);
    if (spec.d_in < kPackingDim + 2) {
        throw ValidationError("generate_separable needs d_in >= " +
                              std::to_string(kPackingDim + 2) +
                              " (two reserved noise directions)");
    }
    const std::size_t n_topics = std::min(spec.n_queries, kMaxTopics);

    // The same rotation produces the prototypes and the two noise directions
    // (the rotated images of the spare coordinate axes), so the noise is
    // exactly orthogonal to every topic.
    const auto q = random_rotation(spec.d_in, derive_seed(spec.seed, "synth.rotation"));
    std::vector<std::vector<double>> protos(n_topics);
    for (std::size_t t = 0; t < n_topics; ++t) {
        std::vector<double> padded(spec.d_in, 0.0);
        for (std::size_t i = 0; i < kPackingDim; ++i) {
            padded[i] = kTopicPacking[t][i];
        }
        protos[t] = rotate(q, padded);
    }
    std::vector<std::vector<double>> noise_dirs(2, std::vector<double>(spec.d_in, 0.0));
    for (int nd = 0; nd < 2; ++nd) {
        std::vector<double> axis(spec.d_in, 0.0);
        axis[kPackingDim + static_cast<std::size_t>(nd)] = 1.0;
        noise_dirs[nd] = rotate(q, axis);
    }

    Pcg32 rng(derive_seed(spec.seed, "synth.separable"));
    SynthDataset data;
    constexpr int kFramesPerDoc = 6;

    for (std::size_t d = 0; d < spec.n_docs; ++d) {
        const std::size_t topic = d % n_topics;
        MediaItem doc;
        doc.id = make_id("d", d);
        Stream s;
        s.modality = Modality::audio;
        for (int t = 0; t < kFramesPerDoc; ++t) {
            std::vector<double> frame = protos[topic];
            const double g0 = rng.next_gaussian();
            const double g1 = rng.next_gaussian();
            for (std::size_t i = 0; i < frame.size(); ++i) {
                frame[i] += spec.noise_level * (g0 * noise_dirs[0][i] + g1 * noise_dirs[1][i]);
            }
            s.timeline.push_back(make_frame(t, frame));
        }
        doc.streams.push_back(std::move(s));
        data.corpus.push_back(std::move(doc));
    }

    for (std::size_t qi = 0; qi < spec.n_queries; ++qi) {
        const std::size_t topic = qi % n_topics;
        data.queries.push_back(prototype_query(qi, protos[topic]));
        // Every document of the query's topic is relevant.
        for (std::size_t d = topic; d < spec.n_docs; d += n_topics) {
            data.qrels.judgments[data.queries.back().id][make_id("d", d)] = 1;
        }
    }
    return data;
}

SynthDataset generate_av_conflict(const SynthSpec& spec) {
    validate(spec);
    if (spec.n_queries >= kMaxTopics) {
        throw ValidationError("generate_av_conflict needs n_queries < " +
                              std::to_string(kMaxTopics) +
                              " so distractor topics remain");
    }
    const std::size_t n_distractors = kMaxTopics - spec.n_queries;
    const auto protos = topic_prototypes(kMaxTopics, spec.d_in, spec.seed);

    Pcg32 rng(derive_seed(spec.seed, "synth.av_conflict"));
    const auto noisy = [&](const std::vector<double>& proto) {
        std::vector<double> frame = proto;
        for (double& v : frame) {
            v += spec.noise_level * rng.next_gaussian();
        }
        return frame;
    };

    constexpr int kCleanFrames = 4;
    constexpr int kDistractorFrames = 12;
    constexpr int kPlainFrames = 8;
    const std::size_t n_conflicted = static_cast<std::size_t>(
        std::llround(spec.av_conflict_fraction * static_cast<double>(spec.n_queries)));

    SynthDataset data;
    for (std::size_t d = 0; d < spec.n_docs; ++d) {
        MediaItem doc;
        doc.id = make_id("d", d);
        const bool is_positive = d < spec.n_queries;
        const std::size_t own_topic =
            is_positive ? d : spec.n_queries + (d % n_distractors);

        if (is_positive && d < n_conflicted) {
            // Signal on audio, heavy distractor on video. Per-frame norms
            // match; the distractor only wins by frame count, which is what
            // interleaved pooling is sensitive to and separate scoring is not.
            const std::size_t distractor = spec.n_queries + (d % n_distractors);
            Stream audio;
            audio.modality = Modality::audio;
            for (int t = 0; t < kCleanFrames; ++t) {
                audio.timeline.push_back(make_frame(t, noisy(protos[own_topic])));
            }
            Stream video;
            video.modality = Modality::video;
            for (int t = 0; t < kDistractorFrames; ++t) {
                video.timeline.push_back(make_frame(t, noisy(protos[distractor])));
            }
            doc.streams.push_back(std::move(audio));
            doc.streams.push_back(std::move(video));
        } else {
            // Identical content on both streams, so fused and separate
            // scoring coincide for these documents.
            std::vector<Frame> frames;
            for (int t = 0; t < kPlainFrames; ++t) {
                frames.push_back(make_frame(t, noisy(protos[own_topic])));
            }
            Stream audio;
            audio.modality = Modality::audio;
            audio.timeline = frames;
            Stream video;
            video.modality = Modality::video;
            video.timeline = frames;
            doc.streams.push_back(std::move(audio));
            doc.streams.push_back(std::move(video));
        }
        data.corpus.push_back(std::move(doc));
    }

    for (std::size_t qi = 0; qi < spec.n_queries; ++qi) {
        data.queries.push_back(prototype_query(qi, protos[qi]));
        data.qrels.judgments[data.queries.back().id][make_id("d", qi)] = 1;
    }
    return data;
}

void write_dataset(const SynthDataset& data, const std::filesystem::path& corpus_path,
                   const std::filesystem::path& queries_path,
                   const std::filesystem::path& qrels_path) {
    write_corpus(data.corpus, corpus_path);
    write_corpus(data.queries, queries_path);
    write_qrels(data.qrels, qrels_path);
}

}  // namespace omniemb
