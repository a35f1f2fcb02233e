// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include "omniemb/training.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include "omniemb/errors.hpp"
#include "omniemb/fusion.hpp"
#include "omniemb/rng.hpp"

namespace omniemb {

void validate(const TrainConfig& cfg) {
    if (!(cfg.temperature > 0.0)) {
        throw ValidationError("temperature must be positive");
    }
    if (!(cfg.learning_rate > 0.0)) {
        throw ValidationError("learning rate must be positive");
    }
    if (cfg.in_batch_negatives && cfg.batch_size < 2) {
        throw ValidationError("batch_size must be >= 2 when in-batch negatives are enabled");
    }
    if (cfg.batch_size < 1) {
        throw ValidationError("batch_size must be >= 1");
    }
    validate(cfg.mining);
}

std::vector<double> pooled_item_features(const MediaItem& item, const EncoderConfig& cfg,
                                         const EncoderWeights& w) {
    validate(item);
    if (item.streams.size() == 1) {
        return pooled_features(item.streams.front(), cfg, w);
    }
    return pooled_features(interleave(item.streams), cfg, w);
}

double infonce_from_sims(double positive_sim, const std::vector<double>& negative_sims,
                         double temperature) {
    if (!(temperature > 0.0)) {
        throw ValidationError("temperature must be positive");
    }
    double max_logit = positive_sim / temperature;
    for (double s : negative_sims) {
        max_logit = std::max(max_logit, s / temperature);
    }
    double sum = std::exp(positive_sim / temperature - max_logit);
    for (double s : negative_sims) {
        sum += std::exp(s / temperature - max_logit);
    }
    return max_logit + std::log(sum) - positive_sim / temperature;
}

double infonce_loss(const Embedding& q, const Embedding& pos,
                    const std::vector<Embedding>& negs, double temperature, SimilarityFn fn) {
    std::vector<double> negative_sims;
    negative_sims.reserve(negs.size());
    for (const Embedding& n : negs) {
        negative_sims.push_back(similarity(q, n, fn));
    }
    return infonce_from_sims(similarity(q, pos, fn), negative_sims, temperature);
}

namespace {

/// z = W p + s B (A p) and its unit-norm direction; keeps the intermediates
/// the backward pass needs.
struct Encoded {
    std::vector<double> ap;    // A p, length r
    std::vector<double> z;     // pre-normalization projection
    std::vector<double> unit;  // z / |z|
    double norm = 0.0;
};

Encoded encode_pooled(const EncoderWeights& w, const std::vector<double>& pooled) {
    Encoded enc;
    enc.ap = matvec(w.lora_a, pooled);
    enc.z = matvec(w.projection, pooled);
    const double s = w.lora.scaling();
    for (std::size_t i = 0; i < enc.z.size(); ++i) {
        double delta = 0.0;
        for (std::size_t j = 0; j < enc.ap.size(); ++j) {
            delta += w.lora_b(i, j) * enc.ap[j];
        }
        enc.z[i] += s * delta;
    }
    enc.norm = norm_f64(enc.z);
    if (enc.norm == 0.0) {
        throw ValidationError("projection produced a zero vector; cannot normalize");
    }
    enc.unit.resize(enc.z.size());
    for (std::size_t i = 0; i < enc.z.size(); ++i) {
        enc.unit[i] = enc.z[i] / enc.norm;
    }
    return enc;
}

/// Per-example forward pass: encode query, positive, negatives; similarities
/// are dot products of the unit vectors (identical to cosine here).
struct ExampleForward {
    Encoded query;
    Encoded positive;
    std::vector<Encoded> negatives;
    std::vector<double> sims;  // [0] = positive, then negatives
    double loss = 0.0;
};

ExampleForward forward_example(const TrainExample& ex, const EncoderWeights& w,
                               const TrainConfig& cfg) {
    ExampleForward f;
    f.query = encode_pooled(w, ex.query);
    f.positive = encode_pooled(w, ex.positive);
    f.negatives.reserve(ex.negatives.size());
    f.sims.reserve(ex.negatives.size() + 1);
    f.sims.push_back(dot_f64(f.query.unit, f.positive.unit));
    for (const auto& pooled : ex.negatives) {
        f.negatives.push_back(encode_pooled(w, pooled));
        f.sims.push_back(dot_f64(f.query.unit, f.negatives.back().unit));
    }
    std::vector<double> negative_sims(f.sims.begin() + 1, f.sims.end());
    f.loss = infonce_from_sims(f.sims.front(), negative_sims, cfg.temperature);
    return f;
}

/// Propagates dL/d(unit vector) through the normalization and the LoRA
/// branch, accumulating into the factor gradients. For e = z/|z|,
/// dL/dz = (g - (g.e) e) / |z|; then dL/dB = s g_z (A p)^T and
/// dL/dA = s B^T g_z p^T.
void accumulate(const Encoded& enc, const std::vector<double>& pooled,
                const std::vector<double>& g_unit, const EncoderWeights& w, LoraGrads& grads) {
    const double ge = dot_f64(g_unit, enc.unit);
    const std::size_t d = enc.z.size();
    std::vector<double> g_z(d);
    for (std::size_t i = 0; i < d; ++i) {
        g_z[i] = (g_unit[i] - ge * enc.unit[i]) / enc.norm;
    }
    const double s = w.lora.scaling();
    const std::size_t r = w.lora_a.rows;
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < r; ++j) {
            grads.b(i, j) += s * g_z[i] * enc.ap[j];
        }
    }
    for (std::size_t j = 0; j < r; ++j) {
        double bt_gz = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            bt_gz += w.lora_b(i, j) * g_z[i];
        }
        for (std::size_t c = 0; c < pooled.size(); ++c) {
            grads.a(j, c) += s * bt_gz * pooled[c];
        }
    }
}

}  // namespace

double batch_loss(const Batch& batch, const EncoderWeights& w, const TrainConfig& cfg) {
    if (batch.empty()) {
        throw ValidationError("batch_loss: empty batch");
    }
    double total = 0.0;
    for (const TrainExample& ex : batch) {
        total += forward_example(ex, w, cfg).loss;
    }
    return total / static_cast<double>(batch.size());
}

LoraGrads infonce_grad(const Batch& batch, const EncoderWeights& w, const TrainConfig& cfg) {
    if (batch.empty()) {
        throw ValidationError("infonce_grad: empty batch");
    }
    LoraGrads grads;
    grads.a = Mat(w.lora_a.rows, w.lora_a.cols);
    grads.b = Mat(w.lora_b.rows, w.lora_b.cols);
    const double inv_n = 1.0 / static_cast<double>(batch.size());

    for (const TrainExample& ex : batch) {
        const ExampleForward f = forward_example(ex, w, cfg);

        // Softmax over logits sims/t: dL/ds_j = (p_j - [j == positive]) / t.
        std::vector<double> dl_ds(f.sims.size());
        double max_logit = f.sims[0] / cfg.temperature;
        for (double s : f.sims) {
            max_logit = std::max(max_logit, s / cfg.temperature);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < f.sims.size(); ++j) {
            dl_ds[j] = std::exp(f.sims[j] / cfg.temperature - max_logit);
            z += dl_ds[j];
        }
        for (std::size_t j = 0; j < f.sims.size(); ++j) {
            dl_ds[j] = (dl_ds[j] / z - (j == 0 ? 1.0 : 0.0)) / cfg.temperature * inv_n;
        }

        // Query gradient collects every document term; each document sees
        // only its own similarity.
        const std::size_t d = f.query.unit.size();
        std::vector<double> g_query(d, 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            g_query[i] += dl_ds[0] * f.positive.unit[i];
        }
        for (std::size_t j = 0; j < f.negatives.size(); ++j) {
            for (std::size_t i = 0; i < d; ++i) {
                g_query[i] += dl_ds[j + 1] * f.negatives[j].unit[i];
            }
        }
        accumulate(f.query, ex.query, g_query, w, grads);

        std::vector<double> g_doc(d);
        for (std::size_t i = 0; i < d; ++i) {
            g_doc[i] = dl_ds[0] * f.query.unit[i];
        }
        accumulate(f.positive, ex.positive, g_doc, w, grads);
        for (std::size_t j = 0; j < f.negatives.size(); ++j) {
            for (std::size_t i = 0; i < d; ++i) {
                g_doc[i] = dl_ds[j + 1] * f.query.unit[i];
            }
            accumulate(f.negatives[j], ex.negatives[j], g_doc, w, grads);
        }
    }
    return grads;
}

namespace {

struct QueryPlan {
    std::size_t query_index = 0;
    std::string positive_id;
    std::vector<std::string> candidate_ids;  // docs judged 0 or unjudged
};

Embedding f32_embedding(const std::vector<double>& unit) {
    std::vector<float> values(unit.begin(), unit.end());
    Embedding e = make_embedding(std::move(values), true);
    return e;
}

}  // namespace

TrainResult train(const std::vector<MediaItem>& corpus, const std::vector<MediaItem>& queries,
                  const Qrels& qrels, const EncoderConfig& enc_cfg, const TrainConfig& cfg) {
    validate(cfg);
    validate(enc_cfg);
    if (corpus.empty() || queries.empty()) {
        throw ValidationError("train: corpus and queries must be non-empty");
    }

    std::unordered_map<std::string, std::size_t> doc_index;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        doc_index.emplace(corpus[i].id, i);
    }

    // Resolve every query's positive up front so bad data fails before any
    // optimizer step: highest grade wins, ties by ascending doc_id.
    std::vector<QueryPlan> plans;
    std::vector<std::string> unjudged;
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const std::string& qid = queries[qi].id;
        auto it = qrels.judgments.find(qid);
        QueryPlan plan;
        plan.query_index = qi;
        int best_grade = 0;
        if (it != qrels.judgments.end()) {
            for (const auto& [did, grade] : it->second) {
                if (grade > best_grade && doc_index.count(did) > 0) {
                    best_grade = grade;
                    plan.positive_id = did;
                }
            }
        }
        if (best_grade <= 0) {
            unjudged.push_back(qid);
            continue;
        }
        for (const MediaItem& doc : corpus) {
            const auto& judged = it->second;
            auto jt = judged.find(doc.id);
            if (jt == judged.end() || jt->second == 0) {
                plan.candidate_ids.push_back(doc.id);
            }
        }
        plans.push_back(std::move(plan));
    }
    if (!unjudged.empty()) {
        std::string ids;
        for (const std::string& id : unjudged) {
            ids += (ids.empty() ? "" : ", ") + id;
        }
        throw ValidationError("train: queries without a judged positive in the corpus: " + ids);
    }

    validate(cfg.lora, enc_cfg.model_dim);
    TrainResult result;
    result.weights = init_weights(enc_cfg, cfg.lora);

    // Pooled features never change during training (the LoRA factors sit
    // after pooling), so cache them once for the whole run.
    std::vector<std::vector<double>> doc_pooled(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        doc_pooled[i] = pooled_item_features(corpus[i], enc_cfg, result.weights);
    }
    std::vector<std::vector<double>> query_pooled(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        query_pooled[i] = pooled_item_features(queries[i], enc_cfg, result.weights);
    }

    Pcg32 shuffle_rng(derive_seed(cfg.seed, "train.shuffle"));

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Re-embed with the current factors and re-mine hard negatives.
        std::vector<Embedding> doc_emb(corpus.size());
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            doc_emb[i] = f32_embedding(encode_pooled(result.weights, doc_pooled[i]).unit);
        }
        std::vector<std::vector<std::string>> mined(plans.size());
        for (std::size_t pi = 0; pi < plans.size(); ++pi) {
            const QueryPlan& plan = plans[pi];
            const Embedding q_emb =
                f32_embedding(encode_pooled(result.weights, query_pooled[plan.query_index]).unit);
            std::vector<std::pair<std::string, Embedding>> candidates;
            candidates.reserve(plan.candidate_ids.size());
            for (const std::string& did : plan.candidate_ids) {
                candidates.push_back({did, doc_emb[doc_index.at(did)]});
            }
            MinedNegatives m = mine_hard_negatives(q_emb, doc_emb[doc_index.at(plan.positive_id)],
                                                   candidates, cfg.mining, cfg.similarity);
            if (m.degenerate_positive) {
                ++result.degenerate_mining_queries;
            }
            mined[pi] = std::move(m.ids);
        }

        // Seeded Fisher-Yates; the generator persists across epochs so each
        // epoch sees a fresh but reproducible order.
        std::vector<std::size_t> order(plans.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);
        }

        double epoch_loss = 0.0;
        std::size_t epoch_steps = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(start + cfg.batch_size, order.size());

            std::set<std::string> batch_positives;
            for (std::size_t i = start; i < end; ++i) {
                batch_positives.insert(plans[order[i]].positive_id);
            }

            Batch batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                const QueryPlan& plan = plans[order[i]];
                TrainExample ex;
                ex.query = query_pooled[plan.query_index];
                ex.positive = doc_pooled[doc_index.at(plan.positive_id)];

                std::set<std::string> used{plan.positive_id};
                // Mined negatives first, minus anything that is a positive
                // elsewhere in this batch (it may be a false negative here).
                for (const std::string& did : mined[order[i]]) {
                    if (batch_positives.count(did) == 0 && used.insert(did).second) {
                        ex.negatives.push_back(doc_pooled[doc_index.at(did)]);
                    }
                }
                if (cfg.in_batch_negatives) {
                    for (std::size_t j = start; j < end; ++j) {
                        const std::string& other = plans[order[j]].positive_id;
                        if (j != i && used.insert(other).second) {
                            ex.negatives.push_back(doc_pooled[doc_index.at(other)]);
                        }
                    }
                }
                batch.push_back(std::move(ex));
            }

            result.step_losses.push_back(batch_loss(batch, result.weights, cfg));
            epoch_loss += result.step_losses.back();
            ++epoch_steps;

            const LoraGrads grads = infonce_grad(batch, result.weights, cfg);
            for (std::size_t i = 0; i < grads.a.data.size(); ++i) {
                result.weights.lora_a.data[i] -= cfg.learning_rate * grads.a.data[i];
            }
            for (std::size_t i = 0; i < grads.b.data.size(); ++i) {
                result.weights.lora_b.data[i] -= cfg.learning_rate * grads.b.data[i];
            }
        }
        result.epoch_mean_losses.push_back(
            epoch_steps > 0 ? epoch_loss / static_cast<double>(epoch_steps) : 0.0);
    }
    return result;
}

void write_loss_trace(const std::vector<double>& step_losses,
                      const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << "step,loss\n";
    out.precision(17);
    for (std::size_t i = 0; i < step_losses.size(); ++i) {
        out << i + 1 << ',' << step_losses[i] << '\n';
    }
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace {

std::vector<float> meta_row(std::uint32_t dim, std::initializer_list<float> head) {
    std::vector<float> row(dim, 0.0f);
    std::size_t i = 0;
    for (float v : head) {
        row[i++] = v;
    }
    return row;
}

/// Seeds are persisted as four 16-bit chunks; each chunk is exactly
/// representable as f32, so the round-trip is lossless.
std::vector<float> seed_chunks(std::uint32_t dim, std::uint64_t seed) {
    std::vector<float> row(dim, 0.0f);
    for (int i = 0; i < 4; ++i) {
        row[static_cast<std::size_t>(i)] =
            static_cast<float>((seed >> (16 * i)) & 0xffffULL);
    }
    return row;
}

std::uint64_t seed_from_chunks(const std::vector<float>& row) {
    std::uint64_t seed = 0;
    for (int i = 0; i < 4; ++i) {
        seed |= static_cast<std::uint64_t>(
                    static_cast<std::uint32_t>(row[static_cast<std::size_t>(i)]))
                << (16 * i);
    }
    return seed;
}

}  // namespace

void save_lora(const EncoderConfig& cfg, const EncoderWeights& w,
               const std::filesystem::path& path) {
    if (cfg.model_dim < 4) {
        throw ValidationError("weights file needs model_dim >= 4");
    }
    EmbeddingStore store;
    store.dim = cfg.model_dim;
    const auto push = [&](const std::string& id, const std::string& label,
                          std::vector<float> values) {
        store.entries.push_back({id, label, make_embedding(std::move(values))});
    };
    push("lora.meta", "seed", seed_chunks(store.dim, cfg.seed));
    push("lora.meta", "lora",
         meta_row(store.dim, {static_cast<float>(w.lora.rank),
                              static_cast<float>(w.lora.alpha)}));
    push("lora.meta", "encoder",
         meta_row(store.dim, {static_cast<float>(cfg.vocab_size),
                              static_cast<float>(cfg.input_dim)}));
    push("lora.meta", "mask",
         meta_row(store.dim, {cfg.mask_mode == AttentionMaskMode::causal ? 1.0f : 0.0f}));

    char label[32];
    for (std::size_t r = 0; r < w.lora_a.rows; ++r) {
        std::vector<float> row(store.dim);
        for (std::size_t c = 0; c < store.dim; ++c) {
            row[c] = static_cast<float>(w.lora_a(r, c));
        }
        std::snprintf(label, sizeof(label), "row%04zu", r);
        push("lora.A", label, std::move(row));
    }
    for (std::size_t r = 0; r < w.lora_b.cols; ++r) {  // columns of B, rows of B^T
        std::vector<float> row(store.dim);
        for (std::size_t c = 0; c < store.dim; ++c) {
            row[c] = static_cast<float>(w.lora_b(c, r));
        }
        std::snprintf(label, sizeof(label), "col%04zu", r);
        push("lora.Bt", label, std::move(row));
    }
    write_store(store, path);
}

EncoderWeights load_lora(const std::filesystem::path& path, EncoderConfig& out_cfg) {
    const EmbeddingStore store = read_store(path);
    std::map<std::pair<std::string, std::string>, const std::vector<float>*> rows;
    for (const StoreEntry& e : store.entries) {
        rows[{e.doc_id, e.stream_label}] = &e.embedding.values;
    }
    const auto fetch = [&](const std::string& id, const std::string& label) {
        auto it = rows.find({id, label});
        if (it == rows.end()) {
            throw ValidationError("'" + path.string() + "' is not a weights file (missing " +
                                  id + "/" + label + ")");
        }
        return it->second;
    };

    const std::vector<float>& lora_meta = *fetch("lora.meta", "lora");
    const std::vector<float>& enc_meta = *fetch("lora.meta", "encoder");
    const std::vector<float>& mask_meta = *fetch("lora.meta", "mask");

    out_cfg = EncoderConfig{};
    out_cfg.seed = seed_from_chunks(*fetch("lora.meta", "seed"));
    out_cfg.model_dim = store.dim;
    out_cfg.vocab_size = static_cast<std::uint32_t>(enc_meta[0]);
    out_cfg.input_dim = static_cast<std::uint32_t>(enc_meta[1]);
    out_cfg.mask_mode =
        mask_meta[0] != 0.0f ? AttentionMaskMode::causal : AttentionMaskMode::bidirectional;
    validate(out_cfg);

    LoraConfig lora;
    lora.rank = static_cast<std::uint32_t>(lora_meta[0]);
    lora.alpha = static_cast<double>(lora_meta[1]);
    validate(lora, out_cfg.model_dim);

    EncoderWeights w = init_weights(out_cfg, lora);
    for (std::size_t r = 0; r < lora.rank; ++r) {
        char label[32];
        std::snprintf(label, sizeof(label), "row%04zu", r);
        const std::vector<float>& a_row = *fetch("lora.A", label);
        for (std::size_t c = 0; c < store.dim; ++c) {
            w.lora_a(r, c) = static_cast<double>(a_row[c]);
        }
        std::snprintf(label, sizeof(label), "col%04zu", r);
        const std::vector<float>& b_col = *fetch("lora.Bt", label);
        for (std::size_t c = 0; c < store.dim; ++c) {
            w.lora_b(c, r) = static_cast<double>(b_col[c]);
        }
    }
    return w;
}

}  // namespace omniemb
