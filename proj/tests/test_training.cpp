// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "omniemb/errors.hpp"
#include "omniemb/oracles.hpp"
#include "omniemb/rng.hpp"
#include "omniemb/synthbench.hpp"
#include "omniemb/training.hpp"

using namespace omniemb;
namespace fs = std::filesystem;

TEST_CASE("infonce: no negatives means a loss of exactly zero") {
    CHECK(infonce_from_sims(0.3, {}, 0.05) == 0.0);
    CHECK(infonce_from_sims(-0.9, {}, 1.0) == 0.0);
}

TEST_CASE("infonce: uniform similarities give ln(N+1)") {
    for (std::size_t n : {std::size_t{1}, std::size_t{3}, std::size_t{7}}) {
        const std::vector<double> negs(n, 0.42);
        const double expected = std::log(static_cast<double>(n) + 1.0);
        CHECK(std::abs(infonce_from_sims(0.42, negs, 0.05) - expected) <= 1e-12);
        CHECK(std::abs(infonce_from_sims(0.42, negs, 0.7) - expected) <= 1e-12);
    }
    // N = 3 uniform negatives land exactly on ln 4
    CHECK(infonce_from_sims(0.1, {0.1, 0.1, 0.1}, 0.05) ==
          doctest::Approx(1.3862943611198906).epsilon(1e-12));
}

TEST_CASE("infonce: frozen high-precision reference for (0.9, {0.1, -0.2}, tau 0.05)") {
    // Reference value computed independently at 60-digit precision:
    // L = log(1 + e^-16 + e^-22) = 1.1281411516503348e-7.
    const double loss = infonce_from_sims(0.9, {0.1, -0.2}, 0.05);
    CHECK(loss == doctest::Approx(1.1281411516503348e-7).epsilon(1e-6));
}

TEST_CASE("infonce: agreement with the long-double no-shift oracle; never negative") {
    Pcg32 rng(61);
    for (int trial = 0; trial < 200; ++trial) {
        const double tau = 0.02 + rng.uniform(0.0, 0.9);
        const double pos = rng.uniform(-1.0, 1.0);
        std::vector<double> negs(rng.next_below(6));
        for (double& s : negs) {
            s = rng.uniform(-1.0, 1.0);
        }
        const double engine = infonce_from_sims(pos, negs, tau);
        CHECK(engine >= 0.0);
        CHECK(std::abs(engine - oracle_infonce(pos, negs, tau)) <= 1e-12);
    }
}

TEST_CASE("infonce_loss: embedding-level form matches the sims-level form") {
    Pcg32 rng(62);
    const Embedding q = random_unit_embedding(rng, 8);
    const Embedding pos = random_unit_embedding(rng, 8);
    const std::vector<Embedding> negs{random_unit_embedding(rng, 8),
                                      random_unit_embedding(rng, 8)};
    for (SimilarityFn fn : {SimilarityFn::cosine, SimilarityFn::dot}) {
        const double direct = infonce_loss(q, pos, negs, 0.05, fn);
        const double via_sims = infonce_from_sims(
            similarity(q, pos, fn),
            {similarity(q, negs[0], fn), similarity(q, negs[1], fn)}, 0.05);
        CHECK(direct == doctest::Approx(via_sims).epsilon(1e-15));
    }
}

TEST_CASE("gradients: analytic matches central finite differences") {
    Pcg32 rng(63);
    TrainConfig cfg;
    for (double tau : {0.05, 0.5}) {
        cfg.temperature = tau;
        for (int trial = 0; trial < 5; ++trial) {
            Batch batch;
            EncoderWeights w;
            random_batch_and_weights(rng, 8, 2, 3, 2, batch, w);
            const LoraGrads analytic = infonce_grad(batch, w, cfg);
            const LoraGrads reference = fd_gradients(batch, w, cfg, 1e-4);
            CHECK(max_relative_error(analytic, reference) <= 1e-3);
        }
    }
}

TEST_CASE("gradients: symmetric batch still matches finite differences") {
    // Every similarity identical by construction: positive and negatives are
    // the same vector, so the softmax sits exactly at uniform.
    Pcg32 rng(64);
    Batch batch;
    EncoderWeights w;
    random_batch_and_weights(rng, 8, 2, 1, 2, batch, w);
    batch[0].negatives = {batch[0].positive, batch[0].positive};
    TrainConfig cfg;
    const LoraGrads analytic = infonce_grad(batch, w, cfg);
    const LoraGrads reference = fd_gradients(batch, w, cfg, 1e-4);
    CHECK(max_relative_error(analytic, reference) <= 1e-3);
}

TEST_CASE("gradients: B receives no gradient when A is zero") {
    Pcg32 rng(65);
    Batch batch;
    EncoderWeights w;
    random_batch_and_weights(rng, 8, 2, 2, 2, batch, w);
    for (double& a : w.lora_a.data) {
        a = 0.0;
    }
    const LoraGrads analytic = infonce_grad(batch, w, TrainConfig{});
    for (double g : analytic.b.data) {
        CHECK(g == 0.0);  // dL/dB = g_z (A p)^T and A p = 0
    }
    // A still learns through B when B is non-zero.
    double a_grad_norm = 0.0;
    for (double g : analytic.a.data) {
        a_grad_norm += g * g;
    }
    CHECK(a_grad_norm > 0.0);
}

TEST_CASE("gradients: one small SGD step lowers the batch loss") {
    Pcg32 rng(66);
    Batch batch;
    EncoderWeights w;
    random_batch_and_weights(rng, 8, 2, 4, 3, batch, w);
    TrainConfig cfg;
    const double before = batch_loss(batch, w, cfg);
    const LoraGrads grads = infonce_grad(batch, w, cfg);
    for (std::size_t i = 0; i < w.lora_a.data.size(); ++i) {
        w.lora_a.data[i] -= 0.01 * grads.a.data[i];
    }
    for (std::size_t i = 0; i < w.lora_b.data.size(); ++i) {
        w.lora_b.data[i] -= 0.01 * grads.b.data[i];
    }
    CHECK(batch_loss(batch, w, cfg) < before);
}

TEST_CASE("pooled_item_features: single stream vs interleaved multi-stream") {
    EncoderConfig cfg;
    cfg.model_dim = 8;
    cfg.input_dim = 4;
    cfg.vocab_size = 32;
    const EncoderWeights w = init_weights(cfg, LoraConfig{});
    Pcg32 rng(67);

    MediaItem single;
    single.id = "s";
    single.streams = {random_media_stream(rng, 4, 3)};
    CHECK(pooled_item_features(single, cfg, w) ==
          pooled_features(single.streams[0], cfg, w));

    MediaItem multi;
    multi.id = "m";
    Stream a = random_media_stream(rng, 4, 2);
    a.modality = Modality::audio;
    Stream v = random_media_stream(rng, 4, 3);
    v.modality = Modality::video;
    multi.streams = {a, v};
    CHECK(pooled_item_features(multi, cfg, w) ==
          pooled_features(interleave({a, v}), cfg, w));
}

namespace {

struct ToySet {
    std::vector<MediaItem> corpus;
    std::vector<MediaItem> queries;
    Qrels qrels;
};

ToySet separable_toy(std::size_t n_queries, std::size_t n_docs, double sigma,
                     std::uint64_t seed) {
    SynthSpec spec;
    spec.n_queries = n_queries;
    spec.n_docs = n_docs;
    spec.noise_level = sigma;
    spec.seed = seed;
    const SynthDataset data = generate_separable(spec);
    return {data.corpus, data.queries, data.qrels};
}

}  // namespace

TEST_CASE("train: zero epochs leaves the weights at init and the trace empty") {
    const ToySet toy = separable_toy(4, 8, 1.0, 3);
    EncoderConfig enc_cfg;
    enc_cfg.model_dim = 8;
    enc_cfg.input_dim = 18;
    TrainConfig cfg;
    cfg.epochs = 0;
    const TrainResult result = train(toy.corpus, toy.queries, toy.qrels, enc_cfg, cfg);
    CHECK(result.step_losses.empty());
    CHECK(result.epoch_mean_losses.empty());
    const EncoderWeights fresh = init_weights(enc_cfg, LoraConfig{});
    CHECK(result.weights.lora_a.data == fresh.lora_a.data);
    CHECK(result.weights.lora_b.data == fresh.lora_b.data);
}

TEST_CASE("train: mean loss falls from the first epoch to the last") {
    const ToySet toy = separable_toy(16, 32, 3.0, 3);
    EncoderConfig enc_cfg;
    enc_cfg.model_dim = 16;
    enc_cfg.input_dim = 18;
    TrainConfig cfg;
    cfg.epochs = 5;
    const TrainResult result = train(toy.corpus, toy.queries, toy.qrels, enc_cfg, cfg);
    REQUIRE(result.epoch_mean_losses.size() == 5);
    CHECK(result.epoch_mean_losses.front() > result.epoch_mean_losses.back());
}

TEST_CASE("train: deterministic for a fixed seed") {
    const ToySet toy = separable_toy(8, 16, 2.0, 9);
    EncoderConfig enc_cfg;
    enc_cfg.model_dim = 8;
    enc_cfg.input_dim = 18;
    TrainConfig cfg;
    cfg.epochs = 2;
    const TrainResult r1 = train(toy.corpus, toy.queries, toy.qrels, enc_cfg, cfg);
    const TrainResult r2 = train(toy.corpus, toy.queries, toy.qrels, enc_cfg, cfg);
    CHECK(r1.step_losses == r2.step_losses);
    CHECK(r1.weights.lora_a.data == r2.weights.lora_a.data);
    CHECK(r1.weights.lora_b.data == r2.weights.lora_b.data);
}

TEST_CASE("train: a query with no judged positive fails before any step") {
    ToySet toy = separable_toy(4, 8, 1.0, 5);
    toy.qrels.judgments.erase(toy.queries[2].id);
    toy.qrels.judgments[toy.queries[2].id] = {{toy.corpus[0].id, 0}};
    EncoderConfig enc_cfg;
    enc_cfg.model_dim = 8;
    enc_cfg.input_dim = 18;
    CHECK_THROWS_WITH_AS(train(toy.corpus, toy.queries, toy.qrels, enc_cfg, TrainConfig{}),
                         doctest::Contains(toy.queries[2].id.c_str()), ValidationError);
}

TEST_CASE("train config validation") {
    TrainConfig cfg;
    cfg.temperature = 0.0;
    CHECK_THROWS_AS(validate(cfg), ValidationError);
    cfg = TrainConfig{};
    cfg.learning_rate = -0.1;
    CHECK_THROWS_AS(validate(cfg), ValidationError);
    cfg = TrainConfig{};
    cfg.batch_size = 1;  // in-batch negatives need company
    CHECK_THROWS_AS(validate(cfg), ValidationError);
    cfg.in_batch_negatives = false;
    CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("loss trace: CSV with a header and one row per step") {
    const fs::path p = fs::temp_directory_path() / "omniemb_trace.csv";
    write_loss_trace({0.5, 0.25}, p);
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,loss");
    std::getline(in, line);
    CHECK(line.rfind("1,", 0) == 0);
    std::getline(in, line);
    CHECK(line.rfind("2,", 0) == 0);
}

TEST_CASE("lora persistence: save/load reproduces config and embeddings bitwise") {
    EncoderConfig cfg;
    cfg.model_dim = 8;
    cfg.input_dim = 5;
    cfg.vocab_size = 128;
    cfg.seed = 20260825;
    cfg.mask_mode = AttentionMaskMode::causal;
    LoraConfig lora;
    lora.rank = 3;
    lora.alpha = 6.0;
    EncoderWeights w = init_weights(cfg, lora);
    Pcg32 rng(68);
    for (double& v : w.lora_a.data) {
        v = rng.uniform(-0.5, 0.5);
    }
    for (double& v : w.lora_b.data) {
        v = rng.uniform(-0.5, 0.5);
    }

    const fs::path p = fs::temp_directory_path() / "omniemb_lora_rt.bin";
    save_lora(cfg, w, p);
    EncoderConfig loaded_cfg;
    const EncoderWeights loaded = load_lora(p, loaded_cfg);

    CHECK(loaded_cfg.model_dim == cfg.model_dim);
    CHECK(loaded_cfg.input_dim == cfg.input_dim);
    CHECK(loaded_cfg.vocab_size == cfg.vocab_size);
    CHECK(loaded_cfg.seed == cfg.seed);
    CHECK(loaded_cfg.mask_mode == cfg.mask_mode);
    CHECK(loaded.lora.rank == lora.rank);
    CHECK(loaded.lora.alpha == doctest::Approx(lora.alpha).epsilon(1e-6));
    CHECK(loaded.projection.data == w.projection.data);  // regenerated from the seed

    const Stream s = random_media_stream(rng, cfg.input_dim, 4);
    const Embedding before = encode_stream(s, cfg, w);
    const Embedding after = encode_stream(s, loaded_cfg, loaded);
    // A and B travel as f32, so the reload is close but not bit-identical
    // to the in-memory doubles; bitwise identity must hold on a second pass.
    REQUIRE(before.dim == after.dim);
    for (std::size_t i = 0; i < before.values.size(); ++i) {
        CHECK(static_cast<double>(after.values[i]) ==
              doctest::Approx(static_cast<double>(before.values[i])).epsilon(1e-5));
    }

    const fs::path p2 = fs::temp_directory_path() / "omniemb_lora_rt2.bin";
    save_lora(loaded_cfg, loaded, p2);
    EncoderConfig cfg2;
    const EncoderWeights twice = load_lora(p2, cfg2);
    CHECK(twice.lora_a.data == loaded.lora_a.data);
    CHECK(twice.lora_b.data == loaded.lora_b.data);
    const Embedding second = encode_stream(s, cfg2, twice);
    CHECK(second.values == after.values);  // f32 fixed point reached
}
