// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <vector>

#include "omniemb/core.hpp"
#include "omniemb/errors.hpp"
#include "omniemb/fusion.hpp"
#include "omniemb/oracles.hpp"
#include "omniemb/rng.hpp"

using namespace omniemb;

namespace {

Stream frames_at(Modality m, std::initializer_list<double> ts, float tag) {
    Stream s;
    s.modality = m;
    for (double t : ts) {
        s.timeline.push_back({t, {tag, static_cast<float>(t)}});
    }
    return s;
}

}  // namespace

TEST_CASE("fusion strategy and combiner names round-trip") {
    for (FusionStrategy f : {FusionStrategy::interleaved, FusionStrategy::separate}) {
        CHECK(fusion_from_string(to_string(f)) == f);
    }
    CHECK_THROWS_AS(fusion_from_string("early"), ValidationError);
    for (LateFusionCombiner c :
         {LateFusionCombiner::max, LateFusionCombiner::mean, LateFusionCombiner::sum}) {
        CHECK(combiner_from_string(to_string(c)) == c);
    }
    CHECK_THROWS_AS(combiner_from_string("median"), ValidationError);
}

TEST_CASE("interleave: strict timestamp sort") {
    const Stream a = frames_at(Modality::audio, {0.0, 2.0}, 1.0f);
    const Stream v = frames_at(Modality::video, {1.0, 3.0}, 2.0f);
    const Stream merged = interleave({a, v});
    REQUIRE(merged.timeline.size() == 4);
    const std::vector<float> tags{merged.timeline[0].values[0], merged.timeline[1].values[0],
                                  merged.timeline[2].values[0], merged.timeline[3].values[0]};
    CHECK(tags == std::vector<float>{1.0f, 2.0f, 1.0f, 2.0f});  // a0, v1, a2, v3
    CHECK(merged.timeline[0].t == 0.0);
    CHECK(merged.timeline[3].t == 3.0);
}

TEST_CASE("interleave: timestamp ties broken by modality priority audio < video") {
    const Stream a = frames_at(Modality::audio, {0.0}, 1.0f);
    const Stream v = frames_at(Modality::video, {0.0}, 2.0f);
    const Stream merged = interleave({v, a});  // input order must not matter
    REQUIRE(merged.timeline.size() == 2);
    CHECK(merged.timeline[0].values[0] == 1.0f);
    CHECK(merged.timeline[1].values[0] == 2.0f);
}

TEST_CASE("interleave: multiset of (t, frame) preserved for 3+5 frames") {
    Pcg32 rng(21);
    Stream a;
    a.modality = Modality::audio;
    for (int i = 0; i < 3; ++i) {
        a.timeline.push_back({i * 1.5, {static_cast<float>(rng.uniform(-1, 1))}});
    }
    Stream v;
    v.modality = Modality::video;
    for (int i = 0; i < 5; ++i) {
        v.timeline.push_back({i * 0.9, {static_cast<float>(rng.uniform(-1, 1))}});
    }
    const Stream merged = interleave({a, v});
    REQUIRE(merged.timeline.size() == 8);

    const auto key = [](const Frame& f) { return std::make_pair(f.t, f.values); };
    std::vector<std::pair<double, std::vector<float>>> want, got;
    for (const Frame& f : a.timeline) want.push_back(key(f));
    for (const Frame& f : v.timeline) want.push_back(key(f));
    for (const Frame& f : merged.timeline) got.push_back(key(f));
    std::sort(want.begin(), want.end());
    std::sort(got.begin(), got.end());
    CHECK(want == got);

    for (std::size_t i = 1; i < merged.timeline.size(); ++i) {
        CHECK(merged.timeline[i - 1].t <= merged.timeline[i].t);
    }
}

TEST_CASE("interleave: text streams rejected") {
    Stream t;
    t.modality = Modality::text;
    t.token_ids = {1};
    const Stream a = frames_at(Modality::audio, {0.0}, 1.0f);
    CHECK_THROWS_AS(interleave({t, a}), ValidationError);
}

TEST_CASE("score_document: singleton returns the similarity under every combiner") {
    Pcg32 rng(4);
    const Embedding q = random_unit_embedding(rng, 8);
    const Embedding e = random_unit_embedding(rng, 8);
    const double sim = similarity(q, e, SimilarityFn::cosine);
    for (LateFusionCombiner c :
         {LateFusionCombiner::max, LateFusionCombiner::mean, LateFusionCombiner::sum}) {
        CHECK(score_document(q, {{"text", e}}, SimilarityFn::cosine, c) == sim);
    }
}

TEST_CASE("score_document: arithmetic fixture sims {0.2, 0.7}") {
    // Orthonormal construction gives exact dot products 0.2 and 0.7.
    const Embedding q = make_embedding({1.0f, 0.0f}, true);
    const Embedding e1 = make_embedding({0.2f, 0.0f});
    const Embedding e2 = make_embedding({0.7f, 0.0f});
    const std::vector<std::pair<std::string, Embedding>> doc{{"audio", e1}, {"video", e2}};
    const double s_max = score_document(q, doc, SimilarityFn::dot, LateFusionCombiner::max);
    const double s_mean = score_document(q, doc, SimilarityFn::dot, LateFusionCombiner::mean);
    const double s_sum = score_document(q, doc, SimilarityFn::dot, LateFusionCombiner::sum);
    CHECK(s_max == doctest::Approx(0.7).epsilon(1e-6));
    CHECK(s_mean == doctest::Approx(0.45).epsilon(1e-6));
    CHECK(s_sum == doctest::Approx(0.9).epsilon(1e-6));
}

TEST_CASE("score_document: self-similarity peaks at 1 under max") {
    Pcg32 rng(5);
    const Embedding e = random_unit_embedding(rng, 16);
    const Embedding other = random_unit_embedding(rng, 16);
    const double s =
        score_document(e, {{"a", other}, {"b", e}}, SimilarityFn::cosine,
                       LateFusionCombiner::max);
    CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("score_document: max dominance and permutation invariance") {
    Pcg32 rng(6);
    for (int trial = 0; trial < 25; ++trial) {
        const Embedding q = random_unit_embedding(rng, 8);
        std::vector<std::pair<std::string, Embedding>> doc;
        const std::size_t n = 1 + rng.next_below(4);
        for (std::size_t i = 0; i < n; ++i) {
            doc.push_back({"s" + std::to_string(i), random_unit_embedding(rng, 8)});
        }
        const double s_max =
            score_document(q, doc, SimilarityFn::cosine, LateFusionCombiner::max);
        for (const auto& [label, e] : doc) {
            CHECK(s_max >= similarity(q, e, SimilarityFn::cosine));
        }

        std::vector<std::pair<std::string, Embedding>> shuffled = doc;
        for (std::size_t i = shuffled.size(); i > 1; --i) {
            std::swap(shuffled[i - 1], shuffled[rng.next_below(i)]);
        }
        for (LateFusionCombiner c :
             {LateFusionCombiner::max, LateFusionCombiner::mean, LateFusionCombiner::sum}) {
            CHECK(score_document(q, doc, SimilarityFn::cosine, c) ==
                  doctest::Approx(score_document(q, shuffled, SimilarityFn::cosine, c))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("score_document: empty document list rejected") {
    Pcg32 rng(8);
    const Embedding q = random_unit_embedding(rng, 8);
    CHECK_THROWS_AS(score_document(q, {}, SimilarityFn::cosine, LateFusionCombiner::max),
                    ValidationError);
}
