// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "omniemb/dataio.hpp"
#include "omniemb/errors.hpp"
#include "omniemb/oracles.hpp"
#include "omniemb/rng.hpp"

using namespace omniemb;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "omniemb_dataio_tests";
    fs::create_directories(dir);
    return dir;
}

fs::path write_text(const std::string& name, const std::string& content) {
    const fs::path p = temp_dir() / name;
    std::ofstream out(p);
    out << content;
    return p;
}

}  // namespace

TEST_CASE("load_corpus: text records, order preserved, trailing newline ignored") {
    const fs::path p = write_text("corpus_text.jsonl",
                                  R"({"id":"d1","streams":[{"modality":"text","text":"hello world"}]})"
                                  "\n"
                                  R"({"id":"d2","streams":[{"modality":"text","token_ids":[1,2,3]}]})"
                                  "\n");
    const std::vector<MediaItem> items = load_corpus(p, 4096);
    REQUIRE(items.size() == 2);
    CHECK(items[0].id == "d1");
    CHECK(items[1].id == "d2");
    // "hello world" under FNV-1a 64 mod 4096 (values recomputed externally)
    CHECK(items[0].streams[0].token_ids == std::vector<std::uint32_t>{3339, 2803});
    CHECK(items[1].streams[0].token_ids == std::vector<std::uint32_t>{1, 2, 3});
}

TEST_CASE("load_corpus: timeline record") {
    const fs::path p = write_text(
        "corpus_video.jsonl",
        R"({"id":"v1","streams":[{"modality":"video","timeline":[{"t":0,"frame":[1,2]},{"t":2,"frame":[3,4]},{"t":4,"frame":[5,6]}]}]})"
        "\n");
    const std::vector<MediaItem> items = load_corpus(p);
    REQUIRE(items.size() == 1);
    REQUIRE(items[0].streams.size() == 1);
    CHECK(items[0].streams[0].modality == Modality::video);
    REQUIRE(items[0].streams[0].timeline.size() == 3);
    CHECK(items[0].streams[0].timeline[1].t == 2.0);
    CHECK(items[0].streams[0].timeline[2].values == std::vector<float>{5.0f, 6.0f});
}

TEST_CASE("load_corpus: duplicate id names the offender") {
    const fs::path p = write_text("corpus_dup.jsonl",
                                  R"({"id":"d1","streams":[{"modality":"text","text":"x"}]})"
                                  "\n"
                                  R"({"id":"d1","streams":[{"modality":"text","text":"y"}]})"
                                  "\n");
    CHECK_THROWS_WITH_AS(load_corpus(p), doctest::Contains("d1"), ValidationError);
}

TEST_CASE("load_corpus: malformed line reported with its line number") {
    const fs::path p = write_text("corpus_bad.jsonl",
                                  R"({"id":"d1","streams":[{"modality":"text","text":"x"}]})"
                                  "\nnot json\n");
    CHECK_THROWS_WITH_AS(load_corpus(p), doctest::Contains(":2"), ValidationError);
}

TEST_CASE("load_corpus: a stream cannot carry both text and a timeline") {
    const fs::path p = write_text(
        "corpus_both.jsonl",
        R"({"id":"d1","streams":[{"modality":"text","text":"x","timeline":[{"t":0,"frame":[1]}]}]})"
        "\n");
    CHECK_THROWS_AS(load_corpus(p), ValidationError);
}

TEST_CASE("load_corpus: mixed frame dims within a stream rejected") {
    const fs::path p = write_text(
        "corpus_dims.jsonl",
        R"({"id":"d1","streams":[{"modality":"audio","timeline":[{"t":0,"frame":[1,2]},{"t":1,"frame":[3]}]}]})"
        "\n");
    CHECK_THROWS_AS(load_corpus(p), ValidationError);
}

TEST_CASE("load_corpus: missing file is an I/O error") {
    CHECK_THROWS_AS(load_corpus(temp_dir() / "nope.jsonl"), IoError);
}

TEST_CASE("load_queries: accepts {id, text} and corpus-shaped records") {
    const fs::path p = write_text("queries.jsonl",
                                  R"({"id":"q1","text":"hello"})"
                                  "\n"
                                  R"({"id":"q2","streams":[{"modality":"audio","timeline":[{"t":0,"frame":[1,2]}]}]})"
                                  "\n");
    const std::vector<MediaItem> queries = load_queries(p, 4096);
    REQUIRE(queries.size() == 2);
    CHECK(queries[0].streams[0].token_ids == std::vector<std::uint32_t>{3339});
    CHECK(queries[1].streams[0].modality == Modality::audio);
}

TEST_CASE("qrels: round-trip, duplicate judgment and negative grade rejected") {
    Qrels qrels;
    qrels.judgments["q1"] = {{"d1", 2}, {"d2", 0}};
    qrels.judgments["q2"] = {{"d3", 1}};
    const fs::path p = temp_dir() / "qrels.jsonl";
    write_qrels(qrels, p);
    const Qrels back = load_qrels(p);
    CHECK(back.judgments == qrels.judgments);

    const fs::path dup = write_text("qrels_dup.jsonl",
                                    R"({"query_id":"q1","doc_id":"d1","grade":1})"
                                    "\n"
                                    R"({"query_id":"q1","doc_id":"d1","grade":2})"
                                    "\n");
    CHECK_THROWS_AS(load_qrels(dup), ValidationError);

    const fs::path neg = write_text("qrels_neg.jsonl",
                                    R"({"query_id":"q1","doc_id":"d1","grade":-1})"
                                    "\n");
    CHECK_THROWS_AS(load_qrels(neg), ValidationError);
}

TEST_CASE("corpus write/load round-trip preserves items") {
    Pcg32 rng(5);
    std::vector<MediaItem> items;
    for (int i = 0; i < 5; ++i) {
        MediaItem item;
        item.id = "d" + std::to_string(i);
        Stream s;
        s.modality = Modality::audio;
        for (int f = 0; f < 3; ++f) {
            Frame frame;
            frame.t = f;
            frame.values = {static_cast<float>(rng.uniform(-1, 1)),
                            static_cast<float>(rng.uniform(-1, 1))};
            s.timeline.push_back(frame);
        }
        item.streams.push_back(s);
        items.push_back(item);
    }
    const fs::path p = temp_dir() / "corpus_rt.jsonl";
    write_corpus(items, p);
    const std::vector<MediaItem> back = load_corpus(p);
    REQUIRE(back.size() == items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        CHECK(back[i].id == items[i].id);
        REQUIRE(back[i].streams.size() == 1);
        REQUIRE(back[i].streams[0].timeline.size() == 3);
        for (std::size_t f = 0; f < 3; ++f) {
            CHECK(back[i].streams[0].timeline[f].t == items[i].streams[0].timeline[f].t);
            CHECK(back[i].streams[0].timeline[f].values ==
                  items[i].streams[0].timeline[f].values);
        }
    }
}

TEST_CASE("store: empty store round-trips") {
    EmbeddingStore store;
    store.dim = 32;
    const fs::path p = temp_dir() / "store_empty.bin";
    write_store(store, p);
    CHECK(read_store(p) == store);
}

TEST_CASE("store: two streams for one doc keep both labels, bytes stable on rewrite") {
    Pcg32 rng(9);
    EmbeddingStore store;
    store.dim = 8;
    store.entries.push_back({"doc", "audio", random_unit_embedding(rng, 8)});
    store.entries.push_back({"doc", "video", random_unit_embedding(rng, 8)});
    store.entries.push_back({"other", "text", random_unit_embedding(rng, 8)});
    const fs::path p1 = temp_dir() / "store_a.bin";
    const fs::path p2 = temp_dir() / "store_b.bin";
    write_store(store, p1);
    write_store(store, p2);

    const EmbeddingStore back = read_store(p1);
    CHECK(back == store);
    CHECK(back.entries[0].stream_label == "audio");
    CHECK(back.entries[1].stream_label == "video");

    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), {});
    const std::string b2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(b1 == b2);
}

TEST_CASE("store: random round-trip property, bit-for-bit") {
    Pcg32 rng(31);
    for (int i = 0; i < 25; ++i) {
        const EmbeddingStore store =
            random_store(rng, 1 + rng.next_below(20), 4 + 4 * rng.next_below(4), 3);
        const fs::path p = temp_dir() / "store_prop.bin";
        write_store(store, p);
        CHECK(read_store(p) == store);
    }
}

TEST_CASE("store: corrupted files are rejected") {
    Pcg32 rng(12);
    const EmbeddingStore store = random_store(rng, 5, 8, 2);
    const fs::path p = temp_dir() / "store_corrupt.bin";
    write_store(store, p);

    std::ifstream in(p, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    in.close();

    SUBCASE("bad magic") {
        bytes[0] = 'X';
        const fs::path bad = write_text("store_badmagic.bin", bytes);
        CHECK_THROWS_AS(read_store(bad), IoError);
    }
    SUBCASE("truncated") {
        const fs::path bad = write_text("store_trunc.bin", bytes.substr(0, bytes.size() - 3));
        CHECK_THROWS_AS(read_store(bad), IoError);
    }
    SUBCASE("trailing bytes") {
        const fs::path bad = write_text("store_trail.bin", bytes + "zz");
        CHECK_THROWS_AS(read_store(bad), IoError);
    }
    SUBCASE("unsupported version") {
        bytes[8] = 2;  // version field follows the 8-byte magic, little-endian
        const fs::path bad = write_text("store_ver.bin", bytes);
        CHECK_THROWS_AS(read_store(bad), IoError);
    }
}

TEST_CASE("store validation: dim mismatch and duplicate (doc,label)") {
    Pcg32 rng(3);
    EmbeddingStore store;
    store.dim = 8;
    store.entries.push_back({"d", "audio", random_unit_embedding(rng, 8)});

    EmbeddingStore mismatch = store;
    mismatch.entries.push_back({"e", "audio", random_unit_embedding(rng, 4)});
    CHECK_THROWS_AS(validate(mismatch), ValidationError);

    EmbeddingStore dup = store;
    dup.entries.push_back({"d", "audio", random_unit_embedding(rng, 8)});
    CHECK_THROWS_AS(validate(dup), ValidationError);
}
