// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "omniemb/cli.hpp"
#include "omniemb/dataio.hpp"
#include "omniemb/retrieval.hpp"

using namespace omniemb;
namespace fs = std::filesystem;

namespace {

/// Captures std::cout for the duration of one CLI call.
struct CapturedRun {
    int exit_code = 0;
    std::string out;
};

CapturedRun run(const std::vector<std::string>& args) {
    std::ostringstream captured;
    std::streambuf* previous = std::cout.rdbuf(captured.rdbuf());
    CapturedRun result;
    result.exit_code = run_cli(args);
    std::cout.rdbuf(previous);
    result.out = captured.str();
    return result;
}

struct Workspace {
    fs::path dir;

    Workspace() {
        dir = fs::temp_directory_path() / "omniemb_cli_tests";
        fs::remove_all(dir);
        fs::create_directories(dir);
    }

    std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

}  // namespace

TEST_CASE("cli: synth -> embed -> search -> eval pipeline") {
    Workspace ws;
    CHECK(run({"synth", "--kind", "separable", "--out-dir", ws.path(""), "--n-queries", "4",
               "--n-docs", "16", "--seed", "5"})
              .exit_code == 0);
    CHECK(fs::exists(ws.path("corpus.jsonl")));
    CHECK(fs::exists(ws.path("queries.jsonl")));
    CHECK(fs::exists(ws.path("qrels.jsonl")));

    CHECK(run({"embed", "--corpus", ws.path("corpus.jsonl"), "--out", ws.path("store.bin"),
               "--fusion", "interleaved"})
              .exit_code == 0);
    const EmbeddingStore store = read_store(ws.path("store.bin"));
    CHECK(store.entries.size() == 16);

    CHECK(run({"search", "--store", ws.path("store.bin"), "--queries",
               ws.path("queries.jsonl"), "--out", ws.path("run.jsonl"), "--k", "5"})
              .exit_code == 0);
    const RunResult loaded = load_run(ws.path("run.jsonl"));
    CHECK(loaded.queries.size() == 4);

    const CapturedRun eval =
        run({"eval", "--store", ws.path("store.bin"), "--queries", ws.path("queries.jsonl"),
             "--qrels", ws.path("qrels.jsonl"), "--k", "5,10", "--report",
             ws.path("report.json")});
    CHECK(eval.exit_code == 0);
    CHECK(eval.out.find("ndcg@5") != std::string::npos);
    CHECK(eval.out.find("ndcg@10") != std::string::npos);
    CHECK(eval.out.find("recall@5") != std::string::npos);
    CHECK(fs::exists(ws.path("report.json")));
}

TEST_CASE("cli: rerunning embed with the same seed gives identical bytes") {
    Workspace ws;
    REQUIRE(run({"synth", "--out-dir", ws.path(""), "--n-queries", "3", "--n-docs", "6"})
                .exit_code == 0);
    REQUIRE(run({"embed", "--corpus", ws.path("corpus.jsonl"), "--out", ws.path("s1.bin")})
                .exit_code == 0);
    REQUIRE(run({"embed", "--corpus", ws.path("corpus.jsonl"), "--out", ws.path("s2.bin")})
                .exit_code == 0);
    CHECK(read_file(ws.path("s1.bin")) == read_file(ws.path("s2.bin")));
}

TEST_CASE("cli: every artifact gets a manifest naming command, inputs and seed") {
    Workspace ws;
    REQUIRE(run({"synth", "--out-dir", ws.path(""), "--n-queries", "3", "--n-docs", "6"})
                .exit_code == 0);
    REQUIRE(run({"embed", "--corpus", ws.path("corpus.jsonl"), "--out", ws.path("s.bin"),
                 "--seed", "99"})
                .exit_code == 0);
    const fs::path manifest = ws.path("s.bin.manifest.json");
    REQUIRE(fs::exists(manifest));
    const std::string body = read_file(manifest);
    CHECK(body.find("\"command\": \"embed\"") != std::string::npos);
    CHECK(body.find("corpus.jsonl") != std::string::npos);
    CHECK(body.find("\"seed\": 99") != std::string::npos);
    CHECK(body.find("fnv1a64") != std::string::npos);
    CHECK(fs::exists(ws.path("corpus.jsonl.manifest.json")));
}

TEST_CASE("cli: exit codes map validation to 1, I/O to 2, help to 0") {
    Workspace ws;
    CHECK(run({"--help"}).exit_code == 0);
    CHECK(run({"search", "--help"}).exit_code == 0);
    CHECK(run({"frobnicate"}).exit_code == 1);
    CHECK(run({"embed", "--corpus", ws.path("missing.jsonl"), "--out", ws.path("x.bin")})
              .exit_code == 2);
    CHECK(run({"embed", "--corpus", ws.path("missing.jsonl")}).exit_code == 1);  // --out required

    REQUIRE(run({"synth", "--out-dir", ws.path(""), "--n-queries", "3", "--n-docs", "6"})
                .exit_code == 0);
    REQUIRE(run({"embed", "--corpus", ws.path("corpus.jsonl"), "--out", ws.path("s.bin")})
                .exit_code == 0);
    CHECK(run({"search", "--store", ws.path("s.bin"), "--queries", ws.path("queries.jsonl"),
               "--out", ws.path("r.jsonl"), "--k", "0"})
              .exit_code == 1);
    CHECK(run({"eval", "--store", ws.path("s.bin"), "--queries", ws.path("queries.jsonl"),
               "--qrels", ws.path("qrels.jsonl"), "--settings", "bogus"})
              .exit_code == 1);
    CHECK(run({"synth", "--kind", "unheard-of", "--out-dir", ws.path("")}).exit_code == 1);
}

TEST_CASE("cli: config file supplies values, explicit flags override them") {
    Workspace ws;
    REQUIRE(run({"synth", "--out-dir", ws.path(""), "--n-queries", "4", "--n-docs", "8"})
                .exit_code == 0);
    REQUIRE(run({"embed", "--corpus", ws.path("corpus.jsonl"), "--out", ws.path("s.bin")})
                .exit_code == 0);
    {
        std::ofstream cfg(ws.path("search.cfg"));
        cfg << "# fixture config\n"
            << "k = 3\n"
            << "out = " << ws.path("from_config.jsonl") << "\n";
    }

    REQUIRE(run({"search", "--store", ws.path("s.bin"), "--queries", ws.path("queries.jsonl"),
                 "--config", ws.path("search.cfg")})
                .exit_code == 0);
    const RunResult via_config = load_run(ws.path("from_config.jsonl"));
    REQUIRE(!via_config.queries.empty());
    CHECK(via_config.queries[0].second.size() == 3);

    REQUIRE(run({"search", "--store", ws.path("s.bin"), "--queries", ws.path("queries.jsonl"),
                 "--config", ws.path("search.cfg"), "--k", "1", "--out",
                 ws.path("override.jsonl")})
                .exit_code == 0);
    const RunResult overridden = load_run(ws.path("override.jsonl"));
    CHECK(overridden.queries[0].second.size() == 1);

    CHECK(run({"search", "--store", ws.path("s.bin"), "--queries", ws.path("queries.jsonl"),
               "--config", ws.path("nonexistent.cfg"), "--out", ws.path("x.jsonl")})
              .exit_code == 2);
    {
        std::ofstream cfg(ws.path("broken.cfg"));
        cfg << "this line has no equals sign\n";
    }
    CHECK(run({"search", "--store", ws.path("s.bin"), "--queries", ws.path("queries.jsonl"),
               "--config", ws.path("broken.cfg"), "--out", ws.path("x.jsonl")})
              .exit_code == 1);
}

TEST_CASE("cli: eval renders one column per setting") {
    Workspace ws;
    REQUIRE(run({"synth", "--kind", "av-conflict", "--out-dir", ws.path(""), "--n-queries",
                 "4", "--n-docs", "8"})
                .exit_code == 0);
    REQUIRE(run({"embed", "--corpus", ws.path("corpus.jsonl"), "--out", ws.path("s.bin"),
                 "--fusion", "all"})
                .exit_code == 0);
    const CapturedRun eval =
        run({"eval", "--store", ws.path("s.bin"), "--queries", ws.path("queries.jsonl"),
             "--qrels", ws.path("qrels.jsonl"), "--settings", "audio,video,fused,separate"});
    CHECK(eval.exit_code == 0);
    CHECK(eval.out.find("audio") != std::string::npos);
    CHECK(eval.out.find("video") != std::string::npos);
    CHECK(eval.out.find("fused") != std::string::npos);
    CHECK(eval.out.find("separate") != std::string::npos);
}

TEST_CASE("cli: ablate-fusion needs multi-stream docs and emits five columns") {
    Workspace ws;
    REQUIRE(run({"synth", "--kind", "separable", "--out-dir", ws.path(""), "--n-queries", "3",
                 "--n-docs", "6"})
                .exit_code == 0);
    CHECK(run({"ablate-fusion", "--corpus", ws.path("corpus.jsonl"), "--queries",
               ws.path("queries.jsonl"), "--qrels", ws.path("qrels.jsonl")})
              .exit_code == 1);  // single-stream corpus: ablation is vacuous

    Workspace av;
    REQUIRE(run({"synth", "--kind", "av-conflict", "--out-dir", av.path(""), "--n-queries",
                 "4", "--n-docs", "8"})
                .exit_code == 0);
    const CapturedRun ablate =
        run({"ablate-fusion", "--corpus", av.path("corpus.jsonl"), "--queries",
             av.path("queries.jsonl"), "--qrels", av.path("qrels.jsonl"), "--report",
             av.path("ablation.json")});
    CHECK(ablate.exit_code == 0);
    for (const char* column : {"text", "audio", "video", "fused", "separate"}) {
        CHECK(ablate.out.find(column) != std::string::npos);
    }
    CHECK(ablate.out.find("delta") != std::string::npos);
    CHECK(fs::exists(av.path("ablation.json")));
}

TEST_CASE("cli: budget prints a table and honors argument overrides") {
    const CapturedRun all = run({"budget", "--duration", "10", "--text-tokens", "100"});
    CHECK(all.exit_code == 0);
    CHECK(all.out.find("audio_only") != std::string::npos);
    CHECK(all.out.find("252") != std::string::npos);  // 10 s at 25 tok/s + special

    const CapturedRun one =
        run({"budget", "--duration", "10", "--setting", "audio", "--audio-tokens-per-second",
             "50"});
    CHECK(one.exit_code == 0);
    CHECK(one.out.find("502") != std::string::npos);

    CHECK(run({"budget", "--duration", "10", "--setting", "audio", "--no-audio"}).exit_code ==
          1);
}

TEST_CASE("cli: mine and train produce consumable artifacts") {
    Workspace ws;
    REQUIRE(run({"synth", "--out-dir", ws.path(""), "--n-queries", "4", "--n-docs", "8",
                 "--noise", "2.0"})
                .exit_code == 0);
    REQUIRE(run({"embed", "--corpus", ws.path("corpus.jsonl"), "--out", ws.path("s.bin"),
                 "--fusion", "interleaved"})
                .exit_code == 0);

    CHECK(run({"mine", "--store", ws.path("s.bin"), "--queries", ws.path("queries.jsonl"),
               "--qrels", ws.path("qrels.jsonl"), "--out", ws.path("triples.jsonl")})
              .exit_code == 0);
    CHECK(fs::exists(ws.path("triples.jsonl")));

    CHECK(run({"train", "--corpus", ws.path("corpus.jsonl"), "--queries",
               ws.path("queries.jsonl"), "--qrels", ws.path("qrels.jsonl"), "--out",
               ws.path("weights.bin"), "--trace", ws.path("trace.csv"), "--epochs", "2",
               "--encoder.dim", "8"})
              .exit_code == 0);
    CHECK(fs::exists(ws.path("weights.bin")));
    CHECK(fs::exists(ws.path("trace.csv")));

    // the trained weights are loadable by downstream commands
    CHECK(run({"search", "--store", ws.path("s.bin"), "--queries", ws.path("queries.jsonl"),
               "--out", ws.path("r.jsonl"), "--weights", ws.path("weights.bin")})
              .exit_code == 1);  // store dim 32 vs trained dim 8: rejected up front

    REQUIRE(run({"embed", "--corpus", ws.path("corpus.jsonl"), "--out", ws.path("s8.bin"),
                 "--fusion", "interleaved", "--weights", ws.path("weights.bin")})
                .exit_code == 0);
    CHECK(run({"search", "--store", ws.path("s8.bin"), "--queries", ws.path("queries.jsonl"),
               "--out", ws.path("r.jsonl"), "--weights", ws.path("weights.bin")})
              .exit_code == 0);
}

TEST_CASE("cli: selfcheck passes and reports each suite") {
    const CapturedRun check = run({"selfcheck"});
    CHECK(check.exit_code == 0);
    CHECK(check.out.find("ndcg-oracle: PASS") != std::string::npos);
    CHECK(check.out.find("gradient-fd: PASS") != std::string::npos);
}
