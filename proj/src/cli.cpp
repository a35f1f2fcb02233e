// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include "omniemb/cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "omniemb/budget.hpp"
#include "omniemb/core.hpp"
#include "omniemb/dataio.hpp"
#include "omniemb/encoder.hpp"
#include "omniemb/errors.hpp"
#include "omniemb/fusion.hpp"
#include "omniemb/manifest.hpp"
#include "omniemb/metrics.hpp"
#include "omniemb/mining.hpp"
#include "omniemb/oracles.hpp"
#include "omniemb/retrieval.hpp"
#include "omniemb/synthbench.hpp"
#include "omniemb/training.hpp"

namespace omniemb {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config files: flat "key = value" lines where keys are long option names
// (e.g. "encoder.dim = 64", "tau = 0.1"). The file is expanded into synthetic
// arguments placed before the real command line, so explicit flags win.
// ---------------------------------------------------------------------------

std::string trim(const std::string& s) {
    const std::size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    const std::size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> config_overrides(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file '" + path + "'");
    }
    std::vector<std::string> args;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        if (key.empty()) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": empty key");
        }
        args.push_back("--" + key + "=" + value);
    }
    return args;
}

/// Splices config-file values into the argument list, after the subcommand.
/// A key that also appears explicitly on the command line is dropped from
/// the config side, so explicit flags always win and no option is ever seen
/// twice by the parser.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::size_t sub = args.size();
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (!args[i].empty() && args[i][0] != '-') {
            sub = i;
            break;
        }
    }
    if (sub == args.size()) {
        return args;
    }
    std::string config_path;
    std::set<std::string> explicit_names;
    for (std::size_t i = sub + 1; i < args.size(); ++i) {
        const std::string& arg = args[i];
        if (arg.rfind("--", 0) == 0) {
            explicit_names.insert(arg.substr(0, arg.find('=')));
        }
        if (arg == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
        } else if (arg.rfind("--config=", 0) == 0) {
            config_path = arg.substr(9);
        }
    }
    if (config_path.empty()) {
        return args;
    }
    std::vector<std::string> out(args.begin(), args.begin() + sub + 1);
    for (std::string& arg : config_overrides(config_path)) {
        if (explicit_names.count(arg.substr(0, arg.find('='))) == 0) {
            out.push_back(std::move(arg));
        }
    }
    out.insert(out.end(), args.begin() + sub + 1, args.end());
    return out;
}

// ---------------------------------------------------------------------------
// Shared option groups
// ---------------------------------------------------------------------------

struct EncoderOptions {
    std::uint32_t dim = kDefaultModelDim;
    std::uint32_t vocab = kDefaultVocabSize;
    std::uint32_t input_dim = 0;  // 0: infer from the data, else 16
    std::string mask = "bidirectional";
    std::string weights;  // trained weights file; overrides the flags above
};

void add_encoder_options(CLI::App* cmd, EncoderOptions& opts) {
    cmd->add_option("--encoder.dim", opts.dim, "Embedding/model dimension")
        ->capture_default_str();
    cmd->add_option("--encoder.vocab", opts.vocab, "Tokenizer vocabulary size")
        ->capture_default_str();
    cmd->add_option("--encoder.input-dim", opts.input_dim,
                    "Feature-frame dimension (0 = infer from the data)")
        ->capture_default_str();
    cmd->add_option("--encoder.mask", opts.mask, "Attention mask: causal|bidirectional")
        ->capture_default_str();
    cmd->add_option("--weights", opts.weights,
                    "Trained weights file; replaces all encoder flags");
}

std::uint32_t infer_input_dim(const std::vector<MediaItem>& items) {
    for (const MediaItem& item : items) {
        for (const Stream& s : item.streams) {
            if (!s.timeline.empty()) {
                return static_cast<std::uint32_t>(s.timeline.front().values.size());
            }
        }
    }
    return kDefaultInputDim;
}

struct ResolvedEncoder {
    EncoderConfig cfg;
    EncoderWeights weights;
};

/// Weights file wins when given (it carries its own config); otherwise the
/// flags apply, with the frame dimension inferred from the data when left 0.
ResolvedEncoder resolve_encoder(const EncoderOptions& opts, std::uint64_t seed,
                                const std::vector<const std::vector<MediaItem>*>& data) {
    ResolvedEncoder r;
    if (!opts.weights.empty()) {
        r.weights = load_lora(opts.weights, r.cfg);
        return r;
    }
    r.cfg.model_dim = opts.dim;
    r.cfg.vocab_size = opts.vocab;
    r.cfg.mask_mode = mask_mode_from_string(opts.mask);
    r.cfg.seed = seed;
    r.cfg.input_dim = opts.input_dim;
    if (r.cfg.input_dim == 0) {
        r.cfg.input_dim = kDefaultInputDim;
        for (const auto* items : data) {
            const std::uint32_t inferred = infer_input_dim(*items);
            if (inferred != kDefaultInputDim) {
                r.cfg.input_dim = inferred;
                break;
            }
        }
    }
    r.weights = init_weights(r.cfg, LoraConfig{});
    return r;
}

std::uint32_t effective_vocab(const EncoderOptions& opts) {
    if (opts.weights.empty()) {
        return opts.vocab;
    }
    EncoderConfig cfg;
    load_lora(opts.weights, cfg);
    return cfg.vocab_size;
}

// ---------------------------------------------------------------------------
// Store helpers
// ---------------------------------------------------------------------------

const std::set<std::string>& known_settings() {
    static const std::set<std::string> s{"all",   "separate", "fused", "text",
                                         "audio", "video",    "image"};
    return s;
}

bool setting_present(const EmbeddingStore& store, const std::string& setting) {
    if (setting == "all") {
        return !store.entries.empty();
    }
    for (const StoreEntry& e : store.entries) {
        if (setting == "separate" ? e.stream_label != "fused" : e.stream_label == setting) {
            return true;
        }
    }
    return false;
}

EmbeddingStore filter_store(const EmbeddingStore& store, const std::string& setting) {
    if (known_settings().count(setting) == 0) {
        throw ValidationError("unknown setting '" + setting +
                              "' (expected all|separate|fused|text|audio|video|image)");
    }
    if (setting == "all") {
        return store;
    }
    EmbeddingStore out;
    out.dim = store.dim;
    for (const StoreEntry& e : store.entries) {
        if (setting == "separate" ? e.stream_label != "fused" : e.stream_label == setting) {
            out.entries.push_back(e);
        }
    }
    if (out.entries.empty()) {
        throw ValidationError("store has no embeddings for setting '" + setting + "'");
    }
    return out;
}

/// Encodes items into store entries. "all" keeps the per-stream embeddings
/// and adds the fused one for multi-stream documents.
void encode_into_store(const std::vector<MediaItem>& items, const std::string& fusion,
                       const ResolvedEncoder& enc, EmbeddingStore& store) {
    store.dim = enc.cfg.model_dim;
    for (const MediaItem& item : items) {
        const auto append = [&](FusionStrategy strategy) {
            for (auto& [label, emb] : encode_item(item, strategy, enc.cfg, enc.weights)) {
                store.entries.push_back({item.id, label, std::move(emb)});
            }
        };
        if (fusion == "all") {
            append(FusionStrategy::separate);
            if (item.streams.size() > 1) {
                append(FusionStrategy::interleaved);
            }
        } else {
            append(fusion_from_string(fusion));
        }
    }
    validate(store);
}

/// One embedding per query: single streams keep their modality, multi-stream
/// queries are interleaved into a single fused vector.
Embedding encode_query(const MediaItem& query, const ResolvedEncoder& enc) {
    return encode_item(query, FusionStrategy::interleaved, enc.cfg, enc.weights)
        .front()
        .second;
}

RunResult run_search(const std::vector<MediaItem>& queries, const EmbeddingStore& store,
                     std::size_t k, SimilarityFn fn, LateFusionCombiner combiner,
                     const ResolvedEncoder& enc) {
    RunResult run;
    for (const MediaItem& query : queries) {
        run.queries.push_back(
            {query.id, search_topk(encode_query(query, enc), store, k, fn, combiner)});
    }
    return run;
}

/// Positive document for a query: the highest judged grade among docs that
/// exist in the corpus, ties by ascending doc_id.
std::string pick_positive(const Qrels& qrels, const std::string& qid,
                          const std::set<std::string>& known_docs) {
    auto it = qrels.judgments.find(qid);
    std::string best;
    int best_grade = 0;
    if (it != qrels.judgments.end()) {
        for (const auto& [did, grade] : it->second) {
            if (grade > best_grade && known_docs.count(did) > 0) {
                best_grade = grade;
                best = did;
            }
        }
    }
    if (best.empty()) {
        throw ValidationError("query '" + qid + "' has no judged positive in the corpus");
    }
    return best;
}

// ---------------------------------------------------------------------------
// Command state
// ---------------------------------------------------------------------------

struct CommonArgs {
    std::uint64_t seed = 42;
    std::string config;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--seed", args.seed, "Master seed; all randomness derives from it")
        ->capture_default_str();
    cmd->add_option("--config", args.config,
                    "key = value config file; explicit flags override it");
}

std::string fmt_double(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

struct EmbedArgs {
    CommonArgs common;
    EncoderOptions encoder;
    std::string corpus;
    std::string out;
    std::string fusion = "separate";
};

int do_embed(const EmbedArgs& a) {
    const std::vector<MediaItem> corpus = load_corpus(a.corpus, effective_vocab(a.encoder));
    const ResolvedEncoder enc = resolve_encoder(a.encoder, a.common.seed, {&corpus});

    EmbeddingStore store;
    encode_into_store(corpus, a.fusion, enc, store);
    write_store(store, a.out);

    RunManifest m;
    m.command = "embed";
    m.seed = a.common.seed;
    add_input(m, a.corpus);
    if (!a.encoder.weights.empty()) {
        add_input(m, a.encoder.weights);
    }
    m.flags = {{"fusion", a.fusion},
               {"encoder.dim", std::to_string(enc.cfg.model_dim)},
               {"encoder.vocab", std::to_string(enc.cfg.vocab_size)},
               {"encoder.input-dim", std::to_string(enc.cfg.input_dim)},
               {"encoder.mask", to_string(enc.cfg.mask_mode)},
               {"weights", a.encoder.weights}};
    m.outputs = {a.out};
    write_manifests(m);

    std::cout << "embedded " << corpus.size() << " items into " << store.entries.size()
              << " entries (dim " << store.dim << ") -> " << a.out << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// search
// ---------------------------------------------------------------------------

struct SearchArgs {
    CommonArgs common;
    EncoderOptions encoder;
    std::string store;
    std::string queries;
    std::string out;
    std::string setting = "all";
    std::string similarity = "cosine";
    std::string combiner = "max";
    std::size_t k = 10;
};

int do_search(const SearchArgs& a) {
    const EmbeddingStore store = filter_store(read_store(a.store), a.setting);
    const std::vector<MediaItem> queries = load_queries(a.queries, effective_vocab(a.encoder));
    const ResolvedEncoder enc = resolve_encoder(a.encoder, a.common.seed, {&queries});

    const RunResult run = run_search(queries, store, a.k, similarity_from_string(a.similarity),
                                     combiner_from_string(a.combiner), enc);
    write_run(run, a.out);

    RunManifest m;
    m.command = "search";
    m.seed = a.common.seed;
    add_input(m, a.store);
    add_input(m, a.queries);
    if (!a.encoder.weights.empty()) {
        add_input(m, a.encoder.weights);
    }
    m.flags = {{"k", std::to_string(a.k)},
               {"setting", a.setting},
               {"similarity", a.similarity},
               {"combiner", a.combiner},
               {"weights", a.encoder.weights}};
    m.outputs = {a.out};
    write_manifests(m);

    std::cout << "searched " << run.queries.size() << " queries over "
              << store.entries.size() << " entries -> " << a.out << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
    CommonArgs common;
    EncoderOptions encoder;
    std::string store;
    std::string queries;
    std::string qrels;
    std::string report;
    std::vector<std::string> settings{"all"};
    std::vector<std::size_t> ks{10};
    std::string similarity = "cosine";
    std::string combiner = "max";
};

int do_eval(const EvalArgs& a) {
    if (a.ks.empty()) {
        throw ValidationError("eval needs at least one --k value");
    }
    const EmbeddingStore full_store = read_store(a.store);
    const std::vector<MediaItem> queries = load_queries(a.queries, effective_vocab(a.encoder));
    const Qrels qrels = load_qrels(a.qrels);
    const ResolvedEncoder enc = resolve_encoder(a.encoder, a.common.seed, {&queries});
    const std::size_t max_k = *std::max_element(a.ks.begin(), a.ks.end());
    const SimilarityFn fn = similarity_from_string(a.similarity);
    const LateFusionCombiner combiner = combiner_from_string(a.combiner);

    // One column per modality setting, one row per metric.
    std::vector<std::pair<std::string, MetricReport>> columns;
    for (const std::string& setting : a.settings) {
        const EmbeddingStore store = filter_store(full_store, setting);
        const RunResult run = run_search(queries, store, max_k, fn, combiner, enc);
        columns.push_back({setting, evaluate_run(run, qrels, a.ks)});
    }

    TextTable table;
    table.header.push_back("metric");
    for (const auto& [setting, report] : columns) {
        table.header.push_back(setting);
    }
    for (const auto& [metric, values] : columns.front().second.metrics) {
        std::vector<std::string> row{metric};
        for (const auto& [setting, report] : columns) {
            row.push_back(format_metric(report.metrics.at(metric).average));
        }
        table.rows.push_back(std::move(row));
    }
    std::cout << table.render();
    if (!columns.front().second.excluded_queries.empty()) {
        std::cout << "excluded (all-zero judgments): "
                  << columns.front().second.excluded_queries.size() << " queries\n";
    }

    if (!a.report.empty()) {
        json j;
        for (const auto& [setting, report] : columns) {
            j["settings"][setting] = json::parse(report_to_json(report));
        }
        j["combiner"] = a.combiner;
        j["similarity"] = a.similarity;
        std::ofstream out(a.report);
        if (!out) {
            throw IoError("cannot open '" + a.report + "' for writing");
        }
        out << j.dump(2) << '\n';

        RunManifest m;
        m.command = "eval";
        m.seed = a.common.seed;
        add_input(m, a.store);
        add_input(m, a.queries);
        add_input(m, a.qrels);
        if (!a.encoder.weights.empty()) {
            add_input(m, a.encoder.weights);
        }
        std::string settings_str;
        for (const std::string& s : a.settings) {
            settings_str += (settings_str.empty() ? "" : ",") + s;
        }
        std::string ks_str;
        for (std::size_t k : a.ks) {
            ks_str += (ks_str.empty() ? "" : ",") + std::to_string(k);
        }
        m.flags = {{"settings", settings_str},
                   {"k", ks_str},
                   {"similarity", a.similarity},
                   {"combiner", a.combiner},
                   {"weights", a.encoder.weights}};
        m.outputs = {a.report};
        write_manifests(m);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// mine
// ---------------------------------------------------------------------------

struct MineArgs {
    CommonArgs common;
    EncoderOptions encoder;
    std::string store;
    std::string queries;
    std::string qrels;
    std::string out;
    std::string setting = "all";
    std::string similarity = "cosine";
    double threshold = 0.95;
    std::size_t k_negatives = 2;
};

int do_mine(const MineArgs& a) {
    const EmbeddingStore store = filter_store(read_store(a.store), a.setting);

    // Mining works on one embedding per document.
    std::map<std::string, const Embedding*> doc_embedding;
    for (const StoreEntry& e : store.entries) {
        if (!doc_embedding.emplace(e.doc_id, &e.embedding).second) {
            throw ValidationError(
                "mining needs one embedding per document; document '" + e.doc_id +
                "' has several. Embed with --fusion interleaved or pick a --setting.");
        }
    }
    std::set<std::string> known_docs;
    for (const auto& [did, emb] : doc_embedding) {
        known_docs.insert(did);
    }

    const std::vector<MediaItem> queries = load_queries(a.queries, effective_vocab(a.encoder));
    const Qrels qrels = load_qrels(a.qrels);
    const ResolvedEncoder enc = resolve_encoder(a.encoder, a.common.seed, {&queries});
    MiningConfig cfg;
    cfg.threshold = a.threshold;
    cfg.k_negatives = a.k_negatives;
    const SimilarityFn fn = similarity_from_string(a.similarity);

    std::vector<TrainingTriple> triples;
    std::size_t degenerate = 0;
    for (const MediaItem& query : queries) {
        const std::string positive = pick_positive(qrels, query.id, known_docs);
        const auto& judged = qrels.judgments.at(query.id);
        std::vector<std::pair<std::string, Embedding>> candidates;
        for (const auto& [did, emb] : doc_embedding) {
            auto jt = judged.find(did);
            if (jt == judged.end() || jt->second == 0) {
                candidates.push_back({did, *emb});
            }
        }
        const MinedNegatives mined = mine_hard_negatives(
            encode_query(query, enc), *doc_embedding.at(positive), candidates, cfg, fn);
        if (mined.degenerate_positive) {
            ++degenerate;
        }
        triples.push_back({query.id, positive, mined.ids, mined.degenerate_positive});
    }
    write_triples(triples, a.out);

    RunManifest m;
    m.command = "mine";
    m.seed = a.common.seed;
    add_input(m, a.store);
    add_input(m, a.queries);
    add_input(m, a.qrels);
    if (!a.encoder.weights.empty()) {
        add_input(m, a.encoder.weights);
    }
    m.flags = {{"threshold", fmt_double(a.threshold)},
               {"k-negatives", std::to_string(a.k_negatives)},
               {"setting", a.setting},
               {"similarity", a.similarity},
               {"weights", a.encoder.weights}};
    m.outputs = {a.out};
    write_manifests(m);

    std::cout << "mined negatives for " << triples.size() << " queries (" << degenerate
              << " with non-positive anchor similarity) -> " << a.out << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
    CommonArgs common;
    EncoderOptions encoder;
    std::string corpus;
    std::string queries;
    std::string qrels;
    std::string out;
    std::string trace;
    double tau = 0.05;
    double lr = 0.05;
    std::size_t epochs = 10;
    std::size_t batch_size = 8;
    std::size_t k_negatives = 2;
    double threshold = 0.95;
    bool no_in_batch = false;
    std::uint32_t lora_rank = 2;
    double lora_alpha = 4.0;
    std::string similarity = "cosine";
};

int do_train(const TrainArgs& a) {
    if (!a.encoder.weights.empty()) {
        throw ValidationError("train starts from the frozen base; --weights is not accepted");
    }
    const std::vector<MediaItem> corpus = load_corpus(a.corpus, a.encoder.vocab);
    const std::vector<MediaItem> queries = load_queries(a.queries, a.encoder.vocab);
    const Qrels qrels = load_qrels(a.qrels);
    ResolvedEncoder enc = resolve_encoder(a.encoder, a.common.seed, {&corpus, &queries});

    TrainConfig cfg;
    cfg.temperature = a.tau;
    cfg.learning_rate = a.lr;
    cfg.epochs = a.epochs;
    cfg.batch_size = a.batch_size;
    cfg.in_batch_negatives = !a.no_in_batch;
    cfg.seed = a.common.seed;
    cfg.mining.threshold = a.threshold;
    cfg.mining.k_negatives = a.k_negatives;
    cfg.similarity = similarity_from_string(a.similarity);

    cfg.lora.rank = a.lora_rank;
    cfg.lora.alpha = a.lora_alpha;

    const EncoderConfig enc_cfg = enc.cfg;
    TrainResult result = train(corpus, queries, qrels, enc_cfg, cfg);
    save_lora(enc_cfg, result.weights, a.out);
    if (!a.trace.empty()) {
        write_loss_trace(result.step_losses, a.trace);
    }

    RunManifest m;
    m.command = "train";
    m.seed = a.common.seed;
    add_input(m, a.corpus);
    add_input(m, a.queries);
    add_input(m, a.qrels);
    m.flags = {{"tau", fmt_double(a.tau)},
               {"lr", fmt_double(a.lr)},
               {"epochs", std::to_string(a.epochs)},
               {"batch-size", std::to_string(a.batch_size)},
               {"k-negatives", std::to_string(a.k_negatives)},
               {"threshold", fmt_double(a.threshold)},
               {"in-batch-negatives", cfg.in_batch_negatives ? "true" : "false"},
               {"lora-rank", std::to_string(a.lora_rank)},
               {"lora-alpha", fmt_double(a.lora_alpha)},
               {"similarity", a.similarity},
               {"encoder.dim", std::to_string(enc_cfg.model_dim)},
               {"encoder.input-dim", std::to_string(enc_cfg.input_dim)}};
    m.outputs = {a.out};
    if (!a.trace.empty()) {
        m.outputs.push_back(a.trace);
    }
    write_manifests(m);

    std::cout << "trained " << a.epochs << " epochs, " << result.step_losses.size()
              << " steps";
    if (!result.epoch_mean_losses.empty()) {
        std::cout << "; mean loss " << format_metric(result.epoch_mean_losses.front())
                  << " -> " << format_metric(result.epoch_mean_losses.back());
    }
    if (result.degenerate_mining_queries > 0) {
        std::cout << "; " << result.degenerate_mining_queries
                  << " degenerate mining queries";
    }
    std::cout << " -> " << a.out << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// ablate-fusion
// ---------------------------------------------------------------------------

struct AblateArgs {
    CommonArgs common;
    EncoderOptions encoder;
    std::string corpus;
    std::string queries;
    std::string qrels;
    std::string report;
    std::vector<std::size_t> ks{10};
    std::string similarity = "cosine";
};

int do_ablate(const AblateArgs& a) {
    const std::vector<MediaItem> corpus = load_corpus(a.corpus, effective_vocab(a.encoder));
    const std::vector<MediaItem> queries = load_queries(a.queries, effective_vocab(a.encoder));
    const Qrels qrels = load_qrels(a.qrels);

    const bool any_multistream = std::any_of(corpus.begin(), corpus.end(), [](const auto& d) {
        return d.streams.size() > 1;
    });
    if (!any_multistream) {
        throw ValidationError(
            "ablate-fusion needs at least one multi-stream document; with single streams "
            "interleaved and separate encodings coincide and the ablation is vacuous");
    }

    const ResolvedEncoder enc = resolve_encoder(a.encoder, a.common.seed, {&corpus, &queries});
    EmbeddingStore store;
    encode_into_store(corpus, "all", enc, store);

    const std::size_t max_k = *std::max_element(a.ks.begin(), a.ks.end());
    const SimilarityFn fn = similarity_from_string(a.similarity);

    const auto evaluate_setting = [&](const std::string& setting, LateFusionCombiner combiner,
                                      MetricReport& out) {
        if (!setting_present(store, setting)) {
            return false;
        }
        const RunResult run =
            run_search(queries, filter_store(store, setting), max_k, fn, combiner, enc);
        out = evaluate_run(run, qrels, a.ks);
        return true;
    };

    // Single-embedding settings are combiner-independent; compute them once.
    const std::vector<std::string> single_settings{"text", "audio", "video", "fused"};
    std::map<std::string, MetricReport> single;
    for (const std::string& setting : single_settings) {
        MetricReport report;
        if (evaluate_setting(setting, LateFusionCombiner::max, report)) {
            single[setting] = std::move(report);
        }
    }
    std::map<std::string, MetricReport> separate;
    for (const auto& [name, combiner] :
         std::vector<std::pair<std::string, LateFusionCombiner>>{
             {"max", LateFusionCombiner::max},
             {"mean", LateFusionCombiner::mean},
             {"sum", LateFusionCombiner::sum}}) {
        MetricReport report;
        if (evaluate_setting("separate", combiner, report)) {
            separate[name] = std::move(report);
        }
    }

    json j;
    for (std::size_t k : a.ks) {
        const std::string metric = "ndcg@" + std::to_string(k);
        TextTable table;
        table.header = {"combiner", "text", "audio", "video", "fused", "separate"};
        for (const char* combiner : {"max", "mean", "sum"}) {
            std::vector<std::string> row{combiner};
            for (const std::string& setting : single_settings) {
                auto it = single.find(setting);
                row.push_back(it == single.end()
                                  ? "--"
                                  : format_metric(it->second.metrics.at(metric).average));
            }
            row.push_back(format_metric(separate.at(combiner).metrics.at(metric).average));
            table.rows.push_back(std::move(row));
        }
        std::cout << metric << '\n' << table.render();

        if (single.count("fused") > 0) {
            const double fused = single.at("fused").metrics.at(metric).average;
            const double sep_max = separate.at("max").metrics.at(metric).average;
            std::cout << "delta " << metric << " separate(max) - fused: "
                      << format_metric(sep_max - fused) << '\n';
            j["delta"][metric]["separate_max_minus_fused"] = sep_max - fused;
        }
        std::cout << '\n';
    }

    for (const auto& [setting, report] : single) {
        j["settings"][setting] = json::parse(report_to_json(report));
    }
    for (const auto& [combiner, report] : separate) {
        j["settings"]["separate_" + combiner] = json::parse(report_to_json(report));
    }

    if (!a.report.empty()) {
        std::ofstream out(a.report);
        if (!out) {
            throw IoError("cannot open '" + a.report + "' for writing");
        }
        out << j.dump(2) << '\n';

        RunManifest m;
        m.command = "ablate-fusion";
        m.seed = a.common.seed;
        add_input(m, a.corpus);
        add_input(m, a.queries);
        add_input(m, a.qrels);
        if (!a.encoder.weights.empty()) {
            add_input(m, a.encoder.weights);
        }
        m.flags = {{"similarity", a.similarity}, {"weights", a.encoder.weights}};
        m.outputs = {a.report};
        write_manifests(m);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// budget
// ---------------------------------------------------------------------------

struct BudgetArgs {
    CommonArgs common;
    double duration = 0.0;
    std::int64_t width = 640;
    std::int64_t height = 360;
    bool no_audio = false;
    std::int64_t text_tokens = 0;
    std::string setting = "all";
    std::string report;
    ProcessorArgs processor;
};

int do_budget(const BudgetArgs& a) {
    MediaDescriptor media;
    media.duration_s = a.duration;
    media.frame_width = a.width;
    media.frame_height = a.height;
    media.has_audio = !a.no_audio;
    media.text_token_count = a.text_tokens;

    std::vector<BudgetSetting> settings;
    if (a.setting == "all") {
        settings = {BudgetSetting::text, BudgetSetting::audio_only, BudgetSetting::video_only,
                    BudgetSetting::av_fused, BudgetSetting::av_separate};
        if (!media.has_audio) {
            settings = {BudgetSetting::text, BudgetSetting::video_only};
        }
    } else {
        settings = {budget_setting_from_string(a.setting)};
    }

    TextTable table;
    table.header = {"setting", "tokens", "per-stream"};
    json j;
    for (BudgetSetting setting : settings) {
        const SequenceLengths lengths = estimate_tokens(media, setting, a.processor);
        std::string breakdown;
        for (const auto& [name, tokens] : lengths.per_stream) {
            breakdown += (breakdown.empty() ? "" : " ") + name + "=" + std::to_string(tokens);
        }
        table.rows.push_back(
            {to_string(setting), std::to_string(lengths.total), breakdown});
        j[to_string(setting)] = {{"total", lengths.total}};
        for (const auto& [name, tokens] : lengths.per_stream) {
            j[to_string(setting)]["per_stream"][name] = tokens;
        }
    }
    std::cout << table.render();

    if (!a.report.empty()) {
        std::ofstream out(a.report);
        if (!out) {
            throw IoError("cannot open '" + a.report + "' for writing");
        }
        out << j.dump(2) << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
    CommonArgs common;
    std::string kind = "separable";
    std::string out_dir = ".";
    std::size_t n_queries = 16;
    std::size_t n_docs = 64;
    std::uint32_t d_in = 18;
    double noise = 0.25;
    double conflict_fraction = 0.5;
};

int do_synth(const SynthArgs& a) {
    SynthSpec spec;
    spec.n_queries = a.n_queries;
    spec.n_docs = a.n_docs;
    spec.d_in = a.d_in;
    spec.seed = a.common.seed;
    spec.noise_level = a.noise;
    spec.av_conflict_fraction = a.conflict_fraction;

    SynthDataset data;
    if (a.kind == "separable") {
        data = generate_separable(spec);
    } else if (a.kind == "av-conflict") {
        data = generate_av_conflict(spec);
    } else {
        throw ValidationError("unknown synth kind '" + a.kind +
                              "' (expected separable|av-conflict)");
    }

    const std::filesystem::path dir = a.out_dir;
    const std::filesystem::path corpus_path = dir / "corpus.jsonl";
    const std::filesystem::path queries_path = dir / "queries.jsonl";
    const std::filesystem::path qrels_path = dir / "qrels.jsonl";
    write_dataset(data, corpus_path, queries_path, qrels_path);

    RunManifest m;
    m.command = "synth";
    m.seed = a.common.seed;
    m.flags = {{"kind", a.kind},
               {"n-queries", std::to_string(a.n_queries)},
               {"n-docs", std::to_string(a.n_docs)},
               {"d-in", std::to_string(a.d_in)},
               {"noise", fmt_double(a.noise)},
               {"conflict-fraction", fmt_double(a.conflict_fraction)}};
    m.outputs = {corpus_path.string(), queries_path.string(), qrels_path.string()};
    write_manifests(m);

    std::cout << "wrote " << data.corpus.size() << " docs, " << data.queries.size()
              << " queries to " << dir.string() << '\n';
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"omniemb: multimodal dense-retrieval engine and ablation harness"};
    app.require_subcommand(1);

    EmbedArgs embed_args;
    CLI::App* embed = app.add_subcommand("embed", "Encode a corpus into an embedding store");
    add_common(embed, embed_args.common);
    add_encoder_options(embed, embed_args.encoder);
    embed->add_option("--corpus", embed_args.corpus, "Corpus JSONL")->required();
    embed->add_option("--out", embed_args.out, "Output store file")->required();
    embed->add_option("--fusion", embed_args.fusion,
                      "interleaved|separate|all (all = separate plus fused)")
        ->capture_default_str();

    SearchArgs search_args;
    CLI::App* search = app.add_subcommand("search", "Exact top-k retrieval over a store");
    add_common(search, search_args.common);
    add_encoder_options(search, search_args.encoder);
    search->add_option("--store", search_args.store, "Embedding store")->required();
    search->add_option("--queries", search_args.queries, "Queries JSONL")->required();
    search->add_option("--out", search_args.out, "Output run JSONL")->required();
    search->add_option("--k", search_args.k, "Results per query")->capture_default_str();
    search->add_option("--setting", search_args.setting,
                       "Store filter: all|separate|fused|text|audio|video|image")
        ->capture_default_str();
    search->add_option("--similarity", search_args.similarity, "cosine|dot")
        ->capture_default_str();
    search->add_option("--combiner", search_args.combiner, "max|mean|sum")
        ->capture_default_str();

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "NDCG/Recall over store + queries + qrels");
    add_common(eval, eval_args.common);
    add_encoder_options(eval, eval_args.encoder);
    eval->add_option("--store", eval_args.store, "Embedding store")->required();
    eval->add_option("--queries", eval_args.queries, "Queries JSONL")->required();
    eval->add_option("--qrels", eval_args.qrels, "Qrels JSONL")->required();
    eval->add_option("--k", eval_args.ks, "Cutoffs, e.g. 5,10")
        ->delimiter(',')
        ->capture_default_str();
    eval->add_option("--settings", eval_args.settings,
                     "Comma-separated store filters; one table column each")
        ->delimiter(',')
        ->capture_default_str();
    eval->add_option("--similarity", eval_args.similarity, "cosine|dot")
        ->capture_default_str();
    eval->add_option("--combiner", eval_args.combiner, "max|mean|sum")->capture_default_str();
    eval->add_option("--report", eval_args.report, "Write the full report as JSON");

    MineArgs mine_args;
    CLI::App* mine = app.add_subcommand("mine", "Hard-negative mining into training triples");
    add_common(mine, mine_args.common);
    add_encoder_options(mine, mine_args.encoder);
    mine->add_option("--store", mine_args.store, "Embedding store (one entry per doc)")
        ->required();
    mine->add_option("--queries", mine_args.queries, "Queries JSONL")->required();
    mine->add_option("--qrels", mine_args.qrels, "Qrels JSONL")->required();
    mine->add_option("--out", mine_args.out, "Output triples JSONL")->required();
    mine->add_option("--setting", mine_args.setting, "Store filter")->capture_default_str();
    mine->add_option("--threshold", mine_args.threshold,
                     "Percentage-to-positive cutoff in (0,1]")
        ->capture_default_str();
    mine->add_option("--k-negatives", mine_args.k_negatives, "Negatives per query")
        ->capture_default_str();
    mine->add_option("--similarity", mine_args.similarity, "cosine|dot")
        ->capture_default_str();

    TrainArgs train_args;
    CLI::App* train_cmd = app.add_subcommand("train", "InfoNCE training of the LoRA factors");
    add_common(train_cmd, train_args.common);
    add_encoder_options(train_cmd, train_args.encoder);
    train_cmd->add_option("--corpus", train_args.corpus, "Corpus JSONL")->required();
    train_cmd->add_option("--queries", train_args.queries, "Queries JSONL")->required();
    train_cmd->add_option("--qrels", train_args.qrels, "Qrels JSONL")->required();
    train_cmd->add_option("--out", train_args.out, "Output weights file")->required();
    train_cmd->add_option("--trace", train_args.trace, "Loss trace CSV (step,loss)");
    train_cmd->add_option("--tau", train_args.tau, "Softmax temperature")
        ->capture_default_str();
    train_cmd->add_option("--lr", train_args.lr, "Learning rate")->capture_default_str();
    train_cmd->add_option("--epochs", train_args.epochs, "Training epochs")
        ->capture_default_str();
    train_cmd->add_option("--batch-size", train_args.batch_size, "Queries per step")
        ->capture_default_str();
    train_cmd->add_option("--k-negatives", train_args.k_negatives, "Mined negatives per query")
        ->capture_default_str();
    train_cmd->add_option("--threshold", train_args.threshold, "Mining cutoff in (0,1]")
        ->capture_default_str();
    train_cmd->add_flag("--no-in-batch-negatives", train_args.no_in_batch,
                        "Disable in-batch negatives");
    train_cmd->add_option("--lora-rank", train_args.lora_rank, "LoRA rank r")
        ->capture_default_str();
    train_cmd->add_option("--lora-alpha", train_args.lora_alpha, "LoRA scaling numerator")
        ->capture_default_str();
    train_cmd->add_option("--similarity", train_args.similarity, "cosine|dot")
        ->capture_default_str();

    AblateArgs ablate_args;
    CLI::App* ablate = app.add_subcommand(
        "ablate-fusion", "Compare audio/video/fused/separate retrieval in one run");
    add_common(ablate, ablate_args.common);
    add_encoder_options(ablate, ablate_args.encoder);
    ablate->add_option("--corpus", ablate_args.corpus, "Corpus JSONL")->required();
    ablate->add_option("--queries", ablate_args.queries, "Queries JSONL")->required();
    ablate->add_option("--qrels", ablate_args.qrels, "Qrels JSONL")->required();
    ablate->add_option("--k", ablate_args.ks, "Cutoffs, e.g. 5,10")
        ->delimiter(',')
        ->capture_default_str();
    ablate->add_option("--similarity", ablate_args.similarity, "cosine|dot")
        ->capture_default_str();
    ablate->add_option("--report", ablate_args.report, "Write the comparison as JSON");

    BudgetArgs budget_args;
    CLI::App* budget = app.add_subcommand("budget", "Sequence-length estimates per modality");
    add_common(budget, budget_args.common);
    budget->add_option("--duration", budget_args.duration, "Media duration in seconds")
        ->required();
    budget->add_option("--width", budget_args.width, "Frame width in pixels")
        ->capture_default_str();
    budget->add_option("--height", budget_args.height, "Frame height in pixels")
        ->capture_default_str();
    budget->add_flag("--no-audio", budget_args.no_audio, "Media has no audio track");
    budget->add_option("--text-tokens", budget_args.text_tokens,
                       "Transcript token count for the text setting")
        ->capture_default_str();
    budget->add_option("--setting", budget_args.setting,
                       "text|audio_only|video_only|av_fused|av_separate|all")
        ->capture_default_str();
    budget->add_option("--report", budget_args.report, "Write the estimates as JSON");
    budget->add_option("--min-pixels", budget_args.processor.min_pixels,
                       "Per-frame pixel lower clamp")
        ->capture_default_str();
    budget->add_option("--max-pixels", budget_args.processor.max_pixels,
                       "Per-frame pixel upper clamp")
        ->capture_default_str();
    budget->add_option("--audio-max-length", budget_args.processor.audio_max_length,
                       "Audio sample cap (16 kHz samples)")
        ->capture_default_str();
    budget->add_option("--image-max-pixels", budget_args.processor.image_max_pixels,
                       "Still-image pixel upper clamp")
        ->capture_default_str();
    budget->add_option("--image-min-pixels", budget_args.processor.image_min_pixels,
                       "Still-image pixel lower clamp")
        ->capture_default_str();
    budget->add_option("--fps", budget_args.processor.video_fps, "Sampled frames per second")
        ->capture_default_str();
    budget->add_option("--audio-tokens-per-second",
                       budget_args.processor.audio_tokens_per_second,
                       "Audio tokens per second")
        ->capture_default_str();
    budget->add_option("--patch-pixels", budget_args.processor.patch_pixels,
                       "Pixels per visual token")
        ->capture_default_str();
    budget->add_option("--fused-overhead", budget_args.processor.fused_overhead_tokens,
                       "Extra tokens added by fusion")
        ->capture_default_str();
    budget->add_option("--special-tokens", budget_args.processor.per_stream_special_tokens,
                       "Wrapper tokens per stream")
        ->capture_default_str();

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "Generate synthetic benchmark fixtures");
    add_common(synth, synth_args.common);
    synth->add_option("--kind", synth_args.kind, "separable|av-conflict")
        ->capture_default_str();
    synth->add_option("--out-dir", synth_args.out_dir, "Directory for the three JSONL files")
        ->capture_default_str();
    synth->add_option("--n-queries", synth_args.n_queries, "Number of queries")
        ->capture_default_str();
    synth->add_option("--n-docs", synth_args.n_docs, "Number of documents")
        ->capture_default_str();
    synth->add_option("--d-in", synth_args.d_in, "Feature-frame dimension")
        ->capture_default_str();
    synth->add_option("--noise", synth_args.noise, "Noise level sigma")->capture_default_str();
    synth->add_option("--conflict-fraction", synth_args.conflict_fraction,
                      "Fraction of positives with a conflicting stream")
        ->capture_default_str();

    CLI::App* selfcheck = app.add_subcommand("selfcheck", "Run the built-in oracle suites");
    CommonArgs selfcheck_common;
    add_common(selfcheck, selfcheck_common);

    try {
        std::vector<std::string> expanded = expand_config(args);
        // CLI11 parses reversed argv-style vectors.
        std::reverse(expanded.begin(), expanded.end());
        app.parse(expanded);

        if (*embed) return do_embed(embed_args);
        if (*search) return do_search(search_args);
        if (*eval) return do_eval(eval_args);
        if (*mine) return do_mine(mine_args);
        if (*train_cmd) return do_train(train_args);
        if (*ablate) return do_ablate(ablate_args);
        if (*budget) return do_budget(budget_args);
        if (*synth) return do_synth(synth_args);
        if (*selfcheck) {
            return run_selfcheck(std::cout) ? 0 : 3;
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace omniemb
