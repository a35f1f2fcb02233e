// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include "omniemb/dataio.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "omniemb/errors.hpp"

namespace omniemb {

using nlohmann::json;

bool operator==(const StoreEntry& a, const StoreEntry& b) {
    return a.doc_id == b.doc_id && a.stream_label == b.stream_label &&
           a.embedding.dim == b.embedding.dim && a.embedding.values == b.embedding.values;
}

bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
    return a.dim == b.dim && a.entries == b.entries;
}

void validate(const EmbeddingStore& store) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& entry : store.entries) {
        if (entry.doc_id.empty()) {
            throw ValidationError("store entry has an empty doc id");
        }
        if (entry.embedding.dim != store.dim || entry.embedding.values.size() != store.dim) {
            throw ValidationError("store entry '" + entry.doc_id + "/" + entry.stream_label +
                                  "' does not match the store dim " + std::to_string(store.dim));
        }
        if (!seen.emplace(entry.doc_id, entry.stream_label).second) {
            throw ValidationError("duplicate store entry '" + entry.doc_id + "/" +
                                  entry.stream_label + "'");
        }
    }
}

// ---------------------------------------------------------------------------
// JSON lines
// ---------------------------------------------------------------------------

namespace {

json parse_line(const std::string& line, const std::filesystem::path& path, std::size_t lineno) {
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
        throw ValidationError(path.string() + ":" + std::to_string(lineno) +
                              ": not a JSON object");
    }
    return j;
}

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

/// Calls fn(record, lineno) for every non-blank line of a JSONL file.
template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank(line)) {
            continue;
        }
        fn(parse_line(line, path, lineno), lineno);
    }
}

std::string field_context(const std::filesystem::path& path, std::size_t lineno) {
    return path.string() + ":" + std::to_string(lineno);
}

std::string require_string(const json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key) || !j.at(key).is_string()) {
        throw ValidationError(ctx + ": missing or non-string '" + std::string(key) + "'");
    }
    return j.at(key).get<std::string>();
}

Stream parse_stream(const json& j, std::uint32_t vocab_size, const std::string& ctx) {
    Stream s;
    s.modality = modality_from_string(require_string(j, "modality", ctx));

    const bool has_tokens = j.contains("token_ids");
    const bool has_text = j.contains("text");
    const bool has_timeline = j.contains("timeline");
    if (static_cast<int>(has_tokens) + static_cast<int>(has_text) +
            static_cast<int>(has_timeline) != 1) {
        throw ValidationError(ctx + ": stream needs exactly one of token_ids, text, timeline");
    }

    if (has_tokens) {
        if (!j.at("token_ids").is_array()) {
            throw ValidationError(ctx + ": token_ids must be an array");
        }
        for (const auto& tok : j.at("token_ids")) {
            if (!tok.is_number_unsigned()) {
                throw ValidationError(ctx + ": token ids must be non-negative integers");
            }
            s.token_ids.push_back(tok.get<std::uint32_t>());
        }
    } else if (has_text) {
        if (!j.at("text").is_string()) {
            throw ValidationError(ctx + ": text must be a string");
        }
        s.token_ids = tokenize(j.at("text").get<std::string>(), vocab_size);
    } else {
        if (!j.at("timeline").is_array()) {
            throw ValidationError(ctx + ": timeline must be an array");
        }
        for (const auto& fj : j.at("timeline")) {
            if (!fj.is_object() || !fj.contains("t") || !fj.contains("frame") ||
                !fj.at("t").is_number() || !fj.at("frame").is_array()) {
                throw ValidationError(ctx + ": timeline entries need numeric t and a frame array");
            }
            Frame frame;
            frame.t = fj.at("t").get<double>();
            for (const auto& v : fj.at("frame")) {
                if (!v.is_number()) {
                    throw ValidationError(ctx + ": frame values must be numbers");
                }
                frame.values.push_back(v.get<float>());
            }
            s.timeline.push_back(std::move(frame));
        }
    }
    return s;
}

MediaItem parse_item(const json& j, std::uint32_t vocab_size, const std::string& ctx) {
    MediaItem item;
    item.id = require_string(j, "id", ctx);
    if (!j.contains("streams") || !j.at("streams").is_array()) {
        throw ValidationError(ctx + ": missing or non-array 'streams'");
    }
    for (const auto& sj : j.at("streams")) {
        if (!sj.is_object()) {
            throw ValidationError(ctx + ": stream entries must be objects");
        }
        item.streams.push_back(parse_stream(sj, vocab_size, ctx));
    }
    try {
        validate(item);
    } catch (const ValidationError& e) {
        throw ValidationError(ctx + ": " + e.what());
    }
    return item;
}

void check_unique_ids(const std::vector<MediaItem>& items, const std::filesystem::path& path) {
    std::set<std::string> ids;
    for (const auto& item : items) {
        if (!ids.insert(item.id).second) {
            throw ValidationError(path.string() + ": duplicate id '" + item.id + "'");
        }
    }
}

std::ofstream open_for_write(const std::filesystem::path& path, std::ios::openmode mode) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw IoError("cannot create directory '" + path.parent_path().string() +
                          "': " + ec.message());
        }
    }
    std::ofstream out(path, mode);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

json stream_to_json(const Stream& s) {
    json j;
    j["modality"] = to_string(s.modality);
    if (s.modality == Modality::text) {
        j["token_ids"] = s.token_ids;
    } else {
        json timeline = json::array();
        for (const auto& frame : s.timeline) {
            timeline.push_back({{"t", frame.t}, {"frame", frame.values}});
        }
        j["timeline"] = std::move(timeline);
    }
    return j;
}

}  // namespace

std::vector<MediaItem> load_corpus(const std::filesystem::path& path, std::uint32_t vocab_size) {
    std::vector<MediaItem> items;
    for_each_record(path, [&](const json& j, std::size_t lineno) {
        items.push_back(parse_item(j, vocab_size, field_context(path, lineno)));
    });
    check_unique_ids(items, path);
    return items;
}

std::vector<MediaItem> load_queries(const std::filesystem::path& path, std::uint32_t vocab_size) {
    std::vector<MediaItem> items;
    for_each_record(path, [&](const json& j, std::size_t lineno) {
        const std::string ctx = field_context(path, lineno);
        if (j.contains("streams")) {
            // Corpus-shaped record: media queries use the same layout as docs.
            items.push_back(parse_item(j, vocab_size, ctx));
            return;
        }
        MediaItem item;
        item.id = require_string(j, "id", ctx);
        Stream s;
        s.modality = Modality::text;
        s.token_ids = tokenize(require_string(j, "text", ctx), vocab_size);
        item.streams.push_back(std::move(s));
        try {
            validate(item);
        } catch (const ValidationError& e) {
            throw ValidationError(ctx + ": " + e.what());
        }
        items.push_back(std::move(item));
    });
    check_unique_ids(items, path);
    return items;
}

Qrels load_qrels(const std::filesystem::path& path) {
    Qrels qrels;
    for_each_record(path, [&](const json& j, std::size_t lineno) {
        const std::string ctx = field_context(path, lineno);
        const std::string qid = require_string(j, "query_id", ctx);
        const std::string did = require_string(j, "doc_id", ctx);
        if (!j.contains("grade") || !j.at("grade").is_number_integer()) {
            throw ValidationError(ctx + ": missing or non-integer 'grade'");
        }
        const int grade = j.at("grade").get<int>();
        if (grade < 0) {
            throw ValidationError(ctx + ": grade must be non-negative");
        }
        auto [it, inserted] = qrels.judgments[qid].emplace(did, grade);
        if (!inserted) {
            throw ValidationError(ctx + ": duplicate judgment for (" + qid + ", " + did + ")");
        }
    });
    return qrels;
}

void write_corpus(const std::vector<MediaItem>& items, const std::filesystem::path& path) {
    auto out = open_for_write(path, std::ios::out | std::ios::trunc);
    for (const auto& item : items) {
        json j;
        j["id"] = item.id;
        json streams = json::array();
        for (const auto& s : item.streams) {
            streams.push_back(stream_to_json(s));
        }
        j["streams"] = std::move(streams);
        out << j.dump() << '\n';
    }
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

void write_qrels(const Qrels& qrels, const std::filesystem::path& path) {
    auto out = open_for_write(path, std::ios::out | std::ios::trunc);
    for (const auto& [qid, docs] : qrels.judgments) {
        for (const auto& [did, grade] : docs) {
            json j{{"query_id", qid}, {"doc_id", did}, {"grade", grade}};
            out << j.dump() << '\n';
        }
    }
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

// ---------------------------------------------------------------------------
// Binary store
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'O', 'M', 'N', 'I', 'E', 'M', 'B', '1'};
constexpr std::uint32_t kStoreVersion = 1;

void put_u16(std::string& buf, std::uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

void put_f32(std::string& buf, float v) { put_u32(buf, std::bit_cast<std::uint32_t>(v)); }

class ByteReader {
public:
    ByteReader(std::string bytes, const std::filesystem::path& path)
        : bytes_(std::move(bytes)), path_(path) {}

    std::uint16_t u16() { return static_cast<std::uint16_t>(raw(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(raw(4)); }
    std::uint64_t u64() { return raw(8); }
    float f32() { return std::bit_cast<float>(u32()); }

    std::string str(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool exhausted() const { return pos_ == bytes_.size(); }

    void fail(const std::string& what) const {
        throw IoError("'" + path_.string() + "': " + what);
    }

private:
    std::uint64_t raw(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
                 << (8 * i);
        }
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) {
            fail("truncated store");
        }
    }

    std::string bytes_;
    std::size_t pos_ = 0;
    const std::filesystem::path& path_;
};

}  // namespace

void write_store(const EmbeddingStore& store, const std::filesystem::path& path) {
    validate(store);

    std::string buf;
    buf.append(kMagic, sizeof(kMagic));
    put_u32(buf, kStoreVersion);
    put_u32(buf, store.dim);
    put_u64(buf, store.entries.size());
    for (const auto& entry : store.entries) {
        if (entry.doc_id.size() > 0xffff || entry.stream_label.size() > 0xffff) {
            throw ValidationError("store id/label longer than 65535 bytes: '" + entry.doc_id +
                                  "'");
        }
        put_u16(buf, static_cast<std::uint16_t>(entry.doc_id.size()));
        buf.append(entry.doc_id);
        put_u16(buf, static_cast<std::uint16_t>(entry.stream_label.size()));
        buf.append(entry.stream_label);
        for (float v : entry.embedding.values) {
            put_f32(buf, v);
        }
    }

    // Write the whole image to a sibling temp file, then rename it into
    // place: a crashed run leaves either the old store or the new one,
    // never a torn file.
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        auto out = open_for_write(tmp, std::ios::out | std::ios::trunc | std::ios::binary);
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!out) {
            throw IoError("failed writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() +
                      "': " + ec.message());
    }
}

EmbeddingStore read_store(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    ByteReader r(std::move(ss).str(), path);

    if (r.str(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic))) {
        r.fail("bad magic (not an embedding store)");
    }
    const std::uint32_t version = r.u32();
    if (version != kStoreVersion) {
        r.fail("unsupported store version " + std::to_string(version));
    }

    EmbeddingStore store;
    store.dim = r.u32();
    const std::uint64_t count = r.u64();
    store.entries.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        StoreEntry entry;
        entry.doc_id = r.str(r.u16());
        entry.stream_label = r.str(r.u16());
        entry.embedding.dim = store.dim;
        entry.embedding.values.resize(store.dim);
        for (std::uint32_t d = 0; d < store.dim; ++d) {
            entry.embedding.values[d] = r.f32();
        }
        // The layout carries no flag byte; recover the property from the data.
        entry.embedding.normalized = std::abs(l2_norm(entry.embedding) - 1.0) <= 1e-6;
        store.entries.push_back(std::move(entry));
    }
    if (!r.exhausted()) {
        r.fail("trailing bytes after the last entry");
    }
    validate(store);
    return store;
}

}  // namespace omniemb
