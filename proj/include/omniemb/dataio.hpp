// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "omniemb/core.hpp"
#include "omniemb/encoder.hpp"

namespace omniemb {

/// Graded relevance judgments: query_id -> (doc_id -> grade).
struct Qrels {
    std::map<std::string, std::map<std::string, int>> judgments;
};

/// Ordered, labeled embedding collection persisted in a fixed binary layout.
/// A document owns one entry per stream label; (doc_id, stream_label) pairs
/// are unique and every embedding shares the store dim.
struct StoreEntry {
    std::string doc_id;
    std::string stream_label;
    Embedding embedding;
};

struct EmbeddingStore {
    std::uint32_t dim = 0;
    std::vector<StoreEntry> entries;
};

bool operator==(const StoreEntry& a, const StoreEntry& b);
bool operator==(const EmbeddingStore& a, const EmbeddingStore& b);

void validate(const EmbeddingStore& store);

// ---------------------------------------------------------------------------
// JSON-lines fixtures.
//
// corpus:  {"id": ..., "streams": [{"modality": "text", "token_ids": [...]
//          | "text": "..."} | {"modality": "audio", "timeline":
//          [{"t": 0.0, "frame": [...]}, ...]}]}
// queries: {"id": ..., "text": "..."} or a full corpus-shaped record
// qrels:   {"query_id": ..., "doc_id": ..., "grade": 0}
//
// Loading preserves file order and is insensitive to a trailing newline.
// Raw text fields are tokenized at load with the caller's vocab size.
// ---------------------------------------------------------------------------

std::vector<MediaItem> load_corpus(const std::filesystem::path& path,
                                   std::uint32_t vocab_size = kDefaultVocabSize);

std::vector<MediaItem> load_queries(const std::filesystem::path& path,
                                    std::uint32_t vocab_size = kDefaultVocabSize);

Qrels load_qrels(const std::filesystem::path& path);

void write_corpus(const std::vector<MediaItem>& items, const std::filesystem::path& path);
void write_qrels(const Qrels& qrels, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Binary store, little-endian:
//   magic "OMNIEMB1" | u32 version=1 | u32 dim | u64 count |
//   per entry: u16 id_len, id bytes, u16 label_len, label bytes, dim x f32
// read(write(s)) == s bit-for-bit, including entry order. Writes go through
// a temp file plus rename so readers never observe a partial store.
// ---------------------------------------------------------------------------

void write_store(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore read_store(const std::filesystem::path& path);

}  // namespace omniemb
