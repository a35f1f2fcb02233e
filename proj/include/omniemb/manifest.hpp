// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace omniemb {

inline constexpr const char* kToolVersion = "1.0.0";

/// Provenance sidecar written next to every file artifact: which command
/// produced it, from which inputs (with content digests), under which flags
/// and seed. Re-running the recorded command on the recorded inputs
/// reproduces the artifact byte for byte; the timestamp only dates the
/// record itself.
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> flags;
    std::vector<std::pair<std::string, std::string>> inputs;  // path -> digest
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    std::string tool_version = kToolVersion;
    std::string created_utc;
};

/// FNV-1a 64 digest of a file's bytes, as fixed-width hex.
std::string file_digest(const std::filesystem::path& path);

/// Records path plus its current content digest.
void add_input(RunManifest& m, const std::filesystem::path& path);

/// Current time as an ISO-8601 UTC string.
std::string utc_timestamp();

/// Sidecar path convention: "<artifact>.manifest.json".
std::filesystem::path manifest_path_for(const std::filesystem::path& artifact);

/// Writes the manifest next to each listed output.
void write_manifests(const RunManifest& m);

}  // namespace omniemb
