// Copyright (C) 2026 omniemb contributors
// SPDX-License-Identifier: Apache-2.0

#include "omniemb/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "omniemb/errors.hpp"
#include "omniemb/rng.hpp"

namespace omniemb {

using nlohmann::json;

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for digesting");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string bytes = std::move(ss).str();
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return hex;
}

void add_input(RunManifest& m, const std::filesystem::path& path) {
    m.inputs.push_back({path.string(), file_digest(path)});
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& artifact) {
    return std::filesystem::path(artifact.string() + ".manifest.json");
}

void write_manifests(const RunManifest& m) {
    json j;
    j["command"] = m.command;
    j["flags"] = m.flags;
    json inputs = json::array();
    for (const auto& [path, digest] : m.inputs) {
        inputs.push_back({{"path", path}, {"fnv1a64", digest}});
    }
    j["inputs"] = std::move(inputs);
    j["outputs"] = m.outputs;
    j["seed"] = m.seed;
    j["tool_version"] = m.tool_version;
    j["created_utc"] = m.created_utc.empty() ? utc_timestamp() : m.created_utc;

    for (const std::string& artifact : m.outputs) {
        const std::filesystem::path path = manifest_path_for(artifact);
        std::ofstream out(path);
        if (!out) {
            throw IoError("cannot open '" + path.string() + "' for writing");
        }
        out << j.dump(2) << '\n';
        if (!out) {
            throw IoError("failed writing '" + path.string() + "'");
        }
    }
}

}  // namespace omniemb
