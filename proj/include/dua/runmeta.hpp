#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace dua {

inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a over the file bytes, rendered as 16 hex digits.
std::string file_content_hash(const std::filesystem::path& path);

/// Audit record written next to every command's artifacts: the fully
/// resolved configuration, seed, input hashes and produced files.
struct RunManifest {
    std::string command;
    std::string tool_version = kToolVersion;
    std::uint64_t seed = 0;
    nlohmann::json resolved_config;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, content hash
    std::vector<std::string> artifacts;
    double duration_seconds = 0.0;
};

void write_run_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace dua
