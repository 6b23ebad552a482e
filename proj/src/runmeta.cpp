#include "dua/runmeta.hpp"

#include <cstdio>
#include <fstream>

#include "dua/csv.hpp"
#include "dua/errors.hpp"

namespace dua {

std::string file_content_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot hash missing file: " + path.string());
    std::uint64_t hash = 1469598103934665603ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
    return out;
}

void write_run_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    nlohmann::json j;
    j["command"] = manifest.command;
    j["tool_version"] = manifest.tool_version;
    j["seed"] = manifest.seed;
    j["config"] = manifest.resolved_config;
    j["inputs"] = nlohmann::json::object();
    for (const auto& [file, hash] : manifest.inputs) j["inputs"][file] = hash;
    j["artifacts"] = manifest.artifacts;
    j["duration_seconds"] = manifest.duration_seconds;
    atomic_write_text(path, j.dump(2) + "\n");
}

}  // namespace dua
