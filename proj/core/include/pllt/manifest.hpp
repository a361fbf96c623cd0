#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pllt {

/// FNV-1a 64-bit checksum of a file's bytes.
[[nodiscard]] std::uint64_t fnv1a64_file(const std::string& path);

struct ManifestFile {
    std::string name;  ///< relative to the run directory
    std::uint64_t bytes = 0;
    std::uint64_t fnv1a64 = 0;
};

/// Record of one run: resolved config, emitted artifacts with checksums,
/// costs and the outcome. Written even when the run fails.
struct RunManifest {
    std::string outcome;         ///< "success" or "failed: <reason>"
    std::string config_snapshot; ///< serialized resolved config
    std::vector<ManifestFile> files;
    std::uint64_t wall_ms = 0;
    std::uint64_t integration_steps = 0;
    std::string summary_json;    ///< per-kind summary (JSON object)

    [[nodiscard]] bool success() const { return outcome == "success"; }
};

/// Serializes the manifest to JSON text.
[[nodiscard]] std::string to_json(const RunManifest& manifest);

void write_manifest(const std::string& path, const RunManifest& manifest);

[[nodiscard]] RunManifest read_manifest(const std::string& path);

}  // namespace pllt
