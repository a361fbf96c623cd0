#include "pllt/manifest.hpp"

#include <fstream>
#include <json.hpp>

#include "pllt/errors.hpp"

namespace pllt {

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PlltError("cannot open for checksum: " + path);
    std::uint64_t hash = 1469598103934665603ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 1099511628211ull;
        }
    }
    return hash;
}

std::string to_json(const RunManifest& m) {
    nlohmann::json j;
    j["outcome"] = m.outcome;
    j["config"] = m.config_snapshot;
    j["wall_ms"] = m.wall_ms;
    j["integration_steps"] = m.integration_steps;
    j["files"] = nlohmann::json::array();
    for (const auto& f : m.files) {
        nlohmann::json jf;
        jf["name"] = f.name;
        jf["bytes"] = f.bytes;
        char hex[19];
        std::snprintf(hex, sizeof(hex), "0x%016llx",
                      static_cast<unsigned long long>(f.fnv1a64));
        jf["fnv1a64"] = hex;
        j["files"].push_back(jf);
    }
    if (!m.summary_json.empty())
        j["summary"] = nlohmann::json::parse(m.summary_json);
    return j.dump(2) + "\n";
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    std::ofstream out(path);
    if (!out) throw PlltError("cannot write manifest: " + path);
    out << to_json(manifest);
}

RunManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PlltError("cannot read manifest: " + path);
    nlohmann::json j;
    in >> j;
    RunManifest m;
    m.outcome = j.value("outcome", "");
    m.config_snapshot = j.value("config", "");
    m.wall_ms = j.value("wall_ms", 0ull);
    m.integration_steps = j.value("integration_steps", 0ull);
    if (j.contains("files"))
        for (const auto& jf : j["files"]) {
            ManifestFile f;
            f.name = jf.value("name", "");
            f.bytes = jf.value("bytes", 0ull);
            f.fnv1a64 = std::strtoull(jf.value("fnv1a64", "0").c_str(), nullptr, 16);
            m.files.push_back(f);
        }
    if (j.contains("summary")) m.summary_json = j["summary"].dump();
    return m;
}

}  // namespace pllt
