#include "hierid/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "hierid/errors.hpp"

namespace hierid {

std::string fnv1a_hash(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void RunManifest::write(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["tool"] = "hierid";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["timings_sec"] = timings_sec;
    j["corrections"] = corrections;
    j["outputs"] = outputs;
    if (!resolved_config.empty())
        j["config"] = nlohmann::json::parse(resolved_config);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw_io("cannot write " + path.string());
    os << j.dump(2) << '\n';
}

}  // namespace hierid
