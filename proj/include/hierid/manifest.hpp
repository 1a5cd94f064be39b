#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hierid {

inline constexpr const char* kToolVersion = "0.1.0";

// Reproducibility record written alongside every command's outputs.
struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::map<std::string, double> timings_sec;
    std::map<std::string, bool> corrections;  // e.g. pk_literal
    std::vector<std::string> outputs;
    std::string resolved_config;  // JSON text, empty when no config was used

    void write(const std::filesystem::path& path) const;
};

std::string fnv1a_hash(const std::string& text);

}  // namespace hierid
