#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

namespace hierid {

// Exit codes shared by the library-level commands and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitPartial = 4;

struct SimulateOptions {
    std::filesystem::path config;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;  // overrides the config seed
};

struct FitOptions {
    std::filesystem::path data;
    std::filesystem::path config;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_starts;
    std::optional<int> top_k;
    unsigned workers = 0;
};

struct AnalyzeOptions {
    std::filesystem::path fits;
    std::filesystem::path out;
    std::optional<double> alpha;
    std::optional<int> top_k;
    // Defaults used unless the fits directory's summary carries overrides.
    double quality_window = 2.0;
    double overlap_threshold = 0.5;
};

struct AppendixOptions {
    std::filesystem::path config;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;
};

int cmd_simulate(const SimulateOptions& opt);
int cmd_fit(const FitOptions& opt);
int cmd_analyze(const AnalyzeOptions& opt);
int cmd_appendix(const AppendixOptions& opt);

}  // namespace hierid
