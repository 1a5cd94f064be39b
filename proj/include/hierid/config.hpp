#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "hierid/expgrowth.hpp"
#include "hierid/models.hpp"
#include "hierid/nlme.hpp"
#include "hierid/population.hpp"

namespace hierid {

struct AppendixConfig {
    double mu_a = 1.0;
    double mu_b = 0.1;
    double x0 = 1.0;
    double sigma2 = 0.025;
    std::vector<int> n_set = {5, 20, 50, 200};
    int n_points = 800;
    int n_mc = 10'000;
    double box_lo = 1e-3;
    double box_hi = 1.6;
    double top_fraction = 0.05;
};

struct FittingConfig {
    std::vector<PopulationDistribution> fitted;  // spread doubles as the initial omega
    NamedValues fixed_constants;
    ErrorModel error_model;
    NamedBounds bounds;
    int n_starts = 100;
    SaemConfig saem;
};

struct RunConfig {
    std::string model;  // friberg | tiv | expgrowth
    std::uint64_t seed = 0;

    // generation
    int n_individuals = 15;
    std::vector<PopulationDistribution> distributions;
    NamedValues gen_constants;
    StudyDesign design;

    // friberg-only PK block
    bool has_pk = false;
    ZalypsisPkParams pk{};
    bool pk_literal = false;

    FittingConfig fitting;

    // analysis
    int top_k = 10;
    double alpha = 0.05;
    double quality_window = 2.0;     // -2LL distance treated as equal fit quality
    double overlap_threshold = 0.5;  // cluster edge / verdict threshold

    AppendixConfig appendix;

    std::string resolved_json;  // canonical dump embedded in manifests
};

RunConfig load_config(const std::filesystem::path& path);

// The structural model pair for a config: tight tolerances for data
// generation, looser ones inside the estimator.
struct ModelBundle {
    std::shared_ptr<const Structural> generation;
    std::shared_ptr<const Structural> fitting;
};
ModelBundle build_models(const RunConfig& cfg);

StatModelSpec build_stat_spec(const RunConfig& cfg, const ModelBundle& models);

}  // namespace hierid
