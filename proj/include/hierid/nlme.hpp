#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hierid/identifiability.hpp"
#include "hierid/population.hpp"
#include "hierid/structural.hpp"

namespace hierid {

struct ErrorModel {
    enum class Kind { Proportional, AdditiveLog10 };
    Kind kind = Kind::Proportional;
    double init = 0.2;  // initial value of the estimated error parameter
};

// Statistical model: which structural parameters are estimated (with or
// without inter-individual variability), which are fixed, and the residual
// error law.  `fitted` entries with spread > 0 are random effects, and the
// spread doubles as the initial omega; spread == 0 marks a population
// parameter estimated without variability.
struct StatModelSpec {
    std::shared_ptr<const Structural> structural;
    std::vector<PopulationDistribution> fitted;
    NamedValues fixed_constants;
    ErrorModel error_model;

    void validate() const;  // fitted and fixed names must partition the layout
};

struct SaemConfig {
    int n_burnin_iters = 300;
    int n_smoothing_iters = 200;
    int mcmc_steps_per_iter = 5;
    double step_size_exponent = 0.7;  // in (0.5, 1]
    std::uint64_t seed = 0;
    int n_is_samples = 5000;  // importance-sampling draws per individual

    // Numerical floors on the transformed scale.
    double spread_floor = 1e-4;
    double error_floor = 1e-3;

    void validate() const;
};

struct TraceRow {
    int iter = 0;
    std::vector<double> values;
};

struct FitResult {
    std::vector<PopulationDistribution> population;  // estimated locations/spreads
    double error_param = 0.0;
    std::map<int, NamedValues> individual_estimates;  // conditional modes, linear scale
    double minus2ll = std::numeric_limits<double>::quiet_NaN();
    double mc_se = std::numeric_limits<double>::quiet_NaN();
    double aic = std::numeric_limits<double>::quiet_NaN();
    int n_estimated = 0;
    int start_index = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> trace_names;
    std::vector<TraceRow> trace;
    long numeric_rejects = 0;     // proposals rejected for numerical reasons
    bool ll_prior_fallback = false;

    const PopulationDistribution& population_for(const std::string& name) const;
};

// SAEM: Metropolis-Hastings E-step per individual, stochastic-approximation
// update of sufficient statistics, closed-form M-step for locations, spreads
// and the error parameter, one damped Newton step per iteration for
// no-variability parameters.  Deterministic for fixed (init, seed).
FitResult saem_fit(const TrialDataset& data, const StatModelSpec& spec,
                   const NamedValues& init_linear, const SaemConfig& cfg);

struct LikelihoodEstimate {
    double minus2ll = 0.0;
    double mc_se = 0.0;
    bool prior_fallback = false;
};

// Importance-sampling estimate of -2 log marginal likelihood with a Gaussian
// proposal matched to each individual's conditional mode and curvature
// (covariance inflated by 1.5 for heavier tails).  With no random effects the
// likelihood is evaluated exactly and mc_se is 0.
LikelihoodEstimate log_likelihood_is(const FitResult& fit, const TrialDataset& data,
                                     const StatModelSpec& spec, int n_samples,
                                     std::uint64_t seed);

double aic(double minus2ll, int n_estimated);

// Linear-scale lower/upper bounds per fitted parameter.
using NamedBounds = std::map<std::string, std::pair<double, double>>;

// n initial estimate vectors, each coordinate uniform on its interval
// (log-uniform for log-transformed parameters).
std::vector<NamedValues> sample_initial_estimates(const NamedBounds& bounds,
                                                  const std::vector<PopulationDistribution>& fitted,
                                                  int n, std::uint64_t seed);

struct MultiStartResult {
    std::vector<FitResult> fits;  // ascending AIC, ties broken by start index
    std::vector<std::pair<int, std::string>> failures;
};

// Runs saem_fit + log_likelihood_is from each sampled initial estimate.  Every
// start shares the SaemConfig seed, so two starts with identical initial
// values produce identical fits.  Fits run in parallel workers; results do not
// depend on scheduling.
MultiStartResult multi_start(const TrialDataset& data, const StatModelSpec& spec,
                             const NamedBounds& bounds, int n_starts, const SaemConfig& cfg,
                             unsigned workers = 0);

// Fit directory layout: population.csv, individuals.csv, ll.json, trace.csv.
void write_fit(const FitResult& fit, const std::filesystem::path& dir);
FitResult read_fit(const std::filesystem::path& dir);

// Adapter feeding the identifiability layer: transformed-scale individual
// estimates and fitted densities for every random-effect parameter.
FitDistributions fit_distributions(const FitResult& fit, int fit_index);

}  // namespace hierid
