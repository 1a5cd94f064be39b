#pragma once

#include <cstdint>
#include <vector>

namespace hierid {

// Synthetic replicates of the exponential-growth model: a_i and b_i drawn
// from exponential population laws, observations are log(x) plus Gaussian
// noise at fixed times.
struct ExpGrowthDataset {
    int n = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> y;  // n rows of log-observations
    double sigma2 = 0.0;
    double x0 = 1.0;
    std::uint64_t seed = 0;
};

ExpGrowthDataset generate_expgrowth_data(int n, double mu_a, double mu_b, double x0, double sigma2,
                                         std::uint64_t seed);

struct LikelihoodSample {
    double mu_a = 0.0;
    double mu_b = 0.0;
    double loglik = 0.0;
    double mc_se = 0.0;
    int rank = 0;      // 1 = highest log-likelihood
    bool top = false;  // within the flagged top fraction
};

// Monte Carlo estimate of the population log-likelihood at (mu_a, mu_b): for
// each replicate the evidence is averaged over prior draws of (a, b), in
// log-sum-exp form, with the sigma-dependent constant dropped.  The draw set
// is symmetrized in (a, b) so that swapping (mu_a, mu_b) gives the identical
// value under common random numbers.  The uniform streams are keyed by
// (seed, replicate), never by the evaluation point, so calls at different
// points share random numbers.
LikelihoodSample mc_loglik(const ExpGrowthDataset& data, double mu_a, double mu_b, int n_mc,
                           std::uint64_t seed);

struct LandscapeConfig {
    enum class Sampler { UniformBox, Grid };
    Sampler sampler = Sampler::UniformBox;
    double box_lo = 1e-3;   // both axes
    double box_hi = 1.6;
    int n_points = 800;
    std::vector<std::pair<double, double>> grid;  // used when sampler == Grid
    int n_mc = 10'000;
    double top_fraction = 0.05;
    unsigned workers = 0;
};

// Evaluates mc_loglik at each sampled point with common random numbers, then
// ranks the samples and flags the top fraction.
std::vector<LikelihoodSample> likelihood_landscape(const ExpGrowthDataset& data,
                                                   const LandscapeConfig& cfg,
                                                   std::uint64_t seed);

}  // namespace hierid
