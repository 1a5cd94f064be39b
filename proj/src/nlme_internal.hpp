#pragma once

// Shared machinery between the SAEM estimator and the importance-sampling
// likelihood: dataset grouping, parameter layout, prediction and residual
// log-likelihood, and a small Cholesky for the per-individual curvature.

#include <optional>
#include <span>
#include <vector>

#include "hierid/nlme.hpp"

namespace hierid::detail {

struct IndividualData {
    int id = 0;
    std::vector<double> times;
    std::vector<double> y;
    std::vector<DoseEvent> doses;
};

class Problem {
public:
    Problem(const TrialDataset& data, const StatModelSpec& spec);

    const StatModelSpec& spec() const { return *spec_; }
    const std::vector<IndividualData>& individuals() const { return individuals_; }
    std::size_t n_obs_total() const { return n_obs_total_; }

    std::size_t n_fitted() const { return spec_->fitted.size(); }
    const std::vector<std::size_t>& re_indices() const { return re_; }
    const std::vector<std::size_t>& noiv_indices() const { return noiv_; }
    std::size_t n_re() const { return re_.size(); }

    // Complete fitted vector (transformed scale) from random-effect values and
    // no-variability values.
    std::vector<double> fitted_vec(std::span<const double> eta_re,
                                   std::span<const double> c_noiv) const;

    // Structural parameter vector (linear scale) for one individual.
    std::vector<double> full_params(std::span<const double> fitted_transformed) const;

    // Predictions at the individual's observation times; nullopt on numerical
    // failure of the solver.
    std::optional<std::vector<double>> try_predict(const IndividualData& ind,
                                                   std::span<const double> fitted_transformed) const;

    // Gaussian residual log-likelihood under the spec's error model; -inf for
    // non-finite or invalid predictions.
    double obs_loglik(const IndividualData& ind, std::span<const double> f, double err) const;

private:
    const StatModelSpec* spec_;
    std::vector<IndividualData> individuals_;
    std::size_t n_obs_total_ = 0;
    std::vector<std::size_t> re_;
    std::vector<std::size_t> noiv_;
    // Per structural parameter: index into fitted, or -1 with a fixed value.
    struct Source {
        int fitted_idx = -1;
        double fixed_value = 0.0;
    };
    std::vector<Source> layout_;
};

// In-place lower Cholesky of a small symmetric matrix (row-major n x n).
// Returns false when the matrix is not positive definite.
bool cholesky(std::vector<double>& a, std::size_t n);

}  // namespace hierid::detail
