#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hierid/population.hpp"

namespace hierid {

// Individual estimates for one parameter on the transformed scale.
struct SampleSet {
    std::string parameter;
    std::vector<double> values;
};

// Fitted population density: Normal(location, spread^2) on the transformed
// scale.
struct DensitySpec {
    std::string parameter;
    Transform transform = Transform::Log;
    double location = 0.0;
    double spread = 0.0;

    void validate() const;
};

struct KsResult {
    double D = 0.0;
    double p = 1.0;
    bool exact = true;  // exact permutation distribution vs asymptotic
};

// Two-sample Kolmogorov-Smirnov test.  The p-value is the exact permutation
// tail probability P(D >= D_obs) computed by lattice-path counting (tie-aware)
// when n*m <= 10^4, and the asymptotic Kolmogorov distribution at effective
// size nm/(n+m) otherwise.
KsResult ks_two_sample(const SampleSet& x, const SampleSet& y);

// Overlapping index between two normal densities: integral of min(f1, f2).
// Computed from the analytic crossing points and normal CDFs.
double overlap_normals(double mean1, double sd1, double mean2, double sd2);

// Overlap on the common transformed scale of two fitted densities.
double overlap_index(const DensitySpec& d1, const DensitySpec& d2);

// Quadrature route for arbitrary densities; used as an independent cross-check
// of the analytic path.
double overlap_quadrature(const std::function<double(double)>& f1,
                          const std::function<double(double)>& f2, double lo, double hi,
                          double abs_tol = 1e-10);

// Small dense symmetric matrix keyed by fit index.
struct SquareMatrix {
    int n = 0;
    std::vector<double> data;  // row-major

    explicit SquareMatrix(int size = 0, double fill = 0.0)
        : n(size), data(static_cast<std::size_t>(size) * static_cast<std::size_t>(size), fill) {}
    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * n + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * n + j]; }
};

// Everything the comparison needs from one fit.
struct FitDistributions {
    int fit_index = 0;       // position in the ranked list (0 = best AIC)
    double minus2ll = 0.0;
    std::map<std::string, SampleSet> samples;
    std::map<std::string, DensitySpec> densities;
};

struct ParameterComparison {
    std::string parameter;
    SquareMatrix ks_p, ks_d, overlap;
    bool exact_p = true;
    std::vector<std::vector<int>> clusters;  // partition of fit indices
};

struct ComparisonReport {
    double alpha = 0.05;
    double overlap_threshold = 0.5;
    int n_fits = 0;
    std::vector<ParameterComparison> parameters;
    // Partition where fits are joined only when the pair rule holds for every
    // parameter simultaneously.
    std::vector<std::vector<int>> joint_clusters;
};

// Pairwise KS tests on individual estimates and overlap indices on population
// densities for every parameter common to all fits.  Requires K >= 2 fits with
// identical parameter sets.
ComparisonReport pairwise_report(std::span<const FitDistributions> fits, double alpha,
                                 double overlap_threshold = 0.5);

// Connected components of the graph joining fits i,j when KS p > alpha and
// overlap > threshold for the given parameter.
std::vector<std::vector<int>> cluster_fits(const ComparisonReport& report,
                                           const std::string& parameter);

}  // namespace hierid
