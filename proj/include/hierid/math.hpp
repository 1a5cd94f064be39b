#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace hierid {

inline double norm_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

// Standard normal CDF via erfc; accurate in both tails.
inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double norm_cdf(double x, double mean, double sd) { return norm_cdf((x - mean) / sd); }

inline double log_norm_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * M_PI);
}

double logsumexp(std::span<const double> logs);

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // unbiased (n-1)

// Adaptive Simpson quadrature with absolute tolerance.  The interval is first
// split into uniform panels so localized features cannot slip between the
// initial sample points.
double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                          double abs_tol, int max_depth = 40, int panels = 32);

// Nelder-Mead minimizer. Deterministic; returns the best point found after at
// most max_evals function evaluations or once the simplex spread drops below
// f_tol (values) and x_tol (coordinates).
struct NelderMeadResult {
    std::vector<double> x;
    double fx = 0.0;
    int evals = 0;
};
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x0, std::span<const double> init_step,
                             int max_evals = 2000, double f_tol = 1e-10, double x_tol = 1e-10);

}  // namespace hierid
