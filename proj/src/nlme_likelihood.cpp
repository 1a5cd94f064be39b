#include <algorithm>
#include <cmath>

#include "hierid/errors.hpp"
#include "hierid/math.hpp"
#include "hierid/rng.hpp"
#include "nlme_internal.hpp"

namespace hierid {

namespace {

using detail::IndividualData;
using detail::Problem;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kProposalInflation = 1.5;  // covariance inflation for heavier tails

struct Curvature {
    std::vector<double> chol;  // lower Cholesky factor of the Hessian H
    double log_det_h = 0.0;
    bool ok = false;
};

// Hessian of `neg_log_joint` at the mode with per-coordinate adaptive steps:
// each step is tuned until the function moves by a moderate amount, which
// keeps the finite differences meaningful for very sharp posteriors.
Curvature estimate_curvature(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> mode) {
    const std::size_t n = mode.size();
    Curvature out;
    const double f0 = f(mode);
    if (!(f0 < 1e99)) return out;

    std::vector<double> h(n, 0.1);
    std::vector<double> x(mode.begin(), mode.end());
    for (std::size_t j = 0; j < n; ++j) {
        for (int tries = 0; tries < 60; ++tries) {
            x[j] = mode[j] + h[j];
            const double fp = f(x);
            x[j] = mode[j] - h[j];
            const double fm = f(x);
            x[j] = mode[j];
            const double move = std::max(std::abs(fp - f0), std::abs(fm - f0));
            if (!(fp < 1e99) || !(fm < 1e99) || move > 3.0) {
                h[j] *= 0.5;
            } else if (move < 0.05) {
                h[j] *= 2.0;
            } else {
                break;
            }
            if (h[j] < 1e-10 || h[j] > 1e6) return out;
        }
    }

    std::vector<double> hess(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        x[j] = mode[j] + h[j];
        const double fp = f(x);
        x[j] = mode[j] - h[j];
        const double fm = f(x);
        x[j] = mode[j];
        if (!(fp < 1e99) || !(fm < 1e99)) return out;
        hess[j * n + j] = (fp - 2.0 * f0 + fm) / (h[j] * h[j]);
    }
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = j + 1; k < n; ++k) {
            auto eval = [&](double sj, double sk) {
                x[j] = mode[j] + sj * h[j];
                x[k] = mode[k] + sk * h[k];
                const double v = f(x);
                x[j] = mode[j];
                x[k] = mode[k];
                return v;
            };
            const double fpp = eval(1, 1), fpm = eval(1, -1), fmp = eval(-1, 1),
                         fmm = eval(-1, -1);
            if (!(fpp < 1e99) || !(fpm < 1e99) || !(fmp < 1e99) || !(fmm < 1e99)) return out;
            const double v = (fpp - fpm - fmp + fmm) / (4.0 * h[j] * h[k]);
            hess[j * n + k] = hess[k * n + j] = v;
        }
    }

    out.chol = hess;
    if (!detail::cholesky(out.chol, n)) return out;
    out.log_det_h = 0.0;
    for (std::size_t j = 0; j < n; ++j) out.log_det_h += 2.0 * std::log(out.chol[j * n + j]);
    out.ok = true;
    return out;
}

// Quadratic form e' H e given the lower Cholesky factor of H: |L' e|^2.
double quad_form(const std::vector<double>& chol, std::span<const double> e) {
    const std::size_t n = e.size();
    double q = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double v = 0.0;
        for (std::size_t i = j; i < n; ++i) v += chol[i * n + j] * e[i];
        q += v * v;
    }
    return q;
}

// Solve L' y = z for the proposal draw (cov = H^{-1}).
std::vector<double> upper_solve(const std::vector<double>& chol, std::span<const double> z) {
    const std::size_t n = z.size();
    std::vector<double> y(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = z[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= chol[k * n + i] * y[k];
        y[i] = s / chol[i * n + i];
    }
    return y;
}

}  // namespace

LikelihoodEstimate log_likelihood_is(const FitResult& fit, const TrialDataset& data,
                                     const StatModelSpec& spec, int n_samples,
                                     std::uint64_t seed) {
    if (n_samples < 1) throw_input("log_likelihood_is: n_samples must be >= 1");
    const Problem prob(data, spec);
    const std::size_t n_re = prob.n_re();

    // Final population values aligned with the fitted layout.
    std::vector<double> mu(n_re), omega(n_re), c(prob.noiv_indices().size());
    for (std::size_t i = 0; i < n_re; ++i) {
        const auto& d = fit.population_for(spec.fitted[prob.re_indices()[i]].name);
        mu[i] = d.location;
        omega[i] = d.spread;
        if (!(omega[i] > 0)) throw_input("log_likelihood_is: zero spread for random effect");
    }
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = fit.population_for(spec.fitted[prob.noiv_indices()[i]].name).location;
    const double err = fit.error_param;

    LikelihoodEstimate est;
    double total_logp = 0.0;
    double total_var = 0.0;

    for (const auto& ind : prob.individuals()) {
        if (n_re == 0) {
            // No random effects: the marginal likelihood is the residual
            // density itself, no integration.
            const auto f = prob.try_predict(ind, prob.fitted_vec({}, c));
            if (!f)
                throw_numerical("log_likelihood_is: prediction failed for individual " +
                                std::to_string(ind.id));
            total_logp += prob.obs_loglik(ind, *f, err);
            continue;
        }

        auto prior = [&](std::span<const double> eta) {
            double lp = 0.0;
            for (std::size_t k = 0; k < n_re; ++k) lp += log_norm_pdf(eta[k], mu[k], omega[k]);
            return lp;
        };
        auto obs_ll = [&](std::span<const double> eta) {
            const auto f = prob.try_predict(ind, prob.fitted_vec(eta, c));
            if (!f) return kNegInf;
            return prob.obs_loglik(ind, *f, err);
        };
        auto neg_joint = [&](std::span<const double> eta) {
            const double ll = obs_ll(eta) + prior(eta);
            return std::isfinite(ll) ? -ll : 1e100;
        };

        // Conditional mode, started from the fit's individual estimate.
        std::vector<double> start(n_re);
        auto est_it = fit.individual_estimates.find(ind.id);
        for (std::size_t k = 0; k < n_re; ++k) {
            const auto& d = spec.fitted[prob.re_indices()[k]];
            start[k] = est_it != fit.individual_estimates.end() && est_it->second.count(d.name)
                           ? apply_transform(d.transform, est_it->second.at(d.name))
                           : mu[k];
        }
        if (!(neg_joint(start) < 1e99)) start = mu;
        std::vector<double> step(n_re);
        for (std::size_t k = 0; k < n_re; ++k) step[k] = std::max(0.3 * omega[k], 1e-3);
        const auto mode_res =
            nelder_mead(neg_joint, start, step, static_cast<int>(200 + 200 * n_re), 1e-11, 1e-9);
        const std::vector<double>& mode = mode_res.x;

        const Curvature curv = estimate_curvature(neg_joint, mode);
        const bool use_prior = !curv.ok;
        if (use_prior) est.prior_fallback = true;

        Rng rng = Rng::substream(seed, {0x6973ULL /*is*/, static_cast<std::uint64_t>(ind.id)});
        std::vector<double> logw(static_cast<std::size_t>(n_samples), kNegInf);
        std::vector<double> z(n_re), eta(n_re);
        const double half_log_2pi = 0.5 * std::log(2.0 * M_PI);

        for (int s = 0; s < n_samples; ++s) {
            double logq;
            if (use_prior) {
                for (std::size_t k = 0; k < n_re; ++k) eta[k] = rng.normal(mu[k], omega[k]);
                logq = prior(eta);
            } else {
                for (std::size_t k = 0; k < n_re; ++k) z[k] = rng.normal();
                const auto y = upper_solve(curv.chol, z);
                for (std::size_t k = 0; k < n_re; ++k)
                    eta[k] = mode[k] + std::sqrt(kProposalInflation) * y[k];
                std::vector<double> e(n_re);
                for (std::size_t k = 0; k < n_re; ++k) e[k] = eta[k] - mode[k];
                logq = -0.5 * quad_form(curv.chol, e) / kProposalInflation +
                       0.5 * curv.log_det_h -
                       static_cast<double>(n_re) * (half_log_2pi + 0.5 * std::log(kProposalInflation));
            }
            const double ll = obs_ll(eta);
            if (ll == kNegInf) continue;  // zero weight
            logw[static_cast<std::size_t>(s)] = ll + prior(eta) - logq;
        }

        const double lse = logsumexp(logw);
        const double logp = lse - std::log(static_cast<double>(n_samples));
        total_logp += logp;

        // Delta-method standard error of log of the weight mean.
        if (std::isfinite(lse)) {
            double wmax = kNegInf;
            for (double v : logw) wmax = std::max(wmax, v);
            double s1 = 0.0, s2 = 0.0;
            for (double v : logw) {
                const double a = std::exp(v - wmax);
                s1 += a;
                s2 += a * a;
            }
            const double n = static_cast<double>(n_samples);
            const double m = s1 / n;
            const double var_a = std::max(0.0, s2 / n - m * m);
            total_var += var_a / (n * m * m);
        }
    }

    est.minus2ll = -2.0 * total_logp;
    est.mc_se = 2.0 * std::sqrt(total_var);
    return est;
}

}  // namespace hierid
