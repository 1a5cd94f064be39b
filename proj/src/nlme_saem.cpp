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

// Per-individual MCMC state on the transformed scale.
struct Chain {
    const IndividualData* data = nullptr;
    Rng rng{0};
    std::vector<double> eta;      // random-effect components
    std::vector<double> f;        // cached predictions for eta
    double ll = kNegInf;          // cached residual loglik at (eta, c, err)
    std::vector<double> cw_scale; // component-wise random-walk scales
    double full_scale = 0.5;
};

struct SweepCounters {
    long proposals = 0;
    long numeric_rejects = 0;
};

double prior_loglik(std::span<const double> eta, std::span<const double> mu,
                    std::span<const double> omega) {
    double lp = 0.0;
    for (std::size_t k = 0; k < eta.size(); ++k) lp += log_norm_pdf(eta[k], mu[k], omega[k]);
    return lp;
}

class SaemRun {
public:
    SaemRun(const Problem& prob, const SaemConfig& cfg, std::span<const double> mu_init,
            std::span<const double> omega_init, std::span<const double> c_init, double err_init)
        : prob_(prob),
          cfg_(cfg),
          mu_(mu_init.begin(), mu_init.end()),
          omega_(omega_init.begin(), omega_init.end()),
          c_(c_init.begin(), c_init.end()),
          err_(err_init) {
        const auto n_re = prob.n_re();
        for (const auto& ind : prob.individuals()) {
            Chain ch;
            ch.data = &ind;
            ch.rng = Rng::substream(cfg.seed, {0x636861696eULL /*chain*/,
                                               static_cast<std::uint64_t>(ind.id)});
            ch.eta = mu_;
            ch.cw_scale.assign(n_re, 0.0);
            for (std::size_t k = 0; k < n_re; ++k) ch.cw_scale[k] = std::max(omega_[k], 0.05);
            ch.full_scale = 0.5;
            chains_.push_back(std::move(ch));
        }
        s1_.assign(n_re, 0.0);
        s2_.assign(n_re, 0.0);
    }

    void iterate() {
        const int total = cfg_.n_burnin_iters + cfg_.n_smoothing_iters;
        for (int iter = 1; iter <= total; ++iter) {
            const double gamma =
                iter <= cfg_.n_burnin_iters
                    ? 1.0
                    : std::pow(static_cast<double>(iter - cfg_.n_burnin_iters),
                               -cfg_.step_size_exponent);

            SweepCounters counters;
            for (auto& ch : chains_) refresh(ch);
            noiv_moved_ = false;
            for (auto& ch : chains_) mh_sweep(ch, iter, counters);
            numeric_rejects_ += counters.numeric_rejects;
            if (counters.numeric_rejects * 2 > counters.proposals)
                throw Error(Errc::Numerical,
                            "saem_fit: over half of the E-step proposals failed numerically at "
                            "iteration " +
                                std::to_string(iter));

            update_statistics(gamma);
            m_step();
            if (!prob_.noiv_indices().empty()) newton_noiv(gamma);
            record_trace(iter);
        }
    }

    // Deterministic ascent from the final chain state to the conditional mode.
    std::vector<double> conditional_mode(const Chain& ch) const {
        const auto n_re = prob_.n_re();
        auto neg_joint = [&](std::span<const double> eta) {
            const auto f = prob_.try_predict(*ch.data, prob_.fitted_vec(eta, c_));
            if (!f) return 1e100;
            const double ll = prob_.obs_loglik(*ch.data, *f, err_) + prior_loglik(eta, mu_, omega_);
            return std::isfinite(ll) ? -ll : 1e100;
        };
        std::vector<double> start = ch.eta;
        if (!(neg_joint(start) < 1e99)) start = mu_;
        std::vector<double> step(n_re);
        for (std::size_t k = 0; k < n_re; ++k) step[k] = std::max(0.3 * omega_[k], 1e-3);
        const auto res = nelder_mead(neg_joint, start, step,
                                     static_cast<int>(200 + 200 * n_re), 1e-11, 1e-9);
        return res.x;
    }

    const std::vector<Chain>& chains() const { return chains_; }
    std::span<const double> mu() const { return mu_; }
    std::span<const double> omega() const { return omega_; }
    std::span<const double> c() const { return c_; }
    double error_param() const { return err_; }
    long numeric_rejects() const { return numeric_rejects_; }
    const std::vector<TraceRow>& trace() const { return trace_; }

private:
    // Re-evaluate the cached prediction and loglik at the current population
    // parameters (c and err move between sweeps).
    void refresh(Chain& ch) {
        if (ch.f.empty() || noiv_moved_) {
            const auto f = prob_.try_predict(*ch.data, prob_.fitted_vec(ch.eta, c_));
            if (f) ch.f = *f;
            else ch.f.clear();
        }
        ch.ll = ch.f.empty() ? kNegInf : prob_.obs_loglik(*ch.data, ch.f, err_);
    }

    void mh_sweep(Chain& ch, int iter, SweepCounters& counters) {
        const auto n_re = prob_.n_re();
        if (n_re == 0) return;
        const double adapt = 0.6 / std::sqrt(static_cast<double>(iter));

        for (int s = 0; s < cfg_.mcmc_steps_per_iter; ++s) {
            switch (s % 3) {
                case 0: {  // independent draw from the current population law
                    std::vector<double> cand(n_re);
                    for (std::size_t k = 0; k < n_re; ++k)
                        cand[k] = ch.rng.normal(mu_[k], omega_[k]);
                    propose(ch, cand, 0.0, counters);
                    break;
                }
                case 1: {  // component-wise random walk
                    for (std::size_t k = 0; k < n_re; ++k) {
                        std::vector<double> cand = ch.eta;
                        cand[k] = ch.eta[k] + ch.cw_scale[k] * ch.rng.normal();
                        const double dprior = log_norm_pdf(cand[k], mu_[k], omega_[k]) -
                                              log_norm_pdf(ch.eta[k], mu_[k], omega_[k]);
                        const bool accepted = propose(ch, cand, dprior, counters);
                        ch.cw_scale[k] =
                            std::clamp(ch.cw_scale[k] * std::exp(adapt * ((accepted ? 1.0 : 0.0) - 0.4)),
                                       1e-8, 1e3);
                    }
                    break;
                }
                case 2: {  // full random walk, scale adapted towards 30% acceptance
                    std::vector<double> cand(n_re);
                    for (std::size_t k = 0; k < n_re; ++k)
                        cand[k] = ch.eta[k] + ch.full_scale * omega_[k] * ch.rng.normal();
                    const double dprior = prior_loglik(cand, mu_, omega_) -
                                          prior_loglik(ch.eta, mu_, omega_);
                    const bool accepted = propose(ch, cand, dprior, counters);
                    ch.full_scale =
                        std::clamp(ch.full_scale * std::exp(adapt * ((accepted ? 1.0 : 0.0) - 0.3)),
                                   1e-8, 1e3);
                    break;
                }
            }
        }
    }

    // Metropolis step: dprior carries the prior part of the log acceptance
    // ratio (zero for the independent kernel where it cancels).
    bool propose(Chain& ch, const std::vector<double>& cand, double dprior,
                 SweepCounters& counters) {
        ++counters.proposals;
        const auto f = prob_.try_predict(*ch.data, prob_.fitted_vec(cand, c_));
        double cand_ll = kNegInf;
        if (f) cand_ll = prob_.obs_loglik(*ch.data, *f, err_);
        else ++counters.numeric_rejects;
        const double log_alpha = cand_ll + dprior - ch.ll;
        const double u = ch.rng.uniform_pos();
        if (std::log(u) < log_alpha) {
            ch.eta = cand;
            ch.f = f ? *f : std::vector<double>{};
            ch.ll = cand_ll;
            return true;
        }
        return false;
    }

    void update_statistics(double gamma) {
        const auto n_re = prob_.n_re();
        const double n_ind = static_cast<double>(chains_.size());
        for (std::size_t k = 0; k < n_re; ++k) {
            double sum = 0.0, sumsq = 0.0;
            for (const auto& ch : chains_) {
                sum += ch.eta[k];
                sumsq += ch.eta[k] * ch.eta[k];
            }
            s1_[k] += gamma * (sum / n_ind - s1_[k]);
            s2_[k] += gamma * (sumsq / n_ind - s2_[k]);
        }
        double res = 0.0;
        for (const auto& ch : chains_) {
            if (ch.f.empty()) continue;
            for (std::size_t j = 0; j < ch.f.size(); ++j) {
                const double fj = ch.f[j];
                const double r = prob_.spec().error_model.kind == ErrorModel::Kind::Proportional
                                     ? (ch.data->y[j] - fj) / fj
                                     : ch.data->y[j] - fj;
                res += r * r;
            }
        }
        s3_ += gamma * (res / static_cast<double>(prob_.n_obs_total()) - s3_);
    }

    void m_step() {
        const auto n_re = prob_.n_re();
        for (std::size_t k = 0; k < n_re; ++k) {
            mu_[k] = s1_[k];
            const double var = s2_[k] - s1_[k] * s1_[k];
            omega_[k] = std::sqrt(std::max(var, cfg_.spread_floor * cfg_.spread_floor));
        }
        err_ = std::max(std::sqrt(std::max(s3_, 0.0)), cfg_.error_floor);
    }

    // One damped Newton step per no-variability parameter on the complete-data
    // log-likelihood, gradients by central differences.
    void newton_noiv(double gamma) {
        const double h = 1e-3;
        for (std::size_t m = 0; m < c_.size(); ++m) {
            double q0 = 0.0, qp = 0.0, qm = 0.0;
            bool any = false;
            for (const auto& ch : chains_) {
                auto eval = [&](double cm) {
                    auto cc = c_;
                    cc[m] = cm;
                    const auto f = prob_.try_predict(*ch.data, prob_.fitted_vec(ch.eta, cc));
                    if (!f) return kNegInf;
                    return prob_.obs_loglik(*ch.data, *f, err_);
                };
                const double v0 = ch.f.empty() ? kNegInf : prob_.obs_loglik(*ch.data, ch.f, err_);
                const double vp = eval(c_[m] + h);
                const double vm = eval(c_[m] - h);
                if (!std::isfinite(v0) || !std::isfinite(vp) || !std::isfinite(vm)) continue;
                q0 += v0;
                qp += vp;
                qm += vm;
                any = true;
            }
            if (!any) continue;
            const double grad = (qp - qm) / (2.0 * h);
            const double hess = (qp - 2.0 * q0 + qm) / (h * h);
            double step = hess < -1e-9 ? -grad / hess : (grad > 0 ? 0.05 : -0.05);
            step = std::clamp(step, -0.25, 0.25);
            c_[m] += gamma * step;
            noiv_moved_ = true;
        }
    }

    void record_trace(int iter) {
        TraceRow row;
        row.iter = iter;
        for (std::size_t k = 0; k < prob_.n_re(); ++k) row.values.push_back(mu_[k]);
        for (std::size_t m = 0; m < c_.size(); ++m) row.values.push_back(c_[m]);
        for (std::size_t k = 0; k < prob_.n_re(); ++k) row.values.push_back(omega_[k]);
        row.values.push_back(err_);
        trace_.push_back(std::move(row));
    }

    const Problem& prob_;
    const SaemConfig& cfg_;
    std::vector<Chain> chains_;
    std::vector<double> mu_, omega_, c_;
    double err_;
    std::vector<double> s1_, s2_;
    double s3_ = 0.0;
    bool noiv_moved_ = true;  // force the first refresh to predict
    long numeric_rejects_ = 0;
    std::vector<TraceRow> trace_;
};

}  // namespace

FitResult saem_fit(const TrialDataset& data, const StatModelSpec& spec,
                   const NamedValues& init_linear, const SaemConfig& cfg) {
    cfg.validate();
    const Problem prob(data, spec);

    // Initial population values on the transformed scale.
    std::vector<double> mu0(prob.n_re()), omega0(prob.n_re()), c0(prob.noiv_indices().size());
    for (std::size_t i = 0; i < prob.re_indices().size(); ++i) {
        const auto& d = spec.fitted[prob.re_indices()[i]];
        auto it = init_linear.find(d.name);
        if (it == init_linear.end())
            throw_input("saem_fit: no initial value for '" + d.name + "'");
        mu0[i] = apply_transform(d.transform, it->second);
        omega0[i] = d.spread;
    }
    for (std::size_t i = 0; i < prob.noiv_indices().size(); ++i) {
        const auto& d = spec.fitted[prob.noiv_indices()[i]];
        auto it = init_linear.find(d.name);
        if (it == init_linear.end())
            throw_input("saem_fit: no initial value for '" + d.name + "'");
        c0[i] = apply_transform(d.transform, it->second);
    }

    SaemRun run(prob, cfg, mu0, omega0, c0, std::max(spec.error_model.init, cfg.error_floor));
    run.iterate();

    FitResult fit;
    fit.seed = cfg.seed;
    fit.error_param = run.error_param();
    fit.numeric_rejects = run.numeric_rejects();
    fit.trace = run.trace();

    for (std::size_t k = 0; k < spec.fitted.size(); ++k) {
        PopulationDistribution d = spec.fitted[k];
        d.spread = 0.0;
        fit.population.push_back(d);
    }
    for (std::size_t i = 0; i < prob.re_indices().size(); ++i) {
        fit.population[prob.re_indices()[i]].location = run.mu()[i];
        fit.population[prob.re_indices()[i]].spread = run.omega()[i];
    }
    for (std::size_t i = 0; i < prob.noiv_indices().size(); ++i)
        fit.population[prob.noiv_indices()[i]].location = run.c()[i];

    for (std::size_t i = 0; i < prob.re_indices().size(); ++i)
        fit.trace_names.push_back("loc_" + spec.fitted[prob.re_indices()[i]].name);
    for (std::size_t i = 0; i < prob.noiv_indices().size(); ++i)
        fit.trace_names.push_back("loc_" + spec.fitted[prob.noiv_indices()[i]].name);
    for (std::size_t i = 0; i < prob.re_indices().size(); ++i)
        fit.trace_names.push_back("omega_" + spec.fitted[prob.re_indices()[i]].name);
    fit.trace_names.push_back("error");

    for (const auto& ch : run.chains()) {
        const auto mode = run.conditional_mode(ch);
        NamedValues est;
        for (std::size_t i = 0; i < prob.re_indices().size(); ++i) {
            const auto& d = spec.fitted[prob.re_indices()[i]];
            est[d.name] = invert_transform(d.transform, mode[i]);
        }
        for (std::size_t i = 0; i < prob.noiv_indices().size(); ++i) {
            const auto& d = spec.fitted[prob.noiv_indices()[i]];
            est[d.name] = invert_transform(d.transform, run.c()[i]);
        }
        fit.individual_estimates[ch.data->id] = std::move(est);
    }

    fit.n_estimated = static_cast<int>(spec.fitted.size() + prob.n_re() + 1);
    return fit;
}

}  // namespace hierid
