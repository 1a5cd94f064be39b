#include "hierid/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hierid/errors.hpp"

namespace hierid {

std::vector<double> apply_dose(std::span<const double> state, const DoseEvent& dose) {
    if (dose.target < 0 || static_cast<std::size_t>(dose.target) >= state.size())
        throw_input("apply_dose: target compartment " + std::to_string(dose.target) +
                    " out of range for state dimension " + std::to_string(state.size()));
    std::vector<double> out(state.begin(), state.end());
    out[static_cast<std::size_t>(dose.target)] += dose.amount;
    return out;
}

namespace {

// Dormand-Prince 5(4) coefficients (Hairer & Wanner DOPRI5).
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// y5 - y4 error weights (uses the FSAL 7th stage).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

class Stepper {
public:
    Stepper(const Model& model, std::span<const double> params, const IntegratorConfig& cfg)
        : model_(model), params_(params), cfg_(cfg), n_(model.state_dim()) {
        for (auto& k : k_) k.resize(n_);
        ytmp_.resize(n_);
    }

    void eval_rhs(double t, std::span<const double> y, std::span<double> dydt) {
        model_.rhs(t, y, params_, dydt);
        for (double v : dydt)
            if (std::isnan(v))
                throw Error(Errc::Numerical,
                            "model '" + std::string(model_.name()) +
                                "' produced NaN derivative at t=" + std::to_string(t));
    }

    // Advance y from t to exactly t_stop.  k_[0] must hold rhs(t, y) on entry
    // (FSAL), and holds rhs(t_stop, y) on exit.
    void advance(std::vector<double>& y, double& t, double t_stop) {
        while (t < t_stop) {
            if (steps_ >= cfg_.max_steps)
                throw Error(Errc::Numerical,
                            "integration exceeded max_steps at t=" + std::to_string(t));
            const bool clipped = suggested_h_ >= t_stop - t;
            const double h = clipped ? t_stop - t : suggested_h_;
            const double err = try_step(y, t, h);
            ++steps_;
            if (err <= 1.0) {
                t = clipped ? t_stop : t + h;
                y.swap(ynew_);
                k_[0].swap(k_[6]);  // FSAL
                const double fac =
                    std::min(fac_max_, std::max(fac_min_, safety_ * std::pow(err, -alpha_) *
                                                              std::pow(err_old_, beta_)));
                err_old_ = std::max(err, 1e-4);
                // A step clipped to an output point must not shrink the
                // controller's natural step suggestion.
                suggested_h_ = clipped ? std::max(suggested_h_, h * fac) : h * fac;
                fac_max_ = 10.0;
            } else {
                // Reject and retry with a smaller step; err may be NaN on
                // overflow, which lands here as well.
                const double shrink =
                    std::isfinite(err) ? std::max(fac_min_, safety_ * std::pow(err, -alpha_))
                                       : fac_min_;
                suggested_h_ = h * shrink;
                fac_max_ = 1.0;  // no growth right after a rejection
                if (suggested_h_ < cfg_.min_step)
                    throw Error(Errc::Numerical,
                                "step size underflow at t=" + std::to_string(t));
            }
        }
    }

    void prime(double t, std::span<const double> y) { eval_rhs(t, y, k_[0]); }

    void reset_after_jump(double t, std::span<const double> y) {
        eval_rhs(t, y, k_[0]);
        // Keep the step suggestion: dynamics scale rarely changes at a bolus.
    }

    void set_initial_step(double span) { suggested_h_ = std::max(cfg_.min_step, 1e-3 * span); }

private:
    // One RK step of size h from (t, y); fills ynew_ and k_[6]=rhs(t+h, ynew_).
    // Returns the scaled error norm.
    double try_step(const std::vector<double>& y, double t, double h) {
        auto stage = [&](std::span<double> out, std::initializer_list<std::pair<double, int>> terms) {
            for (std::size_t i = 0; i < n_; ++i) {
                double acc = 0.0;
                for (auto [coef, idx] : terms) acc += coef * k_[static_cast<std::size_t>(idx)][i];
                out[i] = y[i] + h * acc;
            }
        };
        stage(ytmp_, {{a21, 0}});
        eval_rhs(t + c2 * h, ytmp_, k_[1]);
        stage(ytmp_, {{a31, 0}, {a32, 1}});
        eval_rhs(t + c3 * h, ytmp_, k_[2]);
        stage(ytmp_, {{a41, 0}, {a42, 1}, {a43, 2}});
        eval_rhs(t + c4 * h, ytmp_, k_[3]);
        stage(ytmp_, {{a51, 0}, {a52, 1}, {a53, 2}, {a54, 3}});
        eval_rhs(t + c5 * h, ytmp_, k_[4]);
        stage(ytmp_, {{a61, 0}, {a62, 1}, {a63, 2}, {a64, 3}, {a65, 4}});
        eval_rhs(t + h, ytmp_, k_[5]);

        ynew_.resize(n_);
        stage(ynew_, {{b1, 0}, {b3, 2}, {b4, 3}, {b5, 4}, {b6, 5}});
        eval_rhs(t + h, ynew_, k_[6]);

        double err = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double e = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] +
                                  e6 * k_[5][i] + e7 * k_[6][i]);
            const double sc =
                cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
            err += (e / sc) * (e / sc);
        }
        return std::sqrt(err / static_cast<double>(n_));
    }

    const Model& model_;
    std::span<const double> params_;
    const IntegratorConfig& cfg_;
    std::size_t n_;
    std::vector<double> k_[7];
    std::vector<double> ytmp_, ynew_;
    double suggested_h_ = 1e-3;
    double err_old_ = 1e-4;
    long steps_ = 0;
    // PI controller constants (DOPRI5 defaults).
    static constexpr double safety_ = 0.9, alpha_ = 0.7 / 5.0, beta_ = 0.04;
    static constexpr double fac_min_ = 0.2;
    double fac_max_ = 10.0;
};

}  // namespace

Trajectory integrate(const Model& model, std::span<const double> params,
                     std::span<const double> init, double t0, double t1,
                     std::span<const DoseEvent> doses, std::span<const double> obs_times,
                     const IntegratorConfig& cfg) {
    Trajectory traj;
    if (obs_times.empty()) return traj;

    if (!(cfg.rel_tol > 0) || !(cfg.abs_tol > 0) || cfg.max_steps <= 0)
        throw_input("integrate: tolerances and max_steps must be positive");
    if (init.size() != model.state_dim())
        throw_input("integrate: initial state dimension mismatch");
    for (double v : init)
        if (!std::isfinite(v)) throw_input("integrate: non-finite initial state");
    for (std::size_t i = 0; i + 1 < obs_times.size(); ++i)
        if (!(obs_times[i] < obs_times[i + 1]))
            throw_input("integrate: obs_times must be strictly increasing");
    if (obs_times.front() < t0 || obs_times.back() > t1)
        throw_input("integrate: obs_times outside the integration span");
    for (std::size_t i = 0; i < doses.size(); ++i) {
        if (doses[i].time < t0 || doses[i].time > t1)
            throw_input("integrate: dose time outside the integration span");
        if (i > 0 && doses[i].time < doses[i - 1].time)
            throw_input("integrate: doses must be sorted by time");
        if (doses[i].amount < 0) throw_input("integrate: negative dose amount");
    }

    std::vector<double> y(init.begin(), init.end());
    Stepper stepper(model, params, cfg);
    stepper.set_initial_step(t1 - t0);

    double t = t0;
    std::size_t next_obs = 0;
    std::size_t next_dose = 0;
    const std::size_t n_obs = obs_times.size();

    auto record = [&](double time) {
        traj.times.push_back(time);
        traj.states.push_back(y);
        traj.observations.push_back(model.observe(time, y));
    };

    bool primed = false;
    while (next_obs < n_obs || next_dose < doses.size()) {
        // Emit anything due at the current time: observations first (pre-dose),
        // then all dose jumps at this instant.
        while (next_obs < n_obs && obs_times[next_obs] <= t) {
            record(obs_times[next_obs]);
            ++next_obs;
        }
        bool jumped = false;
        while (next_dose < doses.size() && doses[next_dose].time <= t) {
            y = apply_dose(y, doses[next_dose]);
            ++next_dose;
            jumped = true;
        }
        if (next_obs >= n_obs && next_dose >= doses.size()) break;

        const double t_obs = next_obs < n_obs ? obs_times[next_obs]
                                              : std::numeric_limits<double>::infinity();
        const double t_dose = next_dose < doses.size()
                                  ? doses[next_dose].time
                                  : std::numeric_limits<double>::infinity();
        const double t_stop = std::min(t_obs, t_dose);

        if (!primed || jumped) {
            stepper.prime(t, y);
            primed = true;
        }
        stepper.advance(y, t, t_stop);
    }

    return traj;
}

}  // namespace hierid
