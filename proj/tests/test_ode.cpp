#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hierid/errors.hpp"
#include "hierid/models.hpp"
#include "hierid/ode.hpp"
#include "hierid/rng.hpp"

using namespace hierid;

namespace {

// dx/dt = -x, closed form x(t) = x0 * exp(-t).
class DecayModel final : public Model {
public:
    std::string_view name() const override { return "decay"; }
    std::size_t state_dim() const override { return 1; }
    const std::vector<std::string>& param_names() const override {
        static const std::vector<std::string> names = {"rate"};
        return names;
    }
    void rhs(double, std::span<const double> y, std::span<const double> p,
             std::span<double> dydt) const override {
        dydt[0] = -p[0] * y[0];
    }
    std::vector<double> initial_state(std::span<const double>) const override { return {1.0}; }
    double observe(double, std::span<const double> y) const override { return y[0]; }
};

// dx/dt = x^2 blows up at t = 1/x0.
class BlowupModel final : public Model {
public:
    std::string_view name() const override { return "blowup"; }
    std::size_t state_dim() const override { return 1; }
    const std::vector<std::string>& param_names() const override {
        static const std::vector<std::string> names = {};
        return names;
    }
    void rhs(double, std::span<const double> y, std::span<const double>,
             std::span<double> dydt) const override {
        dydt[0] = y[0] * y[0];
    }
    std::vector<double> initial_state(std::span<const double>) const override { return {1.0}; }
    double observe(double, std::span<const double> y) const override { return y[0]; }
};

class NanModel final : public Model {
public:
    std::string_view name() const override { return "nan_model"; }
    std::size_t state_dim() const override { return 1; }
    const std::vector<std::string>& param_names() const override {
        static const std::vector<std::string> names = {};
        return names;
    }
    void rhs(double t, std::span<const double>, std::span<const double>,
             std::span<double> dydt) const override {
        dydt[0] = t > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    }
    std::vector<double> initial_state(std::span<const double>) const override { return {0.0}; }
    double observe(double, std::span<const double> y) const override { return y[0]; }
};

FribergParams table1_means() {
    return {0.87, 1.08, 1.15, 0.16, 5.03, 0.14, 1.0};
}

std::vector<double> friberg_full_params(const FribergParams& fp, const ZalypsisPkParams& pk) {
    return {fp.k_prol, fp.k_tr, fp.k_circ, fp.gamma, fp.N0,   fp.EC50,  fp.Emax, pk.k_fp,
            pk.k_pf,   pk.k_sl1p, pk.k_psl1, pk.k_sl2f, pk.k_psl2, pk.k_fsl2, pk.k_cl};
}

}  // namespace

TEST_CASE("exponential decay hits the analytic solution") {
    DecayModel model;
    const std::vector<double> params = {1.0};
    const std::vector<double> init = {1.0};
    const std::vector<double> obs = {1.0};
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-8;
    cfg.abs_tol = 1e-10;
    const auto traj = integrate(model, params, init, 0.0, 1.0, {}, obs, cfg);
    REQUIRE(traj.times.size() == 1);
    CHECK(traj.observations[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("empty observation grid produces an empty trajectory") {
    DecayModel model;
    const std::vector<double> params = {1.0};
    const std::vector<double> init = {1.0};
    const auto traj = integrate(model, params, init, 0.0, 1.0, {}, {}, {});
    CHECK(traj.times.empty());
    CHECK(traj.states.empty());
    CHECK(traj.observations.empty());
}

TEST_CASE("apply_dose adds to the target component only") {
    {
        const std::vector<double> state = {0, 0, 0, 0};
        const auto out = apply_dose(state, {0.0, 80.0, 0});
        CHECK(out == std::vector<double>{80, 0, 0, 0});
    }
    {
        const std::vector<double> state = {1, 2};
        const auto out = apply_dose(state, {0.0, 0.5, 1});
        CHECK(out == std::vector<double>{1, 2.5});
    }
    {
        const std::vector<double> state = {3, 4};
        const auto out = apply_dose(state, {0.0, 0.0, 0});
        CHECK(out == state);
    }
    const std::vector<double> state = {1.0};
    CHECK_THROWS_AS((void)apply_dose(state, {0.0, 1.0, 3}), Error);
}

TEST_CASE("identical inputs give bit-identical trajectories") {
    DecayModel model;
    const std::vector<double> params = {0.7};
    const std::vector<double> init = {2.0};
    std::vector<double> obs;
    for (int i = 1; i <= 20; ++i) obs.push_back(i * 0.35);
    const std::vector<DoseEvent> doses = {{1.0, 0.5, 0}, {3.0, 0.25, 0}};
    const auto a = integrate(model, params, init, 0.0, 7.0, doses, obs, {});
    const auto b = integrate(model, params, init, 0.0, 7.0, doses, obs, {});
    REQUIRE(a.observations.size() == b.observations.size());
    for (std::size_t i = 0; i < a.observations.size(); ++i)
        CHECK(a.observations[i] == b.observations[i]);  // exact equality
}

TEST_CASE("halving the tolerance changes the endpoint by less than the looser tolerance") {
    DecayModel model;
    const std::vector<double> params = {1.0};
    const std::vector<double> init = {1.0};
    const std::vector<double> obs = {5.0};
    IntegratorConfig loose{1e-6, 1e-8};
    IntegratorConfig tight{5e-7, 5e-9};
    const double x_loose = integrate(model, params, init, 0, 5, {}, obs, loose).observations[0];
    const double x_tight = integrate(model, params, init, 0, 5, {}, obs, tight).observations[0];
    CHECK(std::abs(x_loose - x_tight) < 1e-6);
    CHECK(x_loose == doctest::Approx(std::exp(-5.0)).epsilon(1e-5));
}

TEST_CASE("dose superposition on the linear PK system") {
    ZalypsisPkModel model;
    const std::vector<double> params = {0.45, 0.35, 0.12, 0.2, 0.05, 0.15, 0.1, 0.7};
    const std::vector<double> init = {0, 0, 0, 0};
    std::vector<double> obs;
    for (int i = 1; i <= 30; ++i) obs.push_back(i * 1.0);
    IntegratorConfig cfg{1e-8, 1e-10};

    const std::vector<DoseEvent> d1 = {{0.0, 10.0, 0}};
    const std::vector<DoseEvent> d2 = {{9.0, 4.0, 0}};
    const std::vector<DoseEvent> both = {{0.0, 10.0, 0}, {9.0, 4.0, 0}};

    const auto t1 = integrate(model, params, init, 0, 30, d1, obs, cfg);
    const auto t2 = integrate(model, params, init, 0, 30, d2, obs, cfg);
    const auto tb = integrate(model, params, init, 0, 30, both, obs, cfg);

    for (std::size_t i = 0; i < obs.size(); ++i) {
        for (std::size_t s = 0; s < 4; ++s) {
            const double sum = t1.states[i][s] + t2.states[i][s];
            CHECK(std::abs(tb.states[i][s] - sum) <= 10 * cfg.rel_tol * (std::abs(sum) + 1.0));
        }
    }
}

TEST_CASE("Friberg equilibrium is preserved over 65 days without drug") {
    FribergZalypsisModel model;
    const ZalypsisPkParams pk{0.45, 0.35, 0.12, 0.2, 0.05, 0.15, 0.1, 0.7};
    const auto params = friberg_full_params(table1_means(), pk);
    const auto init = model.initial_state(params);
    std::vector<double> obs;
    for (int d = 0; d <= 65; ++d) obs.push_back(d);
    IntegratorConfig cfg{1e-8, 1e-10};
    // No doses: Cp stays 0, so E_drug is identically 0.
    const auto traj = integrate(model, params, init, 0, 65, {}, obs, cfg);
    for (const auto& state : traj.states)
        for (std::size_t s = 4; s < 9; ++s)
            CHECK(std::abs(state[s] - init[s]) <= 1e-6 * std::abs(init[s]));
}

TEST_CASE("doses are applied exactly once and observations at dose times are pre-dose") {
    DecayModel model;
    const std::vector<double> params = {0.0};  // frozen dynamics isolate the jumps
    const std::vector<double> init = {1.0};
    const std::vector<double> obs = {0.0, 1.0, 2.0};
    const std::vector<DoseEvent> doses = {{0.0, 5.0, 0}, {1.0, 3.0, 0}};
    const auto traj = integrate(model, params, init, 0, 2, doses, obs, {});
    CHECK(traj.observations[0] == 1.0);   // pre-dose at t=0
    CHECK(traj.observations[1] == 6.0);   // 1 + 5 carried, pre-dose at t=1
    CHECK(traj.observations[2] == 9.0);   // 1 + 5 + 3
}

TEST_CASE("failure modes raise numerical errors that name the failure time") {
    BlowupModel model;
    const std::vector<double> obs = {2.0};
    const std::vector<double> init = {1.0};
    CHECK_THROWS_AS((void)integrate(model, {}, init, 0, 2, {}, obs, {}), Error);

    NanModel nan_model;
    const std::vector<double> init0 = {0.0};
    try {
        (void)integrate(nan_model, {}, init0, 0, 2, {}, obs, {});
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == Errc::Numerical);
        CHECK(std::string(e.what()).find("nan_model") != std::string::npos);
    }
}

TEST_CASE("input validation") {
    DecayModel model;
    const std::vector<double> params = {1.0};
    const std::vector<double> init = {1.0};
    const std::vector<double> bad_obs = {2.0, 1.0};
    CHECK_THROWS_AS((void)integrate(model, params, init, 0, 3, {}, bad_obs, {}), Error);
    const std::vector<double> outside = {5.0};
    CHECK_THROWS_AS((void)integrate(model, params, init, 0, 3, {}, outside, {}), Error);
    const std::vector<double> obs = {1.0};
    const std::vector<DoseEvent> unsorted = {{2.0, 1.0, 0}, {1.0, 1.0, 0}};
    CHECK_THROWS_AS((void)integrate(model, params, init, 0, 3, unsorted, obs, {}), Error);
}
