#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hierid {

// Instantaneous bolus into one state component.
struct DoseEvent {
    double time = 0.0;
    double amount = 0.0;
    int target = 0;
};

struct IntegratorConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    long max_steps = 2'000'000;
    double min_step = 1e-12;
};

// Solution sampled on the requested observation grid.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<double> observations;
};

// An ODE system together with its observation map and parameter layout.
class Model {
public:
    virtual ~Model() = default;
    virtual std::string_view name() const = 0;
    virtual std::size_t state_dim() const = 0;
    virtual const std::vector<std::string>& param_names() const = 0;
    virtual void rhs(double t, std::span<const double> y, std::span<const double> params,
                     std::span<double> dydt) const = 0;
    virtual std::vector<double> initial_state(std::span<const double> params) const = 0;
    virtual double observe(double t, std::span<const double> y) const = 0;
    // Default compartment for dose events.
    virtual int dose_target() const { return 0; }
};

// Returns a copy of `state` with the dose amount added to the target component.
std::vector<double> apply_dose(std::span<const double> state, const DoseEvent& dose);

// Adaptive Dormand-Prince 5(4) integration over [t0, t1] with output at
// obs_times.  Dose times are hit exactly: the integrator stops at each dose,
// applies the jump, and restarts, so events are never stepped over.  An
// observation that coincides with a dose time is taken pre-dose.
//
// Requires: obs_times strictly increasing within [t0, t1]; doses sorted by
// time and within [t0, t1]; init finite with the model's dimension.
Trajectory integrate(const Model& model, std::span<const double> params,
                     std::span<const double> init, double t0, double t1,
                     std::span<const DoseEvent> doses, std::span<const double> obs_times,
                     const IntegratorConfig& cfg = {});

}  // namespace hierid
