#pragma once

#include <map>
#include <memory>
#include <string>

#include "hierid/models.hpp"
#include "hierid/ode.hpp"

namespace hierid {

using NamedValues = std::map<std::string, double>;

// Maps a full parameter vector to predicted observations at requested times.
// This is the only surface the estimation layer sees, so structural models
// backed by an integrator and closed-form ones are interchangeable.
class Structural {
public:
    virtual ~Structural() = default;
    virtual const std::vector<std::string>& param_names() const = 0;
    virtual std::vector<double> predict(std::span<const double> params,
                                        std::span<const double> times,
                                        std::span<const DoseEvent> doses) const = 0;
    virtual int dose_target() const { return 0; }
};

class OdeStructural final : public Structural {
public:
    OdeStructural(std::shared_ptr<const Model> model, IntegratorConfig cfg, double t0 = 0.0)
        : model_(std::move(model)), cfg_(cfg), t0_(t0) {}

    const std::vector<std::string>& param_names() const override { return model_->param_names(); }
    std::vector<double> predict(std::span<const double> params, std::span<const double> times,
                                std::span<const DoseEvent> doses) const override;
    int dose_target() const override { return model_->dose_target(); }

    const Model& model() const { return *model_; }
    const IntegratorConfig& integrator_config() const { return cfg_; }

private:
    std::shared_ptr<const Model> model_;
    IntegratorConfig cfg_;
    double t0_;
};

// Exponential growth observed as log(x); parameters: a, b, x0.
class ExpGrowthStructural final : public Structural {
public:
    const std::vector<std::string>& param_names() const override;
    std::vector<double> predict(std::span<const double> params, std::span<const double> times,
                                std::span<const DoseEvent> doses) const override;
};

// Builds the full parameter vector for `s` by name, taking each value from
// `primary` when present and from `fallback` otherwise.  Missing names are an
// input error.
std::vector<double> assemble_params(const Structural& s, const NamedValues& primary,
                                    const NamedValues& fallback);

}  // namespace hierid
