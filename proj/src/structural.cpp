#include "hierid/structural.hpp"

#include <algorithm>
#include <cmath>

#include "hierid/errors.hpp"

namespace hierid {

std::vector<double> OdeStructural::predict(std::span<const double> params,
                                           std::span<const double> times,
                                           std::span<const DoseEvent> doses) const {
    if (times.empty()) return {};
    double t_end = times.back();
    for (const auto& d : doses) t_end = std::max(t_end, d.time);
    const auto init = model_->initial_state(params);
    const Trajectory traj = integrate(*model_, params, init, t0_, t_end, doses, times, cfg_);
    return traj.observations;
}

const std::vector<std::string>& ExpGrowthStructural::param_names() const {
    static const std::vector<std::string> names = {"a", "b", "x0"};
    return names;
}

std::vector<double> ExpGrowthStructural::predict(std::span<const double> params,
                                                 std::span<const double> times,
                                                 std::span<const DoseEvent>) const {
    const ExpGrowthParams p{params[0], params[1], params[2]};
    std::vector<double> out(times.size());
    const double logx0 = std::log(p.x0);
    for (std::size_t i = 0; i < times.size(); ++i) out[i] = logx0 + (p.a + p.b) * times[i];
    return out;
}

std::vector<double> assemble_params(const Structural& s, const NamedValues& primary,
                                    const NamedValues& fallback) {
    const auto& names = s.param_names();
    std::vector<double> out(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (auto it = primary.find(names[i]); it != primary.end()) {
            out[i] = it->second;
        } else if (auto jt = fallback.find(names[i]); jt != fallback.end()) {
            out[i] = jt->second;
        } else {
            throw_input("assemble_params: no value for parameter '" + names[i] + "'");
        }
    }
    return out;
}

}  // namespace hierid
