#include <algorithm>
#include <cmath>
#include <set>

#include "hierid/errors.hpp"
#include "hierid/math.hpp"
#include "hierid/rng.hpp"
#include "nlme_internal.hpp"

namespace hierid {

void StatModelSpec::validate() const {
    if (!structural) throw_input("StatModelSpec: missing structural model");
    std::set<std::string> covered;
    for (const auto& d : fitted) {
        d.validate();
        if (!covered.insert(d.name).second)
            throw_input("StatModelSpec: parameter '" + d.name + "' fitted twice");
    }
    for (const auto& [name, _] : fixed_constants)
        if (!covered.insert(name).second)
            throw_input("StatModelSpec: parameter '" + name + "' both fitted and fixed");
    for (const auto& name : structural->param_names())
        if (!covered.count(name))
            throw_input("StatModelSpec: structural parameter '" + name +
                        "' neither fitted nor fixed");
    if (fitted.empty()) throw_input("StatModelSpec: nothing to estimate");
    if (!(error_model.init > 0)) throw_input("StatModelSpec: error parameter init must be > 0");
}

void SaemConfig::validate() const {
    if (n_burnin_iters < 1 || n_smoothing_iters < 1 || mcmc_steps_per_iter < 1)
        throw_input("SaemConfig: iteration counts must be >= 1");
    if (!(step_size_exponent > 0.5 && step_size_exponent <= 1.0))
        throw_input("SaemConfig: step_size_exponent must lie in (0.5, 1]");
    if (n_is_samples < 1) throw_input("SaemConfig: n_is_samples must be >= 1");
}

const PopulationDistribution& FitResult::population_for(const std::string& name) const {
    for (const auto& d : population)
        if (d.name == name) return d;
    throw_input("FitResult: no population entry for '" + name + "'");
}

double aic(double minus2ll, int n_estimated) {
    if (n_estimated < 1) throw_input("aic: n_estimated must be >= 1");
    return minus2ll + 2.0 * n_estimated;
}

std::vector<NamedValues> sample_initial_estimates(const NamedBounds& bounds,
                                                  const std::vector<PopulationDistribution>& fitted,
                                                  int n, std::uint64_t seed) {
    if (n < 1) throw_input("sample_initial_estimates: n must be >= 1");
    for (const auto& d : fitted) {
        auto it = bounds.find(d.name);
        if (it == bounds.end())
            throw_input("sample_initial_estimates: no bounds for '" + d.name + "'");
        const auto [lo, hi] = it->second;
        if (!(lo <= hi)) throw_input("sample_initial_estimates: inverted interval for '" + d.name + "'");
        if (d.transform != Transform::Identity && !(lo > 0))
            throw_input("sample_initial_estimates: bounds for log-scale '" + d.name +
                        "' must be positive");
    }
    std::vector<NamedValues> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rng = Rng::substream(seed, {0x696e6974ULL /*init*/, static_cast<std::uint64_t>(i)});
        NamedValues values;
        for (const auto& d : fitted) {
            const auto [lo, hi] = bounds.at(d.name);
            if (d.transform == Transform::Identity) {
                values[d.name] = rng.uniform(lo, hi);
            } else {
                const double t = rng.uniform(apply_transform(d.transform, lo),
                                             apply_transform(d.transform, hi));
                values[d.name] = invert_transform(d.transform, t);
            }
        }
        out.push_back(std::move(values));
    }
    return out;
}

FitDistributions fit_distributions(const FitResult& fit, int fit_index) {
    FitDistributions out;
    out.fit_index = fit_index;
    out.minus2ll = fit.minus2ll;
    for (const auto& d : fit.population) {
        if (!(d.spread > 0)) continue;  // no individual variability, nothing to compare
        SampleSet samples;
        samples.parameter = d.name;
        for (const auto& [id, est] : fit.individual_estimates)
            samples.values.push_back(apply_transform(d.transform, est.at(d.name)));
        out.samples[d.name] = std::move(samples);
        out.densities[d.name] = DensitySpec{d.name, d.transform, d.location, d.spread};
    }
    return out;
}

namespace detail {

Problem::Problem(const TrialDataset& data, const StatModelSpec& spec) : spec_(&spec) {
    spec.validate();
    if (data.rows.empty()) throw_input("empty dataset");

    for (int id : data.individual_ids()) {
        IndividualData ind;
        ind.id = id;
        for (const auto& row : data.rows)
            if (row.id == id) {
                ind.times.push_back(row.time);
                ind.y.push_back(row.y);
            }
        // Keep observations in time order regardless of file order.
        std::vector<std::size_t> order(ind.times.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return ind.times[a] < ind.times[b]; });
        IndividualData sorted = ind;
        for (std::size_t i = 0; i < order.size(); ++i) {
            sorted.times[i] = ind.times[order[i]];
            sorted.y[i] = ind.y[order[i]];
        }
        if (auto it = data.doses.find(id); it != data.doses.end()) sorted.doses = it->second;
        n_obs_total_ += sorted.times.size();
        individuals_.push_back(std::move(sorted));
    }

    for (std::size_t k = 0; k < spec.fitted.size(); ++k)
        (spec.fitted[k].spread > 0 ? re_ : noiv_).push_back(k);

    for (const auto& name : spec.structural->param_names()) {
        Source src;
        for (std::size_t k = 0; k < spec.fitted.size(); ++k)
            if (spec.fitted[k].name == name) src.fitted_idx = static_cast<int>(k);
        if (src.fitted_idx < 0) src.fixed_value = spec.fixed_constants.at(name);
        layout_.push_back(src);
    }
}

std::vector<double> Problem::fitted_vec(std::span<const double> eta_re,
                                        std::span<const double> c_noiv) const {
    std::vector<double> out(n_fitted());
    for (std::size_t i = 0; i < re_.size(); ++i) out[re_[i]] = eta_re[i];
    for (std::size_t i = 0; i < noiv_.size(); ++i) out[noiv_[i]] = c_noiv[i];
    return out;
}

std::vector<double> Problem::full_params(std::span<const double> fitted_transformed) const {
    std::vector<double> out(layout_.size());
    for (std::size_t i = 0; i < layout_.size(); ++i) {
        const auto& src = layout_[i];
        out[i] = src.fitted_idx >= 0
                     ? invert_transform(spec_->fitted[static_cast<std::size_t>(src.fitted_idx)].transform,
                                        fitted_transformed[static_cast<std::size_t>(src.fitted_idx)])
                     : src.fixed_value;
    }
    return out;
}

std::optional<std::vector<double>> Problem::try_predict(
    const IndividualData& ind, std::span<const double> fitted_transformed) const {
    try {
        const auto params = full_params(fitted_transformed);
        auto f = spec_->structural->predict(params, ind.times, ind.doses);
        for (double v : f)
            if (!std::isfinite(v)) return std::nullopt;
        return f;
    } catch (const Error&) {
        return std::nullopt;
    }
}

double Problem::obs_loglik(const IndividualData& ind, std::span<const double> f,
                           double err) const {
    if (f.size() != ind.y.size()) return -std::numeric_limits<double>::infinity();
    double ll = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        double g = err;
        if (spec_->error_model.kind == ErrorModel::Kind::Proportional) {
            if (!(f[j] > 0)) return -std::numeric_limits<double>::infinity();
            g = err * f[j];
        }
        ll += log_norm_pdf(ind.y[j], f[j], g);
    }
    return ll;
}

bool cholesky(std::vector<double>& a, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0)) return false;
        const double l = std::sqrt(d);
        a[j * n + j] = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / l;
        }
        for (std::size_t k = j + 1; k < n; ++k) a[j * n + k] = 0.0;
    }
    return true;
}

}  // namespace detail

}  // namespace hierid
