#include "hierid/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "hierid/errors.hpp"

namespace hierid {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw_schema("config: " + path + ": " + msg);
}

const json& field(const json& j, const std::string& path, const std::string& key) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing required field");
    return *it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

double number_or(const json& j, const std::string& path, const std::string& key, double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return number(j.at(key), path + "." + key);
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

std::string text(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

PopulationDistribution parse_distribution(const json& j, const std::string& path,
                                          bool require_location) {
    PopulationDistribution d;
    d.name = text(field(j, path, "name"), path + ".name");
    d.transform = transform_from_string(text(field(j, path, "transform"), path + ".transform"));
    const bool has_loc = j.contains("location");
    const bool has_lin = j.contains("location_linear");
    if (has_loc && has_lin) fail(path, "give either location or location_linear, not both");
    if (has_loc) {
        d.location = number(j.at("location"), path + ".location");
    } else if (has_lin) {
        d.location = apply_transform(d.transform, number(j.at("location_linear"), path));
    } else if (require_location) {
        fail(path, "missing location (or location_linear)");
    }
    d.spread = number_or(j, path, "spread", 0.0);
    d.validate();
    return d;
}

NamedValues parse_named(const json& j, const std::string& path) {
    NamedValues out;
    if (!j.is_object()) fail(path, "expected an object of name: value");
    for (const auto& [key, value] : j.items()) out[key] = number(value, path + "." + key);
    return out;
}

std::vector<double> parse_obs_times(const json& j, const std::string& path) {
    std::vector<double> times;
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i)
            times.push_back(number(j.at(i), path + "[" + std::to_string(i) + "]"));
    } else if (j.is_object()) {
        const double start = number(field(j, path, "start"), path + ".start");
        const double stop = number(field(j, path, "stop"), path + ".stop");
        const double step = number(field(j, path, "step"), path + ".step");
        if (!(step > 0)) fail(path + ".step", "must be positive");
        for (double t = start; t <= stop + 1e-12 * step; t += step) times.push_back(t);
    } else {
        fail(path, "expected an array or {start, stop, step}");
    }
    return times;
}

NoiseModel parse_noise(const json& j, const std::string& path) {
    NoiseModel noise;
    const std::string kind = text(field(j, path, "kind"), path + ".kind");
    if (kind == "none") {
        noise.kind = NoiseKind::None;
    } else if (kind == "additive_log10") {
        noise.kind = NoiseKind::AdditiveLog10;
        noise.value = number(field(j, path, "value"), path + ".value");
    } else if (kind == "proportional") {
        noise.kind = NoiseKind::Proportional;
        noise.value = number(field(j, path, "value"), path + ".value");
    } else {
        fail(path + ".kind", "expected none, additive_log10 or proportional");
    }
    return noise;
}

ErrorModel parse_error_model(const json& j, const std::string& path) {
    ErrorModel em;
    const std::string kind = text(field(j, path, "kind"), path + ".kind");
    if (kind == "proportional") em.kind = ErrorModel::Kind::Proportional;
    else if (kind == "additive_log10") em.kind = ErrorModel::Kind::AdditiveLog10;
    else fail(path + ".kind", "expected proportional or additive_log10");
    em.init = number(field(j, path, "init"), path + ".init");
    if (!(em.init > 0)) fail(path + ".init", "must be positive");
    return em;
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw_io("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw_schema("config " + path.string() + ": " + e.what());
    }

    RunConfig cfg;
    cfg.model = text(field(j, "", "model"), "model");
    if (cfg.model != "friberg" && cfg.model != "tiv" && cfg.model != "expgrowth")
        fail("model", "expected friberg, tiv or expgrowth");
    if (!j.contains("seed")) fail("seed", "missing required field");
    cfg.seed = j.at("seed").get<std::uint64_t>();

    // --- generation ---
    const json& gen = field(j, "", "generation");
    cfg.n_individuals = integer(field(gen, "generation", "n_individuals"),
                                "generation.n_individuals");
    const json& dists = field(gen, "generation", "distributions");
    if (!dists.is_array()) fail("generation.distributions", "expected an array");
    for (std::size_t i = 0; i < dists.size(); ++i)
        cfg.distributions.push_back(parse_distribution(
            dists.at(i), "generation.distributions[" + std::to_string(i) + "]", true));
    if (gen.contains("constants"))
        cfg.gen_constants = parse_named(gen.at("constants"), "generation.constants");

    const json& design = field(gen, "generation", "design");
    cfg.design.horizon = number(field(design, "generation.design", "horizon"),
                                "generation.design.horizon");
    cfg.design.obs_times = parse_obs_times(field(design, "generation.design", "obs_times"),
                                           "generation.design.obs_times");
    cfg.design.noise = parse_noise(field(design, "generation.design", "noise"),
                                   "generation.design.noise");
    cfg.design.n_individuals = cfg.n_individuals;
    if (design.contains("doses")) {
        const json& doses = design.at("doses");
        if (!doses.is_array()) fail("generation.design.doses", "expected an array");
        for (std::size_t i = 0; i < doses.size(); ++i) {
            const std::string p = "generation.design.doses[" + std::to_string(i) + "]";
            DoseEvent d;
            d.time = number(field(doses.at(i), p, "time"), p + ".time");
            d.amount = number(field(doses.at(i), p, "amount"), p + ".amount");
            cfg.design.doses.push_back(d);
        }
    }

    // --- friberg PK block ---
    if (cfg.model == "friberg") {
        const json& pk = field(j, "", "pk");
        const NamedValues rates = parse_named(field(pk, "pk", "params"), "pk.params");
        auto rate = [&](const char* name) {
            auto it = rates.find(name);
            if (it == rates.end()) fail("pk.params." + std::string(name), "missing rate");
            return it->second;
        };
        cfg.pk = ZalypsisPkParams{rate("k_fp"),   rate("k_pf"),   rate("k_sl1p"), rate("k_psl1"),
                                  rate("k_sl2f"), rate("k_psl2"), rate("k_fsl2"), rate("k_cl")};
        cfg.pk.validate();
        cfg.has_pk = true;
        if (pk.contains("pk_literal")) cfg.pk_literal = pk.at("pk_literal").get<bool>();
        if (pk.contains("dose_days")) {
            if (!cfg.design.doses.empty())
                fail("pk.dose_days", "doses already given in generation.design.doses");
            const double amount = number(field(pk, "pk", "dose_amount"), "pk.dose_amount");
            for (std::size_t i = 0; i < pk.at("dose_days").size(); ++i) {
                DoseEvent d;
                d.time = number(pk.at("dose_days").at(i),
                                "pk.dose_days[" + std::to_string(i) + "]");
                d.amount = amount;
                cfg.design.doses.push_back(d);
            }
        }
        // PK rates are fixed structural parameters everywhere.
        for (const auto& [name, value] : rates) {
            cfg.gen_constants[name] = value;
            cfg.fitting.fixed_constants[name] = value;
        }
    }
    cfg.design.validate();

    // --- fitting ---
    if (j.contains("fitting")) {
        const json& fitting = j.at("fitting");
        const json& fitted = field(fitting, "fitting", "fitted");
        if (!fitted.is_array()) fail("fitting.fitted", "expected an array");
        for (std::size_t i = 0; i < fitted.size(); ++i) {
            const std::string p = "fitting.fitted[" + std::to_string(i) + "]";
            PopulationDistribution d;
            d.name = text(field(fitted.at(i), p, "name"), p + ".name");
            d.transform =
                transform_from_string(text(field(fitted.at(i), p, "transform"), p + ".transform"));
            d.spread = number_or(fitted.at(i), p, "init_spread", 0.0);
            cfg.fitting.fitted.push_back(d);
        }
        if (fitting.contains("fixed_constants"))
            for (const auto& [name, value] :
                 parse_named(fitting.at("fixed_constants"), "fitting.fixed_constants"))
                cfg.fitting.fixed_constants[name] = value;
        cfg.fitting.error_model =
            parse_error_model(field(fitting, "fitting", "error_model"), "fitting.error_model");
        const json& bounds = field(fitting, "fitting", "bounds");
        for (const auto& [name, iv] : bounds.items()) {
            const std::string p = "fitting.bounds." + name;
            if (!iv.is_array() || iv.size() != 2) fail(p, "expected [lo, hi]");
            cfg.fitting.bounds[name] = {number(iv.at(0), p), number(iv.at(1), p)};
        }
        if (fitting.contains("n_starts"))
            cfg.fitting.n_starts = integer(fitting.at("n_starts"), "fitting.n_starts");
        if (fitting.contains("saem")) {
            const json& saem = fitting.at("saem");
            SaemConfig& sc = cfg.fitting.saem;
            sc.n_burnin_iters = static_cast<int>(number_or(saem, "fitting.saem", "n_burnin_iters",
                                                           sc.n_burnin_iters));
            sc.n_smoothing_iters = static_cast<int>(
                number_or(saem, "fitting.saem", "n_smoothing_iters", sc.n_smoothing_iters));
            sc.mcmc_steps_per_iter = static_cast<int>(
                number_or(saem, "fitting.saem", "mcmc_steps_per_iter", sc.mcmc_steps_per_iter));
            sc.step_size_exponent =
                number_or(saem, "fitting.saem", "step_size_exponent", sc.step_size_exponent);
            sc.n_is_samples = static_cast<int>(
                number_or(saem, "fitting.saem", "n_is_samples", sc.n_is_samples));
            sc.validate();
        }
    }

    // --- analysis ---
    if (j.contains("analysis")) {
        const json& analysis = j.at("analysis");
        cfg.top_k = static_cast<int>(number_or(analysis, "analysis", "top_k", cfg.top_k));
        cfg.alpha = number_or(analysis, "analysis", "alpha", cfg.alpha);
        cfg.quality_window =
            number_or(analysis, "analysis", "quality_window", cfg.quality_window);
        cfg.overlap_threshold =
            number_or(analysis, "analysis", "overlap_threshold", cfg.overlap_threshold);
    }

    // --- appendix ---
    if (j.contains("appendix")) {
        const json& ap = j.at("appendix");
        AppendixConfig& a = cfg.appendix;
        a.mu_a = number_or(ap, "appendix", "mu_a", a.mu_a);
        a.mu_b = number_or(ap, "appendix", "mu_b", a.mu_b);
        a.x0 = number_or(ap, "appendix", "x0", a.x0);
        a.sigma2 = number_or(ap, "appendix", "sigma2", a.sigma2);
        a.n_points = static_cast<int>(number_or(ap, "appendix", "n_points", a.n_points));
        a.n_mc = static_cast<int>(number_or(ap, "appendix", "n_mc", a.n_mc));
        a.top_fraction = number_or(ap, "appendix", "top_fraction", a.top_fraction);
        if (ap.contains("box")) {
            const json& box = ap.at("box");
            if (!box.is_array() || box.size() != 2) fail("appendix.box", "expected [lo, hi]");
            a.box_lo = number(box.at(0), "appendix.box");
            a.box_hi = number(box.at(1), "appendix.box");
        }
        if (ap.contains("n_set")) {
            a.n_set.clear();
            for (std::size_t i = 0; i < ap.at("n_set").size(); ++i)
                a.n_set.push_back(
                    integer(ap.at("n_set").at(i), "appendix.n_set[" + std::to_string(i) + "]"));
        }
    }

    cfg.resolved_json = j.dump(2);
    return cfg;
}

ModelBundle build_models(const RunConfig& cfg) {
    const IntegratorConfig gen_tol{1e-8, 1e-10};
    const IntegratorConfig fit_tol{1e-6, 1e-8};

    ModelBundle bundle;
    if (cfg.model == "friberg") {
        auto model = std::make_shared<const FribergZalypsisModel>(cfg.pk_literal);
        bundle.generation = std::make_shared<const OdeStructural>(model, gen_tol);
        bundle.fitting = std::make_shared<const OdeStructural>(model, fit_tol);
    } else if (cfg.model == "tiv") {
        auto model = std::make_shared<const TivModel>();
        bundle.generation = std::make_shared<const OdeStructural>(model, gen_tol);
        bundle.fitting = std::make_shared<const OdeStructural>(model, fit_tol);
    } else if (cfg.model == "expgrowth") {
        auto structural = std::make_shared<const ExpGrowthStructural>();
        bundle.generation = structural;
        bundle.fitting = structural;
    } else {
        throw_schema("unknown model '" + cfg.model + "'");
    }
    return bundle;
}

StatModelSpec build_stat_spec(const RunConfig& cfg, const ModelBundle& models) {
    StatModelSpec spec;
    spec.structural = models.fitting;
    spec.fitted = cfg.fitting.fitted;
    spec.fixed_constants = cfg.fitting.fixed_constants;
    spec.error_model = cfg.fitting.error_model;
    spec.validate();
    return spec;
}

}  // namespace hierid
