#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "hierid/csv.hpp"
#include "hierid/errors.hpp"
#include "hierid/rng.hpp"
#include "hierid/threadpool.hpp"
#include "nlme_internal.hpp"

namespace hierid {

MultiStartResult multi_start(const TrialDataset& data, const StatModelSpec& spec,
                             const NamedBounds& bounds, int n_starts, const SaemConfig& cfg,
                             unsigned workers) {
    if (n_starts < 1) throw_input("multi_start: n_starts must be >= 1");
    spec.validate();
    cfg.validate();

    const std::uint64_t init_seed = Rng::substream(cfg.seed, {0x7374617274ULL /*start*/}).next_u64();
    const std::uint64_t is_seed = Rng::substream(cfg.seed, {0x6c6cULL /*ll*/}).next_u64();
    const auto inits = sample_initial_estimates(bounds, spec.fitted, n_starts, init_seed);

    std::vector<std::optional<FitResult>> slots(static_cast<std::size_t>(n_starts));
    std::vector<std::string> errors(static_cast<std::size_t>(n_starts));

    parallel_for(static_cast<std::size_t>(n_starts), workers, [&](std::size_t i) {
        try {
            FitResult fit = saem_fit(data, spec, inits[i], cfg);
            const auto ll = log_likelihood_is(fit, data, spec, cfg.n_is_samples, is_seed);
            fit.minus2ll = ll.minus2ll;
            fit.mc_se = ll.mc_se;
            fit.ll_prior_fallback = ll.prior_fallback;
            fit.aic = aic(fit.minus2ll, fit.n_estimated);
            fit.start_index = static_cast<int>(i);
            slots[i] = std::move(fit);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    MultiStartResult out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i]) out.fits.push_back(std::move(*slots[i]));
        else out.failures.emplace_back(static_cast<int>(i), errors[i]);
    }
    if (out.fits.empty())
        throw_numerical("multi_start: all " + std::to_string(n_starts) + " starts failed (first: " +
                        (out.failures.empty() ? std::string("?") : out.failures.front().second) +
                        ")");

    std::stable_sort(out.fits.begin(), out.fits.end(), [](const FitResult& a, const FitResult& b) {
        if (a.aic != b.aic) return a.aic < b.aic;
        return a.start_index < b.start_index;
    });
    return out;
}

void write_fit(const FitResult& fit, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    CsvTable pop;
    pop.header = {"name", "transform", "location", "spread"};
    for (const auto& d : fit.population)
        pop.rows.push_back({d.name, to_string(d.transform), fmt_double(d.location),
                            fmt_double(d.spread)});
    write_csv(dir / "population.csv", pop);

    CsvTable ind;
    ind.header = {"id"};
    for (const auto& d : fit.population) ind.header.push_back(d.name);
    for (const auto& [id, est] : fit.individual_estimates) {
        std::vector<std::string> row = {std::to_string(id)};
        for (const auto& d : fit.population) row.push_back(fmt_double(est.at(d.name)));
        ind.rows.push_back(std::move(row));
    }
    write_csv(dir / "individuals.csv", ind);

    nlohmann::json ll;
    ll["minus2ll"] = fit.minus2ll;
    ll["mc_se"] = fit.mc_se;
    ll["aic"] = fit.aic;
    ll["n_estimated"] = fit.n_estimated;
    ll["seed"] = fit.seed;
    ll["start_index"] = fit.start_index;
    ll["error_param"] = fit.error_param;
    ll["numeric_rejects"] = fit.numeric_rejects;
    ll["ll_prior_fallback"] = fit.ll_prior_fallback;
    std::ofstream os(dir / "ll.json", std::ios::binary);
    if (!os) throw_io("cannot write " + (dir / "ll.json").string());
    os << ll.dump(2) << '\n';

    CsvTable trace;
    trace.header = {"iter"};
    for (const auto& name : fit.trace_names) trace.header.push_back(name);
    for (const auto& row : fit.trace) {
        std::vector<std::string> r = {std::to_string(row.iter)};
        for (double v : row.values) r.push_back(fmt_double(v));
        trace.rows.push_back(std::move(r));
    }
    write_csv(dir / "trace.csv", trace);
}

FitResult read_fit(const std::filesystem::path& dir) {
    FitResult fit;

    const CsvTable pop = read_csv(dir / "population.csv");
    for (const char* col : {"name", "transform", "location", "spread"})
        if (pop.column(col) < 0)
            throw_schema(dir.string() + "/population.csv: missing column '" + std::string(col) + "'");
    for (const auto& row : pop.rows) {
        PopulationDistribution d;
        d.name = row[static_cast<std::size_t>(pop.column("name"))];
        d.transform = transform_from_string(row[static_cast<std::size_t>(pop.column("transform"))]);
        d.location = parse_double(row[static_cast<std::size_t>(pop.column("location"))]);
        d.spread = parse_double(row[static_cast<std::size_t>(pop.column("spread"))]);
        fit.population.push_back(std::move(d));
    }

    const CsvTable ind = read_csv(dir / "individuals.csv");
    if (ind.column("id") < 0) throw_schema(dir.string() + "/individuals.csv: missing column 'id'");
    for (const auto& row : ind.rows) {
        const int id = static_cast<int>(parse_double(row[static_cast<std::size_t>(ind.column("id"))]));
        NamedValues est;
        for (const auto& d : fit.population) {
            const int col = ind.column(d.name);
            if (col < 0)
                throw_schema(dir.string() + "/individuals.csv: missing column '" + d.name + "'");
            est[d.name] = parse_double(row[static_cast<std::size_t>(col)]);
        }
        fit.individual_estimates[id] = std::move(est);
    }

    std::ifstream is(dir / "ll.json");
    if (!is) throw_io("cannot open " + (dir / "ll.json").string());
    nlohmann::json ll = nlohmann::json::parse(is);
    fit.minus2ll = ll.at("minus2ll").get<double>();
    fit.mc_se = ll.at("mc_se").get<double>();
    fit.aic = ll.at("aic").get<double>();
    fit.n_estimated = ll.at("n_estimated").get<int>();
    fit.seed = ll.at("seed").get<std::uint64_t>();
    fit.start_index = ll.at("start_index").get<int>();
    fit.error_param = ll.at("error_param").get<double>();
    return fit;
}

}  // namespace hierid
