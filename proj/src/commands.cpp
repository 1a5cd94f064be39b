#include "hierid/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "hierid/config.hpp"
#include "hierid/csv.hpp"
#include "hierid/errors.hpp"
#include "hierid/manifest.hpp"
#include "hierid/math.hpp"
#include "hierid/rng.hpp"
#include "hierid/svg.hpp"

namespace hierid {

namespace {

class StageTimer {
public:
    explicit StageTimer(RunManifest& manifest) : manifest_(manifest) {}
    template <typename Fn>
    auto run(const std::string& stage, Fn&& fn) {
        const auto start = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            manifest_.timings_sec[stage] = seconds_since(start);
        } else {
            auto result = fn();
            manifest_.timings_sec[stage] = seconds_since(start);
            return result;
        }
    }

private:
    static double seconds_since(std::chrono::steady_clock::time_point start) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    RunManifest& manifest_;
};

std::string fit_dir_name(int start_index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "start_%03d", start_index);
    return buf;
}

std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t tag) {
    return Rng::substream(seed, {tag}).next_u64();
}

}  // namespace

int cmd_simulate(const SimulateOptions& opt) {
    RunConfig cfg = load_config(opt.config);
    if (opt.seed) cfg.seed = *opt.seed;
    std::filesystem::create_directories(opt.out);

    RunManifest manifest;
    manifest.command = "simulate";
    manifest.seed = cfg.seed;
    manifest.config_hash = fnv1a_hash(cfg.resolved_json);
    manifest.resolved_config = cfg.resolved_json;
    if (cfg.model == "friberg") manifest.corrections["pk_literal"] = cfg.pk_literal;
    StageTimer timer(manifest);

    const ModelBundle models = build_models(cfg);
    const auto individuals = timer.run("sample_population", [&] {
        return sample_population(cfg.distributions, cfg.n_individuals, stage_seed(cfg.seed, 1));
    });
    const auto data = timer.run("generate_synthetic", [&] {
        return generate_synthetic(*models.generation, cfg.gen_constants, individuals, cfg.design,
                                  stage_seed(cfg.seed, 2));
    });

    write_dataset_csv(data, opt.out / "data.csv");
    write_truth_csv(individuals, opt.out / "truth.csv");
    manifest.outputs = {"data.csv", "truth.csv"};
    manifest.write(opt.out / "manifest.json");
    return kExitOk;
}

int cmd_fit(const FitOptions& opt) {
    RunConfig cfg = load_config(opt.config);
    if (opt.seed) cfg.seed = *opt.seed;
    const int n_starts = opt.n_starts.value_or(cfg.fitting.n_starts);
    const int top_k = opt.top_k.value_or(cfg.top_k);
    std::filesystem::create_directories(opt.out);

    RunManifest manifest;
    manifest.command = "fit";
    manifest.seed = cfg.seed;
    manifest.config_hash = fnv1a_hash(cfg.resolved_json);
    manifest.resolved_config = cfg.resolved_json;
    if (cfg.model == "friberg") manifest.corrections["pk_literal"] = cfg.pk_literal;
    StageTimer timer(manifest);

    const ModelBundle models = build_models(cfg);
    const TrialDataset data = read_dataset_csv(opt.data, models.fitting->dose_target());
    StatModelSpec spec = build_stat_spec(cfg, models);

    SaemConfig saem = cfg.fitting.saem;
    saem.seed = stage_seed(cfg.seed, 3);

    const MultiStartResult result = timer.run("multi_start", [&] {
        return multi_start(data, spec, cfg.fitting.bounds, n_starts, saem, opt.workers);
    });

    CsvTable summary;
    summary.header = {"rank", "start_index", "minus2ll", "mc_se", "aic", "error_param"};
    nlohmann::json best = nlohmann::json::array();
    for (std::size_t r = 0; r < result.fits.size(); ++r) {
        const FitResult& fit = result.fits[r];
        const std::string dir = fit_dir_name(fit.start_index);
        write_fit(fit, opt.out / dir);
        summary.rows.push_back({std::to_string(r + 1), std::to_string(fit.start_index),
                                fmt_double(fit.minus2ll), fmt_double(fit.mc_se),
                                fmt_double(fit.aic), fmt_double(fit.error_param)});
        if (r < static_cast<std::size_t>(top_k)) best.push_back(dir);
    }
    write_csv(opt.out / "summary.csv", summary);

    nlohmann::json best_json;
    best_json["fits"] = best;
    std::ofstream os(opt.out / "best.json", std::ios::binary);
    os << best_json.dump(2) << '\n';

    if (!result.failures.empty()) {
        nlohmann::json failures = nlohmann::json::array();
        for (const auto& [idx, msg] : result.failures)
            failures.push_back({{"start_index", idx}, {"error", msg}});
        std::ofstream fs(opt.out / "failures.json", std::ios::binary);
        fs << failures.dump(2) << '\n';
        std::cerr << "warning: " << result.failures.size() << " of " << n_starts
                  << " starts failed; see failures.json\n";
    }

    manifest.outputs = {"summary.csv", "best.json"};
    for (const auto& fit : result.fits) manifest.outputs.push_back(fit_dir_name(fit.start_index));
    manifest.write(opt.out / "manifest.json");
    return result.failures.empty() ? kExitOk : kExitPartial;
}

namespace {

struct Verdict {
    std::string parameter;
    std::string label;  // IDENTIFIABLE / NON-IDENTIFIABLE / MULTI-MODAL
    std::string detail;
    double mean_overlap_all = 0.0;
    double mean_overlap_within = 0.0;
    double min_overlap = 1.0;
    int significant_pairs = 0;
};

Verdict assess_parameter(const ParameterComparison& cmp,
                         const std::vector<double>& minus2ll, double alpha,
                         double overlap_threshold, double quality_window) {
    const int K = cmp.ks_p.n;
    Verdict v;
    v.parameter = cmp.parameter;

    std::vector<int> cluster_of(static_cast<std::size_t>(K), -1);
    for (std::size_t ci = 0; ci < cmp.clusters.size(); ++ci)
        for (int member : cmp.clusters[ci]) cluster_of[static_cast<std::size_t>(member)] = static_cast<int>(ci);

    bool cross_overlap_ok = true;
    bool equal_quality_disjoint = false;
    double within_sum = 0.0;
    int within_count = 0;
    for (int i = 0; i < K; ++i) {
        for (int j = i + 1; j < K; ++j) {
            const double o = cmp.overlap.at(i, j);
            v.mean_overlap_all += o;
            v.min_overlap = std::min(v.min_overlap, o);
            if (cmp.ks_p.at(i, j) <= alpha) ++v.significant_pairs;
            if (cluster_of[static_cast<std::size_t>(i)] != cluster_of[static_cast<std::size_t>(j)]) {
                if (!(o > overlap_threshold)) cross_overlap_ok = false;
            } else {
                within_sum += o;
                ++within_count;
            }
            if (std::abs(minus2ll[static_cast<std::size_t>(i)] -
                         minus2ll[static_cast<std::size_t>(j)]) <= quality_window &&
                o < overlap_threshold)
                equal_quality_disjoint = true;
        }
    }
    const int pairs = K * (K - 1) / 2;
    v.mean_overlap_all /= pairs;
    v.mean_overlap_within = within_count > 0 ? within_sum / within_count : 1.0;

    if (v.significant_pairs == 0 && cross_overlap_ok) {
        v.label = "IDENTIFIABLE";
        v.detail = "no significant KS pair and every cross-cluster overlap exceeds the threshold";
    } else if (equal_quality_disjoint) {
        v.label = "NON-IDENTIFIABLE";
        v.detail = "fits of indistinguishable quality (|d(-2LL)| <= window) carry disjoint "
                   "population distributions (overlap < threshold)";
    } else {
        v.label = "MULTI-MODAL";
        v.detail = "distributions separate only across fits of clearly different quality; "
                   "the clusters mark distinct local optima of the likelihood";
    }
    return v;
}

}  // namespace

int cmd_analyze(const AnalyzeOptions& opt) {
    const double alpha = opt.alpha.value_or(0.05);
    std::filesystem::create_directories(opt.out);

    // Ranked fit directories from the fit stage.
    std::ifstream bs(opt.fits / "best.json");
    if (!bs) throw_io("cannot open " + (opt.fits / "best.json").string());
    const nlohmann::json best = nlohmann::json::parse(bs);

    std::vector<FitResult> fits;
    for (const auto& name : best.at("fits")) {
        fits.push_back(read_fit(opt.fits / name.get<std::string>()));
        if (opt.top_k && static_cast<int>(fits.size()) >= *opt.top_k) break;
    }
    if (fits.size() < 2) throw_input("cmd_analyze: need at least 2 completed fits");

    RunManifest manifest;
    manifest.command = "analyze";
    manifest.seed = 0;
    manifest.config_hash = "";
    StageTimer timer(manifest);

    std::vector<FitDistributions> dists;
    std::vector<double> minus2ll;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        dists.push_back(fit_distributions(fits[i], static_cast<int>(i)));
        minus2ll.push_back(fits[i].minus2ll);
    }

    const ComparisonReport report = timer.run("pairwise_report", [&] {
        return pairwise_report(dists, alpha, opt.overlap_threshold);
    });

    const int K = report.n_fits;
    auto fit_label = [](int i) { return "fit_" + std::to_string(i + 1); };

    // Per-parameter matrix files.
    for (const auto& cmp : report.parameters) {
        const auto dir = opt.out / cmp.parameter;
        std::filesystem::create_directories(dir);
        auto write_matrix = [&](const SquareMatrix& m, const std::string& file) {
            CsvTable t;
            t.header = {"fit"};
            for (int i = 0; i < K; ++i) t.header.push_back(fit_label(i));
            for (int i = 0; i < K; ++i) {
                std::vector<std::string> row = {fit_label(i)};
                for (int j = 0; j < K; ++j) row.push_back(fmt_double(m.at(i, j)));
                t.rows.push_back(std::move(row));
            }
            write_csv(dir / file, t);
        };
        write_matrix(cmp.ks_p, "ks_p.csv");
        write_matrix(cmp.ks_d, "ks_D.csv");
        write_matrix(cmp.overlap, "overlap.csv");
    }

    // Tidy long-format report.
    CsvTable tidy;
    tidy.header = {"parameter", "fit_i",   "fit_j",      "ks_D",
                   "ks_p",      "ks_exact", "overlap",    "significant",
                   "bonferroni_significant"};
    for (const auto& cmp : report.parameters) {
        const int pairs = K * (K - 1) / 2;
        const double alpha_bonf = alpha / pairs;
        for (int i = 0; i < K; ++i)
            for (int j = i + 1; j < K; ++j)
                tidy.rows.push_back({cmp.parameter, fit_label(i), fit_label(j),
                                     fmt_double(cmp.ks_d.at(i, j)), fmt_double(cmp.ks_p.at(i, j)),
                                     cmp.exact_p ? "1" : "0", fmt_double(cmp.overlap.at(i, j)),
                                     cmp.ks_p.at(i, j) <= alpha ? "1" : "0",
                                     cmp.ks_p.at(i, j) <= alpha_bonf ? "1" : "0"});
    }
    write_csv(opt.out / "report.csv", tidy);

    // Clusters.
    nlohmann::json clusters;
    for (const auto& cmp : report.parameters) clusters["per_parameter"][cmp.parameter] = cmp.clusters;
    clusters["joint"] = report.joint_clusters;
    clusters["rule"] = "edge when KS p > alpha and overlap > threshold; clusters are connected "
                       "components (this operationalizes the clustering, which the source "
                       "analysis left informal)";
    clusters["alpha"] = alpha;
    clusters["overlap_threshold"] = opt.overlap_threshold;
    {
        std::ofstream os(opt.out / "clusters.json", std::ios::binary);
        os << clusters.dump(2) << '\n';
    }

    // Violin data: transformed individual estimates per fit.
    CsvTable violin;
    violin.header = {"parameter", "fit", "id", "value"};
    for (std::size_t fi = 0; fi < fits.size(); ++fi) {
        for (const auto& d : fits[fi].population) {
            if (!(d.spread > 0)) continue;
            for (const auto& [id, est] : fits[fi].individual_estimates)
                violin.rows.push_back({d.name, fit_label(static_cast<int>(fi)),
                                       std::to_string(id),
                                       fmt_double(apply_transform(d.transform, est.at(d.name)))});
        }
    }
    write_csv(opt.out / "violin.csv", violin);

    // Density curves per fit and parameter.
    CsvTable density;
    density.header = {"parameter", "fit", "theta", "pdf"};
    for (const auto& cmp : report.parameters) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& fd : dists) {
            const auto& ds = fd.densities.at(cmp.parameter);
            lo = std::min(lo, ds.location - 4 * ds.spread);
            hi = std::max(hi, ds.location + 4 * ds.spread);
        }
        for (std::size_t fi = 0; fi < dists.size(); ++fi) {
            const auto& ds = dists[fi].densities.at(cmp.parameter);
            for (int k = 0; k <= 200; ++k) {
                const double theta = lo + (hi - lo) * k / 200.0;
                density.rows.push_back({cmp.parameter, fit_label(static_cast<int>(fi)),
                                        fmt_double(theta),
                                        fmt_double(norm_pdf(theta, ds.location, ds.spread))});
            }
        }
    }
    write_csv(opt.out / "density.csv", density);

    // Verdicts.
    std::ofstream verdict(opt.out / "verdict.txt", std::ios::binary);
    verdict << "Practical identifiability assessment over " << K << " ranked fits\n"
            << "Decision rule:\n"
            << "  IDENTIFIABLE      no KS pair significant at alpha=" << alpha
            << " and all cross-cluster overlaps > " << opt.overlap_threshold << "\n"
            << "  NON-IDENTIFIABLE  some pair with overlap < " << opt.overlap_threshold
            << " among fits whose -2LL differ by <= " << opt.quality_window << "\n"
            << "  MULTI-MODAL       otherwise (separated distributions only across fits of\n"
            << "                    clearly different likelihood; distinct local optima)\n\n";
    verdict << "-2LL by rank:";
    for (double v : minus2ll) verdict << " " << fmt_double(v);
    verdict << "\n\n";
    for (const auto& cmp : report.parameters) {
        const Verdict v = assess_parameter(cmp, minus2ll, alpha, opt.overlap_threshold,
                                           opt.quality_window);
        verdict << v.parameter << ": " << v.label << "\n"
                << "  " << v.detail << "\n"
                << "  mean overlap (all pairs)      = " << fmt_double(v.mean_overlap_all) << "\n"
                << "  mean overlap (within cluster) = " << fmt_double(v.mean_overlap_within)
                << "\n"
                << "  min overlap                   = " << fmt_double(v.min_overlap) << "\n"
                << "  significant KS pairs          = " << v.significant_pairs << " of "
                << K * (K - 1) / 2 << " (" << (cmp.exact_p ? "exact" : "asymptotic")
                << " p-values)\n"
                << "  clusters                      = [";
        for (std::size_t ci = 0; ci < cmp.clusters.size(); ++ci) {
            if (ci) verdict << ", ";
            verdict << "{";
            for (std::size_t mi = 0; mi < cmp.clusters[ci].size(); ++mi) {
                if (mi) verdict << " ";
                verdict << cmp.clusters[ci][mi] + 1;
            }
            verdict << "}";
        }
        verdict << "]\n\n";
    }

    manifest.outputs = {"report.csv", "clusters.json", "violin.csv", "density.csv", "verdict.txt"};
    manifest.write(opt.out / "manifest.json");
    return kExitOk;
}

int cmd_appendix(const AppendixOptions& opt) {
    RunConfig cfg = load_config(opt.config);
    if (opt.seed) cfg.seed = *opt.seed;
    std::filesystem::create_directories(opt.out);

    RunManifest manifest;
    manifest.command = "appendix";
    manifest.seed = cfg.seed;
    manifest.config_hash = fnv1a_hash(cfg.resolved_json);
    manifest.resolved_config = cfg.resolved_json;
    StageTimer timer(manifest);

    const AppendixConfig& a = cfg.appendix;
    for (int n : a.n_set) {
        const auto dir = opt.out / ("n_" + std::to_string(n));
        std::filesystem::create_directories(dir);

        const auto data_seed =
            Rng::substream(cfg.seed, {0x617070ULL /*app*/, static_cast<std::uint64_t>(n), 1})
                .next_u64();
        const auto mc_seed =
            Rng::substream(cfg.seed, {0x617070ULL, static_cast<std::uint64_t>(n), 2}).next_u64();

        const auto samples = timer.run("landscape_n" + std::to_string(n), [&] {
            const ExpGrowthDataset data =
                generate_expgrowth_data(n, a.mu_a, a.mu_b, a.x0, a.sigma2, data_seed);
            LandscapeConfig lc;
            lc.box_lo = a.box_lo;
            lc.box_hi = a.box_hi;
            lc.n_points = a.n_points;
            lc.n_mc = a.n_mc;
            lc.top_fraction = a.top_fraction;
            lc.workers = opt.workers;
            return likelihood_landscape(data, lc, mc_seed);
        });

        CsvTable t;
        t.header = {"mu_a", "mu_b", "loglik", "mc_se", "rank", "top"};
        for (const auto& s : samples)
            t.rows.push_back({fmt_double(s.mu_a), fmt_double(s.mu_b), fmt_double(s.loglik),
                              fmt_double(s.mc_se), std::to_string(s.rank), s.top ? "1" : "0"});
        write_csv(dir / "landscape.csv", t);

        SvgScatter svg;
        svg.title = "log-likelihood landscape, n = " + std::to_string(n);
        svg.x_label = "mu_a";
        svg.y_label = "mu_b";
        SvgScatter::Series rest, top;
        rest.color = "#b0b0b0";
        top.color = "#1f5fbf";
        top.radius = 3.5;
        for (const auto& s : samples)
            (s.top ? top : rest).points.emplace_back(s.mu_a, s.mu_b);
        svg.series = {rest, top};
        svg.markers = {{a.mu_a, a.mu_b, "#c02020"}, {a.mu_b, a.mu_a, "#c02020"}};
        svg.write(dir / "landscape.svg");

        manifest.outputs.push_back("n_" + std::to_string(n) + "/landscape.csv");
        manifest.outputs.push_back("n_" + std::to_string(n) + "/landscape.svg");
    }

    manifest.write(opt.out / "manifest.json");
    return kExitOk;
}

}  // namespace hierid
