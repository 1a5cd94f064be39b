// Command-line front end: simulate -> fit -> analyze pipeline plus the
// exponential-growth likelihood-landscape appendix.

#include <cstdint>
#include <iostream>

#include <CLI11.hpp>

#include "hierid/commands.hpp"
#include "hierid/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"hierid: population-level practical identifiability for hierarchical ODE models"};
    app.require_subcommand(1);

    hierid::SimulateOptions sim;
    hierid::FitOptions fit;
    hierid::AnalyzeOptions analyze;
    hierid::AppendixOptions appendix;

    std::uint64_t seed = 0;

    auto* sim_cmd = app.add_subcommand("simulate", "Generate a virtual population and dataset");
    sim_cmd->add_option("--config", sim.config, "Run configuration (JSON)")->required();
    sim_cmd->add_option("--out", sim.out, "Output directory")->required();
    auto* sim_seed = sim_cmd->add_option("--seed", seed, "Override the config seed");

    auto* fit_cmd = app.add_subcommand("fit", "Multi-start SAEM estimation");
    fit_cmd->add_option("--data", fit.data, "Dataset CSV from simulate")->required();
    fit_cmd->add_option("--config", fit.config, "Run configuration (JSON)")->required();
    fit_cmd->add_option("--out", fit.out, "Output directory")->required();
    auto* fit_seed = fit_cmd->add_option("--seed", seed, "Override the config seed");
    int n_starts = 0, fit_top_k = 0;
    auto* fit_starts = fit_cmd->add_option("--n-starts", n_starts, "Number of starts");
    auto* fit_topk = fit_cmd->add_option("--top-k", fit_top_k, "Fits listed in best.json");
    fit_cmd->add_option("--workers", fit.workers, "Parallel workers (0 = all cores)");

    auto* an_cmd = app.add_subcommand("analyze", "KS/overlap comparison of the best fits");
    an_cmd->add_option("--fits", analyze.fits, "Directory produced by fit")->required();
    an_cmd->add_option("--out", analyze.out, "Output directory")->required();
    double alpha = 0.0;
    int an_top_k = 0;
    auto* an_alpha = an_cmd->add_option("--alpha", alpha, "KS significance level (default 0.05)");
    auto* an_topk = an_cmd->add_option("--top-k", an_top_k, "Number of ranked fits to compare");
    an_cmd->add_option("--quality-window", analyze.quality_window,
                       "-2LL distance treated as equal fit quality");
    an_cmd->add_option("--overlap-threshold", analyze.overlap_threshold,
                       "Overlap below this marks disjoint distributions");

    auto* ap_cmd = app.add_subcommand("appendix", "Exponential-growth likelihood landscapes");
    ap_cmd->add_option("--config", appendix.config, "Run configuration (JSON)")->required();
    ap_cmd->add_option("--out", appendix.out, "Output directory")->required();
    auto* ap_seed = ap_cmd->add_option("--seed", seed, "Override the config seed");
    ap_cmd->add_option("--workers", appendix.workers, "Parallel workers (0 = all cores)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_cmd->parsed()) {
            if (sim_seed->count()) sim.seed = seed;
            return hierid::cmd_simulate(sim);
        }
        if (fit_cmd->parsed()) {
            if (fit_seed->count()) fit.seed = seed;
            if (fit_starts->count()) fit.n_starts = n_starts;
            if (fit_topk->count()) fit.top_k = fit_top_k;
            return hierid::cmd_fit(fit);
        }
        if (an_cmd->parsed()) {
            if (an_alpha->count()) analyze.alpha = alpha;
            if (an_topk->count()) analyze.top_k = an_top_k;
            return hierid::cmd_analyze(analyze);
        }
        if (ap_cmd->parsed()) {
            if (ap_seed->count()) appendix.seed = seed;
            return hierid::cmd_appendix(appendix);
        }
    } catch (const hierid::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.kind()) {
            case hierid::Errc::Input:
            case hierid::Errc::Schema: return hierid::kExitSchema;
            case hierid::Errc::Numerical: return hierid::kExitNumerical;
            case hierid::Errc::Io: return hierid::kExitSchema;
        }
        return hierid::kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return hierid::kExitNumerical;
    }
    return 0;
}
