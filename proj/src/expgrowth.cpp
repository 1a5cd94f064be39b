#include "hierid/expgrowth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hierid/errors.hpp"
#include "hierid/rng.hpp"
#include "hierid/threadpool.hpp"

namespace hierid {

ExpGrowthDataset generate_expgrowth_data(int n, double mu_a, double mu_b, double x0, double sigma2,
                                         std::uint64_t seed) {
    if (n < 1) throw_input("generate_expgrowth_data: n must be >= 1");
    if (!(mu_a > 0) || !(mu_b > 0)) throw_input("generate_expgrowth_data: means must be positive");
    if (!(sigma2 > 0)) throw_input("generate_expgrowth_data: sigma2 must be positive");
    if (!(x0 > 0)) throw_input("generate_expgrowth_data: x0 must be positive");

    ExpGrowthDataset data;
    data.n = n;
    data.times = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    data.sigma2 = sigma2;
    data.x0 = x0;
    data.seed = seed;
    const double sigma = std::sqrt(sigma2);
    const double logx0 = std::log(x0);

    for (int i = 0; i < n; ++i) {
        Rng rng = Rng::substream(seed, {0x726570ULL /*rep*/, static_cast<std::uint64_t>(i)});
        const double a = rng.exponential(mu_a);
        const double b = rng.exponential(mu_b);
        std::vector<double> row(data.times.size());
        for (std::size_t j = 0; j < data.times.size(); ++j)
            row[j] = logx0 + (a + b) * data.times[j] + sigma * rng.normal();
        data.y.push_back(std::move(row));
    }
    return data;
}

LikelihoodSample mc_loglik(const ExpGrowthDataset& data, double mu_a, double mu_b, int n_mc,
                           std::uint64_t seed) {
    if (n_mc < 100) throw_input("mc_loglik: n_mc must be >= 100");
    if (!(mu_a > 0) || !(mu_b > 0)) throw_input("mc_loglik: means must be positive");

    // The residual sum for one replicate depends on (a, b) only through the
    // total rate r = a + b:  SS_i(r) = A_i - 2 r B_i + r^2 C.
    const std::size_t m = data.times.size();
    const double logx0 = std::log(data.x0);
    double C = 0.0;
    for (double t : data.times) C += t * t;
    std::vector<double> A(static_cast<std::size_t>(data.n)), B(static_cast<std::size_t>(data.n));
    for (int i = 0; i < data.n; ++i) {
        double ai = 0.0, bi = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double d = data.y[static_cast<std::size_t>(i)][j] - logx0;
            ai += d * d;
            bi += d * data.times[j];
        }
        A[static_cast<std::size_t>(i)] = ai;
        B[static_cast<std::size_t>(i)] = bi;
    }

    const double inv2s2 = 1.0 / (2.0 * data.sigma2);
    const int half = n_mc / 2;
    const int used = 2 * half;  // symmetrized draw count

    LikelihoodSample out;
    out.mu_a = mu_a;
    out.mu_b = mu_b;

    double total = 0.0;
    double total_var = 0.0;
    std::vector<double> logw(static_cast<std::size_t>(used));
    for (int i = 0; i < data.n; ++i) {
        Rng rng = Rng::substream(seed, {0x6d63ULL /*mc*/, static_cast<std::uint64_t>(i)});
        const double Ai = A[static_cast<std::size_t>(i)];
        const double Bi = B[static_cast<std::size_t>(i)];
        for (int s = 0; s < half; ++s) {
            // Standard-exponential pair, then both assignments of the means;
            // the sample set is invariant under swapping mu_a and mu_b.
            const double e1 = -std::log(rng.uniform_pos());
            const double e2 = -std::log(rng.uniform_pos());
            const double r1 = mu_a * e1 + mu_b * e2;
            const double r2 = mu_a * e2 + mu_b * e1;
            logw[static_cast<std::size_t>(2 * s)] = -(Ai - 2.0 * r1 * Bi + r1 * r1 * C) * inv2s2;
            logw[static_cast<std::size_t>(2 * s + 1)] = -(Ai - 2.0 * r2 * Bi + r2 * r2 * C) * inv2s2;
        }
        double wmax = -std::numeric_limits<double>::infinity();
        for (double v : logw) wmax = std::max(wmax, v);
        if (!std::isfinite(wmax)) {
            total = -std::numeric_limits<double>::infinity();
            continue;
        }
        // Accumulate pair-wise so the reduction is invariant under swapping
        // the two mirrored draws; mean-swap symmetry then holds bit-exactly.
        double s1 = 0.0, s2 = 0.0;
        for (int s = 0; s < half; ++s) {
            const double w1 = std::exp(logw[static_cast<std::size_t>(2 * s)] - wmax);
            const double w2 = std::exp(logw[static_cast<std::size_t>(2 * s + 1)] - wmax);
            s1 += w1 + w2;
            s2 += w1 * w1 + w2 * w2;
        }
        const double nn = static_cast<double>(used);
        const double meanw = s1 / nn;
        total += wmax + std::log(meanw);
        const double var_a = std::max(0.0, s2 / nn - meanw * meanw);
        total_var += var_a / (nn * meanw * meanw);
    }

    out.loglik = total;
    out.mc_se = std::sqrt(total_var);
    return out;
}

std::vector<LikelihoodSample> likelihood_landscape(const ExpGrowthDataset& data,
                                                   const LandscapeConfig& cfg,
                                                   std::uint64_t seed) {
    std::vector<std::pair<double, double>> points;
    if (cfg.sampler == LandscapeConfig::Sampler::Grid) {
        points = cfg.grid;
    } else {
        if (!(cfg.box_lo > 0) || !(cfg.box_hi > cfg.box_lo))
            throw_input("likelihood_landscape: box must satisfy 0 < lo < hi");
        Rng rng = Rng::substream(seed, {0x707473ULL /*pts*/});
        points.reserve(static_cast<std::size_t>(cfg.n_points));
        for (int i = 0; i < cfg.n_points; ++i) {
            const double a = rng.uniform(cfg.box_lo, cfg.box_hi);
            const double b = rng.uniform(cfg.box_lo, cfg.box_hi);
            points.emplace_back(a, b);
        }
    }
    if (points.empty()) throw_input("likelihood_landscape: no evaluation points");

    std::vector<LikelihoodSample> samples(points.size());
    parallel_for(points.size(), cfg.workers, [&](std::size_t i) {
        samples[i] = mc_loglik(data, points[i].first, points[i].second, cfg.n_mc, seed);
    });

    // Rank by log-likelihood, ties broken by point order.
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return samples[a].loglik > samples[b].loglik;
    });
    const auto top_count = static_cast<std::size_t>(
        std::ceil(cfg.top_fraction * static_cast<double>(samples.size())));
    for (std::size_t r = 0; r < order.size(); ++r) {
        samples[order[r]].rank = static_cast<int>(r + 1);
        samples[order[r]].top = r < top_count;
    }
    return samples;
}

}  // namespace hierid
