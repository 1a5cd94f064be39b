#include "hierid/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hierid/errors.hpp"
#include "hierid/math.hpp"

namespace hierid {

void DensitySpec::validate() const {
    if (!(spread > 0)) throw_input("DensitySpec '" + parameter + "': spread must be positive");
    if (!std::isfinite(location)) throw_input("DensitySpec '" + parameter + "': bad location");
}

namespace {

// Pooled sorted values grouped into tie blocks; per block the number of values
// coming from x.  The ECDF gap only changes at block boundaries.
struct PooledBlocks {
    std::vector<int> size;     // block sizes
    std::vector<int> x_count;  // x values within each block
};

PooledBlocks pool(const std::vector<double>& x, const std::vector<double>& y) {
    struct Tagged {
        double v;
        bool from_x;
    };
    std::vector<Tagged> all;
    all.reserve(x.size() + y.size());
    for (double v : x) all.push_back({v, true});
    for (double v : y) all.push_back({v, false});
    std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) { return a.v < b.v; });

    PooledBlocks blocks;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        int xs = 0;
        while (j < all.size() && all[j].v == all[i].v) {
            xs += all[j].from_x ? 1 : 0;
            ++j;
        }
        blocks.size.push_back(static_cast<int>(j - i));
        blocks.x_count.push_back(xs);
        i = j;
    }
    return blocks;
}

// Max |i*m - j*n| over block boundaries of the observed labelling; D = q/(n*m).
long long ks_gap_numerator(const PooledBlocks& blocks, int n, int m) {
    long long q = 0;
    long long i = 0, j = 0;
    for (std::size_t b = 0; b < blocks.size.size(); ++b) {
        i += blocks.x_count[b];
        j += blocks.size[b] - blocks.x_count[b];
        q = std::max(q, std::llabs(i * m - j * n));
    }
    return q;
}

// Counts labellings (weighted by within-block binomial multiplicity) whose
// every block-boundary gap satisfies |i*m - j*n| < q.  Counts stay exact in
// doubles for the sizes where exactness is claimed (integers < 2^53).
double count_paths_below(const PooledBlocks& blocks, int n, int m, long long q) {
    std::vector<double> binom((static_cast<std::size_t>(n) + 1) *
                              (static_cast<std::size_t>(n + m) + 1));
    auto C = [&](int nn, int kk) -> double {
        return binom[static_cast<std::size_t>(kk) * (n + m + 1) + nn];
    };
    for (int kk = 0; kk <= n; ++kk)
        for (int nn = 0; nn <= n + m; ++nn) {
            double v;
            if (kk == 0) v = 1.0;
            else if (nn == 0) v = 0.0;
            else v = binom[static_cast<std::size_t>(kk) * (n + m + 1) + nn - 1] +
                     binom[static_cast<std::size_t>(kk - 1) * (n + m + 1) + nn - 1];
            binom[static_cast<std::size_t>(kk) * (n + m + 1) + nn] = v;
        }

    // dp[i] = weighted number of prefixes with i x-labels used so far.
    std::vector<double> dp(static_cast<std::size_t>(n) + 1, 0.0);
    dp[0] = 1.0;
    int total_so_far = 0;
    for (std::size_t b = 0; b < blocks.size.size(); ++b) {
        const int s = blocks.size[b];
        std::vector<double> next(static_cast<std::size_t>(n) + 1, 0.0);
        for (int i = 0; i <= n; ++i) {
            if (dp[static_cast<std::size_t>(i)] == 0.0) continue;
            for (int c = 0; c <= s && i + c <= n; ++c) {
                next[static_cast<std::size_t>(i + c)] +=
                    dp[static_cast<std::size_t>(i)] * C(s, c);
            }
        }
        total_so_far += s;
        // Enforce the gap bound at this block boundary.
        for (int i = 0; i <= n; ++i) {
            const int j = total_so_far - i;
            if (j < 0 || j > m) {
                next[static_cast<std::size_t>(i)] = 0.0;
                continue;
            }
            if (std::llabs(static_cast<long long>(i) * m - static_cast<long long>(j) * n) >= q)
                next[static_cast<std::size_t>(i)] = 0.0;
        }
        dp.swap(next);
    }
    return dp[static_cast<std::size_t>(n)];
}

double binomial_total(int n, int m) {
    // C(n+m, n) accumulated multiplicatively; exact in doubles for small n+m,
    // and comfortably inside double range for n*m <= 10^4.
    double v = 1.0;
    for (int i = 1; i <= n; ++i) v = v * (m + i) / i;
    return v;
}

// Asymptotic Kolmogorov tail 2*sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_tail(double lambda) {
    if (lambda < 1e-8) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_two_sample(const SampleSet& x, const SampleSet& y) {
    if (x.parameter != y.parameter)
        throw_input("ks_two_sample: sample sets for different parameters ('" + x.parameter +
                    "' vs '" + y.parameter + "')");
    const int n = static_cast<int>(x.values.size());
    const int m = static_cast<int>(y.values.size());
    if (n < 2 || m < 2) throw_input("ks_two_sample: need at least 2 points per sample");

    const PooledBlocks blocks = pool(x.values, y.values);
    const long long q = ks_gap_numerator(blocks, n, m);
    KsResult res;
    res.D = static_cast<double>(q) / (static_cast<double>(n) * static_cast<double>(m));

    if (static_cast<long long>(n) * m <= 10'000) {
        res.exact = true;
        if (q == 0) {
            res.p = 1.0;
        } else {
            const double below = count_paths_below(blocks, n, m, q);
            const double total = binomial_total(n, m);
            res.p = (total - below) / total;
        }
    } else {
        res.exact = false;
        const double ne = static_cast<double>(n) * m / (n + m);
        res.p = kolmogorov_tail(std::sqrt(ne) * res.D);
    }
    return res;
}

double overlap_normals(double mean1, double sd1, double mean2, double sd2) {
    if (!(sd1 > 0) || !(sd2 > 0)) throw_input("overlap_normals: SDs must be positive");
    if (mean1 == mean2 && sd1 == sd2) return 1.0;

    const double rel_sd_gap = std::abs(sd1 - sd2) / std::max(sd1, sd2);
    if (rel_sd_gap < 1e-12) {
        // Equal variances: single crossing at the midpoint.
        const double delta = std::abs(mean2 - mean1);
        return 2.0 * norm_cdf(-delta / (2.0 * sd1));
    }

    // Crossing points of the two log-densities.
    const double A = 1.0 / (sd2 * sd2) - 1.0 / (sd1 * sd1);
    const double B = 2.0 * (mean1 / (sd1 * sd1) - mean2 / (sd2 * sd2));
    const double Cc = mean2 * mean2 / (sd2 * sd2) - mean1 * mean1 / (sd1 * sd1) -
                      2.0 * std::log(sd1 / sd2);
    const double disc = B * B - 4.0 * A * Cc;
    if (!(disc > 0)) {
        // Degenerate geometry; fall back to quadrature.
        const double lo = std::min(mean1 - 12 * sd1, mean2 - 12 * sd2);
        const double hi = std::max(mean1 + 12 * sd1, mean2 + 12 * sd2);
        return overlap_quadrature([&](double t) { return norm_pdf(t, mean1, sd1); },
                                  [&](double t) { return norm_pdf(t, mean2, sd2); }, lo, hi);
    }
    double x1 = (-B - std::sqrt(disc)) / (2.0 * A);
    double x2 = (-B + std::sqrt(disc)) / (2.0 * A);
    if (x1 > x2) std::swap(x1, x2);

    // Integrate whichever density is smaller on each of the three regions;
    // the sign of f1 - f2 is constant between crossings, so one interior
    // log-density comparison per region decides it (log space avoids ties at
    // underflowed tails).
    auto cdf1 = [&](double t) { return norm_cdf(t, mean1, sd1); };
    auto cdf2 = [&](double t) { return norm_cdf(t, mean2, sd2); };
    auto smaller_is_first = [&](double t) {
        return log_norm_pdf(t, mean1, sd1) <= log_norm_pdf(t, mean2, sd2);
    };

    double total = 0.0;
    const double probe_left = x1 - std::max(sd1, sd2);
    total += smaller_is_first(probe_left) ? cdf1(x1) : cdf2(x1);
    const double probe_mid = 0.5 * (x1 + x2);
    total += smaller_is_first(probe_mid) ? cdf1(x2) - cdf1(x1) : cdf2(x2) - cdf2(x1);
    const double probe_right = x2 + std::max(sd1, sd2);
    total += smaller_is_first(probe_right) ? 1.0 - cdf1(x2) : 1.0 - cdf2(x2);
    return std::clamp(total, 0.0, 1.0);
}

double overlap_index(const DensitySpec& d1, const DensitySpec& d2) {
    d1.validate();
    d2.validate();
    if (d1.transform != d2.transform)
        throw_input("overlap_index: densities on different transform scales for '" +
                    d1.parameter + "'");
    return overlap_normals(d1.location, d1.spread, d2.location, d2.spread);
}

double overlap_quadrature(const std::function<double(double)>& f1,
                          const std::function<double(double)>& f2, double lo, double hi,
                          double abs_tol) {
    return integrate_adaptive([&](double t) { return std::min(f1(t), f2(t)); }, lo, hi, abs_tol);
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int a) {
        while (parent[static_cast<std::size_t>(a)] != a) {
            parent[static_cast<std::size_t>(a)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
            a = parent[static_cast<std::size_t>(a)];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
};

std::vector<std::vector<int>> components(UnionFind& uf, int n) {
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < n; ++i) groups[uf.find(i)].push_back(i);
    std::vector<std::vector<int>> out;
    for (auto& [root, members] : groups) out.push_back(std::move(members));
    return out;
}

}  // namespace

ComparisonReport pairwise_report(std::span<const FitDistributions> fits, double alpha,
                                 double overlap_threshold) {
    const int K = static_cast<int>(fits.size());
    if (K < 2) throw_input("pairwise_report: need at least 2 fits");
    for (const auto& fit : fits) {
        if (fit.samples.size() != fits.front().samples.size())
            throw_input("pairwise_report: inconsistent parameter sets across fits");
        for (const auto& [name, _] : fits.front().samples)
            if (!fit.samples.count(name))
                throw_input("pairwise_report: fit missing parameter '" + name + "'");
    }

    ComparisonReport report;
    report.alpha = alpha;
    report.overlap_threshold = overlap_threshold;
    report.n_fits = K;

    UnionFind joint(K);
    SquareMatrix joint_edge(K, 1.0);  // 1 while the rule holds for all parameters so far

    for (const auto& [name, _] : fits.front().samples) {
        ParameterComparison cmp;
        cmp.parameter = name;
        cmp.ks_p = SquareMatrix(K, 1.0);
        cmp.ks_d = SquareMatrix(K, 0.0);
        cmp.overlap = SquareMatrix(K, 1.0);

        UnionFind uf(K);
        for (int i = 0; i < K; ++i) {
            for (int j = i + 1; j < K; ++j) {
                const KsResult ks = ks_two_sample(fits[static_cast<std::size_t>(i)].samples.at(name),
                                                  fits[static_cast<std::size_t>(j)].samples.at(name));
                const double o = overlap_index(fits[static_cast<std::size_t>(i)].densities.at(name),
                                               fits[static_cast<std::size_t>(j)].densities.at(name));
                cmp.exact_p = cmp.exact_p && ks.exact;
                cmp.ks_p.at(i, j) = cmp.ks_p.at(j, i) = ks.p;
                cmp.ks_d.at(i, j) = cmp.ks_d.at(j, i) = ks.D;
                cmp.overlap.at(i, j) = cmp.overlap.at(j, i) = o;
                const bool connected = ks.p > alpha && o > overlap_threshold;
                if (connected) uf.unite(i, j);
                else joint_edge.at(i, j) = joint_edge.at(j, i) = 0.0;
            }
        }
        cmp.clusters = components(uf, K);
        report.parameters.push_back(std::move(cmp));
    }

    for (int i = 0; i < K; ++i)
        for (int j = i + 1; j < K; ++j)
            if (joint_edge.at(i, j) > 0.5) joint.unite(i, j);
    report.joint_clusters = components(joint, K);
    return report;
}

std::vector<std::vector<int>> cluster_fits(const ComparisonReport& report,
                                           const std::string& parameter) {
    for (const auto& cmp : report.parameters)
        if (cmp.parameter == parameter) return cmp.clusters;
    throw_input("cluster_fits: parameter '" + parameter + "' not in report");
}

}  // namespace hierid
