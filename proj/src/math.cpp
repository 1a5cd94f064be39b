#include "hierid/math.hpp"

#include <algorithm>
#include <limits>

#include "hierid/errors.hpp"

namespace hierid {

double logsumexp(std::span<const double> logs) {
    if (logs.empty()) return -std::numeric_limits<double>::infinity();
    double m = -std::numeric_limits<double>::infinity();
    for (double v : logs) m = std::max(m, v);
    if (!std::isfinite(m)) return m;  // all -inf (or a stray +inf/nan propagates)
    double s = 0.0;
    for (double v : logs) s += std::exp(v - m);
    return m + std::log(s);
}

double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b, double fb,
               double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa, double b,
                     double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, lm, flm);
    const double right = simpson(f, m, fm, b, fb, rm, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                          double abs_tol, int max_depth, int panels) {
    if (!(hi > lo)) return 0.0;
    if (panels < 1) panels = 1;
    const double width = (hi - lo) / panels;
    const double tol = abs_tol / panels;
    double total = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double a = lo + k * width;
        const double b = k + 1 == panels ? hi : a + width;
        const double m = 0.5 * (a + b);
        const double fa = f(a), fb = f(b), fm = f(m);
        const double whole = simpson(f, a, fa, b, fb, m, fm);
        total += adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
    }
    return total;
}

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x0, std::span<const double> init_step,
                             int max_evals, double f_tol, double x_tol) {
    const std::size_t n = x0.size();
    if (n == 0) throw_input("nelder_mead: empty starting point");

    struct Vertex {
        std::vector<double> x;
        double fx;
    };
    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return f(x);
    };

    std::vector<double> base(x0.begin(), x0.end());
    simplex.push_back({base, eval(base)});
    for (std::size_t i = 0; i < n; ++i) {
        auto x = base;
        x[i] += (init_step[i] != 0.0 ? init_step[i] : 1e-3);
        simplex.push_back({x, eval(x)});
    }

    auto order = [&] {
        std::sort(simplex.begin(), simplex.end(),
                  [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; });
    };
    order();

    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    while (evals < max_evals) {
        // Convergence: value spread and coordinate spread.
        double fspread = std::abs(simplex.back().fx - simplex.front().fx);
        double xspread = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            xspread = std::max(xspread, std::abs(simplex.back().x[i] - simplex.front().x[i]));
        if (fspread < f_tol && xspread < x_tol) break;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v].x[i] / static_cast<double>(n);

        auto reflect = centroid;
        for (std::size_t i = 0; i < n; ++i)
            reflect[i] = centroid[i] + alpha * (centroid[i] - simplex.back().x[i]);
        const double fr = eval(reflect);

        if (fr < simplex.front().fx) {
            auto expand = centroid;
            for (std::size_t i = 0; i < n; ++i)
                expand[i] = centroid[i] + gamma * (reflect[i] - centroid[i]);
            const double fe = eval(expand);
            simplex.back() = fe < fr ? Vertex{expand, fe} : Vertex{reflect, fr};
        } else if (fr < simplex[n - 1].fx) {
            simplex.back() = {reflect, fr};
        } else {
            auto contract = centroid;
            for (std::size_t i = 0; i < n; ++i)
                contract[i] = centroid[i] + rho * (simplex.back().x[i] - centroid[i]);
            const double fc = eval(contract);
            if (fc < simplex.back().fx) {
                simplex.back() = {contract, fc};
            } else {
                for (std::size_t v = 1; v <= n; ++v) {
                    for (std::size_t i = 0; i < n; ++i)
                        simplex[v].x[i] =
                            simplex[0].x[i] + sigma * (simplex[v].x[i] - simplex[0].x[i]);
                    simplex[v].fx = eval(simplex[v].x);
                }
            }
        }
        order();
    }

    return {simplex.front().x, simplex.front().fx, evals};
}

}  // namespace hierid
