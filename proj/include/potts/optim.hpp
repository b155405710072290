#pragma once

// Nelder-Mead simplex minimization.  The objective must be deterministic;
// callers pin quadrature nodes / seeds so repeated evaluation is exact.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace potts {

struct NelderMeadOpts {
    int max_iter = 2000;
    double ftol = 1e-10;   // absolute spread of simplex values
    double xtol = 1e-10;   // simplex diameter
    double step = 0.25;    // initial per-coordinate step
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const NelderMeadOpts& opts = {}) {
    const size_t n = x0.size();
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    for (size_t i = 0; i < n; ++i) pts[i + 1][i] += opts.step;
    for (size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

    std::vector<size_t> order(n + 1);
    NelderMeadResult out;
    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        for (size_t i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return vals[a] < vals[b]; });
        size_t best = order[0], worst = order[n], second = order[n - 1];

        double spread = vals[worst] - vals[best];
        double diam = 0.0;
        for (size_t i = 0; i < n; ++i)
            diam = std::max(diam, std::abs(pts[worst][i] - pts[best][i]));
        if (spread < opts.ftol && diam < opts.xtol) {
            out.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (size_t k = 0; k < n; ++k) centroid[k] += pts[i][k];
        }
        for (size_t k = 0; k < n; ++k) centroid[k] /= double(n);

        auto blend = [&](double t) {
            std::vector<double> p(n);
            for (size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (centroid[k] - pts[worst][k]);
            return p;
        };

        std::vector<double> xr = blend(alpha);
        double fr = f(xr);
        if (fr < vals[order[0]]) {
            std::vector<double> xe = blend(gamma);
            double fe = f(xe);
            if (fe < fr) {
                pts[worst] = std::move(xe);
                vals[worst] = fe;
            } else {
                pts[worst] = std::move(xr);
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = std::move(xr);
            vals[worst] = fr;
            continue;
        }
        std::vector<double> xc = blend(fr < vals[worst] ? rho : -rho);
        double fc = f(xc);
        if (fc < std::min(fr, vals[worst])) {
            pts[worst] = std::move(xc);
            vals[worst] = fc;
            continue;
        }
        for (size_t i = 0; i <= n; ++i) {  // shrink toward the best vertex
            if (i == best) continue;
            for (size_t k = 0; k < n; ++k)
                pts[i][k] = pts[best][k] + sigma * (pts[i][k] - pts[best][k]);
            vals[i] = f(pts[i]);
        }
    }
    size_t best = 0;
    for (size_t i = 1; i <= n; ++i)
        if (vals[i] < vals[best]) best = i;
    out.x = pts[best];
    out.value = vals[best];
    out.iterations = iter;
    return out;
}

}  // namespace potts
