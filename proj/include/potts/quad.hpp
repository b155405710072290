#pragma once

// Deterministic quadrature building blocks:
//  - Gauss-Hermite rules normalized for standard normal expectations,
//  - composite midpoint integration with a Richardson convergence check,
//  - scrambled Halton points mapped through the inverse normal CDF.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "potts/errors.hpp"
#include "potts/rng.hpp"

namespace potts {

struct GaussHermite {
    std::vector<double> nodes;    // abscissa for N(0,1)
    std::vector<double> weights;  // sum to 1
};

// Newton iteration on the physicists' Hermite recurrence, then rescaled so
// that sum_i w_i f(x_i) approximates E f(Z), Z ~ N(0,1).
inline GaussHermite gauss_hermite(int n) {
    const double eps = 1e-14;
    std::vector<double> x(n), w(n);
    int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        else if (i == 1)
            z -= 1.14 * std::pow(double(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * x[1];
        else
            z = 2.0 * z - x[i - 2];
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 0.7511255444649425;  // pi^{-1/4}
            double p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(double(j) / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= eps) break;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    GaussHermite out;
    out.nodes.resize(n);
    out.weights.resize(n);
    const double inv_sqrt_pi = 0.5641895835477562869;
    for (int i = 0; i < n; ++i) {
        out.nodes[i] = std::sqrt(2.0) * x[n - 1 - i];  // ascending order
        out.weights[i] = w[n - 1 - i] * inv_sqrt_pi;
    }
    return out;
}

// Composite midpoint rule, refined until two consecutive halvings agree to
// rel_tol. Throws quadrature_failure if the estimate fails to settle.
inline double integrate_1d(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-6, int init_cells = 16, int max_doublings = 14) {
    if (b <= a) return 0.0;
    auto midpoint = [&](int cells) {
        double h = (b - a) / cells;
        double s = 0.0;
        for (int i = 0; i < cells; ++i) s += f(a + (i + 0.5) * h);
        return s * h;
    };
    int cells = init_cells;
    double prev = midpoint(cells);
    for (int d = 0; d < max_doublings; ++d) {
        cells *= 2;
        double cur = midpoint(cells);
        if (std::abs(cur - prev) <= rel_tol * (std::abs(cur) + 1e-12)) return cur;
        prev = cur;
    }
    throw quadrature_failure("1d midpoint rule did not converge");
}

inline double integrate_2d(const std::function<double(double, double)>& f, double ax, double bx,
                           double ay, double by, double rel_tol = 1e-6, int init_cells = 8,
                           int max_doublings = 9) {
    if (bx <= ax || by <= ay) return 0.0;
    auto midpoint = [&](int cells) {
        double hx = (bx - ax) / cells, hy = (by - ay) / cells;
        double s = 0.0;
        for (int i = 0; i < cells; ++i) {
            double x = ax + (i + 0.5) * hx;
            for (int j = 0; j < cells; ++j) s += f(x, ay + (j + 0.5) * hy);
        }
        return s * hx * hy;
    };
    int cells = init_cells;
    double prev = midpoint(cells);
    for (int d = 0; d < max_doublings; ++d) {
        cells *= 2;
        double cur = midpoint(cells);
        if (std::abs(cur - prev) <= rel_tol * (std::abs(cur) + 1e-12)) return cur;
        prev = cur;
    }
    throw quadrature_failure("2d midpoint rule did not converge");
}

// Acklam's rational approximation of the standard normal quantile.
inline double inverse_normal_cdf(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > phigh) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Digit-scrambled Halton sequence; scramble permutations fixed by the seed.
class ScrambledHalton {
public:
    ScrambledHalton(int dims, uint64_t seed) : dims_(dims) {
        static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29,
                                     31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
        Rng rng(seed ^ 0x5851f42d4c957f2dULL);
        perms_.resize(dims);
        bases_.resize(dims);
        for (int d = 0; d < dims; ++d) {
            int base = primes[d % 20];
            bases_[d] = base;
            std::vector<int> p(base);
            for (int i = 0; i < base; ++i) p[i] = i;
            // Fisher-Yates on digits 1..base-1, digit 0 stays to keep 0 -> 0
            for (int i = base - 1; i > 1; --i) {
                int j = 1 + int(rng.below(uint64_t(i)));
                std::swap(p[i], p[j]);
            }
            perms_[d] = std::move(p);
        }
    }

    // point index n >= 1 (index 0 would be all zeros)
    std::vector<double> point(uint64_t n) const {
        std::vector<double> x(dims_);
        for (int d = 0; d < dims_; ++d) {
            uint64_t i = n;
            double f = 1.0, r = 0.0;
            int base = bases_[d];
            while (i > 0) {
                f /= base;
                r += f * perms_[d][i % base];
                i /= base;
            }
            x[d] = r;
        }
        return x;
    }

    std::vector<double> normal_point(uint64_t n) const {
        std::vector<double> x = point(n);
        for (double& v : x) {
            double p = std::min(1.0 - 1e-12, std::max(1e-12, v));
            v = inverse_normal_cdf(p);
        }
        return x;
    }

private:
    int dims_;
    std::vector<int> bases_;
    std::vector<std::vector<int>> perms_;
};

}  // namespace potts
