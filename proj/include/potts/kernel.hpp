#pragma once

// Symmetric nonnegative kernels on [0,1]^2 and the operations the graph
// sampler and the discretization bound need: cell averages, coarsening to a
// block-constant kernel, L1 distances and positive-definiteness of the block
// value matrix.
//
// The Dubins kernel 1/max{x,y} is integrable but unbounded at the origin, so
// every integral against it goes through the closed-form antiderivative
// rather than generic quadrature:
//   F(u,v) = int_0^u int_0^v dx dy / max(x,y) = 2m + m log(M/m),
// with m = min(u,v), M = max(u,v).

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "potts/errors.hpp"
#include "potts/mat.hpp"
#include "potts/quad.hpp"

namespace potts {

struct BlockSpec {
    std::vector<double> rho;  // block widths, sum to 1

    int blocks() const { return int(rho.size()); }
    std::vector<double> boundaries() const {
        std::vector<double> t(1, 0.0);
        double c = 0.0;
        for (double w : rho) t.push_back(c += w);
        t.back() = 1.0;
        return t;
    }
    static BlockSpec from_boundaries(const std::vector<double>& t) {
        validate_boundaries(t);
        BlockSpec b;
        for (size_t s = 1; s < t.size(); ++s) b.rho.push_back(t[s] - t[s - 1]);
        return b;
    }
    static void validate_boundaries(const std::vector<double>& t) {
        if (t.size() < 2 || t.front() != 0.0 || t.back() != 1.0)
            throw bad_boundaries("boundaries must start at 0 and end at 1");
        for (size_t s = 1; s < t.size(); ++s)
            if (t[s] <= t[s - 1]) throw bad_boundaries("boundaries must be strictly increasing");
    }
};

struct BlockConstant {
    std::vector<double> boundaries;
    Mat values;
};

struct Rank1 {
    std::function<double(double)> psi;
    int resolution = 64;  // initial cells for the 1d quadrature of psi
};

struct Dubins {};

class Kernel {
public:
    using Variant = std::variant<BlockConstant, Rank1, Dubins>;

    explicit Kernel(Variant v) : v_(std::move(v)) {}

    const Variant& variant() const { return v_; }
    bool is_block() const { return std::holds_alternative<BlockConstant>(v_); }
    bool is_dubins() const { return std::holds_alternative<Dubins>(v_); }
    const BlockConstant& block() const {
        if (!is_block()) throw wrong_variant("kernel is not block-constant");
        return std::get<BlockConstant>(v_);
    }

    // Pointwise value; the Dubins kernel diverges at the origin, callers that
    // integrate near 0 must use the closed forms below.
    double operator()(double x, double y) const {
        if (auto* b = std::get_if<BlockConstant>(&v_)) {
            int i = locate(b->boundaries, x);
            int j = locate(b->boundaries, y);
            return b->values(i, j);
        }
        if (auto* r = std::get_if<Rank1>(&v_)) return r->psi(x) * r->psi(y);
        double m = std::max(x, y);
        return m > 0 ? 1.0 / m : 0.0;
    }

private:
    static int locate(const std::vector<double>& t, double x) {
        int m = int(t.size()) - 1;
        auto it = std::upper_bound(t.begin(), t.end(), x);
        int i = int(it - t.begin()) - 1;
        return std::min(std::max(i, 0), m - 1);
    }

    Variant v_;
};

inline Kernel block_kernel_new(const std::vector<double>& boundaries, const Mat& values) {
    BlockSpec::validate_boundaries(boundaries);
    if (values.order() != int(boundaries.size()) - 1)
        throw bad_boundaries("value matrix order must match block count");
    if (!values.symmetric(0.0)) throw non_symmetric("block kernel values must be symmetric");
    for (int i = 0; i < values.order(); ++i)
        for (int j = 0; j < values.order(); ++j)
            if (values(i, j) < 0.0) throw error("kernel values must be nonnegative");
    return Kernel(BlockConstant{boundaries, values});
}

inline Kernel dubins_kernel() { return Kernel(Dubins{}); }

inline Kernel rank1_kernel(std::function<double(double)> psi, int resolution = 64) {
    return Kernel(Rank1{std::move(psi), resolution});
}

// Piecewise-linear activity profile for config-driven rank-1 kernels.
inline Kernel rank1_piecewise(const std::vector<double>& knots, const std::vector<double>& vals,
                              int resolution = 64) {
    if (knots.size() != vals.size() || knots.size() < 2)
        throw bad_boundaries("rank1 kernel needs matching knots/vals with >= 2 entries");
    auto psi = [knots, vals](double x) {
        if (x <= knots.front()) return vals.front();
        if (x >= knots.back()) return vals.back();
        auto it = std::upper_bound(knots.begin(), knots.end(), x);
        size_t i = size_t(it - knots.begin());
        double w = (x - knots[i - 1]) / (knots[i] - knots[i - 1]);
        return vals[i - 1] * (1.0 - w) + vals[i] * w;
    };
    return Kernel(Rank1{psi, resolution});
}

// int_0^u int_0^v 1/max dx dy
inline double dubins_corner_integral(double u, double v) {
    double m = std::min(u, v), M = std::max(u, v);
    if (m <= 0.0) return 0.0;
    return 2.0 * m + m * std::log(M / m);
}

// exact integral of 1/max over [ax,bx] x [ay,by]
inline double dubins_cell_integral(double ax, double bx, double ay, double by) {
    return dubins_corner_integral(bx, by) - dubins_corner_integral(ax, by) -
           dubins_corner_integral(bx, ay) + dubins_corner_integral(ax, ay);
}

// integral of K over [ax,bx] x [ay,by]
inline double cell_integral(const Kernel& k, double ax, double bx, double ay, double by) {
    if (bx <= ax || by <= ay) return 0.0;
    if (auto* b = std::get_if<BlockConstant>(&k.variant())) {
        const auto& t = b->boundaries;
        double s = 0.0;
        for (size_t i = 1; i < t.size(); ++i) {
            double wx = std::min(bx, t[i]) - std::max(ax, t[i - 1]);
            if (wx <= 0.0) continue;
            for (size_t j = 1; j < t.size(); ++j) {
                double wy = std::min(by, t[j]) - std::max(ay, t[j - 1]);
                if (wy <= 0.0) continue;
                s += wx * wy * b->values(int(i) - 1, int(j) - 1);
            }
        }
        return s;
    }
    if (auto* r = std::get_if<Rank1>(&k.variant())) {
        auto f = [&](double x) { return r->psi(x); };
        double ix = integrate_1d(f, ax, bx, 1e-6, std::max(2, r->resolution));
        double iy = (ax == ay && bx == by)
                        ? ix
                        : integrate_1d(f, ay, by, 1e-6, std::max(2, r->resolution));
        return ix * iy;
    }
    return dubins_cell_integral(ax, bx, ay, by);
}

// K~_N(i,j) with 1-based cell indices: N^2 times the integral of K over the
// (i,j) cell of the uniform N-grid.
inline double block_average(const Kernel& k, int n, int i, int j) {
    if (i < 1 || j < 1 || i > n || j > n) throw error("cell index out of range");
    double h = 1.0 / n;
    return double(n) * n *
           cell_integral(k, (i - 1) * h, i * h, (j - 1) * h, j * h);
}

// Block-constant approximation on the uniform M-grid; each block carries the
// kernel's average over that cell.
inline Kernel coarsen(const Kernel& k, int m) {
    if (m < 1) throw error("coarsen needs at least one block");
    std::vector<double> t(m + 1);
    for (int i = 0; i <= m; ++i) t[i] = double(i) / m;
    Mat vals(m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            double v = double(m) * m * cell_integral(k, t[i], t[i + 1], t[j], t[j + 1]);
            vals(i, j) = v;
            vals(j, i) = v;
        }
    return Kernel(BlockConstant{t, vals});
}

namespace detail {

inline std::vector<double> merged_grid(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> t;
    t.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(t));
    t.erase(std::unique(t.begin(), t.end(),
                        [](double x, double y) { return std::abs(x - y) < 1e-15; }),
            t.end());
    return t;
}

// exact | integral of 1/max - v | over a cell, splitting at the level line
// max(x,y) = 1/v where the sign of the integrand flips
inline double dubins_abs_diff_cell(double ax, double bx, double ay, double by, double v) {
    double area = (bx - ax) * (by - ay);
    double total = dubins_cell_integral(ax, bx, ay, by);
    if (v <= 0.0) return total;
    double m = 1.0 / v;  // K > v iff max(x,y) < m
    // the region {max < m} within the cell is the rectangle below (m,m)
    double rx = std::min(bx, m), ry = std::min(by, m);
    double pos_int = 0.0, pos_area = 0.0;
    if (rx > ax && ry > ay) {
        pos_int = dubins_cell_integral(ax, rx, ay, ry);
        pos_area = (rx - ax) * (ry - ay);
    }
    double neg_int = total - pos_int;
    double neg_area = area - pos_area;
    return (pos_int - v * pos_area) + (v * neg_area - neg_int);
}

}  // namespace detail

// integral of |K1 - K2| over [0,1]^2; exact for block/block and
// Dubins/block pairs, midpoint quadrature otherwise.
inline double l1_distance(const Kernel& k1, const Kernel& k2) {
    const auto* b1 = std::get_if<BlockConstant>(&k1.variant());
    const auto* b2 = std::get_if<BlockConstant>(&k2.variant());
    if (b1 && b2) {
        auto t = detail::merged_grid(b1->boundaries, b2->boundaries);
        double s = 0.0;
        for (size_t i = 1; i < t.size(); ++i)
            for (size_t j = 1; j < t.size(); ++j) {
                double xm = 0.5 * (t[i - 1] + t[i]), ym = 0.5 * (t[j - 1] + t[j]);
                s += std::abs(k1(xm, ym) - k2(xm, ym)) * (t[i] - t[i - 1]) * (t[j] - t[j - 1]);
            }
        return s;
    }
    if ((k1.is_dubins() && b2) || (k2.is_dubins() && b1)) {
        const auto* b = b1 ? b1 : b2;
        const auto& t = b->boundaries;
        double s = 0.0;
        for (size_t i = 1; i < t.size(); ++i)
            for (size_t j = 1; j < t.size(); ++j)
                s += detail::dubins_abs_diff_cell(t[i - 1], t[i], t[j - 1], t[j],
                                                  b->values(int(i) - 1, int(j) - 1));
        return s;
    }
    auto f = [&](double x, double y) { return std::abs(k1(x, y) - k2(x, y)); };
    return integrate_2d(f, 0.0, 1.0, 0.0, 1.0);
}

struct PsdReport {
    bool psd = false;
    double min_eigenvalue = 0.0;
};

// Positive semi-definiteness of the block value matrix, with tolerance for
// discretization noise on the smallest eigenvalue.
inline PsdReport psd_check(const Kernel& k, double tol = 1e-10) {
    const auto& b = k.block();
    PsdReport r;
    r.min_eigenvalue = min_eigenvalue(b.values);
    r.psd = r.min_eigenvalue > -tol;
    return r;
}

}  // namespace potts
