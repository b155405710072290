#pragma once

// Ruelle probability cascades, simulated as iterated Poisson-Dirichlet
// weights: each node at depth p spawns `truncation` children whose atoms are
// the inverse arrival times of a unit Poisson process raised to -1/x_p,
// sorted (automatically) in decreasing order and normalized.  Cascade
// functionals evaluated by Monte Carlo serve as an independent oracle for the
// recursive X_0 computation and for the closed-form Y term.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "potts/errors.hpp"
#include "potts/mat.hpp"
#include "potts/rng.hpp"
#include "potts/stats.hpp"

namespace potts {

struct CascadeSpec {
    int r = 1;
    std::vector<double> x;  // x_0 < ... < x_r = 1 (x_{-1} = 0 implicit)
    int truncation = 256;

    void validate() const {
        if (r < 1 || int(x.size()) != r + 1) throw error("cascade spec needs x_0..x_r");
        if (truncation < 2) throw error("truncation must be at least 2");
        double prev = 0.0;
        for (int i = 0; i <= r; ++i) {
            if (x[i] <= prev) throw error("x must be strictly increasing from 0");
            prev = x[i];
        }
        if (std::abs(x[r] - 1.0) > 1e-12) throw error("x_r must equal 1");
        for (int i = 0; i < r; ++i)
            if (x[i] >= 1.0) throw error("cascade levels need x_i < 1");
    }
};

struct CascadeSample {
    int r = 0;
    int truncation = 0;
    std::vector<std::vector<double>> log_atoms;  // log_atoms[p][node], raw Poisson atoms
    std::vector<double> weights;                 // normalized leaf weights, truncation^r entries
};

inline CascadeSample sample_cascade(const CascadeSpec& spec, uint64_t seed) {
    spec.validate();
    CascadeSample s;
    s.r = spec.r;
    s.truncation = spec.truncation;
    Rng rng(seed);
    size_t nodes = 1;
    s.log_atoms.resize(spec.r);
    for (int p = 0; p < spec.r; ++p) {
        nodes *= spec.truncation;
        s.log_atoms[p].resize(nodes);
        double inv_x = 1.0 / spec.x[p];
        // decreasing atoms u_n = T_n^{-1/x_p}, T_n unit Poisson arrival times;
        // kept raw, the single normalization happens on the leaf products
        for (size_t parent = 0; parent < nodes / spec.truncation; ++parent) {
            double t = 0.0;
            for (int n = 0; n < spec.truncation; ++n) {
                t += rng.exponential();
                s.log_atoms[p][parent * spec.truncation + n] = -inv_x * std::log(t);
            }
        }
    }
    std::vector<double> logw(nodes, 0.0);
    size_t stride = nodes;
    for (int p = 0; p < spec.r; ++p) {
        stride /= spec.truncation;
        for (size_t leaf = 0; leaf < nodes; ++leaf) {
            size_t node = leaf / stride;  // ancestor index at depth p+1
            logw[leaf] += s.log_atoms[p][node];
        }
    }
    double m = *std::max_element(logw.begin(), logw.end());
    double z = 0.0;
    s.weights.resize(nodes);
    for (size_t leaf = 0; leaf < nodes; ++leaf) {
        s.weights[leaf] = std::exp(logw[leaf] - m);
        z += s.weights[leaf];
    }
    for (double& w : s.weights) w /= z;
    return s;
}

// Monte Carlo estimate of E log sum_alpha v_alpha exp(payoff(alpha)).  Each
// tree edge at level p carries an independent Gaussian kappa-vector with
// covariance level_covs[p]; the payoff sees the sum along the leaf's path.
inline Estimate cascade_log_sum(const CascadeSpec& spec, const std::vector<Mat>& level_covs,
                                const std::function<double(std::span<const double>)>& payoff,
                                int samples, uint64_t seed) {
    spec.validate();
    if (int(level_covs.size()) != spec.r) throw error("need one covariance per level");
    int kappa = level_covs.empty() ? 1 : level_covs[0].order();
    std::vector<Mat> factors;
    factors.reserve(spec.r);
    for (const auto& c : level_covs) factors.push_back(sqrt_psd(c, 1e-8));

    RunningStat stat;
    for (int rep = 0; rep < samples; ++rep) {
        uint64_t rep_seed = mix64(seed) + uint64_t(rep) * 0x9e3779b97f4a7c15ULL;
        CascadeSample cs = sample_cascade(spec, rep_seed);
        Rng rng(mix64(rep_seed ^ 0xa5a5a5a5a5a5a5a5ULL));
        // per-node Gaussian increments, accumulated level by level
        size_t nodes = 1;
        std::vector<std::vector<double>> zsum(spec.r);
        std::vector<double> xi(kappa);
        for (int p = 0; p < spec.r; ++p) {
            nodes *= spec.truncation;
            zsum[p].assign(nodes * kappa, 0.0);
            for (size_t node = 0; node < nodes; ++node) {
                for (int k = 0; k < kappa; ++k) xi[k] = rng.normal();
                double* dst = &zsum[p][node * kappa];
                for (int k = 0; k < kappa; ++k) {
                    double v = 0.0;
                    for (int m = 0; m < kappa; ++m) v += factors[p](k, m) * xi[m];
                    dst[k] = v;
                }
                if (p > 0) {
                    const double* parent = &zsum[p - 1][(node / spec.truncation) * kappa];
                    for (int k = 0; k < kappa; ++k) dst[k] += parent[k];
                }
            }
        }
        LogSumExp lse;
        const auto& leaves = zsum[spec.r - 1];
        for (size_t leaf = 0; leaf < cs.weights.size(); ++leaf) {
            double w = cs.weights[leaf];
            if (w <= 0.0) continue;
            lse.add(std::log(w) + payoff(std::span<const double>(&leaves[leaf * kappa], kappa)));
        }
        stat.add(lse.value());
    }
    return {stat.mean(), stat.stderror(), stat.count()};
}

// gamma_l = sum_{s,t} Delta^2_{s,t} rho_s rho_t (Q^s_l, Q^t_l)
inline std::vector<double> y_covariance_sequence(const std::vector<std::vector<Mat>>& q,
                                                 const std::vector<double>& rho,
                                                 const Mat& delta2) {
    size_t species = q.size();
    size_t levels = q.empty() ? 0 : q[0].size();
    std::vector<double> gamma(levels, 0.0);
    for (size_t l = 0; l < levels; ++l)
        for (size_t s = 0; s < species; ++s)
            for (size_t t = 0; t < species; ++t)
                gamma[l] += delta2(int(s), int(t)) * rho[s] * rho[t] * frobenius(q[s][l], q[t][l]);
    return gamma;
}

inline void check_q_monotone(const std::vector<std::vector<Mat>>& q, double tol = 1e-8) {
    for (const auto& qs : q)
        for (size_t p = 1; p < qs.size(); ++p)
            if (min_eigenvalue(qs[p] - qs[p - 1]) < -tol)
                throw non_monotone_q("Q sequence is not increasing in the PSD order");
}

// (1/N) E log sum_alpha v_alpha exp(sqrt(N) Y^alpha); independent of N.
inline double y_term_closed_form(const std::vector<double>& x,
                                 const std::vector<std::vector<Mat>>& q,
                                 const std::vector<double>& rho, const Mat& delta2) {
    check_q_monotone(q);
    auto gamma = y_covariance_sequence(q, rho, delta2);
    double v = 0.0;
    for (size_t l = 0; l + 1 < gamma.size(); ++l) v += 0.5 * x[l] * (gamma[l + 1] - gamma[l]);
    return v;
}

inline double y_term_closed_form(const CascadeSpec& spec, const std::vector<std::vector<Mat>>& q,
                                 const std::vector<double>& rho, const Mat& delta2) {
    spec.validate();
    if (q.empty() || int(q[0].size()) != spec.r + 1) throw error("Q must have r+1 levels");
    return y_term_closed_form(spec.x, q, rho, delta2);
}

// Monte Carlo cross-check of the Y term at N = 1.
inline Estimate y_term_mc(const CascadeSpec& spec, const std::vector<std::vector<Mat>>& q,
                          const std::vector<double>& rho, const Mat& delta2, int samples,
                          uint64_t seed) {
    check_q_monotone(q);
    auto gamma = y_covariance_sequence(q, rho, delta2);
    std::vector<Mat> covs;
    for (int p = 1; p <= spec.r; ++p) {
        double inc = gamma[p] - gamma[p - 1];
        if (inc < -1e-12) throw non_monotone_q("Y covariance sequence is decreasing");
        covs.push_back(Mat(1, {std::max(0.0, inc)}));
    }
    auto payoff = [](std::span<const double> z) { return z[0]; };
    return cascade_log_sum(spec, covs, payoff, samples, seed);
}

}  // namespace potts
