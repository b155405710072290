#pragma once

// The inhomogeneous Potts Hamiltonian
//   H(sigma) = N^{-1/2} sum_{i,j=1}^N g_ij 1(sigma_i = sigma_j)
// over all ordered pairs including the diagonal, with independent centered
// Gaussian couplings Var g_ij = Delta^2_{s(i),s(j)}.  Enumeration gives exact
// free energies and ground states at small N; the Gaussian surrogate trades
// the graph's Bernoulli noise for matched Gaussian pair weights.

#include <cmath>
#include <cstdint>
#include <vector>

#include "potts/constraints.hpp"
#include "potts/cut.hpp"
#include "potts/errors.hpp"
#include "potts/graph.hpp"
#include "potts/kernel.hpp"
#include "potts/mat.hpp"
#include "potts/rng.hpp"
#include "potts/stats.hpp"

namespace potts {

struct DisorderMatrix {
    int n = 0;
    std::vector<double> g;  // row-major N x N

    double operator()(int i, int j) const { return g[size_t(i) * n + j]; }
    double& operator()(int i, int j) { return g[size_t(i) * n + j]; }
};

inline DisorderMatrix sample_disorder(const SpeciesStructure& species, uint64_t seed) {
    int n = species.n();
    if (!species.delta2.symmetric(1e-12)) throw non_symmetric("delta2 must be symmetric");
    Mat sd(species.delta2.order());
    for (int s = 0; s < sd.order(); ++s)
        for (int t = 0; t < sd.order(); ++t) {
            double v = species.delta2(s, t);
            if (v < 0.0) throw degenerate_covariance("delta2 entries must be nonnegative");
            sd(s, t) = std::sqrt(v);
        }
    DisorderMatrix d;
    d.n = n;
    d.g.resize(size_t(n) * n);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        int si = species.assignment[i];
        for (int j = 0; j < n; ++j) d(i, j) = sd(si, species.assignment[j]) * rng.normal();
    }
    return d;
}

inline double hamiltonian(const DisorderMatrix& g, const std::vector<int>& sigma) {
    if (int(sigma.size()) != g.n) throw length_mismatch("assignment length != disorder order");
    double h = 0.0;
    for (int i = 0; i < g.n; ++i) {
        h += g(i, i);
        for (int j = i + 1; j < g.n; ++j)
            if (sigma[i] == sigma[j]) h += g(i, j) + g(j, i);
    }
    return h / std::sqrt(double(g.n));
}

using OverlapSet = std::vector<Mat>;  // one kappa x kappa matrix per species

inline OverlapSet overlap(const std::vector<int>& sigma1, const std::vector<int>& sigma2,
                          const SpeciesStructure& species, int kappa) {
    if (sigma1.size() != sigma2.size() || int(sigma1.size()) != species.n())
        throw length_mismatch("configuration/species sizes disagree");
    OverlapSet r(species.species(), Mat(kappa));
    for (int i = 0; i < species.n(); ++i) r[species.assignment[i]](sigma1[i], sigma2[i]) += 1.0;
    for (int s = 0; s < species.species(); ++s) r[s] *= 1.0 / species.counts[s];
    return r;
}

// E H(sigma1) H(sigma2) = N sum_{s,t} Delta^2_{s,t} rho_s rho_t (R^s, R^t)
inline double overlap_covariance(const OverlapSet& r, const SpeciesStructure& species) {
    double c = 0.0;
    for (int s = 0; s < species.species(); ++s)
        for (int t = 0; t < species.species(); ++t)
            c += species.delta2(s, t) * species.rho_n[s] * species.rho_n[t] * frobenius(r[s], r[t]);
    return c * species.n();
}

namespace detail {

// DFS over configurations with an incremental Hamiltonian.  visit(sigma, h)
// is called once per admissible configuration.
template <typename Visit>
class SpinEnumerator {
public:
    SpinEnumerator(const DisorderMatrix& g, const SpeciesStructure& species, int kappa,
                   const ProportionConstraint* constraint, long long budget, Visit visit)
        : g_(g), species_(species), kappa_(kappa), constraint_(constraint), visit_(visit) {
        check_enumeration_budget(g.n, kappa, budget);
        n_ = g.n;
        inv_sqrt_n_ = 1.0 / std::sqrt(double(n_));
        sym_.resize(size_t(n_) * n_);
        double diag = 0.0;
        for (int i = 0; i < n_; ++i) {
            diag += g(i, i);
            for (int j = 0; j < n_; ++j) sym_[size_t(i) * n_ + j] = g(i, j) + g(j, i);
        }
        diag_term_ = diag * inv_sqrt_n_;
        sigma_.assign(n_, -1);
        if (constraint_) {
            bounds_ = count_bounds(*constraint_);
            ensure_nonempty(bounds_, constraint_->species);
            used_.assign(constraint_->species.species(), std::vector<int>(kappa, 0));
            remaining_ = constraint_->species.counts;
        }
    }

    bool run() {
        visited_any_ = false;
        dfs(0, diag_term_);
        return visited_any_;
    }

private:
    void dfs(int i, double h) {
        if (i == n_) {
            visited_any_ = true;
            visit_(sigma_, h);
            return;
        }
        int s = constraint_ ? constraint_->species.assignment[i] : 0;
        for (int k = 0; k < kappa_; ++k) {
            if (constraint_) {
                if (used_[s][k] + 1 > bounds_.hi[s][k]) continue;
                used_[s][k]++;
                remaining_[s]--;
                if (viable(s)) {
                    sigma_[i] = k;
                    dfs(i + 1, h + delta(i, k));
                }
                used_[s][k]--;
                remaining_[s]++;
            } else {
                sigma_[i] = k;
                dfs(i + 1, h + delta(i, k));
            }
        }
        sigma_[i] = -1;
    }

    bool viable(int s) const {
        int deficit = 0;
        for (int k = 0; k < kappa_; ++k) deficit += std::max(0, bounds_.lo[s][k] - used_[s][k]);
        return deficit <= remaining_[s];
    }

    double delta(int i, int k) const {
        double d = 0.0;
        const double* row = &sym_[size_t(i) * n_];
        for (int j = 0; j < i; ++j)
            if (sigma_[j] == k) d += row[j];
        return d * inv_sqrt_n_;
    }

    const DisorderMatrix& g_;
    const SpeciesStructure& species_;
    int kappa_, n_ = 0;
    const ProportionConstraint* constraint_;
    Visit visit_;
    std::vector<double> sym_;
    std::vector<int> sigma_, remaining_;
    std::vector<std::vector<int>> used_;
    CountBounds bounds_;
    double inv_sqrt_n_ = 0.0, diag_term_ = 0.0;
    bool visited_any_ = false;
};

}  // namespace detail

// (1/N) log sum_{sigma in A} exp(beta H(sigma)) for one disorder draw.
inline double free_energy_enum(const DisorderMatrix& g, const SpeciesStructure& species, int kappa,
                               double beta, const ProportionConstraint* constraint = nullptr,
                               long long budget = 100000000LL) {
    LogSumExp lse;
    auto visit = [&](const std::vector<int>&, double h) { lse.add(beta * h); };
    detail::SpinEnumerator<decltype(visit)> e(g, species, kappa, constraint, budget, visit);
    if (!e.run()) throw empty_constraint_set("constraint admits no configuration");
    return lse.value() / g.n;
}

struct GroundState {
    double value = 0.0;  // max of H, not divided by N
    std::vector<int> assignment;
};

inline GroundState ground_state_enum(const DisorderMatrix& g, const SpeciesStructure& species,
                                     int kappa, const ProportionConstraint* constraint = nullptr,
                                     long long budget = 100000000LL) {
    GroundState best;
    bool found = false;
    auto visit = [&](const std::vector<int>& sigma, double h) {
        if (!found || h > best.value) {
            best.value = h;
            best.assignment = sigma;
            found = true;
        }
    };
    detail::SpinEnumerator<decltype(visit)> e(g, species, kappa, constraint, budget, visit);
    if (!e.run()) throw empty_constraint_set("constraint admits no configuration");
    return best;
}

struct SurrogateSolver {
    enum Kind { exhaustive, localsearch } kind = localsearch;
    int restarts = 50;
    long long budget = 100000000LL;
};

// Symmetric J with {J_ij : i <= j} independent N(0, K~_N(i,j)/N).
inline DisorderMatrix sample_surrogate_disorder(const Kernel& kernel, int n, uint64_t seed) {
    DisorderMatrix j;
    j.n = n;
    j.g.assign(size_t(n) * n, 0.0);
    Rng rng(seed);
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            double v = std::sqrt(block_average(kernel, n, a + 1, b + 1) / n) * rng.normal();
            j(a, b) = v;
            j(b, a) = v;
        }
    return j;
}

inline PairWeights surrogate_weights(const Kernel& kernel, int n, double c,
                                     const DisorderMatrix& jmat) {
    std::vector<double> weights(size_t(n) * n, 0.0);
    double inv_sqrt_n = 1.0 / std::sqrt(double(n));
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {  // diagonal never enters 1(sigma_i != sigma_j)
            double kavg = block_average(kernel, n, a + 1, b + 1);
            double w = 2.0 * ((c / n) * kavg + std::sqrt(c) * jmat(a, b) * inv_sqrt_n);
            weights[size_t(a) * n + b] = w;
            weights[size_t(b) * n + a] = w;
        }
    return PairWeights::from_dense(n, weights);
}

// Z~_N: the Gaussian optimization problem standing in for MaxCut/N.  The
// display is implemented verbatim: Var J_ij = K~_N(i,j)/N and the J sum
// carries an explicit 1/sqrt(N).
inline double surrogate_value(const Kernel& kernel, int n, double c, int kappa, uint64_t seed,
                              const SurrogateSolver& solver = {}) {
    DisorderMatrix jmat = sample_surrogate_disorder(kernel, n, seed);
    PairWeights pw = surrogate_weights(kernel, n, c, jmat);
    CutResult r = solver.kind == SurrogateSolver::exhaustive
                      ? weighted_maxcut_exhaustive(pw, kappa, nullptr, solver.budget)
                      : weighted_maxcut_localsearch(pw, kappa, solver.restarts, seed);
    return r.value / (2.0 * n);
}

// Replica-averaged estimator; fn(replica_index) must be deterministic.
template <typename Fn>
Estimate replica_estimate(int replicas, Fn&& fn) {
    RunningStat stat;
    for (int r = 0; r < replicas; ++r) stat.add(fn(r));
    return {stat.mean(), stat.stderror(), stat.count()};
}

}  // namespace potts
