#pragma once

// Proportion constraints on configurations: the per-species empirical law of
// colors must match a prescribed d, exactly (largest-remainder rounded
// counts) or within a closed eps-interval.

#include <cmath>
#include <vector>

#include "potts/errors.hpp"
#include "potts/graph.hpp"

namespace potts {

struct ProportionConstraint {
    SpeciesStructure species;
    std::vector<std::vector<double>> d;  // [species][color], rows sum to 1
    double epsilon = 0.0;

    int kappa() const { return d.empty() ? 0 : int(d[0].size()); }
};

// Integer color counts per species: floor(N_s d_k) plus largest-remainder
// distribution of what is left.  Ties go to the lowest color, and colors with
// d_k = 0 stay at zero.
inline std::vector<std::vector<int>> feasible_counts(const std::vector<std::vector<double>>& d,
                                                     const SpeciesStructure& species) {
    std::vector<std::vector<int>> counts(d.size());
    for (size_t s = 0; s < d.size(); ++s) {
        int ns = species.counts[s];
        int kappa = int(d[s].size());
        counts[s].resize(kappa);
        std::vector<double> rem(kappa);
        int assigned = 0;
        for (int k = 0; k < kappa; ++k) {
            double target = ns * d[s][k];
            counts[s][k] = int(std::floor(target + 1e-12));
            rem[k] = target - counts[s][k];
            assigned += counts[s][k];
        }
        int left = ns - assigned;
        for (; left > 0; --left) {
            int best = -1;
            for (int k = 0; k < kappa; ++k)
                if (best < 0 || rem[k] > rem[best] + 1e-15) best = k;
            counts[s][best]++;
            rem[best] = -1.0;
        }
    }
    return counts;
}

inline std::vector<std::vector<double>> empirical_proportions(const std::vector<int>& sigma,
                                                              const SpeciesStructure& species,
                                                              int kappa) {
    if (int(sigma.size()) != species.n()) throw length_mismatch("assignment/species size mismatch");
    std::vector<std::vector<double>> d(species.species(), std::vector<double>(kappa, 0.0));
    for (int i = 0; i < species.n(); ++i) d[species.assignment[i]][sigma[i]] += 1.0;
    for (int s = 0; s < species.species(); ++s)
        for (int k = 0; k < kappa; ++k) d[s][k] /= species.counts[s];
    return d;
}

namespace detail {

// Admissible count window [lo, hi] per (species, color) for a given epsilon.
struct CountBounds {
    std::vector<std::vector<int>> lo, hi;
    bool exact = false;  // epsilon == 0: lo == hi == feasible_counts
};

inline CountBounds count_bounds(const ProportionConstraint& c) {
    CountBounds b;
    const auto& sp = c.species;
    if (c.epsilon <= 0.0) {
        b.exact = true;
        b.lo = b.hi = feasible_counts(c.d, sp);
        return b;
    }
    b.lo.resize(c.d.size());
    b.hi.resize(c.d.size());
    for (size_t s = 0; s < c.d.size(); ++s) {
        int ns = sp.counts[s];
        b.lo[s].resize(c.d[s].size());
        b.hi[s].resize(c.d[s].size());
        for (size_t k = 0; k < c.d[s].size(); ++k) {
            b.lo[s][k] = std::max(0, int(std::ceil(ns * (c.d[s][k] - c.epsilon) - 1e-9)));
            b.hi[s][k] = std::min(ns, int(std::floor(ns * (c.d[s][k] + c.epsilon) + 1e-9)));
        }
    }
    return b;
}

inline void ensure_nonempty(const CountBounds& b, const SpeciesStructure& sp) {
    for (size_t s = 0; s < b.lo.size(); ++s) {
        long long lo_sum = 0, hi_sum = 0;
        for (size_t k = 0; k < b.lo[s].size(); ++k) {
            if (b.lo[s][k] > b.hi[s][k])
                throw empty_constraint_set("no admissible count for a (species,color) pair");
            lo_sum += b.lo[s][k];
            hi_sum += b.hi[s][k];
        }
        if (lo_sum > sp.counts[s] || hi_sum < sp.counts[s])
            throw empty_constraint_set("count window cannot realize the species size");
    }
}

// A concrete count table inside the window, summing to N_s per species.
inline std::vector<std::vector<int>> representative_counts(const ProportionConstraint& c) {
    auto b = count_bounds(c);
    ensure_nonempty(b, c.species);
    auto counts = feasible_counts(c.d, c.species);
    for (size_t s = 0; s < counts.size(); ++s) {
        int excess = 0;
        for (size_t k = 0; k < counts[s].size(); ++k) {
            if (counts[s][k] < b.lo[s][k]) {
                excess -= b.lo[s][k] - counts[s][k];
                counts[s][k] = b.lo[s][k];
            } else if (counts[s][k] > b.hi[s][k]) {
                excess += counts[s][k] - b.hi[s][k];
                counts[s][k] = b.hi[s][k];
            }
        }
        for (size_t k = 0; k < counts[s].size() && excess > 0; ++k)
            while (excess > 0 && counts[s][k] < b.hi[s][k]) {
                counts[s][k]++;
                --excess;
            }
        for (size_t k = 0; k < counts[s].size() && excess < 0; ++k)
            while (excess < 0 && counts[s][k] > b.lo[s][k]) {
                counts[s][k]--;
                ++excess;
            }
        if (excess != 0) throw empty_constraint_set("count window infeasible");
    }
    return counts;
}

inline bool satisfies(const std::vector<int>& sigma, const ProportionConstraint& c, int kappa) {
    auto b = count_bounds(c);
    std::vector<std::vector<int>> counts(c.species.species(), std::vector<int>(kappa, 0));
    for (int i = 0; i < c.species.n(); ++i) counts[c.species.assignment[i]][sigma[i]]++;
    for (size_t s = 0; s < counts.size(); ++s)
        for (int k = 0; k < kappa; ++k)
            if (counts[s][k] < b.lo[s][k] || counts[s][k] > b.hi[s][k]) return false;
    return true;
}

}  // namespace detail

}  // namespace potts
