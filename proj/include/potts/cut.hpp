#pragma once

// Max kappa-cut: exact enumeration at small N and steepest-ascent local
// search beyond, both on plain graphs and on real-valued pair weights (the
// Gaussian surrogate reuses the weighted path).  Optional proportion
// constraints restrict the search to configurations whose per-species color
// counts lie in the admissible window.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "potts/constraints.hpp"
#include "potts/errors.hpp"
#include "potts/graph.hpp"
#include "potts/rng.hpp"

namespace potts {

struct PairWeights {
    int n = 0;
    std::vector<std::vector<std::pair<int, double>>> adj;  // symmetric neighbor lists

    static PairWeights from_graph(const Graph& g) {
        PairWeights w;
        w.n = g.n;
        w.adj.resize(g.n);
        for (auto [i, j] : g.edges) {
            w.adj[i].emplace_back(j, 1.0);
            w.adj[j].emplace_back(i, 1.0);
        }
        return w;
    }

    // dense symmetric matrix, zero diagonal
    static PairWeights from_dense(int n, const std::vector<double>& m) {
        PairWeights w;
        w.n = n;
        w.adj.resize(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (j != i && m[size_t(i) * n + j] != 0.0)
                    w.adj[i].emplace_back(j, m[size_t(i) * n + j]);
        return w;
    }

    double cut_value(const std::vector<int>& sigma) const {
        double v = 0.0;
        for (int i = 0; i < n; ++i)
            for (auto [j, wij] : adj[i])
                if (j > i && sigma[i] != sigma[j]) v += wij;
        return v;
    }
};

inline long long cut_value(const Graph& g, const std::vector<int>& sigma) {
    if (int(sigma.size()) != g.n) throw length_mismatch("assignment length != vertex count");
    long long v = 0;
    for (auto [i, j] : g.edges) v += sigma[i] != sigma[j];
    return v;
}

struct CutResult {
    double value = 0.0;
    std::vector<int> assignment;  // colors 0..kappa-1
};

namespace detail {

inline void check_enumeration_budget(int n, int kappa, long long budget) {
    long double states = 1.0L;
    for (int i = 0; i < n; ++i) {
        states *= kappa;
        if (states > (long double)budget)
            throw budget_exceeded("kappa^N exceeds the enumeration budget");
    }
}

// Exhaustive DFS over assignments in lexicographic order; strict improvement
// keeps the first (lexicographically smallest) maximizer.
class CutEnumerator {
public:
    CutEnumerator(const PairWeights& w, int kappa, const ProportionConstraint* constraint)
        : w_(w), kappa_(kappa), constraint_(constraint) {
        sigma_.assign(w.n, -1);
        if (constraint_) {
            bounds_ = count_bounds(*constraint_);
            ensure_nonempty(bounds_, constraint_->species);
            used_.assign(constraint_->species.species(), std::vector<int>(kappa, 0));
            remaining_ = constraint_->species.counts;
        }
    }

    CutResult run() {
        found_ = false;
        best_ = -std::numeric_limits<double>::infinity();
        dfs(0, 0.0);
        if (!found_) throw empty_constraint_set("constraint admits no configuration");
        return {best_, best_sigma_};
    }

private:
    void dfs(int i, double acc) {
        if (i == w_.n) {
            if (acc > best_) {
                best_ = acc;
                best_sigma_ = sigma_;
                found_ = true;
            }
            return;
        }
        int s = constraint_ ? constraint_->species.assignment[i] : 0;
        // label symmetry: without constraints the first vertex keeps color 0
        int kmax = (!constraint_ && i == 0) ? 1 : kappa_;
        for (int k = 0; k < kmax; ++k) {
            if (constraint_) {
                if (used_[s][k] + 1 > bounds_.hi[s][k]) continue;
                used_[s][k]++;
                remaining_[s]--;
                if (species_viable(s)) {
                    sigma_[i] = k;
                    dfs(i + 1, acc + gain(i, k));
                }
                used_[s][k]--;
                remaining_[s]++;
            } else {
                sigma_[i] = k;
                dfs(i + 1, acc + gain(i, k));
            }
        }
        sigma_[i] = -1;
    }

    bool species_viable(int s) const {
        int deficit = 0;
        for (int k = 0; k < kappa_; ++k) deficit += std::max(0, bounds_.lo[s][k] - used_[s][k]);
        return deficit <= remaining_[s];
    }

    double gain(int i, int k) const {
        double g = 0.0;
        for (auto [j, wij] : w_.adj[i])
            if (j < i && sigma_[j] != k) g += wij;
        return g;
    }

    const PairWeights& w_;
    int kappa_;
    const ProportionConstraint* constraint_;
    std::vector<int> sigma_, best_sigma_;
    std::vector<std::vector<int>> used_;
    std::vector<int> remaining_;
    CountBounds bounds_;
    double best_ = 0.0;
    bool found_ = false;
};

// Steepest-ascent local search state with per-vertex color gain tables.
class LocalSearch {
public:
    LocalSearch(const PairWeights& w, int kappa, const ProportionConstraint* constraint)
        : w_(w), kappa_(kappa), constraint_(constraint) {
        if (constraint_) {
            bounds_ = count_bounds(*constraint_);
            ensure_nonempty(bounds_, constraint_->species);
            init_counts_ = representative_counts(*constraint_);
        }
    }

    CutResult run(Rng& rng) {
        init(rng);
        if (constraint_ && bounds_.exact)
            improve_swaps();
        else
            improve_recolors();
        return {value_, sigma_};
    }

private:
    void init(Rng& rng) {
        sigma_.assign(w_.n, 0);
        if (!constraint_) {
            for (int i = 0; i < w_.n; ++i) sigma_[i] = int(rng.below(kappa_));
        } else {
            const auto& sp = constraint_->species;
            std::vector<std::vector<int>> members(sp.species());
            for (int i = 0; i < w_.n; ++i) members[sp.assignment[i]].push_back(i);
            for (int s = 0; s < sp.species(); ++s) {
                auto& m = members[s];
                for (size_t i = m.size(); i > 1; --i)
                    std::swap(m[i - 1], m[rng.below(i)]);
                size_t pos = 0;
                for (int k = 0; k < kappa_; ++k)
                    for (int c = 0; c < init_counts_[s][k]; ++c) sigma_[m[pos++]] = k;
            }
            counts_ = init_counts_;
        }
        gains_.assign(size_t(w_.n) * kappa_, 0.0);
        for (int i = 0; i < w_.n; ++i)
            for (auto [j, wij] : w_.adj[i]) gains_[size_t(i) * kappa_ + sigma_[j]] += wij;
        value_ = w_.cut_value(sigma_);
    }

    // weight from i into color class k
    double load(int i, int k) const { return gains_[size_t(i) * kappa_ + k]; }

    void apply_recolor(int i, int to) {
        int from = sigma_[i];
        for (auto [j, wij] : w_.adj[i]) {
            gains_[size_t(j) * kappa_ + from] -= wij;
            gains_[size_t(j) * kappa_ + to] += wij;
        }
        sigma_[i] = to;
        if (constraint_) {
            int s = constraint_->species.assignment[i];
            counts_[s][from]--;
            counts_[s][to]++;
        }
    }

    bool recolor_admissible(int i, int to) const {
        if (!constraint_) return true;
        int s = constraint_->species.assignment[i];
        int from = sigma_[i];
        return counts_[s][from] - 1 >= bounds_.lo[s][from] && counts_[s][to] + 1 <= bounds_.hi[s][to];
    }

    void improve_recolors() {
        for (;;) {
            double best = 1e-12;
            int bi = -1, bk = -1;
            for (int i = 0; i < w_.n; ++i) {
                double cur = load(i, sigma_[i]);
                for (int k = 0; k < kappa_; ++k) {
                    if (k == sigma_[i]) continue;
                    double g = cur - load(i, k);
                    if (g > best && recolor_admissible(i, k)) {
                        best = g;
                        bi = i;
                        bk = k;
                    }
                }
            }
            if (bi < 0) break;
            apply_recolor(bi, bk);
            value_ += best;
        }
    }

    // exact-count constraints move by swapping two same-species vertices
    void improve_swaps() {
        const auto& sp = constraint_->species;
        std::vector<std::vector<int>> members(sp.species());
        for (int i = 0; i < w_.n; ++i) members[sp.assignment[i]].push_back(i);
        for (;;) {
            double best = 1e-12;
            int bi = -1, bj = -1;
            for (int s = 0; s < sp.species(); ++s) {
                const auto& m = members[s];
                for (size_t a = 0; a < m.size(); ++a)
                    for (size_t b = a + 1; b < m.size(); ++b) {
                        int i = m[a], j = m[b];
                        if (sigma_[i] == sigma_[j]) continue;
                        double g = swap_gain(i, j);
                        if (g > best) {
                            best = g;
                            bi = i;
                            bj = j;
                        }
                    }
            }
            if (bi < 0) break;
            int ci = sigma_[bi], cj = sigma_[bj];
            apply_recolor(bi, cj);
            apply_recolor(bj, ci);
            value_ += best;
        }
    }

    double swap_gain(int i, int j) const {
        int ci = sigma_[i], cj = sigma_[j];
        double g = (load(i, ci) - load(i, cj)) + (load(j, cj) - load(j, ci));
        for (auto [v, wij] : w_.adj[i])
            if (v == j) {
                g += 2.0 * wij;  // the {i,j} edge stays cut after the swap
                break;
            }
        return g;
    }

    const PairWeights& w_;
    int kappa_;
    const ProportionConstraint* constraint_;
    CountBounds bounds_;
    std::vector<std::vector<int>> init_counts_, counts_;
    std::vector<int> sigma_;
    std::vector<double> gains_;
    double value_ = 0.0;
};

inline bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace detail

inline CutResult weighted_maxcut_exhaustive(const PairWeights& w, int kappa,
                                            const ProportionConstraint* constraint = nullptr,
                                            long long budget = 100000000LL) {
    detail::check_enumeration_budget(w.n, kappa, budget);
    detail::CutEnumerator e(w, kappa, constraint);
    return e.run();
}

inline CutResult weighted_maxcut_localsearch(const PairWeights& w, int kappa, int restarts,
                                             uint64_t seed,
                                             const ProportionConstraint* constraint = nullptr) {
    detail::LocalSearch ls(w, kappa, constraint);
    CutResult best;
    best.value = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Rng rng(mix64(seed) + uint64_t(r));
        CutResult cur = ls.run(rng);
        if (cur.value > best.value ||
            (cur.value == best.value && detail::lex_less(cur.assignment, best.assignment)))
            best = std::move(cur);
    }
    return best;
}

inline CutResult maxcut_exhaustive(const Graph& g, int kappa,
                                   const ProportionConstraint* constraint = nullptr,
                                   long long budget = 100000000LL) {
    auto w = PairWeights::from_graph(g);
    return weighted_maxcut_exhaustive(w, kappa, constraint, budget);
}

inline CutResult maxcut_localsearch(const Graph& g, int kappa, int restarts, uint64_t seed,
                                    const ProportionConstraint* constraint = nullptr) {
    auto w = PairWeights::from_graph(g);
    return weighted_maxcut_localsearch(w, kappa, restarts, seed, constraint);
}

}  // namespace potts
