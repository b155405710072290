#pragma once

// Inhomogeneous random graph sampling.  Each unordered pair {i,j} is an
// independent Bernoulli with success probability min{c K~_N(i,j)/N, 1}.  The
// per-pair uniform is keyed by (seed, i, j), so a pair of kernels sampled
// under the same seed is maximally coupled edge by edge:
//   P[graphs disagree on {i,j}] = |p_A - p_B|.

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "potts/errors.hpp"
#include "potts/kernel.hpp"
#include "potts/mat.hpp"
#include "potts/rng.hpp"

namespace potts {

struct Graph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;  // 0-based, i < j, sorted
    std::vector<std::vector<int>> adj;

    void build_adjacency() {
        adj.assign(n, {});
        for (auto [i, j] : edges) {
            adj[i].push_back(j);
            adj[j].push_back(i);
        }
    }
    size_t edge_count() const { return edges.size(); }
};

inline Graph make_graph(int n, std::vector<std::pair<int, int>> edges) {
    Graph g;
    g.n = n;
    for (auto& [i, j] : edges) {
        if (i == j) continue;  // simple graph
        if (i > j) std::swap(i, j);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges.erase(std::remove_if(edges.begin(), edges.end(),
                               [](auto& e) { return e.first == e.second; }),
                edges.end());
    g.edges = std::move(edges);
    g.build_adjacency();
    return g;
}

struct SpeciesStructure {
    std::vector<int> assignment;  // vertex -> species, 0-based
    std::vector<int> counts;      // N_s
    std::vector<double> rho_n;    // N_s / N
    Mat delta2;                   // interaction variances, |S| x |S|

    int n() const { return int(assignment.size()); }
    int species() const { return int(counts.size()); }
};

// Vertex i (1-based) belongs to block s iff (i-1)/N lies in [t_{s-1}, t_s);
// the last block absorbs the boundary at 1.
inline SpeciesStructure species_partition(const BlockSpec& spec, int n, Mat delta2 = Mat()) {
    auto t = spec.boundaries();
    int m = spec.blocks();
    SpeciesStructure out;
    out.assignment.resize(n);
    out.counts.assign(m, 0);
    int s = 0;
    for (int i = 0; i < n; ++i) {
        double x = double(i) / n;
        while (s + 1 < m && x >= t[s + 1]) ++s;
        out.assignment[i] = s;
        out.counts[s]++;
    }
    out.rho_n.resize(m);
    for (int k = 0; k < m; ++k) out.rho_n[k] = double(out.counts[k]) / n;
    out.delta2 = delta2.order() == m ? delta2 : Mat::identity(m);
    return out;
}

inline SpeciesStructure single_species(int n, double delta2 = 1.0) {
    SpeciesStructure s;
    s.assignment.assign(n, 0);
    s.counts = {n};
    s.rho_n = {1.0};
    s.delta2 = Mat(1, {delta2});
    return s;
}

inline double edge_probability(double c, double avg, int n) {
    return std::min(c * avg / n, 1.0);
}

namespace detail {

// cache of K~_N(i,j); block kernels collapse to one value per block pair
struct CellAverages {
    int n;
    bool blockwise = false;
    std::vector<int> block_of;  // vertex -> block (block kernels only)
    Mat block_values;
    std::vector<double> dense;  // row-major upper triangle otherwise

    double operator()(int i, int j) const {  // 0-based
        if (blockwise) return block_values(block_of[i], block_of[j]);
        int a = std::min(i, j), b = std::max(i, j);
        return dense[size_t(a) * n + b];
    }
};

inline CellAverages cell_averages(const Kernel& k, int n) {
    CellAverages c;
    c.n = n;
    if (k.is_block()) {
        const auto& b = k.block();
        // exact averages: integrate K over each vertex cell x block strip
        // (cells need not align with block boundaries)
        int m = int(b.boundaries.size()) - 1;
        bool aligned = true;
        for (int s = 1; s < m && aligned; ++s) {
            double t = b.boundaries[s] * n;
            aligned = std::abs(t - std::round(t)) < 1e-12;
        }
        if (aligned) {
            c.blockwise = true;
            c.block_of.resize(n);
            auto spec = BlockSpec::from_boundaries(b.boundaries);
            auto sp = species_partition(spec, n);
            c.block_of = sp.assignment;
            c.block_values = b.values;
            return c;
        }
    }
    c.dense.resize(size_t(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            c.dense[size_t(i) * n + j] = block_average(k, n, i + 1, j + 1);
    return c;
}

}  // namespace detail

inline Graph sample_graph(const Kernel& k, int n, double c, uint64_t seed) {
    auto avg = detail::cell_averages(k, n);
    Graph g;
    g.n = n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double p = edge_probability(c, avg(i, j), n);
            if (p > 0.0 && pair_u01(seed, i, j) < p) g.edges.emplace_back(i, j);
        }
    g.build_adjacency();
    return g;
}

// Maximal per-edge coupling: both graphs consume the same uniform.
inline std::pair<Graph, Graph> sample_coupled(const Kernel& ka, const Kernel& kb, int n, double c,
                                              uint64_t seed) {
    auto avg_a = detail::cell_averages(ka, n);
    auto avg_b = detail::cell_averages(kb, n);
    Graph ga, gb;
    ga.n = gb.n = n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double u = pair_u01(seed, i, j);
            if (u < edge_probability(c, avg_a(i, j), n)) ga.edges.emplace_back(i, j);
            if (u < edge_probability(c, avg_b(i, j), n)) gb.edges.emplace_back(i, j);
        }
    ga.build_adjacency();
    gb.build_adjacency();
    return {std::move(ga), std::move(gb)};
}

inline double expected_edges(const Kernel& k, int n, double c) {
    auto avg = detail::cell_averages(k, n);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) s += edge_probability(c, avg(i, j), n);
    return s;
}

// Edge-list text format: header "N M", then one 1-based "i j" per line.
inline void write_edgelist(const Graph& g, std::ostream& os) {
    os << g.n << ' ' << g.edges.size() << '\n';
    for (auto [i, j] : g.edges) os << i + 1 << ' ' << j + 1 << '\n';
}

inline void write_edgelist(const Graph& g, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw error("cannot open " + path + " for writing");
    write_edgelist(g, f);
}

inline Graph read_edgelist(std::istream& is) {
    int n = 0;
    size_t m = 0;
    if (!(is >> n >> m)) throw error("bad edge-list header");
    std::vector<std::pair<int, int>> edges;
    edges.reserve(m);
    for (size_t e = 0; e < m; ++e) {
        int i, j;
        if (!(is >> i >> j)) throw error("truncated edge list");
        if (i < 1 || j < 1 || i > n || j > n) throw error("edge endpoint out of range");
        edges.emplace_back(i - 1, j - 1);
    }
    return make_graph(n, std::move(edges));
}

inline Graph read_edgelist(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw error("cannot open " + path);
    return read_edgelist(f);
}

}  // namespace potts
