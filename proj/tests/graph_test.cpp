#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "potts/graph.hpp"
#include "potts/stats.hpp"

using namespace potts;

TEST(Species, PartitionExamples) {
    auto s1 = species_partition(BlockSpec::from_boundaries({0.0, 0.5, 1.0}), 10);
    EXPECT_EQ(s1.counts, (std::vector<int>{5, 5}));
    auto s2 = species_partition(BlockSpec::from_boundaries({0.0, 0.3, 1.0}), 10);
    EXPECT_EQ(s2.counts, (std::vector<int>{3, 7}));
    auto s3 = species_partition(BlockSpec::from_boundaries({0.0, 1.0}), 7);
    EXPECT_EQ(s3.counts, (std::vector<int>{7}));
    EXPECT_NEAR(s3.rho_n[0], 1.0, 1e-12);
}

TEST(Species, ProportionConvergenceRate) {
    auto spec = BlockSpec::from_boundaries({0.0, 0.37, 0.81, 1.0});
    for (int n : {11, 53, 200}) {
        auto s = species_partition(spec, n);
        EXPECT_EQ(s.counts[0] + s.counts[1] + s.counts[2], n);
        for (int k = 0; k < 3; ++k)
            EXPECT_LE(std::abs(s.rho_n[k] - spec.rho[k]), 3.0 / n + 1e-12);
    }
}

TEST(Graph, SampleEdgeCases) {
    auto one = block_kernel_new({0, 1}, Mat(1, {1.0}));
    EXPECT_EQ(sample_graph(one, 30, 0.0, 5).edge_count(), 0u);
    // c = N clamps every probability at 1: complete graph
    Graph g = sample_graph(one, 12, 12.0, 5);
    EXPECT_EQ(g.edge_count(), 12u * 11 / 2);
}

TEST(Graph, BinomialEdgeCount) {
    auto one = block_kernel_new({0, 1}, Mat(1, {1.0}));
    int n = 1000;
    double c = 4.0;
    Graph g = sample_graph(one, n, c, 123);
    double pairs = n * (n - 1) / 2.0;
    double p = c / n;
    double mean = pairs * p;
    double sd = std::sqrt(pairs * p * (1 - p));
    EXPECT_NEAR(double(g.edge_count()), mean, 3 * sd);
}

TEST(Graph, BitReproducible) {
    auto k = dubins_kernel();
    Graph a = sample_graph(k, 80, 2.0, 99);
    Graph b = sample_graph(k, 80, 2.0, 99);
    Graph c = sample_graph(k, 80, 2.0, 100);
    EXPECT_EQ(a.edges, b.edges);
    EXPECT_NE(a.edges, c.edges);
}

TEST(Graph, CoupledIdenticalAndEmpty) {
    auto k = dubins_kernel();
    auto [a, b] = sample_coupled(k, k, 60, 2.0, 7);
    EXPECT_EQ(a.edges, b.edges);
    auto zero = block_kernel_new({0, 1}, Mat(1, {0.0}));
    auto [z, d] = sample_coupled(zero, k, 60, 2.0, 7);
    EXPECT_EQ(z.edge_count(), 0u);
    EXPECT_GT(d.edge_count(), 0u);
}

TEST(Graph, CoupledDisagreementRate) {
    auto ka = dubins_kernel();
    auto kb = coarsen(ka, 2);
    int n = 500;
    double c = 2.0;
    // exact expected number of disagreeing pairs
    double expected = 0.0;
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) {
            double pa = std::min(c * block_average(ka, n, i, j) / n, 1.0);
            double pb = std::min(c * block_average(kb, n, i, j) / n, 1.0);
            expected += std::abs(pa - pb);
        }
    RunningStat disagreements;
    for (int rep = 0; rep < 40; ++rep) {
        auto [a, b] = sample_coupled(ka, kb, n, c, 1700 + rep);
        std::set<std::pair<int, int>> ea(a.edges.begin(), a.edges.end());
        std::set<std::pair<int, int>> eb(b.edges.begin(), b.edges.end());
        int diff = 0;
        for (auto& e : ea) diff += !eb.count(e);
        for (auto& e : eb) diff += !ea.count(e);
        disagreements.add(double(diff));
    }
    EXPECT_NEAR(disagreements.mean(), expected, 3 * disagreements.stderror() + 1e-9);
}

TEST(Graph, CoupledMarginalsMatchSampler) {
    // chi-square on edge indicators for a 5-vertex instance
    auto ka = dubins_kernel();
    auto kb = coarsen(ka, 2);
    int n = 5;
    double c = 1.0;
    int reps = 20000;
    std::map<std::pair<int, int>, int> counts;
    for (int rep = 0; rep < reps; ++rep) {
        auto [a, b] = sample_coupled(ka, kb, n, c, 31000 + rep);
        for (auto& e : a.edges) counts[e]++;
    }
    double stat = 0.0;
    int df = 0;
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) {
            double p = std::min(c * block_average(ka, n, i, j) / n, 1.0);
            double expect = reps * p;
            double var = reps * p * (1 - p);
            int obs = counts[{i - 1, j - 1}];
            stat += (obs - expect) * (obs - expect) / var;
            ++df;
        }
    EXPECT_GT(chi2_sf(stat, df), 1e-3);
}

TEST(Graph, DegreeConcentration) {
    auto k = dubins_kernel();
    int n = 50;
    double c = 3.0;
    for (int vertex : {0, 25, 49}) {
        double expect = 0.0;
        for (int j = 1; j <= n; ++j) {
            if (j == vertex + 1) continue;
            expect += std::min(c * block_average(k, n, vertex + 1, j) / n, 1.0);
        }
        RunningStat deg;
        for (int rep = 0; rep < 1500; ++rep) {
            Graph g = sample_graph(k, n, c, 500000 + rep);
            deg.add(double(g.adj[vertex].size()));
        }
        EXPECT_NEAR(deg.mean(), expect, 3 * deg.stderror());
    }
}

TEST(Graph, ExpectedEdges) {
    auto one = block_kernel_new({0, 1}, Mat(1, {1.0}));
    EXPECT_EQ(expected_edges(one, 50, 0.0), 0.0);
    EXPECT_NEAR(expected_edges(one, 100, 4.0), 198.0, 1e-9);
    // Dubins at N=4: six exactly integrated cell probabilities
    auto k = dubins_kernel();
    double expect = 0.0;
    for (int i = 1; i <= 4; ++i)
        for (int j = i + 1; j <= 4; ++j)
            expect += std::min(block_average(k, 4, i, j) / 4.0, 1.0);
    EXPECT_NEAR(expected_edges(k, 4, 1.0), expect, 1e-12);
    // oracle for one off-diagonal cell: plain grid integration
    double cell = 0.0;
    int cells = 1200;
    double h = 0.25 / cells;
    for (int a = 0; a < cells; ++a)
        for (int b = 0; b < cells; ++b) {
            double x = 0.25 + (a + 0.5) * h, y = 0.5 + (b + 0.5) * h;
            cell += 1.0 / std::max(x, y) * h * h;
        }
    EXPECT_NEAR(block_average(k, 4, 2, 3), 16.0 * cell, 1e-6);
}

TEST(Graph, EdgelistRoundTrip) {
    Graph g = make_graph(4, {{0, 1}, {1, 2}, {0, 3}});
    std::stringstream ss;
    write_edgelist(g, ss);
    EXPECT_EQ(ss.str(), "4 3\n1 2\n1 4\n2 3\n");
    Graph h = read_edgelist(ss);
    EXPECT_EQ(h.n, g.n);
    EXPECT_EQ(h.edges, g.edges);
    std::stringstream bad("3 1\n1 9\n");
    EXPECT_THROW(read_edgelist(bad), error);
}

TEST(Graph, MakeGraphNormalizes) {
    Graph g = make_graph(3, {{1, 0}, {0, 1}, {2, 2}, {1, 2}});
    EXPECT_EQ(g.edges, (std::vector<std::pair<int, int>>{{0, 1}, {1, 2}}));
    EXPECT_EQ(g.adj[1].size(), 2u);
}
