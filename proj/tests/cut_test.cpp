#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "potts/cut.hpp"
#include "potts/rng.hpp"

using namespace potts;

namespace {

Graph complete(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return make_graph(n, std::move(e));
}

Graph random_graph(int n, double p, uint64_t seed) {
    Rng rng(seed);
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.u01() < p) e.emplace_back(i, j);
    return make_graph(n, std::move(e));
}

// test-side oracle: filter the full enumeration by constraint membership
double brute_force_constrained(const Graph& g, int kappa, const ProportionConstraint& c) {
    std::vector<int> sigma(g.n, 0);
    double best = -1;
    for (;;) {
        if (detail::satisfies(sigma, c, kappa)) best = std::max(best, double(cut_value(g, sigma)));
        int i = g.n - 1;
        while (i >= 0 && ++sigma[i] == kappa) sigma[i--] = 0;
        if (i < 0) break;
    }
    return best;
}

}  // namespace

TEST(Cut, Value) {
    Graph tri = complete(3);
    EXPECT_EQ(cut_value(tri, {0, 0, 1}), 2);
    EXPECT_EQ(cut_value(tri, {0, 1, 2}), 3);
    Graph empty = make_graph(4, {});
    EXPECT_EQ(cut_value(empty, {0, 1, 0, 1}), 0);
    EXPECT_THROW(cut_value(tri, {0, 1}), length_mismatch);
}

TEST(Cut, ExhaustiveFixtures) {
    EXPECT_EQ(maxcut_exhaustive(complete(3), 2).value, 2.0);
    EXPECT_EQ(maxcut_exhaustive(complete(4), 3).value, 5.0);
    Graph c5 = make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
    EXPECT_EQ(maxcut_exhaustive(c5, 2).value, 4.0);
    EXPECT_THROW(maxcut_exhaustive(complete(40), 3), budget_exceeded);
}

TEST(Cut, ExhaustiveCanonicalTieBreak) {
    Graph tri = complete(3);
    auto r = maxcut_exhaustive(tri, 2);
    // sigma_1 fixed to the first color; lexicographically smallest maximizer
    EXPECT_EQ(r.assignment, (std::vector<int>{0, 0, 1}));
}

TEST(Cut, LocalSearchMatchesExhaustive) {
    int mismatches = 0;
    for (int i = 0; i < 25; ++i) {
        int n = 10 + i % 3;
        int kappa = 2 + i % 2;
        Graph g = random_graph(n, 0.5, 40 + i);
        auto exact = maxcut_exhaustive(g, kappa);
        auto ls = maxcut_localsearch(g, kappa, 50, 900 + i);
        EXPECT_LE(ls.value, exact.value);
        mismatches += ls.value != exact.value;
    }
    EXPECT_EQ(mismatches, 0);
}

TEST(Cut, BalancedCompleteGraph) {
    // K9 at kappa=3: balanced tripartition cuts 36 - 3*3 = 27
    auto r = maxcut_localsearch(complete(9), 3, 50, 5);
    EXPECT_EQ(r.value, 27.0);
    EXPECT_EQ(maxcut_exhaustive(complete(9), 3).value, 27.0);
}

TEST(Cut, MonotoneInRestartsAndKappa) {
    Graph g = random_graph(14, 0.4, 7);
    double prev = -1;
    for (int restarts : {1, 3, 10, 30}) {
        double v = maxcut_localsearch(g, 2, restarts, 77).value;
        EXPECT_GE(v, prev);
        prev = v;
    }
    for (int i = 0; i < 5; ++i) {
        Graph h = random_graph(11, 0.5, 200 + i);
        EXPECT_GE(maxcut_exhaustive(h, 3).value, maxcut_exhaustive(h, 2).value);
    }
}

TEST(Cut, LabelPermutationSymmetry) {
    Graph g = random_graph(12, 0.5, 11);
    std::vector<int> sigma = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2};
    std::vector<int> perm = {2, 0, 1};
    std::vector<int> permuted(sigma.size());
    for (size_t i = 0; i < sigma.size(); ++i) permuted[i] = perm[sigma[i]];
    EXPECT_EQ(cut_value(g, sigma), cut_value(g, permuted));
}

TEST(Cut, EmpiricalProportions) {
    SpeciesStructure one = single_species(4);
    auto d = empirical_proportions({0, 0, 1, 1}, one, 2);
    EXPECT_NEAR(d[0][0], 0.5, 1e-12);
    EXPECT_NEAR(d[0][1], 0.5, 1e-12);
    auto all1 = empirical_proportions({0, 0, 0, 0}, one, 3);
    EXPECT_EQ(all1[0], (std::vector<double>{1, 0, 0}));
    SpeciesStructure two = species_partition(BlockSpec::from_boundaries({0, 0.5, 1}), 4);
    auto d2 = empirical_proportions({0, 1, 1, 1}, two, 2);
    EXPECT_EQ(d2[0], (std::vector<double>{0.5, 0.5}));
    EXPECT_EQ(d2[1], (std::vector<double>{0.0, 1.0}));
}

TEST(Cut, ConstrainedExhaustiveMatchesBruteForce) {
    for (int i = 0; i < 6; ++i) {
        Graph g = random_graph(8, 0.5, 300 + i);
        ProportionConstraint c;
        c.species = species_partition(BlockSpec::from_boundaries({0, 0.5, 1}), 8);
        c.d = {{0.5, 0.5}, {0.25, 0.75}};
        c.epsilon = (i % 2) ? 0.2 : 0.0;
        auto r = maxcut_exhaustive(g, 2, &c);
        EXPECT_EQ(r.value, brute_force_constrained(g, 2, c));
        EXPECT_LE(r.value, maxcut_exhaustive(g, 2).value);
    }
}

TEST(Cut, ConstrainedLocalSearchKeepsCounts) {
    Graph g = random_graph(12, 0.5, 90);
    ProportionConstraint c;
    c.species = species_partition(BlockSpec::from_boundaries({0, 0.5, 1}), 12);
    c.d = {{1.0 / 3, 2.0 / 3}, {0.5, 0.5}};
    c.epsilon = 0.0;
    auto counts = feasible_counts(c.d, c.species);
    auto r = maxcut_localsearch(g, 2, 50, 17, &c);
    std::vector<std::vector<int>> got(2, std::vector<int>(2, 0));
    for (int i = 0; i < 12; ++i) got[c.species.assignment[i]][r.assignment[i]]++;
    EXPECT_EQ(got, counts);
    EXPECT_EQ(r.value, brute_force_constrained(g, 2, c));
}

TEST(Cut, EpsilonBandMembership) {
    Graph g = random_graph(10, 0.5, 91);
    ProportionConstraint c;
    c.species = single_species(10);
    c.d = {{0.5, 0.5}};
    c.epsilon = 0.15;
    auto r = maxcut_localsearch(g, 2, 50, 5, &c);
    EXPECT_TRUE(detail::satisfies(r.assignment, c, 2));
    EXPECT_EQ(r.value, brute_force_constrained(g, 2, c));
}

TEST(Cut, EmptyConstraintSet) {
    Graph g = complete(4);
    ProportionConstraint c;
    c.species = single_species(4);
    c.d = {{0.5, 0.5}};
    c.epsilon = 0.0;
    // impossible window: lo > hi after forcing both colors to 3 of 4 slots
    c.d = {{0.74, 0.26}};
    c.epsilon = 0.01;  // requires count in [2.92,3] and [0.99,1.08] -> {3} and {1}, feasible
    EXPECT_NO_THROW(maxcut_exhaustive(g, 2, &c));
    c.epsilon = 0.005;  // [2.94,2.98] -> empty integer window
    EXPECT_THROW(maxcut_exhaustive(g, 2, &c), empty_constraint_set);
}

TEST(Cut, WeightedSolverAgreesOnGraphs) {
    Graph g = random_graph(10, 0.6, 55);
    auto w = PairWeights::from_graph(g);
    EXPECT_EQ(weighted_maxcut_exhaustive(w, 2).value, maxcut_exhaustive(g, 2).value);
    std::vector<int> sigma(g.n);
    for (int i = 0; i < g.n; ++i) sigma[i] = i % 2;
    EXPECT_EQ(w.cut_value(sigma), double(cut_value(g, sigma)));
}
