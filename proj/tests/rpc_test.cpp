#include <gtest/gtest.h>

#include <cmath>

#include "potts/quad.hpp"
#include "potts/rpc.hpp"
#include "potts/stats.hpp"

using namespace potts;

namespace {

// test-side oracle for E (sum_k exp(z_k + lam_k))^{x} with independent
// z_k ~ N(0, var_k): plain tensor midpoint quadrature on a wide box
double tilted_moment_2d(double x, double var0, double var1, double lam0, double lam1) {
    int cells = 400;
    double lo = -8, hi = 8;
    double h = (hi - lo) / cells;
    double s = 0.0;
    for (int a = 0; a < cells; ++a)
        for (int b = 0; b < cells; ++b) {
            double u = lo + (a + 0.5) * h, v = lo + (b + 0.5) * h;
            const double two_pi = 6.283185307179586;
            double z0 = u * std::sqrt(var0), z1 = v * std::sqrt(var1);
            double w = std::exp(-0.5 * (u * u + v * v)) / two_pi;
            s += w * std::pow(std::exp(z0 + lam0) + std::exp(z1 + lam1), x) * h * h;
        }
    return s;
}

}  // namespace

TEST(Cascade, SpecValidation) {
    CascadeSpec bad1{1, {0.5, 0.9}, 256};
    EXPECT_THROW(bad1.validate(), error);  // x_r != 1
    CascadeSpec bad2{2, {0.7, 0.3, 1.0}, 256};
    EXPECT_THROW(bad2.validate(), error);  // not increasing
    CascadeSpec bad3{1, {0.5, 1.0}, 1};
    EXPECT_THROW(bad3.validate(), error);  // truncation too small
    CascadeSpec ok{2, {0.3, 0.7, 1.0}, 64};
    EXPECT_NO_THROW(ok.validate());
}

TEST(Cascade, WeightsNormalizedAndDecreasingAtoms) {
    CascadeSpec spec{2, {0.4, 0.7, 1.0}, 32};
    auto cs = sample_cascade(spec, 11);
    double total = 0.0;
    for (double w : cs.weights) {
        EXPECT_GE(w, 0.0);
        total += w;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (int n = 1; n < 32; ++n)
        EXPECT_GT(cs.log_atoms[0][n - 1], cs.log_atoms[0][n]);
}

TEST(Cascade, SecondMomentIdentity) {
    // E sum_a v_a^2 = 1 - x0 at depth 1
    CascadeSpec spec{1, {0.5, 1.0}, 512};
    RunningStat st;
    for (int rep = 0; rep < 3000; ++rep) {
        auto cs = sample_cascade(spec, 1000 + rep);
        double s2 = 0;
        for (double w : cs.weights) s2 += w * w;
        st.add(s2);
    }
    EXPECT_NEAR(st.mean(), 0.5, 3 * st.stderror());
}

TEST(Cascade, OverlapLevelsAtDepthTwo) {
    // P(leaves share a depth-1 ancestor) = 1 - x0; P(same leaf) -> 1 - x1
    CascadeSpec spec{2, {0.35, 0.6, 1.0}, 256};
    RunningStat leaf, branch;
    for (int rep = 0; rep < 1500; ++rep) {
        auto cs = sample_cascade(spec, 4000 + rep);
        double s2 = 0;
        std::vector<double> bmass(spec.truncation, 0.0);
        for (size_t i = 0; i < cs.weights.size(); ++i) {
            s2 += cs.weights[i] * cs.weights[i];
            bmass[i / spec.truncation] += cs.weights[i];
        }
        double b2 = 0;
        for (double b : bmass) b2 += b * b;
        leaf.add(s2);
        branch.add(b2);
    }
    EXPECT_NEAR(branch.mean(), 1 - 0.35, 3 * branch.stderror());
    // the x1 = 0.6 level converges in truncation like T^{-2/3}; allow its bias
    EXPECT_NEAR(leaf.mean(), 1 - 0.6, 3 * leaf.stderror() + 0.02);
}

TEST(Cascade, TruncationStability) {
    // leading weight mean moves by < 1% between truncation 200 and 400
    RunningStat lead200, lead400;
    for (int rep = 0; rep < 2000; ++rep) {
        CascadeSpec a{1, {0.5, 1.0}, 200};
        CascadeSpec b{1, {0.5, 1.0}, 400};
        auto ca = sample_cascade(a, 9000 + rep);
        auto cb = sample_cascade(b, 19000 + rep);
        lead200.add(*std::max_element(ca.weights.begin(), ca.weights.end()));
        lead400.add(*std::max_element(cb.weights.begin(), cb.weights.end()));
    }
    EXPECT_LT(std::abs(lead200.mean() - lead400.mean()) / lead400.mean(), 0.01);
}

TEST(Cascade, ConstantPayoffIsExact) {
    CascadeSpec spec{2, {0.3, 0.7, 1.0}, 64};
    std::vector<Mat> covs = {Mat(1, {0.5}), Mat(1, {0.25})};
    auto payoff = [](std::span<const double>) { return 3.25; };
    auto est = cascade_log_sum(spec, covs, payoff, 50, 5);
    EXPECT_NEAR(est.mean, 3.25, 1e-12);
    EXPECT_NEAR(est.stderr_, 0.0, 1e-12);
}

TEST(Cascade, DepthOneIdentityGaussianPayoff) {
    // E log sum v e^{W} = (1/x0) log E e^{x0 W}; W Gaussian: x0 * var / 2
    double x0 = 0.45, var = 0.8;
    CascadeSpec spec{1, {x0, 1.0}, 512};
    std::vector<Mat> covs = {Mat(1, {var})};
    auto payoff = [](std::span<const double> z) { return z[0]; };
    auto est = cascade_log_sum(spec, covs, payoff, 3000, 17);
    EXPECT_NEAR(est.mean, x0 * var / 2.0, 3 * est.stderr_);
}

TEST(Cascade, DepthOneIdentityLogSumExpPayoff) {
    double x0 = 0.5;
    double lam0 = 0.2, lam1 = -0.1;
    Mat cov(2);
    cov(0, 0) = 0.9;
    cov(1, 1) = 0.5;  // independent coordinates keep the oracle a product grid
    CascadeSpec spec{1, {x0, 1.0}, 512};
    auto payoff = [&](std::span<const double> z) {
        return std::log(std::exp(z[0] + lam0) + std::exp(z[1] + lam1));
    };
    auto est = cascade_log_sum(spec, {cov}, payoff, 3000, 23);
    double oracle = std::log(tilted_moment_2d(x0, 0.9, 0.5, lam0, lam1)) / x0;
    EXPECT_NEAR(est.mean, oracle, 3 * est.stderr_);
}

TEST(Cascade, DegenerateCovarianceRejected) {
    CascadeSpec spec{1, {0.5, 1.0}, 64};
    Mat notpsd(2, {1, 2, 2, 1});
    auto payoff = [](std::span<const double> z) { return z[0]; };
    EXPECT_THROW(cascade_log_sum(spec, {notpsd}, payoff, 100, 1), degenerate_covariance);
}

TEST(Cascade, SubtreeExchangeability) {
    // swapping the child families of the first two depth-1 atoms leaves the
    // law of the leading leaf weight unchanged (KS on 10^3 replicas)
    CascadeSpec spec{2, {0.4, 0.7, 1.0}, 64};
    std::vector<double> plain, swapped;
    for (int rep = 0; rep < 1000; ++rep) {
        auto cs = sample_cascade(spec, 60000 + rep);
        plain.push_back(*std::max_element(cs.weights.begin(), cs.weights.end()));
        // rebuild leaf weights with subtree 0 and 1 exchanged
        auto atoms1 = cs.log_atoms[1];
        for (int m = 0; m < 64; ++m) std::swap(atoms1[m], atoms1[64 + m]);
        std::vector<double> logw(cs.weights.size());
        double mx = -1e300;
        for (size_t leaf = 0; leaf < logw.size(); ++leaf) {
            logw[leaf] = cs.log_atoms[0][leaf / 64] + atoms1[leaf];
            mx = std::max(mx, logw[leaf]);
        }
        double z = 0;
        for (double& w : logw) z += (w = std::exp(w - mx));
        swapped.push_back(*std::max_element(logw.begin(), logw.end()) / z);
    }
    EXPECT_GT(ks_two_sample_p(plain, swapped), 0.01);
}

TEST(YTerm, ClosedFormCases) {
    // constant Q sequence: zero
    std::vector<double> x = {0.3, 0.7, 1.0};
    Mat d05 = Mat::diag(std::vector<double>{0.5, 0.5});
    std::vector<std::vector<Mat>> constant_q = {{Mat(2), d05, d05}};
    // Q_0 = 0 jumps once then stays: only the first increment counts
    double v = y_term_closed_form(x, constant_q, {1.0}, Mat(1, {1.0}));
    EXPECT_NEAR(v, 0.5 * 0.3 * 0.5, 1e-12);
    std::vector<std::vector<Mat>> frozen = {{d05, d05, d05}};
    EXPECT_NEAR(y_term_closed_form(x, frozen, {1.0}, Mat(1, {1.0})), 0.0, 1e-12);

    // r=1 single species, Q1 = D: (1/2) x0 Delta^2 sum d_k^2
    std::vector<double> d = {0.3, 0.7};
    std::vector<std::vector<Mat>> q1 = {{Mat(2), Mat::diag(d)}};
    double want = 0.5 * 0.25 * 1.7 * (0.09 + 0.49);
    EXPECT_NEAR(y_term_closed_form({0.25, 1.0}, q1, {1.0}, Mat(1, {1.7})), want, 1e-12);

    // non-monotone Q rejected
    Mat big = Mat::diag(std::vector<double>{0.9, 0.9});
    std::vector<std::vector<Mat>> bad = {{Mat(2), big, d05}};
    EXPECT_THROW(y_term_closed_form(x, bad, {1.0}, Mat(1, {1.0})), non_monotone_q);
}

TEST(YTerm, McMatchesClosedForm) {
    std::vector<double> x = {0.35, 0.7, 1.0};
    Mat q1(2);
    q1(0, 0) = 0.2;
    q1(1, 1) = 0.3;
    q1(0, 1) = q1(1, 0) = 0.05;
    std::vector<std::vector<Mat>> q = {{Mat(2), q1, Mat::diag(std::vector<double>{0.5, 0.5})}};
    CascadeSpec spec{2, x, 256};
    double cf = y_term_closed_form(spec, q, {1.0}, Mat(1, {1.3}));
    auto est = y_term_mc(spec, q, {1.0}, Mat(1, {1.3}), 1200, 77);
    EXPECT_NEAR(est.mean, cf, 3 * est.stderr_);
}
