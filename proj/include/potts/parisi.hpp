#pragma once

// The multi-species Potts Parisi functional:
//   P = sum_s rho_s X_0^s - sum_{s,k} rho_s lambda_k^s d_k^s - y_term,
// with X_0^s computed by the backward recursion
//   X_r^s = log sum_k exp(sum_p z_p^s(k) + lambda_k^s),
//   X_k^s = (1/x_k) log E_k exp(x_k X_{k+1}^s),
// where z_p^s are independent Gaussian vectors with covariance
//   C_p^s = 2 sum_t beta^2 Delta^2_{s,t} rho_t (Q_p^t - Q_{p-1}^t).
// Level expectations use tensor Gauss-Hermite quadrature (node count raised
// adaptively with the exponential tilt so heavy beta stays accurate) or
// scrambled quasi-Monte Carlo for kappa > 3 / r > 3.
//
// On top of the evaluator: derivative-free minimization over (x, Q, lambda),
// the beta -> infinity extrapolation of value(beta)/beta, the outer sup over
// proportions, and the assembled Max kappa-cut prediction.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "potts/errors.hpp"
#include "potts/kernel.hpp"
#include "potts/mat.hpp"
#include "potts/optim.hpp"
#include "potts/quad.hpp"
#include "potts/rng.hpp"
#include "potts/rpc.hpp"

namespace potts {

struct ModelSpec {
    int kappa = 2;
    std::vector<double> rho;  // limiting species proportions, sum to 1
    Mat delta2;               // symmetric PSD interaction variances
    double beta = 1.0;        // applied as beta^2 * delta2

    int species() const { return int(rho.size()); }
    double coupling(int s, int t) const { return beta * beta * delta2(s, t); }

    void validate() const {
        if (kappa < 1) throw error("kappa must be positive");
        if (rho.empty() || delta2.order() != species()) throw error("rho/delta2 size mismatch");
        double sum = 0.0;
        for (double r : rho) {
            if (r <= 0.0) throw error("species proportions must be positive");
            sum += r;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw error("species proportions must sum to 1");
        if (!delta2.symmetric(1e-12)) throw non_symmetric("delta2 must be symmetric");
        if (beta < 0.0) throw error("beta must be nonnegative");
    }

    Mat effective_delta2() const {
        Mat m = delta2;
        m *= beta * beta;
        return m;
    }
};

struct ParisiParams {
    int r = 1;
    std::vector<double> x;                    // x_0 .. x_r, x_r = 1
    std::vector<std::vector<Mat>> q;          // [species][0..r], q[s][0]=0, q[s][r]=diag(d^s)
    std::vector<std::vector<double>> lambda;  // [species][color]
};

struct EvalScheme {
    enum Kind { gauss_hermite, quasi_mc } kind = gauss_hermite;
    int nodes = 20;      // Gauss-Hermite nodes per dimension (base)
    int max_nodes = 72;  // ceiling for the adaptive raise
    int samples = 16384; // quasi-MC points per level
    uint64_t seed = 1;   // quasi-MC scramble
};

inline EvalScheme default_scheme(int kappa, int r) {
    EvalScheme s;
    if (kappa > 3 || r > 3) {
        s.kind = EvalScheme::quasi_mc;
        s.samples = r <= 1 ? 16384 : 2048;
    }
    return s;
}

struct LevelCovs {
    std::vector<std::vector<Mat>> cov;     // [species][p-1], p = 1..r
    std::vector<std::vector<Mat>> factor;  // symmetric PSD square roots
};

inline LevelCovs increment_covariances(const ParisiParams& params, const ModelSpec& model) {
    model.validate();
    int ns = model.species();
    LevelCovs lc;
    lc.cov.resize(ns);
    lc.factor.resize(ns);
    for (int s = 0; s < ns; ++s) {
        lc.cov[s].reserve(params.r);
        lc.factor[s].reserve(params.r);
        for (int p = 1; p <= params.r; ++p) {
            Mat c(model.kappa);
            for (int t = 0; t < ns; ++t) {
                double w = 2.0 * model.coupling(s, t) * model.rho[t];
                if (w == 0.0) continue;
                Mat inc = params.q[t][p] - params.q[t][p - 1];
                inc *= w;
                c += inc;
            }
            lc.factor[s].push_back(sqrt_psd(c, 1e-8));
            lc.cov[s].push_back(std::move(c));
        }
    }
    return lc;
}

namespace detail {

inline int needed_gh_nodes(double tilt, int base, int cap) {
    // GH_n reaches |xi| ~ sqrt(4n); keep the exponential tilt well inside
    double m = tilt + 6.0;
    int n = int(std::ceil(m * m / 4.0));
    return std::clamp(n, base, cap);
}

struct LevelRule {
    int pts = 1;
    int kappa = 1;
    std::vector<double> disp;  // pts x kappa displacements
    std::vector<double> logw;  // log weights, normalized
};

inline LevelRule make_level_rule(const Mat& factor, const Mat& cov, double xk,
                                 const EvalScheme& scheme, int level) {
    int kappa = factor.order();
    LevelRule rule;
    rule.kappa = kappa;
    double maxdiag = 0.0;
    for (int k = 0; k < kappa; ++k) maxdiag = std::max(maxdiag, cov(k, k));
    if (maxdiag < 1e-14) {  // degenerate level, nothing to integrate
        rule.pts = 1;
        rule.disp.assign(kappa, 0.0);
        rule.logw = {0.0};
        return rule;
    }
    if (scheme.kind == EvalScheme::gauss_hermite) {
        double tilt = std::clamp(xk, 0.0, 1.0) * std::sqrt(maxdiag);
        int n = needed_gh_nodes(tilt, scheme.nodes, scheme.max_nodes);
        GaussHermite gh = gauss_hermite(n);
        long long pts = 1;
        for (int d = 0; d < kappa; ++d) pts *= n;
        rule.pts = int(pts);
        rule.disp.assign(size_t(rule.pts) * kappa, 0.0);
        rule.logw.resize(rule.pts);
        std::vector<int> idx(kappa, 0);
        std::vector<double> xi(kappa);
        for (int j = 0; j < rule.pts; ++j) {
            double lw = 0.0;
            for (int d = 0; d < kappa; ++d) {
                xi[d] = gh.nodes[idx[d]];
                lw += std::log(gh.weights[idx[d]]);
            }
            rule.logw[j] = lw;
            double* dst = &rule.disp[size_t(j) * kappa];
            for (int k = 0; k < kappa; ++k) {
                double v = 0.0;
                for (int m = 0; m < kappa; ++m) v += factor(k, m) * xi[m];
                dst[k] = v;
            }
            for (int d = kappa - 1; d >= 0; --d) {
                if (++idx[d] < n) break;
                idx[d] = 0;
            }
        }
        return rule;
    }
    // scrambled quasi-MC, equal weights
    ScrambledHalton hal(kappa, scheme.seed * 0x9e3779b97f4a7c15ULL + uint64_t(level) + 1);
    rule.pts = std::max(16, scheme.samples);
    rule.disp.assign(size_t(rule.pts) * kappa, 0.0);
    rule.logw.assign(rule.pts, -std::log(double(rule.pts)));
    for (int j = 0; j < rule.pts; ++j) {
        auto eta = hal.normal_point(uint64_t(j) + 1);
        double* dst = &rule.disp[size_t(j) * kappa];
        for (int k = 0; k < kappa; ++k) {
            double v = 0.0;
            for (int m = 0; m < kappa; ++m) v += factor(k, m) * eta[m];
            dst[k] = v;
        }
    }
    return rule;
}

class RecursionEvaluator {
public:
    RecursionEvaluator(const ParisiParams& params, int s, const LevelCovs& lc,
                       const EvalScheme& scheme)
        : params_(params), kappa_(int(params.lambda[s].size())), lambda_(params.lambda[s]) {
        rules_.reserve(params.r);
        for (int p = 1; p <= params.r; ++p)
            rules_.push_back(make_level_rule(lc.factor[s][p - 1], lc.cov[s][p - 1],
                                             params.x[p - 1], scheme, p));
        zbuf_.assign(params.r + 1, std::vector<double>(kappa_, 0.0));
        vals_.resize(params.r);
        for (int k = 0; k < params.r; ++k) vals_[k].resize(rules_[k].pts);
    }

    double run() { return eval(0); }

private:
    double leaf() const {
        const auto& z = zbuf_[params_.r];
        double m = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < kappa_; ++k) m = std::max(m, z[k] + lambda_[k]);
        double sum = 0.0;
        for (int k = 0; k < kappa_; ++k) sum += std::exp(z[k] + lambda_[k] - m);
        return m + std::log(sum);
    }

    double eval(int k) {
        if (k == params_.r) return leaf();
        const LevelRule& rule = rules_[k];
        auto& vals = vals_[k];
        for (int j = 0; j < rule.pts; ++j) {
            const double* d = &rule.disp[size_t(j) * kappa_];
            for (int c = 0; c < kappa_; ++c) zbuf_[k + 1][c] = zbuf_[k][c] + d[c];
            vals[j] = eval(k + 1);
        }
        double xk = params_.x[k];
        if (xk < 1e-6) {  // x -> 0 limit: plain expectation
            double acc = 0.0;
            for (int j = 0; j < rule.pts; ++j) acc += std::exp(rule.logw[j]) * vals[j];
            return acc;
        }
        double m = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < rule.pts; ++j) m = std::max(m, xk * vals[j] + rule.logw[j]);
        double sum = 0.0;
        for (int j = 0; j < rule.pts; ++j) sum += std::exp(xk * vals[j] + rule.logw[j] - m);
        return (m + std::log(sum)) / xk;
    }

    const ParisiParams& params_;
    int kappa_;
    const std::vector<double>& lambda_;
    std::vector<LevelRule> rules_;
    std::vector<std::vector<double>> zbuf_;
    std::vector<std::vector<double>> vals_;
};

inline void validate_params(const ParisiParams& params, const ModelSpec& model) {
    if (params.r < 1) throw error("r must be at least 1");
    if (int(params.x.size()) != params.r + 1) throw error("x must have r+1 entries");
    if (std::abs(params.x[params.r] - 1.0) > 1e-12) throw error("x_r must equal 1");
    double prev = 0.0;
    for (int i = 0; i <= params.r; ++i) {
        if (params.x[i] < prev - 1e-15) throw error("x must be nondecreasing");
        if (params.x[i] <= 0.0) throw error("x entries must be positive");
        prev = params.x[i];
    }
    if (int(params.q.size()) != model.species() || int(params.lambda.size()) != model.species())
        throw error("params/model species mismatch");
    for (int s = 0; s < model.species(); ++s) {
        if (int(params.q[s].size()) != params.r + 1) throw error("Q must have r+1 levels");
        if (int(params.lambda[s].size()) != model.kappa) throw error("lambda size mismatch");
        for (int k = 0; k < model.kappa; ++k)
            for (int k2 = 0; k2 < model.kappa; ++k2)
                if (std::abs(params.q[s][0](k, k2)) > 1e-12) throw error("Q_0 must vanish");
    }
}

}  // namespace detail

inline double recursion_x0(const ParisiParams& params, const ModelSpec& model, int s,
                           const EvalScheme& scheme) {
    detail::validate_params(params, model);
    LevelCovs lc = increment_covariances(params, model);
    detail::RecursionEvaluator ev(params, s, lc, scheme);
    return ev.run();
}

struct ParisiValue {
    double value = 0.0;
    std::vector<double> x0;  // per species
    double z_term = 0.0;
    double lambda_term = 0.0;
    double y_term = 0.0;
    double err = 0.0;
};

inline ParisiValue functional(const ParisiParams& params, const ModelSpec& model,
                              const std::vector<std::vector<double>>& d, const EvalScheme& scheme,
                              bool with_error = false) {
    detail::validate_params(params, model);
    for (int s = 0; s < model.species(); ++s)
        for (int k = 0; k < model.kappa; ++k)
            for (int k2 = 0; k2 < model.kappa; ++k2) {
                double want = k == k2 ? d[s][k] : 0.0;
                if (std::abs(params.q[s][params.r](k, k2) - want) > 1e-12)
                    throw error("Q_r must equal diag(d)");
            }
    ParisiValue out;
    LevelCovs lc = increment_covariances(params, model);
    out.x0.resize(model.species());
    for (int s = 0; s < model.species(); ++s) {
        detail::RecursionEvaluator ev(params, s, lc, scheme);
        out.x0[s] = ev.run();
        out.z_term += model.rho[s] * out.x0[s];
        for (int k = 0; k < model.kappa; ++k)
            out.lambda_term += model.rho[s] * params.lambda[s][k] * d[s][k];
    }
    out.y_term = y_term_closed_form(params.x, params.q, model.rho, model.effective_delta2());
    out.value = out.z_term - out.lambda_term - out.y_term;
    if (with_error) {
        EvalScheme finer = scheme;
        if (finer.kind == EvalScheme::gauss_hermite) {
            finer.nodes += 8;
            finer.max_nodes += 8;
        } else {
            finer.samples *= 2;
        }
        double v2 = 0.0;
        for (int s = 0; s < model.species(); ++s) {
            detail::RecursionEvaluator ev(params, s, lc, finer);
            v2 += model.rho[s] * ev.run();
        }
        v2 -= out.lambda_term + out.y_term;
        out.err = std::abs(v2 - out.value);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Minimization over (x, Q, lambda) at fixed r.
//
// Q increments are parameterized as L_p L_p^T + delta I with L_p lower
// triangular, then conjugated by diag(d)^{1/2} S^{-1/2} so the increments stay
// PSD and sum exactly to diag(d).  x comes from positive gaps, lambda keeps
// its last color pinned at zero (the functional is invariant under a common
// shift).

struct MinimizeOpts {
    int restarts = 8;
    int max_iter = 0;  // 0: 150 * dimension
    double ftol = 1e-9;
    uint64_t seed = 20240601;
    EvalScheme scheme;
    bool scheme_set = false;
    bool refine = true;  // local refinement pass for the outer sup operations
};

struct MinimizeResult {
    ParisiParams params;
    double value = 0.0;
    bool stalled = false;
    std::vector<double> theta;  // internal coordinates, reusable as a warm start
};

namespace detail {

struct ThetaLayout {
    int r = 1, kappa = 2, species = 1;
    int tril() const { return kappa * (kappa + 1) / 2; }
    int dim() const { return r + species * r * tril() + species * (kappa - 1); }
};

inline Mat transpose(const Mat& m) {
    Mat t(m.order());
    for (int i = 0; i < m.order(); ++i)
        for (int j = 0; j < m.order(); ++j) t(i, j) = m(j, i);
    return t;
}

inline Mat cholesky_psd(const Mat& a) {
    int n = a.order();
    Mat l(n);
    for (int j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (int k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        l(j, j) = std::sqrt(std::max(diag, 0.0));
        for (int i = j + 1; i < n; ++i) {
            if (l(j, j) < 1e-150) {
                l(i, j) = 0.0;
                continue;
            }
            double v = a(i, j);
            for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / l(j, j);
        }
    }
    return l;
}

inline ParisiParams decode_theta(const std::vector<double>& th, const ThetaLayout& lay,
                                 const std::vector<std::vector<double>>& d) {
    ParisiParams p;
    p.r = lay.r;
    size_t idx = 0;
    // x from positive gaps; the final gap is pinned to 1
    std::vector<double> gaps(lay.r + 1, 1.0);
    double total = 1.0;
    for (int i = 0; i < lay.r; ++i) {
        gaps[i] = std::exp(std::clamp(th[idx++], -30.0, 30.0));
        total += gaps[i];
    }
    p.x.resize(lay.r + 1);
    double cum = 0.0;
    for (int i = 0; i < lay.r; ++i) {
        cum += gaps[i];
        p.x[i] = cum / total;
    }
    p.x[lay.r] = 1.0;

    p.q.resize(lay.species);
    p.lambda.resize(lay.species);
    for (int s = 0; s < lay.species; ++s) {
        std::vector<Mat> incs(lay.r, Mat(lay.kappa));
        Mat sum(lay.kappa);
        for (int pl = 0; pl < lay.r; ++pl) {
            Mat l(lay.kappa);
            for (int i = 0; i < lay.kappa; ++i)
                for (int j = 0; j <= i; ++j) l(i, j) = std::clamp(th[idx++], -1e6, 1e6);
            Mat inc = matmul(l, transpose(l));
            for (int k = 0; k < lay.kappa; ++k) inc(k, k) += 1e-10;
            incs[pl] = inc;
            sum += inc;
        }
        Mat w = inv_sqrt_pd(sum);
        std::vector<double> sq(lay.kappa);
        for (int k = 0; k < lay.kappa; ++k) sq[k] = std::sqrt(std::max(d[s][k], 0.0));
        Mat m = matmul(Mat::diag(sq), w);
        Mat mt = transpose(m);
        p.q[s].assign(lay.r + 1, Mat(lay.kappa));
        Mat cumq(lay.kappa);
        for (int pl = 1; pl <= lay.r; ++pl) {
            cumq += incs[pl - 1];
            Mat qp = matmul(matmul(m, cumq), mt);
            for (int i = 0; i < lay.kappa; ++i)  // kill round-off asymmetry
                for (int j = i + 1; j < lay.kappa; ++j) {
                    double v = 0.5 * (qp(i, j) + qp(j, i));
                    qp(i, j) = v;
                    qp(j, i) = v;
                }
            p.q[s][pl] = std::move(qp);
        }
        p.q[s][lay.r] = Mat::diag(d[s]);  // exact boundary
        p.lambda[s].assign(lay.kappa, 0.0);
        for (int k = 0; k + 1 < lay.kappa; ++k)
            p.lambda[s][k] = std::clamp(th[idx++], -1e6, 1e6);
    }
    return p;
}

inline std::vector<double> encode_theta(const ParisiParams& p, const ThetaLayout& lay) {
    std::vector<double> th;
    th.reserve(lay.dim());
    double last_gap = std::max(p.x[lay.r] - (lay.r >= 1 ? p.x[lay.r - 1] : 0.0), 1e-12);
    for (int i = 0; i < lay.r; ++i) {
        double gap = std::max(p.x[i] - (i > 0 ? p.x[i - 1] : 0.0), 1e-12);
        th.push_back(std::log(gap / last_gap));
    }
    for (int s = 0; s < lay.species; ++s) {
        for (int pl = 1; pl <= lay.r; ++pl) {
            Mat inc = p.q[s][pl] - p.q[s][pl - 1];
            Mat l = cholesky_psd(inc);
            for (int i = 0; i < lay.kappa; ++i)
                for (int j = 0; j <= i; ++j) th.push_back(l(i, j));
        }
        double shift = p.lambda[s][lay.kappa - 1];
        for (int k = 0; k + 1 < lay.kappa; ++k) th.push_back(p.lambda[s][k] - shift);
    }
    return th;
}

inline std::vector<double> default_theta(const ThetaLayout& lay,
                                         const std::vector<std::vector<double>>& d) {
    std::vector<double> th;
    th.reserve(lay.dim());
    for (int i = 0; i < lay.r; ++i) th.push_back(0.0);  // equispaced x
    for (int s = 0; s < lay.species; ++s)
        for (int pl = 1; pl <= lay.r; ++pl)
            for (int i = 0; i < lay.kappa; ++i)
                for (int j = 0; j <= i; ++j)
                    th.push_back(i == j ? std::sqrt(std::max(d[s][i], 1e-8) / lay.r) : 0.0);
    for (int s = 0; s < lay.species; ++s) {
        double ref = std::log(std::max(d[s][lay.kappa - 1], 1e-12));
        for (int k = 0; k + 1 < lay.kappa; ++k)
            th.push_back(std::log(std::max(d[s][k], 1e-12)) - ref);
    }
    return th;
}

inline EvalScheme minimize_scheme(const ModelSpec& model, int r, const MinimizeOpts& opts) {
    if (opts.scheme_set) return opts.scheme;
    EvalScheme s = default_scheme(model.kappa, r);
    if (s.kind == EvalScheme::gauss_hermite) {
        s.nodes = model.kappa >= 3 ? 10 : 16;
        s.max_nodes = 56;
    }
    if (s.kind == EvalScheme::quasi_mc) s.samples = std::min(s.samples, 2048);
    return s;
}

inline MinimizeResult minimize_impl(const ModelSpec& model,
                                    const std::vector<std::vector<double>>& d, int r,
                                    const MinimizeOpts& opts,
                                    const std::vector<std::vector<double>>& warm_starts) {
    model.validate();
    ThetaLayout lay{r, model.kappa, model.species()};
    EvalScheme scheme = minimize_scheme(model, r, opts);

    auto objective = [&](const std::vector<double>& th) {
        ParisiParams p = decode_theta(th, lay, d);
        try {
            return functional(p, model, d, scheme).value;
        } catch (const error&) {
            return 1e100;
        }
    };

    std::vector<std::vector<double>> starts;
    starts.push_back(default_theta(lay, d));
    for (const auto& w : warm_starts)
        if (int(w.size()) == lay.dim()) starts.push_back(w);
    Rng rng(opts.seed);
    while (int(starts.size()) < opts.restarts + int(warm_starts.size())) {
        std::vector<double> th = starts[0];
        for (double& v : th) v += 0.6 * rng.normal();
        starts.push_back(std::move(th));
    }

    NelderMeadOpts nm;
    nm.max_iter = opts.max_iter > 0 ? opts.max_iter : 150 * lay.dim();
    nm.ftol = opts.ftol;
    nm.xtol = 1e-8;

    MinimizeResult best;
    best.value = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    for (const auto& start : starts) {
        NelderMeadResult res = nelder_mead(objective, start, nm);
        any_converged = any_converged || res.converged;
        if (res.value < best.value) {
            best.value = res.value;
            best.theta = res.x;
        }
    }
    best.stalled = !any_converged;
    best.params = decode_theta(best.theta, lay, d);
    return best;
}

}  // namespace detail

inline MinimizeResult minimize(const ModelSpec& model, const std::vector<std::vector<double>>& d,
                               int r, const MinimizeOpts& opts = {}) {
    return detail::minimize_impl(model, d, r, opts, {});
}

// ---------------------------------------------------------------------------
// Zero-temperature limit: fit value(beta)/beta = a + b/beta over the grid.
// The counting-measure free energy approaches its limit from above, so
// value(beta)/beta must not increase with beta while the entropy-adjusted
// value(beta)/beta - log(kappa)/beta must not decrease; violating either
// direction flags an optimizer failure.

struct GroundStateFit {
    double value = 0.0;  // extrapolated limit a
    double slope = 0.0;  // b
    double residual = 0.0;
    std::vector<double> betas;
    std::vector<double> scaled;  // value(beta)/beta
    bool monotone = true;
    bool stalled = false;
};

inline GroundStateFit ground_state(const ModelSpec& model,
                                   const std::vector<std::vector<double>>& d,
                                   const std::vector<double>& beta_grid, int r,
                                   const MinimizeOpts& opts = {}) {
    if (beta_grid.size() < 3) throw error("beta grid needs at least 3 points");
    for (size_t i = 0; i < beta_grid.size(); ++i)
        if (beta_grid[i] <= 0.0 || (i > 0 && beta_grid[i] <= beta_grid[i - 1]))
            throw error("beta grid must be positive and increasing");

    GroundStateFit fit;
    std::vector<std::vector<double>> warm;
    MinimizeOpts level_opts = opts;
    int dim = detail::ThetaLayout{r, model.kappa, model.species()}.dim();
    for (double beta : beta_grid) {
        ModelSpec m = model;
        m.beta = beta;
        MinimizeResult res = detail::minimize_impl(m, d, r, level_opts, warm);
        warm.assign(1, res.theta);
        level_opts.restarts = std::max(2, opts.restarts / 4);
        if (opts.max_iter == 0) level_opts.max_iter = 70 * dim;  // warm chain refines
        fit.betas.push_back(beta);
        fit.scaled.push_back(res.value / beta);
        fit.stalled = fit.stalled || res.stalled;
    }
    double logk = std::log(double(model.kappa));
    for (size_t i = 1; i < fit.scaled.size(); ++i) {
        double slack = 1e-6 * (1.0 + std::abs(fit.scaled[i]));
        if (fit.scaled[i] > fit.scaled[i - 1] + slack) fit.monotone = false;
        double adj_prev = fit.scaled[i - 1] - logk / fit.betas[i - 1];
        double adj_cur = fit.scaled[i] - logk / fit.betas[i];
        if (adj_cur < adj_prev - slack) fit.monotone = false;
    }

    // least squares on (1, 1/beta)
    double s11 = 0, s1u = 0, suu = 0, s1y = 0, suy = 0;
    for (size_t i = 0; i < fit.betas.size(); ++i) {
        double u = 1.0 / fit.betas[i], y = fit.scaled[i];
        s11 += 1.0;
        s1u += u;
        suu += u * u;
        s1y += y;
        suy += u * y;
    }
    double det = s11 * suu - s1u * s1u;
    fit.value = (s1y * suu - suy * s1u) / det;
    fit.slope = (s11 * suy - s1u * s1y) / det;
    double rss = 0.0;
    for (size_t i = 0; i < fit.betas.size(); ++i) {
        double pred = fit.value + fit.slope / fit.betas[i];
        rss += (pred - fit.scaled[i]) * (pred - fit.scaled[i]);
    }
    fit.residual = std::sqrt(rss / fit.betas.size());
    return fit;
}

// ---------------------------------------------------------------------------
// Outer sup over the proportion space.

inline std::vector<std::vector<double>> simplex_grid(int kappa, int mesh) {
    std::vector<std::vector<double>> out;
    std::vector<int> comp(kappa, 0);
    std::function<void(int, int)> rec = [&](int k, int left) {
        if (k == kappa - 1) {
            comp[k] = left;
            std::vector<double> d(kappa);
            for (int i = 0; i < kappa; ++i) d[i] = double(comp[i]) / mesh;
            out.push_back(std::move(d));
            return;
        }
        for (int c = 0; c <= left; ++c) {
            comp[k] = c;
            rec(k + 1, left - c);
        }
    };
    rec(0, mesh);
    return out;
}

namespace detail {

// iterate the product of one simplex grid per species
template <typename Fn>
void for_each_proportion(int species, int kappa, int mesh, Fn&& fn) {
    auto grid = simplex_grid(kappa, mesh);
    std::vector<size_t> idx(species, 0);
    for (;;) {
        std::vector<std::vector<double>> d(species);
        for (int s = 0; s < species; ++s) d[s] = grid[idx[s]];
        fn(d);
        int s = species - 1;
        while (s >= 0 && ++idx[s] == grid.size()) idx[s--] = 0;
        if (s < 0) break;
    }
}

// one pass of improving 1/100-steps around the incumbent
template <typename Eval>
std::pair<std::vector<std::vector<double>>, double> refine_simplex(
    std::vector<std::vector<double>> d, double value, Eval&& eval, int max_moves = 40) {
    const double step = 0.01;
    for (int move = 0; move < max_moves; ++move) {
        std::vector<std::vector<double>> best_d = d;
        double best_v = value;
        for (size_t s = 0; s < d.size(); ++s)
            for (size_t a = 0; a < d[s].size(); ++a)
                for (size_t b = 0; b < d[s].size(); ++b) {
                    if (a == b || d[s][b] < step - 1e-12) continue;
                    auto cand = d;
                    cand[s][a] += step;
                    cand[s][b] -= step;
                    double v = eval(cand);
                    if (v > best_v + 1e-12) {
                        best_v = v;
                        best_d = cand;
                    }
                }
        if (best_v <= value + 1e-12) break;
        d = std::move(best_d);
        value = best_v;
    }
    return {d, value};
}

}  // namespace detail

struct SupResult {
    std::vector<std::vector<double>> d_star;
    double value = -std::numeric_limits<double>::infinity();
};

inline SupResult free_energy_unconstrained(const ModelSpec& model, int mesh, int r,
                                           const MinimizeOpts& opts = {}) {
    model.validate();
    SupResult out;
    auto eval = [&](const std::vector<std::vector<double>>& d) {
        return detail::minimize_impl(model, d, r, opts, {}).value;
    };
    detail::for_each_proportion(model.species(), model.kappa, mesh, [&](const auto& d) {
        double v = eval(d);
        if (v > out.value) {
            out.value = v;
            out.d_star = d;
        }
    });
    if (opts.refine) {
        auto [d, v] = detail::refine_simplex(out.d_star, out.value, eval);
        out.d_star = d;
        out.value = v;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Max kappa-cut prediction for a positive definite block kernel.
//
// The species structure comes from the kernel's blocks.  The surrogate's
// symmetric Gaussian pair couplings double the Hamiltonian covariance of the
// independent-entry model, so the spin glass behind the prediction carries
// Delta^2 = 2 K.

struct PredictEntry {
    std::vector<std::vector<double>> d;
    double lead = 0.0;        // sum_{s,t} K(s,t) rho_s rho_t (1 - <d^s, d^t>)
    double ground_state = 0.0;
    GroundStateFit fit;
};

struct PredictTable {
    std::vector<double> rho;
    Mat kmat;
    std::vector<PredictEntry> entries;
};

inline double leading_coefficient(const Mat& kmat, const std::vector<double>& rho,
                                  const std::vector<std::vector<double>>& d) {
    double v = 0.0;
    for (size_t s = 0; s < rho.size(); ++s)
        for (size_t t = 0; t < rho.size(); ++t) {
            double dot = 0.0;
            for (size_t k = 0; k < d[s].size(); ++k) dot += d[s][k] * d[t][k];
            v += kmat(int(s), int(t)) * rho[s] * rho[t] * (1.0 - dot);
        }
    return v;
}

inline ModelSpec prediction_model(const Kernel& block_kernel, int kappa) {
    const auto& b = block_kernel.block();
    PsdReport psd = psd_check(block_kernel);
    if (!psd.psd) throw not_psd("prediction requires a positive semi-definite block kernel");
    ModelSpec model;
    model.kappa = kappa;
    model.rho = BlockSpec::from_boundaries(b.boundaries).rho;
    model.delta2 = b.values;
    model.delta2 *= 2.0;
    model.beta = 1.0;
    return model;
}

inline PredictTable predict_table(const Kernel& block_kernel, int kappa, int mesh, int r,
                                  const std::vector<double>& beta_grid,
                                  const MinimizeOpts& opts = {}) {
    ModelSpec model = prediction_model(block_kernel, kappa);
    PredictTable table;
    table.rho = model.rho;
    table.kmat = block_kernel.block().values;
    detail::for_each_proportion(model.species(), kappa, mesh, [&](const auto& d) {
        PredictEntry e;
        e.d = d;
        e.lead = leading_coefficient(table.kmat, table.rho, d);
        e.fit = ground_state(model, d, beta_grid, r, opts);
        e.ground_state = e.fit.value;
        table.entries.push_back(std::move(e));
    });
    return table;
}

struct Prediction {
    std::vector<std::vector<double>> d_star;
    double value = 0.0;
    double leading = 0.0;
    double correction = 0.0;    // (sqrt(c)/2) P(d*)
    double ground_state = 0.0;  // P(d*)
};

inline Prediction assemble_prediction(const PredictTable& table, double c) {
    Prediction best;
    double best_v = -std::numeric_limits<double>::infinity();
    for (const auto& e : table.entries) {
        double v = 0.5 * c * e.lead + 0.5 * std::sqrt(c) * e.ground_state;
        if (v > best_v) {
            best_v = v;
            best.d_star = e.d;
            best.value = v;
            best.leading = 0.5 * c * e.lead;
            best.correction = 0.5 * std::sqrt(c) * e.ground_state;
            best.ground_state = e.ground_state;
        }
    }
    return best;
}

inline Prediction predict_maxcut(const Kernel& block_kernel, double c, int kappa, int mesh, int r,
                                 const std::vector<double>& beta_grid,
                                 const MinimizeOpts& opts = {}) {
    PredictTable table = predict_table(block_kernel, kappa, mesh, r, beta_grid, opts);
    Prediction pred = assemble_prediction(table, c);
    if (opts.refine && c > 0.0) {
        ModelSpec model = prediction_model(block_kernel, kappa);
        auto eval = [&](const std::vector<std::vector<double>>& d) {
            double lead = leading_coefficient(table.kmat, table.rho, d);
            GroundStateFit fit = ground_state(model, d, beta_grid, r, opts);
            return 0.5 * c * lead + 0.5 * std::sqrt(c) * fit.value;
        };
        auto [d, v] = detail::refine_simplex(pred.d_star, pred.value, eval, 8);
        if (v > pred.value) {
            double lead = leading_coefficient(table.kmat, table.rho, d);
            GroundStateFit fit = ground_state(model, d, beta_grid, r, opts);
            pred.d_star = d;
            pred.value = v;
            pred.leading = 0.5 * c * lead;
            pred.ground_state = fit.value;
            pred.correction = 0.5 * std::sqrt(c) * fit.value;
        }
    }
    return pred;
}

}  // namespace potts
