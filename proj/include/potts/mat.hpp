#pragma once

// Dense symmetric matrices of small order (species counts, spin colors).
// Everything here is O(n^3) with tiny n; no external linear algebra needed.

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "potts/errors.hpp"

namespace potts {

class Mat {
public:
    Mat() = default;
    explicit Mat(int n) : n_(n), a_(static_cast<size_t>(n) * n, 0.0) {}
    Mat(int n, std::vector<double> vals) : n_(n), a_(std::move(vals)) {
        assert(a_.size() == static_cast<size_t>(n_) * n_);
    }

    static Mat identity(int n) {
        Mat m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    static Mat diag(const std::vector<double>& d) {
        Mat m(static_cast<int>(d.size()));
        for (int i = 0; i < m.n_; ++i) m(i, i) = d[i];
        return m;
    }

    int order() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }
    const std::vector<double>& data() const { return a_; }

    Mat& operator+=(const Mat& o) {
        assert(n_ == o.n_);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        assert(n_ == o.n_);
        for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    Mat& operator*=(double c) {
        for (double& v : a_) v *= c;
        return *this;
    }
    friend Mat operator+(Mat a, const Mat& b) { return a += b; }
    friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
    friend Mat operator*(Mat a, double c) { return a *= c; }
    friend Mat operator*(double c, Mat a) { return a *= c; }

    bool symmetric(double tol = 0.0) const {
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j)
                if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
        return true;
    }

private:
    int n_ = 0;
    std::vector<double> a_;
};

inline Mat matmul(const Mat& a, const Mat& b) {
    assert(a.order() == b.order());
    int n = a.order();
    Mat c(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

// Frobenius (Hilbert-Schmidt) inner product.
inline double frobenius(const Mat& a, const Mat& b) {
    assert(a.order() == b.order());
    double s = 0.0;
    for (size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

struct EigenSym {
    std::vector<double> values;  // ascending
    Mat vectors;                 // column k is the eigenvector of values[k]
};

// Cyclic Jacobi iteration; fine for the small orders used here.
inline EigenSym sym_eigen(const Mat& m_in) {
    int n = m_in.order();
    Mat a = m_in;
    Mat v = Mat::identity(n);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    EigenSym out;
    out.values.resize(n);
    for (int i = 0; i < n; ++i) out.values[i] = a(i, i);
    // sort ascending, permuting the vectors accordingly
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (out.values[idx[j]] < out.values[idx[i]]) std::swap(idx[i], idx[j]);
    EigenSym sorted;
    sorted.values.resize(n);
    sorted.vectors = Mat(n);
    for (int k = 0; k < n; ++k) {
        sorted.values[k] = out.values[idx[k]];
        for (int i = 0; i < n; ++i) sorted.vectors(i, k) = v(i, idx[k]);
    }
    return sorted;
}

inline double min_eigenvalue(const Mat& m) { return sym_eigen(m).values.front(); }

// Symmetric PSD square root, eigenvalues below -clip_tol are rejected,
// small negatives are clipped to zero.
inline Mat sqrt_psd(const Mat& m, double clip_tol = 1e-8) {
    EigenSym e = sym_eigen(m);
    int n = m.order();
    if (!e.values.empty() && e.values.front() < -clip_tol)
        throw degenerate_covariance("matrix has eigenvalue " + std::to_string(e.values.front()));
    Mat r(n);
    for (int k = 0; k < n; ++k) {
        double lam = e.values[k] > 0 ? std::sqrt(e.values[k]) : 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r(i, j) += lam * e.vectors(i, k) * e.vectors(j, k);
    }
    return r;
}

// Inverse square root of a positive definite matrix.
inline Mat inv_sqrt_pd(const Mat& m, double floor_eig = 1e-14) {
    EigenSym e = sym_eigen(m);
    int n = m.order();
    Mat r(n);
    for (int k = 0; k < n; ++k) {
        double lam = e.values[k];
        if (lam < floor_eig) lam = floor_eig;
        double w = 1.0 / std::sqrt(lam);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r(i, j) += w * e.vectors(i, k) * e.vectors(j, k);
    }
    return r;
}

}  // namespace potts
