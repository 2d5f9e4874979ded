#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nph/errors.hpp"
#include "nph/patterns.hpp"
#include "nph/rng.hpp"

namespace nph {

// Inverse temperature. The conventional default is 1/sqrt(d).
class Beta {
public:
    explicit Beta(double value) : value_(value) {
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw OutOfDomainError("beta must be positive and finite");
        }
    }

    double value() const { return value_; }

private:
    double value_;
};

inline Beta default_beta(Index dim) { return Beta(1.0 / std::sqrt(static_cast<double>(dim))); }

// ------------------------- log-sum-exp / softmax -----------------------------

/// log(sum_mu exp(beta z_mu)) / beta, max-shifted so |beta z| up to ~1e4 is safe.
inline double lse(Beta beta, const Vector& z) {
    if (z.size() == 0) throw EmptyVectorError();
    if (!z.allFinite()) throw NonFiniteError("lse input contains non-finite values");
    const double b = beta.value();
    const double zmax = z.maxCoeff();
    double acc = 0.0;
    for (Index i = 0; i < z.size(); ++i) acc += std::exp(b * (z[i] - zmax));
    return zmax + std::log(acc) / b;
}

/// Softmax of beta*z; strictly positive entries summing to 1.
inline Vector softmax(Beta beta, const Vector& z) {
    if (z.size() == 0) throw EmptyVectorError();
    if (!z.allFinite()) throw NonFiniteError("softmax input contains non-finite values");
    const double b = beta.value();
    const double zmax = z.maxCoeff();
    Vector w(z.size());
    double acc = 0.0;
    for (Index i = 0; i < z.size(); ++i) {
        w[i] = std::exp(b * (z[i] - zmax));
        acc += w[i];
    }
    w /= acc;
    return w;
}

// --------------------- truncated exponential-series kernel -------------------

struct PolyTruncation {
    int order = 0;  // N >= 0 terms up to (x.y)^N / N!
};

/// sum_{n=0}^{N} <x,y>^n / n!  — the truncated series for exp(<x,y>).
inline double poly_kernel_truncated(const Vector& x, const Vector& y, PolyTruncation trunc) {
    if (x.size() != y.size()) {
        throw DimensionMismatchError("poly kernel arguments must have equal length");
    }
    if (trunc.order < 0) throw OutOfDomainError("truncation order must be >= 0");
    const double s = x.dot(y);
    double term = 1.0;
    double acc = 1.0;
    for (int n = 1; n <= trunc.order; ++n) {
        term *= s / static_cast<double>(n);
        acc += term;
    }
    return acc;
}

/// Factorial-tail estimate |s|^{N+1} e^{|s|} / (N+1)! for the series remainder.
inline double poly_kernel_remainder_bound(double s, int order) {
    const double a = std::abs(s);
    double tail = 1.0;
    for (int n = 1; n <= order + 1; ++n) tail *= a / static_cast<double>(n);
    return tail * std::exp(a);
}

// ----------------------- multinomial expansion check -------------------------

struct MultinomialCheck {
    double lhs = 0.0;  // <x,y>^n / n!
    double rhs = 0.0;  // sum over compositions of the paired monomial products
};

// Exposes the expansion identity behind the exponential-series feature map:
// both sides are returned so tests can compare them. Enumeration is limited
// to d <= 6, n <= 8.
inline MultinomialCheck multinomial_expansion_check(const Vector& x, const Vector& y, int n) {
    if (x.size() != y.size()) {
        throw DimensionMismatchError("multinomial check arguments must have equal length");
    }
    if (n < 0) throw OutOfDomainError("exponent must be >= 0");
    const Index d = x.size();
    if (d > 6 || n > 8) {
        throw EnumerationTooLargeError("composition enumeration limited to d <= 6, n <= 8");
    }

    MultinomialCheck out;
    double lhs = 1.0;
    const double s = x.dot(y);
    for (int i = 1; i <= n; ++i) lhs *= s / static_cast<double>(i);
    out.lhs = lhs;

    double factorial[9];
    factorial[0] = 1.0;
    for (int i = 1; i <= 8; ++i) factorial[i] = factorial[i - 1] * i;

    std::vector<int> ell(static_cast<std::size_t>(d), 0);
    double rhs = 0.0;
    // Walk every composition ell_1 + ... + ell_d = n.
    auto visit = [&](auto&& self, Index pos, int remaining) -> void {
        if (pos == d - 1) {
            ell[static_cast<std::size_t>(pos)] = remaining;
            double fx = 1.0, fy = 1.0, froot = 1.0;
            for (Index i = 0; i < d; ++i) {
                const int e = ell[static_cast<std::size_t>(i)];
                fx *= std::pow(x[i], e);
                fy *= std::pow(y[i], e);
                froot *= std::sqrt(factorial[e]);
            }
            rhs += (fx / froot) * (fy / froot);
            return;
        }
        for (int e = 0; e <= remaining; ++e) {
            ell[static_cast<std::size_t>(pos)] = e;
            self(self, pos + 1, remaining - e);
        }
    };
    visit(visit, 0, n);
    out.rhs = rhs;
    return out;
}

// ------------------------------ feature maps ---------------------------------

/// Component-wise elu(t)+1: t+1 on the linear branch, e^t below zero.
/// Strictly positive; the normalization happens in the dynamics, not here.
inline Vector elu_feature(const Vector& x) {
    if (!x.allFinite()) throw NonFiniteError("elu_feature input contains non-finite values");
    Vector out(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        out[i] = x[i] >= 0.0 ? x[i] + 1.0 : std::exp(x[i]);
    }
    return out;
}

// Positive random features for the exponential kernel: projections drawn
// i.i.d. standard Gaussian once per config and cached; feature j of x is
//   exp(-|x|^2/2) * exp(<p_j, x>) / sqrt(D).
// Deterministic per seed (see rng.hpp for the pinned generator).
class PrfConfig {
public:
    PrfConfig(Index feature_count, Index dim, std::uint64_t seed)
        : feature_count_(feature_count), dim_(dim), seed_(seed) {
        if (feature_count < 1) throw OutOfDomainError("feature count must be >= 1");
        if (dim < 1) throw OutOfDomainError("dimension must be >= 1");
        projections_.resize(feature_count, dim);
        Rng rng(seed);
        for (Index j = 0; j < feature_count; ++j) {
            for (Index i = 0; i < dim; ++i) projections_(j, i) = rng.next_gaussian();
        }
    }

    Index feature_count() const { return feature_count_; }
    Index dim() const { return dim_; }
    std::uint64_t seed() const { return seed_; }
    const Matrix& projections() const { return projections_; }

private:
    Index feature_count_;
    Index dim_;
    std::uint64_t seed_;
    Matrix projections_;
};

inline Vector prf_features(const Vector& x, const PrfConfig& cfg) {
    if (x.size() != cfg.dim()) {
        throw DimensionMismatchError("input length does not match cached projections");
    }
    if (!x.allFinite()) throw NonFiniteError("prf_features input contains non-finite values");
    const double shift = -0.5 * x.squaredNorm();
    const double scale = std::log(std::sqrt(static_cast<double>(cfg.feature_count())));
    Vector out = cfg.projections() * x;
    for (Index j = 0; j < out.size(); ++j) out[j] = std::exp(out[j] + shift - scale);
    return out;
}

}  // namespace nph
