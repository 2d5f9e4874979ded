#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>

#include "nph/dynamics.hpp"
#include "nph/errors.hpp"
#include "nph/masks.hpp"
#include "nph/patterns.hpp"

namespace nph {

// ------------------------------ Lambert W0 ------------------------------------

// Principal branch of w e^w = x on [-1/e, inf), via Halley iteration from a
// piecewise initial guess: series near 0, branch-point expansion near -1/e,
// log-based for large x. Accurate to ~1e-13 relative (absolute near 0).
inline double lambert_w0(double x) {
    if (!std::isfinite(x)) throw OutOfDomainError("lambert_w0 argument must be finite");
    constexpr double inv_e = 0.36787944117144233;  // 1/e
    if (x < -inv_e) {
        // Tolerate rounding right at the branch point.
        if (x > -inv_e - 1e-15) x = -inv_e;
        else throw OutOfDomainError("lambert_w0 defined only for x >= -1/e");
    }
    if (x == 0.0) return 0.0;

    double w;
    if (x < -0.3) {
        const double p = std::sqrt(std::max(0.0, 2.0 * (std::exp(1.0) * x + 1.0)));
        w = -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0;
    } else if (x < 1.0) {
        w = x * (1.0 - x + 1.5 * x * x);
    } else {
        const double l1 = std::log(x);
        const double l2 = std::log(l1 > 1.0 ? l1 : 1.0);
        w = l1 - l2 + (l1 > 1.0 ? l2 / l1 : 0.0);
    }

    for (int it = 0; it < 50; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        if (std::abs(f) <= 1e-16 * (std::abs(x) + 1e-3)) break;
        const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        const double dw = f / denom;
        w -= dw;
        if (std::abs(dw) <= 1e-16 * (1.0 + std::abs(w))) break;
    }
    return w;
}

/// W0(e^y) without forming e^y; for y beyond the exp ceiling this solves
/// w + ln w = y by Newton, which is exact arithmetic on the log scale.
inline double lambert_w0_exp(double y) {
    if (!std::isfinite(y)) throw OutOfDomainError("lambert_w0_exp argument must be finite");
    if (y <= 700.0) return lambert_w0(std::exp(y));
    double w = y - std::log(y);
    for (int it = 0; it < 50; ++it) {
        const double f = w + std::log(w) - y;
        const double dw = f * w / (w + 1.0);
        w -= dw;
        if (std::abs(dw) <= 1e-16 * w) break;
    }
    return w;
}

// --------------------------- retrieval error bound ----------------------------

/// Sparsity-dependent one-step retrieval error bound
///   m (M + k - 2) exp(-beta (<xi_mu, x> - max_{nu != mu} <xi_mu, xi_nu>)),
/// evaluated over the clean memories.
inline double retrieval_error_bound(const MemoryStore& store, const Vector& x, Index mu,
                                    Beta beta, Index k) {
    const Index M = store.count();
    if (M < 2) throw SingleMemoryError();
    if (k < 1 || k > M) throw KOutOfRangeError("support size must lie in [1, M]");
    store.check_index(mu);
    check_query(store, x);
    const double m = max_memory_norm(store);
    const double own = store.memories().col(mu).dot(x);
    double worst = -std::numeric_limits<double>::infinity();
    for (Index nu = 0; nu < M; ++nu) {
        if (nu == mu) continue;
        worst = std::max(worst, store.memories().col(mu).dot(store.memories().col(nu)));
    }
    return m * static_cast<double>(M + k - 2) * std::exp(-beta.value() * (own - worst));
}

struct ErrorBoundCheck {
    double actual = 0.0;
    double bound = 0.0;
    bool holds = false;
};

/// Evaluates both sides of the error bound on one admissible instance.
/// The hypotheses (x in S_mu, mu in the mask, nondegenerate radius) are
/// enforced; violations raise HypothesisViolatedError.
inline ErrorBoundCheck check_error_bound_dominates(const MemoryStore& store, const Vector& x,
                                                   Index mu, Beta beta, const SupportMask& mask) {
    const Index M = store.count();
    if (M < 2) throw SingleMemoryError();
    store.check_index(mu);
    check_query(store, x);
    if (!mask.contains(mu)) {
        throw HypothesisViolatedError("target index is not in the support set");
    }
    const auto idx = detail::all_indices(M);
    const double r = min_half_distance(store, idx);
    if (r == 0.0) throw HypothesisViolatedError("degenerate radius: duplicate memories");
    if ((x - store.memories().col(mu)).norm() > r) {
        throw HypothesisViolatedError("query lies outside the retrieval sphere of the target");
    }
    ErrorBoundCheck out;
    out.actual = (step_sparse(store, x, beta, mask) - store.memories().col(mu)).norm();
    out.bound = retrieval_error_bound(store, x, mu, beta, mask.size());
    out.holds = out.actual <= out.bound + 1e-12;
    return out;
}

// ------------------------------ well-separation -------------------------------

struct WellSeparationReport {
    double threshold = 0.0;   // (1/beta) ln((M+k-2) m / R) + 2 m R
    double separation = 0.0;  // Delta_mu over the scope
    bool satisfied = false;
};

/// Well-separation verdict for pattern mu. R and Delta_mu are computed over
/// the scope indices (pass the support set when analyzing a masked model);
/// M is the total memory count and m the global max norm.
inline WellSeparationReport well_separation(const MemoryStore& store, Index mu, Beta beta,
                                            Index k, std::span<const Index> scope) {
    const Index M = store.count();
    if (M < 2 || scope.size() < 2) throw SingleMemoryError();
    store.check_index(mu);
    bool mu_in_scope = false;
    for (Index i : scope) mu_in_scope |= (i == mu);
    if (!mu_in_scope) throw InvalidMaskError("pattern index must belong to the scope");
    if (k < 1 || k > M) throw KOutOfRangeError("support size must lie in [1, M]");

    const double m = max_memory_norm(store);
    const double r = min_half_distance(store, scope);
    if (r == 0.0) throw DegenerateRadiusError();

    WellSeparationReport rep;
    rep.threshold = std::log(static_cast<double>(M + k - 2) * m / r) / beta.value() + 2.0 * m * r;
    rep.separation = separation_at(store, store.memories().col(mu), mu, scope);
    rep.satisfied = rep.separation >= rep.threshold;
    return rep;
}

inline WellSeparationReport well_separation(const MemoryStore& store, Index mu, Beta beta,
                                            const SupportMask& scope) {
    return well_separation(store, mu, beta, scope.size(), scope.indices());
}

// ------------------------------ memory capacity -------------------------------

struct CapacityBound {
    double m_sparse = 0.0;  // lower bound sqrt(p) C^{(d-1)/4}
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double w0_log_arg = 0.0;  // a + ln b, the log of the W0 argument
};

/// Lambert-W capacity lower bound:
///   a = 4/(d-1) (ln(m (sqrt(p)+k-1) / R) + 1),  b = 4 m^2 beta / (5 (d-1)),
///   C = b / W0(e^{a + ln b}),                   M >= sqrt(p) C^{(d-1)/4}.
inline CapacityBound capacity_lower_bound(Index d, double m, double R, double beta, Index k,
                                          double p) {
    if (d < 2) throw OutOfDomainError("pattern size must be >= 2");
    if (!(m > 0.0) || !(R > 0.0) || !(beta > 0.0)) {
        throw OutOfDomainError("m, R and beta must be positive");
    }
    if (!(p > 0.0) || p > 1.0) throw OutOfDomainError("p must lie in (0, 1]");
    if (k < 1) throw OutOfDomainError("support size must be >= 1");

    CapacityBound out;
    const double dd = static_cast<double>(d - 1);
    out.a = (4.0 / dd) * (std::log(m * (std::sqrt(p) + static_cast<double>(k) - 1.0) / R) + 1.0);
    out.b = 4.0 * m * m * beta / (5.0 * dd);
    out.w0_log_arg = out.a + std::log(out.b);
    out.c = out.b / lambert_w0_exp(out.w0_log_arg);
    out.m_sparse = std::sqrt(p) * std::pow(out.c, dd / 4.0);
    return out;
}

// ------------------------------- full report ----------------------------------

// Everything the analytical engine can say about one (store, query, mu)
// triple plus capacity inputs; the store-dependent parts are optional so the
// scalar CLI path can fill just the capacity section.
struct BoundReport {
    std::optional<double> error_bound;        // theorem RHS at the given k
    std::optional<double> dense_error_bound;  // k = M specialization
    std::optional<bool> well_separated;
    std::optional<double> well_separation_threshold;
    std::optional<double> separation;
    CapacityBound capacity;
    // echoed inputs
    double p = 0.0;
    Index k = 0;
    double m = 0.0;
    double r = 0.0;
    double beta = 0.0;
    Index d = 0;
};

}  // namespace nph
