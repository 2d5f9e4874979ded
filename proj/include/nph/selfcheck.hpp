#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "nph/bounds.hpp"
#include "nph/dynamics.hpp"
#include "nph/experiments.hpp"
#include "nph/kernels.hpp"
#include "nph/masks.hpp"
#include "nph/patterns.hpp"
#include "nph/rng.hpp"

// End-to-end verification suite behind `nph verify` and the integration
// test binary: each check pins its tolerances in code and reports one
// pass/fail line with the measured numbers.
namespace nph::selfcheck {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

// --------------------------- instance builders --------------------------------

/// Random orthonormal frame (Gram-Schmidt of Gaussian columns, re-orthogonalized).
inline MemoryStore orthonormal_store(Index d, Index M, std::uint64_t seed) {
    if (M > d) throw OutOfDomainError("orthonormal frame needs M <= d");
    Rng rng(seed);
    Matrix q(d, M);
    for (Index j = 0; j < M; ++j) {
        Vector v = gaussian_vector(rng, d);
        for (int pass = 0; pass < 2; ++pass) {
            for (Index i = 0; i < j; ++i) v -= q.col(i).dot(v) * q.col(i);
        }
        q.col(j) = v / v.norm();
    }
    return MemoryStore(std::move(q));
}

struct AdmissibleInstance {
    MemoryStore store;
    Vector query;   // inside the target's retrieval sphere
    Index target;   // contained in the mask
    SupportMask mask;
    Beta beta;
};

/// Seeded admissible instances for the bound and sparse-vs-dense checks:
/// orthonormal frames over (d, M) in {(8,4), (16,4), (16,16)},
/// beta in {0.5, 1, 1.5}, query radius <= 0.6 R, masks cycling
/// full / top-K / window with the target always in support.
inline AdmissibleInstance admissible_instance(std::uint64_t seed, int t) {
    static constexpr Index combos[3][2] = {{8, 4}, {16, 4}, {16, 16}};
    static constexpr double betas[3] = {0.5, 1.0, 1.5};
    const Index d = combos[t % 3][0];
    const Index M = combos[t % 3][1];
    const Beta beta(betas[(t / 3) % 3]);

    MemoryStore store =
        orthonormal_store(d, M, derive_seed(seed, 2 * static_cast<std::uint64_t>(t)));
    const Index mu = static_cast<Index>(t) % M;

    Rng rng(derive_seed(seed, 2 * static_cast<std::uint64_t>(t) + 1));
    Vector u = gaussian_vector(rng, d);
    u /= u.norm();
    const auto idx = detail::all_indices(M);
    const double r = min_half_distance(store, idx);
    const Vector x = store.memories().col(mu) + 0.6 * rng.next_double() * r * u;

    const int kind = (t / 9) % 3;
    const Index size = 1 + static_cast<Index>(t) % M;
    SupportMask mask = kind == 0   ? mask_full(M)
                       : kind == 1 ? mask_topk(store, x, size)
                                   : mask_window(M, M, mu, size);
    return {std::move(store), x, mu, std::move(mask), beta};
}

// ------------------------------- the checks -----------------------------------

/// One dense update from each stored pattern recovers it to 1e-6 at beta=20
/// (d=16, M=8 orthonormalized unit patterns), in under a second.
inline CheckResult dense_one_step_recovery() {
    const auto t0 = std::chrono::steady_clock::now();
    const MemoryStore store = orthonormal_store(16, 8, 0xA11CE);
    const Beta beta(20.0);
    double worst = 0.0;
    for (Index mu = 0; mu < store.count(); ++mu) {
        const Vector out = step_dense(store, store.memories().col(mu), beta);
        worst = std::max(worst, (out - store.memories().col(mu)).norm());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CheckResult res;
    res.name = "dense one-step recovery";
    res.passed = worst <= 1e-6 && secs < 1.0;
    res.detail = "worst error " + fmt(worst) + " (limit 1e-6), " + fmt(secs) + " s";
    return res;
}

/// The sparsity-dependent error bound dominates the measured one-step error
/// on 1000 seeded admissible instances, within 10 s.
inline CheckResult error_bound_domination() {
    const auto t0 = std::chrono::steady_clock::now();
    int holds = 0;
    const int total = 1000;
    double min_margin = std::numeric_limits<double>::infinity();
    for (int t = 0; t < total; ++t) {
        const auto inst = admissible_instance(0x20B0, t);
        const auto check =
            check_error_bound_dominates(inst.store, inst.query, inst.target, inst.beta, inst.mask);
        holds += check.holds ? 1 : 0;
        min_margin = std::min(min_margin, check.bound - check.actual);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CheckResult res;
    res.name = "error bound domination";
    res.passed = holds == total && secs < 10.0;
    res.detail = std::to_string(holds) + "/" + std::to_string(total) + " hold, min margin " +
                 fmt(min_margin) + ", " + fmt(secs) + " s";
    return res;
}

/// Sparse one-step error never exceeds the dense error (same 1000 instances).
inline CheckResult sparse_at_most_dense() {
    int ok = 0;
    const int total = 1000;
    double worst_gap = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < total; ++t) {
        const auto inst = admissible_instance(0x20B0, t);
        const Vector xi = inst.store.memories().col(inst.target);
        const double sparse_err =
            (step_sparse(inst.store, inst.query, inst.beta, inst.mask) - xi).norm();
        const double dense_err = (step_dense(inst.store, inst.query, inst.beta) - xi).norm();
        ok += sparse_err <= dense_err + 1e-12 ? 1 : 0;
        worst_gap = std::max(worst_gap, sparse_err - dense_err);
    }
    CheckResult res;
    res.name = "sparse error at most dense";
    res.passed = ok == total;
    res.detail = std::to_string(ok) + "/" + std::to_string(total) + " hold, worst gap " +
                 fmt(worst_gap) + " (allowance 1e-12)";
    return res;
}

/// A full support set reproduces the dense update to 1e-12 on 100 shapes.
inline CheckResult full_mask_reduction() {
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        Rng rng(derive_seed(0xF011, static_cast<std::uint64_t>(t)));
        const Index d = 1 + static_cast<Index>(rng.next_below(24));
        const Index M = 1 + static_cast<Index>(rng.next_below(32));
        const MemoryStore store =
            gen_sphere_patterns(d, M, 1.0, derive_seed(0xF012, static_cast<std::uint64_t>(t)));
        const Vector x = gaussian_vector(rng, d);
        const Beta beta(0.25 + 3.75 * rng.next_double());
        const Vector a = step_sparse(store, x, beta, mask_full(M));
        const Vector b = step_dense(store, x, beta);
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
    }
    CheckResult res;
    res.name = "full support set reduces to dense";
    res.passed = worst <= 1e-12;
    res.detail = "max abs difference " + fmt(worst) + " (limit 1e-12)";
    return res;
}

/// 100 dense trajectories: energy non-increasing within 1e-10 slack and
/// convergence at tol 1e-8 within 100 iterations.
inline CheckResult energy_monotone_convergence() {
    int converged = 0;
    int monotone = 0;
    int worst_steps = 0;
    const int total = 100;
    static constexpr double betas[3] = {0.5, 1.0, 4.0};
    for (int t = 0; t < total; ++t) {
        const MemoryStore store =
            orthonormal_store(16, 8, derive_seed(0xE4E6, 2 * static_cast<std::uint64_t>(t)));
        Rng rng(derive_seed(0xE4E6, 2 * static_cast<std::uint64_t>(t) + 1));
        Vector u = gaussian_vector(rng, 16);
        u /= u.norm();
        const Index mu = static_cast<Index>(t) % 8;
        const auto idx = detail::all_indices(store.count());
        const double r = min_half_distance(store, idx);
        const Vector x0 = store.memories().col(mu) + 0.7 * rng.next_double() * r * u;

        DynamicsConfig config{Beta(betas[t % 3])};
        config.record_energy = true;
        const RetrievalOutcome out = retrieve(store, x0, config);
        converged += out.converged ? 1 : 0;
        worst_steps = std::max(worst_steps, out.steps);
        bool mono = true;
        for (std::size_t i = 1; i < out.energy_trace.size(); ++i) {
            mono &= out.energy_trace[i] <= out.energy_trace[i - 1] + 1e-10;
        }
        monotone += mono ? 1 : 0;
    }
    CheckResult res;
    res.name = "energy monotone, trajectories converge";
    res.passed = converged == total && monotone == total;
    res.detail = std::to_string(monotone) + "/100 monotone, " + std::to_string(converged) +
                 "/100 converged, worst " + std::to_string(worst_steps) + " steps";
    return res;
}

/// Lambert W0 round-trip residual over a 10^4-point grid including the
/// branch-point neighborhood, plus agreement with a bisection oracle at x=1.
inline CheckResult lambert_w_roundtrip() {
    double worst = 0.0;
    int points = 0;
    auto probe = [&](double x) {
        const double w = lambert_w0(x);
        const double resid = std::abs(w * std::exp(w) - x);
        worst = std::max(worst, resid / std::max(1.0, std::abs(x)));
        ++points;
    };
    for (int i = 0; i < 9799; ++i) {
        const double t = static_cast<double>(i) / 9798.0;
        probe(1e-8 * std::pow(10.0, 16.0 * t));
    }
    constexpr double inv_e = 0.36787944117144233;
    for (int i = 0; i < 200; ++i) {
        const double t = static_cast<double>(i) / 199.0;
        probe(-inv_e + 1e-12 * std::pow(10.0, 11.5 * t));
    }
    probe(0.0);

    // Independent oracle: bisection on w e^w - 1 over [0, 1].
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        (mid * std::exp(mid) - 1.0 < 0.0 ? lo : hi) = mid;
    }
    const double oracle = 0.5 * (lo + hi);
    const double at_one = std::abs(lambert_w0(1.0) - oracle);

    CheckResult res;
    res.name = "Lambert W0 round-trip";
    res.passed = worst <= 1e-12 && at_one <= 1e-11 && points >= 10000;
    res.detail = "worst residual " + fmt(worst) + " over " + std::to_string(points) +
                 " points, |W0(1)-bisection| " + fmt(at_one);
    return res;
}

/// Capacity formula: defining identity to 1e-9 relative at every sweep point;
/// the bound is non-increasing in k and increasing in d on the pinned sweeps.
inline CheckResult capacity_identity_monotonicity() {
    double worst_identity = 0.0;
    static constexpr Index dims[] = {8, 16, 32, 64};
    static constexpr Index ks[] = {1, 4, 16, 64};
    static constexpr double betas[] = {1.0, 40.0};
    static constexpr double ps[] = {0.9, 0.95, 0.99};
    for (Index d : dims) {
        for (Index k : ks) {
            for (double beta : betas) {
                for (double p : ps) {
                    const auto cap = capacity_lower_bound(d, 1.0, 0.3, beta, k, p);
                    const double w0 = cap.b / cap.c;
                    // Residual of w e^w = e^{a + ln b}, evaluated on the log
                    // scale when the argument overflows.
                    double rel;
                    if (cap.w0_log_arg <= 700.0) {
                        const double target = std::exp(cap.w0_log_arg);
                        rel = std::abs(w0 * std::exp(w0) - target) / target;
                    } else {
                        rel = std::abs(w0 + std::log(w0) - cap.w0_log_arg);
                    }
                    worst_identity = std::max(worst_identity, rel);
                }
            }
        }
    }

    bool k_monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    for (Index k : ks) {
        const double v = capacity_lower_bound(64, 1.0, 0.3, 1.0, k, 0.95).m_sparse;
        k_monotone &= v <= prev + 1e-15;
        prev = v;
    }
    bool d_growing = true;
    prev = 0.0;
    for (Index d : dims) {
        const double v = capacity_lower_bound(d, 1.0, 0.3, 40.0, 4, 0.95).m_sparse;
        d_growing &= v > prev;
        prev = v;
    }

    CheckResult res;
    res.name = "capacity identity and monotonicity";
    res.passed = worst_identity <= 1e-9 && k_monotone && d_growing;
    res.detail = "worst identity residual " + fmt(worst_identity) +
                 std::string(k_monotone ? ", non-increasing in k" : ", NOT monotone in k") +
                 std::string(d_growing ? ", increasing in d" : ", NOT increasing in d");
    return res;
}

/// Truncated exponential-series weights match softmax weights to 1e-9 at
/// N=30 for scores within [-2, 2]; the expansion identity holds to 1e-10.
inline CheckResult series_kernel_matches_softmax() {
    double worst_weights = 0.0;
    const PolyTruncation trunc{30};
    for (int t = 0; t < 100; ++t) {
        Rng rng(derive_seed(0x5E41, static_cast<std::uint64_t>(t)));
        const Index d = 6;
        const Index M = 5;
        Vector x = gaussian_vector(rng, d);
        x /= x.norm();
        Matrix xi(d, M);
        Vector scores(M);
        for (Index m = 0; m < M; ++m) {
            Vector v = gaussian_vector(rng, d);
            v *= (2.0 * rng.next_double() - 1.0) * 2.0 / v.norm();  // |<x,v>| <= 2
            xi.col(m) = v;
            scores[m] = x.dot(v);
        }
        const Vector exact = softmax(Beta(1.0), scores);
        Vector approx(M);
        for (Index m = 0; m < M; ++m) approx[m] = poly_kernel_truncated(x, xi.col(m), trunc);
        approx /= approx.sum();
        worst_weights = std::max(worst_weights, (approx - exact).cwiseAbs().maxCoeff());
    }

    double worst_identity = 0.0;
    for (Index d = 1; d <= 4; ++d) {
        for (int n = 0; n <= 6; ++n) {
            Rng rng(derive_seed(0x5E42, static_cast<std::uint64_t>(16 * d + n)));
            Vector x(d), y(d);
            for (Index i = 0; i < d; ++i) {
                x[i] = static_cast<double>(rng.next_below(7)) - 3.0;
                y[i] = static_cast<double>(rng.next_below(7)) - 3.0;
            }
            const auto check = multinomial_expansion_check(x, y, n);
            const double rel =
                std::abs(check.lhs - check.rhs) / std::max(1.0, std::abs(check.lhs));
            worst_identity = std::max(worst_identity, rel);
        }
    }

    CheckResult res;
    res.name = "series kernel matches softmax";
    res.passed = worst_weights <= 1e-9 && worst_identity <= 1e-10;
    res.detail = "worst weight gap " + fmt(worst_weights) + " (limit 1e-9), worst expansion residual " +
                 fmt(worst_identity) + " (limit 1e-10)";
    return res;
}

/// Random-feature update at D=10^4 lands within 10% of the dense update on a
/// fixed seed-0 instance, and quadrupling D shrinks the mean error.
inline CheckResult random_features_approximate_dense() {
    const MemoryStore store = gen_sphere_patterns(8, 4, 1.0, 0);
    Rng rng(0x9F0);
    Vector x = store.memories().col(0) + 0.1 * gaussian_vector(rng, 8);
    const Vector dense = step_dense(store, x, Beta(1.0));

    const Vector at_base = step_prf(store, x, PrfConfig(10000, 8, 0));
    const double rel = (at_base - dense).norm() / dense.norm();

    double err_base = 0.0, err_more = 0.0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        err_base += (step_prf(store, x, PrfConfig(10000, 8, s)) - dense).norm();
        err_more += (step_prf(store, x, PrfConfig(40000, 8, s)) - dense).norm();
    }
    CheckResult res;
    res.name = "random features approximate dense";
    res.passed = rel <= 0.10 && err_more < err_base;
    res.detail = "seed-0 relative error " + fmt(rel) + " (limit 0.1), mean error " +
                 fmt(err_base / 10.0) + " at D=1e4 vs " + fmt(err_more / 10.0) + " at D=4e4";
    return res;
}

/// Half-masked retrieval success is non-increasing in M (0.05 slack), and the
/// random-mask variant with k=M/4 strictly underperforms dense on the same seeds.
inline CheckResult half_mask_sweep_shape() {
    ExperimentSpec spec;
    spec.kind = ExperimentKind::HalfMask;
    spec.dim = 64;
    spec.memory_counts = {10, 25, 50, 100, 200};
    spec.trials = 50;
    spec.success_threshold = 0.20;
    spec.beta = 10.0;
    spec.seed = 0xBE7C;

    const ResultTable dense = run_experiment(spec);
    spec.variant.kind = VariantKind::RandomMask;  // mask_k 0 -> max(1, M/4)
    const ResultTable random = run_experiment(spec);

    bool monotone = true;
    for (std::size_t i = 1; i < dense.rows.size(); ++i) {
        monotone &= dense.rows[i].success_rate <= dense.rows[i - 1].success_rate + 0.05;
    }
    double dense_mean = 0.0, random_mean = 0.0;
    std::string curve;
    for (std::size_t i = 0; i < dense.rows.size(); ++i) {
        dense_mean += dense.rows[i].success_rate;
        random_mean += random.rows[i].success_rate;
        curve += (i ? " " : "") + std::to_string(dense.rows[i].success_rate).substr(0, 4);
    }
    dense_mean /= static_cast<double>(dense.rows.size());
    random_mean /= static_cast<double>(random.rows.size());

    CheckResult res;
    res.name = "half-mask sweep shape";
    res.passed = monotone && random_mean < dense_mean;
    res.detail = "dense success by M: [" + curve + "], mean " + fmt(dense_mean) +
                 " vs random-mask mean " + fmt(random_mean);
    return res;
}

/// Identical spec and seed give byte-identical JSON (timing excluded).
inline CheckResult bench_determinism() {
    ExperimentSpec spec;
    spec.kind = ExperimentKind::HalfMask;
    spec.dim = 16;
    spec.memory_counts = {4, 8, 16};
    spec.trials = 8;
    spec.seed = 42;
    const std::string a = result_table_to_json(run_experiment(spec), false);
    const std::string b = result_table_to_json(run_experiment(spec), false);
    CheckResult res;
    res.name = "bench determinism";
    res.passed = a == b;
    res.detail = res.passed ? "two runs byte-identical (" + std::to_string(a.size()) + " bytes)"
                            : "runs differ";
    return res;
}

inline std::vector<CheckResult> run_all() {
    return {
        dense_one_step_recovery(),
        error_bound_domination(),
        sparse_at_most_dense(),
        full_mask_reduction(),
        energy_monotone_convergence(),
        lambert_w_roundtrip(),
        capacity_identity_monotonicity(),
        series_kernel_matches_softmax(),
        random_features_approximate_dense(),
        half_mask_sweep_shape(),
        bench_determinism(),
    };
}

}  // namespace nph::selfcheck
