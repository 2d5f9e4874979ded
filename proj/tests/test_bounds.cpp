#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nph/bounds.hpp"
#include "nph/experiments.hpp"
#include "nph/selfcheck.hpp"

namespace {

using nph::Beta;
using nph::Index;
using nph::Matrix;
using nph::MemoryStore;
using nph::Vector;

TEST(LambertW, AnchorsAndDomain) {
    EXPECT_EQ(nph::lambert_w0(0.0), 0.0);
    EXPECT_NEAR(nph::lambert_w0(std::exp(1.0)), 1.0, 1e-14);
    EXPECT_NEAR(nph::lambert_w0(1.0), 0.567143290, 1e-9);
    EXPECT_THROW(nph::lambert_w0(-0.3678794411714424 - 1e-9), nph::OutOfDomainError);
}

TEST(LambertW, RoundTripOnLogGrid) {
    for (int i = 0; i <= 400; ++i) {
        const double x = 1e-8 * std::pow(10.0, 16.0 * i / 400.0);
        const double w = nph::lambert_w0(x);
        EXPECT_LE(std::abs(w * std::exp(w) - x), 1e-12 * std::max(1.0, x));
    }
    constexpr double inv_e = 0.36787944117144233;
    for (int i = 0; i <= 60; ++i) {
        const double x = -inv_e + 1e-12 * std::pow(10.0, 11.0 * i / 60.0);
        const double w = nph::lambert_w0(x);
        EXPECT_LE(std::abs(w * std::exp(w) - x), 1e-12);
    }
}

TEST(LambertW, LogScaleEvaluationAgrees) {
    EXPECT_NEAR(nph::lambert_w0_exp(10.0), nph::lambert_w0(std::exp(10.0)), 1e-12);
    // Beyond the exp ceiling: verify w + ln w = y directly.
    const double y = 900.0;
    const double w = nph::lambert_w0_exp(y);
    EXPECT_LE(std::abs(w + std::log(w) - y), 1e-9);
}

TEST(ErrorBound, OrthonormalClosedForm) {
    const MemoryStore store(Matrix::Identity(2, 2));
    const double bound = nph::retrieval_error_bound(store, store.pattern(0), 0, Beta(1.0), 1);
    // m = 1, coefficient M + k - 2 = 1, exponent -(1 - 0).
    EXPECT_NEAR(bound, std::exp(-1.0), 1e-15);
}

TEST(ErrorBound, DenseSpecializationAndLimits) {
    const MemoryStore store = nph::gen_sphere_patterns(6, 5, 1.3, 2);
    nph::Rng rng(3);
    const Vector x = nph::gaussian_vector(rng, 6);
    // Hand evaluation of the k = M specialization 2 m (M-1) exp(...).
    const double m = nph::max_memory_norm(store);
    double worst = -std::numeric_limits<double>::infinity();
    for (Index nu = 0; nu < 5; ++nu) {
        if (nu != 1) worst = std::max(worst, store.pattern(1).dot(store.pattern(nu)));
    }
    const double expected = 2.0 * m * 4.0 * std::exp(-0.7 * (store.pattern(1).dot(x) - worst));
    const double at_full = nph::retrieval_error_bound(store, x, 1, Beta(0.7), 5);
    EXPECT_NEAR(at_full, expected, 1e-12 * expected);

    // Vanishing beta sends the exponential factor to 1.
    const double near_zero = nph::retrieval_error_bound(store, x, 1, Beta(1e-12), 3);
    EXPECT_NEAR(near_zero, nph::max_memory_norm(store) * (5 + 3 - 2), 1e-9);

    EXPECT_THROW(nph::retrieval_error_bound(MemoryStore(Matrix::Ones(2, 1)), x.head(2), 0,
                                            Beta(1.0), 1),
                 nph::SingleMemoryError);
    EXPECT_THROW(nph::retrieval_error_bound(store, x, 1, Beta(1.0), 6), nph::KOutOfRangeError);
}

TEST(ErrorBound, MonotoneInSupportSizeAndContinuousInBeta) {
    const MemoryStore store = nph::gen_sphere_patterns(8, 6, 1.0, 5);
    nph::Rng rng(6);
    const Vector x = nph::gaussian_vector(rng, 8);
    double prev = 0.0;
    for (Index k = 1; k <= 6; ++k) {
        const double b = nph::retrieval_error_bound(store, x, 2, Beta(1.1), k);
        EXPECT_GE(b, prev);
        prev = b;
    }
    const double f1 = nph::retrieval_error_bound(store, x, 2, Beta(1.1), 3);
    const double f2 = nph::retrieval_error_bound(store, x, 2, Beta(1.1 + 1e-9), 3);
    EXPECT_LE(std::abs(f1 - f2), 1e-6 * f1);
}

TEST(ErrorBound, SparseNeverAboveDenseBound) {
    for (int t = 0; t < 60; ++t) {
        const auto inst = nph::selfcheck::admissible_instance(0xB0B, t);
        const double sparse_bound = nph::retrieval_error_bound(
            inst.store, inst.query, inst.target, inst.beta, inst.mask.size());
        const double dense_bound = nph::retrieval_error_bound(
            inst.store, inst.query, inst.target, inst.beta, inst.store.count());
        EXPECT_LE(sparse_bound, dense_bound + 1e-15);
    }
}

TEST(BoundCheck, HoldsOnAdmissibleInstance) {
    const MemoryStore store = nph::selfcheck::orthonormal_store(4, 4, 12);
    const auto check = nph::check_error_bound_dominates(store, store.pattern(1), 1, Beta(5.0),
                                                        nph::mask_full(4));
    EXPECT_TRUE(check.holds);
    EXPECT_LE(check.actual, check.bound);
}

TEST(BoundCheck, RejectsBrokenHypotheses) {
    Matrix dup(2, 2);
    dup << 1, 1, 0, 0;
    EXPECT_THROW(nph::check_error_bound_dominates(MemoryStore(dup), Vector::Ones(2), 0,
                                                  Beta(1.0), nph::mask_full(2)),
                 nph::HypothesisViolatedError);

    const MemoryStore store(Matrix::Identity(2, 2));
    Vector far(2);
    far << -3, 4;
    EXPECT_THROW(
        nph::check_error_bound_dominates(store, far, 0, Beta(1.0), nph::mask_full(2)),
        nph::HypothesisViolatedError);

    const nph::SupportMask without({1}, 2, nph::MaskOrigin::TopK);
    EXPECT_THROW(
        nph::check_error_bound_dominates(store, store.pattern(0), 0, Beta(1.0), without),
        nph::HypothesisViolatedError);
}

TEST(WellSeparation, OrthonormalPatternsNeverSatisfy) {
    const MemoryStore store(Matrix::Identity(2, 2));
    const std::vector<Index> scope{0, 1};
    for (double beta : {0.1, 1.0, 100.0}) {
        const auto rep = nph::well_separation(store, 0, Beta(beta), 2, scope);
        EXPECT_NEAR(rep.threshold, std::log(2.0 * std::sqrt(2.0)) / beta + std::sqrt(2.0),
                    1e-12);
        EXPECT_DOUBLE_EQ(rep.separation, 1.0);
        EXPECT_FALSE(rep.satisfied);
    }
}

TEST(WellSeparation, ScalingBehaviour) {
    const MemoryStore base = nph::gen_sphere_patterns(4, 3, 1.0, 31);
    const MemoryStore scaled(Matrix(2.0 * base.memories()));
    const std::vector<Index> scope{0, 1, 2};
    const auto r1 = nph::well_separation(base, 0, Beta(1.5), 3, scope);
    const auto r2 = nph::well_separation(scaled, 0, Beta(1.5), 3, scope);
    // ln-argument m/R is scale-invariant; the 2mR term scales by c^2.
    const double g1 = nph::geometry_stats(base).radius;
    const double expected =
        r1.threshold - 2.0 * nph::max_memory_norm(base) * g1 +
        2.0 * nph::max_memory_norm(scaled) * nph::geometry_stats(scaled).radius;
    EXPECT_NEAR(r2.threshold, expected, 1e-12);
}

TEST(WellSeparation, LargeBetaLeavesOnlyGeometricTerm) {
    const MemoryStore store = nph::gen_sphere_patterns(4, 3, 1.0, 32);
    const std::vector<Index> scope{0, 1, 2};
    const auto rep = nph::well_separation(store, 1, Beta(1e9), 3, scope);
    const auto g = nph::geometry_stats(store);
    EXPECT_NEAR(rep.threshold, 2.0 * g.max_norm * g.radius, 1e-6);
}

TEST(WellSeparation, DominantIsolatedPatternSatisfies) {
    Matrix m(2, 3);
    m << 10, 0, 0, 0, 1, 1.2;
    const MemoryStore store(m);
    const std::vector<Index> all{0, 1, 2};
    const auto rep = nph::well_separation(store, 0, Beta(1.0), 3, all);
    EXPECT_TRUE(rep.satisfied);

    // Restricting the scope to the far pair inflates R and breaks the condition.
    const std::vector<Index> pair{0, 1};
    const auto masked = nph::well_separation(store, 0, Beta(1.0), 2, pair);
    EXPECT_FALSE(masked.satisfied);

    Matrix dup(2, 2);
    dup << 1, 1, 2, 2;
    EXPECT_THROW(nph::well_separation(MemoryStore(dup), 0, Beta(1.0), 2,
                                      std::vector<Index>{0, 1}),
                 nph::DegenerateRadiusError);
}

TEST(WellSeparation, SatisfiedConditionKeepsIteratesInSphere) {
    Matrix m(2, 3);
    m << 10, 0, 0, 0, 1, 1.2;
    const MemoryStore store(m);
    const std::vector<Index> all{0, 1, 2};
    ASSERT_TRUE(nph::well_separation(store, 0, Beta(1.0), 3, all).satisfied);
    const double r = nph::min_half_distance(store, all);

    nph::Rng rng(0x5EED);
    for (int t = 0; t < 50; ++t) {
        Vector u = nph::gaussian_vector(rng, 2);
        u /= u.norm();
        const Vector x0 = store.pattern(0) + rng.next_double() * r * u;
        nph::DynamicsConfig config{Beta(1.0)};
        config.record_trajectory = true;
        const auto out = nph::retrieve(store, x0, config);
        for (const auto& iterate : out.trajectory) {
            EXPECT_LE((iterate - store.pattern(0)).norm(), r + 1e-12);
        }
    }
}

TEST(Capacity, DefiningIdentityAndEchoes) {
    const auto cap = nph::capacity_lower_bound(64, 1.0, 0.3, 1.0, 1, 0.95);
    const double w0 = cap.b / cap.c;
    const double target = std::exp(cap.w0_log_arg);
    EXPECT_LE(std::abs(w0 * std::exp(w0) - target), 1e-9 * target);
    EXPECT_NEAR(cap.a, (4.0 / 63.0) * (std::log(std::sqrt(0.95) / 0.3) + 1.0), 1e-12);
    EXPECT_NEAR(cap.b, 4.0 / (5.0 * 63.0), 1e-15);
}

TEST(Capacity, MonotoneInSupportSize) {
    double prev = std::numeric_limits<double>::infinity();
    for (Index k : {1, 4, 16, 64}) {
        const double v = nph::capacity_lower_bound(64, 1.0, 0.3, 1.0, k, 0.95).m_sparse;
        EXPECT_LE(v, prev + 1e-15);
        prev = v;
    }
}

TEST(Capacity, GrowsWithDimensionInTheStorageRegime) {
    double prev = 0.0;
    for (Index d : {8, 16, 32, 64}) {
        const auto cap = nph::capacity_lower_bound(d, 1.0, 0.3, 40.0, 4, 0.95);
        EXPECT_GT(cap.m_sparse, prev);
        prev = cap.m_sparse;
        // log M is exactly log(sqrt p) + (d-1)/4 ln C.
        const double lhs = std::log(cap.m_sparse);
        const double rhs = 0.5 * std::log(0.95) + (d - 1) / 4.0 * std::log(cap.c);
        EXPECT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, std::abs(rhs)));
    }
}

TEST(Capacity, DomainChecks) {
    EXPECT_THROW(nph::capacity_lower_bound(1, 1.0, 0.3, 1.0, 1, 0.9), nph::OutOfDomainError);
    EXPECT_THROW(nph::capacity_lower_bound(8, 0.0, 0.3, 1.0, 1, 0.9), nph::OutOfDomainError);
    EXPECT_THROW(nph::capacity_lower_bound(8, 1.0, -0.1, 1.0, 1, 0.9), nph::OutOfDomainError);
    EXPECT_THROW(nph::capacity_lower_bound(8, 1.0, 0.3, 1.0, 0, 0.9), nph::OutOfDomainError);
    EXPECT_THROW(nph::capacity_lower_bound(8, 1.0, 0.3, 1.0, 1, 0.0), nph::OutOfDomainError);
    EXPECT_THROW(nph::capacity_lower_bound(8, 1.0, 0.3, 1.0, 1, 1.5), nph::OutOfDomainError);
}

}  // namespace
