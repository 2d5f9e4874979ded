#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "nph/experiments.hpp"
#include "nph/patterns.hpp"

namespace {

using nph::Index;
using nph::Matrix;
using nph::MemoryStore;
using nph::Vector;

MemoryStore unit_basis_2d() {
    Matrix m(2, 2);
    m << 1, 0, 0, 1;
    return MemoryStore(m);
}

TEST(MemoryStore, RejectsBadInput) {
    EXPECT_THROW(MemoryStore{Matrix(0, 0)}, nph::ShapeMismatchError);
    Matrix bad(2, 2);
    bad << 1, 2, 3, std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(MemoryStore{bad}, nph::NonFiniteError);
    Matrix ok = Matrix::Identity(2, 2);
    EXPECT_THROW((MemoryStore{ok, Matrix::Zero(3, 2)}), nph::ShapeMismatchError);
}

TEST(MemoryStore, EffectiveCombinesContamination) {
    Matrix m = Matrix::Identity(2, 2);
    Matrix c(2, 2);
    c << 0.1, 0.0, -0.1, 0.0;
    const MemoryStore store(m, c);
    EXPECT_TRUE(store.has_contamination());
    EXPECT_DOUBLE_EQ(store.effective()(0, 0), 1.1);
    EXPECT_DOUBLE_EQ(store.effective()(1, 0), -0.1);

    const MemoryStore clean(m);
    EXPECT_FALSE(clean.has_contamination());
    EXPECT_EQ(clean.effective()(0, 0), 1.0);
}

TEST(Geometry, OrthonormalBasisCase) {
    const auto g = nph::geometry_stats(unit_basis_2d());
    EXPECT_DOUBLE_EQ(g.max_norm, 1.0);
    EXPECT_NEAR(g.radius, std::sqrt(2.0) / 2.0, 1e-15);
    EXPECT_DOUBLE_EQ(g.separation[0], 1.0);
    EXPECT_DOUBLE_EQ(g.separation[1], 1.0);
}

TEST(Geometry, DuplicateColumnsDegenerate) {
    Matrix m(2, 2);
    m << 1, 1, 2, 2;
    const auto g = nph::geometry_stats(MemoryStore(m));
    EXPECT_EQ(g.radius, 0.0);
    EXPECT_EQ(g.separation[0], 0.0);
    EXPECT_EQ(g.separation[1], 0.0);
}

TEST(Geometry, SeparationMatchesBruteForce) {
    const MemoryStore store = nph::gen_sphere_patterns(4, 3, 1.0, 7);
    const auto g = nph::geometry_stats(store);
    // Exhaustive double loop as the independent oracle.
    for (Index mu = 0; mu < 3; ++mu) {
        double expected = std::numeric_limits<double>::infinity();
        for (Index nu = 0; nu < 3; ++nu) {
            if (nu == mu) continue;
            const double self = store.memories().col(mu).dot(store.memories().col(mu));
            const double cross = store.memories().col(mu).dot(store.memories().col(nu));
            expected = std::min(expected, self - cross);
        }
        EXPECT_NEAR(g.separation[mu], expected, 1e-12 * std::abs(expected));
    }
}

TEST(Geometry, SingleMemoryRules) {
    const MemoryStore store(Matrix::Ones(3, 1));
    EXPECT_THROW(nph::geometry_stats(store), nph::SingleMemoryError);
    EXPECT_DOUBLE_EQ(nph::max_memory_norm(store), std::sqrt(3.0));
    EXPECT_THROW(nph::in_sphere(store, Vector::Ones(3), 0), nph::SingleMemoryError);
}

TEST(Geometry, SeparationAtStoredPatternIsExactlyDelta) {
    const MemoryStore store = nph::gen_sphere_patterns(6, 5, 2.0, 11);
    const auto g = nph::geometry_stats(store);
    for (Index mu = 0; mu < 5; ++mu) {
        // Same arithmetic path, so the match must be exact.
        EXPECT_EQ(g.separation[mu], nph::separation_at(store, store.memories().col(mu), mu));
    }
}

TEST(InSphere, MembershipCases) {
    const MemoryStore store = unit_basis_2d();
    EXPECT_TRUE(nph::in_sphere(store, store.pattern(0), 0));
    EXPECT_FALSE(nph::in_sphere(store, store.pattern(1), 0));

    // A point at distance 0.99 R along a fixed direction stays inside.
    const double r = std::sqrt(2.0) / 2.0;
    Vector dir(2);
    dir << 0.6, 0.8;
    const Vector x = store.pattern(0) + 0.99 * r * dir;
    EXPECT_TRUE(nph::in_sphere(store, x, 0));
}

TEST(InSphere, MidpointTouchesAtMostBoundary) {
    const MemoryStore store = nph::gen_sphere_patterns(8, 4, 1.0, 3);
    const auto idx = std::vector<Index>{0, 1, 2, 3};
    const double r = nph::min_half_distance(store, idx);
    for (Index a = 0; a < 4; ++a) {
        for (Index b = a + 1; b < 4; ++b) {
            const Vector mid = 0.5 * (store.pattern(a) + store.pattern(b));
            const bool strictly_in_a = (mid - store.pattern(a)).norm() < r;
            const bool strictly_in_b = (mid - store.pattern(b)).norm() < r;
            EXPECT_FALSE(strictly_in_a && strictly_in_b);
        }
    }
}

TEST(Geometry, ScalingLaw) {
    const MemoryStore base = nph::gen_sphere_patterns(5, 4, 1.0, 17);
    const double c = 3.25;
    const MemoryStore scaled(Matrix(c * base.memories()));
    const auto g0 = nph::geometry_stats(base);
    const auto g1 = nph::geometry_stats(scaled);
    EXPECT_NEAR(g1.max_norm, c * g0.max_norm, 1e-12 * c);
    EXPECT_NEAR(g1.radius, c * g0.radius, 1e-12 * c);
    for (Index mu = 0; mu < 4; ++mu) {
        EXPECT_NEAR(g1.separation[mu], c * c * g0.separation[mu],
                    1e-12 * c * c * std::abs(g0.separation[mu]) + 1e-15);
    }
}

TEST(Geometry, MaskedScopeRestrictsPairs) {
    Matrix m(2, 3);
    m << 10, 0, 0, 0, 1, 1.2;  // one far pattern, two close together
    const MemoryStore store{m};
    const std::vector<Index> all{0, 1, 2};
    const std::vector<Index> pair{0, 1};
    EXPECT_NEAR(nph::min_half_distance(store, all), 0.1, 1e-12);
    EXPECT_NEAR(nph::min_half_distance(store, pair), std::sqrt(101.0) / 2.0, 1e-12);
}

}  // namespace
