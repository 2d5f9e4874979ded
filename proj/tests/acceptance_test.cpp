// Integration gate: every check pins its tolerance in code and prints one
// pass/fail line with the measured numbers.

#include <gtest/gtest.h>

#include <cstdio>

#include "nph/selfcheck.hpp"

namespace {

void report(const nph::selfcheck::CheckResult& result) {
    std::printf("[%s] %s — %s\n", result.passed ? "PASS" : "FAIL", result.name.c_str(),
                result.detail.c_str());
    EXPECT_TRUE(result.passed) << result.name << ": " << result.detail;
}

TEST(Acceptance, DenseOneStepRecovery) { report(nph::selfcheck::dense_one_step_recovery()); }

TEST(Acceptance, ErrorBoundDomination) { report(nph::selfcheck::error_bound_domination()); }

TEST(Acceptance, SparseErrorAtMostDense) { report(nph::selfcheck::sparse_at_most_dense()); }

TEST(Acceptance, FullSupportSetReducesToDense) { report(nph::selfcheck::full_mask_reduction()); }

TEST(Acceptance, EnergyMonotoneAndConvergent) {
    report(nph::selfcheck::energy_monotone_convergence());
}

TEST(Acceptance, LambertWRoundTrip) { report(nph::selfcheck::lambert_w_roundtrip()); }

TEST(Acceptance, CapacityIdentityAndMonotonicity) {
    report(nph::selfcheck::capacity_identity_monotonicity());
}

TEST(Acceptance, SeriesKernelMatchesSoftmax) {
    report(nph::selfcheck::series_kernel_matches_softmax());
}

TEST(Acceptance, RandomFeaturesApproximateDense) {
    report(nph::selfcheck::random_features_approximate_dense());
}

TEST(Acceptance, HalfMaskSweepShape) { report(nph::selfcheck::half_mask_sweep_shape()); }

TEST(Acceptance, BenchDeterminism) { report(nph::selfcheck::bench_determinism()); }

}  // namespace
