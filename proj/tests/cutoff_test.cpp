#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "heatcert/cutoff.hpp"

using namespace heatcert;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(CutoffProfile, EndpointValues) {
    const auto cut = build_cutoff(1.0);
    EXPECT_EQ(cut.phi(1.0), 1.0);
    EXPECT_EQ(cut.phi(2.0), 0.0);
    EXPECT_NEAR(cut.phi(1.5), 0.5, 1e-15);
    EXPECT_EQ(cut.dphi(1.0), 0.0);
    EXPECT_EQ(cut.dphi(2.0), 0.0);
    EXPECT_NEAR(cut.dphi(1.0 + 1e-9), 0.0, 1e-8);
    EXPECT_NEAR(cut.dphi(2.0 - 1e-9), 0.0, 1e-8);
}

TEST(CutoffProfile, MonotoneBetweenZeroAndOne) {
    for (auto kind : {CutoffKind::CosSquared, CutoffKind::Quintic}) {
        const auto cut = build_cutoff(1.0, kind);
        double prev = 1.0;
        for (int k = 0; k <= 3000; ++k) {
            const double s = 3.0 * k / 3000;
            const double v = cut.phi(s);
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, prev + 1e-15);
            EXPECT_LE(cut.dphi(s), 0.0);
            prev = v;
        }
    }
}

TEST(CutoffProfile, InnerBallIsExactlyOne) {
    for (double R : {1.0, 10.0, 100.0}) {
        const auto cut = build_cutoff(R);
        for (int k = 0; k <= 100; ++k) EXPECT_EQ(cut.eta(R * k / 100.0), 1.0);
        EXPECT_EQ(cut.eta(2.0 * R), 0.0);
        EXPECT_EQ(cut.eta(3.0 * R), 0.0);
    }
}

TEST(CutoffProfile, DerivativesMatchDifferences) {
    for (auto kind : {CutoffKind::CosSquared, CutoffKind::Quintic}) {
        const auto cut = build_cutoff(1.0, kind);
        const double h = 1e-5;
        for (double s : {1.1, 1.37, 1.5, 1.8, 1.95}) {
            EXPECT_NEAR(cut.dphi(s), (cut.phi(s + h) - cut.phi(s - h)) / (2 * h), 1e-8);
            EXPECT_NEAR(cut.ddphi(s), (cut.dphi(s + h) - cut.dphi(s - h)) / (2 * h), 1e-7);
            const double g = cut.dphi(s);
            EXPECT_NEAR(cut.guarded_ratio(s), g * g / cut.phi(s), 1e-9 * (1 + cut.guarded_ratio(s)));
        }
    }
}

TEST(CutoffConstants, CosSquaredGradientPartIsPiSquared) {
    // phi'^2 / phi = pi^2 sin^2(pi (s - 1) / 2), largest at the outer edge
    const auto fit = cutoff_constants(build_cutoff(1.0), 1);
    EXPECT_NEAR(fit.gradient_part, kPi * kPi, 1e-6);
    EXPECT_NEAR(fit.gradient_at, 2.0, 1e-6);
    // n = 1: -phi'' = (pi^2 / 2) cos(pi x), largest at s = 1
    EXPECT_NEAR(fit.laplacian_part, 0.5 * kPi * kPi, 1e-9);
    EXPECT_DOUBLE_EQ(fit.C3, fit.gradient_part);
}

TEST(CutoffConstants, IndependentOfScale) {
    for (int n : {1, 2, 3}) {
        for (auto kind : {CutoffKind::CosSquared, CutoffKind::Quintic}) {
            const auto a = cutoff_constants(build_cutoff(1.0, kind), n);
            const auto b = cutoff_constants(build_cutoff(100.0, kind), n);
            EXPECT_NEAR(a.C3, b.C3, 1e-12 * a.C3) << n;
        }
    }
}

TEST(CutoffConstants, DimensionThreeWithinAnalyticBound) {
    const auto coarse = cutoff_constants(build_cutoff(1.0), 3, 1001);
    const auto fine = cutoff_constants(build_cutoff(1.0), 3, 2001);
    EXPECT_LE(coarse.laplacian_part, 0.5 * kPi * kPi + 2 * 0.5 * kPi);
    EXPECT_LE(fine.C3, 0.5 * kPi * kPi + kPi + fine.gradient_part);
    EXPECT_NEAR(coarse.C3, fine.C3, 1e-9 * fine.C3);
    EXPECT_GT(fine.laplacian_part, 0.5 * kPi * kPi);
}

TEST(CutoffConstants, BoundsReverifyOnFinerGrid) {
    for (int n : {1, 2, 3}) {
        for (auto kind : {CutoffKind::CosSquared, CutoffKind::Quintic}) {
            for (double R : {1.0, 100.0}) {
                const auto cut = build_cutoff(R, kind);
                const auto fit = cutoff_constants(cut, n, 1001);
                EXPECT_LE(cutoff_bound_violation(cut, n, fit.C3, 4001), 1e-12);
            }
        }
    }
}

TEST(CutoffConstants, ProfileDependent) {
    const auto cos2 = cutoff_constants(build_cutoff(1.0), 2);
    const auto quintic = cutoff_constants(build_cutoff(1.0, CutoffKind::Quintic), 2);
    EXPECT_GT(std::abs(cos2.C3 - quintic.C3), 0.1);
}

TEST(CutoffConstants, InvalidInput) {
    EXPECT_THROW(build_cutoff(0.0), Error);
    EXPECT_THROW(cutoff_constants(build_cutoff(1.0), 0), Error);
    EXPECT_THROW(cutoff_constants(build_cutoff(1.0), 2, 2), Error);
}
