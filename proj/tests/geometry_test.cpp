#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "heatcert/geometry.hpp"

using namespace heatcert;

namespace {

constexpr double kPi = std::numbers::pi;

Point random_point(const ModelGeometry& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> c(g.coordinate_count());
    switch (g.kind()) {
        case GeometryKind::Euclidean:
            for (double& v : c) v = 10.0 * unit(rng) - 5.0;
            break;
        case GeometryKind::FlatTorus:
            for (double& v : c) v = g.period() * unit(rng);
            break;
        case GeometryKind::FlatCylinder:
            c = {20.0 * unit(rng) - 10.0, g.period() * unit(rng)};
            break;
        case GeometryKind::Sphere2:
            c = {std::acos(2.0 * unit(rng) - 1.0), 2.0 * kPi * unit(rng)};
            break;
        case GeometryKind::Hyperbolic3:
            c = {4.0 * unit(rng), std::acos(2.0 * unit(rng) - 1.0), 2.0 * kPi * unit(rng)};
            break;
        case GeometryKind::Warped:
            c = {g.warp().r_max * unit(rng), 0.0};
            break;
    }
    return g.point(c);
}

}  // namespace

TEST(Distance, EuclideanPythagoras) {
    const auto g = ModelGeometry::euclidean(2);
    EXPECT_DOUBLE_EQ(distance(g, g.point({0, 0}), g.point({3, 4})), 5.0);
}

TEST(Distance, TorusWrapsToShorterArc) {
    const auto g = ModelGeometry::flat_torus(1, 2.0 * kPi);
    EXPECT_NEAR(distance(g, g.point({0.1}), g.point({2.0 * kPi - 0.1})), 0.2, 1e-14);
}

TEST(Distance, SphereAntipodes) {
    const auto g = ModelGeometry::sphere();
    EXPECT_NEAR(distance(g, g.point({0.0, 0.0}), g.point({kPi, 0.0})), kPi, 1e-15);
    EXPECT_NEAR(distance(g, g.point({kPi / 2, 0.3}), g.point({kPi / 2, 0.3 + kPi})), kPi, 1e-15);
}

TEST(Distance, HyperbolicRadialAndSmallSeparation) {
    const auto g = ModelGeometry::hyperbolic3();
    EXPECT_NEAR(distance(g, g.origin(), g.point({2.5, 1.0, 2.0})), 2.5, 1e-14);
    // Two points on opposite rays through the origin.
    EXPECT_NEAR(distance(g, g.point({1.0, kPi / 2, 0.0}), g.point({2.0, kPi / 2, kPi})), 3.0, 1e-12);
    EXPECT_NEAR(distance(g, g.point({1.0, 0.5, 0.5}), g.point({1.0 + 1e-7, 0.5, 0.5})), 1e-7, 1e-15);
}

TEST(Distance, DomainMismatch) {
    const auto e = ModelGeometry::euclidean(2);
    const auto t = ModelGeometry::flat_torus(2, 1.0);
    try {
        (void)distance(e, e.origin(), t.origin());
        FAIL() << "expected domain-mismatch";
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::DomainMismatch);
    }
    EXPECT_THROW((void)e.point({1.0, 2.0, 3.0}), Error);
}

TEST(Distance, MetricAxiomsOnRandomTriples) {
    std::mt19937_64 rng(7);
    const std::vector<ModelGeometry> geoms{ModelGeometry::euclidean(3), ModelGeometry::flat_torus(2, 2.0 * kPi),
                                           ModelGeometry::flat_torus(1, 3.0), ModelGeometry::flat_cylinder(2.0 * kPi),
                                           ModelGeometry::sphere(), ModelGeometry::hyperbolic3()};
    for (const auto& g : geoms) {
        for (int k = 0; k < 1000; ++k) {
            const auto x = random_point(g, rng), y = random_point(g, rng), z = random_point(g, rng);
            const double dxy = distance(g, x, y), dyx = distance(g, y, x);
            EXPECT_NEAR(dxy, dyx, 1e-12) << g.key();
            EXPECT_GE(dxy, 0.0);
            EXPECT_EQ(distance(g, x, x), 0.0) << g.key();
            EXPECT_LE(distance(g, x, z), dxy + distance(g, y, z) + 1e-12) << g.key();
        }
    }
}

TEST(BallVolume, ClosedForms) {
    const auto e2 = ModelGeometry::euclidean(2);
    const auto e3 = ModelGeometry::euclidean(3);
    const auto s = ModelGeometry::sphere();
    EXPECT_NEAR(ball_volume(e2, e2.origin(), 1.0), kPi, 1e-15);
    EXPECT_NEAR(ball_volume(e3, e3.origin(), 2.0), 32.0 * kPi / 3.0, 1e-13);
    EXPECT_NEAR(ball_volume(s, s.origin(), kPi), 4.0 * kPi, 1e-14);
    for (int n = 1; n <= 5; ++n) {
        const auto e = ModelGeometry::euclidean(n);
        const double omega = std::pow(kPi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
        EXPECT_NEAR(ball_volume(e, e.origin(), 1.7), omega * std::pow(1.7, n), 1e-12);
    }
}

TEST(BallVolume, WarpedMatchesAnalyticIntegral) {
    const auto g = ModelGeometry::warped(cigar_warp(20.0));
    for (double r : {0.01, 0.5, 3.0, 19.0}) {
        // 2 pi * int_0^r (1 - e^{-s}) ds
        const double exact = 2.0 * kPi * (r + std::expm1(-r));
        EXPECT_NEAR(ball_volume(g, g.origin(), r), exact, 1e-9 * std::max(1.0, exact));
    }
    try {
        (void)ball_volume(g, g.origin(), 25.0);
        FAIL() << "expected truncation";
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::Truncation);
    }
}

TEST(BallVolume, HyperbolicAgainstQuadrature) {
    const auto g = ModelGeometry::hyperbolic3();
    const double r = 1.3;
    const double q = 4.0 * kPi * detail::simpson([](double s) { return std::sinh(s) * std::sinh(s); }, 0.0, r, 1e-4);
    EXPECT_NEAR(ball_volume(g, g.origin(), r), q, 1e-10);
}

TEST(BallVolume, TorusSquareDiskAgainstMonteCarloFreeGrid) {
    // Count midpoints of a fine grid on the fundamental square.
    const double L = 2.0, h = 0.5 * L;
    const auto g = ModelGeometry::flat_torus(2, L);
    for (double r : {0.5, 1.2, 1.6}) {
        const int m = 2000;
        long inside = 0;
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                const double x = -h + (i + 0.5) * L / m, y = -h + (j + 0.5) * L / m;
                if (x * x + y * y < r * r) ++inside;
            }
        }
        const double grid = inside * (L / m) * (L / m);
        EXPECT_NEAR(ball_volume(g, g.origin(), r), grid, 2e-3) << r;
    }
}

TEST(Doubling, EuclideanIsTwoToHalfN) {
    for (int n = 1; n <= 4; ++n) {
        const auto g = ModelGeometry::euclidean(n);
        for (double t : {1e-3, 0.7, 1.0, 31.0}) {
            EXPECT_DOUBLE_EQ(doubling_constant(g, g.origin(), t), std::pow(2.0, n / 2.0));
        }
    }
    const auto e2 = ModelGeometry::euclidean(2);
    EXPECT_EQ(doubling_constant(e2, e2.origin(), 0.37), 2.0);
}

TEST(Doubling, WarpedSmallBallLimit) {
    const auto g = ModelGeometry::warped(cigar_warp());
    const double t = 1e-4;
    auto area = [](double r) { return 2.0 * kPi * (r + std::expm1(-r)); };
    const double exact = area(std::sqrt(t)) / area(std::sqrt(t / 2.0));
    EXPECT_NEAR(doubling_constant(g, g.origin(), t), exact, 1e-9);
    EXPECT_NEAR(doubling_constant(g, g.origin(), t), 2.0, 5e-3);
    EXPECT_LT(doubling_constant(g, g.origin(), t), 2.0);
}

TEST(Doubling, CircleSaturates) {
    const double L = 2.0 * kPi;
    const auto g = ModelGeometry::flat_torus(1, L);
    // Both balls cover the circle once t/2 >= (L/2)^2.
    EXPECT_DOUBLE_EQ(doubling_constant(g, g.origin(), 0.5 * L * L), 1.0);
    EXPECT_DOUBLE_EQ(doubling_constant(g, g.origin(), 3.0 * L * L), 1.0);
    // At t = (L/2)^2 only the larger ball is saturated.
    EXPECT_NEAR(doubling_constant(g, g.origin(), 0.25 * L * L), std::sqrt(2.0), 1e-14);
}

TEST(Doubling, BishopGromovBoundForNonnegativeRicci) {
    const std::vector<ModelGeometry> geoms{ModelGeometry::euclidean(1), ModelGeometry::euclidean(3),
                                           ModelGeometry::flat_torus(1, 2.0 * kPi), ModelGeometry::flat_torus(2, 3.0),
                                           ModelGeometry::flat_cylinder(2.0 * kPi), ModelGeometry::sphere(),
                                           ModelGeometry::warped(cigar_warp())};
    for (const auto& g : geoms) {
        for (double t = 1e-3; t < 100.0; t *= 1.7) {
            EXPECT_LE(doubling_constant(g, g.origin(), t), std::pow(2.0, g.dim() / 2.0) + 1e-9) << g.key() << " t=" << t;
        }
    }
}

TEST(Bishop, EuclideanEqualityCase) {
    const auto g = ModelGeometry::euclidean(2);
    const std::vector<double> radii{1, 2, 4};
    const auto rep = bishop_monotonicity_check(g, g.origin(), radii);
    for (double r : rep.ratios) EXPECT_NEAR(r, kPi, 1e-14);
    EXPECT_LE(rep.max_violation, 1e-14);
}

TEST(Bishop, CylinderStrictlyDecreasing) {
    const auto g = ModelGeometry::flat_cylinder(2.0 * kPi);
    const std::vector<double> radii{0.5, 5, 50};
    const auto rep = bishop_monotonicity_check(g, g.origin(), radii);
    // Frozen from an independent closed-form / brute-force quadrature run.
    EXPECT_NEAR(rep.ratios[0], kPi, 1e-14);
    EXPECT_NEAR(rep.ratios[1], 2.33638842627358214, 1e-12);
    EXPECT_NEAR(rep.ratios[2], 0.251161947413586611, 1e-12);
    EXPECT_EQ(rep.max_violation, 0.0);
}

TEST(Bishop, WarpedCigarNonincreasing) {
    const auto g = ModelGeometry::warped(cigar_warp());
    const std::vector<double> radii{0.5, 1, 2};
    const auto rep = bishop_monotonicity_check(g, g.origin(), radii);
    EXPECT_LE(rep.max_violation, 1e-8);
    EXPECT_GT(rep.ratios[0], rep.ratios[2]);
}

TEST(Bishop, RejectsPositiveK) {
    const auto g = ModelGeometry::hyperbolic3();
    const std::vector<double> radii{1, 2};
    try {
        (void)bishop_monotonicity_check(g, g.origin(), radii);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::NotApplicable);
    }
}

TEST(Ricci, KnownBounds) {
    EXPECT_EQ(ricci_lower_bound(ModelGeometry::euclidean(3)), 0.0);
    EXPECT_EQ(ricci_lower_bound(ModelGeometry::sphere()), 0.0);
    EXPECT_EQ(ricci_lower_bound(ModelGeometry::hyperbolic3()), 2.0);
}

TEST(Ricci, CigarCertifiedNonnegative) {
    const auto cert = certify_curvature(ModelGeometry::warped(cigar_warp()));
    EXPECT_EQ(cert.K, 0.0);
    EXPECT_GT(cert.min_gauss_curvature, 0.0);
    // -f''/f = e^{-r}/(1-e^{-r}) is decreasing, so the minimum sits at r_max.
    EXPECT_NEAR(cert.min_gauss_curvature, std::exp(-20.0) / (1.0 - std::exp(-20.0)), 1e-18);
}

TEST(Ricci, NegativelyCurvedWarpRejected) {
    try {
        (void)ricci_lower_bound(ModelGeometry::warped(sinh_warp(5.0)));
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::CurvatureViolation);
    }
}

TEST(Warp, PoleConditionsChecked) {
    Warp bad = flat_warp();
    bad.f = [](double r) { return 1.0 + r; };
    EXPECT_THROW((void)ModelGeometry::warped(bad), Error);
}
