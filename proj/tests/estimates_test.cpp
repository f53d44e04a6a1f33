#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "heatcert/estimates.hpp"

using namespace heatcert;

namespace {

// Closed forms, checked with mpmath.
constexpr double kInvEight_e = 0.04598493014643029;      // e^{-1} / 8
constexpr double kThreeMinus1_5 = 0.19245008972987525;  // 3^{-3/2}
constexpr double kSqrtPi = 1.7724538509055160;
constexpr double kAssembledN2 = 15.862943611198906;  // 2 + 4 log 32

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::Config;
}

SamplingPlan quick_plan() {
    SamplingPlan p;
    p.n_time = 61;
    p.n_space = 41;
    p.refine_levels = 1;
    return p;
}

}  // namespace

TEST(Oracles, BernsteinLaplacianEuclideanLine) {
    const auto fit = bernstein_laplacian_fit(ModelGeometry::euclidean(1), SamplingPlan{});
    EXPECT_NEAR(fit.value, kThreeMinus1_5, 1e-4);
}

TEST(Oracles, KotschwarGradientEuclideanLine) {
    const auto fit = kotschwar_gradient_fit(ModelGeometry::euclidean(1), SamplingPlan{});
    EXPECT_NEAR(fit.value, kInvEight_e, 1e-4);
    EXPECT_LE(fit.value, kInvEight_e * (1 + 1e-12));
}

TEST(Oracles, LiYauConstant) {
    const auto f1 = li_yau_fit(ModelGeometry::euclidean(1), SamplingPlan{});
    EXPECT_NEAR(f1.value, kSqrtPi, 1e-5);
    const auto f2 = li_yau_fit(ModelGeometry::euclidean(2), SamplingPlan{});
    EXPECT_NEAR(f2.value, 4.0, 1e-6);
    EXPECT_EQ(f2.binding_label, "0");  // lower bound binds
    EXPECT_NEAR(f2.binding.coords.at(0), 0.0, 1e-15);
    SamplingPlan p;
    for (double delta : {0.5, 3.5}) {
        p.delta = delta;
        EXPECT_NEAR(li_yau_fit(ModelGeometry::euclidean(2), p).value, 4.0, 1e-6);
    }
}

TEST(Oracles, KernelLaplacianConstantAndAssembly) {
    for (int n : {1, 2, 3}) {
        const auto rep = kernel_laplacian_bound(ModelGeometry::euclidean(n), SamplingPlan{});
        ASSERT_TRUE(rep.fitted_constant.has_value());
        EXPECT_NEAR(*rep.fitted_constant, -0.25 * n, 1e-5);
        EXPECT_TRUE(rep.pass);
        EXPECT_GT(rep.worst_margin, 0.0);
    }
    const auto rep = kernel_laplacian_bound(ModelGeometry::euclidean(2), SamplingPlan{});
    EXPECT_NEAR(rep.metrics.at("C1"), 4.0, 1e-9);
    EXPECT_EQ(rep.metrics.at("C2"), 2.0);
    EXPECT_NEAR(rep.metrics.at("assembled_C"), kAssembledN2, 1e-8);
}

TEST(Oracles, DoublingExact) {
    for (int n : {1, 2, 3}) {
        const auto rep = doubling_report(ModelGeometry::euclidean(n), SamplingPlan{});
        EXPECT_DOUBLE_EQ(*rep.fitted_constant, std::pow(2.0, 0.5 * n));
        EXPECT_TRUE(rep.pass);
    }
}

TEST(Inequalities, HamiltonGradientEuclideanRatio) {
    SamplingPlan p;
    for (int n : {1, 2, 3}) {
        const auto rep = hamilton_gradient_margin(ModelGeometry::euclidean(n), p);
        EXPECT_TRUE(rep.pass);
        EXPECT_GE(rep.worst_margin, 0.0);
        EXPECT_LE(rep.metrics.at("max_lhs_over_rhs"), p.T / (p.T + p.t0) + 1e-12);
    }
}

TEST(Inequalities, HamiltonGradientHyperbolic) {
    SamplingPlan p;
    p.d_max = 6.0;
    const auto rep = hamilton_gradient_margin(ModelGeometry::hyperbolic3(), p);
    EXPECT_EQ(rep.metrics.at("K"), 2.0);
    EXPECT_GE(rep.worst_margin, 0.0);
}

TEST(Inequalities, MainLaplacianEuclideanCorner) {
    SamplingPlan p;
    p.t_min_rel = 1e-5;
    for (int n : {1, 2, 3}) {
        const auto rep = main_laplacian_margin(ModelGeometry::euclidean(n), p);
        EXPECT_NEAR(rep.worst_margin, n, 1e-3);
        EXPECT_EQ(rep.argmin.t, p.t_min());
        EXPECT_EQ(rep.metrics.at("argmin_distance"), 0.0);
    }
}

TEST(Inequalities, MainLaplacianCylinderAndSphere) {
    EXPECT_TRUE(main_laplacian_margin(ModelGeometry::flat_cylinder(2 * std::numbers::pi), quick_plan()).pass);
    EXPECT_TRUE(main_laplacian_margin(ModelGeometry::sphere(), quick_plan()).pass);
}

TEST(Inequalities, HypothesisGates) {
    const auto h3 = ModelGeometry::hyperbolic3();
    const SamplingPlan p = quick_plan();
    EXPECT_EQ(kind_of([&] { main_laplacian_margin(h3, p); }), ErrorKind::Hypothesis);
    EXPECT_EQ(kind_of([&] { kernel_laplacian_bound(h3, p); }), ErrorKind::Hypothesis);
    EXPECT_EQ(kind_of([&] { bernstein_laplacian_fit(h3, p); }), ErrorKind::Hypothesis);
    EXPECT_EQ(kind_of([&] { li_yau_fit(h3, p); }), ErrorKind::Hypothesis);
    EXPECT_EQ(kind_of([&] { p_function_check(h3, p, 1e-2); }), ErrorKind::Hypothesis);
    EXPECT_EQ(kind_of([&] { closed_manifold_laplacian_margin(ModelGeometry::euclidean(2), p); }),
              ErrorKind::Hypothesis);
    EXPECT_EQ(kind_of([&] { f_evolution_check(h3, p); }), ErrorKind::Hypothesis);
    EXPECT_EQ(kind_of([&] { bochner_residuals(ModelGeometry::warped(cigar_warp()), p); }),
              ErrorKind::NotApplicable);
    EXPECT_EQ(kind_of([&] { run_estimate("eq9.9", ModelGeometry::euclidean(1), p); }), ErrorKind::Config);
    try {
        main_laplacian_margin(h3, p);
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("requires nonnegative Ricci curvature"), std::string::npos);
    }
}

TEST(Properties, ScaleCovariance) {
    for (const std::string id : {"eq1.1", "eq1.4", "thm1.3"}) {
        for (int n : {1, 3}) {
            SamplingPlan a = quick_plan(), b = quick_plan();
            a.refine_levels = b.refine_levels = 0;
            const double lambda = 3.0;
            b.t0 *= lambda * lambda;
            b.T *= lambda * lambda;
            const auto geom = ModelGeometry::euclidean(n);
            const auto ra = run_estimate(id, geom, a), rb = run_estimate(id, geom, b);
            if (id == "thm1.3") {
                EXPECT_NEAR(*ra.fitted_constant, *rb.fitted_constant, 1e-10);
            } else {
                EXPECT_NEAR(ra.worst_margin, rb.worst_margin, 1e-10) << id;
            }
            EXPECT_NEAR(ra.argmin.t * lambda * lambda, rb.argmin.t, 1e-10);
        }
    }
}

TEST(Properties, PointwiseRatiosScaleInvariant) {
    const double lambda = 0.37;
    for (int n : {1, 2, 3}) {
        for (double d : {0.0, 0.4, 1.3}) {
            for (double t : {0.2, 1.0}) {
                const auto j1 = euclidean_jet(n, d, t);
                const auto j2 = euclidean_jet(n, lambda * d, lambda * lambda * t);
                EXPECT_NEAR(t * j1.lap / j1.u, lambda * lambda * t * j2.lap / j2.u, 1e-10);
                EXPECT_NEAR(t * j1.grad_sq / (j1.u * j1.u), lambda * lambda * t * j2.grad_sq / (j2.u * j2.u), 1e-10);
            }
        }
    }
}

TEST(Properties, DeterministicAcrossThreadCounts) {
    SamplingPlan a = quick_plan();
    SamplingPlan b = a;
    b.threads = 4;
    const auto geom = ModelGeometry::flat_torus(1, 2 * std::numbers::pi);
    for (const std::string id : {"eq1.1", "eq1.2-fit", "thm2.1-fit", "bochner", "p-function"}) {
        const auto ra = run_estimate(id, geom, a), rb = run_estimate(id, geom, b);
        EXPECT_EQ(ra.worst_margin, rb.worst_margin) << id;
        EXPECT_EQ(ra.argmin.t, rb.argmin.t) << id;
        EXPECT_EQ(ra.argmin.coords, rb.argmin.coords) << id;
        EXPECT_EQ(ra.samples, rb.samples) << id;
        EXPECT_EQ(ra.metrics, rb.metrics) << id;
    }
}

TEST(Properties, FitsNondecreasingUnderRefinement) {
    SamplingPlan p = quick_plan();
    p.refine_levels = 2;
    p.refine_tol = 0.0;
    for (const auto& geom : {ModelGeometry::euclidean(2), ModelGeometry::sphere(),
                             ModelGeometry::flat_torus(1, 2 * std::numbers::pi)}) {
        for (const auto& fit : {kotschwar_gradient_fit(geom, p), bernstein_laplacian_fit(geom, p), li_yau_fit(geom, p)}) {
            ASSERT_EQ(fit.by_level.size(), 3u);
            EXPECT_LE(fit.by_level[0], fit.by_level[1]);
            EXPECT_LE(fit.by_level[1], fit.by_level[2]);
        }
    }
}

TEST(Fits, BernsteinIndependentOfHorizon) {
    SamplingPlan a;
    a.refine_levels = 0;
    a.T = 10.0;
    a.n_time = 1000;
    SamplingPlan b = a;
    b.T = 100.0;
    b.n_time = 10000;
    b.n_space = 41;
    a.n_space = 41;
    a.d_max = b.d_max = 6.0;
    a.family_factors = b.family_factors = {1.0};
    const auto geom = ModelGeometry::euclidean(1);
    const double va = bernstein_laplacian_fit(geom, a).value, vb = bernstein_laplacian_fit(geom, b).value;
    EXPECT_NEAR(va, vb, 1e-10);
    EXPECT_NEAR(va, kThreeMinus1_5, 1e-10);
}

TEST(Fits, HyperbolicGradientStable) {
    SamplingPlan p;
    p.refine_tol = 0.0;
    p.refine_levels = 1;
    const auto rep = family_fit_report("thm2.1-fit", ModelGeometry::hyperbolic3(), p,
                                       kotschwar_gradient_fit(ModelGeometry::hyperbolic3(), p));
    EXPECT_TRUE(std::isfinite(*rep.fitted_constant));
    EXPECT_LE(std::abs(rep.metrics.at("fitted_2x") - rep.metrics.at("fitted_1x")), 0.02 * rep.metrics.at("fitted_2x"));
}

TEST(Fits, ClosedManifolds) {
    const auto torus = closed_manifold_laplacian_margin(ModelGeometry::flat_torus(1, 2 * std::numbers::pi), SamplingPlan{});
    EXPECT_TRUE(torus.pass);
    EXPECT_LE(*torus.fitted_constant, 1.0);
    EXPECT_GE(torus.metrics.at("eq1.4_cross_check_margin"), 0.0);
    SamplingPlan p;
    p.refine_tol = 0.0;
    p.refine_levels = 1;
    const auto sphere = closed_manifold_laplacian_margin(ModelGeometry::sphere(), p);
    EXPECT_TRUE(std::isfinite(*sphere.fitted_constant));
    EXPECT_LE(std::abs(sphere.metrics.at("fitted_2x") - sphere.metrics.at("fitted_1x")),
              0.02 * std::abs(sphere.metrics.at("fitted_2x")));
}

TEST(FEvolution, EuclideanResidualNonnegativeAtCriticalC) {
    const auto r = f_evolution_check(ModelGeometry::euclidean(1), quick_plan());
    EXPECT_GT(r.c_critical, 0.0);
    EXPECT_GE(r.worst_relative_residual, -1e-9);
    EXPECT_GE(r.cstar, r.measured_grad_sup);
    // smaller c keeps the inequality
    const auto half = f_evolution_check(ModelGeometry::euclidean(1), quick_plan(), r.cstar, 0.5 * r.c_critical);
    EXPECT_GT(half.worst_relative_residual, 0.0);
    const auto twice = f_evolution_check(ModelGeometry::euclidean(1), quick_plan(), r.cstar, 2.0 * r.c_critical);
    EXPECT_LT(twice.worst_relative_residual, 0.0);
}

TEST(FEvolution, CriticalCScalesWithInverseSquareOfCstar) {
    std::vector<double> products;
    for (double t0 : {0.05, 0.1, 0.2}) {
        SamplingPlan p = quick_plan();
        p.t0 = t0;
        p.T = 2.0 * t0;
        const auto r = f_evolution_check(ModelGeometry::euclidean(1), p);
        products.push_back(r.c_critical * r.cstar * r.cstar);
    }
    EXPECT_NEAR(products[1] / products[0], 1.0, 0.1);
    EXPECT_NEAR(products[2] / products[0], 1.0, 0.1);
}

TEST(FEvolution, Preconditions) {
    const auto geom = ModelGeometry::euclidean(1);
    EXPECT_EQ(kind_of([&] { f_evolution_check(geom, quick_plan(), 1e-6); }), ErrorKind::Precondition);
    SamplingPlan p = quick_plan();
    p.T = 0.9;
    EXPECT_NO_THROW(f_evolution_check(ModelGeometry::hyperbolic3(), p));
}

TEST(Bochner, ResidualsBelowTolerance) {
    for (const auto& geom : {ModelGeometry::euclidean(1), ModelGeometry::euclidean(2), ModelGeometry::euclidean(3),
                             ModelGeometry::flat_torus(1, 2 * std::numbers::pi),
                             ModelGeometry::flat_torus(2, 2 * std::numbers::pi), ModelGeometry::hyperbolic3(),
                             ModelGeometry::sphere()}) {
        const auto r = bochner_residuals(geom, SamplingPlan{});
        EXPECT_EQ(r.points, 1000);
        EXPECT_LE(r.max_rel_gradient, 1e-6) << geom.key();
        EXPECT_LE(r.max_rel_laplacian, 1e-6) << geom.key();
        EXPECT_EQ(r.cauchy_schwarz_violations, 0);
    }
}

TEST(Bochner, RicciFactorByKind) {
    EXPECT_EQ(detail::ricci_factor(ModelGeometry::euclidean(2)), 0.0);
    EXPECT_EQ(detail::ricci_factor(ModelGeometry::sphere()), 1.0);
    EXPECT_EQ(detail::ricci_factor(ModelGeometry::hyperbolic3()), -2.0);
    EXPECT_EQ(kind_of([] { detail::ricci_factor(ModelGeometry::warped(cigar_warp())); }), ErrorKind::NotApplicable);
}

TEST(PFunction, NegativeOnEuclideanAndCylinder) {
    for (const auto& geom : {ModelGeometry::euclidean(1), ModelGeometry::euclidean(2),
                             ModelGeometry::flat_cylinder(2 * std::numbers::pi)}) {
        for (double e : {1e-2, 1e-4}) {
            const auto r = p_function_check(geom, SamplingPlan{}, e);
            EXPECT_LT(r.max_P, 0.0);
            EXPECT_EQ(r.case_counts[0] + r.case_counts[1] + r.case_counts[2], r.samples);
            EXPECT_EQ(r.case3_violations, 0);
            EXPECT_EQ(r.heat_violations, 0);
            EXPECT_EQ(r.weighted_quadrature, 0.0);
            EXPECT_LT(r.initial_slice_max_P, 0.0);
            EXPECT_EQ(r.shifted_bound_computed, e >= 1e-3);
        }
    }
}

TEST(PFunction, ReportPasses) {
    const auto rep = p_function_report(ModelGeometry::euclidean(2), SamplingPlan{});
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.metrics.at("eps_rel=0.01:classified_fraction"), 1.0);
    EXPECT_TRUE(rep.metrics.count("eps_rel=0.01:max_P_over_A_bound_A_plus_eps"));
    EXPECT_FALSE(rep.metrics.count("eps_rel=0.0001:max_P_over_A_bound_A_plus_eps"));
}

TEST(Sharpness, RatioApproachesLimit) {
    std::vector<double> ts;
    for (int k = 1; k <= 4; ++k) ts.push_back(std::pow(10.0, -k));
    for (double delta : {2.0, 3.9}) {
        const auto scan = sharpness_scan(ModelGeometry::euclidean(2), 1.0, delta, ts);
        EXPECT_NEAR(scan.limit, (4 - delta) / 32, 1e-15);
        EXPECT_NEAR(scan.rows.back().ratio, scan.limit, 0.05 * scan.limit);
        EXPECT_TRUE(scan.monotone);
    }
    EXPECT_THROW(sharpness_scan(ModelGeometry::sphere(), 1.0, 2.0, ts), Error);
}

TEST(Warped, CigarInequalitiesPass) {
    const auto geom = ModelGeometry::warped(cigar_warp());
    for (const std::string id : {"eq1.1", "eq1.4", "thm1.3", "thm2.1-fit", "thm2.4-fit"}) {
        const auto rep = run_estimate(id, geom, SamplingPlan{});
        EXPECT_TRUE(rep.pass) << id << " margin " << rep.worst_margin;
        EXPECT_EQ(rep.metrics.at("solver_positivity_violations"), 0.0);
        EXPECT_EQ(rep.metrics.at("solver_max_principle"), 1.0);
    }
}

TEST(Cutoff, ReportOnEuclidean) {
    const auto rep = cutoff_report(ModelGeometry::euclidean(2), SamplingPlan{});
    EXPECT_TRUE(rep.pass);
    EXPECT_LE(rep.metrics.at("R_relative_gap"), 1e-12);
    EXPECT_NEAR(*rep.fitted_constant, std::numbers::pi * std::numbers::pi, 1e-6);
    EXPECT_EQ(kind_of([] { cutoff_report(ModelGeometry::sphere(), SamplingPlan{}); }), ErrorKind::NotApplicable);
}
