#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "heatcert/error.hpp"

namespace heatcert {

enum class CutoffKind { CosSquared, Quintic };

inline std::string to_string(CutoffKind k) { return k == CutoffKind::CosSquared ? "cos2" : "quintic"; }

/// Radial bump eta(r) = phi(r / R): 1 on [0, R], 0 beyond 2R.
struct CutoffProfile {
    CutoffKind kind = CutoffKind::CosSquared;
    double R = 1.0;

    double phi(double s) const {
        if (s <= 1.0) return 1.0;
        if (s >= 2.0) return 0.0;
        const double x = s - 1.0;
        if (kind == CutoffKind::CosSquared) {
            const double c = std::cos(0.5 * std::numbers::pi * x);
            return c * c;
        }
        return (1 - x) * (1 - x) * (1 - x) * (1 + 3 * x + 6 * x * x);
    }

    double dphi(double s) const {
        if (s <= 1.0 || s >= 2.0) return 0.0;
        const double x = s - 1.0;
        if (kind == CutoffKind::CosSquared) return -0.5 * std::numbers::pi * std::sin(std::numbers::pi * x);
        return -30.0 * x * x * (1 - x) * (1 - x);
    }

    double ddphi(double s) const {
        if (s <= 1.0 || s >= 2.0) return 0.0;
        const double x = s - 1.0;
        if (kind == CutoffKind::CosSquared) {
            return -0.5 * std::numbers::pi * std::numbers::pi * std::cos(std::numbers::pi * x);
        }
        return -60.0 * x * (1 - x) * (1 - 2 * x);
    }

    /// phi'^2 / phi with the removable 0/0 at s = 2 taken analytically.
    double guarded_ratio(double s) const {
        if (s <= 1.0 || s > 2.0) return 0.0;
        const double x = s - 1.0;
        if (kind == CutoffKind::CosSquared) {
            const double v = std::sin(0.5 * std::numbers::pi * x);
            return std::numbers::pi * std::numbers::pi * v * v;
        }
        return 900.0 * x * x * x * x * (1 - x) / (1 + 3 * x + 6 * x * x);
    }

    double eta(double r) const { return phi(r / R); }
    double grad_eta(double r) const { return dphi(r / R) / R; }

    /// Euclidean Laplacian of the radial function eta in dimension n.
    double lap_eta(double r, int n) const {
        const double s = r / R;
        if (s <= 1.0 || s >= 2.0) return 0.0;
        return ddphi(s) / (R * R) + (n - 1) * dphi(s) / (s * R * R);
    }

    /// R^2 |grad eta|^2 / eta on {eta > 0}; guarded near the outer edge.
    double scaled_grad_ratio(double r) const {
        const double e = eta(r);
        if (e > 1e-6) {
            const double g = grad_eta(r);
            return R * R * g * g / e;
        }
        return guarded_ratio(r / R);
    }

    double scaled_neg_lap(double r, int n) const { return -R * R * lap_eta(r, n); }
};

inline CutoffProfile build_cutoff(double R, CutoffKind kind = CutoffKind::CosSquared) {
    if (!(R > 0.0)) fail(ErrorKind::Domain, "cutoff scale must be positive");
    return CutoffProfile{kind, R};
}

struct CutoffFit {
    double gradient_part = 0.0;
    double laplacian_part = 0.0;
    double C3 = 0.0;
    double gradient_at = 0.0;  // s = r / R of the maximizer
    double laplacian_at = 0.0;
    int grid_points = 0;
};

namespace detail {

// Golden-section refinement of a grid maximum of an analytic function on [a, b].
template <class F>
double polish_max(F&& f, double a, double b, double& where) {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - g * (b - a), x2 = a + g * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    where = f1 > f2 ? x1 : x2;
    return std::max(f1, f2);
}

template <class F>
double grid_then_polish(F&& f, int grid, double& where) {
    double best = -1e300;
    int k_best = 0;
    for (int k = 0; k < grid; ++k) {
        const double s = 1.0 + static_cast<double>(k) / (grid - 1);
        const double v = f(s);
        if (v > best) {
            best = v;
            k_best = k;
        }
    }
    where = 1.0 + static_cast<double>(k_best) / (grid - 1);
    const double step = 1.0 / (grid - 1);
    double w = where;
    const double polished = polish_max(f, std::max(1.0, where - step), std::min(2.0, where + step), w);
    if (polished > best) {
        where = w;
        return polished;
    }
    return best;
}

}  // namespace detail

/// C_3 = max(sup R^2 |grad eta|^2 / eta, sup -R^2 Lap eta), scanned in
/// physical radius r = R s on [R, 2R].
inline CutoffFit cutoff_constants(const CutoffProfile& cut, int n, int grid_points = 2001) {
    if (n < 1) fail(ErrorKind::Domain, "dimension must be positive");
    if (grid_points < 3) fail(ErrorKind::Domain, "cutoff grid needs at least 3 points");
    CutoffFit fit;
    fit.grid_points = grid_points;
    fit.gradient_part =
        detail::grid_then_polish([&](double s) { return cut.scaled_grad_ratio(s * cut.R); }, grid_points, fit.gradient_at);
    fit.laplacian_part =
        detail::grid_then_polish([&](double s) { return cut.scaled_neg_lap(s * cut.R, n); }, grid_points, fit.laplacian_at);
    fit.C3 = std::max(fit.gradient_part, fit.laplacian_part);
    return fit;
}

/// Largest relative violation of |grad eta|^2 <= C3 eta / R^2 and
/// Lap eta >= -C3 / R^2 on a uniform grid over [0, 2.5 R].
inline double cutoff_bound_violation(const CutoffProfile& cut, int n, double C3, int grid_points) {
    double worst = 0.0;
    for (int k = 0; k < grid_points; ++k) {
        const double r = 2.5 * cut.R * k / (grid_points - 1);
        if (cut.eta(r) > 0.0) worst = std::max(worst, (cut.scaled_grad_ratio(r) - C3) / C3);
        worst = std::max(worst, (cut.scaled_neg_lap(r, n) - C3) / C3);
    }
    return worst;
}

}  // namespace heatcert
