#pragma once

// Model manifolds with known curvature: distances, geodesic-ball volumes and
// Ricci lower bounds.
//
// Sign convention for warped surfaces dr^2 + f(r)^2 dtheta^2: the Gauss
// curvature is -f''/f and, in two dimensions, Ric = (-f''/f) g. Hyperbolic
// space H^3 has sectional curvature -1, so Ric = -2 g and K = 2.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heatcert/error.hpp"

namespace heatcert {

enum class GeometryKind { Euclidean, FlatTorus, FlatCylinder, Sphere2, Hyperbolic3, Warped };

// Each kind owns exactly one chart, so a chart mismatch identifies points that
// belong to a different geometry.
enum class Chart {
    Cartesian,      // Euclidean: x_1..x_n
    Toroidal,       // flat torus: n angles in [0, L)
    Cylindrical,    // flat cylinder: (z, theta), theta in [0, L)
    Spherical,      // unit sphere: (polar in [0, pi], azimuth in [0, 2pi))
    GeodesicPolar,  // H^3: (r, polar, azimuth) about a fixed origin
    WarpedPolar     // warped surface: (r, theta), r in [0, r_max]
};

struct Point {
    std::vector<double> coords;
    Chart chart = Chart::Cartesian;
};

/// Warp function of a rotationally symmetric surface dr^2 + f(r)^2 dtheta^2,
/// with analytic first and second derivatives.
struct Warp {
    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> df;
    std::function<double(double)> ddf;
    double r_max = 20.0;
};

/// f(r) = 1 - e^{-r}: smooth pole, f'' < 0, asymptotically a cylinder of
/// circumference 2 pi.
inline Warp cigar_warp(double r_max = 20.0) {
    return Warp{"cigar",
                [](double r) { return -std::expm1(-r); },
                [](double r) { return std::exp(-r); },
                [](double r) { return -std::exp(-r); },
                r_max};
}

/// f(r) = r, the Euclidean plane in polar coordinates.
inline Warp flat_warp(double r_max = 20.0) {
    return Warp{"flat",
                [](double r) { return r; },
                [](double) { return 1.0; },
                [](double) { return 0.0; },
                r_max};
}

/// f(r) = sinh r, the hyperbolic plane. Negatively curved; rejected for K = 0.
inline Warp sinh_warp(double r_max = 20.0) {
    return Warp{"sinh",
                [](double r) { return std::sinh(r); },
                [](double r) { return std::cosh(r); },
                [](double r) { return std::sinh(r); },
                r_max};
}

namespace detail {

/// Composite Simpson rule with at least `min_intervals` (rounded up to even)
/// and step no larger than `max_step`.
template <class F>
double simpson(F&& g, double a, double b, double max_step, int min_intervals = 2) {
    if (b <= a) return 0.0;
    int m = std::max(min_intervals, static_cast<int>(std::ceil((b - a) / max_step)));
    if (m % 2 != 0) ++m;
    const double h = (b - a) / m;
    double acc = g(a) + g(b);
    for (int i = 1; i < m; ++i) {
        acc += (i % 2 == 1 ? 4.0 : 2.0) * g(a + i * h);
    }
    return acc * h / 3.0;
}

inline double wrap_period(double v, double period) {
    double w = std::fmod(v, period);
    if (w < 0.0) w += period;
    if (w >= period) w -= period;
    return w;
}

}  // namespace detail

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
    return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

class ModelGeometry {
public:
    static ModelGeometry euclidean(int n) {
        if (n < 1) fail(ErrorKind::Domain, "euclidean dimension must be positive");
        ModelGeometry g(GeometryKind::Euclidean, n);
        return g;
    }

    static ModelGeometry flat_torus(int n, double period) {
        if (n < 1) fail(ErrorKind::Domain, "torus dimension must be positive");
        if (!(period > 0.0)) fail(ErrorKind::Domain, "torus period must be positive");
        ModelGeometry g(GeometryKind::FlatTorus, n);
        g.period_ = period;
        return g;
    }

    /// R x (circle of circumference `period`).
    static ModelGeometry flat_cylinder(double period) {
        if (!(period > 0.0)) fail(ErrorKind::Domain, "cylinder period must be positive");
        ModelGeometry g(GeometryKind::FlatCylinder, 2);
        g.period_ = period;
        return g;
    }

    static ModelGeometry sphere() { return ModelGeometry(GeometryKind::Sphere2, 2); }

    static ModelGeometry hyperbolic3() {
        ModelGeometry g(GeometryKind::Hyperbolic3, 3);
        g.K_ = 2.0;
        return g;
    }

    /// The warp must satisfy f(0) = 0, f'(0) = 1; checked here.
    static ModelGeometry warped(Warp warp, double quadrature_step = 1e-3) {
        if (!warp.f || !warp.df || !warp.ddf) fail(ErrorKind::Domain, "warp needs f, f', f''");
        if (std::abs(warp.f(0.0)) > 1e-14 || std::abs(warp.df(0.0) - 1.0) > 1e-12) {
            fail(ErrorKind::Domain, "warp '" + warp.name + "' must satisfy f(0)=0, f'(0)=1");
        }
        if (!(warp.r_max > 0.0)) fail(ErrorKind::Domain, "warp r_max must be positive");
        ModelGeometry g(GeometryKind::Warped, 2);
        g.warp_ = std::move(warp);
        g.quadrature_step_ = quadrature_step;
        return g;
    }

    GeometryKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return n_; }
    double period() const noexcept { return period_; }
    const Warp& warp() const noexcept { return warp_; }
    double quadrature_step() const noexcept { return quadrature_step_; }

    /// Nominal K (Ric >= -K). Warped surfaces report 0 here; use
    /// ricci_lower_bound() to certify it against the warp.
    double ricci_bound() const noexcept { return K_; }

    bool is_compact() const noexcept {
        return kind_ == GeometryKind::FlatTorus || kind_ == GeometryKind::Sphere2;
    }

    /// Euclidean, sphere, H^3 and warped surfaces are handled through the
    /// distance to the source alone.
    bool is_rotational() const noexcept {
        return kind_ == GeometryKind::Euclidean || kind_ == GeometryKind::Sphere2 ||
               kind_ == GeometryKind::Hyperbolic3 || kind_ == GeometryKind::Warped;
    }

    bool is_flat() const noexcept {
        return kind_ == GeometryKind::Euclidean || kind_ == GeometryKind::FlatTorus ||
               kind_ == GeometryKind::FlatCylinder;
    }

    Chart chart() const noexcept {
        switch (kind_) {
            case GeometryKind::Euclidean: return Chart::Cartesian;
            case GeometryKind::FlatTorus: return Chart::Toroidal;
            case GeometryKind::FlatCylinder: return Chart::Cylindrical;
            case GeometryKind::Sphere2: return Chart::Spherical;
            case GeometryKind::Hyperbolic3: return Chart::GeodesicPolar;
            case GeometryKind::Warped: return Chart::WarpedPolar;
        }
        return Chart::Cartesian;
    }

    std::size_t coordinate_count() const noexcept {
        switch (kind_) {
            case GeometryKind::Euclidean:
            case GeometryKind::FlatTorus: return static_cast<std::size_t>(n_);
            case GeometryKind::FlatCylinder:
            case GeometryKind::Sphere2:
            case GeometryKind::Warped: return 2;
            case GeometryKind::Hyperbolic3: return 3;
        }
        return 0;
    }

    /// Builds a point in this geometry's chart, reducing periodic coordinates.
    Point point(std::vector<double> coords) const {
        if (coords.size() != coordinate_count()) {
            fail(ErrorKind::DomainMismatch, "expected " + std::to_string(coordinate_count()) +
                                                " coordinates, got " + std::to_string(coords.size()));
        }
        for (double c : coords) {
            if (!std::isfinite(c)) fail(ErrorKind::Domain, "non-finite coordinate");
        }
        switch (kind_) {
            case GeometryKind::Euclidean: break;
            case GeometryKind::FlatTorus:
                for (double& c : coords) c = detail::wrap_period(c, period_);
                break;
            case GeometryKind::FlatCylinder: coords[1] = detail::wrap_period(coords[1], period_); break;
            case GeometryKind::Sphere2:
                if (coords[0] < 0.0 || coords[0] > std::numbers::pi) {
                    fail(ErrorKind::Domain, "polar angle outside [0, pi]");
                }
                coords[1] = detail::wrap_period(coords[1], 2.0 * std::numbers::pi);
                break;
            case GeometryKind::Hyperbolic3:
                if (coords[0] < 0.0) fail(ErrorKind::Domain, "negative geodesic radius");
                if (coords[1] < 0.0 || coords[1] > std::numbers::pi) {
                    fail(ErrorKind::Domain, "polar angle outside [0, pi]");
                }
                coords[2] = detail::wrap_period(coords[2], 2.0 * std::numbers::pi);
                break;
            case GeometryKind::Warped:
                if (coords[0] < 0.0 || coords[0] > warp_.r_max) {
                    fail(ErrorKind::Domain, "warped radius outside [0, r_max]");
                }
                coords[1] = detail::wrap_period(coords[1], 2.0 * std::numbers::pi);
                break;
        }
        return Point{std::move(coords), chart()};
    }

    /// A canonical base point: the origin, or the pole for rotational kinds.
    Point origin() const { return point(std::vector<double>(coordinate_count(), 0.0)); }

    void check_point(const Point& p) const {
        if (p.chart != chart() || p.coords.size() != coordinate_count()) {
            fail(ErrorKind::DomainMismatch, "point does not belong to this geometry's chart");
        }
    }

    /// Plain-text key, e.g. "euclidean:n=2".
    std::string key() const {
        auto num = [](double v) {
            char buf[32];
            const auto res = std::to_chars(buf, buf + sizeof buf, v);
            return std::string(buf, res.ptr);
        };
        switch (kind_) {
            case GeometryKind::Euclidean: return "euclidean:n=" + std::to_string(n_);
            case GeometryKind::FlatTorus: return "torus:n=" + std::to_string(n_) + ",L=" + num(period_);
            case GeometryKind::FlatCylinder: return "cylinder:L=" + num(period_);
            case GeometryKind::Sphere2: return "sphere:s2";
            case GeometryKind::Hyperbolic3: return "hyperbolic:h3";
            case GeometryKind::Warped: return "warped:f=" + warp_.name + ",Rmax=" + num(warp_.r_max);
        }
        return "unknown";
    }

private:
    ModelGeometry(GeometryKind kind, int n) : kind_(kind), n_(n) {}

    GeometryKind kind_;
    int n_;
    double K_ = 0.0;
    double period_ = 0.0;
    Warp warp_{};
    double quadrature_step_ = 1e-3;
};

namespace detail {

/// Signed displacement on a circle of circumference L, minimised over the
/// translates |k| <= 3.
inline double periodic_offset(double a, double b, double L) {
    const double raw = a - b;
    double best = raw;
    for (int k = -3; k <= 3; ++k) {
        const double cand = raw + k * L;
        if (std::abs(cand) < std::abs(best)) best = cand;
    }
    return best;
}

inline std::array<double, 3> sphere_unit(double polar, double azimuth) {
    return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)};
}

inline double angle_between(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    const std::array<double, 3> c{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
    const double cross = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
    const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    return std::atan2(cross, dot);
}

// Square [-h, h]^2 intersected with the disk of radius rho.
inline double square_disk_area(double rho, double h) {
    if (rho <= h) return std::numbers::pi * rho * rho;
    if (rho >= h * std::numbers::sqrt2) return 4.0 * h * h;
    const double segment = rho * rho * std::acos(h / rho) - h * std::sqrt(rho * rho - h * h);
    return std::numbers::pi * rho * rho - 4.0 * segment;
}

}  // namespace detail

/// Per-coordinate displacement x - y for flat kinds (periodic coordinates are
/// reduced to the shortest representative).
inline std::vector<double> displacement(const ModelGeometry& geom, const Point& x, const Point& y) {
    geom.check_point(x);
    geom.check_point(y);
    std::vector<double> d(x.coords.size());
    switch (geom.kind()) {
        case GeometryKind::Euclidean:
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = x.coords[i] - y.coords[i];
            break;
        case GeometryKind::FlatTorus:
            for (std::size_t i = 0; i < d.size(); ++i) {
                d[i] = detail::periodic_offset(x.coords[i], y.coords[i], geom.period());
            }
            break;
        case GeometryKind::FlatCylinder:
            d[0] = x.coords[0] - y.coords[0];
            d[1] = detail::periodic_offset(x.coords[1], y.coords[1], geom.period());
            break;
        default: fail(ErrorKind::NotApplicable, "displacement is defined only on flat kinds");
    }
    return d;
}

inline double distance(const ModelGeometry& geom, const Point& x, const Point& y) {
    geom.check_point(x);
    geom.check_point(y);
    switch (geom.kind()) {
        case GeometryKind::Euclidean:
        case GeometryKind::FlatTorus:
        case GeometryKind::FlatCylinder: {
            double acc = 0.0;
            for (double c : displacement(geom, x, y)) acc += c * c;
            return std::sqrt(acc);
        }
        case GeometryKind::Sphere2:
            return detail::angle_between(detail::sphere_unit(x.coords[0], x.coords[1]),
                                         detail::sphere_unit(y.coords[0], y.coords[1]));
        case GeometryKind::Hyperbolic3: {
            // Hyperboloid model: X = (cosh r, sinh r * omega).
            const auto ox = detail::sphere_unit(x.coords[1], x.coords[2]);
            const auto oy = detail::sphere_unit(y.coords[1], y.coords[2]);
            const double sx = std::sinh(x.coords[0]), sy = std::sinh(y.coords[0]);
            const double cx = std::cosh(x.coords[0]), cy = std::cosh(y.coords[0]);
            double spatial = 0.0, inner = 0.0;
            for (int i = 0; i < 3; ++i) {
                const double dx = sx * ox[i] - sy * oy[i];
                spatial += dx * dx;
                inner += sx * ox[i] * sy * oy[i];
            }
            const double cosh_d = cx * cy - inner;
            if (cosh_d > 2.0) return std::acosh(cosh_d);
            const double q = std::max(0.0, spatial - (cx - cy) * (cx - cy));
            return 2.0 * std::asinh(0.5 * std::sqrt(q));
        }
        case GeometryKind::Warped: {
            const double r1 = x.coords[0], r2 = y.coords[0];
            if (r1 == 0.0) return r2;
            if (r2 == 0.0) return r1;
            if (detail::periodic_offset(x.coords[1], y.coords[1], 2.0 * std::numbers::pi) == 0.0) {
                return std::abs(r1 - r2);
            }
            fail(ErrorKind::Unsupported,
                 "warped-surface distance is implemented for pairs through the pole or on one meridian");
        }
    }
    return 0.0;
}

namespace detail {

inline double warped_area(const ModelGeometry& geom, double r) {
    const Warp& w = geom.warp();
    if (r > w.r_max * (1.0 + 1e-12)) {
        fail(ErrorKind::Truncation, "ball radius exceeds warp chart range r_max");
    }
    return 2.0 * std::numbers::pi * simpson(w.f, 0.0, std::min(r, w.r_max), geom.quadrature_step());
}

// Ball volume from the squared radius; keeps Euclidean ratios exact in the
// doubling constant.
inline double ball_volume_sq(const ModelGeometry& geom, double r2) {
    if (!(r2 > 0.0)) fail(ErrorKind::Domain, "ball radius must be positive");
    const double r = std::sqrt(r2);
    const int n = geom.dim();
    switch (geom.kind()) {
        case GeometryKind::Euclidean: return unit_ball_volume(n) * std::pow(r2, 0.5 * n);
        case GeometryKind::FlatTorus: {
            const double L = geom.period();
            if (n == 1) return std::min(2.0 * r, L);
            if (n == 2) return square_disk_area(r, 0.5 * L);
            fail(ErrorKind::Unsupported, "torus ball volume is implemented for n <= 2");
        }
        case GeometryKind::FlatCylinder: {
            const double h = 0.5 * geom.period();
            if (r <= h) return std::numbers::pi * r2;
            return 2.0 * (h * std::sqrt(r2 - h * h) + r2 * std::asin(h / r));
        }
        case GeometryKind::Sphere2:
            if (r >= std::numbers::pi) return 4.0 * std::numbers::pi;
            return 2.0 * std::numbers::pi * (1.0 - std::cos(r));
        case GeometryKind::Hyperbolic3: return std::numbers::pi * (std::sinh(2.0 * r) - 2.0 * r);
        case GeometryKind::Warped: return warped_area(geom, r);
    }
    return 0.0;
}

}  // namespace detail

/// Volume of the geodesic ball B_y(r). All kinds here are homogeneous or
/// (warped) only queried about the pole, so the volume does not depend on y
/// beyond the chart check.
inline double ball_volume(const ModelGeometry& geom, const Point& y, double r) {
    geom.check_point(y);
    if (!(r > 0.0)) fail(ErrorKind::Domain, "ball radius must be positive");
    if (geom.kind() == GeometryKind::Warped && y.coords[0] != 0.0) {
        fail(ErrorKind::Unsupported, "warped-surface balls are centred at the pole");
    }
    return detail::ball_volume_sq(geom, r * r);
}

/// Vol(B_y(sqrt t)) / Vol(B_y(sqrt(t/2))).
inline double doubling_constant(const ModelGeometry& geom, const Point& y, double t) {
    geom.check_point(y);
    if (!(t > 0.0)) fail(ErrorKind::Domain, "doubling constant needs t > 0");
    if (geom.kind() == GeometryKind::Warped && y.coords[0] != 0.0) {
        fail(ErrorKind::Unsupported, "warped-surface balls are centred at the pole");
    }
    return detail::ball_volume_sq(geom, t) / detail::ball_volume_sq(geom, 0.5 * t);
}

struct CurvatureCertificate {
    double K = 0.0;
    double min_gauss_curvature = 0.0;  // over the certification grid (warped only)
    std::size_t grid_points = 0;
};

/// Certified Ricci lower-bound constant. Warped surfaces are scanned on the
/// grid r_k = k h, k >= 1, and rejected if f'' > 0 anywhere.
inline CurvatureCertificate certify_curvature(const ModelGeometry& geom, double grid_step = 1e-3) {
    CurvatureCertificate cert;
    cert.K = geom.ricci_bound();
    switch (geom.kind()) {
        case GeometryKind::Sphere2: cert.min_gauss_curvature = 1.0; return cert;
        case GeometryKind::Hyperbolic3: cert.min_gauss_curvature = -1.0; return cert;
        case GeometryKind::Warped: break;
        default: return cert;
    }
    const Warp& w = geom.warp();
    const auto count = static_cast<std::size_t>(std::floor(w.r_max / grid_step));
    double kmin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= count; ++k) {
        const double r = static_cast<double>(k) * grid_step;
        const double ddf = w.ddf(r);
        if (ddf > 1e-14) {
            fail(ErrorKind::CurvatureViolation, "warp '" + w.name + "' has f'' > 0 at r = " + std::to_string(r) +
                                                    " (negative Gauss curvature)");
        }
        kmin = std::min(kmin, -ddf / w.f(r));
    }
    cert.K = 0.0;
    cert.min_gauss_curvature = kmin;
    cert.grid_points = count;
    return cert;
}

inline double ricci_lower_bound(const ModelGeometry& geom) { return certify_curvature(geom).K; }

struct BishopReport {
    std::vector<double> ratios;  // Vol(B(r)) / r^n
    double max_violation = 0.0;  // largest increase between consecutive radii
};

/// r -> Vol(B_y(r)) / r^n must be nonincreasing when Ric >= 0.
inline BishopReport bishop_monotonicity_check(const ModelGeometry& geom, const Point& y,
                                              std::span<const double> radii) {
    if (geom.ricci_bound() > 0.0) {
        fail(ErrorKind::NotApplicable, "Bishop monotonicity is checked only for Ric >= 0 geometries");
    }
    BishopReport rep;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (i > 0 && !(radii[i] > radii[i - 1])) fail(ErrorKind::Domain, "radii must be increasing");
        rep.ratios.push_back(ball_volume(geom, y, radii[i]) / std::pow(radii[i], geom.dim()));
    }
    for (std::size_t i = 1; i < rep.ratios.size(); ++i) {
        rep.max_violation = std::max(rep.max_violation, rep.ratios[i] - rep.ratios[i - 1]);
    }
    return rep;
}

}  // namespace heatcert
