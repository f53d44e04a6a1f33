#pragma once

// Heat kernels with analytic derivatives through third order.
//
//   Euclidean   closed-form Gaussian
//   torus       product of 1-D periodic kernels (image sum or Fourier series)
//   cylinder    Gaussian x periodic kernel
//   sphere      Legendre series, term-wise differentiated
//   H^3         (4 pi t)^{-3/2} (r / sinh r) exp(-t - r^2 / 4t)
//
// Warped surfaces have no closed-form kernel; see discrete.hpp.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "heatcert/error.hpp"
#include "heatcert/geometry.hpp"

namespace heatcert {

/// Value and derivative invariants of a heat solution at a space-time point.
struct KernelJet {
    double u = 0.0;
    double grad_sq = 0.0;      // |grad u|^2
    double lap = 0.0;          // Laplacian of u
    double hess_sq = 0.0;      // |Hess u|^2
    double grad_lap_sq = 0.0;  // |grad Lap u|^2
};

namespace detail {

// Value and first three derivatives of a function of one variable.
struct Deriv3 {
    double v = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
};

inline Deriv3 gaussian_1d(double z, double t) {
    const double g = std::exp(-z * z / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
    return {g, -z / (2.0 * t) * g, (z * z / (4.0 * t * t) - 1.0 / (2.0 * t)) * g,
            (3.0 * z / (4.0 * t * t) - z * z * z / (8.0 * t * t * t)) * g};
}

}  // namespace detail

/// 1-D periodic heat kernel on a circle of circumference L as a sum over
/// Euclidean images x + kL.
inline detail::Deriv3 periodic_kernel_images(double x, double t, double L) {
    if (!(t > 0.0)) fail(ErrorKind::Domain, "heat kernel needs t > 0");
    const double z_cut = std::sqrt(4.0 * t * 60.0);
    const int k_max = static_cast<int>(std::ceil(z_cut / L)) + 1;
    detail::Deriv3 acc;
    // Smallest images last keeps the sum well ordered.
    for (int a = k_max; a >= 0; --a) {
        for (int sgn : {1, -1}) {
            if (a == 0 && sgn == -1) continue;
            const auto g = detail::gaussian_1d(x + sgn * a * L, t);
            acc.v += g.v;
            acc.d1 += g.d1;
            acc.d2 += g.d2;
            acc.d3 += g.d3;
        }
    }
    return acc;
}

/// The same kernel as (1/L) sum_m exp(-w_m^2 t) cos(w_m x), w_m = 2 pi m / L.
inline detail::Deriv3 periodic_kernel_fourier(double x, double t, double L) {
    if (!(t > 0.0)) fail(ErrorKind::Domain, "heat kernel needs t > 0");
    std::vector<detail::Deriv3> terms;
    for (int m = 1;; ++m) {
        const double w = 2.0 * std::numbers::pi * m / L;
        const double e = std::exp(-w * w * t);
        if (e * std::pow(1.0 + w, 3) < 1e-20) break;
        if (m > 1000000) fail(ErrorKind::Truncation, "Fourier series budget exceeded");
        const double c = std::cos(w * x), s = std::sin(w * x);
        terms.push_back({2.0 * e * c, -2.0 * e * w * s, -2.0 * e * w * w * c, 2.0 * e * w * w * w * s});
    }
    detail::Deriv3 acc;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
        acc.v += it->v;
        acc.d1 += it->d1;
        acc.d2 += it->d2;
        acc.d3 += it->d3;
    }
    acc.v += 1.0;
    acc.v /= L;
    acc.d1 /= L;
    acc.d2 /= L;
    acc.d3 /= L;
    return acc;
}

/// Image sum below t = L^2/4, Fourier series above.
inline detail::Deriv3 periodic_kernel(double x, double t, double L) {
    return t < 0.25 * L * L ? periodic_kernel_images(x, t, L) : periodic_kernel_fourier(x, t, L);
}

namespace detail {

// Jet of a product u = prod_i k_i(x_i) over orthogonal flat coordinates.
inline KernelJet product_jet(std::span<const Deriv3> factors) {
    double u = 1.0;
    for (const auto& k : factors) u *= k.v;
    std::vector<double> a(factors.size()), b(factors.size()), c(factors.size());
    double sum_b = 0.0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        a[i] = factors[i].d1 / factors[i].v;
        b[i] = factors[i].d2 / factors[i].v;
        c[i] = factors[i].d3 / factors[i].v;
        sum_b += b[i];
    }
    KernelJet j;
    j.u = u;
    j.lap = u * sum_b;
    double g = 0.0, h = 0.0, gl = 0.0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        g += a[i] * a[i];
        h += b[i] * b[i];
        for (std::size_t k = 0; k < factors.size(); ++k) {
            if (k != i) h += a[i] * a[i] * a[k] * a[k];
        }
        // d_i (u sum_k b_k) = u (a_i sum_b + c_i - a_i b_i)
        const double dl = a[i] * sum_b + c[i] - a[i] * b[i];
        gl += dl * dl;
    }
    j.grad_sq = u * u * g;
    j.hess_sq = u * u * h;
    j.grad_lap_sq = u * u * gl;
    return j;
}

}  // namespace detail

/// Euclidean heat kernel jet at distance d.
inline KernelJet euclidean_jet(int n, double d, double t) {
    if (!(t > 0.0)) fail(ErrorKind::Domain, "heat kernel needs t > 0");
    const double d2 = d * d;
    const double u = std::pow(4.0 * std::numbers::pi * t, -0.5 * n) * std::exp(-d2 / (4.0 * t));
    const double radial = d2 / (4.0 * t * t) - 1.0 / (2.0 * t);
    const double tangential = -1.0 / (2.0 * t);
    const double gl = (n + 2.0) / (4.0 * t * t) - d2 / (8.0 * t * t * t);
    KernelJet j;
    j.u = u;
    j.grad_sq = u * u * d2 / (4.0 * t * t);
    j.lap = u * (d2 / (4.0 * t * t) - n / (2.0 * t));
    j.hess_sq = u * u * (radial * radial + (n - 1) * tangential * tangential);
    j.grad_lap_sq = u * u * d2 * gl * gl;
    return j;
}

namespace detail {

// Helpers for the H^3 kernel u = C exp(phi), phi = log(r / sinh r) - r^2/4t.
// Each is evaluated by its Taylor series below r = 0.1 where the closed form
// cancels.
struct H3Parts {
    double f1;  // 1/r - coth r
    double f2;  // csch^2 r - 1/r^2
    double f3;  // 2/r^3 - 2 csch^2 r coth r
    double h;   // f1 / r
    double hp;  // d/dr (f1 / r)
    double g;   // r coth r
    double gp;  // d/dr (r coth r)
};

inline H3Parts h3_parts(double r) {
    H3Parts p{};
    if (r < 0.1) {
        const double r2 = r * r, r3 = r2 * r, r4 = r2 * r2, r5 = r4 * r, r6 = r4 * r2, r7 = r6 * r, r8 = r4 * r4,
                     r9 = r8 * r, r10 = r8 * r2, r11 = r10 * r;
        p.f1 = -r / 3.0 + r3 / 45.0 - 2.0 * r5 / 945.0 + r7 / 4725.0 - 2.0 * r9 / 93555.0 +
               1382.0 * r11 / 638512875.0;
        p.f2 = -1.0 / 3.0 + r2 / 15.0 - 2.0 * r4 / 189.0 + r6 / 675.0 - 2.0 * r8 / 10395.0 +
               1382.0 * r10 / 58046625.0;
        p.f3 = 2.0 * r / 15.0 - 8.0 * r3 / 189.0 + 2.0 * r5 / 225.0 - 16.0 * r7 / 10395.0 +
               2764.0 * r9 / 11609325.0;
        p.h = -1.0 / 3.0 + r2 / 45.0 - 2.0 * r4 / 945.0 + r6 / 4725.0 - 2.0 * r8 / 93555.0 +
              1382.0 * r10 / 638512875.0;
        p.hp = 2.0 * r / 45.0 - 8.0 * r3 / 945.0 + 2.0 * r5 / 1575.0 - 16.0 * r7 / 93555.0 +
               2764.0 * r9 / 127702575.0;
        p.g = 1.0 + r2 / 3.0 - r4 / 45.0 + 2.0 * r6 / 945.0 - r8 / 4725.0 + 2.0 * r10 / 93555.0;
        p.gp = 2.0 * r / 3.0 - 4.0 * r3 / 45.0 + 4.0 * r5 / 315.0 - 8.0 * r7 / 4725.0 + 4.0 * r9 / 18711.0;
        return p;
    }
    const double coth = 1.0 / std::tanh(r);
    const double csch = 1.0 / std::sinh(r);
    const double csch2 = csch * csch;
    p.f1 = 1.0 / r - coth;
    p.f2 = csch2 - 1.0 / (r * r);
    p.f3 = 2.0 / (r * r * r) - 2.0 * csch2 * coth;
    p.h = p.f1 / r;
    p.hp = (p.f2 * r - p.f1) / (r * r);
    p.g = r * coth;
    p.gp = coth - r * csch2;
    return p;
}

}  // namespace detail

/// H^3 heat kernel as a function of geodesic distance r.
inline double h3_kernel(double r, double t) {
    if (!(t > 0.0)) fail(ErrorKind::Domain, "heat kernel needs t > 0");
    if (r < 0.0) fail(ErrorKind::Domain, "negative distance");
    const double ratio = r < 1e-8 ? 1.0 : r / std::sinh(r);
    return std::pow(4.0 * std::numbers::pi * t, -1.5) * ratio * std::exp(-t - r * r / (4.0 * t));
}

/// H^3 kernel jet: radial derivatives combined with the tangential Hessian
/// eigenvalue coth(r) u' (multiplicity 2).
inline KernelJet h3_jet(double r, double t) {
    const double u = h3_kernel(r, t);
    const auto p = detail::h3_parts(r);
    const double it = 1.0 / (2.0 * t);
    const double phi1 = p.f1 - r * it;
    const double phi2 = p.f2 - it;
    const double phi3 = p.f3;
    const double q = p.g * (p.h - it);  // coth(r) phi'
    const double qp = p.gp * (p.h - it) + p.g * p.hp;
    const double u2 = u * (phi2 + phi1 * phi1);
    const double tang = u * q;
    KernelJet j;
    j.u = u;
    j.grad_sq = (u * phi1) * (u * phi1);
    j.lap = u2 + 2.0 * tang;
    j.hess_sq = u2 * u2 + 2.0 * tang * tang;
    const double lap_r = u * (phi1 * (phi2 + phi1 * phi1 + 2.0 * q) + phi3 + 2.0 * phi1 * phi2 + 2.0 * qp);
    j.grad_lap_sq = lap_r * lap_r;
    return j;
}

namespace detail {

// sum_l a_l P_l^{(k)}(x), k = 0..3, with a_l = (2l+1)/(4 pi) exp(-l(l+1) t).
struct LegendreSums {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    int terms = 0;
};

inline LegendreSums sphere_series(double x, double t, int l_cap = 20000) {
    // P^{(k)}_{l+1} = P^{(k)}_{l-1} + (2l+1) P^{(k-1)}_l
    double p0m = 1.0, p0 = x;         // P_{l-1}, P_l
    double p1m = 0.0, p1 = 1.0;       // first derivatives
    double p2m = 0.0, p2 = 0.0;       // second
    double p3m = 0.0, p3 = 0.0;       // third
    LegendreSums s;
    const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
    s.s0 = inv4pi;  // l = 0
    s.terms = 1;
    for (int l = 1;; ++l) {
        const double ll = static_cast<double>(l) * (l + 1);
        const double a = (2.0 * l + 1.0) * inv4pi * std::exp(-ll * t);
        s.s0 += a * p0;
        s.s1 += a * p1;
        s.s2 += a * p2;
        s.s3 += a * p3;
        s.terms = l + 1;
        if (l >= 3 && a * (1.0 + ll * ll * ll) < 1e-17) break;
        if (l >= l_cap) fail(ErrorKind::Truncation, "sphere series did not converge within the term budget");
        const double c = 2.0 * l + 1.0;
        const double n0 = (c * x * p0 - l * p0m) / (l + 1.0);
        const double n1 = p1m + c * p0;
        const double n2 = p2m + c * p1;
        const double n3 = p3m + c * p2;
        p0m = p0; p0 = n0;
        p1m = p1; p1 = n1;
        p2m = p2; p2 = n2;
        p3m = p3; p3 = n3;
    }
    return s;
}

}  // namespace detail

/// Smallest time for which the sphere series is evaluated.
inline constexpr double kSphereMinTime = 0.01;

/// Unit-sphere kernel jet at angular distance theta.
inline KernelJet sphere_jet(double theta, double t) {
    if (!(t > 0.0)) fail(ErrorKind::Domain, "heat kernel needs t > 0");
    if (t < kSphereMinTime) fail(ErrorKind::Domain, "sphere kernel series is restricted to t >= 0.01");
    const double x = std::cos(theta);
    const double sn = std::sin(theta);
    const double sin2 = sn * sn;
    const auto s = detail::sphere_series(x, t);
    const double u_tt = -x * s.s1 + sin2 * s.s2;
    const double dlap = -2.0 * s.s1 - 4.0 * x * s.s2 + sin2 * s.s3;
    KernelJet j;
    j.u = s.s0;
    j.grad_sq = sin2 * s.s1 * s.s1;
    j.lap = -2.0 * x * s.s1 + sin2 * s.s2;
    j.hess_sq = u_tt * u_tt + x * x * s.s1 * s.s1;
    j.grad_lap_sq = sin2 * dlap * dlap;
    return j;
}

/// Jet as a function of distance for the analytic rotational kinds.
inline KernelJet radial_jet(const ModelGeometry& geom, double d, double t) {
    switch (geom.kind()) {
        case GeometryKind::Euclidean: return euclidean_jet(geom.dim(), d, t);
        case GeometryKind::Sphere2: return sphere_jet(d, t);
        case GeometryKind::Hyperbolic3: return h3_jet(d, t);
        case GeometryKind::Warped:
            fail(ErrorKind::Unsupported, "warped surfaces have no closed-form kernel; use the radial solver");
        default: fail(ErrorKind::NotApplicable, "geometry is not rotationally symmetric about the source");
    }
}

inline KernelJet kernel_jet(const ModelGeometry& geom, const Point& x, const Point& y, double t) {
    if (!(t > 0.0)) fail(ErrorKind::Domain, "heat kernel needs t > 0");
    switch (geom.kind()) {
        case GeometryKind::FlatTorus: {
            std::vector<detail::Deriv3> f;
            for (double c : displacement(geom, x, y)) f.push_back(periodic_kernel(c, t, geom.period()));
            return detail::product_jet(f);
        }
        case GeometryKind::FlatCylinder: {
            const auto d = displacement(geom, x, y);
            const std::vector<detail::Deriv3> f{detail::gaussian_1d(d[0], t), periodic_kernel(d[1], t, geom.period())};
            return detail::product_jet(f);
        }
        default: return radial_jet(geom, distance(geom, x, y), t);
    }
}

inline double heat_kernel(const ModelGeometry& geom, const Point& x, const Point& y, double t) {
    if (!(t > 0.0)) fail(ErrorKind::Domain, "heat kernel needs t > 0");
    switch (geom.kind()) {
        case GeometryKind::Euclidean: {
            const double d = distance(geom, x, y);
            return std::pow(4.0 * std::numbers::pi * t, -0.5 * geom.dim()) * std::exp(-d * d / (4.0 * t));
        }
        case GeometryKind::Hyperbolic3: return h3_kernel(distance(geom, x, y), t);
        default: return kernel_jet(geom, x, y, t).u;
    }
}

/// |image-sum kernel - Fourier kernel| on a periodic geometry.
inline double dual_representation_check(const ModelGeometry& geom, const Point& x, const Point& y, double t) {
    if (geom.kind() != GeometryKind::FlatTorus && geom.kind() != GeometryKind::FlatCylinder) {
        fail(ErrorKind::NotApplicable, "dual representation check needs a periodic geometry");
    }
    const auto d = displacement(geom, x, y);
    double images = 1.0, fourier = 1.0;
    const std::size_t first_periodic = geom.kind() == GeometryKind::FlatCylinder ? 1 : 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (i < first_periodic) {
            const double g = detail::gaussian_1d(d[i], t).v;
            images *= g;
            fourier *= g;
            continue;
        }
        images *= periodic_kernel_images(d[i], t, geom.period()).v;
        fourier *= periodic_kernel_fourier(d[i], t, geom.period()).v;
    }
    return std::abs(images - fourier);
}

/// u(x, s) = H(x, source, s + t0), bounded by A = H(source, source, t0).
struct BoundedSolution {
    ModelGeometry geom;
    Point source;
    double t0 = 1.0;
    double A = 1.0;

    double value(const Point& x, double s) const { return heat_kernel(geom, x, source, s + t0); }
    KernelJet jet(const Point& x, double s) const { return kernel_jet(geom, x, source, s + t0); }
    KernelJet jet_at_distance(double d, double s) const { return radial_jet(geom, d, s + t0); }
};

/// Points used to confirm that the kernel peaks at the source.
inline std::vector<Point> probe_points(const ModelGeometry& geom, const Point& y, int count, double reach) {
    std::vector<Point> pts;
    for (int k = 0; k < count; ++k) {
        const double frac = static_cast<double>(k) / std::max(1, count - 1);
        std::vector<double> c = y.coords;
        switch (geom.kind()) {
            case GeometryKind::Euclidean:
                for (double& v : c) v += frac * reach / std::sqrt(static_cast<double>(c.size()));
                break;
            case GeometryKind::FlatTorus:
                for (double& v : c) v += frac * 0.5 * geom.period();
                break;
            case GeometryKind::FlatCylinder:
                c[0] += frac * reach;
                c[1] += frac * 0.5 * geom.period();
                break;
            case GeometryKind::Sphere2: {
                // Move along a meridian from the source's polar angle.
                const double target = y.coords[0] + frac * std::numbers::pi;
                c[0] = target <= std::numbers::pi ? target : 2.0 * std::numbers::pi - target;
                if (target > std::numbers::pi) c[1] += std::numbers::pi;
                break;
            }
            case GeometryKind::Hyperbolic3:
                c[0] = frac * reach;
                if (y.coords[0] != 0.0) fail(ErrorKind::Unsupported, "H^3 probes assume the source at the origin");
                break;
            case GeometryKind::Warped: fail(ErrorKind::Unsupported, "no analytic kernel on warped surfaces");
        }
        pts.push_back(geom.point(std::move(c)));
    }
    return pts;
}

/// The shifted solution family. The supremum A = H(y, y, t0) is asserted by a
/// scan over probe points, not assumed.
inline BoundedSolution shifted_solution(const ModelGeometry& geom, const Point& y, double t0) {
    if (!(t0 > 0.0)) fail(ErrorKind::Domain, "shift t0 must be positive");
    BoundedSolution sol{geom, y, t0, heat_kernel(geom, y, y, t0)};
    for (const auto& p : probe_points(geom, y, 65, 6.0 * std::sqrt(t0) + 1.0)) {
        if (heat_kernel(geom, p, y, t0) > sol.A * (1.0 + 1e-12)) {
            fail(ErrorKind::DataIntegrity, "kernel exceeds its coincidence value; sup assumption fails");
        }
    }
    return sol;
}

}  // namespace heatcert
