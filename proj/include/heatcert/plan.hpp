#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "heatcert/discrete.hpp"
#include "heatcert/error.hpp"
#include "heatcert/geometry.hpp"
#include "heatcert/kernels.hpp"

namespace heatcert {

struct SamplingPlan {
    double t0 = 1.0;          // kernel time of the shifted solution at s = 0
    double t_min_rel = 0.01;  // t_min = t_min_rel * t0
    double T = 2.0;
    int n_time = 121;
    int n_space = 81;
    double d_max = 0.0;  // 0 picks sqrt(4 (T + t0) ln 1e8)
    bool log_time = false;
    double delta = 2.0;
    std::vector<double> epsilon_rel{1e-2, 1e-4};
    std::vector<double> family_factors{0.5, 1.0, 2.0};
    int refine_levels = 3;
    long refine_budget = 4'000'000;
    double refine_tol = 1e-9;  // relative change that ends refinement early
    double fit_stability = 0.02;
    int random_points = 1000;
    std::uint64_t seed = 12345;
    int threads = 1;
    double cstar_margin = 0.01;  // C_* = (1 + margin) * measured sup of s |grad u|^2
    double evolution_c = 0.0;        // 0: report the critical c only
    // warped surfaces
    int n_r = 2001;
    double h_t_max = 5e-3;
    double initial_time = 0.01;

    double t_min() const { return t_min_rel * t0; }

    double space_reach() const {
        if (d_max > 0.0) return d_max;
        return std::sqrt(4.0 * (T + t0) * std::log(1e8));
    }

    void validate() const {
        if (!(t0 > 0.0)) fail(ErrorKind::Config, "plan.t0 must be positive");
        if (!(t_min_rel > 0.0)) fail(ErrorKind::Config, "plan.t_min must be positive");
        if (!(T > t_min())) fail(ErrorKind::Config, "plan.T must exceed t_min");
        if (n_time < 2 || n_space < 2) fail(ErrorKind::Config, "plan resolutions must be at least 2");
        if (!(delta > 0.0 && delta < 4.0)) fail(ErrorKind::Config, "delta must lie in (0, 4)");
        for (double e : epsilon_rel) {
            if (!(e > 0.0)) fail(ErrorKind::Config, "epsilon values must be positive");
        }
        for (double f : family_factors) {
            if (!(f > 0.0)) fail(ErrorKind::Config, "family factors must be positive");
        }
        if (family_factors.empty()) fail(ErrorKind::Config, "family needs at least one member");
        if (threads < 1) fail(ErrorKind::Config, "threads must be at least 1");
        if (refine_levels < 0) fail(ErrorKind::Config, "refine levels must be nonnegative");
        if (n_r < 3 || !(h_t_max > 0.0) || !(initial_time > 0.0)) fail(ErrorKind::Config, "bad solver settings");
    }

    /// Nested refinement: every old grid point survives.
    SamplingPlan refined() const {
        SamplingPlan p = *this;
        p.n_time = 2 * n_time - 1;
        p.n_space = 2 * n_space - 1;
        return p;
    }

    /// Grid on [lo, hi], linear or logarithmic.
    std::vector<double> time_grid(double lo, double hi) const {
        std::vector<double> ts(n_time);
        for (int k = 0; k < n_time; ++k) {
            const double f = static_cast<double>(k) / (n_time - 1);
            ts[k] = log_time ? lo * std::pow(hi / lo, f) : lo + f * (hi - lo);
        }
        ts.back() = hi;
        return ts;
    }

    /// Solution times s in [t_min, T].
    std::vector<double> solution_times() const { return time_grid(t_min(), T); }

    std::string canonical() const {
        std::ostringstream os;
        os.precision(17);
        os << "t0=" << t0 << ";t_min_rel=" << t_min_rel << ";T=" << T << ";n_time=" << n_time
           << ";n_space=" << n_space << ";d_max=" << d_max << ";log_time=" << log_time << ";delta=" << delta
           << ";eps=";
        for (double e : epsilon_rel) os << e << ',';
        os << ";family=";
        for (double f : family_factors) os << f << ',';
        os << ";refine=" << refine_levels << ',' << refine_budget << ',' << refine_tol << ',' << fit_stability
           << ";random=" << random_points << ";seed=" << seed << ";cstar_margin=" << cstar_margin
           << ";evolution_c=" << evolution_c << ";n_r=" << n_r << ";h_t_max=" << h_t_max << ";initial_time=" << initial_time;
        return os.str();
    }
};

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[i] = digits[v & 0xf];
    return out;
}

struct Sample {
    std::array<double, 3> coords{};
    int coord_count = 0;
    double dist = 0.0;
    double s = 0.0;       // solution time
    double tau = 0.0;     // kernel time
    double weight = 0.0;  // spatial quadrature weight
    KernelJet jet;

    std::vector<double> coord_vector() const { return {coords.begin(), coords.begin() + coord_count}; }
};

struct SpacePoint {
    std::array<double, 3> coords{};
    int coord_count = 0;
    double dist = 0.0;
    double weight = 0.0;
    int grid_index = -1;  // radial index on warped fields
};

namespace detail {

inline double trapezoid_end(int k, int n) { return (k == 0 || k == n - 1) ? 0.5 : 1.0; }

inline double sphere_area(int n) {
    // |S^{n-1}|
    return n * unit_ball_volume(n);
}

}  // namespace detail

/// Spatial samples about the canonical source. Rotational kinds are sampled
/// along one geodesic ray; periodic directions over half a period (the kernel
/// is even in each of them).
inline std::vector<SpacePoint> space_points(const ModelGeometry& geom, const SamplingPlan& plan) {
    std::vector<SpacePoint> pts;
    const int m = plan.n_space;
    const double reach = plan.space_reach();
    auto ray = [&](double hi, auto measure) {
        const double step = hi / (m - 1);
        for (int k = 0; k < m; ++k) {
            SpacePoint p;
            p.dist = k * step;
            p.weight = detail::trapezoid_end(k, m) * step * measure(p.dist);
            pts.push_back(p);
        }
    };
    switch (geom.kind()) {
        case GeometryKind::Euclidean: {
            const int n = geom.dim();
            if (n > 3) fail(ErrorKind::Unsupported, "euclidean sampling is implemented for n <= 3");
            ray(reach, [&](double d) { return detail::sphere_area(n) * std::pow(d, n - 1); });
            for (auto& p : pts) {
                p.coord_count = n;
                p.coords[0] = p.dist;
            }
            break;
        }
        case GeometryKind::Sphere2:
            ray(std::numbers::pi, [](double d) { return 2.0 * std::numbers::pi * std::sin(d); });
            for (auto& p : pts) {
                p.coord_count = 2;
                p.coords[0] = p.dist;
            }
            break;
        case GeometryKind::Hyperbolic3:
            ray(reach, [](double d) { return 4.0 * std::numbers::pi * std::sinh(d) * std::sinh(d); });
            for (auto& p : pts) {
                p.coord_count = 3;
                p.coords[0] = p.dist;
            }
            break;
        case GeometryKind::FlatTorus: {
            const int n = geom.dim();
            if (n > 2) fail(ErrorKind::Unsupported, "torus sampling is implemented for n <= 2");
            const double half = 0.5 * geom.period();
            const double step = half / (m - 1);
            for (int a = 0; a < m; ++a) {
                for (int b = 0; b < (n == 2 ? m : 1); ++b) {
                    SpacePoint p;
                    p.coord_count = n;
                    p.coords[0] = a * step;
                    double w = 2.0 * step * detail::trapezoid_end(a, m);
                    if (n == 2) {
                        p.coords[1] = b * step;
                        w *= 2.0 * step * detail::trapezoid_end(b, m);
                    }
                    p.dist = std::hypot(p.coords[0], p.coords[1]);
                    p.weight = w;
                    pts.push_back(p);
                }
            }
            break;
        }
        case GeometryKind::FlatCylinder: {
            const double half = 0.5 * geom.period();
            const int mt = (m + 1) / 2;
            const double dz = reach / (m - 1), dth = half / (mt - 1);
            for (int a = 0; a < m; ++a) {
                for (int b = 0; b < mt; ++b) {
                    SpacePoint p;
                    p.coord_count = 2;
                    p.coords[0] = a * dz;
                    p.coords[1] = b * dth;
                    p.dist = std::hypot(p.coords[0], p.coords[1]);
                    p.weight = 4.0 * dz * dth * detail::trapezoid_end(a, m) * detail::trapezoid_end(b, mt);
                    pts.push_back(p);
                }
            }
            break;
        }
        case GeometryKind::Warped: fail(ErrorKind::Unsupported, "warped surfaces are sampled on their solver grid");
    }
    return pts;
}

/// Runs `body(first, last, chunk)` over `count` chunks. Chunk boundaries do not
/// depend on the thread count, so chunk-wise reductions merged in order are
/// bit-identical for any number of threads.
template <class Body>
void parallel_chunks(int count, int threads, Body&& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int c = 0; c < count; ++c) body(c);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int c = w; c < count; c += threads) body(c);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

/// A bounded positive solution of the heat equation observed on a sampling
/// plan: either a shifted heat kernel or a discrete field on a warped surface.
/// Kernel time at solution time s is tau = s + t0.
class Solution {
public:
    static Solution analytic(const ModelGeometry& geom, double t0) {
        Solution s;
        s.geom_ = std::make_shared<ModelGeometry>(geom);
        s.analytic_ = std::make_shared<BoundedSolution>(shifted_solution(geom, geom.origin(), t0));
        s.t0_ = t0;
        s.A_ = s.analytic_->A;
        return s;
    }

    /// `field` must carry snapshots at t0 and at every time the caller samples.
    static Solution discrete(const ModelGeometry& geom, std::shared_ptr<const RadialField> field, double t0) {
        if (geom.kind() != GeometryKind::Warped) fail(ErrorKind::NotApplicable, "discrete solutions live on warped surfaces");
        const int j = snapshot_index(*field, t0);
        if (j < 0) fail(ErrorKind::Domain, "field has no snapshot at the shift time");
        Solution s;
        s.geom_ = std::make_shared<ModelGeometry>(geom);
        s.field_ = std::move(field);
        s.t0_ = t0;
        const auto& row = s.field_->values[j];
        s.A_ = *std::max_element(row.begin(), row.end());
        return s;
    }

    const ModelGeometry& geom() const { return *geom_; }
    bool is_discrete() const { return field_ != nullptr; }
    double t0() const { return t0_; }
    double A() const { return A_; }
    const RadialField& field() const { return *field_; }

    /// Jet at a space point and solution time s (analytic only off-grid).
    KernelJet jet(const SpacePoint& p, double s) const {
        if (field_) {
            const int j = snapshot_index(*field_, s + t0_);
            if (j < 0 || p.grid_index < 0) fail(ErrorKind::Domain, "no discrete sample at the requested point");
            return field_jet(*field_, j, p.grid_index);
        }
        return jet_coords(p.coords.data(), p.coord_count, p.dist, s);
    }

    /// Analytic jet at chart coordinates; radial kinds use `dist` only.
    KernelJet jet_coords(const double* coords, int count, double dist, double s) const {
        if (field_) fail(ErrorKind::NotApplicable, "discrete fields have no off-grid jets");
        const double tau = s + t0_;
        if (geom_->is_rotational()) return radial_jet(*geom_, dist, tau);
        return kernel_jet(*geom_, geom_->point({coords, coords + count}), analytic_->source, tau);
    }

private:
    std::shared_ptr<ModelGeometry> geom_;
    std::shared_ptr<BoundedSolution> analytic_;
    std::shared_ptr<const RadialField> field_;
    double t0_ = 1.0;
    double A_ = 1.0;
};

/// Warped-surface space points: solver grid indices with a power-of-two stride.
inline std::vector<SpacePoint> warped_points(const RadialField& field, const SamplingPlan& plan) {
    const double reach = std::min(plan.space_reach(), field.grid.r_max);
    const int i_max = static_cast<int>(std::floor(reach / field.op.h() + 1e-9));
    int stride = 1;
    while (stride * 2 * (plan.n_space - 1) <= i_max) stride *= 2;
    std::vector<SpacePoint> pts;
    for (int i = 0; i <= i_max; i += stride) {
        SpacePoint p;
        p.coord_count = 2;
        p.coords[0] = field.r(i);
        p.dist = field.r(i);
        p.grid_index = i;
        const double cell = i == 0 ? field.op.volume()[0] * stride : field.op.f()[i] * field.op.h() * stride;
        p.weight = 2.0 * std::numbers::pi * cell * ((i == 0 || i + stride > i_max) ? 0.5 : 1.0);
        pts.push_back(p);
    }
    return pts;
}

/// Approximate kernel on a warped surface: flat Gaussian at `initial_time`
/// evolved by Crank-Nicolson, with snapshots at every requested time.
inline std::shared_ptr<const RadialField> warped_kernel_field(const ModelGeometry& geom, const SamplingPlan& plan,
                                                              std::vector<double> times) {
    if (geom.kind() != GeometryKind::Warped) fail(ErrorKind::NotApplicable, "warped kernel needs a warped surface");
    RadialGrid grid{geom.warp().r_max, plan.n_r, plan.initial_time, 0.0, 0};
    for (double t : times) {
        if (!(t >= plan.initial_time)) fail(ErrorKind::Config, "warped sampling times precede the initial Gaussian");
    }
    return std::make_shared<const RadialField>(
        solve_heat_at(grid, geom.warp(), gaussian_initial(plan.initial_time), std::move(times), plan.h_t_max));
}

/// Space points for a solution (grid-aligned on warped surfaces).
inline std::vector<SpacePoint> solution_points(const Solution& sol, const SamplingPlan& plan) {
    if (sol.is_discrete()) return warped_points(sol.field(), plan);
    return space_points(sol.geom(), plan);
}

}  // namespace heatcert
