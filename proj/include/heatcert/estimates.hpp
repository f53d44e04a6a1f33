#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "heatcert/cutoff.hpp"
#include "heatcert/discrete.hpp"
#include "heatcert/error.hpp"
#include "heatcert/geometry.hpp"
#include "heatcert/kernels.hpp"
#include "heatcert/plan.hpp"

namespace heatcert {

inline constexpr double kAnalyticFloor = -1e-9;
inline constexpr double kDiscreteRelativeFloor = -1e-4;
inline constexpr double kIdentityTolerance = 1e-6;

struct Argmin {
    std::vector<double> coords;
    double t = 0.0;
};

struct EstimateReport {
    std::string estimate_id;
    std::string geometry;
    double worst_margin = std::numeric_limits<double>::infinity();
    Argmin argmin;
    std::optional<double> fitted_constant;
    long samples = 0;
    double tolerance_floor = kAnalyticFloor;
    bool pass = false;
    std::map<std::string, double> metrics;
    std::map<std::string, std::string> labels;
};

inline EstimateReport new_report(const std::string& id, const ModelGeometry& geom) {
    EstimateReport rep;
    rep.estimate_id = id;
    rep.geometry = geom.key();
    return rep;
}

/// One row of a fit table.
struct ConstantFit {
    std::string name;
    double value = 0.0;
    std::vector<double> by_level;  // value at 1x, 2x, 4x, ... resolution
    Argmin binding;
    std::string binding_label;
    long samples = 0;
};

namespace detail {

inline std::string num_key(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

/// Minimum of a margin with its location; merged in chunk order so ties
/// resolve to the earliest sample.
struct MarginAcc {
    double worst = std::numeric_limits<double>::infinity();
    Sample at;
    bool have = false;
    long count = 0;

    void add(double m, const Sample& s) {
        ++count;
        if (!have || m < worst) {
            worst = m;
            at = s;
            have = true;
        }
    }
    void merge(const MarginAcc& o) {
        count += o.count;
        if (o.have && (!have || o.worst < worst)) {
            worst = o.worst;
            at = o.at;
            have = true;
        }
    }
};

struct SupAcc {
    double best = -std::numeric_limits<double>::infinity();
    Sample at;
    bool have = false;
    long count = 0;
    int tag = 0;

    void add(double v, const Sample& s, int t = 0) {
        ++count;
        if (!have || v > best) {
            best = v;
            at = s;
            have = true;
            tag = t;
        }
    }
    void merge(const SupAcc& o) {
        count += o.count;
        if (o.have && (!have || o.best > best)) {
            best = o.best;
            at = o.at;
            have = true;
            tag = o.tag;
        }
    }
};

inline Argmin argmin_of(const Sample& s, double t) { return Argmin{s.coord_vector(), t}; }

inline Sample make_sample(const Solution& sol, const SpacePoint& p, double s) {
    Sample out;
    out.coords = p.coords;
    out.coord_count = p.coord_count;
    out.dist = p.dist;
    out.s = s;
    out.tau = s + sol.t0();
    out.weight = p.weight;
    out.jet = sol.jet(p, s);
    return out;
}

/// Reduce `visit(acc, sample, time_index)` over points x solution times.
template <class Acc, class Visit>
Acc reduce_solution(const Solution& sol, const std::vector<SpacePoint>& pts, const std::vector<double>& times,
                    int threads, Visit&& visit) {
    std::vector<Acc> parts(times.size());
    parallel_chunks(static_cast<int>(times.size()), threads, [&](int c) {
        for (const auto& p : pts) visit(parts[c], make_sample(sol, p, times[c]), c);
    });
    Acc total;
    for (const auto& part : parts) total.merge(part);
    return total;
}

/// Heat-kernel samples H(x, o, tau) at kernel times; analytic or from a field.
template <class Acc, class Visit>
Acc reduce_kernel(const ModelGeometry& geom, const RadialField* field, const std::vector<SpacePoint>& pts,
                  const std::vector<double>& taus, int threads, Visit&& visit) {
    std::vector<Acc> parts(taus.size());
    const Point o = geom.origin();
    parallel_chunks(static_cast<int>(taus.size()), threads, [&](int c) {
        const double tau = taus[c];
        int snap = -1;
        if (field) {
            snap = snapshot_index(*field, tau);
            if (snap < 0) fail(ErrorKind::Domain, "field lacks a snapshot at a kernel time");
        }
        for (const auto& p : pts) {
            Sample smp;
            smp.coords = p.coords;
            smp.coord_count = p.coord_count;
            smp.dist = p.dist;
            smp.s = tau;
            smp.tau = tau;
            smp.weight = p.weight;
            if (field) {
                smp.jet = field_jet(*field, snap, p.grid_index);
            } else if (geom.is_rotational()) {
                smp.jet = radial_jet(geom, p.dist, tau);
            } else {
                smp.jet = kernel_jet(geom, geom.point({p.coords.begin(), p.coords.begin() + p.coord_count}), o, tau);
            }
            visit(parts[c], smp, c);
        }
    });
    Acc total;
    for (const auto& part : parts) total.merge(part);
    return total;
}

/// Certified K: nominal for model kinds, scanned for warped surfaces.
inline double certified_K(const ModelGeometry& geom) {
    return geom.kind() == GeometryKind::Warped ? certify_curvature(geom).K : geom.ricci_bound();
}

inline void require_nonnegative_ricci(const ModelGeometry& geom, const std::string& id) {
    const double K = certified_K(geom);
    if (K > 0.0) {
        fail(ErrorKind::Hypothesis, id + " requires nonnegative Ricci curvature (K = 0); " + geom.key() +
                                        " has K = " + num_key(K));
    }
}

/// Lower end of kernel-time scans. The sphere series is kept well above its
/// validity limit; on warped surfaces the initial Gaussian needs a few of its
/// own time scales to relax.
inline double kernel_time_low(const ModelGeometry& geom, const SamplingPlan& plan) {
    double lo = plan.t_min();
    if (geom.kind() == GeometryKind::Sphere2) lo = std::max(lo, 0.05);
    if (geom.kind() == GeometryKind::Warped) lo = std::max(lo, 5.0 * plan.initial_time);
    return lo;
}

inline std::vector<double> kernel_times(const ModelGeometry& geom, const SamplingPlan& plan) {
    return plan.time_grid(kernel_time_low(geom, plan), plan.T);
}

inline std::vector<double> liyau_times(const ModelGeometry& geom, const SamplingPlan& plan) {
    return plan.time_grid(0.5 * kernel_time_low(geom, plan), plan.T);
}

/// Shifted solutions t0 * factor; on warped surfaces all members share one
/// field with snapshots at every needed time.
inline std::vector<Solution> make_family(const ModelGeometry& geom, const SamplingPlan& plan,
                                         const std::vector<double>& factors,
                                         const std::vector<double>& extra_times = {}) {
    std::vector<Solution> fam;
    if (geom.kind() != GeometryKind::Warped) {
        for (double f : factors) fam.push_back(Solution::analytic(geom, f * plan.t0));
        return fam;
    }
    std::vector<double> times = extra_times;
    for (double f : factors) {
        times.push_back(f * plan.t0);
        for (double s : plan.solution_times()) times.push_back(f * plan.t0 + s);
    }
    const auto field = warped_kernel_field(geom, plan, times);
    for (double f : factors) fam.push_back(Solution::discrete(geom, field, f * plan.t0));
    return fam;
}

inline Solution make_solution(const ModelGeometry& geom, const SamplingPlan& plan) {
    return make_family(geom, plan, {1.0}).front();
}

inline std::shared_ptr<const RadialField> kernel_field(const ModelGeometry& geom, const SamplingPlan& plan,
                                                       const std::vector<double>& taus) {
    if (geom.kind() != GeometryKind::Warped) return nullptr;
    return warped_kernel_field(geom, plan, taus);
}

inline std::vector<SpacePoint> kernel_points(const ModelGeometry& geom, const SamplingPlan& plan,
                                             const RadialField* field) {
    return field ? warped_points(*field, plan) : space_points(geom, plan);
}

inline void add_solver_metrics(EstimateReport& rep, const RadialField& field) {
    const auto& d = field.diagnostics;
    rep.metrics["solver_max_mass_drift"] = d.max_mass_drift;
    rep.metrics["solver_positivity_violations"] = static_cast<double>(d.positivity_violations);
    rep.metrics["solver_max_principle"] = d.max_nonincreasing && d.min_nondecreasing ? 1.0 : 0.0;
    rep.metrics["solver_diffusion_number"] = d.diffusion_number;
    rep.metrics["solver_n_r"] = field.grid.n_r;
    rep.metrics["solver_steps"] = field.grid.n_t;
}

/// Margin bookkeeping shared by inequality checks: absolute margins for
/// analytic jets, margins relative to the local right-hand side for
/// discrete ones.
inline double scaled_margin(double margin, double rhs, bool discrete) {
    if (!discrete) return margin;
    return margin / std::max(std::abs(rhs), 1e-300);
}

inline void finish_margin(EstimateReport& rep, const MarginAcc& acc, bool discrete, bool time_is_kernel) {
    rep.worst_margin = acc.worst;
    rep.argmin = argmin_of(acc.at, time_is_kernel ? acc.at.tau : acc.at.s);
    rep.samples = acc.count;
    rep.tolerance_floor = discrete ? kDiscreteRelativeFloor : kAnalyticFloor;
    rep.labels["margin_units"] = discrete ? "relative-to-rhs" : "absolute";
    rep.pass = acc.have && std::isfinite(acc.worst) && acc.worst >= rep.tolerance_floor;
}

/// Nested-refinement supremum. `level_fit(plan)` returns the sup on one plan;
/// refinement stops at plan.refine_levels, when the value settles to
/// plan.refine_tol, or when the next level would exceed the sample budget.
template <class LevelFit>
ConstantFit refine_fit(const std::string& name, const SamplingPlan& plan, int space_dims, LevelFit&& level_fit) {
    ConstantFit fit;
    fit.name = name;
    SamplingPlan p = plan;
    long total = 0;
    for (int level = 0; level <= plan.refine_levels; ++level) {
        const SupAcc acc = level_fit(p);
        total += acc.count;
        fit.by_level.push_back(acc.best);
        fit.value = acc.best;
        fit.binding = argmin_of(acc.at, acc.at.s);
        fit.samples = acc.count;
        fit.binding_label = std::to_string(acc.tag);
        if (level >= 1 && plan.refine_tol > 0.0) {
            const double prev = fit.by_level[level - 1];
            if (std::abs(acc.best - prev) <= plan.refine_tol * std::max(std::abs(acc.best), 1e-300)) break;
        }
        const long growth = space_dims == 2 ? 8 : 4;
        if (acc.count * growth > plan.refine_budget) break;
        p = p.refined();
    }
    fit.samples = total;
    return fit;
}

inline void fit_to_report(EstimateReport& rep, const ConstantFit& fit, const SamplingPlan& plan) {
    rep.fitted_constant = fit.value;
    rep.samples = fit.samples;
    rep.argmin = fit.binding;
    rep.tolerance_floor = -plan.fit_stability;
    rep.metrics["fitted_1x"] = fit.by_level.front();
    if (fit.by_level.size() > 1) rep.metrics["fitted_2x"] = fit.by_level[1];
    rep.metrics["refine_levels_used"] = static_cast<double>(fit.by_level.size() - 1);
    if (fit.by_level.size() > 1) {
        const double a = fit.by_level[fit.by_level.size() - 2], b = fit.by_level.back();
        rep.worst_margin = -std::abs(b - a) / std::max(std::abs(b), 1e-300);
        rep.labels["margin_units"] = "refinement-stability";
    } else {
        rep.worst_margin = 0.0;
        rep.labels["margin_units"] = "unrefined";
    }
    rep.pass = std::isfinite(fit.value) && rep.worst_margin >= rep.tolerance_floor;
}

inline int space_dims(const ModelGeometry& geom) {
    if (geom.kind() == GeometryKind::FlatCylinder) return 2;
    if (geom.kind() == GeometryKind::FlatTorus && geom.dim() == 2) return 2;
    return 1;
}

inline double log_ratio(double A, double u, const char* id) {
    if (u > A * (1.0 + 1e-12)) {
        fail(ErrorKind::DataIntegrity, std::string(id) + ": sampled u exceeds the bound A");
    }
    if (!(u > 0.0)) fail(ErrorKind::DataIntegrity, std::string(id) + ": sampled u is not positive (reduce plan.d_max)");
    return std::log(A / u);
}

// Finite-difference machinery for estimates that need (d/dt - Lap) of a
// scalar built from jets. Flat kinds: Cartesian chart differences. Sphere and
// H^3: radial formula G'' + (n-1) w(d) G' with reflection at d = 0 and pi.
struct ScalarProbe {
    const Solution* sol;
    std::function<double(const KernelJet&, double s)> build;

    double at(const std::vector<double>& c, double dist, double s) const {
        return build(sol->jet_coords(c.data(), static_cast<int>(c.size()), dist, s), s);
    }
};

inline double euclid_norm(const std::vector<double>& c) {
    double a = 0.0;
    for (double v : c) a += v * v;
    return std::sqrt(a);
}

inline double fd_time_once(const ScalarProbe& g, const std::vector<double>& c, double dist, double s, double k) {
    return (g.at(c, dist, s + k) - g.at(c, dist, s - k)) / (2.0 * k);
}

inline double fd_laplacian_once(const ScalarProbe& g, const std::vector<double>& c, double dist, double s, double h) {
    const auto& geom = g.sol->geom();
    if (geom.is_flat()) {
        const double center = g.at(c, dist, s);
        double acc = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            auto p = c, m = c;
            p[i] += h;
            m[i] -= h;
            const bool eu = geom.kind() == GeometryKind::Euclidean;
            acc += g.at(p, eu ? euclid_norm(p) : 0.0, s) - 2.0 * center + g.at(m, eu ? euclid_norm(m) : 0.0, s);
        }
        return acc / (h * h);
    }
    const int n = geom.dim();
    auto radial = [&](double d) {
        std::vector<double> cc(c.size(), 0.0);
        cc[0] = d;
        return g.at(cc, d, s);
    };
    const double pi = std::numbers::pi;
    const bool sphere = geom.kind() == GeometryKind::Sphere2;
    if (dist < h) return n * 2.0 * (radial(h) - radial(0.0)) / (h * h);
    if (sphere && dist > pi - h) return n * 2.0 * (radial(pi - h) - radial(pi)) / (h * h);
    const double gp = radial(dist + h), g0 = radial(dist), gm = radial(dist - h);
    const double w = sphere ? std::cos(dist) / std::sin(dist) : 1.0 / std::tanh(dist);
    return (gp - 2.0 * g0 + gm) / (h * h) + (n - 1) * w * (gp - gm) / (2.0 * h);
}

// Richardson-extrapolated steps k and k/2 (error O(k^4)).
inline double fd_time(const ScalarProbe& g, const std::vector<double>& c, double dist, double s, double k) {
    return (4.0 * fd_time_once(g, c, dist, s, 0.5 * k) - fd_time_once(g, c, dist, s, k)) / 3.0;
}

inline double fd_laplacian(const ScalarProbe& g, const std::vector<double>& c, double dist, double s, double h) {
    return (4.0 * fd_laplacian_once(g, c, dist, s, 0.5 * h) - fd_laplacian_once(g, c, dist, s, h)) / 3.0;
}

/// Ric(grad u, grad u) / |grad u|^2 on constant-curvature kinds.
inline double ricci_factor(const ModelGeometry& geom) {
    if (geom.is_flat()) return 0.0;
    if (geom.kind() == GeometryKind::Sphere2) return 1.0;
    if (geom.kind() == GeometryKind::Hyperbolic3) return -2.0;
    fail(ErrorKind::NotApplicable, "identity checks need constant curvature; " + geom.key() + " is not");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Inequalities on a single bounded solution

inline EstimateReport hamilton_gradient_margin(const ModelGeometry& geom, const SamplingPlan& plan) {
    plan.validate();
    const double K = detail::certified_K(geom);
    const Solution sol = detail::make_solution(geom, plan);
    const bool disc = sol.is_discrete();
    const double A = sol.A();
    struct Acc {
        detail::MarginAcc m;
        double max_ratio = 0.0;
        void merge(const Acc& o) {
            m.merge(o.m);
            max_ratio = std::max(max_ratio, o.max_ratio);
        }
    };
    const auto acc = detail::reduce_solution<Acc>(
        sol, solution_points(sol, plan), plan.solution_times(), plan.threads, [&](Acc& a, const Sample& x, int) {
            const double L = detail::log_ratio(A, x.jet.u, "eq1.1");
            const double rhs = (1.0 + 2.0 * K * x.s) * L;
            const double lhs = x.s * x.jet.grad_sq / (x.jet.u * x.jet.u);
            a.m.add(detail::scaled_margin(rhs - lhs, rhs, disc), x);
            if (lhs > 0.0 && rhs > 0.0) a.max_ratio = std::max(a.max_ratio, lhs / rhs);
        });
    EstimateReport rep = new_report("eq1.1", geom);
    detail::finish_margin(rep, acc.m, disc, false);
    rep.metrics["K"] = K;
    rep.metrics["A"] = A;
    rep.metrics["max_lhs_over_rhs"] = acc.max_ratio;
    if (disc) detail::add_solver_metrics(rep, sol.field());
    return rep;
}

inline EstimateReport main_laplacian_margin(const ModelGeometry& geom, const SamplingPlan& plan) {
    plan.validate();
    detail::require_nonnegative_ricci(geom, "eq1.4");
    const Solution sol = detail::make_solution(geom, plan);
    const bool disc = sol.is_discrete();
    const double A = sol.A();
    const int n = geom.dim();
    const auto acc = detail::reduce_solution<detail::MarginAcc>(
        sol, solution_points(sol, plan), plan.solution_times(), plan.threads,
        [&](detail::MarginAcc& a, const Sample& x, int) {
            const double rhs = n + 4.0 * detail::log_ratio(A, x.jet.u, "eq1.4");
            const double lhs = x.s * x.jet.lap / x.jet.u;
            a.add(detail::scaled_margin(rhs - lhs, rhs, disc), x);
        });
    EstimateReport rep = new_report("eq1.4", geom);
    detail::finish_margin(rep, acc, disc, false);
    rep.metrics["A"] = A;
    rep.metrics["argmin_distance"] = acc.at.dist;
    if (disc) detail::add_solver_metrics(rep, sol.field());
    return rep;
}

// ---------------------------------------------------------------------------
// Fits

/// Li-Yau two-sided kernel bounds; C1 is the smallest constant making both
/// hold on kernel times [tau_lo / 2, T].
inline ConstantFit li_yau_fit(const ModelGeometry& geom, const SamplingPlan& plan) {
    plan.validate();
    detail::require_nonnegative_ricci(geom, "liyau-fit");
    const double delta = plan.delta;
    return detail::refine_fit("C1", plan, detail::space_dims(geom), [&](const SamplingPlan& p) {
        const auto taus = detail::liyau_times(geom, p);
        const auto field = detail::kernel_field(geom, p, taus);
        const auto pts = detail::kernel_points(geom, p, field.get());
        std::vector<double> vol(taus.size());
        for (std::size_t k = 0; k < taus.size(); ++k) vol[k] = detail::ball_volume_sq(geom, taus[k]);
        return detail::reduce_kernel<detail::SupAcc>(
            geom, field.get(), pts, taus, p.threads, [&](detail::SupAcc& a, const Sample& x, int c) {
                const double V = vol[c];
                const double lower = std::exp(-x.dist * x.dist / ((4.0 - delta) * x.tau)) / (V * x.jet.u);
                const double upper = x.jet.u * V;
                if (lower >= upper) {
                    a.add(lower, x, 0);
                } else {
                    a.add(upper, x, 1);
                }
            });
    });
}

/// sup over kernel times of Vol(B(sqrt t)) / Vol(B(sqrt(t/2))).
inline ConstantFit doubling_fit(const ModelGeometry& geom, const SamplingPlan& plan) {
    plan.validate();
    const Point o = geom.origin();
    return detail::refine_fit("C2", plan, 1, [&](const SamplingPlan& p) {
        detail::SupAcc acc;
        for (double t : detail::kernel_times(geom, p)) {
            Sample x;
            x.coord_count = static_cast<int>(geom.coordinate_count());
            x.s = x.tau = t;
            acc.add(doubling_constant(geom, o, t), x);
        }
        return acc;
    });
}

inline EstimateReport li_yau_report(const ModelGeometry& geom, const SamplingPlan& plan) {
    const auto fit = li_yau_fit(geom, plan);
    EstimateReport rep = new_report("liyau-fit", geom);
    detail::fit_to_report(rep, fit, plan);
    rep.labels["binding"] = fit.binding_label == "0" ? "lower" : "upper";
    rep.metrics["delta"] = plan.delta;
    return rep;
}

inline EstimateReport doubling_report(const ModelGeometry& geom, const SamplingPlan& plan) {
    const auto fit = doubling_fit(geom, plan);
    EstimateReport rep = new_report("doubling", geom);
    detail::fit_to_report(rep, fit, plan);
    const double K = detail::certified_K(geom);
    if (K == 0.0) {
        const double bound = std::pow(2.0, 0.5 * geom.dim());
        rep.metrics["bishop_gromov_bound"] = bound;
        rep.pass = rep.pass && fit.value <= bound * (1.0 + 1e-12);
    }
    return rep;
}

/// Kernel Laplacian bound (t/2) Lap H / H <= C + 4 d^2 / ((4 - delta) t):
/// fitted C, and the margin under the assembled C = n + 4 log(C1^2 C2).
inline EstimateReport kernel_laplacian_bound(const ModelGeometry& geom, const SamplingPlan& plan) {
    plan.validate();
    detail::require_nonnegative_ricci(geom, "thm1.3");
    const double delta = plan.delta;
    auto q_of = [delta](const Sample& x) {
        return 0.5 * x.tau * x.jet.lap / x.jet.u - 4.0 * x.dist * x.dist / ((4.0 - delta) * x.tau);
    };
    const auto fitC = detail::refine_fit("C", plan, detail::space_dims(geom), [&](const SamplingPlan& p) {
        const auto taus = detail::kernel_times(geom, p);
        const auto field = detail::kernel_field(geom, p, taus);
        return detail::reduce_kernel<detail::SupAcc>(geom, field.get(), detail::kernel_points(geom, p, field.get()),
                                                     taus, p.threads,
                                                     [&](detail::SupAcc& a, const Sample& x, int) { a.add(q_of(x), x); });
    });
    SamplingPlan base = plan;
    base.refine_levels = 0;
    const double C1 = li_yau_fit(geom, base).value;
    const double C2 = doubling_fit(geom, base).value;
    const int n = geom.dim();
    const double assembled = n + 4.0 * std::log(C1 * C1 * C2);
    const auto taus = detail::kernel_times(geom, plan);
    const auto field = detail::kernel_field(geom, plan, taus);
    const bool disc = field != nullptr;
    const auto acc = detail::reduce_kernel<detail::MarginAcc>(
        geom, field.get(), detail::kernel_points(geom, plan, field.get()), taus, plan.threads,
        [&](detail::MarginAcc& a, const Sample& x, int) {
            const double rhs = assembled + 4.0 * x.dist * x.dist / ((4.0 - delta) * x.tau);
            a.add(detail::scaled_margin(rhs - (q_of(x) + 4.0 * x.dist * x.dist / ((4.0 - delta) * x.tau)), rhs, disc),
                  x);
        });
    EstimateReport rep = new_report("thm1.3", geom);
    detail::finish_margin(rep, acc, disc, true);
    rep.samples += fitC.samples;
    rep.fitted_constant = fitC.value;
    rep.metrics["fitted_C"] = fitC.value;
    rep.metrics["fitted_C_1x"] = fitC.by_level.front();
    rep.metrics["C1"] = C1;
    rep.metrics["C2"] = C2;
    rep.metrics["assembled_C"] = assembled;
    rep.metrics["delta"] = delta;
    if (disc) detail::add_solver_metrics(rep, *field);
    return rep;
}

/// sup over the shifted family of s |grad u|^2 / (A^2 (1 + K s)).
inline ConstantFit kotschwar_gradient_fit(const ModelGeometry& geom, const SamplingPlan& plan) {
    plan.validate();
    const double K = detail::certified_K(geom);
    return detail::refine_fit("C(n)", plan, detail::space_dims(geom), [&](const SamplingPlan& p) {
        detail::SupAcc total;
        const auto fam = detail::make_family(geom, p, p.family_factors);
        for (std::size_t m = 0; m < fam.size(); ++m) {
            const auto& sol = fam[m];
            const double A = sol.A();
            total.merge(detail::reduce_solution<detail::SupAcc>(
                sol, solution_points(sol, p), p.solution_times(), p.threads, [&](detail::SupAcc& a, const Sample& x, int) {
                    a.add(x.s * x.jet.grad_sq / (A * A * (1.0 + K * x.s)), x, static_cast<int>(m));
                }));
        }
        return total;
    });
}

/// sup over the shifted family of s |Lap u| / A.
inline ConstantFit bernstein_laplacian_fit(const ModelGeometry& geom, const SamplingPlan& plan) {
    plan.validate();
    detail::require_nonnegative_ricci(geom, "thm2.4-fit");
    return detail::refine_fit("C(n)", plan, detail::space_dims(geom), [&](const SamplingPlan& p) {
        detail::SupAcc total;
        const auto fam = detail::make_family(geom, p, p.family_factors);
        for (std::size_t m = 0; m < fam.size(); ++m) {
            const auto& sol = fam[m];
            const double A = sol.A();
            total.merge(detail::reduce_solution<detail::SupAcc>(
                sol, solution_points(sol, p), p.solution_times(), p.threads, [&](detail::SupAcc& a, const Sample& x, int) {
                    a.add(x.s * std::abs(x.jet.lap) / A, x, static_cast<int>(m));
                }));
        }
        return total;
    });
}

inline EstimateReport family_fit_report(const std::string& id, const ModelGeometry& geom, const SamplingPlan& plan,
                                        const ConstantFit& fit) {
    EstimateReport rep = new_report(id, geom);
    detail::fit_to_report(rep, fit, plan);
    const int member = std::stoi(fit.binding_label);
    rep.metrics["binding_t0"] = plan.family_factors.at(member) * plan.t0;
    if (geom.kind() == GeometryKind::Warped) {
        const auto fam = detail::make_family(geom, plan, {plan.family_factors.at(member)});
        detail::add_solver_metrics(rep, fam.front().field());
    }
    return rep;
}

/// Closed manifolds: smallest C with s Lap u / u <= C (1 + log(A/u)), plus
/// the cross-check that n + 4 log(A/u) also bounds s Lap u / u there.
inline EstimateReport closed_manifold_laplacian_margin(const ModelGeometry& geom, const SamplingPlan& plan) {
    plan.validate();
    if (!geom.is_compact()) {
        fail(ErrorKind::Hypothesis, "eq1.2-fit requires a closed manifold; " + geom.key() + " is not compact");
    }
    const auto fit = detail::refine_fit("C(n,K)", plan, detail::space_dims(geom), [&](const SamplingPlan& p) {
        const Solution sol = detail::make_solution(geom, p);
        const double A = sol.A();
        return detail::reduce_solution<detail::SupAcc>(
            sol, solution_points(sol, p), p.solution_times(), p.threads, [&](detail::SupAcc& a, const Sample& x, int) {
                const double L = detail::log_ratio(A, x.jet.u, "eq1.2-fit");
                a.add(x.s * x.jet.lap / x.jet.u / (1.0 + L), x);
            });
    });
    EstimateReport rep = new_report("eq1.2-fit", geom);
    detail::fit_to_report(rep, fit, plan);
    const auto cross = main_laplacian_margin(geom, plan);
    rep.metrics["eq1.4_cross_check_margin"] = cross.worst_margin;
    rep.metrics["max_n_4"] = std::max(geom.dim(), 4);
    rep.pass = rep.pass && cross.pass;
    return rep;
}

// ---------------------------------------------------------------------------
// Evolution identities and the auxiliary quantities built on them

struct FEvolutionResult {
    double cstar = 0.0;
    double measured_grad_sup = 0.0;
    double c_critical = 0.0;
    double worst_relative_residual = 0.0;  // at the evaluated c
    double c_evaluated = 0.0;
    Argmin binding;
    long samples = 0;
};

/// F = (C + s|grad u|^2) s^2 (Lap u)^2 with C = 8 C_*; residual
/// Lap F - (c/s) F^2 + 18 n (1 + K^2) C^2 / s - dF/ds from central
/// differences of F. c_critical is the largest c keeping it >= 0 on the plan.
inline FEvolutionResult f_evolution_check(const ModelGeometry& geom, const SamplingPlan& plan, double cstar = 0.0,
                                     double c = 0.0) {
    plan.validate();
    if (geom.kind() == GeometryKind::Warped) {
        fail(ErrorKind::NotApplicable, "lem2.3 needs third derivatives; only analytic kernels qualify");
    }
    const double K = geom.ricci_bound();
    if (K > 0.0 && plan.T > 1.0) fail(ErrorKind::Hypothesis, "lem2.3 with K > 0 requires T <= 1");
    const Solution sol = Solution::analytic(geom, plan.t0);
    const auto pts = space_points(geom, plan);
    const auto times = plan.solution_times();
    const auto gsup = detail::reduce_solution<detail::SupAcc>(
        sol, pts, times, plan.threads,
        [](detail::SupAcc& a, const Sample& x, int) { a.add(x.s * x.jet.grad_sq, x); });
    FEvolutionResult res;
    res.measured_grad_sup = gsup.best;
    if (cstar == 0.0) cstar = (1.0 + plan.cstar_margin) * gsup.best;
    if (cstar < gsup.best) {
        fail(ErrorKind::Precondition, "C_* = " + detail::num_key(cstar) +
                                          " is below the measured sup of s|grad u|^2 = " + detail::num_key(gsup.best));
    }
    res.cstar = cstar;
    const double C = 8.0 * cstar;
    const int n = geom.dim();
    const double source = 18.0 * n * (1.0 + K * K) * C * C;
    detail::ScalarProbe F{&sol, [C](const KernelJet& j, double s) {
                              return (C + s * j.grad_sq) * s * s * j.lap * j.lap;
                          }};
    struct Acc {
        double c_crit = std::numeric_limits<double>::infinity();
        Sample at;
        long count = 0;
        std::vector<std::pair<double, double>> terms;  // (B, F^2 / s) per sample, in order
        void merge(const Acc& o) {
            count += o.count;
            if (o.c_crit < c_crit) {
                c_crit = o.c_crit;
                at = o.at;
            }
            terms.insert(terms.end(), o.terms.begin(), o.terms.end());
        }
    };
    const auto acc = detail::reduce_solution<Acc>(sol, pts, times, plan.threads, [&](Acc& a, const Sample& x, int) {
        ++a.count;
        const auto c_vec = x.coord_vector();
        const double h = 1e-3 * std::sqrt(x.tau), k = 1e-3 * x.tau;
        const double Fv = F.build(x.jet, x.s);
        const double lapF = detail::fd_laplacian(F, c_vec, x.dist, x.s, h);
        const double dtF = detail::fd_time(F, c_vec, x.dist, x.s, k);
        const double B = lapF - dtF + source / x.s;
        const double quad = Fv * Fv / x.s;
        a.terms.emplace_back(B, quad);
        if (quad > 0.0) {
            const double cc = B / quad;
            if (cc < a.c_crit) {
                a.c_crit = cc;
                a.at = x;
            }
        }
    });
    res.c_critical = acc.c_crit;
    res.samples = acc.count;
    res.binding = detail::argmin_of(acc.at, acc.at.s);
    res.c_evaluated = c > 0.0 ? c : acc.c_crit;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& [B, quad] : acc.terms) {
        const double scale = std::abs(B) + res.c_evaluated * quad + 1e-300;
        worst = std::min(worst, (B - res.c_evaluated * quad) / scale);
    }
    res.worst_relative_residual = worst;
    return res;
}

inline EstimateReport f_evolution_report(const ModelGeometry& geom, const SamplingPlan& plan) {
    const auto r = f_evolution_check(geom, plan, 0.0, plan.evolution_c);
    EstimateReport rep = new_report("lem2.3", geom);
    rep.worst_margin = r.worst_relative_residual;
    rep.argmin = r.binding;
    rep.samples = r.samples;
    rep.fitted_constant = r.c_critical;
    rep.tolerance_floor = kAnalyticFloor;
    rep.labels["margin_units"] = "relative-residual";
    rep.metrics["C_star"] = r.cstar;
    rep.metrics["measured_sup_s_grad_sq"] = r.measured_grad_sup;
    rep.metrics["c_critical"] = r.c_critical;
    rep.metrics["c_evaluated"] = r.c_evaluated;
    if (r.c_critical > 0.0) rep.metrics["implied_C_n"] = 1.0 / (r.c_critical * r.cstar * r.cstar);
    rep.pass = r.c_critical > 0.0 && std::isfinite(r.c_critical) && rep.worst_margin >= rep.tolerance_floor;
    return rep;
}

struct BochnerResult {
    double max_rel_gradient = 0.0;
    double max_rel_laplacian = 0.0;
    long cauchy_schwarz_violations = 0;
    long points = 0;
    Argmin worst_at;
};

/// Both Bochner-type identities at seeded random space-time points.
inline BochnerResult bochner_residuals(const ModelGeometry& geom, const SamplingPlan& plan) {
    plan.validate();
    if (geom.kind() == GeometryKind::Warped) {
        fail(ErrorKind::NotApplicable, "identity checks need analytic third derivatives");
    }
    const double ric = detail::ricci_factor(geom);
    const Solution sol = Solution::analytic(geom, plan.t0);
    const int n = geom.dim();
    std::mt19937_64 rng(plan.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    struct Pt {
        std::vector<double> c;
        double dist, s;
    };
    std::vector<Pt> pts;
    const double pi = std::numbers::pi;
    for (int k = 0; k < plan.random_points; ++k) {
        const double s = plan.t_min() + (plan.T - plan.t_min()) * U(rng);
        const double w = 2.0 * std::sqrt(s + plan.t0);
        Pt p{std::vector<double>(geom.coordinate_count(), 0.0), 0.0, s};
        switch (geom.kind()) {
            case GeometryKind::Euclidean:
                for (double& v : p.c) v = (2.0 * U(rng) - 1.0) * w;
                p.dist = detail::euclid_norm(p.c);
                break;
            case GeometryKind::FlatTorus:
                for (double& v : p.c) v = geom.period() * U(rng);
                break;
            case GeometryKind::FlatCylinder:
                p.c[0] = (2.0 * U(rng) - 1.0) * w;
                p.c[1] = geom.period() * U(rng);
                break;
            case GeometryKind::Sphere2:
                p.dist = 0.05 + (pi - 0.1) * U(rng);
                p.c[0] = p.dist;
                break;
            case GeometryKind::Hyperbolic3:
                p.dist = 0.05 + 1.5 * w * U(rng);
                p.c[0] = p.dist;
                break;
            case GeometryKind::Warped: break;
        }
        pts.push_back(std::move(p));
    }
    detail::ScalarProbe G1{&sol, [](const KernelJet& j, double s) { return s * j.grad_sq; }};
    detail::ScalarProbe G2{&sol, [](const KernelJet& j, double) { return j.lap * j.lap; }};
    struct Acc {
        double g = 0.0, l = 0.0, worst = -1.0;
        long cs = 0, count = 0;
        Argmin at;
        void merge(const Acc& o) {
            g = std::max(g, o.g);
            l = std::max(l, o.l);
            cs += o.cs;
            count += o.count;
            if (o.worst > worst) {
                worst = o.worst;
                at = o.at;
            }
        }
    };
    std::vector<Acc> parts(pts.size());
    parallel_chunks(static_cast<int>(pts.size()), plan.threads, [&](int i) {
        const auto& p = pts[i];
        auto& a = parts[i];
        a.count = 1;
        const double tau = p.s + plan.t0;
        const double h = 1e-3 * std::sqrt(tau), k = 1e-3 * tau;
        const auto j = sol.jet_coords(p.c.data(), static_cast<int>(p.c.size()), p.dist, p.s);
        if (j.hess_sq < j.lap * j.lap / n * (1.0 - 1e-12)) ++a.cs;
        const double dt1 = detail::fd_time(G1, p.c, p.dist, p.s, k);
        const double lap1 = detail::fd_laplacian(G1, p.c, p.dist, p.s, h);
        const double t_hess = 2.0 * p.s * j.hess_sq, t_ric = 2.0 * p.s * ric * j.grad_sq;
        const double r1 = dt1 - lap1 + t_hess + t_ric - j.grad_sq;
        const double s1 = std::max({std::abs(dt1), std::abs(lap1), t_hess, std::abs(t_ric), j.grad_sq, 1e-300});
        const double dt2 = detail::fd_time(G2, p.c, p.dist, p.s, k);
        const double lap2 = detail::fd_laplacian(G2, p.c, p.dist, p.s, h);
        const double r2 = dt2 - lap2 + 2.0 * j.grad_lap_sq;
        const double s2 = std::max({std::abs(dt2), std::abs(lap2), 2.0 * j.grad_lap_sq, 1e-300});
        a.g = std::abs(r1) / s1;
        a.l = std::abs(r2) / s2;
        a.worst = std::max(a.g, a.l);
        a.at = Argmin{p.c, p.s};
    });
    Acc total;
    for (const auto& a : parts) total.merge(a);
    return BochnerResult{total.g, total.l, total.cs, total.count, total.at};
}

inline EstimateReport bochner_report(const ModelGeometry& geom, const SamplingPlan& plan) {
    const auto r = bochner_residuals(geom, plan);
    EstimateReport rep = new_report("bochner", geom);
    rep.worst_margin = -std::max(r.max_rel_gradient, r.max_rel_laplacian);
    rep.argmin = r.worst_at;
    rep.samples = r.points;
    rep.tolerance_floor = -kIdentityTolerance;
    rep.labels["margin_units"] = "negated-relative-residual";
    rep.metrics["max_rel_residual_gradient"] = r.max_rel_gradient;
    rep.metrics["max_rel_residual_laplacian"] = r.max_rel_laplacian;
    rep.metrics["cauchy_schwarz_violations"] = static_cast<double>(r.cauchy_schwarz_violations);
    rep.pass = rep.worst_margin >= rep.tolerance_floor && r.cauchy_schwarz_violations == 0;
    return rep;
}

struct PFunctionResult {
    double epsilon_rel = 0.0;
    double max_P = -std::numeric_limits<double>::infinity();  // in units of A
    double max_P_shifted_bound = -std::numeric_limits<double>::infinity();  // A + eps in the log
    bool shifted_bound_computed = false;
    double worst_margin = std::numeric_limits<double>::infinity();
    Argmin argmax;
    long case_counts[3] = {0, 0, 0};
    long case3_checked = 0;
    long case3_violations = 0;
    long heat_triggers = 0;
    long heat_violations = 0;
    double weighted_quadrature = 0.0;
    double initial_slice_max_P = -std::numeric_limits<double>::infinity();
    long samples = 0;
};

/// P = s (Lap u_e + |grad u_e|^2 / u_e) - u_e (n + 4 log(A / u_e)), u_e = u + eps.
inline PFunctionResult p_function_check(const ModelGeometry& geom, const SamplingPlan& plan, double eps_rel) {
    plan.validate();
    detail::require_nonnegative_ricci(geom, "p-function");
    const Solution sol = detail::make_solution(geom, plan);
    const bool disc = sol.is_discrete();
    const double A = sol.A();
    const double eps = eps_rel * A;
    const int n = geom.dim();
    const bool shifted = eps_rel >= 1e-3;
    // spatial cap from the tail of u_e
    const double cap = std::sqrt(8.0 * (plan.T + plan.t0) * std::log(1.0 / eps_rel));
    std::vector<SpacePoint> pts;
    for (const auto& p : solution_points(sol, plan)) {
        if (p.dist <= cap || geom.is_compact()) pts.push_back(p);
    }
    const auto times = plan.solution_times();
    auto P_of = [&](const KernelJet& j, double s, double bound) {
        const double ue = j.u + eps;
        return s * (j.lap + j.grad_sq / ue) - ue * (n + 4.0 * std::log(bound / ue));
    };
    detail::ScalarProbe Pprobe{&sol, [&](const KernelJet& j, double s) { return P_of(j, s, A); }};
    const double tol = 1e-9 * A;
    struct Acc {
        PFunctionResult r;
        Sample at;
        void merge(const Acc& o) {
            if (o.r.worst_margin < r.worst_margin) {
                r.worst_margin = o.r.worst_margin;
                at = o.at;
            }
            r.max_P = std::max(r.max_P, o.r.max_P);
            r.max_P_shifted_bound = std::max(r.max_P_shifted_bound, o.r.max_P_shifted_bound);
            for (int c = 0; c < 3; ++c) r.case_counts[c] += o.r.case_counts[c];
            r.case3_checked += o.r.case3_checked;
            r.case3_violations += o.r.case3_violations;
            r.heat_triggers += o.r.heat_triggers;
            r.heat_violations += o.r.heat_violations;
            r.weighted_quadrature += o.r.weighted_quadrature;
            r.samples += o.r.samples;
        }
    };
    const double dt = times.size() > 1 ? times[1] - times[0] : 1.0;
    const auto acc = detail::reduce_solution<Acc>(sol, pts, times, plan.threads, [&](Acc& a, const Sample& x, int c) {
        const auto& j = x.jet;
        const double ue = j.u + eps;
        const double P = P_of(j, x.s, A);
        const double rhs = ue * (n + 4.0 * std::log(A / ue));
        ++a.r.samples;
        a.r.max_P = std::max(a.r.max_P, P / A);
        if (shifted) a.r.max_P_shifted_bound = std::max(a.r.max_P_shifted_bound, P_of(j, x.s, A + eps) / A);
        const double m = disc ? -P / std::max(std::abs(rhs), 1e-300) : -P / A;
        if (m < a.r.worst_margin) {
            a.r.worst_margin = m;
            a.at = x;
        }
        const double ratio = j.grad_sq / ue;
        const int cs = j.lap <= ratio ? 0 : (j.lap <= 3.0 * ratio ? 1 : 2);
        ++a.r.case_counts[cs];
        if (cs == 2 && P >= 0.0) {
            ++a.r.case3_checked;
            if (2.0 * (j.lap - ratio) < n * ue / x.s) ++a.r.case3_violations;
        }
        if (!disc && geom.is_flat() && P >= -tol) {
            ++a.r.heat_triggers;
            const auto cv = x.coord_vector();
            const double tau = x.tau;
            const double heat = detail::fd_time(Pprobe, cv, x.dist, x.s, 1e-3 * tau) -
                                detail::fd_laplacian(Pprobe, cv, x.dist, x.s, 1e-3 * std::sqrt(tau));
            if (heat > kIdentityTolerance * std::max(std::abs(P), A / tau)) ++a.r.heat_violations;
        }
        const double wt = (c == 0 || c + 1 == static_cast<int>(times.size())) ? 0.5 * dt : dt;
        const double Pp = std::max(P, 0.0);
        a.r.weighted_quadrature += std::exp(-x.dist * x.dist) * Pp * Pp * x.weight * wt;
    });
    PFunctionResult res = acc.r;
    res.epsilon_rel = eps_rel;
    res.shifted_bound_computed = shifted;
    res.argmax = detail::argmin_of(acc.at, acc.at.s);
    // s = 0 slice: P = -u_e (n + 4 log(A / u_e))
    for (const auto& p : pts) {
        const double u = sol.is_discrete() ? sol.field().values[snapshot_index(sol.field(), sol.t0())][p.grid_index]
                                           : sol.jet(p, 0.0).u;
        const double ue = u + eps;
        res.initial_slice_max_P = std::max(res.initial_slice_max_P, -ue * (n + 4.0 * std::log(A / ue)) / A);
    }
    return res;
}

inline EstimateReport p_function_report(const ModelGeometry& geom, const SamplingPlan& plan) {
    EstimateReport rep = new_report("p-function", geom);
    bool ok = true;
    bool disc = geom.kind() == GeometryKind::Warped;
    for (double e : plan.epsilon_rel) {
        const auto r = p_function_check(geom, plan, e);
        const std::string k = "eps_rel=" + detail::num_key(e) + ":";
        rep.metrics[k + "max_P_over_A"] = r.max_P;
        if (r.shifted_bound_computed) rep.metrics[k + "max_P_over_A_bound_A_plus_eps"] = r.max_P_shifted_bound;
        rep.metrics[k + "case1"] = r.case_counts[0];
        rep.metrics[k + "case2"] = r.case_counts[1];
        rep.metrics[k + "case3"] = r.case_counts[2];
        rep.metrics[k + "case3_checked"] = r.case3_checked;
        rep.metrics[k + "case3_violations"] = r.case3_violations;
        rep.metrics[k + "heat_triggers"] = r.heat_triggers;
        rep.metrics[k + "heat_violations"] = r.heat_violations;
        rep.metrics[k + "weighted_quadrature"] = r.weighted_quadrature;
        rep.metrics[k + "initial_slice_max_P_over_A"] = r.initial_slice_max_P;
        const long covered = r.case_counts[0] + r.case_counts[1] + r.case_counts[2];
        rep.metrics[k + "classified_fraction"] = r.samples ? static_cast<double>(covered) / r.samples : 0.0;
        ok = ok && covered == r.samples && r.case3_violations == 0 && r.heat_violations == 0 &&
             std::isfinite(r.weighted_quadrature) && (e > 0.01 || r.initial_slice_max_P < 0.0);
        rep.samples += r.samples;
        if (r.worst_margin < rep.worst_margin) {
            rep.worst_margin = r.worst_margin;
            rep.argmin = r.argmax;
        }
    }
    rep.tolerance_floor = disc ? kDiscreteRelativeFloor : kAnalyticFloor;
    rep.labels["margin_units"] = disc ? "relative-to-rhs" : "negated-P-over-A";
    rep.pass = ok && std::isfinite(rep.worst_margin) && rep.worst_margin >= rep.tolerance_floor;
    return rep;
}

// ---------------------------------------------------------------------------
// Cutoff

inline EstimateReport cutoff_report(const ModelGeometry& geom, const SamplingPlan& plan) {
    if (geom.kind() != GeometryKind::Euclidean) {
        fail(ErrorKind::NotApplicable, "cutoff-fit certifies the profile on Euclidean space only");
    }
    const int n = geom.dim();
    const int grid = 20 * (plan.n_space - 1) + 1;
    const auto fit1 = cutoff_constants(build_cutoff(1.0), n, grid);
    const auto fit100 = cutoff_constants(build_cutoff(100.0), n, grid);
    const auto quintic = cutoff_constants(build_cutoff(1.0, CutoffKind::Quintic), n, grid);
    const double r_gap = std::abs(fit1.C3 - fit100.C3) / fit1.C3;
    const double viol = std::max(cutoff_bound_violation(build_cutoff(1.0), n, fit1.C3, 2 * grid - 1),
                                 cutoff_bound_violation(build_cutoff(100.0), n, fit100.C3, 2 * grid - 1));
    EstimateReport rep = new_report("cutoff-fit", geom);
    rep.fitted_constant = fit1.C3;
    rep.worst_margin = -viol;
    rep.argmin = Argmin{{fit1.gradient_part >= fit1.laplacian_part ? fit1.gradient_at : fit1.laplacian_at}, 0.0};
    rep.samples = 4L * grid;
    rep.tolerance_floor = -1e-12;
    rep.labels["margin_units"] = "relative-bound-violation";
    rep.labels["profile"] = "cos2";
    rep.metrics["gradient_part"] = fit1.gradient_part;
    rep.metrics["laplacian_part"] = fit1.laplacian_part;
    rep.metrics["C3_R1"] = fit1.C3;
    rep.metrics["C3_R100"] = fit100.C3;
    rep.metrics["R_relative_gap"] = r_gap;
    rep.metrics["quintic_C3"] = quintic.C3;
    rep.pass = r_gap <= 1e-12 && rep.worst_margin >= rep.tolerance_floor;
    return rep;
}

// ---------------------------------------------------------------------------
// Sharpness scan of the kernel Laplacian bound in t

struct SharpnessRow {
    double t, lhs, rhs, ratio;
};

struct SharpnessScan {
    std::vector<SharpnessRow> rows;
    bool monotone = true;
    double limit = 0.0;  // (4 - delta) / 32
};

/// Euclidean, fixed distance d: LHS = Lap H / H, RHS = (2/t)(C + 4 d^2 / ((4 - delta) t))
/// with C the fitted value -n/4.
inline SharpnessScan sharpness_scan(const ModelGeometry& geom, double d, double delta, const std::vector<double>& ts) {
    if (geom.kind() != GeometryKind::Euclidean) fail(ErrorKind::NotApplicable, "sharpness scan runs on Euclidean space");
    if (!(d > 0.0)) fail(ErrorKind::Domain, "sharpness scan needs d > 0");
    if (!(delta > 0.0 && delta < 4.0)) fail(ErrorKind::Config, "delta must lie in (0, 4)");
    const int n = geom.dim();
    const double C = -0.25 * n;
    SharpnessScan scan;
    scan.limit = (4.0 - delta) / 32.0;
    for (double t : ts) {
        // Lap H / H in closed form; H itself underflows long before t = 1e-4
        const double lhs = d * d / (4.0 * t * t) - 0.5 * n / t;
        const double rhs = 2.0 / t * (C + 4.0 * d * d / ((4.0 - delta) * t));
        scan.rows.push_back({t, lhs, rhs, lhs / rhs});
    }
    for (std::size_t k = 1; k < scan.rows.size(); ++k) {
        const bool up = scan.rows[k].ratio >= scan.rows[k - 1].ratio;
        const bool first_up = scan.rows[1].ratio >= scan.rows[0].ratio;
        if (up != first_up) scan.monotone = false;
    }
    return scan;
}

// ---------------------------------------------------------------------------
// Dispatch by public id

inline const std::vector<std::string>& estimate_ids() {
    static const std::vector<std::string> ids{"eq1.1",      "eq1.2-fit", "eq1.4",     "thm1.3",   "thm2.1-fit", "thm2.4-fit",
                                              "lem2.3",     "bochner",   "p-function", "liyau-fit", "doubling",   "cutoff-fit"};
    return ids;
}

inline bool is_fit_id(const std::string& id) {
    return id == "eq1.2-fit" || id == "thm2.1-fit" || id == "thm2.4-fit" || id == "liyau-fit" || id == "doubling" ||
           id == "cutoff-fit";
}

inline EstimateReport run_estimate(const std::string& id, const ModelGeometry& geom, const SamplingPlan& plan) {
    if (id == "eq1.1") return hamilton_gradient_margin(geom, plan);
    if (id == "eq1.4") return main_laplacian_margin(geom, plan);
    if (id == "thm1.3") return kernel_laplacian_bound(geom, plan);
    if (id == "eq1.2-fit") return closed_manifold_laplacian_margin(geom, plan);
    if (id == "thm2.1-fit") return family_fit_report(id, geom, plan, kotschwar_gradient_fit(geom, plan));
    if (id == "thm2.4-fit") return family_fit_report(id, geom, plan, bernstein_laplacian_fit(geom, plan));
    if (id == "lem2.3") return f_evolution_report(geom, plan);
    if (id == "bochner") return bochner_report(geom, plan);
    if (id == "p-function") return p_function_report(geom, plan);
    if (id == "liyau-fit") return li_yau_report(geom, plan);
    if (id == "doubling") return doubling_report(geom, plan);
    if (id == "cutoff-fit") return cutoff_report(geom, plan);
    fail(ErrorKind::Config, "unknown estimate id '" + id + "'");
}

}  // namespace heatcert
