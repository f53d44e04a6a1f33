#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "heatcert/error.hpp"
#include "heatcert/geometry.hpp"
#include "heatcert/kernels.hpp"

namespace heatcert {

struct RadialGrid {
    double r_max = 10.0;
    int n_r = 1001;
    double t_start = 0.01;
    double t_end = 1.0;
    int n_t = 1000;

    double h_r() const { return r_max / (n_r - 1); }
    double h_t() const { return (t_end - t_start) / n_t; }
    double r(int i) const { return i * h_r(); }
    // Informational only; the scheme is implicit.
    double diffusion_number() const { return h_t() / (h_r() * h_r()); }

    void validate() const {
        if (!(r_max > 0.0) || n_r < 3) fail(ErrorKind::Domain, "radial grid needs r_max > 0 and at least 3 points");
        if (!(t_end > t_start) || n_t < 1) fail(ErrorKind::Domain, "time grid needs t_end > t_start and n_t >= 1");
    }
};

/// Conservative finite-volume discretization of f^{-1} (f u')' with a
/// symmetric pole row and a zero-flux outer boundary. Row i reads
/// lower[i] u[i-1] + diag[i] u[i] + upper[i] u[i+1].
class RadialOperator {
public:
    RadialOperator(const Warp& warp, double r_max, int n_r) : warp_(warp), n_(n_r), h_(r_max / (n_r - 1)) {
        if (n_r < 3 || !(r_max > 0.0)) fail(ErrorKind::Domain, "radial operator needs r_max > 0 and n_r >= 3");
        if (r_max > warp.r_max * (1.0 + 1e-12)) fail(ErrorKind::Truncation, "grid extends past the warp's chart");
        f_.resize(n_);
        df_.resize(n_);
        for (int i = 0; i < n_; ++i) {
            const double r = i * h_;
            f_[i] = warp.f(r);
            df_[i] = warp.df(r);
            if (i > 0 && !(f_[i] > 0.0)) {
                fail(ErrorKind::DegenerateWarp, "warp vanishes at r = " + std::to_string(r));
            }
        }
        auto half = [&](int i) {
            const double v = warp.f((i + 0.5) * h_);
            if (!(v > 0.0)) fail(ErrorKind::DegenerateWarp, "warp vanishes at a cell face");
            return v;
        };
        lower_.assign(n_, 0.0);
        diag_.assign(n_, 0.0);
        upper_.assign(n_, 0.0);
        volume_.assign(n_, 0.0);
        const double h2 = h_ * h_;
        upper_[0] = 4.0 / h2;
        diag_[0] = -4.0 / h2;
        volume_[0] = half(0) * h_ / 4.0;
        for (int i = 1; i < n_ - 1; ++i) {
            lower_[i] = half(i - 1) / (f_[i] * h2);
            upper_[i] = half(i) / (f_[i] * h2);
            diag_[i] = -(lower_[i] + upper_[i]);
            volume_[i] = f_[i] * h_;
        }
        lower_[n_ - 1] = 2.0 * half(n_ - 2) / (f_[n_ - 1] * h2);
        diag_[n_ - 1] = -lower_[n_ - 1];
        volume_[n_ - 1] = f_[n_ - 1] * h_ / 2.0;
    }

    int size() const { return n_; }
    double h() const { return h_; }
    double r(int i) const { return i * h_; }
    const Warp& warp() const { return warp_; }
    const std::vector<double>& f() const { return f_; }
    const std::vector<double>& df() const { return df_; }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& diag() const { return diag_; }
    const std::vector<double>& upper() const { return upper_; }
    const std::vector<double>& volume() const { return volume_; }

    double apply_at(std::span<const double> u, int i) const {
        // difference form, so constants map to exactly zero
        double v = 0.0;
        if (i > 0) v += lower_[i] * (u[i - 1] - u[i]);
        if (i < n_ - 1) v += upper_[i] * (u[i + 1] - u[i]);
        return v;
    }

    std::vector<double> apply(std::span<const double> u) const {
        std::vector<double> out(n_);
        for (int i = 0; i < n_; ++i) out[i] = apply_at(u, i);
        return out;
    }

    // 2 pi * sum V_i u_i; invariant under the scheme.
    double mass(std::span<const double> u) const {
        double m = 0.0;
        for (int i = 0; i < n_; ++i) m += volume_[i] * u[i];
        return 2.0 * std::numbers::pi * m;
    }

private:
    Warp warp_;
    int n_;
    double h_;
    std::vector<double> f_, df_, lower_, diag_, upper_, volume_;
};

/// Crank-Nicolson stepper with the tridiagonal factorization done once.
class CrankNicolson {
public:
    CrankNicolson(const RadialOperator& op, double h_t) : op_(&op), h_t_(h_t) {
        if (!(h_t > 0.0)) fail(ErrorKind::Domain, "time step must be positive");
        const int n = op.size();
        const double a = 0.5 * h_t;
        sub_.resize(n);
        inv_pivot_.resize(n);
        sup_mod_.resize(n);
        double prev_sup = 0.0;
        for (int i = 0; i < n; ++i) {
            sub_[i] = -a * op.lower()[i];
            const double d = 1.0 - a * op.diag()[i];
            const double sup = i < n - 1 ? -a * op.upper()[i] : 0.0;
            const double pivot = d - sub_[i] * prev_sup;
            if (!(std::abs(pivot) > 1e-300)) fail(ErrorKind::Solver, "singular tridiagonal system");
            inv_pivot_[i] = 1.0 / pivot;
            sup_mod_[i] = sup * inv_pivot_[i];
            prev_sup = sup_mod_[i];
        }
    }

    double h_t() const { return h_t_; }

    void step(std::vector<double>& u) const {
        const int n = op_->size();
        const double a = 0.5 * h_t_;
        rhs_.resize(n);
        for (int i = 0; i < n; ++i) rhs_[i] = u[i] + a * op_->apply_at(u, i);
        // forward sweep then back substitution
        double prev = 0.0;
        for (int i = 0; i < n; ++i) {
            prev = (rhs_[i] - sub_[i] * prev) * inv_pivot_[i];
            u[i] = prev;
        }
        for (int i = n - 2; i >= 0; --i) u[i] -= sup_mod_[i] * u[i + 1];
    }

private:
    const RadialOperator* op_;
    double h_t_;
    std::vector<double> sub_, inv_pivot_, sup_mod_;
    mutable std::vector<double> rhs_;
};

inline std::vector<double> step_crank_nicolson(const RadialOperator& op, std::vector<double> u, double h_t) {
    CrankNicolson(op, h_t).step(u);
    return u;
}

struct SolveOptions {
    int snapshot_every = 1;
};

struct SolveDiagnostics {
    double diffusion_number = 0.0;
    double mass_initial = 0.0;
    double mass_final = 0.0;
    double max_mass_drift = 0.0;  // relative, over all steps
    long positivity_violations = 0;
    double min_value = 0.0;
    bool max_nonincreasing = true;
    bool min_nondecreasing = true;
    bool boundary_margin_ok = true;  // r_max >= 10 sqrt(t_end)
};

/// Snapshots u(r_i, t_j) of one solve plus the operator they came from.
struct RadialField {
    RadialGrid grid;
    RadialOperator op;
    std::vector<double> times;
    std::vector<std::vector<double>> values;
    SolveDiagnostics diagnostics;

    int snapshot_count() const { return static_cast<int>(times.size()); }
    double r(int i) const { return op.r(i); }
};

/// Gaussian of the flat plane at time t0, used as approximate point-mass data.
inline std::function<double(double)> gaussian_initial(double t0) {
    if (!(t0 > 0.0)) fail(ErrorKind::Domain, "initial Gaussian time must be positive");
    return [t0](double r) { return std::exp(-r * r / (4.0 * t0)) / (4.0 * std::numbers::pi * t0); };
}

inline RadialField solve_heat(const RadialGrid& grid, const Warp& warp, const std::function<double(double)>& initial,
                              const SolveOptions& opts = {}) {
    grid.validate();
    if (opts.snapshot_every < 1) fail(ErrorKind::Domain, "snapshot stride must be positive");
    RadialField field{grid, RadialOperator(warp, grid.r_max, grid.n_r), {}, {}, {}};
    const auto& op = field.op;
    std::vector<double> u(grid.n_r);
    for (int i = 0; i < grid.n_r; ++i) {
        u[i] = initial(op.r(i));
        // zeros from underflow in the far tail are admitted
        if (!(u[i] >= 0.0) || !std::isfinite(u[i])) fail(ErrorKind::Domain, "initial data must be positive");
    }
    if (!(u[0] > 0.0) && !(*std::max_element(u.begin(), u.end()) > 0.0)) {
        fail(ErrorKind::Domain, "initial data must be positive");
    }
    auto& diag = field.diagnostics;
    diag.diffusion_number = grid.diffusion_number();
    diag.boundary_margin_ok = grid.r_max >= 10.0 * std::sqrt(grid.t_end);
    diag.mass_initial = op.mass(u);
    diag.min_value = *std::min_element(u.begin(), u.end());

    const CrankNicolson cn(op, grid.h_t());
    double prev_max = *std::max_element(u.begin(), u.end());
    double prev_min = diag.min_value;
    field.times.push_back(grid.t_start);
    field.values.push_back(u);
    for (int j = 1; j <= grid.n_t; ++j) {
        cn.step(u);
        const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
        // rounding-level slack on the discrete maximum principle
        if (*hi > prev_max * (1.0 + 1e-13)) diag.max_nonincreasing = false;
        if (*lo < prev_min * (1.0 - 1e-13) - 1e-300) diag.min_nondecreasing = false;
        prev_max = *hi;
        prev_min = *lo;
        diag.min_value = std::min(diag.min_value, *lo);
        for (double v : u) diag.positivity_violations += v < 0.0;
        const double m = op.mass(u);
        diag.max_mass_drift = std::max(diag.max_mass_drift, std::abs(m - diag.mass_initial) / diag.mass_initial);
        if (j % opts.snapshot_every == 0 || j == grid.n_t) {
            field.times.push_back(grid.t_start + j * grid.h_t());
            field.values.push_back(u);
        }
    }
    diag.mass_final = op.mass(u);
    return field;
}

/// Solve on [t_start, max(output_times)] landing exactly on every requested
/// output time; each gap is split into equal steps no longer than h_max.
/// grid.t_end and grid.n_t are overwritten with the values actually used.
inline RadialField solve_heat_at(RadialGrid grid, const Warp& warp, const std::function<double(double)>& initial,
                                 std::vector<double> output_times, double h_max) {
    if (!(h_max > 0.0)) fail(ErrorKind::Domain, "time step bound must be positive");
    std::sort(output_times.begin(), output_times.end());
    output_times.erase(std::unique(output_times.begin(), output_times.end()), output_times.end());
    if (output_times.empty() || !(output_times.front() >= grid.t_start)) {
        fail(ErrorKind::Domain, "output times must not precede t_start");
    }
    grid.t_end = output_times.back();
    if (!(grid.t_end > grid.t_start)) fail(ErrorKind::Domain, "need an output time after t_start");
    grid.n_t = 1;
    grid.validate();
    RadialField field{grid, RadialOperator(warp, grid.r_max, grid.n_r), {}, {}, {}};
    const auto& op = field.op;
    std::vector<double> u(grid.n_r);
    for (int i = 0; i < grid.n_r; ++i) {
        u[i] = initial(op.r(i));
        if (!(u[i] >= 0.0) || !std::isfinite(u[i])) fail(ErrorKind::Domain, "initial data must be positive");
    }
    auto& diag = field.diagnostics;
    diag.boundary_margin_ok = grid.r_max >= 10.0 * std::sqrt(grid.t_end);
    diag.mass_initial = op.mass(u);
    diag.min_value = *std::min_element(u.begin(), u.end());
    double prev_max = *std::max_element(u.begin(), u.end());
    double prev_min = diag.min_value;
    double t = grid.t_start;
    long steps = 0;
    if (output_times.front() == grid.t_start) {
        field.times.push_back(t);
        field.values.push_back(u);
    }
    for (double target : output_times) {
        if (target == grid.t_start) continue;
        const int m = static_cast<int>(std::ceil((target - t) / h_max - 1e-9));
        const double h = (target - t) / m;
        diag.diffusion_number = std::max(diag.diffusion_number, h / (op.h() * op.h()));
        const CrankNicolson cn(op, h);
        for (int k = 0; k < m; ++k) {
            cn.step(u);
            const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
            if (*hi > prev_max * (1.0 + 1e-13)) diag.max_nonincreasing = false;
            if (*lo < prev_min * (1.0 - 1e-13) - 1e-300) diag.min_nondecreasing = false;
            prev_max = *hi;
            prev_min = *lo;
            diag.min_value = std::min(diag.min_value, *lo);
            for (double v : u) diag.positivity_violations += v < 0.0;
            const double mass = op.mass(u);
            diag.max_mass_drift = std::max(diag.max_mass_drift, std::abs(mass - diag.mass_initial) / diag.mass_initial);
        }
        steps += m;
        t = target;
        field.times.push_back(target);
        field.values.push_back(u);
    }
    field.grid.n_t = static_cast<int>(steps);
    diag.mass_final = op.mass(u);
    return field;
}

/// Index of the snapshot at time t (to 1e-9), or -1.
inline int snapshot_index(const RadialField& field, double t) {
    const auto it = std::lower_bound(field.times.begin(), field.times.end(), t - 1e-9);
    if (it == field.times.end() || std::abs(*it - t) > 1e-9) return -1;
    return static_cast<int>(it - field.times.begin());
}

inline double radial_laplacian(const RadialField& field, int snapshot, int i) {
    return field.op.apply_at(field.values.at(snapshot), i);
}

/// Jet of a discrete field by central differences. The third-order entry is
/// not available from grid data and is NaN.
inline KernelJet field_jet(const RadialField& field, int snapshot, int i) {
    const auto& u = field.values.at(snapshot);
    const int n = field.op.size();
    const double h = field.op.h();
    KernelJet j;
    j.u = u[i];
    double ur = 0.0, urr = 0.0;
    if (i == 0) {
        urr = 2.0 * (u[1] - u[0]) / (h * h);
    } else if (i == n - 1) {
        urr = 2.0 * (u[n - 2] - u[n - 1]) / (h * h);
    } else {
        ur = (u[i + 1] - u[i - 1]) / (2.0 * h);
        urr = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
    }
    // tangential Hessian eigenvalue (f'/f) u_r, equal to u_rr at the pole
    const double tang = i == 0 ? urr : field.op.df()[i] / field.op.f()[i] * ur;
    j.grad_sq = ur * ur;
    j.lap = field.op.apply_at(u, i);
    j.hess_sq = urr * urr + tang * tang;
    j.grad_lap_sq = std::numeric_limits<double>::quiet_NaN();
    return j;
}

/// Central difference in time between neighbouring snapshots (one-sided at the ends).
inline double field_time_derivative(const RadialField& field, int snapshot, int i) {
    const int m = field.snapshot_count();
    if (m < 2) fail(ErrorKind::Domain, "time derivative needs two snapshots");
    const int a = std::max(0, snapshot - 1), b = std::min(m - 1, snapshot + 1);
    return (field.values[b][i] - field.values[a][i]) / (field.times[b] - field.times[a]);
}

inline void write_field_csv(const RadialField& field, std::ostream& os, int r_stride = 1, int t_stride = 1) {
    os << "r,t,u,grad_sq,lap\n";
    os.precision(17);
    for (int j = 0; j < field.snapshot_count(); j += std::max(1, t_stride)) {
        for (int i = 0; i < field.op.size(); i += std::max(1, r_stride)) {
            const auto jet = field_jet(field, j, i);
            os << field.r(i) << ',' << field.times[j] << ',' << jet.u << ',' << jet.grad_sq << ',' << jet.lap << '\n';
        }
    }
}

}  // namespace heatcert
