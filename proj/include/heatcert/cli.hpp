#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "heatcert/discrete.hpp"
#include "heatcert/error.hpp"
#include "heatcert/estimates.hpp"
#include "heatcert/geometry.hpp"
#include "heatcert/plan.hpp"
#include "heatcert/report.hpp"

namespace heatcert {

/// Flat key/value settings. Layers merge later-wins: defaults, file, command line.
using Settings = std::map<std::string, std::string>;

enum ExitCode : int { kExitPass = 0, kExitMarginFailure = 1, kExitConfigError = 2 };

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(ErrorKind::Config, "'" + key + "' expects a number, got '" + v + "'");
    }
}

inline long to_long(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 9e15) fail(ErrorKind::Config, "'" + key + "' expects an integer");
    return static_cast<long>(d);
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    fail(ErrorKind::Config, "'" + key + "' expects a boolean, got '" + v + "'");
}

}  // namespace detail

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = detail::trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

/// "key = value" lines; '#' starts a comment.
inline Settings parse_config_text(std::istream& in, const std::string& origin = "config") {
    Settings out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail(ErrorKind::Config, origin + ":" + std::to_string(number) + ": expected 'key = value'");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        if (key.empty()) fail(ErrorKind::Config, origin + ":" + std::to_string(number) + ": empty key");
        out[key] = detail::trim(line.substr(eq + 1));
    }
    return out;
}

inline Settings load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Config, "cannot open config file '" + path + "'");
    return parse_config_text(in, path);
}

inline void merge_settings(Settings& base, const Settings& over) {
    for (const auto& [k, v] : over) base[k] = v;
}

inline std::string setting(const Settings& s, const std::string& key, const std::string& fallback) {
    const auto it = s.find(key);
    return it == s.end() ? fallback : it->second;
}

/// Geometry keys: euclidean:n=2, torus:n=1,L=6.28, cylinder:L=6.28, sphere:s2,
/// hyperbolic:h3, warped:f=cigar,Rmax=20.
inline ModelGeometry parse_geometry(const std::string& key) {
    const auto colon = key.find(':');
    const std::string kind = detail::trim(key.substr(0, colon));
    std::map<std::string, std::string> args;
    std::vector<std::string> bare;
    if (colon != std::string::npos) {
        for (const auto& part : split_list(key.substr(colon + 1))) {
            const auto eq = part.find('=');
            if (eq == std::string::npos) {
                bare.push_back(part);
            } else {
                args[detail::trim(part.substr(0, eq))] = detail::trim(part.substr(eq + 1));
            }
        }
    }
    auto take = [&](const std::string& name, const std::string& fallback = "") {
        const auto it = args.find(name);
        if (it == args.end()) {
            if (fallback.empty()) fail(ErrorKind::Config, "geometry '" + key + "' needs " + name + "=...");
            return fallback;
        }
        std::string v = it->second;
        args.erase(it);
        return v;
    };
    auto done = [&](ModelGeometry g) {
        if (!args.empty()) fail(ErrorKind::Config, "geometry '" + key + "' has unknown parameter " + args.begin()->first);
        return g;
    };
    if (kind == "euclidean") {
        return done(ModelGeometry::euclidean(static_cast<int>(detail::to_long("n", take("n")))));
    }
    if (kind == "torus") {
        const int n = static_cast<int>(detail::to_long("n", take("n", "1")));
        return done(ModelGeometry::flat_torus(n, detail::to_double("L", take("L"))));
    }
    if (kind == "cylinder") return done(ModelGeometry::flat_cylinder(detail::to_double("L", take("L"))));
    if (kind == "sphere") {
        if (!bare.empty() && bare != std::vector<std::string>{"s2"}) fail(ErrorKind::Config, "only sphere:s2 exists");
        return done(ModelGeometry::sphere());
    }
    if (kind == "hyperbolic") {
        if (!bare.empty() && bare != std::vector<std::string>{"h3"}) fail(ErrorKind::Config, "only hyperbolic:h3 exists");
        return done(ModelGeometry::hyperbolic3());
    }
    if (kind == "warped") {
        const std::string f = take("f", "cigar");
        const double r_max = detail::to_double("Rmax", take("Rmax", "20"));
        Warp w;
        if (f == "cigar") {
            w = cigar_warp(r_max);
        } else if (f == "flat") {
            w = flat_warp(r_max);
        } else if (f == "sinh") {
            w = sinh_warp(r_max);
        } else {
            fail(ErrorKind::Config, "unknown warp '" + f + "' (cigar, flat, sinh)");
        }
        return done(ModelGeometry::warped(w));
    }
    fail(ErrorKind::Config, "unknown geometry kind '" + kind + "'");
}

/// Plan fields settable as "plan.<name>"; "delta", "epsilon" and "threads"
/// are accepted bare as well.
inline const std::vector<std::string>& plan_keys() {
    static const std::vector<std::string> keys{
        "t0",           "t_min_rel",    "T",          "n_time",   "n_space",     "d_max",       "log_time",
        "delta",        "epsilon",      "family",     "refine_levels", "refine_budget", "refine_tol", "fit_stability",
        "random_points", "seed",        "threads",    "cstar_margin", "evolution_c", "n_r",         "h_t_max",
        "initial_time"};
    return keys;
}

inline void apply_plan_setting(SamplingPlan& p, const std::string& name, const std::string& v) {
    const std::string key = "plan." + name;
    auto list = [&] {
        std::vector<double> out;
        for (const auto& item : split_list(v)) out.push_back(detail::to_double(key, item));
        return out;
    };
    if (name == "t0") p.t0 = detail::to_double(key, v);
    else if (name == "t_min_rel") p.t_min_rel = detail::to_double(key, v);
    else if (name == "T") p.T = detail::to_double(key, v);
    else if (name == "n_time") p.n_time = static_cast<int>(detail::to_long(key, v));
    else if (name == "n_space") p.n_space = static_cast<int>(detail::to_long(key, v));
    else if (name == "d_max") p.d_max = detail::to_double(key, v);
    else if (name == "log_time") p.log_time = detail::to_bool(key, v);
    else if (name == "delta") p.delta = detail::to_double(key, v);
    else if (name == "epsilon") p.epsilon_rel = list();
    else if (name == "family") p.family_factors = list();
    else if (name == "refine_levels") p.refine_levels = static_cast<int>(detail::to_long(key, v));
    else if (name == "refine_budget") p.refine_budget = detail::to_long(key, v);
    else if (name == "refine_tol") p.refine_tol = detail::to_double(key, v);
    else if (name == "fit_stability") p.fit_stability = detail::to_double(key, v);
    else if (name == "random_points") p.random_points = static_cast<int>(detail::to_long(key, v));
    else if (name == "seed") p.seed = static_cast<std::uint64_t>(detail::to_long(key, v));
    else if (name == "threads") p.threads = static_cast<int>(detail::to_long(key, v));
    else if (name == "cstar_margin") p.cstar_margin = detail::to_double(key, v);
    else if (name == "evolution_c") p.evolution_c = detail::to_double(key, v);
    else if (name == "n_r") p.n_r = static_cast<int>(detail::to_long(key, v));
    else if (name == "h_t_max") p.h_t_max = detail::to_double(key, v);
    else if (name == "initial_time") p.initial_time = detail::to_double(key, v);
    else fail(ErrorKind::Config, "unknown plan setting '" + key + "'");
}

inline SamplingPlan plan_from(const Settings& s) {
    SamplingPlan p;
    for (const auto& [k, v] : s) {
        if (k.rfind("plan.", 0) == 0) apply_plan_setting(p, k.substr(5), v);
    }
    for (const char* bare : {"delta", "epsilon", "threads"}) {
        if (s.count(bare)) apply_plan_setting(p, bare, s.at(bare));
    }
    p.validate();
    return p;
}

inline void check_known_keys(const Settings& s) {
    static const std::vector<std::string> top{"geometry",      "estimates",      "out",           "margins_csv",
                                              "fit_csv",       "delta",          "epsilon",       "threads",
                                              "sharpness.d",   "sharpness.t_max", "sharpness.t_min", "sharpness.points",
                                              "solve.t_end",   "solve.snapshots", "solve.r_stride", "solve.t_stride"};
    for (const auto& [k, v] : s) {
        if (k.rfind("plan.", 0) == 0) continue;
        if (std::find(top.begin(), top.end(), k) == top.end()) fail(ErrorKind::Config, "unknown setting '" + k + "'");
    }
}

/// Error text without the leading "kind: " tag.
inline std::string error_detail(const Error& e) {
    std::string msg = e.what();
    const std::string tag = std::string(to_string(e.kind())) + ": ";
    if (msg.rfind(tag, 0) == 0) msg.erase(0, tag.size());
    return msg;
}

inline ModelGeometry required_geometry(const Settings& s) {
    const auto it = s.find("geometry");
    if (it == s.end() || it->second.empty()) fail(ErrorKind::Config, "a geometry key is required (--geometry)");
    return parse_geometry(it->second);
}

inline int exit_code_for(ErrorKind kind) {
    return kind == ErrorKind::DataIntegrity ? kExitMarginFailure : kExitConfigError;
}

inline void write_text(const std::string& path, const std::string& text, std::ostream& console) {
    if (path == "-") {
        console << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Config, "cannot write '" + path + "'");
    out << text;
}

struct RunSummary {
    int exit_code = kExitPass;
    std::vector<EstimateOutcome> outcomes;
};

/// Runs each id, folding errors into the outcome list and the exit code.
inline RunSummary run_estimates(const ModelGeometry& geom, const SamplingPlan& plan,
                                const std::vector<std::string>& ids, std::ostream& diag) {
    RunSummary sum;
    for (const auto& id : ids) {
        EstimateOutcome o;
        o.estimate_id = id;
        try {
            o.report = run_estimate(id, geom, plan);
            if (!o.report->pass) {
                sum.exit_code = std::max(sum.exit_code, static_cast<int>(kExitMarginFailure));
                diag << id << ": FAIL worst_margin " << format_double(o.report->worst_margin) << " below floor "
                     << format_double(o.report->tolerance_floor) << '\n';
            }
        } catch (const Error& e) {
            o.error_kind = e.kind();
            o.error_message = error_detail(e);
            sum.exit_code = std::max(sum.exit_code, exit_code_for(e.kind()));
            diag << id << ": " << e.what() << '\n';
        }
        sum.outcomes.push_back(std::move(o));
    }
    return sum;
}

inline std::vector<std::string> requested_ids(const Settings& s, bool fits_only) {
    const std::string raw = setting(s, "estimates", "");
    std::vector<std::string> ids = raw.empty() || raw == "all" ? estimate_ids() : split_list(raw);
    if (raw.empty() || raw == "all") {
        if (fits_only) {
            std::erase_if(ids, [](const std::string& id) { return !is_fit_id(id); });
        }
        return ids;
    }
    for (const auto& id : ids) {
        if (std::find(estimate_ids().begin(), estimate_ids().end(), id) == estimate_ids().end()) {
            fail(ErrorKind::Config, "unknown estimate id '" + id + "'");
        }
        if (fits_only && !is_fit_id(id)) fail(ErrorKind::Config, "'" + id + "' is not a fit-mode estimate");
    }
    return ids;
}

namespace detail {

template <class Body>
int guarded(std::ostream& diag, Body&& body) {
    try {
        return body();
    } catch (const Error& e) {
        diag << e.what() << '\n';
        return exit_code_for(e.kind());
    }
}

// Best-effort report for runs that stop before any estimate is evaluated.
inline void write_error_report(const Settings& s, const std::string& default_out, const Error& e,
                               std::ostream& console) {
    nlohmann::ordered_json j;
    j["artifact_version"] = kArtifactVersion;
    j["geometry"] = setting(s, "geometry", "");
    j["plan_hash"] = nullptr;
    j["results"] = nlohmann::ordered_json::array();
    j["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", error_detail(e)}};
    try {
        write_text(setting(s, "out", default_out), j.dump(2) + "\n", console);
    } catch (const Error&) {
    }
}

template <class Body>
int guarded_with_report(const Settings& s, const std::string& default_out, std::ostream& console, std::ostream& diag,
                        Body&& body) {
    try {
        return body();
    } catch (const Error& e) {
        diag << e.what() << '\n';
        write_error_report(s, default_out, e, console);
        return exit_code_for(e.kind());
    }
}

inline std::string margins_csv(const std::vector<EstimateOutcome>& outcomes) {
    std::ostringstream os;
    os << "estimate_id,worst_margin,tolerance_floor,pass,argmin_t,samples,error\n";
    for (const auto& o : outcomes) {
        os << o.estimate_id << ',';
        if (o.report) {
            os << format_double(o.report->worst_margin) << ',' << format_double(o.report->tolerance_floor) << ','
               << (o.report->pass ? "true" : "false") << ',' << format_double(o.report->argmin.t) << ','
               << o.report->samples << ",\n";
        } else {
            os << ",,false,,0," << to_string(*o.error_kind) << '\n';
        }
    }
    return os.str();
}

}  // namespace detail

/// verify: JSON report (always written once the configuration parses) and
/// exit 0 iff every estimate met its floor.
inline int run_verify(const Settings& s, std::ostream& console, std::ostream& diag) {
    return detail::guarded_with_report(s, "report.json", console, diag, [&] {
        check_known_keys(s);
        const auto geom = required_geometry(s);
        const auto plan = plan_from(s);
        const auto ids = requested_ids(s, false);
        const auto sum = run_estimates(geom, plan, ids, diag);
        write_text(setting(s, "out", "report.json"), report_json(geom.key(), plan, sum.outcomes).dump(2) + "\n",
                   console);
        if (s.count("margins_csv")) write_text(s.at("margins_csv"), detail::margins_csv(sum.outcomes), console);
        return sum.exit_code;
    });
}

/// fit: JSON report plus the fit table.
inline int run_fit(const Settings& s, std::ostream& console, std::ostream& diag) {
    return detail::guarded_with_report(s, "fit_report.json", console, diag, [&] {
        check_known_keys(s);
        const auto geom = required_geometry(s);
        const auto plan = plan_from(s);
        const auto ids = requested_ids(s, true);
        const auto sum = run_estimates(geom, plan, ids, diag);
        write_text(setting(s, "out", "fit_report.json"), report_json(geom.key(), plan, sum.outcomes).dump(2) + "\n",
                   console);
        std::ostringstream csv;
        write_fit_csv_header(csv);
        for (const auto& o : sum.outcomes) {
            if (o.report) write_fit_csv_row(csv, *o.report, plan);
        }
        write_text(setting(s, "fit_csv", "fits.csv"), csv.str(), console);
        return sum.exit_code;
    });
}

/// sharpness: (t, lhs, rhs, ratio) on a logarithmic t grid.
inline int run_sharpness(const Settings& s, std::ostream& console, std::ostream& diag) {
    return detail::guarded(diag, [&] {
        check_known_keys(s);
        const auto geom = parse_geometry(setting(s, "geometry", "euclidean:n=2"));
        const auto plan = plan_from(s);
        const double d = detail::to_double("sharpness.d", setting(s, "sharpness.d", "1"));
        const double t_hi = detail::to_double("sharpness.t_max", setting(s, "sharpness.t_max", "0.1"));
        const double t_lo = detail::to_double("sharpness.t_min", setting(s, "sharpness.t_min", "1e-4"));
        const long points = detail::to_long("sharpness.points", setting(s, "sharpness.points", "13"));
        if (!(t_lo > 0.0 && t_hi > t_lo) || points < 2) fail(ErrorKind::Config, "bad sharpness t range");
        std::vector<double> ts;
        for (long k = 0; k < points; ++k) ts.push_back(t_hi * std::pow(t_lo / t_hi, static_cast<double>(k) / (points - 1)));
        ts.back() = t_lo;
        const auto scan = sharpness_scan(geom, d, plan.delta, ts);
        std::ostringstream csv;
        write_sharpness_csv(csv, scan);
        write_text(setting(s, "out", "sharpness.csv"), csv.str(), console);
        diag << "limit " << format_double(scan.limit) << " final ratio " << format_double(scan.rows.back().ratio)
             << " monotone " << (scan.monotone ? "true" : "false") << '\n';
        return static_cast<int>(kExitPass);
    });
}

/// solve: Crank-Nicolson on a warped surface from the approximate delta,
/// exported as CSV (r, t, u, grad_sq, lap).
inline int run_solve(const Settings& s, std::ostream& console, std::ostream& diag) {
    return detail::guarded(diag, [&] {
        check_known_keys(s);
        const auto geom = parse_geometry(setting(s, "geometry", "warped:f=cigar,Rmax=20"));
        if (geom.kind() != GeometryKind::Warped) fail(ErrorKind::NotApplicable, "solve runs on warped surfaces");
        const auto plan = plan_from(s);
        const double t_end = detail::to_double("solve.t_end", setting(s, "solve.t_end", "1"));
        const long snaps = detail::to_long("solve.snapshots", setting(s, "solve.snapshots", "10"));
        if (!(t_end > plan.initial_time) || snaps < 1) fail(ErrorKind::Config, "bad solve range");
        std::vector<double> times;
        for (long k = 1; k <= snaps; ++k) {
            times.push_back(plan.initial_time + (t_end - plan.initial_time) * static_cast<double>(k) / snaps);
        }
        times.back() = t_end;
        const auto field = warped_kernel_field(geom, plan, times);
        std::ostringstream csv;
        write_field_csv(*field, csv, static_cast<int>(detail::to_long("solve.r_stride", setting(s, "solve.r_stride", "10"))),
                        static_cast<int>(detail::to_long("solve.t_stride", setting(s, "solve.t_stride", "1"))));
        write_text(setting(s, "out", "field.csv"), csv.str(), console);
        const auto& d = field->diagnostics;
        diag << "steps " << field->grid.n_t << " mass drift " << format_double(d.max_mass_drift) << " positivity violations "
             << d.positivity_violations << " max principle " << (d.max_nonincreasing && d.min_nondecreasing ? "ok" : "FAIL")
             << '\n';
        const bool ok = d.positivity_violations == 0 && d.max_nonincreasing && d.min_nondecreasing;
        return static_cast<int>(ok ? kExitPass : kExitMarginFailure);
    });
}

inline int run_command(const std::string& command, const Settings& s, std::ostream& console, std::ostream& diag) {
    if (command == "verify") return run_verify(s, console, diag);
    if (command == "fit") return run_fit(s, console, diag);
    if (command == "sharpness") return run_sharpness(s, console, diag);
    if (command == "solve") return run_solve(s, console, diag);
    diag << "config: unknown command '" << command << "'\n";
    return kExitConfigError;
}

}  // namespace heatcert
