#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatcert/error.hpp"
#include "heatcert/estimates.hpp"
#include "heatcert/plan.hpp"

namespace heatcert {

inline constexpr const char* kArtifactVersion = "1.0.0";

/// One requested estimate: a report, or the error that stopped it.
struct EstimateOutcome {
    std::string estimate_id;
    std::optional<EstimateReport> report;
    std::optional<ErrorKind> error_kind;
    std::string error_message;

    bool passed() const { return report && report->pass; }
};

inline std::string plan_hash(const SamplingPlan& plan) { return hex64(fnv1a64(plan.canonical())); }

namespace detail {

// Non-finite values have no JSON spelling; they become null.
inline nlohmann::ordered_json json_number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const EstimateOutcome& o) {
    nlohmann::ordered_json j;
    j["estimate_id"] = o.estimate_id;
    if (!o.report) {
        j["worst_margin"] = nullptr;
        j["argmin"] = nullptr;
        j["samples"] = 0;
        j["tolerance_floor"] = nullptr;
        j["pass"] = false;
        j["error"] = {{"kind", std::string(to_string(*o.error_kind))}, {"message", o.error_message}};
        return j;
    }
    const auto& r = *o.report;
    j["worst_margin"] = detail::json_number(r.worst_margin);
    nlohmann::ordered_json coords = nlohmann::ordered_json::array();
    for (double c : r.argmin.coords) coords.push_back(detail::json_number(c));
    j["argmin"] = {{"coords", coords}, {"t", detail::json_number(r.argmin.t)}};
    if (r.fitted_constant) j["fitted_constant"] = detail::json_number(*r.fitted_constant);
    j["samples"] = r.samples;
    j["tolerance_floor"] = detail::json_number(r.tolerance_floor);
    j["pass"] = r.pass;
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.metrics) metrics[k] = detail::json_number(v);
    j["metrics"] = metrics;
    nlohmann::ordered_json labels = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.labels) labels[k] = v;
    j["labels"] = labels;
    return j;
}

inline nlohmann::ordered_json report_json(const std::string& geometry, const SamplingPlan& plan,
                                          const std::vector<EstimateOutcome>& outcomes) {
    nlohmann::ordered_json j;
    j["artifact_version"] = kArtifactVersion;
    j["geometry"] = geometry;
    j["plan_hash"] = plan_hash(plan);
    j["results"] = nlohmann::ordered_json::array();
    for (const auto& o : outcomes) j["results"].push_back(to_json(o));
    return j;
}

inline std::string format_double(double v) {
    if (!std::isfinite(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_fit_csv_header(std::ostream& os) {
    os << "constant,estimate_id,geometry,fitted,fitted_1x,fitted_2x,binding_coords,binding_t,plan_hash\n";
}

inline std::string fit_constant_name(const std::string& id) {
    if (id == "thm2.1-fit" || id == "thm2.4-fit") return "C(n)";
    if (id == "eq1.2-fit") return "C(n;K)";
    if (id == "liyau-fit") return "C1";
    if (id == "doubling") return "C2";
    if (id == "cutoff-fit") return "C3";
    if (id == "thm1.3") return "C";
    return id;
}

inline void write_fit_csv_row(std::ostream& os, const EstimateReport& r, const SamplingPlan& plan) {
    auto metric = [&](const char* k) {
        const auto it = r.metrics.find(k);
        return it == r.metrics.end() ? std::string() : format_double(it->second);
    };
    std::string coords;
    for (std::size_t k = 0; k < r.argmin.coords.size(); ++k) {
        if (k) coords += ' ';
        coords += format_double(r.argmin.coords[k]);
    }
    os << fit_constant_name(r.estimate_id) << ',' << r.estimate_id << ",\"" << r.geometry << "\","
       << (r.fitted_constant ? format_double(*r.fitted_constant) : std::string()) << ',' << metric("fitted_1x") << ','
       << metric("fitted_2x") << ',' << coords << ',' << format_double(r.argmin.t) << ',' << plan_hash(plan) << '\n';
}

inline void write_sharpness_csv(std::ostream& os, const SharpnessScan& scan) {
    os << "t,lhs,rhs,ratio\n";
    for (const auto& row : scan.rows) {
        os << format_double(row.t) << ',' << format_double(row.lhs) << ',' << format_double(row.rhs) << ','
           << format_double(row.ratio) << '\n';
    }
}

}  // namespace heatcert
