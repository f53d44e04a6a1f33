#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace heatcert {

enum class ErrorKind {
    Domain,              // argument outside the operation's domain (t <= 0, r <= 0, ...)
    DomainMismatch,      // points/charts from different geometries
    Truncation,          // series budget or chart range exceeded
    NotApplicable,       // operation undefined for this geometry kind
    CurvatureViolation,  // warp rejected for K = 0 estimates
    Hypothesis,          // estimate hypothesis not met (e.g. K > 0 for the Laplacian estimate)
    Precondition,        // caller-supplied constant fails a stated precondition
    DataIntegrity,       // sampled data contradicts a structural invariant (u > A)
    DegenerateWarp,      // f(r_i) = 0 away from the pole
    Solver,              // linear solve failure
    Config,              // CLI / configuration error
    Unsupported          // valid request that this implementation does not cover
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Domain: return "domain";
        case ErrorKind::DomainMismatch: return "domain-mismatch";
        case ErrorKind::Truncation: return "truncation";
        case ErrorKind::NotApplicable: return "not-applicable";
        case ErrorKind::CurvatureViolation: return "curvature-violation";
        case ErrorKind::Hypothesis: return "hypothesis-violation";
        case ErrorKind::Precondition: return "precondition";
        case ErrorKind::DataIntegrity: return "data-integrity";
        case ErrorKind::DegenerateWarp: return "degenerate-warp";
        case ErrorKind::Solver: return "solver";
        case ErrorKind::Config: return "config";
        case ErrorKind::Unsupported: return "unsupported";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace heatcert
