#pragma once

#include <stdexcept>
#include <string>

namespace jdisc {

/// Failure taxonomy. Mathematical hypothesis failures (orientation,
/// hypothesis_violation) are expected outcomes for some inputs and are
/// reported separately from numerical failures by the CLI.
enum class ErrorKind {
    invalid_argument,
    evaluation,
    out_of_domain,
    not_a_structure,
    non_generic_position,
    inadmissible,
    singular_pullback,
    boundary_zero,
    not_generalized_analytic,
    hypothesis_violation,
    root_finding,
    degenerate_fit,
    undefined_phase,
    no_convergence,
    ellipticity,
    degenerate_jacobian,
    orientation,
    io
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::invalid_argument: return "invalid-argument";
        case ErrorKind::evaluation: return "evaluation";
        case ErrorKind::out_of_domain: return "out-of-domain";
        case ErrorKind::not_a_structure: return "not-a-structure";
        case ErrorKind::non_generic_position: return "non-generic-position";
        case ErrorKind::inadmissible: return "inadmissible";
        case ErrorKind::singular_pullback: return "singular-pullback";
        case ErrorKind::boundary_zero: return "boundary-zero";
        case ErrorKind::not_generalized_analytic: return "not-generalized-analytic";
        case ErrorKind::hypothesis_violation: return "hypothesis-violation";
        case ErrorKind::root_finding: return "root-finding";
        case ErrorKind::degenerate_fit: return "degenerate-fit";
        case ErrorKind::undefined_phase: return "undefined-phase";
        case ErrorKind::no_convergence: return "no-convergence";
        case ErrorKind::ellipticity: return "ellipticity";
        case ErrorKind::degenerate_jacobian: return "degenerate-jacobian";
        case ErrorKind::orientation: return "orientation";
        case ErrorKind::io: return "io";
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

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) fail(kind, what);
}

} // namespace jdisc
