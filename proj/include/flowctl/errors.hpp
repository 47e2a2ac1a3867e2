#pragma once

#include <stdexcept>
#include <string>

namespace flowctl {

// Error taxonomy. The CLI maps these onto exit codes, so library code should
// always throw one of the three subclasses, never a bare std::runtime_error.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// malformed input: config files, expressions, bad CLI values
struct config_error : error {
    using error::error;
};

// well-formed input that fails a mathematical precondition
// (not a saddle, empty mappability window, coverage shortfall, ...)
struct validation_error : error {
    using error::error;
};

// runtime numerics: escape from the domain, step-budget exhaustion,
// non-finite values, quadrature failure
struct numerical_error : error {
    using error::error;
};

// Trajectory left the integration domain. Carries the exit time and the last
// in-domain state so callers (e.g. flow maps) can freeze instead of aborting.
struct escape_error : numerical_error {
    double t_exit;
    double x_exit, y_exit;
    escape_error(const std::string& msg, double t, double x, double y)
        : numerical_error(msg), t_exit(t), x_exit(x), y_exit(y) {}
};

} // namespace flowctl
