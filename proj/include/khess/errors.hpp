#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace khess {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    /// Short machine-readable tag used in JSON reports.
    virtual const char* kind() const noexcept { return "error"; }
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "domain_error"; }
};

/// A root search was started on an interval without a sign change.
class BracketError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "bracket_error"; }
};

/// Input too large for a brute-force routine.
class ScaleError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "scale_error"; }
};

/// Adaptive ODE step control gave up.
class StiffnessError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "stiffness_error"; }
};

/// Malformed input file or spec string. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0) : Error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }
    const char* kind() const noexcept override { return "parse_error"; }

private:
    std::size_t line_;
};

/// Iterative eigensolver failed; carries the best iterate it reached.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double value, std::vector<double> vector, double residual)
        : Error(what), best_value(value), best_vector(std::move(vector)), best_residual(residual) {}
    const char* kind() const noexcept override { return "convergence_error"; }

    double best_value;
    std::vector<double> best_vector;
    double best_residual;
};

}  // namespace khess
