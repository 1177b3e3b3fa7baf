#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace schrolab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on the inputs was violated (bad grid, mass escaping the
/// window, unsupported dimension, ...). Carries the offending measured value
/// when there is one.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what, double measured = 0.0)
        : Error(what), measured_(measured) {}
    double measured() const noexcept { return measured_; }

private:
    double measured_;
};

/// A computation ran but its result cannot be trusted (mass defect above
/// threshold, non-finite values).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Iterative proportional fitting did not reach its tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::vector<double> residual_trace)
        : Error(what), trace_(std::move(residual_trace)) {}
    const std::vector<double>& residual_trace() const noexcept { return trace_; }

private:
    std::vector<double> trace_;
};

/// A flow-map trajectory left the grid window.
class GridExitError : public NumericalError {
public:
    GridExitError(const std::string& what, double exit_time)
        : NumericalError(what), exit_time_(exit_time) {}
    double exit_time() const noexcept { return exit_time_; }

private:
    double exit_time_;
};

/// Malformed experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace schrolab
