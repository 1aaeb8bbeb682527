#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spde {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid sizes, mismatched grids, malformed configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation (p < 1, lambda <= 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Query of a tabulated nonlinearity outside its table.
class ExtrapolationError : public DomainError {
public:
    ExtrapolationError(double r, double lo, double hi);
    double value() const noexcept { return value_; }

private:
    double value_;
};

/// NaN or Inf produced inside an iteration.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// An iterative solver gave up. Carries the last residual it reached.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual, std::size_t iterations);
    double residual() const noexcept { return residual_; }
    std::size_t iterations() const noexcept { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

/// Time stepping failed; wraps the underlying error with the step index.
class StepError : public Error {
public:
    StepError(const std::string& what, std::size_t step);
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// A verification experiment whose preconditions do not hold
/// (e.g. Barenblatt support reaching the boundary).
class InvalidExperiment : public Error {
public:
    using Error::Error;
};

}  // namespace spde
