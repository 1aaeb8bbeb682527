#include "spde/error.hpp"

#include <sstream>

namespace spde {

namespace {

std::string describe_extrapolation(double r, double lo, double hi) {
    std::ostringstream os;
    os << "nonlinearity table queried at r = " << r << " outside [" << lo << ", " << hi << "]";
    return os.str();
}

}  // namespace

ExtrapolationError::ExtrapolationError(double r, double lo, double hi)
    : DomainError(describe_extrapolation(r, lo, hi)), value_(r) {}

SolverError::SolverError(const std::string& what, double residual, std::size_t iterations)
    : Error(what + " (residual " + std::to_string(residual) + " after " +
            std::to_string(iterations) + " iterations)"),
      residual_(residual),
      iterations_(iterations) {}

StepError::StepError(const std::string& what, std::size_t step)
    : Error("step " + std::to_string(step) + ": " + what), step_(step) {}

}  // namespace spde
