#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace spde::detail {

/// Solves a tridiagonal system in place (Thomas algorithm, no pivoting).
/// lower[0] and upper[n-1] are ignored. Returns false if a pivot underflows.
/// Stable for diagonally dominant rows or columns, which covers every
/// Newton Jacobian assembled by the resolvent.
bool solve_tridiagonal(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
                       std::span<double> rhs);

struct CgResult {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

using LinearOp = std::function<void(std::span<const double>, std::span<double>)>;

/// Preconditioned conjugate gradients for an SPD operator; x holds the
/// initial guess on entry.
CgResult pcg(const LinearOp& apply, const LinearOp& precondition, std::span<const double> b, std::span<double> x,
             double rel_tol, std::size_t max_iters);

}  // namespace spde::detail
