#pragma once

#include <cstddef>
#include <optional>

#include "spde/geometry.hpp"
#include "spde/nonlinearity.hpp"

namespace spde {

/// Unknown used by the Newton iteration for y - eps Delta_h beta(y) = x.
///
/// `primal` iterates on y with Jacobian I - eps Delta_h diag(beta'(y)); it is
/// always nonsingular and handles degenerate beta. `flux` iterates on
/// w = beta(y), where the Jacobian diag(1/beta'(y)) - eps Delta_h is symmetric
/// positive definite; it needs beta strictly increasing.
enum class ResolventForm { automatic, primal, flux };

struct ResolventConfig {
    double epsilon = 0.1;
    /// Absolute H^{-1} residual target; defaults to 1e-10 |x|_{-1} + 1e-14.
    std::optional<double> newton_tol;
    std::size_t max_iters = 100;
    /// Extra Newton steps once the target is met; quadratic convergence takes
    /// the residual to round-off, which keeps nearby solves consistent.
    std::size_t polish_steps = 1;
    /// Smallest damping factor tried by the backtracking line search.
    double min_step = 0x1p-40;
    ResolventForm form = ResolventForm::automatic;
    /// Retry through eps -> 2 eps -> eps when Newton stalls.
    std::size_t continuation_levels = 3;
};

struct ResolventSolution {
    Field y;      ///< J_eps(x)
    Field a_eps;  ///< A_eps(x) = (x - y) / eps
    std::size_t iterations = 0;
    double residual = 0.0;  ///< |y - eps Delta_h beta(y) - x|_{-1}
    ResolventForm form = ResolventForm::primal;
    bool used_continuation = false;
};

/// Solves y - eps Delta_h beta(y) = x. Newton starts from `guess` (default x).
///
/// Throws SolverError carrying the last residual if every damping and
/// continuation attempt fails, NumericalError on non-finite iterates.
ResolventSolution resolvent_solve(const Field& x, const ResolventConfig& cfg, const Nonlinearity& nl,
                                  const SpectralBasis& basis);
ResolventSolution resolvent_solve(const Field& x, const ResolventConfig& cfg, const Nonlinearity& nl,
                                  const SpectralBasis& basis, const Field& guess);

/// Yosida approximation A_eps(x) = (x - J_eps(x)) / eps.
Field yosida_apply(const Field& x, const ResolventConfig& cfg, const Nonlinearity& nl, const SpectralBasis& basis);

/// <A_eps x - A_eps xbar, x - xbar>_{-1}; nonnegative for monotone beta.
double resolvent_monotone_gap(const Field& x, const Field& xbar, const ResolventConfig& cfg, const Nonlinearity& nl,
                              const SpectralBasis& basis);

/// Resolved default tolerance for a right-hand side of the given H^{-1} norm.
double default_newton_tol(double x_hminus_norm);

}  // namespace spde
