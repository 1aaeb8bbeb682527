#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spde/geometry.hpp"
#include "spde/noise.hpp"
#include "spde/nonlinearity.hpp"
#include "spde/resolvent.hpp"

namespace spde {

enum class Scheme { semi_implicit_yosida, mild_exponential };

/// How the implicit step X + dt A_eps(X) = b is solved.
///
/// fixed_point iterates X <- (b + (dt/eps) J_eps(X)) / (1 + dt/eps), a
/// contraction with factor rho = (dt/eps)/(1 + dt/eps). resolvent_identity
/// uses the exact one-shot solution X = (eps b + dt J_{eps+dt}(b)) / (eps + dt),
/// which is the only practical choice when eps << dt.
enum class InnerSolve { fixed_point, resolvent_identity };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);
std::string to_string(InnerSolve s);
InnerSolve inner_solve_from_string(const std::string& s);

struct SimConfig {
    double T = 0.1;
    double dt = 1e-3;
    /// Yosida parameter; unset means max(dt, 1e-3).
    std::optional<double> epsilon;
    Scheme scheme = Scheme::semi_implicit_yosida;
    InnerSolve inner = InnerSolve::fixed_point;
    /// Snapshot stride in steps; 0 keeps no snapshots.
    std::size_t record_every = 0;
    /// Exponent for |X|_p^p and phi_p.
    double p = 4.0;
    /// When set, phi_p of the spectrally mollified state is recorded as well.
    std::optional<double> mollify_lambda;
    /// Fixed-point stopping rule: H^{-1} update < inner_tol (1 + |b|_{-1}).
    double inner_tol = 1e-11;
    std::size_t max_inner_iters = 2000;
    /// Newton settings; epsilon is overwritten per solve.
    ResolventConfig resolvent{};

    double eps() const { return epsilon.value_or(dt > 1e-3 ? dt : 1e-3); }
    /// Number of steps; T must be an integer multiple of dt.
    std::size_t n_steps() const;
    /// rho = (dt/eps) / (1 + dt/eps).
    double contraction_factor() const;
    void validate() const;
};

/// Functionals after step n (index 0 is the initial state).
struct StepFunctionals {
    double time = 0.0;
    double hminus_sq = 0.0;     ///< |X|_{-1}^2
    double lp_pow = 0.0;        ///< |X|_p^p
    double phi = 0.0;           ///< (1/p) |X^-|_p^p
    double phi_mollified = 0.0; ///< phi of the mollified state, if enabled
    double j_step = 0.0;        ///< h^dim sum_i j(Y_i), Y = J_eps(X)
    double j_integral = 0.0;    ///< sum over steps 1..n of dt * j_step
    double drift = 0.0;         ///< <A_eps X, X>_{-1}
    double drift_integral = 0.0;///< sum over steps 1..n of dt * drift
    double min_value = 0.0;     ///< min_i X_i
    std::size_t inner_iterations = 0;
};

struct Trajectory {
    std::uint64_t path_index = 0;
    double dt = 0.0;
    std::vector<StepFunctionals> steps;  ///< n_steps + 1 entries
    std::vector<std::size_t> snapshot_steps;
    std::vector<Field> snapshots;
    std::optional<Field> final_state;

    std::vector<double> times() const;
    double min_value() const;
};

/// Result of one implicit step.
struct StepResult {
    Field x;  ///< X_{n+1}
    Field y;  ///< J_eps(X_{n+1})
    std::size_t inner_iterations = 0;
    double rho = 0.0;
};

/// X_{n+1} + dt A_eps(X_{n+1}) = X_n + sigma(X_n) dW.
StepResult step_semi_implicit(const Field& xn, std::span<const double> dw, const SimConfig& cfg,
                              const Nonlinearity& nl, const NoiseModel& nm, const SpectralBasis& basis);

/// X_{n+1} + dt A_eps(X_{n+1}) = b. `y_guess` warm-starts the inner resolvent solves.
StepResult solve_implicit(const Field& b, const SimConfig& cfg, const Nonlinearity& nl, const SpectralBasis& basis,
                          const Field* y_guess = nullptr);

/// Called after every step with (step index, time, X, J_eps X).
using StepObserver = std::function<void(std::size_t, double, const Field&, const Field&)>;

/// One path with increments drawn from (nm.seed(), path_index).
Trajectory simulate_path(const Field& x0, const SimConfig& cfg, const Nonlinearity& nl, const NoiseModel& nm,
                         const SpectralBasis& basis, std::uint64_t path_index, const StepObserver& observer = {});

/// Same, driven by a stored path. Its keys must match nm and cfg.
Trajectory simulate_path(const Field& x0, const SimConfig& cfg, const Nonlinearity& nl, const NoiseModel& nm,
                         const SpectralBasis& basis, const NoisePath& path, const StepObserver& observer = {});

/// simulate_path with beta replaced by beta + lambda r; lambda = 0 runs simulate_path itself.
Trajectory simulate_regularized(const Field& x0, double lambda, const SimConfig& cfg, const Nonlinearity& nl,
                                const NoiseModel& nm, const SpectralBasis& basis, std::uint64_t path_index,
                                const StepObserver& observer = {});

/// Runs paths first_path .. first_path + n_paths - 1 on `parallelism` threads.
/// Output order is by path index whatever the thread count.
std::vector<Trajectory> run_ensemble(const Field& x0, const SimConfig& cfg, const Nonlinearity& nl,
                                     const NoiseModel& nm, const SpectralBasis& basis, std::size_t n_paths,
                                     std::size_t parallelism, std::uint64_t first_path = 0);

/// Applies fn(i) for i in [0, n) on up to `parallelism` threads. The first
/// exception thrown (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t parallelism, const std::function<void(std::size_t)>& fn);

struct PicardReport {
    std::size_t n_paths = 0;
    std::size_t n_outer = 0;
    /// d[i] = sup_t mean |X^{(i+1)}(t) - X^{(i)}(t)|_{-1}^2, i = 0 .. n_outer-1.
    std::vector<double> d;
    /// d[i+1] / d[i].
    std::vector<double> ratios;
    /// Geometric mean of the ratios.
    double geometric_ratio = 0.0;
};

/// Frozen-noise outer iteration X -> X*, where X* solves
/// dX* + A_eps X* dt = sigma(X) dW on the given paths, starting from X^{(0)}(t) = x0.
PicardReport picard_construct(const Field& x0, const std::vector<NoisePath>& paths, std::size_t n_outer,
                              const SimConfig& cfg, const Nonlinearity& nl, const NoiseModel& nm,
                              const SpectralBasis& basis, std::size_t parallelism = 1);

}  // namespace spde
