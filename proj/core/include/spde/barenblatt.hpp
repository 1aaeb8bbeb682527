#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "spde/geometry.hpp"
#include "spde/stepper.hpp"
#include "spde/verify.hpp"

namespace spde {

/// Self-similar solution of u_t = (u^m)_xx on the line (m > 1), centred at `center`:
///   u(t, x) = t^{-a} (C - k (x - center)^2 t^{-2a})_+^{1/(m-1)},
///   a = 1/(m+1), k = a (m-1) / (2m).
struct BarenblattParams {
    double m = 2.0;
    double C = 0.139;
    double t0 = 0.01;
    double t1 = 0.02;
    double center = 0.5;
};

double barenblatt_value(const BarenblattParams& bp, double t, double x);
/// Half-width of the support at time t.
double barenblatt_radius(const BarenblattParams& bp, double t);
Field barenblatt_profile(const Grid& grid, const BarenblattParams& bp, double t);

/// Relative discrete L^2 error of `numeric` against the profile at bp.t1.
/// Throws InvalidExperiment if the support reaches the boundary by t1.
Report barenblatt_compare(const Field& numeric, const BarenblattParams& bp, double tolerance);

/// Deterministic porous-medium run from the profile at t0 to t1 (mubar = 0,
/// beta = |r|^{m-1} r) followed by barenblatt_compare.
Report run_barenblatt_oracle(const BarenblattParams& bp, std::size_t n, const SimConfig& sim, double tolerance);

/// Dirichlet heat solution on (0,1) from sum_j c_j sqrt(2) sin(k_j pi x),
/// evaluated with the continuum eigenvalues (k pi)^2.
Field heat_exact(const Grid& grid, const std::vector<std::pair<std::size_t, double>>& modes, double t);

/// Relative discrete L^2 error of `numeric` against heat_exact(modes, t).
Report heat_compare(const Field& numeric, const std::vector<std::pair<std::size_t, double>>& modes, double t,
                    double tolerance);

/// Deterministic linear run (beta = r) compared with heat_exact at sim.T.
Report run_heat_oracle(const std::vector<std::pair<std::size_t, double>>& modes, std::size_t n, const SimConfig& sim,
                       double tolerance);

}  // namespace spde
