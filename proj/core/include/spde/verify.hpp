#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spde/geometry.hpp"
#include "spde/stepper.hpp"

namespace spde {

/// (1/p) |x^-|_p^p with x^- = max(-x, 0).
double phi(const Field& x, double p);
double phi(std::span<const double> x, double cell_volume, double p);
/// Derivative -(x^-)^{p-1} as a grid function (pairs with the h^dim-weighted sum).
Field phi_gradient(const Field& x, double p);

/// Spectral filter c_k / (1 + lambda lambda_k^h); lambda = 0 is the identity.
Field mollify(const SpectralBasis& basis, const Field& x, double lambda);

/// Mean and 95% half-width (1.96 sd / sqrt(n)) over paths.
struct MeanCI {
    double mean = 0.0;
    double half_width = 0.0;
};
MeanCI mean_ci(std::span<const double> samples);

/// Per-time ensemble statistics of the recorded functionals.
struct EnsembleStats {
    std::size_t n_paths = 0;
    std::vector<double> times;
    std::vector<MeanCI> hminus_sq, lp_pow, phi, j_integral, drift_integral, energy;
    double min_value = 0.0;  ///< over paths, steps and points
};

/// energy = (1/2)|X|_{-1}^2 + drift_integral, path by path.
EnsembleStats ensemble_stats(const std::vector<Trajectory>& paths);

/// One checked estimate, serialised with a stable schema.
struct Report {
    std::string estimate;
    std::string reference;
    bool pass = false;
    /// Smallest (bound - measured) / bound over the checked times; negative on failure.
    double margin = 0.0;
    nlohmann::json constants = nlohmann::json::object();
    nlohmann::json details = nlohmann::json::object();

    nlohmann::json to_json() const;
};

/// Document holding several reports; pass iff all pass.
nlohmann::json reports_to_json(const std::vector<Report>& reports);

/// (1/2) E|X|^2 + E sum dt <A_eps X, X> <= e^{c1 C t} (1/2)|x0|^2 (1 + delta) where
/// delta is the relative 95% half-width of the left side.
Report energy_report(const EnsembleStats& stats, double x0_hminus_sq, double c1, double c);

/// E sum dt h sum j(Y) against the same envelope.
Report j_integral_report(const EnsembleStats& stats, double x0_hminus_sq, double c1, double c);

/// min over space-time >= -tol_pos and sup_t E phi_p <= phi_tol.
Report positivity_report(const EnsembleStats& stats, double tol_pos, double phi_tol);

/// e^{-gamma t} E|X(t)|_p^p <= R^p with the smallest gamma >= 0 that makes the
/// bound hold for R = 2 |x0|_p + margin_r; passes if everything is finite.
Report lp_growth_report(const EnsembleStats& stats, double x0_lp, double p, double margin_r);

/// Mean squared H^{-1} distance between paired trajectories at each time.
/// Requires snapshots at every step (record_every = 1).
std::vector<MeanCI> paired_distance(const SpectralBasis& basis, const std::vector<Trajectory>& a,
                                    const std::vector<Trajectory>& b);

/// E|X_a - X_b|^2 <= e^{Ct} d0^2 (1 + delta) at every recorded time.
Report contraction_report(const std::vector<double>& times, const std::vector<MeanCI>& distance, double d0_sq,
                          double c_hat, bool identical_data_bitwise);

/// sup_t gaps for consecutive eps halvings; pass iff strictly decreasing. The
/// order is the log2 ratio of consecutive root gaps over the finest pairs.
/// With order_bounds set, the measured order must lie inside them as well.
Report epsilon_convergence_report(const std::vector<double>& eps, const std::vector<double>& sup_gap_sq,
                                  const std::vector<double>* order_bounds = nullptr);

/// Least-squares slope of log gap vs log lambda; pass iff inside [lo, hi].
Report lambda_convergence_report(const std::vector<double>& lambdas, const std::vector<double>& gap_sq, double lo,
                                 double hi);

/// Pass iff d_1 > d_2 > ... (strictly) for the requested window.
Report picard_report(const PicardReport& picard, std::size_t first, std::size_t last);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace spde
