#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "spde/barenblatt.hpp"
#include "spde/geometry.hpp"
#include "spde/noise.hpp"
#include "spde/nonlinearity.hpp"
#include "spde/stepper.hpp"

namespace spde {

enum class ExperimentKind {
    simulate,
    verify_positivity,
    verify_energy,
    verify_contraction,
    converge_eps,
    converge_lambda,
    picard,
    barenblatt,
};

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

/// Everything that determines a run. Parsed from an INI-style file:
///
///   [grid]        n, dim
///   [basis]       K
///   [nonlinearity] kind, m, a, lambda_reg, table, alpha
///   [noise]       mubar, s, K_noise, seed
///   [sim]         T, dt, epsilon, scheme, inner, record_every, p, mollify_lambda
///   [initial]     kind (bump|sine|barenblatt|zero), amplitude, center, width, modes, C, t0
///   [ensemble]    n_paths, parallelism
///   [experiment]  kind, eps_list, lambda_list, n_outer, tol_pos, tol_phi, perturbation, order_min, order_max, oracle_tolerance
///   [output]      dir, export_noise
struct ExperimentConfig {
    int dim = 1;
    std::size_t n = 255;
    std::size_t K = 64;

    BetaKind beta_kind = BetaKind::power_law;
    double m = 2.0;
    double a = 0.0;
    double lambda_reg = 0.0;
    std::string table_file;
    std::optional<std::array<double, 4>> alpha;

    double mubar = 0.5;
    double s = 1.5;
    std::size_t K_noise = 32;
    std::uint64_t seed = 1;

    SimConfig sim;

    std::string initial = "bump";
    double amplitude = 1.0;
    double center = 0.5;
    double width = 0.25;
    std::vector<std::pair<std::size_t, double>> modes{{1, 1.0}};
    double barenblatt_C = 0.139;
    double barenblatt_t0 = 0.01;

    std::size_t n_paths = 10;
    std::size_t parallelism = 1;

    ExperimentKind kind = ExperimentKind::simulate;
    std::vector<double> eps_list{0.1, 0.05, 0.025, 0.0125, 0.00625};
    std::vector<double> lambda_list{0.4, 0.2, 0.1, 0.05};
    std::size_t n_outer = 5;
    double tol_pos = 1e-8;   ///< relative to |x0|_inf
    double tol_phi = 1e-12;  ///< relative to |x0|_p^p
    double perturbation = 0.1;
    double order_min = 0.8;
    double order_max = 1.2;
    double oracle_tolerance = 0.02;

    std::string output_dir = "spde-out";
    bool export_noise = false;

    void validate() const;
};

/// Parses configuration text. Errors name `source` and the offending line.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& file);

/// Canonical INI text; parse_config(to_ini(c)) reproduces c exactly.
std::string to_ini(const ExperimentConfig& cfg);
nlohmann::json to_json(const ExperimentConfig& cfg);
/// Inverse of to_json; goes through the same validation as parse_config.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

// Objects built from a config.
Grid make_grid(const ExperimentConfig& cfg);
Nonlinearity make_nonlinearity(const ExperimentConfig& cfg, const std::filesystem::path& base_dir = {});
Field make_initial(const ExperimentConfig& cfg, const Grid& grid);
BarenblattParams make_barenblatt(const ExperimentConfig& cfg);

}  // namespace spde
