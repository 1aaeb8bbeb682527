#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "spde/config.hpp"
#include "spde/stepper.hpp"

namespace spde {

/// Process exit statuses of the runner.
enum ExitCode : int {
    exit_ok = 0,
    exit_checks_failed = 1,
    exit_config_error = 2,
    exit_simulation_error = 3,
    exit_replay_mismatch = 4,
};

/// Library version baked in at build time.
std::string library_version();

struct RunResult {
    int exit_code = exit_ok;
    std::filesystem::path dir;
    std::string message;
};

/// Runs one experiment into `out_dir`, writing manifest.json, functionals.csv,
/// optional snapshots/ and noise/, and report.json for checking experiments.
/// Relative table paths resolve against `config_dir`. Never throws for
/// configuration or simulation failures; those become the exit code.
RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                         const std::filesystem::path& config_dir, std::ostream& log);

/// Loads a config file and runs it. SPDE_OUTPUT_DIR, when set, replaces [output] dir.
RunResult run_config_file(const std::filesystem::path& config, std::ostream& log);

/// Re-executes the run described by a manifest in a scratch directory and
/// compares every recorded output digest. Names the first differing file.
int replay_manifest(const std::filesystem::path& manifest, std::optional<std::size_t> parallelism, std::ostream& log);

/// Pretty-prints report.json (or the manifest status if there is none).
int print_report(const std::filesystem::path& run_dir, std::ostream& out);

/// Hex SHA-256 of a file.
std::string sha256_file(const std::filesystem::path& file);

/// CSV with columns time,path_index,hminus_sq,lp_p,phi_p,j_integral; one row
/// per path and step, path-major.
void write_functionals_csv(const std::filesystem::path& file, const std::vector<Trajectory>& paths);

/// Binary snapshots, all little-endian:
///   char[8] "SPDESNAP", u32 version (=1), u32 dim, u64 n, f64 dt, u64 record_every,
///   then frames of n^dim f64 values (interior points, row-major).
void write_snapshots(const std::filesystem::path& file, const Trajectory& tr, const Grid& grid,
                     std::size_t record_every);

struct SnapshotFile {
    int dim = 1;
    std::size_t n = 0;
    double dt = 0.0;
    std::size_t record_every = 0;
    std::vector<std::vector<double>> frames;
};
SnapshotFile read_snapshots(const std::filesystem::path& file);

}  // namespace spde
