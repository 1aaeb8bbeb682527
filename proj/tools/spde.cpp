// Command-line front end: run, replay, report.
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spde/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stochastic porous-media experiment runner"};
    app.set_version_flag("--version", spde::library_version());
    app.require_subcommand(1);

    std::string config;
    auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", config, "INI-style config file")->required()->check(CLI::ExistingFile);

    std::string manifest;
    std::size_t parallelism = 0;
    auto* replay = app.add_subcommand("replay", "Re-execute a run and compare its output digests");
    replay->add_option("manifest", manifest, "manifest.json of a previous run")->required()->check(CLI::ExistingFile);
    replay->add_option("--parallelism", parallelism, "Override the declared thread count")->check(CLI::PositiveNumber);

    std::string run_dir;
    auto* report = app.add_subcommand("report", "Pretty-print the report of a run directory");
    report->add_option("run-dir", run_dir, "Output directory of a run")->required()->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : spde::exit_config_error;
    }

    if (*run) {
        const auto res = spde::run_config_file(config, std::cerr);
        if (res.exit_code == spde::exit_ok || res.exit_code == spde::exit_checks_failed) {
            std::cout << res.message << "; outputs in " << res.dir.string() << "\n";
        } else {
            std::cerr << "error: " << res.message << "\n";
        }
        return res.exit_code;
    }
    if (*replay) {
        std::optional<std::size_t> par;
        if (parallelism > 0) par = parallelism;
        return spde::replay_manifest(manifest, par, std::cout);
    }
    return spde::print_report(run_dir, std::cout);
}
