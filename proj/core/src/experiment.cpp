#include "spde/experiment.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <limits>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>

#include <unistd.h>

#include "binio.hpp"
#include "spde/barenblatt.hpp"
#include "spde/error.hpp"
#include "spde/hminus.hpp"
#include "spde/noise.hpp"
#include "spde/verify.hpp"

#ifndef SPDE_VERSION_STRING
#define SPDE_VERSION_STRING "0.0.0"
#endif

namespace spde {

namespace fs = std::filesystem;

namespace {

constexpr char kSnapMagic[8] = {'S', 'P', 'D', 'E', 'S', 'N', 'A', 'P'};
constexpr std::uint32_t kSnapVersion = 1;

void append_double(std::string& out, double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, p);
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + file.string() + " for writing");
    os << text;
    if (!os) throw Error("write failed: " + file.string());
}

bool is_linear(const ExperimentConfig& cfg) {
    return cfg.beta_kind != BetaKind::table && cfg.m == 1.0;
}

// Everything a run needs, built once from the config.
struct Setup {
    Setup(const ExperimentConfig& c, const fs::path& config_dir)
        : cfg(c),
          grid(make_grid(c)),
          basis(grid, c.K),
          nl(make_nonlinearity(c, config_dir)),
          noise(default_mu(basis, c.mubar, c.s, c.K_noise, c.seed)),
          x0(make_initial(c, grid)) {}

    const ExperimentConfig& cfg;
    Grid grid;
    SpectralBasis basis;
    Nonlinearity nl;
    NoiseModel noise;
    Field x0;
};

std::vector<Trajectory> ensemble(const Setup& s, const SimConfig& sim, const Field& x0) {
    return run_ensemble(x0, sim, s.nl, s.noise, s.basis, s.cfg.n_paths, s.cfg.parallelism);
}

double sup_mean(const std::vector<MeanCI>& v) {
    double m = 0.0;
    for (const auto& x : v) m = std::max(m, x.mean);
    return m;
}

std::vector<Report> contraction_reports(const Setup& s, double c_hat) {
    SimConfig sim = s.cfg.sim;
    sim.record_every = 1;
    Field xb = s.x0;
    xb *= 1.0 + s.cfg.perturbation;
    const auto a = ensemble(s, sim, s.x0);
    const auto b = ensemble(s, sim, xb);
    const auto dist = paired_distance(s.basis, a, b);

    // Same data, same path: the runs must agree bit for bit.
    bool identical = true;
    const std::size_t n_check = std::min<std::size_t>(s.cfg.n_paths, 3);
    for (std::size_t i = 0; i < n_check && identical; ++i) {
        const Trajectory again = simulate_path(s.x0, sim, s.nl, s.noise, s.basis, a[i].path_index);
        for (std::size_t t = 0; t < again.snapshots.size(); ++t) {
            const auto u = again.snapshots[t].values();
            const auto v = a[i].snapshots[t].values();
            if (!std::equal(u.begin(), u.end(), v.begin(), v.end(),
                            [](double p, double q) { return std::bit_cast<std::uint64_t>(p) == std::bit_cast<std::uint64_t>(q); })) {
                identical = false;
                break;
            }
        }
    }
    std::vector<double> times;
    for (std::size_t st : a.front().snapshot_steps) times.push_back(static_cast<double>(st) * sim.dt);
    const double d0 = hminus_norm_sq(s.basis, xb - s.x0);
    return {contraction_report(times, dist, d0, c_hat, identical)};
}

std::vector<Report> epsilon_reports(const Setup& s) {
    std::vector<double> gaps;
    std::vector<Trajectory> prev;
    for (double eps : s.cfg.eps_list) {
        SimConfig sim = s.cfg.sim;
        sim.epsilon = eps;
        sim.record_every = 1;
        auto cur = ensemble(s, sim, s.x0);
        if (!prev.empty()) gaps.push_back(sup_mean(paired_distance(s.basis, prev, cur)));
        prev = std::move(cur);
    }
    if (is_linear(s.cfg)) {
        const std::vector<double> bounds{s.cfg.order_min, s.cfg.order_max};
        return {epsilon_convergence_report(s.cfg.eps_list, gaps, &bounds)};
    }
    return {epsilon_convergence_report(s.cfg.eps_list, gaps)};
}

std::vector<Report> lambda_reports(const Setup& s, const std::vector<Trajectory>& base) {
    std::vector<double> gaps;
    for (double lambda : s.cfg.lambda_list) {
        std::vector<double> d(s.cfg.n_paths);
        parallel_for(s.cfg.n_paths, s.cfg.parallelism, [&](std::size_t i) {
            const Trajectory t =
                simulate_regularized(s.x0, lambda, s.cfg.sim, s.nl, s.noise, s.basis, base[i].path_index);
            d[i] = hminus_norm_sq(s.basis, *t.final_state - *base[i].final_state);
        });
        gaps.push_back(mean_ci(d).mean);
    }
    return {lambda_convergence_report(s.cfg.lambda_list, gaps, 1.5, 2.5)};
}

std::vector<Report> picard_reports(const Setup& s) {
    std::vector<NoisePath> paths;
    const std::size_t n_steps = s.cfg.sim.n_steps();
    for (std::size_t i = 0; i < s.cfg.n_paths; ++i) paths.push_back(generate_path(s.noise, i, s.cfg.sim.dt, n_steps));
    const PicardReport pr =
        picard_construct(s.x0, paths, s.cfg.n_outer, s.cfg.sim, s.nl, s.noise, s.basis, s.cfg.parallelism);
    return {picard_report(pr, 1, std::min<std::size_t>(4, s.cfg.n_outer - 1))};
}

std::vector<Report> oracle_reports(const Setup& s, const std::vector<Trajectory>& base) {
    const Field& final = *base.front().final_state;
    if (s.cfg.m > 1.0) return {barenblatt_compare(final, make_barenblatt(s.cfg), s.cfg.oracle_tolerance)};
    return {heat_compare(final, s.cfg.modes, s.cfg.sim.T, s.cfg.oracle_tolerance)};
}

nlohmann::json measured_constants(const Setup& s, double c1) {
    nlohmann::json j = {
        {"c1", c1},
        {"C", s.noise.summability_constant()},
        {"c1_C", c1 * s.noise.summability_constant()},
        {"noise_tail_fraction", s.noise.tail_fraction()},
        {"inner_contraction_rho", s.cfg.sim.contraction_factor()},
        {"x0_hminus_sq", hminus_norm_sq(s.basis, s.x0)},
    };
    if (!s.noise.warning().empty()) j["noise_warning"] = s.noise.warning();
    return j;
}

void write_manifest(const fs::path& dir, const ExperimentConfig& cfg, const nlohmann::json& constants,
                    const std::string& status, const std::string& error, std::optional<bool> passed) {
    nlohmann::json outputs = nlohmann::json::object();
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) outputs[fs::relative(f, dir).generic_string()] = sha256_file(f);
    nlohmann::json m = {
        {"library_version", library_version()},
        {"config", to_json(cfg)},
        {"constants", constants},
        {"outputs", outputs},
        {"status", status},
    };
    if (!error.empty()) m["error"] = error;
    if (passed) m["checks_passed"] = *passed;
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

fs::path scratch_dir() {
    static std::atomic<unsigned> counter{0};
    const fs::path base = fs::temp_directory_path();
    for (;;) {
        fs::path p = base / ("spde-replay-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        if (fs::create_directory(p)) return p;
    }
}

// First line where two text files differ (1-based), or 0.
std::size_t first_diff_line(const fs::path& a, const fs::path& b) {
    std::ifstream fa(a), fb(b);
    std::string la, lb;
    for (std::size_t line = 1;; ++line) {
        const bool ga = static_cast<bool>(std::getline(fa, la));
        const bool gb = static_cast<bool>(std::getline(fb, lb));
        if (!ga && !gb) return 0;
        if (ga != gb || la != lb) return line;
    }
}

}  // namespace

std::string library_version() { return SPDE_VERSION_STRING; }

std::string sha256_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error("cannot read " + file.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

void write_functionals_csv(const fs::path& file, const std::vector<Trajectory>& paths) {
    std::string out = "time,path_index,hminus_sq,lp_p,phi_p,j_integral\n";
    for (const auto& tr : paths) {
        const std::string idx = std::to_string(tr.path_index);
        for (const auto& f : tr.steps) {
            append_double(out, f.time);
            out += ',';
            out += idx;
            out += ',';
            append_double(out, f.hminus_sq);
            out += ',';
            append_double(out, f.lp_pow);
            out += ',';
            append_double(out, f.phi);
            out += ',';
            append_double(out, f.j_integral);
            out += '\n';
        }
    }
    write_text(file, out);
}

void write_snapshots(const fs::path& file, const Trajectory& tr, const Grid& grid, std::size_t record_every) {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + file.string() + " for writing");
    os.write(kSnapMagic, sizeof kSnapMagic);
    detail::put<std::uint32_t>(os, kSnapVersion);
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(grid.dim()));
    detail::put<std::uint64_t>(os, grid.n());
    detail::put<double>(os, tr.dt);
    detail::put<std::uint64_t>(os, record_every);
    for (const auto& f : tr.snapshots) {
        if (!(f.grid() == grid)) throw ConfigError("snapshot grid differs from the file header");
        detail::put_doubles(os, f.values());
    }
    if (!os) throw Error("write failed: " + file.string());
}

SnapshotFile read_snapshots(const fs::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw ConfigError("cannot open " + file.string());
    char magic[8];
    if (!is.read(magic, sizeof magic) || !std::equal(magic, magic + 8, kSnapMagic))
        throw ConfigError(file.string() + ": not a snapshot file");
    if (detail::get<std::uint32_t>(is, "version") != kSnapVersion) throw ConfigError(file.string() + ": unsupported version");
    SnapshotFile s;
    s.dim = static_cast<int>(detail::get<std::uint32_t>(is, "dim"));
    s.n = detail::get<std::uint64_t>(is, "n");
    s.dt = detail::get<double>(is, "dt");
    s.record_every = detail::get<std::uint64_t>(is, "record_every");
    const Grid grid(s.dim, s.n);
    while (is.peek() != std::char_traits<char>::eof()) {
        std::vector<double> frame(grid.size());
        detail::get_doubles(is, frame, "frame");
        s.frames.push_back(std::move(frame));
    }
    return s;
}

RunResult run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, const fs::path& config_dir,
                         std::ostream& log) {
    RunResult res;
    res.dir = out_dir;
    try {
        cfg.validate();
        fs::create_directories(out_dir);
    } catch (const Error& e) {
        res.exit_code = exit_config_error;
        res.message = e.what();
        return res;
    } catch (const fs::filesystem_error& e) {
        res.exit_code = exit_config_error;
        res.message = e.what();
        return res;
    }
    // Stale outputs from an earlier run would end up in the digests.
    for (const char* stale : {"functionals.csv", "report.json", "manifest.json"}) fs::remove(out_dir / stale);
    fs::remove_all(out_dir / "snapshots");
    fs::remove_all(out_dir / "noise");

    nlohmann::json constants = nlohmann::json::object();
    try {
        const Setup s(cfg, config_dir);
        const double c1 = measure_c1(s.basis, cfg.K_noise).c1;
        constants = measured_constants(s, c1);
        if (!s.noise.warning().empty()) log << "warning: " << s.noise.warning() << "\n";
        log << "running " << to_string(cfg.kind) << ": " << cfg.n_paths << " paths x " << cfg.sim.n_steps()
            << " steps, c1 = " << c1 << ", C = " << s.noise.summability_constant() << "\n";

        const auto base = ensemble(s, cfg.sim, s.x0);
        write_functionals_csv(out_dir / "functionals.csv", base);
        if (cfg.sim.record_every > 0) {
            fs::create_directories(out_dir / "snapshots");
            for (const auto& tr : base) {
                std::ostringstream name;
                name << "path_" << std::setw(6) << std::setfill('0') << tr.path_index << ".bin";
                write_snapshots(out_dir / "snapshots" / name.str(), tr, s.grid, cfg.sim.record_every);
            }
        }
        if (cfg.export_noise) {
            fs::create_directories(out_dir / "noise");
            for (std::size_t i = 0; i < cfg.n_paths; ++i) {
                std::ostringstream name;
                name << "path_" << std::setw(6) << std::setfill('0') << i << ".bin";
                write_noise_path(out_dir / "noise" / name.str(), generate_path(s.noise, i, cfg.sim.dt, cfg.sim.n_steps()));
            }
        }

        std::vector<Report> reports;
        const double c_hat = c1 * s.noise.summability_constant();
        switch (cfg.kind) {
            case ExperimentKind::simulate:
                break;
            case ExperimentKind::verify_positivity: {
                const auto st = ensemble_stats(base);
                const double sup = lp_norm(s.x0, std::numeric_limits<double>::infinity());
                const double lp = lp_norm(s.x0, cfg.sim.p);
                reports.push_back(positivity_report(st, cfg.tol_pos * sup, cfg.tol_phi * std::pow(lp, cfg.sim.p)));
                reports.push_back(lp_growth_report(st, lp, cfg.sim.p, 0.0));
                break;
            }
            case ExperimentKind::verify_energy: {
                const auto st = ensemble_stats(base);
                const double x0sq = hminus_norm_sq(s.basis, s.x0);
                reports.push_back(energy_report(st, x0sq, c1, s.noise.summability_constant()));
                reports.push_back(j_integral_report(st, x0sq, c1, s.noise.summability_constant()));
                break;
            }
            case ExperimentKind::verify_contraction:
                reports = contraction_reports(s, c_hat);
                break;
            case ExperimentKind::converge_eps:
                reports = epsilon_reports(s);
                break;
            case ExperimentKind::converge_lambda:
                reports = lambda_reports(s, base);
                break;
            case ExperimentKind::picard:
                reports = picard_reports(s);
                break;
            case ExperimentKind::barenblatt:
                reports = oracle_reports(s, base);
                break;
        }
        bool passed = true;
        if (!reports.empty()) {
            const nlohmann::json doc = reports_to_json(reports);
            write_text(out_dir / "report.json", doc.dump(2) + "\n");
            passed = doc["pass"].get<bool>();
            for (const auto& r : reports)
                log << "  " << r.estimate << ": " << (r.pass ? "pass" : "FAIL") << " (margin " << r.margin << ")\n";
        }
        write_manifest(out_dir, cfg, constants, "ok", "", passed);
        res.exit_code = passed ? exit_ok : exit_checks_failed;
        res.message = passed ? "all checks passed" : "some checks failed";
    } catch (const Error& e) {
        const bool config_like = dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidExperiment*>(&e);
        res.exit_code = config_like ? exit_config_error : exit_simulation_error;
        res.message = e.what();
        try {
            write_manifest(out_dir, cfg, constants, "error", e.what(), std::nullopt);
        } catch (...) {
        }
    }
    return res;
}

RunResult run_config_file(const fs::path& config, std::ostream& log) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config);
    } catch (const Error& e) {
        return RunResult{exit_config_error, {}, e.what()};
    }
    if (const char* env = std::getenv("SPDE_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
    fs::path dir = cfg.output_dir;
    return run_experiment(cfg, dir, config.parent_path(), log);
}

int replay_manifest(const fs::path& manifest, std::optional<std::size_t> parallelism, std::ostream& log) {
    nlohmann::json m;
    ExperimentConfig cfg;
    try {
        std::ifstream in(manifest);
        if (!in) throw ConfigError("cannot read manifest " + manifest.string());
        m = nlohmann::json::parse(in);
        cfg = config_from_json(m.at("config"));
        if (parallelism) cfg.parallelism = *parallelism;
    } catch (const nlohmann::json::exception& e) {
        log << "replay: malformed manifest: " << e.what() << "\n";
        return exit_config_error;
    } catch (const Error& e) {
        log << "replay: " << e.what() << "\n";
        return exit_config_error;
    }
    if (m.value("library_version", "") != library_version())
        log << "replay: note: manifest written by library " << m.value("library_version", "?") << ", running "
            << library_version() << "\n";
    const fs::path run_dir = manifest.parent_path();
    const fs::path tmp = scratch_dir();
    std::ostringstream sink;
    const RunResult r = run_experiment(cfg, tmp, run_dir, sink);
    int code = exit_ok;
    if (r.exit_code == exit_config_error || r.exit_code == exit_simulation_error) {
        log << "replay: rerun failed: " << r.message << "\n";
        code = r.exit_code;
    } else {
        const auto& recorded = m.at("outputs");
        std::map<std::string, std::string> fresh;
        for (const auto& e : fs::recursive_directory_iterator(tmp))
            if (e.is_regular_file() && e.path().filename() != "manifest.json")
                fresh[fs::relative(e.path(), tmp).generic_string()] = sha256_file(e.path());
        for (const auto& [name, digest] : recorded.items()) {
            const auto it = fresh.find(name);
            if (it == fresh.end()) {
                log << "replay: mismatch: " << name << " was not produced\n";
                code = exit_replay_mismatch;
                break;
            }
            if (it->second != digest.get<std::string>()) {
                log << "replay: mismatch: " << name << " digest differs";
                if (fs::exists(run_dir / name) && name.ends_with(".csv")) {
                    if (const auto line = first_diff_line(run_dir / name, tmp / name)) log << " (first difference at line " << line << ")";
                }
                log << "\n";
                code = exit_replay_mismatch;
                break;
            }
        }
        if (code == exit_ok && fresh.size() != recorded.size()) {
            log << "replay: mismatch: rerun produced " << fresh.size() << " files, manifest lists " << recorded.size()
                << "\n";
            code = exit_replay_mismatch;
        }
        if (code == exit_ok) log << "replay: " << recorded.size() << " outputs match\n";
    }
    std::error_code ec;
    fs::remove_all(tmp, ec);
    return code;
}

int print_report(const fs::path& run_dir, std::ostream& out) {
    try {
        const fs::path report = run_dir / "report.json";
        if (!fs::exists(report)) {
            std::ifstream in(run_dir / "manifest.json");
            if (!in) {
                out << "no report.json or manifest.json in " << run_dir.string() << "\n";
                return exit_config_error;
            }
            const auto m = nlohmann::json::parse(in);
            out << "experiment " << m["config"]["experiment"]["kind"].get<std::string>() << ": status "
                << m.value("status", "?");
            if (m.contains("error")) out << " (" << m["error"].get<std::string>() << ")";
            out << "\nno checks recorded\n";
            return m.value("status", "") == "ok" ? exit_ok : exit_simulation_error;
        }
        std::ifstream in(report);
        const auto doc = nlohmann::json::parse(in);
        for (const auto& r : doc.at("reports")) {
            out << (r.at("pass").get<bool>() ? "PASS " : "FAIL ") << r.at("estimate").get<std::string>() << "  margin "
                << r.at("margin").dump() << "\n  " << r.at("reference").get<std::string>() << "\n";
            for (const auto& [k, v] : r.at("constants").items()) out << "    " << k << " = " << v.dump() << "\n";
        }
        const bool pass = doc.at("pass").get<bool>();
        out << (pass ? "all checks passed" : "some checks failed") << "\n";
        return pass ? exit_ok : exit_checks_failed;
    } catch (const std::exception& e) {
        out << "cannot read report: " << e.what() << "\n";
        return exit_config_error;
    }
}

}  // namespace spde
