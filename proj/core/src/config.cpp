#include "spde/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "spde/error.hpp"

namespace spde {

namespace {

const std::array<std::pair<ExperimentKind, const char*>, 8> kKinds{{
    {ExperimentKind::simulate, "simulate"},
    {ExperimentKind::verify_positivity, "verify-positivity"},
    {ExperimentKind::verify_energy, "verify-energy"},
    {ExperimentKind::verify_contraction, "verify-contraction"},
    {ExperimentKind::converge_eps, "converge-eps"},
    {ExperimentKind::converge_lambda, "converge-lambda"},
    {ExperimentKind::picard, "picard"},
    {ExperimentKind::barenblatt, "barenblatt"},
}};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

double parse_double(const std::string& v) {
    double d = 0.0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, d);
    if (ec != std::errc() || p != end || v.empty()) throw ConfigError("expected a number, got '" + v + "'");
    if (!std::isfinite(d)) throw ConfigError("number must be finite, got '" + v + "'");
    return d;
}

std::uint64_t parse_uint(const std::string& v) {
    std::uint64_t u = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, u);
    if (ec != std::errc() || p != end || v.empty()) throw ConfigError("expected a nonnegative integer, got '" + v + "'");
    return u;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("expected true or false, got '" + v + "'");
}

std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split(v, ',')) out.push_back(parse_double(item));
    if (out.empty()) throw ConfigError("expected a comma-separated list of numbers");
    return out;
}

std::vector<std::pair<std::size_t, double>> parse_modes(const std::string& v) {
    std::vector<std::pair<std::size_t, double>> out;
    for (const auto& item : split(v, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("mode entries look like k:coefficient, got '" + item + "'");
        const auto k = parse_uint(trim(item.substr(0, colon)));
        if (k == 0) throw ConfigError("mode numbers start at 1");
        out.emplace_back(k, parse_double(trim(item.substr(colon + 1))));
    }
    if (out.empty()) throw ConfigError("expected at least one mode");
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
    return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& setters() {
    static const std::map<std::string, std::map<std::string, Setter>> table = {
        {"grid",
         {
             {"n", [](ExperimentConfig& c, const std::string& v) { c.n = parse_uint(v); }},
             {"dim", [](ExperimentConfig& c, const std::string& v) { c.dim = static_cast<int>(parse_uint(v)); }},
         }},
        {"basis", {{"K", [](ExperimentConfig& c, const std::string& v) { c.K = parse_uint(v); }}}},
        {"nonlinearity",
         {
             {"kind", [](ExperimentConfig& c, const std::string& v) { c.beta_kind = beta_kind_from_string(v); }},
             {"m", [](ExperimentConfig& c, const std::string& v) { c.m = parse_double(v); }},
             {"a", [](ExperimentConfig& c, const std::string& v) { c.a = parse_double(v); }},
             {"lambda_reg", [](ExperimentConfig& c, const std::string& v) { c.lambda_reg = parse_double(v); }},
             {"table", [](ExperimentConfig& c, const std::string& v) { c.table_file = v; }},
             {"alpha",
              [](ExperimentConfig& c, const std::string& v) {
                  const auto l = parse_list(v);
                  if (l.size() != 4) throw ConfigError("alpha needs four values");
                  c.alpha = std::array<double, 4>{l[0], l[1], l[2], l[3]};
              }},
         }},
        {"noise",
         {
             {"mubar", [](ExperimentConfig& c, const std::string& v) { c.mubar = parse_double(v); }},
             {"s", [](ExperimentConfig& c, const std::string& v) { c.s = parse_double(v); }},
             {"K_noise", [](ExperimentConfig& c, const std::string& v) { c.K_noise = parse_uint(v); }},
             {"seed", [](ExperimentConfig& c, const std::string& v) { c.seed = parse_uint(v); }},
         }},
        {"sim",
         {
             {"T", [](ExperimentConfig& c, const std::string& v) { c.sim.T = parse_double(v); }},
             {"dt", [](ExperimentConfig& c, const std::string& v) { c.sim.dt = parse_double(v); }},
             {"epsilon", [](ExperimentConfig& c, const std::string& v) { c.sim.epsilon = parse_double(v); }},
             {"scheme", [](ExperimentConfig& c, const std::string& v) { c.sim.scheme = scheme_from_string(v); }},
             {"inner", [](ExperimentConfig& c, const std::string& v) { c.sim.inner = inner_solve_from_string(v); }},
             {"record_every", [](ExperimentConfig& c, const std::string& v) { c.sim.record_every = parse_uint(v); }},
             {"p", [](ExperimentConfig& c, const std::string& v) { c.sim.p = parse_double(v); }},
             {"mollify_lambda",
              [](ExperimentConfig& c, const std::string& v) { c.sim.mollify_lambda = parse_double(v); }},
         }},
        {"initial",
         {
             {"kind", [](ExperimentConfig& c, const std::string& v) { c.initial = v; }},
             {"amplitude", [](ExperimentConfig& c, const std::string& v) { c.amplitude = parse_double(v); }},
             {"center", [](ExperimentConfig& c, const std::string& v) { c.center = parse_double(v); }},
             {"width", [](ExperimentConfig& c, const std::string& v) { c.width = parse_double(v); }},
             {"modes", [](ExperimentConfig& c, const std::string& v) { c.modes = parse_modes(v); }},
             {"C", [](ExperimentConfig& c, const std::string& v) { c.barenblatt_C = parse_double(v); }},
             {"t0", [](ExperimentConfig& c, const std::string& v) { c.barenblatt_t0 = parse_double(v); }},
         }},
        {"ensemble",
         {
             {"n_paths", [](ExperimentConfig& c, const std::string& v) { c.n_paths = parse_uint(v); }},
             {"parallelism", [](ExperimentConfig& c, const std::string& v) { c.parallelism = parse_uint(v); }},
         }},
        {"experiment",
         {
             {"kind", [](ExperimentConfig& c, const std::string& v) { c.kind = experiment_kind_from_string(v); }},
             {"eps_list", [](ExperimentConfig& c, const std::string& v) { c.eps_list = parse_list(v); }},
             {"lambda_list", [](ExperimentConfig& c, const std::string& v) { c.lambda_list = parse_list(v); }},
             {"n_outer", [](ExperimentConfig& c, const std::string& v) { c.n_outer = parse_uint(v); }},
             {"tol_pos", [](ExperimentConfig& c, const std::string& v) { c.tol_pos = parse_double(v); }},
             {"tol_phi", [](ExperimentConfig& c, const std::string& v) { c.tol_phi = parse_double(v); }},
             {"perturbation", [](ExperimentConfig& c, const std::string& v) { c.perturbation = parse_double(v); }},
             {"order_min", [](ExperimentConfig& c, const std::string& v) { c.order_min = parse_double(v); }},
             {"order_max", [](ExperimentConfig& c, const std::string& v) { c.order_max = parse_double(v); }},
             {"oracle_tolerance",
              [](ExperimentConfig& c, const std::string& v) { c.oracle_tolerance = parse_double(v); }},
         }},
        {"output",
         {
             {"dir", [](ExperimentConfig& c, const std::string& v) { c.output_dir = v; }},
             {"export_noise", [](ExperimentConfig& c, const std::string& v) { c.export_noise = parse_bool(v); }},
         }},
    };
    return table;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (!(v[i + 1] < v[i])) return false;
    return true;
}

}  // namespace

std::string to_string(ExperimentKind k) {
    for (const auto& [kind, name] : kKinds)
        if (kind == k) return name;
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    for (const auto& [kind, name] : kKinds)
        if (s == name) return kind;
    std::string all;
    for (const auto& [kind, name] : kKinds) all += (all.empty() ? "" : ", ") + std::string(name);
    throw ConfigError("unknown experiment kind '" + s + "' (expected one of " + all + ")");
}

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw Error("cannot format number");
    return std::string(buf, p);
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::string section;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    const auto& table = setters();
    auto fail = [&](const std::string& msg) { throw ConfigError(source + ":" + std::to_string(lineno) + ": " + msg); };
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') fail("unterminated section header");
            section = trim(body.substr(1, body.size() - 2));
            if (!table.contains(section)) fail("unknown section [" + section + "]");
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (section.empty()) fail("key '" + key + "' appears before any [section]");
        const auto& keys = table.at(section);
        const auto it = keys.find(key);
        if (it == keys.end()) fail("unknown key '" + key + "' in [" + section + "]");
        if (!seen.insert(section + "." + key).second) fail("duplicate key '" + key + "' in [" + section + "]");
        if (value.empty()) fail("empty value for '" + key + "'");
        try {
            it->second(cfg, value);
        } catch (const ConfigError& e) {
            fail(key + ": " + e.what());
        }
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read config file " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), file.string());
}

void ExperimentConfig::validate() const {
    (void)Grid(dim, n);
    if (K == 0 || K > n) throw ConfigError("basis K must be in [1, n]");
    const std::size_t retained = dim == 1 ? K : K * K;
    if (K_noise == 0 || K_noise > retained)
        throw ConfigError("K_noise = " + std::to_string(K_noise) + " must be in [1, " + std::to_string(retained) + "]");
    if (beta_kind == BetaKind::table && table_file.empty()) throw ConfigError("table nonlinearity needs [nonlinearity] table");
    if (beta_kind != BetaKind::table && !(m >= 1.0)) throw ConfigError("exponent m must be >= 1");
    if (!(lambda_reg >= 0.0) || !(a >= 0.0)) throw ConfigError("a and lambda_reg must be >= 0");
    if (!(mubar >= 0.0)) throw ConfigError("mubar must be >= 0");
    sim.validate();
    (void)sim.n_steps();
    if (n_paths == 0) throw ConfigError("ensemble needs n_paths >= 1");
    if (parallelism == 0) throw ConfigError("parallelism must be >= 1");
    static const std::set<std::string> initials{"bump", "sine", "barenblatt", "zero"};
    if (!initials.contains(initial)) throw ConfigError("unknown initial kind '" + initial + "'");
    if (initial == "bump" && !(width > 0.0)) throw ConfigError("bump width must be positive");
    if ((initial == "sine" || initial == "barenblatt") && dim != 1)
        throw ConfigError("initial kind '" + initial + "' is one-dimensional");
    if (initial == "barenblatt" && (beta_kind == BetaKind::table || !(m > 1.0)))
        throw ConfigError("barenblatt initial data needs a power law with m > 1");
    if (!(tol_pos >= 0.0) || !(tol_phi >= 0.0)) throw ConfigError("tolerances must be >= 0");
    switch (kind) {
        case ExperimentKind::converge_eps:
            if (eps_list.size() < 3 || !strictly_decreasing(eps_list) || !(eps_list.back() > 0.0))
                throw ConfigError("eps_list needs >= 3 strictly decreasing positive values");
            break;
        case ExperimentKind::converge_lambda:
            if (lambda_list.size() < 2 || !strictly_decreasing(lambda_list) || !(lambda_list.back() > 0.0))
                throw ConfigError("lambda_list needs >= 2 strictly decreasing positive values");
            break;
        case ExperimentKind::picard:
            if (n_outer < 3) throw ConfigError("picard needs n_outer >= 3");
            break;
        case ExperimentKind::verify_contraction:
            if (!(perturbation > 0.0)) throw ConfigError("contraction needs perturbation > 0");
            break;
        case ExperimentKind::barenblatt:
            if (mubar != 0.0) throw ConfigError("barenblatt oracle is deterministic: set mubar = 0");
            if (dim != 1) throw ConfigError("barenblatt oracle is one-dimensional");
            if (m > 1.0 && initial != "barenblatt") throw ConfigError("barenblatt oracle with m > 1 needs initial kind barenblatt");
            if (m == 1.0 && initial != "sine") throw ConfigError("heat oracle (m = 1) needs initial kind sine");
            if (!(oracle_tolerance > 0.0)) throw ConfigError("oracle_tolerance must be positive");
            break;
        default:
            break;
    }
}

std::string to_ini(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[grid]\nn = " << c.n << "\ndim = " << c.dim << "\n\n";
    os << "[basis]\nK = " << c.K << "\n\n";
    os << "[nonlinearity]\nkind = " << to_string(c.beta_kind) << "\nm = " << format_double(c.m)
       << "\na = " << format_double(c.a) << "\nlambda_reg = " << format_double(c.lambda_reg) << "\n";
    if (!c.table_file.empty()) os << "table = " << c.table_file << "\n";
    if (c.alpha) os << "alpha = " << join({(*c.alpha)[0], (*c.alpha)[1], (*c.alpha)[2], (*c.alpha)[3]}) << "\n";
    os << "\n[noise]\nmubar = " << format_double(c.mubar) << "\ns = " << format_double(c.s)
       << "\nK_noise = " << c.K_noise << "\nseed = " << c.seed << "\n\n";
    os << "[sim]\nT = " << format_double(c.sim.T) << "\ndt = " << format_double(c.sim.dt) << "\n";
    if (c.sim.epsilon) os << "epsilon = " << format_double(*c.sim.epsilon) << "\n";
    os << "scheme = " << to_string(c.sim.scheme) << "\ninner = " << to_string(c.sim.inner)
       << "\nrecord_every = " << c.sim.record_every << "\np = " << format_double(c.sim.p) << "\n";
    if (c.sim.mollify_lambda) os << "mollify_lambda = " << format_double(*c.sim.mollify_lambda) << "\n";
    os << "\n[initial]\nkind = " << c.initial << "\namplitude = " << format_double(c.amplitude)
       << "\ncenter = " << format_double(c.center) << "\nwidth = " << format_double(c.width) << "\nmodes = ";
    for (std::size_t i = 0; i < c.modes.size(); ++i)
        os << (i ? ", " : "") << c.modes[i].first << ":" << format_double(c.modes[i].second);
    os << "\nC = " << format_double(c.barenblatt_C) << "\nt0 = " << format_double(c.barenblatt_t0) << "\n\n";
    os << "[ensemble]\nn_paths = " << c.n_paths << "\nparallelism = " << c.parallelism << "\n\n";
    os << "[experiment]\nkind = " << to_string(c.kind) << "\neps_list = " << join(c.eps_list)
       << "\nlambda_list = " << join(c.lambda_list) << "\nn_outer = " << c.n_outer
       << "\ntol_pos = " << format_double(c.tol_pos) << "\ntol_phi = " << format_double(c.tol_phi)
       << "\nperturbation = " << format_double(c.perturbation) << "\norder_min = " << format_double(c.order_min)
       << "\norder_max = " << format_double(c.order_max)
       << "\noracle_tolerance = " << format_double(c.oracle_tolerance) << "\n\n";
    os << "[output]\ndir = " << c.output_dir << "\nexport_noise = " << (c.export_noise ? "true" : "false") << "\n";
    return os.str();
}

nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& [k, v] : c.modes) modes.push_back({k, v});
    nlohmann::json j = {
        {"grid", {{"n", c.n}, {"dim", c.dim}}},
        {"basis", {{"K", c.K}}},
        {"nonlinearity", {{"kind", to_string(c.beta_kind)}, {"m", c.m}, {"a", c.a}, {"lambda_reg", c.lambda_reg}}},
        {"noise", {{"mubar", c.mubar}, {"s", c.s}, {"K_noise", c.K_noise}, {"seed", c.seed}}},
        {"sim",
         {{"T", c.sim.T},
          {"dt", c.sim.dt},
          {"epsilon", c.sim.eps()},
          {"scheme", to_string(c.sim.scheme)},
          {"inner", to_string(c.sim.inner)},
          {"record_every", c.sim.record_every},
          {"p", c.sim.p},
          {"n_steps", c.sim.n_steps()}}},
        {"initial",
         {{"kind", c.initial},
          {"amplitude", c.amplitude},
          {"center", c.center},
          {"width", c.width},
          {"modes", modes},
          {"C", c.barenblatt_C},
          {"t0", c.barenblatt_t0}}},
        {"ensemble", {{"n_paths", c.n_paths}, {"parallelism", c.parallelism}}},
        {"experiment",
         {{"kind", to_string(c.kind)},
          {"eps_list", c.eps_list},
          {"lambda_list", c.lambda_list},
          {"n_outer", c.n_outer},
          {"tol_pos", c.tol_pos},
          {"tol_phi", c.tol_phi},
          {"perturbation", c.perturbation},
          {"order_min", c.order_min},
          {"order_max", c.order_max},
          {"oracle_tolerance", c.oracle_tolerance}}},
        {"output", {{"dir", c.output_dir}, {"export_noise", c.export_noise}}},
    };
    if (!c.table_file.empty()) j["nonlinearity"]["table"] = c.table_file;
    if (c.alpha) j["nonlinearity"]["alpha"] = *c.alpha;
    if (c.sim.mollify_lambda) j["sim"]["mollify_lambda"] = *c.sim.mollify_lambda;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    std::ostringstream ini;
    for (const auto& [section, keys] : j.items()) {
        if (!keys.is_object()) throw ConfigError("config section '" + section + "' must be an object");
        ini << "[" << section << "]\n";
        for (const auto& [key, v] : keys.items()) {
            if (section == "sim" && key == "n_steps") continue;  // derived
            ini << key << " = ";
            if (v.is_string()) {
                ini << v.get<std::string>();
            } else if (v.is_boolean()) {
                ini << (v.get<bool>() ? "true" : "false");
            } else if (v.is_number_integer()) {
                ini << v.dump();
            } else if (v.is_number()) {
                ini << format_double(v.get<double>());
            } else if (v.is_array()) {
                for (std::size_t i = 0; i < v.size(); ++i) {
                    ini << (i ? ", " : "");
                    if (v[i].is_array() && v[i].size() == 2)
                        ini << v[i][0].get<std::size_t>() << ":" << format_double(v[i][1].get<double>());
                    else
                        ini << format_double(v[i].get<double>());
                }
            } else {
                throw ConfigError("unsupported value for " + section + "." + key);
            }
            ini << "\n";
        }
    }
    return parse_config(ini.str(), "<manifest config>");
}

Grid make_grid(const ExperimentConfig& cfg) { return Grid(cfg.dim, cfg.n); }

Nonlinearity make_nonlinearity(const ExperimentConfig& cfg, const std::filesystem::path& base_dir) {
    Nonlinearity nl = Nonlinearity::power_law(1.0);
    switch (cfg.beta_kind) {
        case BetaKind::power_law:
            nl = Nonlinearity::power_law(cfg.m, cfg.lambda_reg);
            break;
        case BetaKind::power_plus_linear:
            nl = Nonlinearity::power_plus_linear(cfg.m, cfg.a, cfg.lambda_reg);
            break;
        case BetaKind::table: {
            std::filesystem::path p = cfg.table_file;
            if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
            const Nonlinearity base = Nonlinearity::load_table_csv(p);
            nl = cfg.lambda_reg > 0.0 ? regularize(base, cfg.lambda_reg) : base;
            break;
        }
    }
    if (cfg.alpha) nl = nl.with_alpha(*cfg.alpha);
    return nl;
}

BarenblattParams make_barenblatt(const ExperimentConfig& cfg) {
    BarenblattParams bp;
    bp.m = cfg.m;
    bp.C = cfg.barenblatt_C;
    bp.t0 = cfg.barenblatt_t0;
    bp.t1 = cfg.barenblatt_t0 + cfg.sim.T;
    bp.center = cfg.center;
    return bp;
}

Field make_initial(const ExperimentConfig& cfg, const Grid& grid) {
    if (cfg.initial == "zero") return Field(grid);
    if (cfg.initial == "bump") {
        auto bump = [&](double r2) {
            const double q = 1.0 - r2 / (cfg.width * cfg.width);
            return q > 0.0 ? cfg.amplitude * q * q : 0.0;
        };
        if (grid.dim() == 1) return Field::sample(grid, [&](double x) { return bump((x - cfg.center) * (x - cfg.center)); });
        return Field::sample(grid, [&](double x, double y) {
            return bump((x - cfg.center) * (x - cfg.center) + (y - cfg.center) * (y - cfg.center));
        });
    }
    if (cfg.initial == "sine") return heat_exact(grid, cfg.modes, 0.0);
    if (cfg.initial == "barenblatt") return barenblatt_profile(grid, make_barenblatt(cfg), cfg.barenblatt_t0);
    throw ConfigError("unknown initial kind '" + cfg.initial + "'");
}

}  // namespace spde
