#include "spde/barenblatt.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "spde/error.hpp"
#include "spde/hminus.hpp"
#include "spde/noise.hpp"

namespace spde {

namespace {

void require_valid(const BarenblattParams& bp) {
    if (!(bp.m > 1.0)) throw ConfigError("Barenblatt profile needs m > 1");
    if (!(bp.C > 0.0) || !(bp.t0 > 0.0) || !(bp.t1 >= bp.t0)) throw ConfigError("Barenblatt needs C > 0, 0 < t0 <= t1");
}

double rel_l2(const Field& a, const Field& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

Report oracle_report(std::string name, std::string ref, double err, double tolerance) {
    Report r;
    r.estimate = std::move(name);
    r.reference = std::move(ref);
    r.pass = err <= tolerance;
    r.margin = (tolerance - err) / tolerance;
    r.constants = {{"relative_l2_error", err}, {"tolerance", tolerance}};
    r.details = {{"oracle", "external"}};
    return r;
}

NoiseModel silent_noise(const SpectralBasis& basis) { return default_mu(basis, 0.0, 1.5, 1, 0); }

}  // namespace

double barenblatt_value(const BarenblattParams& bp, double t, double x) {
    const double a = 1.0 / (bp.m + 1.0);
    const double k = a * (bp.m - 1.0) / (2.0 * bp.m);
    const double z = x - bp.center;
    const double inner = bp.C - k * z * z * std::pow(t, -2.0 * a);
    if (inner <= 0.0) return 0.0;
    return std::pow(t, -a) * std::pow(inner, 1.0 / (bp.m - 1.0));
}

double barenblatt_radius(const BarenblattParams& bp, double t) {
    const double a = 1.0 / (bp.m + 1.0);
    const double k = a * (bp.m - 1.0) / (2.0 * bp.m);
    return std::sqrt(bp.C / k) * std::pow(t, a);
}

Field barenblatt_profile(const Grid& grid, const BarenblattParams& bp, double t) {
    require_valid(bp);
    if (grid.dim() != 1) throw ConfigError("Barenblatt profile is one-dimensional");
    return Field::sample(grid, [&](double x) { return barenblatt_value(bp, t, x); });
}

Report barenblatt_compare(const Field& numeric, const BarenblattParams& bp, double tolerance) {
    require_valid(bp);
    const double r = barenblatt_radius(bp, bp.t1);
    if (bp.center - r <= 0.0 || bp.center + r >= 1.0) {
        std::ostringstream os;
        os << "Barenblatt support [" << bp.center - r << ", " << bp.center + r << "] reaches the boundary by t1 = "
           << bp.t1;
        throw InvalidExperiment(os.str());
    }
    const Field exact = barenblatt_profile(numeric.grid(), bp, bp.t1);
    Report rep = oracle_report("barenblatt", "external oracle: self-similar porous-medium solution",
                               rel_l2(numeric, exact), tolerance);
    rep.constants["m"] = bp.m;
    rep.constants["t0"] = bp.t0;
    rep.constants["t1"] = bp.t1;
    rep.constants["support_radius_t1"] = r;
    return rep;
}

Report run_barenblatt_oracle(const BarenblattParams& bp, std::size_t n, const SimConfig& sim, double tolerance) {
    require_valid(bp);
    const double r = barenblatt_radius(bp, bp.t1);
    if (bp.center - r <= 0.0 || bp.center + r >= 1.0)
        throw InvalidExperiment("Barenblatt support reaches the boundary before t1");
    const Grid grid(1, n);
    const SpectralBasis basis(grid, 1);
    SimConfig cfg = sim;
    cfg.T = bp.t1 - bp.t0;
    const Nonlinearity nl = Nonlinearity::power_law(bp.m);
    const Trajectory tr = simulate_path(barenblatt_profile(grid, bp, bp.t0), cfg, nl, silent_noise(basis), basis, 0);
    Report rep = barenblatt_compare(*tr.final_state, bp, tolerance);
    rep.constants["n"] = n;
    rep.constants["dt"] = cfg.dt;
    rep.constants["epsilon"] = cfg.eps();
    return rep;
}

Field heat_exact(const Grid& grid, const std::vector<std::pair<std::size_t, double>>& modes, double t) {
    if (grid.dim() != 1) throw ConfigError("heat oracle is one-dimensional");
    return Field::sample(grid, [&](double x) {
        double s = 0.0;
        for (const auto& [k, c] : modes) {
            const double w = static_cast<double>(k) * std::numbers::pi;
            s += c * std::exp(-w * w * t) * std::numbers::sqrt2 * std::sin(w * x);
        }
        return s;
    });
}

Report heat_compare(const Field& numeric, const std::vector<std::pair<std::size_t, double>>& modes, double t,
                    double tolerance) {
    Report rep = oracle_report("heat", "external oracle: spectral Dirichlet heat solution",
                               rel_l2(numeric, heat_exact(numeric.grid(), modes, t)), tolerance);
    rep.constants["T"] = t;
    return rep;
}

Report run_heat_oracle(const std::vector<std::pair<std::size_t, double>>& modes, std::size_t n, const SimConfig& sim,
                       double tolerance) {
    const Grid grid(1, n);
    const SpectralBasis basis(grid, 1);
    const Nonlinearity nl = Nonlinearity::power_law(1.0);
    const Trajectory tr = simulate_path(heat_exact(grid, modes, 0.0), sim, nl, silent_noise(basis), basis, 0);
    Report rep = heat_compare(*tr.final_state, modes, sim.T, tolerance);
    rep.constants["n"] = n;
    rep.constants["dt"] = sim.dt;
    rep.constants["epsilon"] = sim.eps();
    return rep;
}

}  // namespace spde
