#include "spde/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spde/error.hpp"
#include "spde/hminus.hpp"

namespace spde {

namespace {

double neg_pow(double v, double p) {
    if (v >= 0.0) return 0.0;
    const double a = -v;
    if (p == 2.0) return a * a;
    if (p == 4.0) return (a * a) * (a * a);
    return std::pow(a, p);
}

// Relative margin (bound - value) / bound; +1 when both vanish.
double rel_margin(double bound, double value) {
    if (bound > 0.0) return (bound - value) / bound;
    return value <= bound ? 1.0 : -std::numeric_limits<double>::infinity();
}

double rel_half_width(const MeanCI& m) { return m.mean > 0.0 ? m.half_width / m.mean : 0.0; }

}  // namespace

double phi(std::span<const double> x, double cell_volume, double p) {
    if (!(p >= 1.0)) throw DomainError("phi needs p >= 1");
    double s = 0.0;
    for (double v : x) s += neg_pow(v, p);
    return cell_volume * s / p;
}

double phi(const Field& x, double p) { return phi(x.values(), x.grid().cell_volume(), p); }

Field phi_gradient(const Field& x, double p) {
    if (!(p >= 1.0)) throw DomainError("phi needs p >= 1");
    Field g(x.grid());
    auto gv = g.mutable_values();
    for (std::size_t i = 0; i < gv.size(); ++i) gv[i] = x[i] < 0.0 ? -std::pow(-x[i], p - 1.0) : 0.0;
    return g;
}

Field mollify(const SpectralBasis& basis, const Field& x, double lambda) {
    if (!(lambda >= 0.0)) throw DomainError("mollifier needs lambda >= 0");
    if (lambda == 0.0) return x;
    std::vector<double> c = full_spectral(basis, x);
    const auto ev = basis.full_eigenvalues();
    for (std::size_t k = 0; k < c.size(); ++k) c[k] /= 1.0 + lambda * ev[k];
    Field out(x.grid());
    basis.inverse(c, out.mutable_values());
    return out;
}

MeanCI mean_ci(std::span<const double> samples) {
    MeanCI r;
    const std::size_t n = samples.size();
    if (n == 0) return r;
    // Shifted by the first sample: identical samples give their value back
    // exactly, which matters where an estimate meets its bound with equality.
    const double shift = samples[0];
    double s = 0.0;
    for (double v : samples) s += v - shift;
    r.mean = shift + s / static_cast<double>(n);
    if (n < 2) return r;
    double ss = 0.0;
    for (double v : samples) ss += (v - r.mean) * (v - r.mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    r.half_width = 1.96 * sd / std::sqrt(static_cast<double>(n));
    return r;
}

EnsembleStats ensemble_stats(const std::vector<Trajectory>& paths) {
    if (paths.empty()) throw ConfigError("ensemble is empty");
    EnsembleStats st;
    st.n_paths = paths.size();
    const std::size_t n_t = paths.front().steps.size();
    for (const auto& p : paths)
        if (p.steps.size() != n_t) throw ConfigError("trajectories in one ensemble have different lengths");
    st.times = paths.front().times();
    st.min_value = std::numeric_limits<double>::infinity();
    for (const auto& p : paths) st.min_value = std::min(st.min_value, p.min_value());
    std::vector<double> buf(paths.size());
    auto collect = [&](auto get) {
        std::vector<MeanCI> out(n_t);
        for (std::size_t t = 0; t < n_t; ++t) {
            for (std::size_t i = 0; i < paths.size(); ++i) buf[i] = get(paths[i].steps[t]);
            out[t] = mean_ci(buf);
        }
        return out;
    };
    st.hminus_sq = collect([](const StepFunctionals& f) { return f.hminus_sq; });
    st.lp_pow = collect([](const StepFunctionals& f) { return f.lp_pow; });
    st.phi = collect([](const StepFunctionals& f) { return f.phi; });
    st.j_integral = collect([](const StepFunctionals& f) { return f.j_integral; });
    st.drift_integral = collect([](const StepFunctionals& f) { return f.drift_integral; });
    st.energy = collect([](const StepFunctionals& f) { return 0.5 * f.hminus_sq + f.drift_integral; });
    return st;
}

nlohmann::json Report::to_json() const {
    return nlohmann::json{{"estimate", estimate}, {"reference", reference}, {"pass", pass},
                          {"margin", margin},     {"constants", constants}, {"details", details}};
}

nlohmann::json reports_to_json(const std::vector<Report>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    bool all = true;
    for (const auto& r : reports) {
        arr.push_back(r.to_json());
        all = all && r.pass;
    }
    return nlohmann::json{{"pass", all}, {"reports", arr}};
}

namespace {

Report envelope_report(std::string name, std::string ref, const EnsembleStats& stats,
                       const std::vector<MeanCI>& lhs, double x0_hminus_sq, double c1, double c) {
    Report r;
    r.estimate = std::move(name);
    r.reference = std::move(ref);
    r.constants = {{"c1", c1}, {"C", c}, {"rate", c1 * c}, {"x0_hminus_sq", x0_hminus_sq}, {"n_paths", stats.n_paths}};
    double margin = std::numeric_limits<double>::infinity();
    double worst_t = 0.0;
    nlohmann::json series = nlohmann::json::array();
    for (std::size_t t = 0; t < stats.times.size(); ++t) {
        const double delta = rel_half_width(lhs[t]);
        const double bound = std::exp(c1 * c * stats.times[t]) * 0.5 * x0_hminus_sq * (1.0 + delta);
        const double m = rel_margin(bound, lhs[t].mean);
        if (m < margin) {
            margin = m;
            worst_t = stats.times[t];
        }
        series.push_back({stats.times[t], lhs[t].mean, lhs[t].half_width, bound});
    }
    r.margin = margin;
    r.pass = margin >= 0.0;
    r.details = {{"worst_time", worst_t}, {"series_columns", {"time", "mean", "half_width", "bound"}},
                 {"series", series}};
    return r;
}

}  // namespace

Report energy_report(const EnsembleStats& stats, double x0_hminus_sq, double c1, double c) {
    return envelope_report("energy", "H^-1 energy: (1/2)E|X|^2 + E int <A_eps X, X> <= exp(c1 C t)(1/2)|x0|^2",
                           stats, stats.energy, x0_hminus_sq, c1, c);
}

Report j_integral_report(const EnsembleStats& stats, double x0_hminus_sq, double c1, double c) {
    return envelope_report("j_integral", "E int h sum j(J_eps X) dt <= exp(c1 C t)(1/2)|x0|^2", stats,
                           stats.j_integral, x0_hminus_sq, c1, c);
}

Report positivity_report(const EnsembleStats& stats, double tol_pos, double phi_tol) {
    Report r;
    r.estimate = "positivity";
    r.reference = "nonnegative data stay nonnegative; negativity functional phi_p stays zero";
    double sup_phi = 0.0;
    for (const auto& m : stats.phi) sup_phi = std::max(sup_phi, m.mean);
    r.constants = {{"tol_pos", tol_pos}, {"phi_tol", phi_tol}, {"n_paths", stats.n_paths}};
    r.details = {{"min_value", stats.min_value}, {"sup_mean_phi", sup_phi}};
    const bool min_ok = stats.min_value >= -tol_pos;
    const bool phi_ok = sup_phi <= phi_tol;
    r.pass = min_ok && phi_ok;
    // Margin of the tighter of the two conditions, scaled by its tolerance.
    const double m1 = tol_pos > 0.0 ? (stats.min_value + tol_pos) / tol_pos : (min_ok ? 1.0 : -1.0);
    const double m2 = phi_tol > 0.0 ? (phi_tol - sup_phi) / phi_tol : (phi_ok ? 1.0 : -1.0);
    r.margin = std::min(std::min(m1, 1.0), m2);
    return r;
}

Report lp_growth_report(const EnsembleStats& stats, double x0_lp, double p, double margin_r) {
    Report r;
    r.estimate = "lp_growth";
    r.reference = "exp(-gamma t) E|X(t)|_p^p <= R^p";
    const double big_r = 2.0 * x0_lp + margin_r;
    const double rp = std::pow(big_r, p);
    double gamma = 0.0;
    bool finite = std::isfinite(rp);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < stats.times.size(); ++t) {
        const double v = stats.lp_pow[t].mean;
        finite = finite && std::isfinite(v);
        if (stats.times[t] > 0.0 && v > rp) gamma = std::max(gamma, std::log(v / rp) / stats.times[t]);
    }
    for (std::size_t t = 0; t < stats.times.size(); ++t)
        worst = std::min(worst, rel_margin(rp, std::exp(-gamma * stats.times[t]) * stats.lp_pow[t].mean));
    r.constants = {{"p", p}, {"R", big_r}, {"gamma", gamma}, {"n_paths", stats.n_paths}};
    r.margin = worst;
    r.pass = finite && std::isfinite(gamma);
    return r;
}

std::vector<MeanCI> paired_distance(const SpectralBasis& basis, const std::vector<Trajectory>& a,
                                    const std::vector<Trajectory>& b) {
    if (a.size() != b.size() || a.empty()) throw ConfigError("paired ensembles must be nonempty and of equal size");
    const std::size_t n_t = a.front().snapshots.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].path_index != b[i].path_index)
            throw ConfigError("paired trajectories were driven by different noise paths");
        if (a[i].snapshots.size() != n_t || b[i].snapshots.size() != n_t || a[i].snapshot_steps != b[i].snapshot_steps)
            throw ConfigError("paired trajectories need identical snapshot schedules");
    }
    std::vector<MeanCI> out(n_t);
    std::vector<double> buf(a.size());
    for (std::size_t t = 0; t < n_t; ++t) {
        for (std::size_t i = 0; i < a.size(); ++i) buf[i] = hminus_norm_sq(basis, a[i].snapshots[t] - b[i].snapshots[t]);
        out[t] = mean_ci(buf);
    }
    return out;
}

Report contraction_report(const std::vector<double>& times, const std::vector<MeanCI>& distance, double d0_sq,
                          double c_hat, bool identical_data_bitwise) {
    if (times.size() != distance.size()) throw ConfigError("contraction report: times and distances differ in length");
    Report r;
    r.estimate = "contraction";
    r.reference = "E|X1(t) - X2(t)|^2 <= exp(C t) |x1 - x2|^2 under shared noise";
    double margin = std::numeric_limits<double>::infinity();
    nlohmann::json series = nlohmann::json::array();
    for (std::size_t t = 0; t < times.size(); ++t) {
        const double bound = std::exp(c_hat * times[t]) * d0_sq * (1.0 + rel_half_width(distance[t]));
        margin = std::min(margin, rel_margin(bound, distance[t].mean));
        series.push_back({times[t], distance[t].mean, distance[t].half_width, bound});
    }
    r.margin = margin;
    r.pass = margin >= 0.0 && identical_data_bitwise;
    r.constants = {{"C_hat", c_hat}, {"d0_sq", d0_sq}};
    r.details = {{"identical_data_bitwise", identical_data_bitwise},
                 {"series_columns", {"time", "mean", "half_width", "bound"}},
                 {"series", series}};
    return r;
}

Report epsilon_convergence_report(const std::vector<double>& eps, const std::vector<double>& sup_gap_sq,
                                  const std::vector<double>* order_bounds) {
    if (eps.size() < 3 || sup_gap_sq.size() + 1 != eps.size())
        throw ConfigError("epsilon convergence needs >= 3 eps values and one gap per consecutive pair");
    for (std::size_t i = 0; i + 1 < eps.size(); ++i)
        if (!(eps[i + 1] < eps[i])) throw ConfigError("eps list must be strictly decreasing");
    Report r;
    r.estimate = "epsilon_convergence";
    r.reference = "X_eps is Cauchy as eps -> 0: sup_t E|X_eps - X_eps/2|^2 decreases";
    bool decreasing = true;
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < sup_gap_sq.size(); ++i) {
        decreasing = decreasing && sup_gap_sq[i + 1] < sup_gap_sq[i];
        if (sup_gap_sq[i] > 0.0) margin = std::min(margin, 1.0 - sup_gap_sq[i + 1] / sup_gap_sq[i]);
        else margin = std::min(margin, -1.0);
    }
    nlohmann::json orders = nlohmann::json::array();
    double order = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i + 1 < sup_gap_sq.size(); ++i) {
        const double q = 0.5 * std::log(sup_gap_sq[i] / sup_gap_sq[i + 1]) / std::log(eps[i] / eps[i + 1]);
        orders.push_back(q);
        order = q;  // finest pair wins
    }
    bool order_ok = true;
    if (order_bounds) {
        order_ok = std::isfinite(order) && order >= (*order_bounds)[0] && order <= (*order_bounds)[1];
        r.constants["order_bounds"] = *order_bounds;
    }
    r.pass = decreasing && order_ok;
    r.margin = margin;
    r.constants["order"] = order;
    r.details = {{"eps", eps}, {"sup_gap_sq", sup_gap_sq}, {"pairwise_order", orders}, {"strictly_decreasing", decreasing}};
    return r;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("slope fit needs two or more points");
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

Report lambda_convergence_report(const std::vector<double>& lambdas, const std::vector<double>& gap_sq, double lo,
                                 double hi) {
    if (lambdas.size() != gap_sq.size() || lambdas.size() < 2)
        throw ConfigError("lambda convergence needs matching lists of length >= 2");
    Report r;
    r.estimate = "lambda_convergence";
    r.reference = "regularized solutions X^lambda -> X with squared gap O(lambda^2)";
    const double slope = loglog_slope(lambdas, gap_sq);
    r.pass = std::isfinite(slope) && slope >= lo && slope <= hi;
    r.margin = std::isfinite(slope) ? std::min(slope - lo, hi - slope) / (hi - lo) : -1.0;
    r.constants = {{"slope", slope}, {"slope_bounds", {lo, hi}}};
    r.details = {{"lambda", lambdas}, {"gap_sq", gap_sq}};
    return r;
}

Report picard_report(const PicardReport& picard, std::size_t first, std::size_t last) {
    if (last >= picard.d.size() || first >= last) throw ConfigError("picard window outside the recorded gaps");
    Report r;
    r.estimate = "picard_contraction";
    r.reference = "frozen-noise map X -> X* contracts for small T";
    bool ok = true;
    double worst = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        ok = ok && picard.d[i + 1] < picard.d[i];
        const double ratio = picard.d[i] > 0.0 ? picard.d[i + 1] / picard.d[i] : 1.0;
        worst = std::max(worst, ratio);
    }
    r.pass = ok;
    r.margin = 1.0 - worst;
    r.constants = {{"geometric_ratio", picard.geometric_ratio}, {"worst_ratio", worst}, {"n_paths", picard.n_paths}};
    r.details = {{"d", picard.d}, {"ratios", picard.ratios}, {"window", {first, last}}};
    return r;
}

}  // namespace spde
