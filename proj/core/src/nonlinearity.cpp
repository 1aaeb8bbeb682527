#include "spde/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "spde/error.hpp"

namespace spde {

namespace {

// |r|^{m-1} r with exact products for the common integer exponents.
double signed_power(double r, double m) {
    if (m == 1.0) return r;
    if (m == 2.0) return std::abs(r) * r;
    if (m == 3.0) return r * r * r;
    return std::copysign(std::pow(std::abs(r), m), r);
}

double abs_power(double r, double e) {
    const double a = std::abs(r);
    if (e == 0.0) return 1.0;
    if (e == 1.0) return a;
    if (e == 2.0) return a * a;
    if (e == 3.0) return a * a * a;
    if (e == 4.0) return (a * a) * (a * a);
    return std::pow(a, e);
}

void validate_exponent(double m) {
    if (!(m >= 1.0) || !std::isfinite(m)) {
        throw DomainError("growth exponent m must be finite and >= 1");
    }
}

}  // namespace

std::string to_string(BetaKind kind) {
    switch (kind) {
        case BetaKind::power_law: return "power";
        case BetaKind::power_plus_linear: return "power_plus_linear";
        case BetaKind::table: return "table";
    }
    return "unknown";
}

BetaKind beta_kind_from_string(const std::string& s) {
    if (s == "power" || s == "power_law") return BetaKind::power_law;
    if (s == "power_plus_linear") return BetaKind::power_plus_linear;
    if (s == "table") return BetaKind::table;
    throw ConfigError("unknown nonlinearity kind '" + s + "' (expected power, power_plus_linear or table)");
}

Nonlinearity Nonlinearity::power_law(double m, double lambda_reg) {
    validate_exponent(m);
    if (!(lambda_reg >= 0.0)) throw DomainError("lambda_reg must be >= 0");
    Nonlinearity nl;
    nl.kind_ = BetaKind::power_law;
    nl.m_ = m;
    nl.lambda_reg_ = lambda_reg;
    return nl;
}

Nonlinearity Nonlinearity::power_plus_linear(double m, double a, double lambda_reg) {
    validate_exponent(m);
    if (!(a >= 0.0)) throw DomainError("linear coefficient must be >= 0");
    if (!(lambda_reg >= 0.0)) throw DomainError("lambda_reg must be >= 0");
    Nonlinearity nl;
    nl.kind_ = BetaKind::power_plus_linear;
    nl.m_ = m;
    nl.a_ = a;
    nl.lambda_reg_ = lambda_reg;
    return nl;
}

Nonlinearity Nonlinearity::table(std::vector<double> r, std::vector<double> beta, double lambda_reg) {
    if (r.size() != beta.size() || r.size() < 2) {
        throw ConfigError("nonlinearity table needs at least two (r, beta) pairs of equal length");
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!std::isfinite(r[i]) || !std::isfinite(beta[i])) throw ConfigError("nonlinearity table has non-finite entries");
        if (i > 0 && !(r[i] > r[i - 1])) throw ConfigError("nonlinearity table r values must be strictly increasing");
        if (i > 0 && beta[i] < beta[i - 1]) {
            throw ConfigError("nonlinearity table is not monotone at r = " + std::to_string(r[i]));
        }
    }
    if (r.front() > 0.0 || r.back() < 0.0) throw ConfigError("nonlinearity table must contain r = 0");
    if (!(lambda_reg >= 0.0)) throw DomainError("lambda_reg must be >= 0");

    Nonlinearity nl;
    nl.kind_ = BetaKind::table;
    nl.lambda_reg_ = lambda_reg;
    nl.tr_ = std::move(r);
    nl.tb_ = std::move(beta);
    // Cumulative trapezoid is exact for the linear interpolant.
    std::vector<double> cum(nl.tr_.size(), 0.0);
    for (std::size_t i = 1; i < cum.size(); ++i) {
        cum[i] = cum[i - 1] + 0.5 * (nl.tb_[i] + nl.tb_[i - 1]) * (nl.tr_[i] - nl.tr_[i - 1]);
    }
    nl.tj_ = cum;
    const std::size_t s = nl.segment(0.0);
    const double t = (0.0 - nl.tr_[s]);
    const double b0 = nl.base_beta(0.0);
    const double j_at_zero = cum[s] + 0.5 * (nl.tb_[s] + b0) * t;
    for (double& v : nl.tj_) v -= j_at_zero;
    return nl;
}

Nonlinearity Nonlinearity::load_table_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open nonlinearity table '" + path.string() + "'");
    std::vector<double> r, b;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double x = 0.0, y = 0.0;
        if (!(ls >> x >> y)) {
            if (r.empty() && lineno == 1) continue;  // header
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected two numbers");
        }
        r.push_back(x);
        b.push_back(y);
    }
    return table(std::move(r), std::move(b));
}

Nonlinearity Nonlinearity::with_alpha(const std::array<double, 4>& alpha) const {
    Nonlinearity out = *this;
    out.alpha_ = alpha;
    return out;
}

std::size_t Nonlinearity::segment(double r) const {
    if (r < tr_.front() || r > tr_.back() || std::isnan(r)) throw ExtrapolationError(r, tr_.front(), tr_.back());
    auto it = std::upper_bound(tr_.begin(), tr_.end(), r);
    std::size_t i = static_cast<std::size_t>(it - tr_.begin());
    if (i == 0) i = 1;
    if (i >= tr_.size()) i = tr_.size() - 1;
    return i - 1;
}

double Nonlinearity::base_beta(double r) const {
    switch (kind_) {
        case BetaKind::power_law: return signed_power(r, m_);
        case BetaKind::power_plus_linear: return signed_power(r, m_) + a_ * r;
        case BetaKind::table: {
            const std::size_t s = segment(r);
            const double slope = (tb_[s + 1] - tb_[s]) / (tr_[s + 1] - tr_[s]);
            return tb_[s] + slope * (r - tr_[s]);
        }
    }
    return 0.0;
}

double Nonlinearity::base_slope(double r) const {
    switch (kind_) {
        case BetaKind::power_law: return m_ == 1.0 ? 1.0 : m_ * abs_power(r, m_ - 1.0);
        case BetaKind::power_plus_linear: return (m_ == 1.0 ? 1.0 : m_ * abs_power(r, m_ - 1.0)) + a_;
        case BetaKind::table: {
            const std::size_t s = segment(r);
            return (tb_[s + 1] - tb_[s]) / (tr_[s + 1] - tr_[s]);
        }
    }
    return 0.0;
}

double Nonlinearity::beta(double r) const { return base_beta(r) + lambda_reg_ * r; }

double Nonlinearity::beta_prime(double r) const { return base_slope(r) + lambda_reg_; }

double Nonlinearity::j(double r) const {
    const double quad = 0.5 * r * r;
    switch (kind_) {
        case BetaKind::power_law: return abs_power(r, m_ + 1.0) / (m_ + 1.0) + lambda_reg_ * quad;
        case BetaKind::power_plus_linear: return abs_power(r, m_ + 1.0) / (m_ + 1.0) + (a_ + lambda_reg_) * quad;
        case BetaKind::table: {
            const std::size_t s = segment(r);
            return tj_[s] + 0.5 * (tb_[s] + base_beta(r)) * (r - tr_[s]) + lambda_reg_ * quad;
        }
    }
    return 0.0;
}

double Nonlinearity::min_slope() const noexcept {
    switch (kind_) {
        case BetaKind::power_law: return (m_ == 1.0 ? 1.0 : 0.0) + lambda_reg_;
        case BetaKind::power_plus_linear: return (m_ == 1.0 ? 1.0 : 0.0) + a_ + lambda_reg_;
        case BetaKind::table: {
            double s = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i + 1 < tr_.size(); ++i) {
                s = std::min(s, (tb_[i + 1] - tb_[i]) / (tr_[i + 1] - tr_[i]));
            }
            return s + lambda_reg_;
        }
    }
    return 0.0;
}

double Nonlinearity::inverse(double w) const {
    if (!strictly_monotone()) throw DomainError("beta^{-1} requested for a non-strictly monotone nonlinearity");
    if (kind_ == BetaKind::table) {
        const double lo = beta(tr_.front()), hi = beta(tr_.back());
        if (w < lo || w > hi || std::isnan(w)) throw ExtrapolationError(w, lo, hi);
        std::size_t a = 0, b = tr_.size() - 1;
        while (b - a > 1) {
            const std::size_t mid = (a + b) / 2;
            (beta(tr_[mid]) <= w ? a : b) = mid;
        }
        const double ba = beta(tr_[a]), bb = beta(tr_[b]);
        return tr_[a] + (w - ba) * (tr_[b] - tr_[a]) / (bb - ba);
    }
    const double c = (kind_ == BetaKind::power_plus_linear ? a_ : 0.0) + lambda_reg_;
    if (m_ == 1.0) return w / (1.0 + c);
    if (w == 0.0) return 0.0;
    // f(y) = y^m + c y - |w| is convex and increasing on y >= 0; Newton started
    // where f >= 0 decreases monotonically onto the root.
    const double aw = std::abs(w);
    double y = std::min(aw / c, std::pow(aw, 1.0 / m_));
    for (int it = 0; it < 200; ++it) {
        const double f = abs_power(y, m_) + c * y - aw;
        const double df = m_ * abs_power(y, m_ - 1.0) + c;
        const double next = y - f / df;
        if (!(next < y)) break;
        y = next;
    }
    return std::copysign(y, w);
}

Nonlinearity regularize(const Nonlinearity& nl, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("regularization parameter must be > 0");
    Nonlinearity out = nl;
    out.lambda_reg_ += lambda;
    return out;
}

AssumptionReport check_assumptions(const Nonlinearity& nl, double range, std::size_t n_samples) {
    if (n_samples < 100) throw ConfigError("check_assumptions needs at least 100 samples");
    double lo = -range, hi = range;
    if (nl.kind() == BetaKind::table) {
        lo = std::max(lo, nl.table_r().front());
        hi = std::min(hi, nl.table_r().back());
    }
    const auto [a1, a2, a3, a4] = nl.alpha();
    const double m = nl.m();
    AssumptionReport rep;
    auto record = [](InequalityCheck& c, double lhs, double rhs, double r) {
        // lhs >= rhs is required
        const double slack = 1e-12 * (1.0 + std::abs(rhs));
        if (lhs < rhs - slack) {
            c.pass = false;
            if (rhs - lhs > c.worst_violation) {
                c.worst_violation = rhs - lhs;
                c.worst_r = r;
            }
        }
    };
    double prev_beta = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double r = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_samples - 1);
        const double b = nl.beta(r);
        record(rep.growth, a1 * abs_power(r, m - 1.0) + a2, std::abs(nl.beta_prime(r)), r);
        record(rep.coercivity, nl.j(r), a3 * abs_power(r, m + 1.0) + a4 * r * r, r);
        record(rep.monotonicity, b, prev_beta, r);
        record(rep.mean_value, r * b, nl.j(r), r);
        prev_beta = b;
    }
    if (!rep.coercivity.pass) {
        std::ostringstream os;
        os << "coercivity j(r) >= a3|r|^{m+1} + a4 r^2 fails, worst at r = " << rep.coercivity.worst_r;
        if (std::abs(rep.coercivity.worst_r) < 0.5 * (hi - lo) / 2.0 && nl.lambda_reg() == 0.0 && nl.m() > 1.0) {
            os << " (near r = 0 the quadratic term dominates a degenerate beta; enable lambda_reg)";
        }
        rep.coercivity.note = os.str();
    }
    if (!rep.growth.pass) rep.growth.note = "growth bound |beta'| <= a1|r|^{m-1} + a2 fails";
    if (!rep.monotonicity.pass) rep.monotonicity.note = "beta decreases between samples";
    if (!rep.mean_value.pass) rep.mean_value.note = "r beta(r) >= j(r) fails";
    return rep;
}

}  // namespace spde
