#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace spde {

enum class BetaKind { power_law, power_plus_linear, table };

std::string to_string(BetaKind kind);
BetaKind beta_kind_from_string(const std::string& s);

/// Monotone nonlinearity beta and its antiderivative j(r) = int_0^r beta.
///
/// Built-in kinds are odd with beta(0) = 0:
///   power_law          |r|^{m-1} r + lambda_reg r
///   power_plus_linear  |r|^{m-1} r + (a + lambda_reg) r
/// A table is a monotone piecewise-linear interpolant through (r_i, beta_i);
/// lambda_reg r is added on top.
class Nonlinearity {
public:
    static Nonlinearity power_law(double m, double lambda_reg = 0.0);
    static Nonlinearity power_plus_linear(double m, double a, double lambda_reg = 0.0);
    static Nonlinearity table(std::vector<double> r, std::vector<double> beta, double lambda_reg = 0.0);
    /// Two-column CSV (r, beta(r)) with strictly increasing r; a non-numeric
    /// first line is treated as a header.
    static Nonlinearity load_table_csv(const std::filesystem::path& path);

    BetaKind kind() const noexcept { return kind_; }
    double m() const noexcept { return m_; }
    double linear_coefficient() const noexcept { return a_; }
    double lambda_reg() const noexcept { return lambda_reg_; }
    /// (alpha_1..alpha_4); metadata for assumption reporting only.
    const std::array<double, 4>& alpha() const noexcept { return alpha_; }
    Nonlinearity with_alpha(const std::array<double, 4>& alpha) const;

    double beta(double r) const;
    double beta_prime(double r) const;
    double j(double r) const;

    /// Lower bound on beta' over the whole line; > 0 means beta^{-1} is Lipschitz.
    double min_slope() const noexcept;
    bool strictly_monotone() const noexcept { return min_slope() > 0.0; }
    bool is_odd() const noexcept { return kind_ != BetaKind::table; }
    /// beta^{-1}(w). Requires strictly_monotone().
    double inverse(double w) const;

    const std::vector<double>& table_r() const noexcept { return tr_; }
    const std::vector<double>& table_beta() const noexcept { return tb_; }

private:
    Nonlinearity() = default;
    double base_beta(double r) const;
    double base_slope(double r) const;
    std::size_t segment(double r) const;

    BetaKind kind_ = BetaKind::power_law;
    double m_ = 1.0;
    double a_ = 0.0;
    double lambda_reg_ = 0.0;
    std::array<double, 4> alpha_{1.0, 1.0, 1.0, 1.0};
    std::vector<double> tr_, tb_, tj_;  // tj_: j at the knots

    friend Nonlinearity regularize(const Nonlinearity& nl, double lambda);
};

/// Copy with lambda_reg increased by lambda (> 0).
Nonlinearity regularize(const Nonlinearity& nl, double lambda);

/// Outcome of checking one structural inequality on a sample of r values.
struct InequalityCheck {
    bool pass = true;
    double worst_violation = 0.0;  ///< max of (rhs - lhs) where it failed, 0 otherwise
    double worst_r = 0.0;
    std::string note;
};

struct AssumptionReport {
    InequalityCheck growth;        ///< |beta'(r)| <= a1 |r|^{m-1} + a2
    InequalityCheck coercivity;    ///< j(r) >= a3 |r|^{m+1} + a4 r^2
    InequalityCheck monotonicity;  ///< beta non-decreasing
    InequalityCheck mean_value;    ///< r beta(r) >= j(r)
    bool all_pass() const noexcept {
        return growth.pass && coercivity.pass && monotonicity.pass && mean_value.pass;
    }
};

/// Samples [-range, range] (or the table span) at n_samples >= 100 points.
AssumptionReport check_assumptions(const Nonlinearity& nl, double range, std::size_t n_samples);

}  // namespace spde
