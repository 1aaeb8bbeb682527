#pragma once

// Slow, independent reference computations for the tests. Nothing here calls
// the library's transforms or solvers.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double eigenvalue(std::size_t k, std::size_t n) {
    const double h = 1.0 / static_cast<double>(n + 1);
    const double s = std::sin(static_cast<double>(k) * std::numbers::pi * h / 2.0);
    return 4.0 / (h * h) * s * s;
}

/// Orthonormal sine coefficients c_k = h sum_i x_i sqrt(2) sin(k pi xi_i), k = 1..n, by direct summation.
inline std::vector<double> sine_coeffs(const std::vector<double>& x) {
    const std::size_t n = x.size();
    const double h = 1.0 / static_cast<double>(n + 1);
    std::vector<double> c(n);
    for (std::size_t k = 1; k <= n; ++k) {
        long double s = 0.0L;
        for (std::size_t i = 1; i <= n; ++i) {
            // exact reduction of k*i modulo 2(n+1) keeps the sine argument small
            const std::size_t r = (k * i) % (2 * (n + 1));
            s += static_cast<long double>(x[i - 1]) *
                 std::sin(std::numbers::pi_v<long double> * static_cast<long double>(r) / static_cast<long double>(n + 1));
        }
        c[k - 1] = static_cast<double>(std::sqrt(2.0L) * static_cast<long double>(h) * s);
    }
    return c;
}

inline std::vector<double> from_coeffs(const std::vector<double>& c) {
    const std::size_t n = c.size();
    std::vector<double> x(n);
    for (std::size_t i = 1; i <= n; ++i) {
        long double s = 0.0L;
        for (std::size_t k = 1; k <= n; ++k) {
            const std::size_t r = (k * i) % (2 * (n + 1));
            s += static_cast<long double>(c[k - 1]) *
                 std::sin(std::numbers::pi_v<long double> * static_cast<long double>(r) / static_cast<long double>(n + 1));
        }
        x[i - 1] = static_cast<double>(std::sqrt(2.0L) * s);
    }
    return x;
}

/// 1-D three-point Laplacian with zero boundary values.
inline std::vector<double> laplacian(const std::vector<double>& v) {
    const std::size_t n = v.size();
    const double h = 1.0 / static_cast<double>(n + 1);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double l = i > 0 ? v[i - 1] : 0.0;
        const double r = i + 1 < n ? v[i + 1] : 0.0;
        out[i] = (l - 2.0 * v[i] + r) / (h * h);
    }
    return out;
}

/// u with -Delta_h u = f (Thomas algorithm on the constant stencil).
inline std::vector<double> solve_poisson(const std::vector<double>& f) {
    const std::size_t n = f.size();
    const double h = 1.0 / static_cast<double>(n + 1);
    std::vector<long double> c(n), d(n);
    const long double off = -1.0L / (h * h), diag = 2.0L / (h * h);
    c[0] = off / diag;
    d[0] = f[0] / diag;
    for (std::size_t i = 1; i < n; ++i) {
        const long double m = diag - off * c[i - 1];
        c[i] = off / m;
        d[i] = (f[i] - off * d[i - 1]) / m;
    }
    std::vector<double> u(n);
    long double next = d[n - 1];
    u[n - 1] = static_cast<double>(next);
    for (std::size_t i = n - 1; i-- > 0;) {
        next = d[i] - c[i] * next;
        u[i] = static_cast<double>(next);
    }
    return u;
}

/// |x|_{-1}^2 = h sum_i x_i u_i with -Delta_h u = x.
inline double hminus_sq(const std::vector<double>& x) {
    const double h = 1.0 / static_cast<double>(x.size() + 1);
    const auto u = solve_poisson(x);
    long double s = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) s += static_cast<long double>(x[i]) * u[i];
    return static_cast<double>(h * s);
}

/// Operator norm of v -> e v on discrete H^{-1} (1-D) from the dense
/// generalized eigenproblem (E G E) v = mu G v, G = h (-Delta_h)^{-1}.
inline double multiplier_norm(const std::vector<double>& e) {
    const std::size_t n = e.size();
    const double h = 1.0 / static_cast<double>(n + 1);
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        lap(ii, ii) = 2.0 / (h * h);
        if (i + 1 < n) lap(ii, ii + 1) = lap(ii + 1, ii) = -1.0 / (h * h);
    }
    const Eigen::MatrixXd g = h * lap.inverse();
    Eigen::MatrixXd eg = g;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            eg(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *= e[i] * e[j];
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(eg, g);
    return std::sqrt(es.eigenvalues().maxCoeff());
}

/// Random grid function: smooth modes, pointwise noise or a nonnegative bump, by `kind` % 3.
inline std::vector<double> random_field(std::size_t n, std::mt19937_64& rng, int kind) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(n, 0.0);
    const double h = 1.0 / static_cast<double>(n + 1);
    switch (kind % 3) {
        case 0:
            for (std::size_t k = 1; k <= 24; ++k) {
                const double a = z(rng) / static_cast<double>(k);
                for (std::size_t i = 0; i < n; ++i)
                    x[i] += a * std::sqrt(2.0) * std::sin(static_cast<double>(k) * std::numbers::pi * (i + 1) * h);
            }
            break;
        case 1:
            for (auto& v : x) v = z(rng);
            break;
        default: {
            const double c = 0.2 + 0.6 * u(rng), w = 0.05 + 0.15 * u(rng), a = 0.1 + 3.0 * u(rng);
            for (std::size_t i = 0; i < n; ++i) {
                const double q = 1.0 - std::pow(((i + 1) * h - c) / w, 2);
                x[i] = q > 0.0 ? a * q * q : 0.0;
            }
        }
    }
    return x;
}

}  // namespace oracle
