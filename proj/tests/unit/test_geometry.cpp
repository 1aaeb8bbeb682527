#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spde/error.hpp"
#include "spde/geometry.hpp"

using spde::Field;
using spde::Grid;
using spde::SpectralBasis;

namespace {
std::vector<double> randn(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::vector<double> v(n);
    for (auto& x : v) x = z(rng);
    return v;
}
}  // namespace

TEST_CASE("grid rejects sizes that are not 2^k - 1") {
    CHECK_THROWS_AS(Grid(1, 100), spde::ConfigError);
    CHECK_THROWS_AS(Grid(3, 31), spde::ConfigError);
    const Grid g(1, 255);
    CHECK(g.h() == 1.0 / 256.0);
    CHECK(g.coord(0) == g.h());
}

TEST_CASE("first eigenvalue approaches pi^2") {
    const SpectralBasis b(Grid(1, 255), 64);
    CHECK(b.continuum_eigenvalue(0) == doctest::Approx(std::numbers::pi * std::numbers::pi));
    CHECK(b.eigenvalue(0) == doctest::Approx(9.8696).epsilon(1e-4));
}

TEST_CASE("modes are orthonormal in the grid quadrature") {
    const Grid g(1, 127);
    const SpectralBasis b(g, 16);
    for (std::size_t j : {0u, 2u, 7u}) {
        const auto ej = b.mode(j);
        for (std::size_t k : {0u, 2u, 7u}) {
            const auto ek = b.mode(k);
            double s = 0.0;
            for (std::size_t i = 0; i < g.n(); ++i) s += g.h() * ej[i] * ek[i];
            CHECK(s == doctest::Approx(j == k ? 1.0 : 0.0).epsilon(1e-13).scale(1.0));
        }
    }
}

TEST_CASE("discrete Laplacian: eigenvectors, quadratics and zero") {
    const Grid g(1, 127);
    const SpectralBasis b(g, 32);
    for (std::size_t k : {0u, 4u, 31u}) {
        const Field e(g, b.mode(k));
        const Field le = spde::laplacian_apply(e);
        for (std::size_t i = 0; i < g.n(); ++i) CHECK(std::abs(le[i] + b.eigenvalue(k) * e[i]) < 1e-10 * b.eigenvalue(k));
        CHECK(b.eigenvalue(k) == doctest::Approx(oracle::eigenvalue(k + 1, g.n())).epsilon(1e-14));
    }
    const Field q = Field::sample(g, [](double x) { return x * (1.0 - x); });
    const Field lq = spde::laplacian_apply(q);
    for (std::size_t i = 0; i < g.n(); ++i) CHECK(lq[i] == doctest::Approx(-2.0).epsilon(1e-9));
    const Field z = spde::laplacian_apply(Field(g));
    for (double v : z.values()) CHECK(v == 0.0);
}

TEST_CASE("Laplacian is symmetric and negative") {
    const Grid g(1, 63);
    const Field x(g, randn(g.n(), 1)), y(g, randn(g.n(), 2));
    const Field lx = spde::laplacian_apply(x), ly = spde::laplacian_apply(y);
    double a = 0.0, c = 0.0, d = 0.0;
    for (std::size_t i = 0; i < g.n(); ++i) {
        a += lx[i] * y[i];
        c += x[i] * ly[i];
        d += lx[i] * x[i];
    }
    CHECK(a == doctest::Approx(c).epsilon(1e-12));
    CHECK(d < 0.0);
}

TEST_CASE("eigenvalues converge at second order") {
    for (std::size_t n : {63u, 255u}) {
        const SpectralBasis b(Grid(1, n), 32);
        const double h = 1.0 / static_cast<double>(n + 1);
        for (std::size_t k = 0; k < 8; ++k) {
            const double kp = static_cast<double>(k + 1) * std::numbers::pi;
            CHECK(std::abs(b.eigenvalue(k) - kp * kp) <= std::pow(kp, 4) * h * h / 12.0 * 1.5);
        }
    }
}

TEST_CASE("sine transform matches direct summation") {
    const Grid g(1, 63);
    const SpectralBasis b(g, 63);
    const auto x = randn(g.n(), 3);
    std::vector<double> c(g.n());
    b.forward(x, c);
    const auto ref = oracle::sine_coeffs(x);
    for (std::size_t k = 0; k < g.n(); ++k) CHECK(c[k] == doctest::Approx(ref[k]).epsilon(1e-12).scale(1.0));

    std::vector<double> back(g.n());
    b.inverse(c, back);
    for (std::size_t i = 0; i < g.n(); ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("retained coefficients: unit vector, Parseval, linearity, zero") {
    const Grid g(1, 127);
    const SpectralBasis full(g, 127);
    const Field e5(g, full.mode(4));
    const auto c5 = spde::to_spectral(full, e5);
    for (std::size_t k = 0; k < c5.size(); ++k) CHECK(std::abs(c5[k] - (k == 4 ? 1.0 : 0.0)) < 1e-12);

    const Field x(g, randn(g.n(), 4)), y(g, randn(g.n(), 5));
    const auto cx = spde::to_spectral(full, x);
    double grid_sq = 0.0, coef_sq = 0.0;
    for (std::size_t i = 0; i < g.n(); ++i) grid_sq += g.h() * x[i] * x[i];
    for (double v : cx) coef_sq += v * v;
    CHECK(grid_sq == doctest::Approx(coef_sq).epsilon(1e-10));

    const Field back = spde::from_spectral(full, cx);
    for (std::size_t i = 0; i < g.n(); ++i) CHECK(std::abs(back[i] - x[i]) < 1e-12);

    const auto cy = spde::to_spectral(full, y);
    const auto cz = spde::to_spectral(full, 2.5 * x + y);
    for (std::size_t k = 0; k < cz.size(); ++k) CHECK(std::abs(cz[k] - (2.5 * cx[k] + cy[k])) < 1e-12);

    for (double v : spde::to_spectral(full, Field(g))) CHECK(v == 0.0);
}

TEST_CASE("2-D basis is tensorised and sorted") {
    const Grid g(2, 31);
    const SpectralBasis b(g, 8);
    CHECK(b.size() == 64);
    for (std::size_t k = 1; k < b.size(); ++k) CHECK(b.eigenvalue(k - 1) <= b.eigenvalue(k));
    const auto w = b.wave_numbers(0);
    CHECK(w[0] == 1);
    CHECK(w[1] == 1);
    const Field e(g, b.mode(3));
    const Field le = spde::laplacian_apply(e);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(le[i] + b.eigenvalue(3) * e[i]) < 1e-9 * b.eigenvalue(3));
}

TEST_CASE("field arithmetic checks grids and drops the spectral cache") {
    const Grid g(1, 31);
    const SpectralBasis b(g, 8);
    Field x(g, randn(g.n(), 6));
    x.cache_spectral(b);
    CHECK(x.spectral_cache().has_value());
    x *= 2.0;
    CHECK_FALSE(x.spectral_cache().has_value());
    CHECK_THROWS_AS(x += Field(Grid(1, 63)), spde::ConfigError);
}
