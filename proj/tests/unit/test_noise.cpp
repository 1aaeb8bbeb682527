#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "spde/error.hpp"
#include "spde/hminus.hpp"
#include "spde/noise.hpp"

using spde::Field;
using spde::Grid;
using spde::SpectralBasis;

TEST_CASE("summability constant") {
    const SpectralBasis b(Grid(1, 255), 64);
    // mu_k^2 lambda_k^2 = 1/lambda_k; the continuum series sums to 1/6
    const auto nm = spde::default_mu(b, 1.0, 1.5, 64, 1);
    CHECK(nm.summability_constant() == doctest::Approx(1.0 / 6.0).epsilon(0.01));
    CHECK(nm.summable());
    CHECK(nm.warning().empty());

    const auto quiet = spde::default_mu(b, 0.0, 1.5, 16, 1);
    CHECK(quiet.summability_constant() == 0.0);

    const auto flat = spde::default_mu(b, 1.0, 1.0, 64, 1);
    CHECK_FALSE(flat.summable());
    CHECK_FALSE(flat.warning().empty());

    CHECK_THROWS_AS(spde::default_mu(b, 1.0, 1.5, 65, 1), spde::ConfigError);
}

TEST_CASE("sigma is multiplicative") {
    const Grid g(1, 63);
    const SpectralBasis b(g, 16);
    const spde::NoiseModel nm(b, {1.0, 0.0, 0.0}, 3);
    const Field e1(g, b.mode(0));
    const Field out = spde::apply_sigma(e1, std::vector<double>{1.0, 0.0, 0.0}, nm);
    for (std::size_t i = 0; i < g.n(); ++i) CHECK(out[i] == doctest::Approx(e1[i] * e1[i]));
    const Field z = spde::apply_sigma(Field(g), std::vector<double>{0.3, -1.0, 2.0}, nm);
    for (double v : z.values()) CHECK(v == 0.0);
    CHECK_THROWS_AS(spde::apply_sigma(e1, std::vector<double>{1.0}, nm), spde::ConfigError);

    // linear in X and dW
    const spde::NoiseModel nm2 = spde::default_mu(b, 0.7, 1.5, 8, 3);
    std::mt19937_64 rng(9);
    const Field x(g, oracle::random_field(g.n(), rng, 0)), y(g, oracle::random_field(g.n(), rng, 1));
    std::vector<double> dw(8), dv(8), dsum(8);
    for (std::size_t k = 0; k < 8; ++k) {
        dw[k] = 0.1 * static_cast<double>(k) - 0.3;
        dv[k] = 0.05 * static_cast<double>(k * k);
        dsum[k] = dw[k] + dv[k];
    }
    const Field lhs = spde::apply_sigma(x + y, dw, nm2);
    const Field rhs = spde::apply_sigma(x, dw, nm2) + spde::apply_sigma(y, dw, nm2);
    const Field lw = spde::apply_sigma(x, dsum, nm2);
    const Field rw = spde::apply_sigma(x, dw, nm2) + spde::apply_sigma(x, dv, nm2);
    for (std::size_t i = 0; i < g.n(); ++i) {
        CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-13).scale(1.0));
        CHECK(lw[i] == doctest::Approx(rw[i]).epsilon(1e-13).scale(1.0));
    }
}

TEST_CASE("Ito isometry for one coefficient") {
    const Grid g(1, 63);
    const SpectralBasis b(g, 16);
    const auto nm = spde::default_mu(b, 0.8, 1.5, 8, 21);
    const Field x = Field::sample(g, [](double s) { return 1.0 + std::sin(3.0 * s); });
    const double dt = 1e-2;
    const std::size_t j = 1;
    const auto ej = b.mode(j);
    double expected = 0.0;
    for (std::size_t k = 0; k < nm.size(); ++k) {
        double s = 0.0;
        const auto ek = nm.mode(k);
        for (std::size_t i = 0; i < g.n(); ++i) s += g.h() * x[i] * ek[i] * ej[i];
        expected += nm.mu()[k] * nm.mu()[k] * s * s;
    }
    expected *= dt;

    const std::size_t samples = 10000;
    std::vector<double> dw(nm.size());
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t n = 0; n < samples; ++n) {
        spde::brownian_increments(nm, 0, n, dt, dw);
        const Field s = spde::apply_sigma(x, dw, nm);
        double c = 0.0;
        for (std::size_t i = 0; i < g.n(); ++i) c += g.h() * s[i] * ej[i];
        sum += c;
        sum_sq += c * c;
    }
    const double mean = sum / samples;
    const double var = sum_sq / samples - mean * mean;
    CHECK(var == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("increments are independent standard normals") {
    const std::size_t n = 100000;
    std::vector<double> z(4);
    double s01 = 0.0, s23 = 0.0, m0 = 0.0, v0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        spde::standard_normals(99, 7, i, z);
        s01 += z[0] * z[1];
        s23 += z[2] * z[3];
        m0 += z[0];
        v0 += z[0] * z[0];
    }
    const double tol = 4.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(s01 / n) < tol);
    CHECK(std::abs(s23 / n) < tol);
    CHECK(std::abs(m0 / n) < tol);
    CHECK(std::abs(v0 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));

    // different paths give different draws
    std::vector<double> a(4), c(4);
    spde::standard_normals(99, 7, 3, a);
    spde::standard_normals(99, 8, 3, c);
    CHECK(a != c);
}

TEST_CASE("noise paths are deterministic and round-trip through the binary format") {
    const SpectralBasis b(Grid(1, 63), 16);
    const auto nm = spde::default_mu(b, 0.5, 1.5, 12, 77);
    const auto p1 = spde::generate_path(nm, 4, 1e-3, 50);
    const auto p2 = spde::generate_path(nm, 4, 1e-3, 50);
    CHECK(p1 == p2);
    CHECK(p1.increments.size() == 50 * 12);

    const auto file = std::filesystem::temp_directory_path() / "spde_unit_noise.bin";
    spde::write_noise_path(file, p1);
    CHECK(std::filesystem::file_size(file) == 8 + 4 + 4 + 8 * 5 + 8 * 600);
    CHECK(spde::read_noise_path(file) == p1);

    std::filesystem::resize_file(file, 100);
    CHECK_THROWS_AS(spde::read_noise_path(file), spde::ConfigError);
    {
        std::ofstream out(file, std::ios::binary);
        out << "NOTNOISE";
    }
    CHECK_THROWS_AS(spde::read_noise_path(file), spde::ConfigError);
    std::filesystem::remove(file);
}

TEST_CASE("Hilbert-Schmidt norm") {
    const Grid g(1, 127);
    const SpectralBasis b(g, 32);
    const auto nm = spde::default_mu(b, 0.5, 1.5, 16, 1);
    CHECK(spde::hs_norm_sq(Field(g), nm, b) == 0.0);

    const Field e1(g, b.mode(0));
    double expected = 0.0;
    for (std::size_t k = 0; k < nm.size(); ++k) {
        std::vector<double> prod(g.n());
        for (std::size_t i = 0; i < g.n(); ++i) prod[i] = e1[i] * nm.mode(k)[i];
        expected += nm.mu()[k] * nm.mu()[k] * oracle::hminus_sq(prod);
    }
    CHECK(spde::hs_norm_sq(e1, nm, b) == doctest::Approx(expected).epsilon(1e-10));

    const double c1 = spde::measure_c1(b, nm.size()).c1;
    std::mt19937_64 rng(12);
    for (int t = 0; t < 1000; ++t) {
        const Field x(g, oracle::random_field(g.n(), rng, t));
        CHECK(spde::hs_norm_sq(x, nm, b) <= c1 * nm.summability_constant() * spde::hminus_norm_sq(b, x) * (1 + 1e-9));
    }
}
