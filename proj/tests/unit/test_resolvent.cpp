#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spde/hminus.hpp"
#include "spde/resolvent.hpp"

using spde::Field;
using spde::Grid;
using spde::Nonlinearity;
using spde::SpectralBasis;

namespace {
spde::ResolventConfig with_eps(double eps) {
    spde::ResolventConfig c;
    c.epsilon = eps;
    return c;
}
Field random_field(const Grid& g, std::mt19937_64& rng, int kind) { return Field(g, oracle::random_field(g.n(), rng, kind)); }
}  // namespace

TEST_CASE("zero maps to zero") {
    const Grid g(1, 63);
    const SpectralBasis b(g, 16);
    const auto s = spde::resolvent_solve(Field(g), with_eps(0.1), Nonlinearity::power_law(2.0), b);
    for (double v : s.y.values()) CHECK(v == 0.0);
    for (double v : s.a_eps.values()) CHECK(v == 0.0);
    const Field a = spde::yosida_apply(Field(g), with_eps(0.1), Nonlinearity::power_law(2.0), b);
    for (double v : a.values()) CHECK(v == 0.0);
}

TEST_CASE("linear beta: per-mode closed forms") {
    const Grid g(1, 127);
    const SpectralBasis b(g, 127);
    std::mt19937_64 rng(7);
    const Field x = random_field(g, rng, 0);
    const auto lin = Nonlinearity::power_law(1.0);
    for (double eps : {1e-3, 0.1, 1.0}) {
        const auto s = spde::resolvent_solve(x, with_eps(eps), lin, b);
        const auto cx = spde::to_spectral(b, x);
        const auto cy = spde::to_spectral(b, s.y);
        const auto ca = spde::to_spectral(b, s.a_eps);
        double cmax = 0.0, amax = 0.0;
        for (std::size_t k = 0; k < cx.size(); ++k) {
            cmax = std::max(cmax, std::abs(cx[k]));
            amax = std::max(amax, std::abs(b.eigenvalue(k) * cx[k] / (1 + eps * b.eigenvalue(k))));
        }
        for (std::size_t k = 0; k < cx.size(); ++k) {
            const double l = b.eigenvalue(k);
            CHECK(std::abs(cy[k] - cx[k] / (1 + eps * l)) <= 1e-10 * cmax);
            CHECK(std::abs(ca[k] - l * cx[k] / (1 + eps * l)) <= 1e-9 * amax);
        }
    }
    // monotone gap closed form
    const Field xb = random_field(g, rng, 1);
    const double eps = 0.05;
    const auto d = spde::to_spectral(b, x - xb);
    double expected = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) expected += d[k] * d[k] / (1 + eps * b.eigenvalue(k));
    CHECK(spde::resolvent_monotone_gap(x, xb, with_eps(eps), lin, b) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("porous medium resolvent properties") {
    const Grid g(1, 127);
    const SpectralBasis b(g, 32);
    const auto pm = Nonlinearity::power_law(2.0);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const Field x = random_field(g, rng, trial);
        const Field xb = random_field(g, rng, trial + 1);
        const double eps = std::pow(10.0, -static_cast<double>(trial % 4));
        const auto cfg = with_eps(eps);
        const auto sx = spde::resolvent_solve(x, cfg, pm, b);
        const auto sb = spde::resolvent_solve(xb, cfg, pm, b);
        CHECK(sx.residual <= spde::default_newton_tol(spde::hminus_norm(b, x)));
        for (double p : {2.0, 4.0, 3.0}) CHECK(spde::lp_norm(sx.y, p) <= spde::lp_norm(x, p) * (1 + 1e-9));
        for (double p : {2.0, 4.0}) CHECK(spde::lp_norm(sx.a_eps, p) <= 2.0 / eps * spde::lp_norm(x, p) * (1 + 1e-9));
        CHECK(spde::hminus_norm(b, sx.y - sb.y) <= spde::hminus_norm(b, x - xb) * (1 + 1e-9));
        CHECK(spde::resolvent_monotone_gap(x, xb, cfg, pm, b) >= -1e-9);
        CHECK(spde::resolvent_monotone_gap(x, x, cfg, pm, b) == 0.0);
        if (trial % 3 == 2) {  // nonnegative bump
            for (double v : sx.y.values()) CHECK(v >= -1e-10);
        }
    }
}

TEST_CASE("strictly monotone beta uses the flux form and agrees with primal") {
    const Grid g(1, 63);
    const SpectralBasis b(g, 16);
    const auto nl = Nonlinearity::power_plus_linear(2.0, 0.5);
    std::mt19937_64 rng(3);
    const Field x = random_field(g, rng, 0);
    auto cfg = with_eps(0.1);
    const auto a = spde::resolvent_solve(x, cfg, nl, b);
    CHECK(a.form == spde::ResolventForm::flux);
    cfg.form = spde::ResolventForm::primal;
    const auto c = spde::resolvent_solve(x, cfg, nl, b);
    for (std::size_t i = 0; i < g.n(); ++i) CHECK(a.y[i] == doctest::Approx(c.y[i]).epsilon(1e-9).scale(1e-6));
}

TEST_CASE("L2 Lipschitz constant is finite for regularized beta") {
    const Grid g(1, 63);
    const SpectralBasis b(g, 16);
    const auto nl = spde::regularize(Nonlinearity::power_law(2.0), 0.1);
    std::mt19937_64 rng(5);
    for (double eps : {1e-2, 1e-1, 1.0}) {
        double worst = 0.0;
        for (int t = 0; t < 10; ++t) {
            const Field x = random_field(g, rng, t), xb = random_field(g, rng, t + 2);
            const auto y = spde::resolvent_solve(x, with_eps(eps), nl, b).y;
            const auto yb = spde::resolvent_solve(xb, with_eps(eps), nl, b).y;
            worst = std::max(worst, spde::lp_norm(y - yb, 2.0) / spde::lp_norm(x - xb, 2.0));
        }
        CHECK(std::isfinite(worst));
        CHECK(worst > 0.0);
    }
}

TEST_CASE("2-D resolvent satisfies its equation") {
    const Grid g(2, 15);
    const SpectralBasis b(g, 8);
    const auto pm = Nonlinearity::power_law(2.0);
    const Field x = Field::sample(g, [](double u, double v) { return std::sin(3.14159265358979 * u) * std::sin(3.14159265358979 * v) + 0.3 * u; });
    const auto s = spde::resolvent_solve(x, with_eps(0.05), pm, b);
    Field beta_y = s.y;
    for (auto& v : beta_y.mutable_values()) v = pm.beta(v);
    const Field r = s.y - 0.05 * spde::laplacian_apply(beta_y) - x;
    CHECK(spde::hminus_norm(b, r) <= 1e-9 * spde::hminus_norm(b, x));
}
