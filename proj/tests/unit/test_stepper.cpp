#include <doctest.h>

#include <bit>
#include <cmath>

#include "spde/error.hpp"
#include "spde/hminus.hpp"
#include "spde/noise.hpp"
#include "spde/stepper.hpp"

using spde::Field;
using spde::Grid;
using spde::Nonlinearity;
using spde::SpectralBasis;

namespace {
bool bit_equal(const Field& a, const Field& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
    return true;
}
Field bump(const Grid& g) {
    return Field::sample(g, [](double x) {
        const double q = 1.0 - 16.0 * (x - 0.5) * (x - 0.5);
        return q > 0 ? q * q : 0.0;
    });
}
}  // namespace

TEST_CASE("config derived quantities") {
    spde::SimConfig c;
    c.dt = 1e-3;
    c.epsilon = 1e-2;
    CHECK(c.contraction_factor() == doctest::Approx(1.0 / 11.0));
    c.T = 0.1;
    CHECK(c.n_steps() == 100);
    c.T = 0.10005;
    CHECK_THROWS_AS(c.n_steps(), spde::ConfigError);
    CHECK(spde::scheme_from_string(spde::to_string(spde::Scheme::mild_exponential)) == spde::Scheme::mild_exponential);
    CHECK(spde::inner_solve_from_string("resolvent-identity") == spde::InnerSolve::resolvent_identity);
}

TEST_CASE("deterministic linear step matches implicit Euler per mode") {
    const Grid g(1, 63);
    const SpectralBasis b(g, 63);
    const auto lin = Nonlinearity::power_law(1.0);
    const auto nm = spde::default_mu(b, 0.0, 1.5, 4, 1);
    spde::SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.epsilon = 1e-2;
    for (std::size_t k : {0u, 5u}) {
        const Field x(g, b.mode(k));
        const std::vector<double> dw(4, 0.3);
        for (auto inner : {spde::InnerSolve::fixed_point, spde::InnerSolve::resolvent_identity}) {
            cfg.inner = inner;
            const auto r = spde::step_semi_implicit(x, dw, cfg, lin, nm, b);
            const double l = b.eigenvalue(k);
            const double expected = 1.0 / (1.0 + cfg.dt * l / (1.0 + *cfg.epsilon * l));
            const auto c = spde::to_spectral(b, r.x);
            CHECK(c[k] == doctest::Approx(expected).epsilon(1e-9));
            if (inner == spde::InnerSolve::fixed_point) {
                const double bound = std::ceil(std::log(1e-11) / std::log(cfg.contraction_factor()));
                CHECK(static_cast<double>(r.inner_iterations) <= bound + 1);
            }
        }
    }
}

TEST_CASE("zero state stays zero") {
    const Grid g(1, 63);
    const SpectralBasis b(g, 16);
    const auto nm = spde::default_mu(b, 0.5, 1.5, 8, 1);
    spde::SimConfig cfg;
    cfg.T = 0.02;
    const auto r = spde::step_semi_implicit(Field(g), std::vector<double>(8, 1.0), cfg, Nonlinearity::power_law(2.0), nm, b);
    for (double v : r.x.values()) CHECK(v == 0.0);
    const auto tr = spde::simulate_path(Field(g), cfg, Nonlinearity::power_law(2.0), nm, b, 0);
    for (const auto& s : tr.steps) CHECK(s.hminus_sq == 0.0);
}

TEST_CASE("heat equation against the spectral solution") {
    const Grid g(1, 127);
    const SpectralBasis b(g, 127);
    const auto nm = spde::default_mu(b, 0.0, 1.5, 4, 1);
    spde::SimConfig cfg;
    cfg.T = 0.05;
    cfg.dt = 1e-4;
    cfg.epsilon = 1e-3;
    const Field x0(g, b.mode(0));
    const auto tr = spde::simulate_path(x0, cfg, Nonlinearity::power_law(1.0), nm, b, 0);
    const double l = b.eigenvalue(0);
    const double exact = std::exp(-l * cfg.T / (1 + 1e-3 * l));
    const auto c = spde::to_spectral(b, *tr.final_state);
    CHECK(std::abs(c[0] - exact) < 5.0 * l * l * cfg.dt * cfg.T);  // first order in dt
}

TEST_CASE("deterministic porous medium dissipates the H^-1 norm") {
    const Grid g(1, 127);
    const SpectralBasis b(g, 32);
    const auto nm = spde::default_mu(b, 0.0, 1.5, 4, 1);
    spde::SimConfig cfg;
    cfg.T = 0.05;
    const auto tr = spde::simulate_path(bump(g), cfg, Nonlinearity::power_law(2.0), nm, b, 0);
    for (std::size_t n = 1; n < tr.steps.size(); ++n) CHECK(tr.steps[n].hminus_sq <= tr.steps[n - 1].hminus_sq + 1e-10);
}

TEST_CASE("paths are reproducible and independent of threading") {
    const Grid g(1, 63);
    const SpectralBasis b(g, 16);
    const auto nm = spde::default_mu(b, 0.5, 1.5, 8, 5);
    const auto nl = Nonlinearity::power_law(2.0);
    spde::SimConfig cfg;
    cfg.T = 0.02;
    cfg.record_every = 5;
    const auto a = spde::run_ensemble(bump(g), cfg, nl, nm, b, 5, 1);
    const auto c = spde::run_ensemble(bump(g), cfg, nl, nm, b, 5, 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].path_index == i);
        CHECK(bit_equal(*a[i].final_state, *c[i].final_state));
        CHECK(a[i].snapshots.size() == 5);
    }
    const auto stored = spde::generate_path(nm, 2, cfg.dt, cfg.n_steps());
    CHECK(bit_equal(*spde::simulate_path(bump(g), cfg, nl, nm, b, stored).final_state, *a[2].final_state));
    CHECK(bit_equal(*spde::simulate_regularized(bump(g), 0.0, cfg, nl, nm, b, 2).final_state, *a[2].final_state));

    const auto wrong = spde::generate_path(spde::default_mu(b, 0.5, 1.5, 8, 6), 2, cfg.dt, cfg.n_steps());
    CHECK_THROWS_AS(spde::simulate_path(bump(g), cfg, nl, nm, b, wrong), spde::ConfigError);
}

TEST_CASE("odd beta: negated data gives the negated path") {
    const Grid g(1, 63);
    const SpectralBasis b(g, 16);
    const auto nm = spde::default_mu(b, 0.5, 1.5, 8, 5);
    spde::SimConfig cfg;
    cfg.T = 0.02;
    const auto nl = Nonlinearity::power_law(2.0);
    const auto p = spde::simulate_path(bump(g), cfg, nl, nm, b, 1);
    const auto q = spde::simulate_path(-bump(g), cfg, nl, nm, b, 1);
    for (std::size_t i = 0; i < g.n(); ++i) CHECK((*q.final_state)[i] == doctest::Approx(-(*p.final_state)[i]).epsilon(1e-9).scale(1e-12));
    double mx = 0.0;
    for (double v : q.final_state->values()) mx = std::max(mx, v);
    CHECK(mx <= 1e-8);
}

TEST_CASE("mild exponential scheme converges to the implicit one as dt shrinks") {
    const Grid g(1, 63);
    const SpectralBasis b(g, 16);
    const auto nm = spde::default_mu(b, 0.0, 1.5, 8, 5);
    const auto nl = Nonlinearity::power_law(2.0);
    double prev = 1e300;
    for (double dt : {2e-3, 1e-3, 5e-4}) {
        spde::SimConfig cfg;
        cfg.T = 0.02;
        cfg.dt = dt;
        cfg.epsilon = 2e-3;
        const auto a = spde::simulate_path(bump(g), cfg, nl, nm, b, 0);
        cfg.scheme = spde::Scheme::mild_exponential;
        const auto m = spde::simulate_path(bump(g), cfg, nl, nm, b, 0);
        const double diff = spde::hminus_norm(b, *a.final_state - *m.final_state);
        CHECK(diff < prev);
        prev = diff;
    }
}

TEST_CASE("regularization with large lambda behaves like heat flow") {
    const Grid g(1, 63);
    const SpectralBasis b(g, 63);
    const auto nm = spde::default_mu(b, 0.0, 1.5, 4, 1);
    spde::SimConfig cfg;
    cfg.T = 0.01;
    cfg.dt = 1e-4;
    cfg.epsilon = 1e-4;
    const double lam = 5.0;
    const Field x0(g, b.mode(0));
    const auto tr = spde::simulate_regularized(x0, lam, cfg, Nonlinearity::power_law(1.0), nm, b, 0);
    const double l = b.eigenvalue(0);
    const double rate = (1.0 + lam) * l;
    const auto c = spde::to_spectral(b, *tr.final_state);
    CHECK(c[0] == doctest::Approx(std::exp(-rate * cfg.T)).epsilon(0.01));
}

TEST_CASE("Picard iteration") {
    const Grid g(1, 63);
    const SpectralBasis b(g, 16);
    const auto nl = Nonlinearity::power_law(2.0);
    spde::SimConfig cfg;
    cfg.T = 0.02;
    cfg.inner = spde::InnerSolve::resolvent_identity;

    // no noise: the map ignores its input, so the second difference vanishes
    const auto quiet = spde::default_mu(b, 0.0, 1.5, 8, 1);
    std::vector<spde::NoisePath> qp{spde::generate_path(quiet, 0, cfg.dt, cfg.n_steps())};
    const auto rq = spde::picard_construct(bump(g), qp, 3, cfg, nl, quiet, b);
    CHECK(rq.d.size() == 3);
    CHECK(rq.d[1] == 0.0);

    const auto nm = spde::default_mu(b, 0.5, 1.5, 8, 1);
    std::vector<spde::NoisePath> paths;
    for (std::size_t i = 0; i < 3; ++i) paths.push_back(spde::generate_path(nm, i, cfg.dt, cfg.n_steps()));
    const auto r = spde::picard_construct(bump(g), paths, 4, cfg, nl, nm, b);
    CHECK(r.n_paths == 3);
    for (std::size_t i = 1; i + 1 < r.d.size(); ++i) CHECK(r.d[i + 1] < r.d[i]);
    CHECK(r.geometric_ratio < 1.0);
    CHECK_THROWS_AS(spde::picard_construct(bump(g), paths, 1, cfg, nl, nm, b), spde::ConfigError);
}
