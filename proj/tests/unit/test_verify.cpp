#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "spde/barenblatt.hpp"
#include "spde/error.hpp"
#include "spde/hminus.hpp"
#include "spde/verify.hpp"

using spde::Field;
using spde::Grid;
using spde::SpectralBasis;

TEST_CASE("phi vanishes exactly on nonnegative fields") {
    const Grid g(1, 63);
    const Field pos = Field::sample(g, [](double x) { return x * (1 - x); });
    CHECK(spde::phi(pos, 4.0) == 0.0);
    const Field neg = -1.0 * pos;
    CHECK(spde::phi(neg, 4.0) > 0.0);
    CHECK(spde::phi(neg, 2.0) == doctest::Approx(0.5 * std::pow(spde::lp_norm(pos, 2.0), 2)));
}

TEST_CASE("phi gradient matches a directional difference") {
    const Grid g(1, 127);
    std::mt19937_64 rng(4);
    const Field x(g, oracle::random_field(g.n(), rng, 0));
    const Field v = Field::sample(g, [](double s) { return std::sin(5.0 * s) + s; });
    const double d = 1e-6;
    const double fd = (spde::phi(x + d * v, 4.0) - spde::phi(x, 4.0)) / d;
    const Field grad = spde::phi_gradient(x, 4.0);
    double an = 0.0;
    for (std::size_t i = 0; i < g.n(); ++i) an += g.h() * grad[i] * v[i];
    CHECK(fd == doctest::Approx(an).epsilon(1e-4));
}

TEST_CASE("mollifier") {
    const Grid g(1, 127);
    const SpectralBasis b(g, 127);
    std::mt19937_64 rng(8);
    const Field x(g, oracle::random_field(g.n(), rng, 1));
    const Field same = spde::mollify(b, x, 0.0);
    for (std::size_t i = 0; i < g.n(); ++i) CHECK(same[i] == x[i]);

    const Field e(g, b.mode(3));
    const Field me = spde::mollify(b, e, 0.01);
    for (std::size_t i = 0; i < g.n(); ++i) CHECK(std::abs(me[i] - e[i] / (1 + 0.01 * b.eigenvalue(3))) < 1e-13);

    const Field bumpy(g, oracle::random_field(g.n(), rng, 2));
    const Field signed_x = bumpy - Field(g, std::vector<double>(g.n(), 0.5));
    double prev = std::abs(spde::phi(spde::mollify(b, signed_x, 0.1), 4.0) - spde::phi(signed_x, 4.0));
    for (double lam : {0.4, 0.2, 0.1, 0.05, 0.01, 0.001}) {
        const Field m = spde::mollify(b, x, lam);
        for (double p : {2.0, 4.0}) CHECK(spde::lp_norm(m, p) <= spde::lp_norm(x, p) * (1 + 1e-9));
    }
    for (double lam : {0.01, 1e-3, 1e-4, 1e-5}) {
        const double gap = std::abs(spde::phi(spde::mollify(b, signed_x, lam), 4.0) - spde::phi(signed_x, 4.0));
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK_THROWS_AS(spde::mollify(b, x, -1.0), spde::DomainError);
}

TEST_CASE("mean and confidence half-width") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto m = spde::mean_ci(v);
    CHECK(m.mean == 2.5);
    CHECK(m.half_width == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0));
}

TEST_CASE("convergence reports") {
    const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
    // gap ~ eps^2 in squared distance means order 1 in norm
    const std::vector<double> gaps{1e-2, 2.5e-3, 6.25e-4};
    const std::vector<double> bounds{0.8, 1.2};
    const auto r = spde::epsilon_convergence_report(eps, gaps, &bounds);
    CHECK(r.pass);
    CHECK(r.constants["order"].get<double>() == doctest::Approx(1.0));
    CHECK_FALSE(spde::epsilon_convergence_report(eps, {1e-2, 1e-2, 1e-3}).pass);

    const std::vector<double> lam{0.4, 0.2, 0.1, 0.05};
    std::vector<double> sq;
    for (double l : lam) sq.push_back(3.0 * l * l);
    const auto lr = spde::lambda_convergence_report(lam, sq, 1.5, 2.5);
    CHECK(lr.pass);
    CHECK(lr.constants["slope"].get<double>() == doctest::Approx(2.0));
    CHECK(spde::loglog_slope(lam, sq) == doctest::Approx(2.0));

    spde::PicardReport pr;
    pr.d = {1.0, 0.1, 0.01, 0.02};
    CHECK(spde::picard_report(pr, 0, 2).pass);
    CHECK_FALSE(spde::picard_report(pr, 0, 3).pass);
}

TEST_CASE("report serialisation") {
    spde::Report r;
    r.estimate = "energy";
    r.reference = "energy bound";
    r.pass = true;
    r.margin = 0.25;
    const auto j = spde::reports_to_json({r});
    CHECK(j["pass"] == true);
    CHECK(j["reports"][0]["estimate"] == "energy");
    CHECK(j["reports"][0]["margin"] == 0.25);
    r.pass = false;
    CHECK(spde::reports_to_json({r})["pass"] == false);
}

TEST_CASE("Barenblatt profile") {
    spde::BarenblattParams bp;
    const Grid g(1, 255);
    // zero elapsed time: the profile is compared with itself
    const Field u = spde::barenblatt_profile(g, bp, bp.t0);
    double mass0 = 0.0, mass1 = 0.0;
    for (double v : u.values()) mass0 += g.h() * v;
    const Field later = spde::barenblatt_profile(g, bp, bp.t1);
    for (double v : later.values()) mass1 += g.h() * v;
    CHECK(mass0 == doctest::Approx(mass1).epsilon(1e-2));
    CHECK(spde::barenblatt_radius(bp, bp.t1) > spde::barenblatt_radius(bp, bp.t0));
    CHECK(spde::barenblatt_value(bp, bp.t0, bp.center + 2 * spde::barenblatt_radius(bp, bp.t0)) == 0.0);

    spde::BarenblattParams same = bp;
    same.t1 = same.t0;
    const auto r = spde::barenblatt_compare(u, same, 0.02);
    CHECK(r.pass);
    CHECK(r.constants["relative_l2_error"].get<double>() < 1e-14);

    bp.C = 5.0;
    bp.t1 = 1.0;
    CHECK_THROWS_AS(spde::barenblatt_compare(u, bp, 0.02), spde::InvalidExperiment);
}
