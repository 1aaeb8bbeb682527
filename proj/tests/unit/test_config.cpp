#include <doctest.h>

#include <string>

#include "spde/config.hpp"
#include "spde/error.hpp"

using spde::parse_config;

namespace {
std::string error_of(const std::string& text) {
    try {
        parse_config(text, "t.ini");
    } catch (const spde::ConfigError& e) {
        return e.what();
    }
    return {};
}
}  // namespace

TEST_CASE("defaults and simple overrides") {
    const auto c = parse_config("# comment\n[grid]\nn = 127 ; trailing\n[noise]\nmubar = 0.3\n", "t.ini");
    CHECK(c.n == 127);
    CHECK(c.mubar == 0.3);
    CHECK(c.K == 64);
    CHECK(c.kind == spde::ExperimentKind::simulate);
}

TEST_CASE("errors name the file and line") {
    CHECK(error_of("[grid]\nbogus = 1\n").find("t.ini:2") != std::string::npos);
    CHECK(error_of("[nowhere]\n").find("t.ini:1") != std::string::npos);
    CHECK(error_of("[grid]\nn = 127\nn = 255\n").find("t.ini:3") != std::string::npos);
    CHECK(error_of("[grid]\nn =\n").find("t.ini:2") != std::string::npos);
    CHECK_FALSE(error_of("[ensemble]\nn_paths = 0\n").empty());
    CHECK_FALSE(error_of("[grid]\nn = 100\n").empty());
    CHECK_FALSE(error_of("[sim]\nT = 0.1\ndt = 0.003\n").empty());
    CHECK_FALSE(error_of("[noise]\nK_noise = 100\n").empty());
    CHECK_FALSE(error_of("[experiment]\nkind = dance\n").empty());
    CHECK_FALSE(error_of("[initial]\nmodes = 0:1\n").empty());
}

TEST_CASE("canonical text and JSON round-trip") {
    const std::string text = R"(
[grid]
n = 127
[nonlinearity]
kind = power_plus_linear
m = 3
a = 0.25
[noise]
mubar = 0.1
seed = 18446744073709551615
[sim]
T = 0.05
dt = 0.001
epsilon = 0.002
scheme = mild-exponential
inner = resolvent-identity
record_every = 5
[initial]
kind = sine
modes = 1:1, 3:0.5
[experiment]
kind = converge-eps
eps_list = 0.1, 0.05, 0.025
[output]
export_noise = true
)";
    const auto c = parse_config(text, "t.ini");
    CHECK(c.seed == 18446744073709551615ull);
    CHECK(c.modes.size() == 2);
    const auto again = parse_config(spde::to_ini(c), "again");
    CHECK(spde::to_ini(again) == spde::to_ini(c));
    const auto via_json = spde::config_from_json(spde::to_json(c));
    CHECK(spde::to_ini(via_json) == spde::to_ini(c));
    CHECK(spde::to_json(c)["sim"]["n_steps"] == 50);
}

TEST_CASE("shortest round-trip formatting") {
    for (double v : {0.1, 1e-3, 1.0 / 3.0, 6.02214076e23, -0.0})
        CHECK(std::stod(spde::format_double(v)) == v);
    CHECK(spde::format_double(0.1) == "0.1");
}

TEST_CASE("initial data builders") {
    auto c = parse_config("[grid]\nn = 63\n[basis]\nK = 16\n[noise]\nK_noise = 8\n[initial]\nkind = bump\namplitude = 2\n", "t");
    const auto g = spde::make_grid(c);
    const auto x = spde::make_initial(c, g);
    double mx = 0.0, mn = 1.0;
    for (double v : x.values()) {
        mx = std::max(mx, v);
        mn = std::min(mn, v);
    }
    CHECK(mx == doctest::Approx(2.0).epsilon(0.01));
    CHECK(mn >= 0.0);
    c.initial = "zero";
    const auto z = spde::make_initial(c, g);
    for (double v : z.values()) CHECK(v == 0.0);
}
