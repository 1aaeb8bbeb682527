#include <cmath>
#include <numbers>

#include <benchmark/benchmark.h>

#include "spde/hminus.hpp"
#include "spde/noise.hpp"
#include "spde/resolvent.hpp"
#include "spde/stepper.hpp"

namespace {

spde::Field bump(const spde::Grid& g) {
    return spde::Field::sample(g, [](double x) {
        const double q = 1.0 - (x - 0.5) * (x - 0.5) / 0.0625;
        return q > 0.0 ? q * q : 0.0;
    });
}

void BM_SineTransform(benchmark::State& st) {
    const spde::Grid g(1, static_cast<std::size_t>(st.range(0)));
    const spde::SpectralBasis basis(g, 32);
    const spde::Field x = bump(g);
    std::vector<double> c(g.size());
    for (auto _ : st) {
        basis.forward(x.values(), c);
        benchmark::DoNotOptimize(c.data());
    }
}
BENCHMARK(BM_SineTransform)->Arg(255)->Arg(511)->Arg(2047);

void BM_HminusNorm(benchmark::State& st) {
    const spde::Grid g(1, static_cast<std::size_t>(st.range(0)));
    const spde::SpectralBasis basis(g, 32);
    const spde::Field x = bump(g);
    for (auto _ : st) benchmark::DoNotOptimize(spde::hminus_norm_sq(basis, x.values()));
}
BENCHMARK(BM_HminusNorm)->Arg(255)->Arg(511);

void BM_ResolventPorous(benchmark::State& st) {
    const spde::Grid g(1, static_cast<std::size_t>(st.range(0)));
    const spde::SpectralBasis basis(g, 32);
    const auto nl = spde::Nonlinearity::power_law(2.0);
    const spde::Field x = bump(g);
    spde::ResolventConfig cfg;
    cfg.epsilon = 1e-2;
    for (auto _ : st) benchmark::DoNotOptimize(spde::resolvent_solve(x, cfg, nl, basis).residual);
}
BENCHMARK(BM_ResolventPorous)->Arg(255)->Arg(511);

void BM_Resolvent2D(benchmark::State& st) {
    const spde::Grid g(2, 63);
    const spde::SpectralBasis basis(g, 8);
    const auto nl = spde::Nonlinearity::power_law(2.0);
    const spde::Field x = spde::Field::sample(g, [](double a, double b) { return std::sin(std::numbers::pi * a) * std::sin(std::numbers::pi * b); });
    spde::ResolventConfig cfg;
    cfg.epsilon = 1e-2;
    for (auto _ : st) benchmark::DoNotOptimize(spde::resolvent_solve(x, cfg, nl, basis).residual);
}
BENCHMARK(BM_Resolvent2D);

void BM_Step(benchmark::State& st) {
    const spde::Grid g(1, 255);
    const spde::SpectralBasis basis(g, 64);
    const auto nl = spde::Nonlinearity::power_law(2.0);
    const auto nm = spde::default_mu(basis, 0.5, 1.5, 32, 7);
    spde::SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.inner = st.range(0) == 0 ? spde::InnerSolve::fixed_point : spde::InnerSolve::resolvent_identity;
    const spde::Field x = bump(g);
    std::vector<double> dw(nm.size());
    spde::brownian_increments(nm, 0, 0, cfg.dt, dw);
    for (auto _ : st) benchmark::DoNotOptimize(spde::step_semi_implicit(x, dw, cfg, nl, nm, basis).inner_iterations);
}
BENCHMARK(BM_Step)->Arg(0)->Arg(1);

void BM_NoiseIncrements(benchmark::State& st) {
    const spde::Grid g(1, 255);
    const spde::SpectralBasis basis(g, 64);
    const auto nm = spde::default_mu(basis, 0.5, 1.5, 32, 7);
    std::vector<double> dw(nm.size());
    std::uint64_t step = 0;
    for (auto _ : st) {
        spde::brownian_increments(nm, 3, step++, 1e-3, dw);
        benchmark::DoNotOptimize(dw.data());
    }
}
BENCHMARK(BM_NoiseIncrements);

}  // namespace

BENCHMARK_MAIN();
