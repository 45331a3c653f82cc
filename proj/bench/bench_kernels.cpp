#include <cmath>
#include <numbers>
#include <vector>

#include <benchmark/benchmark.h>

#include "levy/nonlocal.hpp"
#include "levy/solver.hpp"

using namespace levy;

namespace {

struct Setup {
    Grid1D grid;
    LevyQuadrature quad;
    std::vector<double> u;

    explicit Setup(std::size_t n)
        : grid(n, 2.0),
          quad(build_quadrature(LevyMeasure::fractional_truncated(0.5, 1.0), grid.spacing(), grid.spacing(), 1.0)),
          u(n) {
        for (std::size_t i = 0; i < n; ++i) u[i] = std::sin(std::numbers::pi * grid.x(i)) + 0.3 * std::cos(5.0 * grid.x(i));
    }
};

void levy_parallel(benchmark::State& state) {
    const Setup s(static_cast<std::size_t>(state.range(0)));
    std::vector<double> out(s.u.size());
    for (auto _ : state) {
        kernels::apply_levy(s.u, s.quad, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(s.u.size()));
}

void levy_serial(benchmark::State& state) {
    const Setup s(static_cast<std::size_t>(state.range(0)));
    std::vector<double> out(s.u.size());
    for (auto _ : state) {
        kernels::apply_levy_serial(s.u, s.quad, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(s.u.size()));
}

Scheme mixed_scheme(const Setup& s) {
    SolverConfig c;
    c.grid = s.grid;
    c.flux = FluxModel::burgers();
    c.diffusion = DiffusionModel::power(2.0, 0.1);
    c.quad = s.quad;
    c.rho = 1e-3;
    c.t_end = 0.1;
    return Scheme(c, Interval{-1.5, 1.5});
}

void step_parallel(benchmark::State& state) {
    const Setup s(static_cast<std::size_t>(state.range(0)));
    const Scheme scheme = mixed_scheme(s);
    std::vector<double> out(s.u.size());
    for (auto _ : state) {
        scheme.step(s.u, scheme.dt(), out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(s.u.size()));
}

void step_serial(benchmark::State& state) {
    const Setup s(static_cast<std::size_t>(state.range(0)));
    const Scheme scheme = mixed_scheme(s);
    std::vector<double> out(s.u.size());
    for (auto _ : state) {
        scheme.step_serial(s.u, scheme.dt(), out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(s.u.size()));
}

}  // namespace

BENCHMARK(levy_serial)->RangeMultiplier(4)->Range(256, 4096);
BENCHMARK(levy_parallel)->RangeMultiplier(4)->Range(256, 4096);
BENCHMARK(step_serial)->RangeMultiplier(4)->Range(256, 4096);
BENCHMARK(step_parallel)->RangeMultiplier(4)->Range(256, 4096);

BENCHMARK_MAIN();
