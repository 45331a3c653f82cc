#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <doctest.h>

#include "levy/solver.hpp"

using namespace levy;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Field smooth_random(const Grid1D& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double a[4], b[4], norm = 0.0;
    for (int k = 0; k < 4; ++k) {
        a[k] = U(rng) / (k + 1);
        b[k] = U(rng) / (k + 1);
        norm += std::abs(a[k]) + std::abs(b[k]);
    }
    return Field::sample(g, [&](double x) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) {
            const double w = kTwoPi * (k + 1) * x / g.length();
            s += a[k] * std::cos(w) + b[k] * std::sin(w);
        }
        return s / norm;
    });
}

SolverConfig mixed_config(const Grid1D& g) {
    SolverConfig c;
    c.grid = g;
    c.flux = FluxModel::burgers();
    c.diffusion = DiffusionModel::power(2.0, 0.1);
    c.quad = build_quadrature(LevyMeasure::fractional_truncated(0.8, 1.0), g.spacing(), g.spacing(), 1.0);
    c.rho = 1e-3;
    c.t_end = 0.05;
    c.state_interval = Interval{-1.5, 1.5};
    return c;
}

// Frozen reference: Engquist-Osher Burgers with no other terms, written out directly.
std::vector<double> reference_burgers_step(const std::vector<double>& u, double dt, double h) {
    const std::size_t n = u.size();
    auto F = [](double a, double b) {
        const double p = std::max(a, 0.0), m = std::min(b, 0.0);
        return 0.5 * (p * p) + 0.5 * (m * m);
    };
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t up = (i + 1) % n, down = (i + n - 1) % n;
        out[i] = u[i] - dt / h * (F(u[i], u[up]) - F(u[down], u[i]));
    }
    return out;
}

}  // namespace

TEST_CASE("cfl time step") {
    SolverConfig c;
    c.grid = Grid1D(64, 1.0);
    c.t_end = 0.3;
    CHECK(cfl_dt(c, Interval{-1, 1}) == 0.3);

    const double W = 5.0, h = c.grid.spacing();
    c.quad = build_quadrature(LevyMeasure::point_masses({{2.0 * h, W / 2.0}}), h, h, 1.0);
    CHECK(c.quad.total_rate() == doctest::Approx(W));
    CHECK(cfl_dt(c, Interval{-1, 1}) == doctest::Approx(0.9 / W));

    SolverConfig d;
    d.t_end = 1.0;
    d.diffusion = DiffusionModel::constant(1.0);
    d.grid = Grid1D(64, 1.0);
    d.quad = LevyQuadrature::none(d.grid.spacing());
    const double coarse = cfl_dt(d, Interval{-1, 1});
    d.grid = Grid1D(128, 1.0);
    d.quad = LevyQuadrature::none(d.grid.spacing());
    CHECK(cfl_dt(d, Interval{-1, 1}) >= coarse / 4.0 * (1.0 - 1e-14));
}

TEST_CASE("identity and constant data") {
    const Grid1D g(32, 1.0);
    SolverConfig c;
    c.grid = g;
    c.quad = LevyQuadrature::none(g.spacing());
    c.t_end = 1.0;
    const Field u = smooth_random(g, 1);
    const Field same = step(u, c, 0.1);
    for (std::size_t i = 0; i < g.n_cells(); ++i) CHECK(same[i] == u[i]);

    const SolverConfig m = mixed_config(g);
    const Field k = Field::constant(g, 0.3);
    const Field kk = step(k, m, cfl_dt(m));
    for (std::size_t i = 0; i < g.n_cells(); ++i) CHECK(kk[i] == 0.3);
}

TEST_CASE("heat mode decays at the exact rate") {
    const Grid1D g(256, 1.0);
    SolverConfig c;
    c.grid = g;
    c.rho = 0.05;
    c.t_end = 0.01;
    c.quad = LevyQuadrature::none(g.spacing());
    const Field u0 = Field::sample(g, [](double x) { return std::sin(kTwoPi * x); });
    const Trajectory tr = solve(c, u0);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < g.n_cells(); ++i) {
        num += tr.final()[i] * u0[i];
        den += u0[i] * u0[i];
    }
    const double expect = std::exp(-c.rho * kTwoPi * kTwoPi * c.t_end);
    CHECK(std::abs(num / den / expect - 1.0) < 0.02);
}

TEST_CASE("conservation and maximum principle") {
    const Grid1D g(128, 2.0);
    SolverConfig c = mixed_config(g);
    c.snapshot_times = {0.01, 0.02, 0.03, 0.04};
    const Field u0 = smooth_random(g, 3);
    const Trajectory tr = solve(c, u0);
    CHECK(tr.size() == 6);
    for (const Field& f : tr.snapshots()) {
        CHECK(std::abs(mass(f) - mass(u0)) <= 1e-12 * std::max(1.0, l1_distance(u0, Field::constant(g, 0.0))));
        CHECK(min_value(f) >= min_value(u0) - 1e-12);
        CHECK(max_value(f) <= max_value(u0) + 1e-12);
    }
    CHECK(tr.times() == std::vector<double>{0.0, 0.01, 0.02, 0.03, 0.04, 0.05});
}

TEST_CASE("monotonicity and L1 contraction step by step") {
    const Grid1D g(128, 2.0);
    SolverConfig c = mixed_config(g);
    c.record_steps = true;
    const Field u0 = smooth_random(g, 4);
    std::vector<double> shifted(u0.values().begin(), u0.values().end());
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += 0.1 + 0.05 * std::sin(kTwoPi * g.x(i) / 2.0);
    const Field v0(g, shifted);
    const Field w0 = smooth_random(g, 5);
    const Trajectory U = solve(c, u0), V = solve(c, v0), W = solve(c, w0);
    REQUIRE(U.size() == V.size());
    REQUIRE(U.size() == W.size());
    double prev_l1 = l1_distance(u0, w0), prev_pos = positive_part_mass(u0, w0);
    for (std::size_t k = 0; k < U.size(); ++k) {
        for (std::size_t i = 0; i < g.n_cells(); ++i) CHECK(U[k][i] <= V[k][i]);
        const double l1 = l1_distance(U[k], W[k]), pos = positive_part_mass(U[k], W[k]);
        CHECK(l1 <= prev_l1 * (1.0 + 1e-10));
        CHECK(pos <= prev_pos * (1.0 + 1e-10) + 1e-15);
        prev_l1 = l1;
        prev_pos = pos;
    }
}

TEST_CASE("pure Burgers matches the frozen reference bit for bit") {
    const Grid1D g(64, 1.0);
    SolverConfig c;
    c.grid = g;
    c.flux = FluxModel::burgers();
    c.t_end = 0.2;
    c.quad = LevyQuadrature::none(g.spacing());
    c.state_interval = Interval{-1.0, 1.0};
    const Field u0 = smooth_random(g, 6);
    const Scheme s(c, *c.state_interval);
    std::vector<double> ref(u0.values().begin(), u0.values().end()), cur = ref, next(ref.size());
    for (int k = 0; k < 40; ++k) {
        s.step(cur, s.dt(), next);
        cur.swap(next);
        ref = reference_burgers_step(ref, s.dt(), g.spacing());
    }
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(cur[i] == ref[i]);
}

TEST_CASE("parallel and serial steps agree bit for bit") {
    const Grid1D g(256, 2.0);
    const SolverConfig c = mixed_config(g);
    const Scheme s(c, *c.state_interval);
    const Field u0 = smooth_random(g, 7);
    std::vector<double> a(u0.values().begin(), u0.values().end()), b = a, ta(a.size()), tb(a.size());
    for (int k = 0; k < 20; ++k) {
        s.step(a, s.dt(), ta);
        s.step_serial(b, s.dt(), tb);
        a.swap(ta);
        b.swap(tb);
    }
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("zero horizon returns the datum") {
    SolverConfig c;
    c.t_end = 0.0;
    const Field u0 = smooth_random(c.grid, 8);
    const Trajectory tr = solve(c, u0);
    CHECK(tr.size() == 1);
    CHECK(tr.final()[3] == u0[3]);
}

TEST_CASE("pre-shock Burgers converges at first order") {
    auto run = [](std::size_t n) {
        SolverConfig c;
        c.grid = Grid1D(n, 1.0);
        c.flux = FluxModel::burgers();
        c.t_end = 0.05;
        c.quad = LevyQuadrature::none(c.grid.spacing());
        return solve(c, Field::sample(c.grid, [](double x) { return 0.5 * std::sin(kTwoPi * x); })).final();
    };
    auto restrict_to = [](const Field& fine, const Grid1D& coarse) {
        std::vector<double> v(coarse.n_cells());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * (fine[2 * i] + fine[2 * i + 1]);
        return Field(coarse, v);
    };
    const Field u128 = run(128), u256 = run(256), u512 = run(512);
    const double e1 = l1_distance(u128, restrict_to(u256, u128.grid()));
    const double e2 = l1_distance(u256, restrict_to(u512, u256.grid()));
    CHECK(e1 / e2 > 1.6);
    CHECK(e1 / e2 < 2.6);
}

TEST_CASE("config validation") {
    SolverConfig c;
    c.rho = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.rho = 0.0;
    c.quad = LevyQuadrature::none(0.5);
    CHECK_THROWS_AS(c.validate(), GridMismatch);
    SolverConfig d;
    d.t_end = 1.0;
    d.state_interval = Interval{-0.1, 0.1};
    CHECK_THROWS_AS(solve(d, Field::constant(d.grid, 1.0)), PreconditionError);
}
