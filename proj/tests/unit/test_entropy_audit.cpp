#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "levy/entropy_audit.hpp"
#include "levy/solver.hpp"

using namespace levy;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SolverConfig config(const Grid1D& g, const DiffusionModel& d, const LevyMeasure& m) {
    SolverConfig c;
    c.grid = g;
    c.flux = FluxModel::burgers();
    c.diffusion = d;
    c.quad = m.empty() ? LevyQuadrature::none(g.spacing()) : build_quadrature(m, g.spacing(), g.spacing(), 1.0);
    c.t_end = 0.1;
    c.record_steps = true;
    c.state_interval = Interval{-1.0 - 1e-6, 1.0 + 1e-6};
    return c;
}

Field datum(const Grid1D& g) {
    return Field::sample(g, [&](double x) { return 0.6 * std::sin(kTwoPi * x / g.length()) + 0.3 * std::cos(2 * kTwoPi * x / g.length()); });
}

const Interval I{-1.0 - 1e-6, 1.0 + 1e-6};

}  // namespace

TEST_CASE("test functions vanish at the ramp end and stay nonnegative") {
    const auto phi = TestFunction::bump(1.0, 0.5, 0.1);
    CHECK(phi.time(0.1) == 0.0);
    CHECK(phi.time(0.2) == 0.0);
    for (double x = 0.0; x < 2.0; x += 0.01) CHECK(phi.value(0.03, x, 2.0) >= 0.0);
    CHECK(phi.space(1.0, 2.0) == doctest::Approx(1.0));
    CHECK(phi.space(0.4, 2.0) == 0.0);
}

TEST_CASE("parabolic dissipation") {
    const Grid1D g(64, 1.0);
    const auto m = LevyMeasure::none();
    const auto unit = TestFunction::unit();

    const Trajectory hyp = solve(config(g, DiffusionModel::none(), m), datum(g));
    const EntropyTriple quad(EntropyProfile::quadratic(), 0.0, FluxModel::burgers(), DiffusionModel::none(), I);
    CHECK(parabolic_dissipation(hyp, quad, DiffusionModel::none(), unit) == 0.0);

    const auto one = DiffusionModel::constant(1.0);
    SolverConfig c = config(g, one, m);
    c.t_end = 0.002;
    const Trajectory par = solve(c, datum(g));
    const EntropyTriple lin(EntropyProfile::linear(), 0.0, FluxModel::burgers(), one, I);
    CHECK(parabolic_dissipation(par, lin, one, unit) == 0.0);

    // Oracle: gradient energy summed directly over the forward-Euler intervals.
    const EntropyTriple q1(EntropyProfile::quadratic(), 0.0, FluxModel::burgers(), one, I);
    const double h = g.spacing();
    double energy = 0.0;
    for (std::size_t k = 0; k + 1 < par.size(); ++k) {
        const double dt = par[k + 1].time() - par[k].time();
        for (std::size_t i = 0; i < g.n_cells(); ++i) {
            const double d = (par[k][(i + 1) % g.n_cells()] - par[k][i]) / h;
            energy += dt * h * d * d;
        }
    }
    CHECK(parabolic_dissipation(par, q1, one, unit) == doctest::Approx(energy).epsilon(1e-10));
}

TEST_CASE("fractional dissipation paths agree and match the square increments") {
    const Grid1D g(64, 1.0);
    const auto m = LevyMeasure::fractional_truncated(0.7, 1.0);
    SolverConfig c = config(g, DiffusionModel::none(), m);
    c.t_end = 0.02;
    const Trajectory tr = solve(c, datum(g));
    const EntropyTriple quad(EntropyProfile::quadratic(), 0.0, FluxModel::burgers(), DiffusionModel::none(), I);
    const auto unit = TestFunction::unit();
    const double closed = fractional_dissipation(tr, quad, c.quad, unit, JumpPath::closed_form);
    const double viaq = fractional_dissipation(tr, quad, c.quad, unit, JumpPath::quadrature);
    CHECK(closed > 0.0);
    CHECK(std::abs(closed - viaq) <= 1e-10 * closed);
    CHECK(square_increment_functional(tr, c.quad) == doctest::Approx(2.0 * closed).epsilon(1e-10));

    const EntropyTriple ex(EntropyProfile::exponential(), 0.1, FluxModel::burgers(), DiffusionModel::none(), I);
    const double ec = fractional_dissipation(tr, ex, c.quad, unit, JumpPath::closed_form);
    const double eq = fractional_dissipation(tr, ex, c.quad, unit, JumpPath::quadrature);
    CHECK(std::abs(ec - eq) <= 0.05 * ec);

    Trajectory flat(Field::constant(g, 0.4));
    flat.append(Field::constant(g, 0.4, 0.01), 0.01);
    CHECK(fractional_dissipation(flat, quad, c.quad, unit) == 0.0);
    CHECK(square_increment_functional(flat, c.quad) == 0.0);
}

TEST_CASE("constant trajectories have zero residual") {
    const Grid1D g(64, 2.0);
    const auto m = LevyMeasure::fractional_truncated(0.5, 1.0);
    SolverConfig c = config(g, DiffusionModel::power(2.0, 0.1), m);
    c.t_end = 0.05;
    const Trajectory tr = solve(c, Field::constant(g, 0.3));
    for (const auto& phi : {TestFunction::unit(), TestFunction::bump(1.0, 0.5, 0.05)}) {
        const EntropyTriple ex(EntropyProfile::exponential(), 0.0, c.flux, c.diffusion, I);
        const auto r = entropy_residual(tr, ex, c.diffusion, c.quad, phi, AuditMode::full);
        CHECK(std::abs(r.residual) < 1e-12);
        CHECK(r.n_u == 0.0);
        CHECK(r.m_u < 1e-15);
    }
    CHECK(chain_rule_residual(tr, c.diffusion, [](double u) { return u; }) == 0.0);
}

TEST_CASE("linear entropies give an equality and the quadratic entropy dissipates at shocks") {
    const Grid1D g(128, 1.0);
    SolverConfig c = config(g, DiffusionModel::none(), LevyMeasure::none());
    c.t_end = 0.4;
    const Field u0 = Field::sample(g, [](double x) { return 0.8 * std::sin(kTwoPi * x); });
    const Trajectory tr = solve(c, u0);
    const auto phi = TestFunction::bump(0.5, 0.3, 0.4);

    const EntropyTriple below(EntropyProfile::kruzkov({0.01, KruzkovRegularization::Variant::plus}), -0.9, c.flux,
                              c.diffusion, I);
    const auto lin = entropy_residual(tr, below, c.diffusion, c.quad, phi, AuditMode::full);
    CHECK(std::abs(lin.residual) < 1e-12);

    const EntropyTriple quad(EntropyProfile::quadratic(), 0.0, c.flux, c.diffusion, I);
    const auto weak = [&](double amp) {
        const Trajectory t = solve(c, Field::sample(g, [amp](double x) { return amp * std::sin(kTwoPi * x); }));
        return entropy_residual(t, quad, c.diffusion, c.quad, phi, AuditMode::full).residual;
    };
    const double r4 = weak(0.4), r8 = weak(0.8);
    CHECK(r4 > 0.0);
    CHECK(r8 > r4);
}

TEST_CASE("chain rule residual") {
    const Grid1D g(64, 1.0);
    const auto d = DiffusionModel::power(2.0, 0.1);
    SolverConfig c = config(g, d, LevyMeasure::none());
    c.t_end = 0.02;
    const Trajectory tr = solve(c, datum(g));
    CHECK(chain_rule_residual(tr, d, [](double) { return 1.0; }) == 0.0);
    CHECK(chain_rule_residual(tr, d, [](double u) { return u; }) > 0.0);

    auto at = [&](std::size_t n) {
        const Grid1D gn(n, 1.0);
        SolverConfig cn = config(gn, d, LevyMeasure::none());
        cn.t_end = 0.02;
        cn.record_steps = false;
        cn.snapshot_times = {0.005, 0.01, 0.015};
        return chain_rule_residual(solve(cn, datum(gn)), d, [](double u) { return u; });
    };
    CHECK(at(256) < at(128));
}

TEST_CASE("simpler mode preconditions") {
    const Grid1D g(32, 1.0);
    Trajectory tr(Field::sample(g, [](double x) { return std::sin(kTwoPi * x); }));
    CHECK_THROWS_AS(require_simpler_mode(tr, std::nullopt), PreconditionError);
    CHECK_NOTHROW(require_simpler_mode(tr, total_moments(LevyMeasure::fractional_truncated(0.5, 1.0))));
    CHECK_NOTHROW(require_simpler_mode(tr, total_moments(LevyMeasure::fractional_truncated(1.5, 1.0))));
    tr.append(Field::sample(g, [](double x) { return 2.0 * std::sin(kTwoPi * x); }, 0.1), 0.1);
    CHECK_THROWS_AS(require_simpler_mode(tr, total_moments(LevyMeasure::fractional_truncated(1.5, 1.0))),
                    PreconditionError);
}

TEST_CASE("battery covers the state interval") {
    const auto b = entropy_battery(Interval{-1.0, 1.0});
    REQUIRE(!b.empty());
    double lo = 1.0, hi = -1.0;
    for (const auto& e : b) {
        lo = std::min(lo, e.c);
        hi = std::max(hi, e.c);
    }
    CHECK(lo >= -1.0);
    CHECK(hi <= 1.0);
    CHECK(hi - lo > 1.0);
}
