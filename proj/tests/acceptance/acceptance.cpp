// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "levy/harness.hpp"
#include "levy/integrate.hpp"
#include "levy/nonlocal.hpp"

using namespace levy;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

void note(Outcome& o, bool ok, const std::string& what) {
    if (!ok) o.pass = false;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += (ok ? "" : "FAILED ") + what;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

bool passed(const std::vector<Check>& checks, const std::string& name, std::string* detail = nullptr) {
    for (const auto& c : checks)
        if (c.name == name) {
            if (detail) *detail = c.detail;
            return c.status == Status::pass;
        }
    return false;
}

const char* desk_name(DeskConfig d) {
    switch (d) {
    case DeskConfig::burgers: return "burgers";
    case DeskConfig::degenerate: return "degenerate";
    case DeskConfig::fractal: return "fractal";
    case DeskConfig::mixed: return "mixed";
    }
    return "?";
}

constexpr DeskConfig kDesk[] = {DeskConfig::burgers, DeskConfig::degenerate, DeskConfig::fractal, DeskConfig::mixed};

std::vector<LevyMeasure> symbol_measures() {
    return {LevyMeasure::fractional_truncated(0.5, 1.0), LevyMeasure::fractional_truncated(1.0, 1.0),
            LevyMeasure::fractional_truncated(1.5, 1.0)};
}

Outcome criterion_operator_validity() {
    Outcome o;
    auto measures = symbol_measures();
    measures.push_back(LevyMeasure::fractional_full(1.5, 1.0));
    for (const auto& m : measures) {
        ExperimentConfig cfg = opcheck_preset(m);
        cfg.resolutions = {64, 128};  // the symbol part is criterion 2
        const auto r = run_opcheck(cfg);
        for (const char* name : {"adjoint", "explicit_matrix", "constant_kernel", "zero_sum", "dissipative"}) {
            std::string d;
            const bool ok = passed(r.checks, name, &d);
            if (!ok) note(o, false, m.describe() + " " + name + ": " + d);
        }
        double worst = 0.0;
        for (double a : r.adjoint_relative) worst = std::max(worst, a);
        note(o, true, m.describe() + " adjoint " + fmt(worst) + " <u,Lu> max " + fmt(r.max_dissipation));
    }
    return o;
}

Outcome criterion_symbol() {
    Outcome o;
    for (const auto& m : symbol_measures()) {
        ExperimentConfig cfg = opcheck_preset(m);
        cfg.samples = 1;
        const auto r = run_opcheck(cfg);
        std::string d;
        const bool ok = passed(r.checks, "symbol_consistency", &d);
        note(o, ok, m.describe() + ": " + d);
    }
    return o;
}

Outcome criterion_kappa() {
    Outcome o;
    for (const auto& m : symbol_measures()) {
        ExperimentConfig cfg = opcheck_preset(m);
        cfg.samples = 1;
        const auto r = run_opcheck(cfg);
        std::string d;
        const bool ok = passed(r.checks, "kappa_sweep", &d);
        note(o, ok, m.describe() + ": " + d);
    }
    return o;
}

Outcome criterion_contraction() {
    Outcome o;
    for (DeskConfig d : kDesk) {
        const auto rc = run_contraction(desk_config(d, ExperimentKind::contraction));
        const auto rp = run_comparison(desk_config(d, ExperimentKind::comparison));
        std::string d1, d2, d3;
        const bool ok = passed(rc.checks, "positive_part_contraction", &d1) && passed(rc.checks, "l1_contraction", &d2) &&
                        passed(rp.checks, "comparison_principle", &d3);
        note(o, ok, std::string(desk_name(d)) + ": " + d1 + " | " + d3);
    }
    return o;
}

Outcome criterion_contdep() {
    Outcome o;
    int inconclusive = 0;
    for (Ingredient ing : {Ingredient::flux, Ingredient::sigma, Ingredient::measure_small, Ingredient::measure_large}) {
        const auto r = run_contdep(contdep_preset(ing));
        const auto& res = r.ingredients.front();
        if (res.status == Status::inconclusive) ++inconclusive;
        std::string d;
        passed(r.checks, "contdep_" + to_string(ing), &d);
        const bool ok = res.status != Status::fail && passed(r.checks, "zero_rung");
        note(o, ok, to_string(ing) + " [" + to_string(res.status) + "] " + d);
    }
    note(o, inconclusive <= 1, std::to_string(inconclusive) + " of 4 inconclusive");
    return o;
}

Outcome criterion_audit() {
    Outcome o;
    for (DeskConfig d : kDesk) {
        const auto r = run_audit(desk_config(d, ExperimentKind::audit));
        bool ok = true;
        std::string detail;
        for (const auto& c : r.checks) {
            if (c.status != Status::pass) ok = false;
            detail += " " + c.name + "=" + to_string(c.status);
        }
        std::string res;
        passed(r.checks, "entropy_residual", &res);
        note(o, ok, std::string(desk_name(d)) + ":" + detail + " (" + res + ")");
    }
    return o;
}

Outcome criterion_regularity() {
    Outcome o;
    const std::pair<RegularityCase, const char*> cases[] = {{RegularityCase::fractal_shock, "alpha 0.5 truncated"},
                                                            {RegularityCase::fractional_smooth, "alpha 1.5 full"},
                                                            {RegularityCase::burgers, "pure Burgers"}};
    for (const auto& [c, name] : cases) {
        const auto r = run_regularity(regularity_preset(c));
        note(o, passed(r.checks, "classification"),
             std::string(name) + " -> " + r.classification + " (max ratio " + fmt(r.max_ratio) + ", late deviation " +
                 fmt(r.max_late_deviation) + ")");
    }
    return o;
}

Outcome criterion_pins() {
    Outcome o;
    // Heat mode: u0 = cos(2 pi x), rho only.
    {
        SolverConfig c;
        c.grid = Grid1D(256, 1.0);
        c.rho = 0.01;
        c.t_end = 2.0;
        c.quad = LevyQuadrature::none(c.grid.spacing());
        const Field u0 = Field::sample(c.grid, [](double x) { return std::cos(2.0 * std::numbers::pi * x); });
        const Trajectory tr = solve(c, u0);
        const double amp = 2.0 * inner_product(tr.final(), u0);
        const double expect = std::exp(-c.rho * 4.0 * std::numbers::pi * std::numbers::pi * c.t_end);
        const double rel = std::abs(amp / expect - 1.0);
        note(o, rel < 0.02, "heat decay relative error " + fmt(rel));
    }
    // Small-jump moment closed forms against direct quadrature of z^2 m(z).
    {
        double worst = 0.0;
        for (double alpha : {0.3, 0.5, 1.0, 1.5, 1.9})
            for (double kappa : {0.01, 0.1, 0.5}) {
                const double s = 0.7;
                const auto m = LevyMeasure::fractional_truncated(alpha, s);
                const double oracle =
                    2.0 * quad::endpoint_singular([&](double z) { return s * std::pow(z, 1.0 - alpha); }, 0.0, kappa);
                worst = std::max(worst, std::abs(small_jump_moment(m, kappa) - oracle));
            }
        note(o, worst < 1e-10, "small_jump_moment max deviation " + fmt(worst));
    }
    // Taylor identity on random triples.
    {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        const std::vector<EntropyProfile> profiles{
            EntropyProfile::quadratic(), EntropyProfile::exponential(),
            EntropyProfile::kruzkov({0.1, KruzkovRegularization::Variant::plus}),
            EntropyProfile::kruzkov({0.01, KruzkovRegularization::Variant::minus}),
            EntropyProfile::kruzkov({0.05, KruzkovRegularization::Variant::signed_})};
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const auto& p = profiles[k % profiles.size()];
            const double a = U(rng), b = U(rng), c = 0.5 * U(rng);
            const double taylor = p.eta(b - c) - p.eta(a - c) - p.prime(a - c) * (b - a);
            const double lhs = eta_bar_double_prime(p, a, b, c) * (b - a) * (b - a);
            worst = std::max(worst, std::abs(lhs - taylor));
        }
        note(o, worst < 1e-10, "Taylor identity max residual " + fmt(worst));
    }
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "operator validity", 10.0, criterion_operator_validity},
        {2, "symbol consistency", 30.0, criterion_symbol},
        {3, "kappa-split echo", 10.0, criterion_kappa},
        {4, "contraction and comparison", 300.0, criterion_contraction},
        {5, "continuous-dependence scaling", 900.0, criterion_contdep},
        {6, "entropy audit", 600.0, criterion_audit},
        {7, "regularity dichotomy", 600.0, criterion_regularity},
        {8, "analytic pins", 60.0, criterion_pins},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.limit_s) note(o, false, "runtime " + fmt(secs) + " s over the " + fmt(c.limit_s) + " s budget");
        if (!o.pass) ++failures;
        std::printf("criterion %d %s: %s [%.1f s] %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
