#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <doctest.h>

#include "levy/levy_measure.hpp"

using namespace levy;

namespace {

// Oracle: tanh-sinh on r in (a, b), independent of the library's integration paths.
template <class F>
double oracle(F f, double a, double b) {
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate(f, a, b);
}

}  // namespace

TEST_CASE("integrability report") {
    CHECK(check_integrability(LevyMeasure::fractional_truncated(0.5, 1.0)).first_moment_outer == 0.0);
    CHECK(check_integrability(LevyMeasure::fractional_truncated(0.5, 1.0)).second_moment_inner ==
          doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(check_integrability(LevyMeasure::fractional_full(1.5, 1.0)).first_moment_outer ==
          doctest::Approx(4.0).epsilon(1e-12));
    const double num = 2.0 * oracle([](double z) { return std::sqrt(z); }, 0.0, 1.0);
    CHECK(check_integrability(LevyMeasure::fractional_truncated(0.5, 1.0)).second_moment_inner ==
          doctest::Approx(num).epsilon(1e-10));
}

TEST_CASE("divergent custom measure is rejected") {
    const auto m = LevyMeasure::custom([](double z) { return 1.0 / std::abs(z * z * z); }, 1.0);
    CHECK_THROWS_AS(check_integrability(m), InvalidMeasure);
}

TEST_CASE("small jump moment") {
    const auto m = LevyMeasure::fractional_truncated(0.5, 1.0);
    CHECK(small_jump_moment(m, 0.5) == doctest::Approx(4.0 / 3.0 * std::pow(0.5, 1.5)).epsilon(1e-12));
    CHECK(small_jump_moment(m, 1e-12) < 1e-16);
    double prev = 0.0;
    for (double k : {0.01, 0.05, 0.2, 0.7, 1.0, 2.0}) {
        const double s = small_jump_moment(m, k);
        CHECK(s >= prev);
        prev = s;
    }
    const auto custom = LevyMeasure::custom([](double z) { return std::exp(-z * z); }, 5.0);
    const double num = 2.0 * oracle([](double z) { return z * z * std::exp(-z * z); }, 0.0, 0.3);
    CHECK(small_jump_moment(custom, 0.3) == doctest::Approx(num).epsilon(1e-10));
}

TEST_CASE("drift correction") {
    CHECK(drift_correction(LevyMeasure::fractional_truncated(1.2, 2.0), 0.1) == 0.0);
    const double kappa = 0.3;
    const auto one_sided =
        LevyMeasure::custom([kappa](double z) { return z > kappa && z < 1.0 ? 1.0 : 0.0; }, 1.0, false);
    CHECK(drift_correction(one_sided, kappa) == doctest::Approx((1.0 - kappa * kappa) / 2.0).epsilon(1e-10));
    CHECK(drift_correction(one_sided, 1.0) == 0.0);
}

TEST_CASE("symbol") {
    const auto m = LevyMeasure::fractional_truncated(0.5, 1.0);
    CHECK(levy_symbol(m, 0.0) == 0.0);
    const double w = 1e-2;
    CHECK(levy_symbol(m, w) == doctest::Approx(-w * w * 2.0 / 3.0).epsilon(1e-5));

    const double s = fractional_symbol_strength(1.5);
    const auto full = LevyMeasure::fractional_full(1.5, s);
    CHECK(levy_symbol(full, 1.0) == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(levy_symbol(full, 2.0) / levy_symbol(full, 1.0) == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-8));

    for (double om : {0.3, 1.0, 4.0, 17.0}) {
        CHECK(levy_symbol(m, om) <= 0.0);
        CHECK(levy_symbol(m, om) == doctest::Approx(levy_symbol(m, -om)).epsilon(1e-14));
    }
    const double num = 2.0 * oracle(
                                  [](double z) {
                                      const double s = std::sin(1.5 * z);
                                      const double v = -2.0 * s * s * std::pow(z, -1.5);
                                      return std::isfinite(v) ? v : 0.0;
                                  },
                                  0.0, 1.0);
    CHECK(levy_symbol(m, 3.0) == doctest::Approx(num).epsilon(1e-9));
}

TEST_CASE("quadrature structure") {
    const double h = 1.0 / 128;
    const auto m = LevyMeasure::fractional_truncated(1.2, 0.8);
    const LevyQuadrature q = build_quadrature(m, h, h, 1.0);
    REQUIRE(q.has_jumps());
    CHECK(q.drift == 0.0);
    CHECK(q.tail_mass_dropped == 0.0);
    for (std::size_t k = 0; k < q.node_offsets.size(); ++k) {
        const std::size_t mirror = q.node_offsets.size() - 1 - k;
        CHECK(q.node_offsets[k] == -q.node_offsets[mirror]);
        CHECK(q.weights[k] == q.weights[mirror]);
        CHECK(q.weights[k] >= 0.0);
        CHECK(std::abs(q.node_offsets[k]) * h > q.split_radius);
    }
    double total = 0.0;
    for (double w : q.weights) total += w;
    const double expect = 2.0 * oracle([](double z) { return 0.8 * std::pow(z, -2.2); }, h, 1.0 + 0.5 * h);
    CHECK(total == doctest::Approx(expect).epsilon(1e-3));

    CHECK_THROWS(build_quadrature(m, h, 0.5 * h, 1.0));
}

TEST_CASE("support inside the split radius gives no nodes") {
    const double h = 0.01;
    const auto m = LevyMeasure::fractional_truncated(0.8, 1.0).restricted(0.0, 0.02);
    const LevyQuadrature q = build_quadrature(m, h, 0.05, 1.0);
    CHECK_FALSE(q.has_jumps());
    CHECK(q.small_moment == doctest::Approx(small_jump_moment(m, 0.05)));
    CHECK(q.small_moment > 0.0);
}

TEST_CASE("second moment converges under refinement") {
    const auto m = LevyMeasure::fractional_truncated(0.5, 1.0);
    const double exact = check_integrability(m).second_moment_inner;
    double prev = 1.0;
    for (double h : {1.0 / 64, 1.0 / 256, 1.0 / 1024}) {
        const LevyQuadrature q = build_quadrature(m, h, h, 1.0);
        double s = q.small_moment;
        for (std::size_t k = 0; k < q.weights.size(); ++k) {
            const double z = q.node_offsets[k] * h;
            if (std::abs(z) < 1.0) s += q.weights[k] * z * z;
        }
        const double err = std::abs(s - exact) / exact;
        CHECK(err < 0.3 * prev);
        prev = err;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("density distance of the additive perturbations") {
    const auto base = LevyMeasure::fractional_truncated(0.7, 1.0);
    const auto bump = LevyMeasure::fractional_truncated(1.9, 1.0).restricted(0.0, 0.02);
    const double norm = bump.radial_moment(2.0, 0.0, 0.02);
    const double d = 0.01;
    const auto perturbed = base + bump.scaled(d * d / norm);
    CHECK(density_distance(base, perturbed, 2.0, 0.0, 1.0) == doctest::Approx(d * d).epsilon(1e-8));
    CHECK(density_distance(base, base, 1.0, 0.0, kInf) == 0.0);
}

TEST_CASE("tail cut defaults") {
    CHECK(default_tail_cut(LevyMeasure::fractional_truncated(0.5, 1.0), 8.0) == 1.0);
    CHECK(default_tail_cut(LevyMeasure::fractional_full(1.5, 1.0), 8.0) == 4.0);
    const double h = 0.05;
    const auto q = build_quadrature(LevyMeasure::fractional_full(1.5, 1.0), h, h, 2.0);
    CHECK(q.tail_mass_dropped == doctest::Approx(2.0 * 2.0 / std::sqrt(2.0)).epsilon(1e-10));
}
