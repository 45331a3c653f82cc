#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include "levy/local_models.hpp"

using namespace levy;
using Variant = KruzkovRegularization::Variant;

namespace {

template <class F>
double oracle(F f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-13);
}

}  // namespace

TEST_CASE("zeta") {
    const auto c = DiffusionModel::constant(0.7);
    CHECK(zeta(c, 2.0)[0] == doctest::Approx(1.4).epsilon(1e-12));
    CHECK(zeta(c, 0.0)[0] == 0.0);
    const auto lin = DiffusionModel::custom("identity", {[](double u) { return u; }});
    CHECK(zeta(lin, 2.0)[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(zeta(lin, 2.0, [](double) { return 1.0; })[0] == zeta(lin, 2.0)[0]);
    CHECK(zeta(lin, 1.5, [](double u) { return u; })[0] == doctest::Approx(1.125).epsilon(1e-12));
}

TEST_CASE("A primitive") {
    CHECK(A_primitive(DiffusionModel::constant(1.0), 0.8) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(A_primitive(DiffusionModel::power(2.0, 1.0), 2.0) == doctest::Approx(8.0 / 3.0).epsilon(1e-12));
    const auto th = DiffusionModel::threshold(1.0, 0.5);
    CHECK(A_primitive(th, 0.3) == 0.0);
    CHECK(A_primitive(th, -0.4) == 0.0);
    double prev = A_primitive(th, -2.0);
    for (double z = -1.9; z <= 2.0; z += 0.1) {
        const double v = A_primitive(th, z);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(A_primitive(th, 1.5) == doctest::Approx(oracle([](double u) { return std::pow(u - 0.5, 2); }, 0.5, 1.5)));
}

TEST_CASE("Engquist-Osher flux") {
    const auto b = FluxModel::burgers();
    CHECK(numeric_flux(b, 1.0, -1.0) == doctest::Approx(1.0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int k = 0; k < 50; ++k) {
        const double a = U(rng), d = std::abs(U(rng)) * 0.1;
        CHECK(numeric_flux(b, a, a) == doctest::Approx(b(a)).epsilon(1e-14));
        CHECK(numeric_flux(b, a + d, 0.3) >= numeric_flux(b, a, 0.3));
        CHECK(numeric_flux(b, 0.3, a + d) <= numeric_flux(b, 0.3, a));
    }
    const auto lin = FluxModel::linear(2.5);
    CHECK(numeric_flux(lin, 0.4, -3.0) == doctest::Approx(1.0));
    // A custom flux uses tabulated split integrals.
    const auto cubic = FluxModel::custom("cubic", [](double u) { return u * u * u / 3.0; }, [](double u) { return u * u; });
    CHECK(numeric_flux(cubic, 0.5, 0.5) == doctest::Approx(0.5 * 0.5 * 0.5 / 3.0).epsilon(1e-10));
}

TEST_CASE("Kruzkov regularisation") {
    const double eps = 0.2;
    const KruzkovRegularization plus{eps, Variant::plus}, sgn{eps, Variant::signed_};
    CHECK(kruzkov_sgn_eta(plus, eps / 2).sgn_val == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
    CHECK(kruzkov_sgn_eta(plus, -0.3).sgn_val == 0.0);
    CHECK(kruzkov_sgn_eta(plus, -0.3).eta_val == 0.0);
    const double z = 0.9;
    CHECK(kruzkov_sgn_eta(sgn, z).sgn_val == 1.0);
    const double tail = oracle([eps](double x) { return std::sin(std::numbers::pi * x / (2.0 * eps)); }, 0.0, eps);
    CHECK(kruzkov_sgn_eta(sgn, z).eta_val == doctest::Approx(z - eps + tail).epsilon(1e-12));
    CHECK(tail == doctest::Approx(2.0 * eps / std::numbers::pi).epsilon(1e-12));

    for (auto v : {Variant::plus, Variant::minus, Variant::signed_}) {
        const KruzkovRegularization r{eps, v};
        double prev = -2.0;
        for (double x = -1.0; x <= 1.0; x += 0.01) {
            const auto se = kruzkov_sgn_eta(r, x);
            CHECK(se.sgn_val >= prev);
            CHECK(std::abs(se.sgn_val) <= 1.0);
            CHECK(se.eta_val >= 0.0);
            prev = se.sgn_val;
        }
    }
}

TEST_CASE("Kruzkov eta converges to the limit entropies") {
    for (double eps : {0.1, 0.01, 0.001}) {
        double worst = 0.0;
        for (double x = -1.0; x <= 1.0; x += 0.05) {
            worst = std::max(worst, std::abs(kruzkov_sgn_eta({eps, Variant::plus}, x).eta_val - std::max(x, 0.0)));
            worst = std::max(worst, std::abs(kruzkov_sgn_eta({eps, Variant::signed_}, x).eta_val - std::abs(x)));
        }
        CHECK(worst <= eps);
    }
}

TEST_CASE("convexity inequality of every entropy") {
    const std::vector<EntropyProfile> ps{EntropyProfile::quadratic(), EntropyProfile::exponential(),
                                         EntropyProfile::kruzkov({0.1, Variant::plus}),
                                         EntropyProfile::kruzkov({0.05, Variant::minus}),
                                         EntropyProfile::kruzkov({0.02, Variant::signed_})};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (const auto& p : ps)
        for (int k = 0; k < 200; ++k) {
            const double a = U(rng), b = U(rng);
            CHECK(p.prime(a) * (b - a) <= p.eta(b) - p.eta(a) + 1e-14);
            CHECK(p.second(a) >= 0.0);
        }
}

TEST_CASE("entropy fluxes") {
    const auto b = FluxModel::burgers();
    const auto none = DiffusionModel::none();
    const auto quad = EntropyProfile::quadratic();
    const auto at_c = entropy_fluxes(quad, b, none, 0.4, 0.4);
    CHECK(at_c.q == 0.0);
    CHECK(at_c.r == 0.0);
    CHECK(entropy_fluxes(quad, b, none, 0.9, 0.0).q == doctest::Approx(0.9 * 0.9 * 0.9 / 3.0).epsilon(1e-12));
    CHECK(kruzkov_limit_fluxes(Variant::plus, b, none, 1.0, 0.0).q == doctest::Approx(0.5));

    const auto diff = DiffusionModel::power(2.0, 1.0);
    const auto lim = kruzkov_limit_fluxes(Variant::signed_, b, diff, 0.8, -0.3);
    double prev = 1.0;
    for (double eps : {0.1, 0.01, 0.001}) {
        const auto e = entropy_fluxes(EntropyProfile::kruzkov({eps, Variant::signed_}), b, diff, 0.8, -0.3);
        const double err = std::abs(e.q - lim.q) + std::abs(e.r - lim.r);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-3);
}

TEST_CASE("entropy triple tables") {
    const Interval I{-1.0, 1.0};
    const auto b = FluxModel::burgers();
    const auto diff = DiffusionModel::power(2.0, 0.1);
    const EntropyTriple t(EntropyProfile::exponential(), 0.2, b, diff, I);
    CHECK(t.q(0.2) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(t.r(0.2) == doctest::Approx(0.0).epsilon(1e-12));
    for (double u : {-0.9, -0.1, 0.5, 0.95}) {
        const double q = oracle([](double s) { return std::exp(s - 0.2) * s; }, 0.2, u);
        const double r = oracle([](double s) { return std::exp(s - 0.2) * 0.1 * s * s; }, 0.2, u);
        CHECK(t.q(u) == doctest::Approx(q).epsilon(1e-6));
        CHECK(t.r(u) == doctest::Approx(r).epsilon(1e-6));
        CHECK(t.q_face(u, u) == doctest::Approx(t.q(u)).epsilon(1e-12));
    }
}

TEST_CASE("averaged second derivative") {
    const auto quad = EntropyProfile::quadratic();
    CHECK(eta_bar_double_prime(quad, 0.3, -0.8) == doctest::Approx(0.5).epsilon(1e-14));
    const auto ex = EntropyProfile::exponential();
    CHECK(eta_bar_double_prime(ex, 0.4, 0.4) == doctest::Approx(ex.second(0.4) / 2.0).epsilon(1e-14));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double a = U(rng), b = U(rng);
        const double lhs = ex.eta(b) - ex.eta(a) - ex.prime(a) * (b - a);
        CHECK(std::abs(lhs - eta_bar_double_prime(ex, a, b) * (b - a) * (b - a)) < 1e-10);
        // Oracle: the remainder integral by direct quadrature.
        const double rem = oracle([&](double t) { return (1.0 - t) * std::exp((1.0 - t) * a + t * b); }, 0.0, 1.0);
        CHECK(eta_bar_double_prime(ex, a, b) == doctest::Approx(rem).epsilon(1e-12));
    }
}

TEST_CASE("sigma mismatch") {
    const auto one = DiffusionModel::constant(1.0), zero = DiffusionModel::constant(0.0);
    CHECK(eps_mismatch(one, one, 0.3) == 0.0);
    CHECK(eps_mismatch(one, zero, 0.3) == doctest::Approx(1.0));
    const auto a = DiffusionModel::custom("u", {[](double u) { return u; }});
    const auto b = DiffusionModel::custom("u/2", {[](double u) { return u / 2.0; }});
    CHECK(eps_mismatch(a, b, 2.0) == doctest::Approx(1.0));
    CHECK(eps_mismatch(a, b, 1.3) == eps_mismatch(b, a, 1.3));
    const auto two = DiffusionModel::custom("pair", {[](double) { return 1.0; }, [](double) { return 0.0; }});
    CHECK_THROWS(eps_mismatch(a, two, 1.0));
}

TEST_CASE("flux and diffusion distances") {
    const Interval I{-1.0, 1.0};
    const auto b = FluxModel::burgers();
    CHECK(flux_distance_lip(b, b.plus_linear(0.03), I) == doctest::Approx(0.03).epsilon(1e-12));
    CHECK(flux_distance_w1inf(b, b.plus_linear(0.03), I) == doctest::Approx(0.06).epsilon(1e-12));
    const auto d = DiffusionModel::constant(0.0);
    CHECK(sigma_distance(d, d.shifted(0.02), I) == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(b.lipschitz_bound(I) == doctest::Approx(1.0));
}
