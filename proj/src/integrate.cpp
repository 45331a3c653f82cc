#include "levy/integrate.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "levy/error.hpp"

namespace levy::quad {

namespace bq = boost::math::quadrature;

namespace {

struct Panel {
    double value;
    double error;
    double l1;
};

// The recursive driver in Boost 1.74 misreports the error on short intervals, so bisection
// is done here around the single-panel rule.
Panel adaptive_panel(const Integrand& f, double a, double b, double abs_tol, int depth) {
    Panel p{};
    p.value = bq::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &p.error, &p.l1);
    const double floor = 100.0 * std::numeric_limits<double>::epsilon() * p.l1;
    if (p.error <= std::max(abs_tol, floor) || depth == 0 || !std::isfinite(p.value)) return p;
    const double mid = 0.5 * (a + b);
    const Panel left = adaptive_panel(f, a, mid, 0.5 * abs_tol, depth - 1);
    const Panel right = adaptive_panel(f, mid, b, 0.5 * abs_tol, depth - 1);
    return {left.value + right.value, left.error + right.error, left.l1 + right.l1};
}

}  // namespace

double adaptive(const Integrand& f, double a, double b, double abs_tol) {
    if (a == b) return 0.0;
    const Panel p = adaptive_panel(f, a, b, 0.1 * abs_tol, 30);
    if (!std::isfinite(p.value) || p.error > std::max(abs_tol, 1e-11 * p.l1))
        throw QuadratureError("adaptive quadrature did not converge", p.error);
    return p.value;
}

double endpoint_singular(const Integrand& f, double a, double b, double abs_tol) {
    if (a == b) return 0.0;
    thread_local bq::tanh_sinh<double> integrator(15);
    double error = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    const double value = integrator.integrate(f, a, b, 1e-14, &error, &l1, &levels);
    if (!std::isfinite(value) || error > std::max(abs_tol, 1e-10 * l1))
        throw QuadratureError("tanh-sinh quadrature did not converge", error);
    return value;
}

double cosine_tail(const Integrand& g, double a, double omega) {
    // int_a^inf cos(w z) g(z) dz = cos(w a) C - sin(w a) S with C, S over t = z - a in (0, inf).
    thread_local bq::ooura_fourier_cos<double> cos_rule;
    thread_local bq::ooura_fourier_sin<double> sin_rule;
    auto shifted = [&](double t) { return g(t + a); };
    const auto [c, c_err] = cos_rule.integrate(shifted, omega);
    const auto [s, s_err] = sin_rule.integrate(shifted, omega);
    if (!std::isfinite(c) || !std::isfinite(s) || c_err > 1e-8 || s_err > 1e-8)
        throw QuadratureError("oscillatory tail quadrature did not converge", std::max(c_err, s_err));
    return std::cos(omega * a) * c - std::sin(omega * a) * s;
}


double half_infinite(const Integrand& f, double a, double abs_tol) {
    thread_local boost::math::quadrature::exp_sinh<double> integrator;
    double error = 0.0;
    double l1 = 0.0;
    std::size_t levels = 0;
    const double value = integrator.integrate(f, a, std::numeric_limits<double>::infinity(), 1e-13,
                                              &error, &l1, &levels);
    if (!std::isfinite(value) || error > std::max(abs_tol, 1e-9 * l1))
        throw QuadratureError("exp-sinh quadrature did not converge", error);
    return value;
}

}  // namespace levy::quad
