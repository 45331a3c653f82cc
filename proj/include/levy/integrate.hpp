#pragma once

#include <functional>

#include <boost/math/quadrature/gauss.hpp>

namespace levy::quad {

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod on a finite interval; throws QuadratureError when the
/// estimate exceeds max(abs_tol, 1e-11 * L1-norm of the integrand).
double adaptive(const Integrand& f, double a, double b, double abs_tol = 1e-12);

/// Tanh-sinh for integrands with integrable endpoint singularities on [a, b].
double endpoint_singular(const Integrand& f, double a, double b, double abs_tol = 1e-12);

/// int_a^inf cos(omega z) g(z) dz for slowly decaying g (double-exponential Fourier rule).
double cosine_tail(const Integrand& g, double a, double omega);

/// Fixed-order Gauss-Legendre; exact for polynomials of degree < 2 * Points.
template <int Points = 8, class F>
double gauss_legendre(F&& f, double a, double b) {
    return boost::math::quadrature::gauss<double, Points>::integrate(std::forward<F>(f), a, b);
}

/// int_a^inf f for integrands decaying at infinity (exp-sinh).
double half_infinite(const Integrand& f, double a, double abs_tol = 1e-12);

}  // namespace levy::quad
