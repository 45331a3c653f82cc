#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "levy/error.hpp"
#include "levy/grid.hpp"

namespace levy {

using ScalarFn = std::function<double(double)>;

/// Closed state interval I = [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double u) const { return u >= lo && u <= hi; }
    double width() const { return hi - lo; }
    Interval hull(const Interval& other) const;
    /// [min u - pad, max u + pad].
    static Interval around(const Field& u, double pad = 1e-6);
};

class FluxModel {
public:
    /// f(u) = u^2 / 2 + drift u.
    static FluxModel burgers(double drift = 0.0);
    /// f(u) = speed u.
    static FluxModel linear(double speed);
    static FluxModel zero() { return linear(0.0); }
    /// Arbitrary C^1 flux; Engquist-Osher parts are tabulated by quadrature.
    static FluxModel custom(std::string name, ScalarFn f, ScalarFn f_prime);

    /// f + delta u.
    FluxModel plus_linear(double delta) const;

    const std::string& name() const { return name_; }
    double operator()(double u) const { return f_(u); }
    double derivative(double u) const { return fp_(u); }
    /// max |f'| over I.
    double lipschitz_bound(const Interval& I) const;

    /// Closed-form Engquist-Osher parts P(a) = int_0^a max(f', 0), M(b) = int_0^b min(f', 0).
    bool has_closed_split() const { return kind_ != Kind::custom; }
    double split_plus(double a) const;
    double split_minus(double b) const;

private:
    enum class Kind { burgers, linear, custom };
    Kind kind_ = Kind::custom;
    double param_ = 0.0;
    std::string name_;
    ScalarFn f_;
    ScalarFn fp_;
};

/// F(a, b) = f(0) + int_0^a max(f', 0) + int_0^b min(f', 0).
double numeric_flux(const FluxModel& flux, double a, double b);

/// sup_I |f - g| + sup_I |f' - g'|.
double flux_distance_w1inf(const FluxModel& f, const FluxModel& g, const Interval& I);
/// sup_I |f' - g'|.
double flux_distance_lip(const FluxModel& f, const FluxModel& g, const Interval& I);

/// sigma = (sigma_1, ..., sigma_K), a(u) = sum_k sigma_k(u)^2.
class DiffusionModel {
public:
    static DiffusionModel none();
    /// sigma = value, a = value^2.
    static DiffusionModel constant(double value);
    /// a(u) = scale |u|^exponent.
    static DiffusionModel power(double exponent, double scale);
    /// a(u) = scale (|u| - threshold)_+^2, vanishing on |u| <= threshold.
    static DiffusionModel threshold(double scale, double threshold = 0.5);
    static DiffusionModel custom(std::string name, std::vector<ScalarFn> sigma,
                                 std::vector<double> kinks = {});

    /// sigma_k + delta in every component.
    DiffusionModel shifted(double delta) const;

    const std::string& name() const { return name_; }
    std::size_t components() const { return sigma_.size(); }
    double sigma(std::size_t k, double u) const { return sigma_[k](u); }
    double a(double u) const;
    /// Points where a or sigma lose smoothness; used to split quadrature.
    const std::vector<double>& kinks() const { return kinks_; }
    bool identically_zero() const { return zero_; }

    double max_a(const Interval& I) const;
    double sigma_lipschitz(const Interval& I) const;

private:
    std::string name_;
    std::vector<ScalarFn> sigma_;
    std::vector<double> kinks_;
    bool zero_ = false;
};

/// max_k sup_I |sigma_k - sigma~_k|.
double sigma_distance(const DiffusionModel& a, const DiffusionModel& b, const Interval& I);

/// sum_k (sigma^a_k(xi) - sigma^b_k(xi))^2.
double eps_mismatch(const DiffusionModel& a, const DiffusionModel& b, double xi);

/// int_0^z psi(xi) sigma_k(xi) d xi for each k (psi = 1 when absent).
std::vector<double> zeta(const DiffusionModel& model, double z, const ScalarFn& psi = nullptr);

/// int_0^z a(xi) d xi.
double A_primitive(const DiffusionModel& model, double z);

/// Tabulated antiderivative G(z) = int_anchor^z g over I, with knots at every
/// breakpoint inside I. Hermite mode also uses g at the knots as slopes.
class PrimitiveTable {
public:
    enum class Interp { linear, hermite };

    PrimitiveTable() = default;
    PrimitiveTable(ScalarFn integrand, Interval I, double anchor, std::vector<double> breakpoints = {},
                   Interp interp = Interp::linear, std::size_t points = 4096);

    double operator()(double z) const;
    const Interval& interval() const { return I_; }

private:
    std::size_t locate(double z) const;

    Interval I_;
    Interp interp_ = Interp::linear;
    double bucket_width_ = 1.0;
    std::vector<double> knots_;
    std::vector<double> values_;
    std::vector<double> slopes_;
    std::vector<std::size_t> bucket_;
    ScalarFn integrand_;
};

struct KruzkovRegularization {
    enum class Variant { plus, minus, signed_ };
    double epsilon = 0.1;
    Variant variant = Variant::signed_;
};

struct SgnEta {
    double sgn_val;
    double eta_val;
};

SgnEta kruzkov_sgn_eta(const KruzkovRegularization& reg, double z);
/// Derivative of the regularised sign, i.e. eta''.
double kruzkov_sgn_prime(const KruzkovRegularization& reg, double z);

/// A convex entropy eta(z) together with the structure of eta'' needed for exact splitting.
class EntropyProfile {
public:
    static EntropyProfile quadratic();
    static EntropyProfile exponential();
    static EntropyProfile linear(double slope = 1.0);
    static EntropyProfile kruzkov(KruzkovRegularization reg);

    double eta(double z) const;
    double prime(double z) const;
    double second(double z) const;

    const std::string& name() const { return name_; }
    /// Points where eta'' is not smooth.
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    bool is_kruzkov() const { return kind_ == Kind::kruzkov; }
    const KruzkovRegularization& regularization() const { return reg_; }

    enum class Piece { zero, constant, smooth };
    /// Character of eta'' on the open piece containing z (between breakpoints).
    Piece piece(double z) const;

private:
    enum class Kind { quadratic, exponential, linear, kruzkov };
    Kind kind_ = Kind::quadratic;
    double slope_ = 0.0;
    KruzkovRegularization reg_;
    std::string name_;
    std::vector<double> breakpoints_;
};

/// int_0^1 (1 - tau) eta''((1 - tau) a + tau b - c) d tau, split at the breakpoints of eta''.
double eta_bar_double_prime(const EntropyProfile& eta, double u_here, double u_there, double c = 0.0);

struct EntropyFluxes {
    double q;
    double r;
};

/// q = int_c^z eta'(xi - c) f'(xi), r = int_c^z eta'(xi - c) a(xi), by adaptive quadrature.
EntropyFluxes entropy_fluxes(const EntropyProfile& eta, const FluxModel& flux, const DiffusionModel& diff,
                             double z, double c);

/// epsilon -> 0 Kruzkov fluxes sgn(z - c)(f(z) - f(c)), sgn(z - c)(A(z) - A(c)).
EntropyFluxes kruzkov_limit_fluxes(KruzkovRegularization::Variant variant, const FluxModel& flux,
                                   const DiffusionModel& diff, double z, double c);

/// eta(. - c) with tabulated q, r anchored at c over I.
class EntropyTriple {
public:
    EntropyTriple(EntropyProfile profile, double c, const FluxModel& flux, const DiffusionModel& diff,
                  const Interval& I);

    double eta(double u) const { return profile_.eta(u - c_); }
    double eta_prime(double u) const { return profile_.prime(u - c_); }
    double eta_double_prime(double u) const { return profile_.second(u - c_); }
    /// (eta'(b) - eta'(a)) / (b - a): the mean of eta'' over [a, b], clamped at 0.
    double eta_secant(double a, double b) const;
    double q(double u) const { return q_(u); }
    double r(double u) const { return r_(u); }
    /// Engquist-Osher entropy flux at a face with left state a and right state b; Q(u, u) = q(u).
    double q_face(double a, double b) const { return q_plus_(a) + q_(b) - q_plus_(b); }
    /// Upwind part of q: int_c^u eta'(s - c) max(f'(s), 0) ds.
    double q_plus(double u) const { return q_plus_(u); }
    bool has_r() const { return has_r_; }

    const EntropyProfile& profile() const { return profile_; }
    double c() const { return c_; }

private:
    EntropyProfile profile_;
    double c_;
    PrimitiveTable q_;
    PrimitiveTable r_;
    PrimitiveTable q_plus_;
    bool has_r_ = false;
};

}  // namespace levy
