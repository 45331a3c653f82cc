#include "levy/local_models.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "levy/integrate.hpp"

namespace levy {

namespace {

constexpr std::size_t kSamples = 4097;

// int_a^b g, split at the breakpoints strictly between a and b; signed when b < a.
double integrate_split(const ScalarFn& g, double a, double b, const std::vector<double>& breakpoints) {
    if (a == b) return 0.0;
    const double sign = b > a ? 1.0 : -1.0;
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    std::vector<double> cuts{lo};
    for (double p : breakpoints)
        if (p > lo && p < hi) cuts.push_back(p);
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(hi);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) total += quad::adaptive(g, cuts[k], cuts[k + 1]);
    return sign * total;
}

template <class F>
double sample_max(const Interval& I, const std::vector<double>& extra, F&& fn) {
    double best = 0.0;
    for (std::size_t k = 0; k < kSamples; ++k)
        best = std::max(best, fn(I.lo + I.width() * static_cast<double>(k) / (kSamples - 1)));
    for (double p : extra)
        if (I.contains(p)) best = std::max(best, fn(p));
    return best;
}

}  // namespace

Interval Interval::hull(const Interval& other) const {
    return {std::min(lo, other.lo), std::max(hi, other.hi)};
}

Interval Interval::around(const Field& u, double pad) {
    return {min_value(u) - pad, max_value(u) + pad};
}

// ---- flux ----

FluxModel FluxModel::burgers(double drift) {
    FluxModel m;
    m.kind_ = Kind::burgers;
    m.param_ = drift;
    m.name_ = "burgers";
    m.f_ = [drift](double u) { return 0.5 * u * u + drift * u; };
    m.fp_ = [drift](double u) { return u + drift; };
    return m;
}

FluxModel FluxModel::linear(double speed) {
    FluxModel m;
    m.kind_ = Kind::linear;
    m.param_ = speed;
    m.name_ = speed == 0.0 ? "zero" : "linear";
    m.f_ = [speed](double u) { return speed * u; };
    m.fp_ = [speed](double) { return speed; };
    return m;
}

FluxModel FluxModel::custom(std::string name, ScalarFn f, ScalarFn f_prime) {
    FluxModel m;
    m.kind_ = Kind::custom;
    m.name_ = std::move(name);
    m.f_ = std::move(f);
    m.fp_ = std::move(f_prime);
    return m;
}

FluxModel FluxModel::plus_linear(double delta) const {
    switch (kind_) {
    case Kind::burgers: return burgers(param_ + delta);
    case Kind::linear: return linear(param_ + delta);
    case Kind::custom: break;
    }
    auto f = f_;
    auto fp = fp_;
    return custom(name_, [f, delta](double u) { return f(u) + delta * u; },
                  [fp, delta](double u) { return fp(u) + delta; });
}

double FluxModel::lipschitz_bound(const Interval& I) const {
    switch (kind_) {
    case Kind::burgers: return std::max(std::abs(I.lo + param_), std::abs(I.hi + param_));
    case Kind::linear: return std::abs(param_);
    case Kind::custom: break;
    }
    return sample_max(I, {}, [&](double u) { return std::abs(fp_(u)); });
}

double FluxModel::split_plus(double a) const {
    if (kind_ == Kind::linear) return std::max(param_, 0.0) * a;
    const double up = std::max(a + param_, 0.0);
    const double base = std::max(param_, 0.0);
    return 0.5 * (up * up - base * base);
}

double FluxModel::split_minus(double b) const {
    if (kind_ == Kind::linear) return std::min(param_, 0.0) * b;
    const double down = std::min(b + param_, 0.0);
    const double base = std::min(param_, 0.0);
    return 0.5 * (down * down - base * base);
}

double numeric_flux(const FluxModel& flux, double a, double b) {
    if (flux.has_closed_split()) return flux(0.0) + flux.split_plus(a) + flux.split_minus(b);
    const ScalarFn up = [&](double s) { return std::max(flux.derivative(s), 0.0); };
    const ScalarFn down = [&](double s) { return std::min(flux.derivative(s), 0.0); };
    return flux(0.0) + integrate_split(up, 0.0, a, {}) + integrate_split(down, 0.0, b, {});
}

double flux_distance_w1inf(const FluxModel& f, const FluxModel& g, const Interval& I) {
    return sample_max(I, {}, [&](double u) { return std::abs(f(u) - g(u)); }) + flux_distance_lip(f, g, I);
}

double flux_distance_lip(const FluxModel& f, const FluxModel& g, const Interval& I) {
    return sample_max(I, {}, [&](double u) { return std::abs(f.derivative(u) - g.derivative(u)); });
}

// ---- diffusion ----

DiffusionModel DiffusionModel::none() {
    DiffusionModel m;
    m.name_ = "none";
    m.sigma_ = {[](double) { return 0.0; }};
    m.zero_ = true;
    return m;
}

DiffusionModel DiffusionModel::constant(double value) {
    DiffusionModel m;
    m.name_ = "constant";
    m.sigma_ = {[value](double) { return value; }};
    m.zero_ = value == 0.0;
    return m;
}

DiffusionModel DiffusionModel::power(double exponent, double scale) {
    if (!(exponent >= 0.0) || !(scale >= 0.0))
        throw ConfigError("power diffusion needs exponent >= 0 and scale >= 0");
    DiffusionModel m;
    m.name_ = "power";
    const double root = std::sqrt(scale);
    const double half = 0.5 * exponent;
    m.sigma_ = {[root, half](double u) { return root * std::pow(std::abs(u), half); }};
    m.kinks_ = {0.0};
    m.zero_ = scale == 0.0;
    return m;
}

DiffusionModel DiffusionModel::threshold(double scale, double threshold) {
    if (!(scale >= 0.0) || !(threshold >= 0.0))
        throw ConfigError("threshold diffusion needs scale >= 0 and threshold >= 0");
    DiffusionModel m;
    m.name_ = "threshold";
    const double root = std::sqrt(scale);
    m.sigma_ = {[root, threshold](double u) { return root * std::max(std::abs(u) - threshold, 0.0); }};
    m.kinks_ = {-threshold, threshold};
    m.zero_ = scale == 0.0;
    return m;
}

DiffusionModel DiffusionModel::custom(std::string name, std::vector<ScalarFn> sigma, std::vector<double> kinks) {
    if (sigma.empty()) throw ConfigError("custom diffusion needs at least one sigma component");
    DiffusionModel m;
    m.name_ = std::move(name);
    m.sigma_ = std::move(sigma);
    m.kinks_ = std::move(kinks);
    return m;
}

DiffusionModel DiffusionModel::shifted(double delta) const {
    DiffusionModel m = *this;
    for (auto& s : m.sigma_) s = [base = s, delta](double u) { return base(u) + delta; };
    m.zero_ = zero_ && delta == 0.0;
    return m;
}

double DiffusionModel::a(double u) const {
    double sum = 0.0;
    for (const auto& s : sigma_) {
        const double v = s(u);
        sum += v * v;
    }
    return sum;
}

double DiffusionModel::max_a(const Interval& I) const {
    if (zero_) return 0.0;
    return sample_max(I, kinks_, [&](double u) { return a(u); });
}

double DiffusionModel::sigma_lipschitz(const Interval& I) const {
    if (zero_) return 0.0;
    const double du = I.width() / (kSamples - 1);
    double best = 0.0;
    for (const auto& s : sigma_)
        for (std::size_t k = 0; k + 1 < kSamples; ++k) {
            const double u = I.lo + du * static_cast<double>(k);
            best = std::max(best, std::abs(s(u + du) - s(u)) / du);
        }
    return best;
}

double sigma_distance(const DiffusionModel& a, const DiffusionModel& b, const Interval& I) {
    if (a.components() != b.components()) throw Error("sigma_distance: component counts differ");
    std::vector<double> kinks = a.kinks();
    kinks.insert(kinks.end(), b.kinks().begin(), b.kinks().end());
    double best = 0.0;
    for (std::size_t k = 0; k < a.components(); ++k)
        best = std::max(best, sample_max(I, kinks, [&](double u) { return std::abs(a.sigma(k, u) - b.sigma(k, u)); }));
    return best;
}

double eps_mismatch(const DiffusionModel& a, const DiffusionModel& b, double xi) {
    if (a.components() != b.components()) throw Error("eps_mismatch: component counts differ");
    double sum = 0.0;
    for (std::size_t k = 0; k < a.components(); ++k) {
        const double d = a.sigma(k, xi) - b.sigma(k, xi);
        sum += d * d;
    }
    return sum;
}

std::vector<double> zeta(const DiffusionModel& model, double z, const ScalarFn& psi) {
    std::vector<double> out(model.components());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const ScalarFn g = psi ? ScalarFn([&](double s) { return psi(s) * model.sigma(k, s); })
                               : ScalarFn([&](double s) { return model.sigma(k, s); });
        out[k] = integrate_split(g, 0.0, z, model.kinks());
    }
    return out;
}

double A_primitive(const DiffusionModel& model, double z) {
    if (model.identically_zero()) return 0.0;
    return integrate_split([&](double s) { return model.a(s); }, 0.0, z, model.kinks());
}

// ---- tables ----

PrimitiveTable::PrimitiveTable(ScalarFn integrand, Interval I, double anchor, std::vector<double> breakpoints,
                               Interp interp, std::size_t points)
    : I_(I), interp_(interp), integrand_(std::move(integrand)) {
    if (!(I.hi > I.lo) || points < 2) throw Error("PrimitiveTable: empty interval");
    bucket_width_ = I.width() / static_cast<double>(points - 1);
    knots_.reserve(points + breakpoints.size());
    for (std::size_t k = 0; k < points; ++k) knots_.push_back(I.lo + bucket_width_ * static_cast<double>(k));
    knots_.back() = I.hi;
    for (double p : breakpoints)
        if (p > I.lo && p < I.hi) knots_.push_back(p);
    std::sort(knots_.begin(), knots_.end());
    const double merge = 1e-9 * bucket_width_;
    knots_.erase(std::unique(knots_.begin(), knots_.end(), [&](double x, double y) { return y - x < merge; }),
                 knots_.end());
    knots_.back() = I.hi;

    values_.assign(knots_.size(), 0.0);
    for (std::size_t k = 1; k < knots_.size(); ++k)
        values_[k] = values_[k - 1] + quad::adaptive(integrand_, knots_[k - 1], knots_[k]);
    const double offset = integrate_split(integrand_, I.lo, anchor, breakpoints);
    for (double& v : values_) v -= offset;
    if (interp_ == Interp::hermite) {
        slopes_.resize(knots_.size());
        for (std::size_t k = 0; k < knots_.size(); ++k) slopes_[k] = integrand_(knots_[k]);
    }

    bucket_.resize(points);
    std::size_t k = 0;
    for (std::size_t m = 0; m < points; ++m) {
        const double x = I.lo + bucket_width_ * static_cast<double>(m);
        while (k + 2 < knots_.size() && knots_[k + 1] <= x) ++k;
        bucket_[m] = k;
    }
}

std::size_t PrimitiveTable::locate(double z) const {
    const double pos = (z - I_.lo) / bucket_width_;
    const auto m = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bucket_.size() - 1)));
    std::size_t k = bucket_[m];
    while (k + 2 < knots_.size() && knots_[k + 1] <= z) ++k;
    return k;
}

double PrimitiveTable::operator()(double z) const {
    if (z < I_.lo) return values_.front() - quad::adaptive(integrand_, z, I_.lo);
    if (z > I_.hi) return values_.back() + quad::adaptive(integrand_, I_.hi, z);
    const std::size_t k = locate(z);
    const double x0 = knots_[k];
    const double H = knots_[k + 1] - x0;
    const double t = (z - x0) / H;
    if (interp_ == Interp::linear) return values_[k] + t * (values_[k + 1] - values_[k]);
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * values_[k] + (t3 - 2 * t2 + t) * H * slopes_[k] +
           (-2 * t3 + 3 * t2) * values_[k + 1] + (t3 - t2) * H * slopes_[k + 1];
}

// ---- Kruzkov ----

SgnEta kruzkov_sgn_eta(const KruzkovRegularization& reg, double z) {
    using V = KruzkovRegularization::Variant;
    const double eps = reg.epsilon;
    const double k = std::numbers::pi / (2.0 * eps);
    const double cap = 2.0 * eps / std::numbers::pi;
    auto sine_piece = [&](double x) { return SgnEta{std::sin(k * x), cap * (1.0 - std::cos(k * x))}; };
    switch (reg.variant) {
    case V::plus:
        if (z <= 0.0) return {0.0, 0.0};
        if (z <= eps) return sine_piece(z);
        return {1.0, cap + z - eps};
    case V::minus:
        if (z >= 0.0) return {0.0, 0.0};
        if (z >= -eps) return sine_piece(z);
        return {-1.0, cap - z - eps};
    case V::signed_:
        if (std::abs(z) <= eps) return sine_piece(z);
        return {z > 0 ? 1.0 : -1.0, cap + std::abs(z) - eps};
    }
    return {0.0, 0.0};
}

double kruzkov_sgn_prime(const KruzkovRegularization& reg, double z) {
    using V = KruzkovRegularization::Variant;
    const double eps = reg.epsilon;
    const bool inside = (reg.variant == V::plus && z > 0.0 && z < eps) ||
                        (reg.variant == V::minus && z < 0.0 && z > -eps) ||
                        (reg.variant == V::signed_ && std::abs(z) < eps);
    if (!inside) return 0.0;
    const double k = std::numbers::pi / (2.0 * eps);
    return k * std::cos(k * z);
}

// ---- entropies ----

EntropyProfile EntropyProfile::quadratic() {
    EntropyProfile e;
    e.kind_ = Kind::quadratic;
    e.name_ = "quadratic";
    return e;
}

EntropyProfile EntropyProfile::exponential() {
    EntropyProfile e;
    e.kind_ = Kind::exponential;
    e.name_ = "exp";
    return e;
}

EntropyProfile EntropyProfile::linear(double slope) {
    EntropyProfile e;
    e.kind_ = Kind::linear;
    e.slope_ = slope;
    e.name_ = "linear";
    return e;
}

EntropyProfile EntropyProfile::kruzkov(KruzkovRegularization reg) {
    using V = KruzkovRegularization::Variant;
    if (!(reg.epsilon > 0.0)) throw Error("Kruzkov regularisation needs epsilon > 0");
    EntropyProfile e;
    e.kind_ = Kind::kruzkov;
    e.reg_ = reg;
    switch (reg.variant) {
    case V::plus:
        e.name_ = "kruzkov_plus";
        e.breakpoints_ = {0.0, reg.epsilon};
        break;
    case V::minus:
        e.name_ = "kruzkov_minus";
        e.breakpoints_ = {-reg.epsilon, 0.0};
        break;
    case V::signed_:
        e.name_ = "kruzkov_signed";
        e.breakpoints_ = {-reg.epsilon, reg.epsilon};
        break;
    }
    return e;
}

double EntropyProfile::eta(double z) const {
    switch (kind_) {
    case Kind::quadratic: return 0.5 * z * z;
    case Kind::exponential: return std::exp(z);
    case Kind::linear: return slope_ * z;
    case Kind::kruzkov: return kruzkov_sgn_eta(reg_, z).eta_val;
    }
    return 0.0;
}

double EntropyProfile::prime(double z) const {
    switch (kind_) {
    case Kind::quadratic: return z;
    case Kind::exponential: return std::exp(z);
    case Kind::linear: return slope_;
    case Kind::kruzkov: return kruzkov_sgn_eta(reg_, z).sgn_val;
    }
    return 0.0;
}

double EntropyProfile::second(double z) const {
    switch (kind_) {
    case Kind::quadratic: return 1.0;
    case Kind::exponential: return std::exp(z);
    case Kind::linear: return 0.0;
    case Kind::kruzkov: return kruzkov_sgn_prime(reg_, z);
    }
    return 0.0;
}

EntropyProfile::Piece EntropyProfile::piece(double z) const {
    switch (kind_) {
    case Kind::quadratic: return Piece::constant;
    case Kind::exponential: return Piece::smooth;
    case Kind::linear: return Piece::zero;
    case Kind::kruzkov: return kruzkov_sgn_prime(reg_, z) == 0.0 ? Piece::zero : Piece::smooth;
    }
    return Piece::smooth;
}

double eta_bar_double_prime(const EntropyProfile& eta, double u_here, double u_there, double c) {
    const double a = u_here - c;
    const double b = u_there - c;
    if (a == b) return 0.5 * eta.second(a);
    const double span = b - a;
    const auto& bps = eta.breakpoints();
    std::array<double, 8> taus{};
    std::size_t count = 0;
    taus[count++] = 0.0;
    for (double p : bps) {
        const double tau = (p - a) / span;
        if (tau > 0.0 && tau < 1.0 && count < taus.size() - 1) taus[count++] = tau;
    }
    std::sort(taus.begin(), taus.begin() + static_cast<long>(count));
    taus[count++] = 1.0;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < count; ++k) {
        const double t0 = taus[k];
        const double t1 = taus[k + 1];
        if (!(t1 > t0)) continue;
        const double mid = a + 0.5 * (t0 + t1) * span;
        switch (eta.piece(mid)) {
        case EntropyProfile::Piece::zero: break;
        case EntropyProfile::Piece::constant:
            total += eta.second(mid) * ((t1 - t0) - 0.5 * (t1 * t1 - t0 * t0));
            break;
        case EntropyProfile::Piece::smooth:
            total += quad::gauss_legendre<10>([&](double t) { return (1.0 - t) * eta.second(a + t * span); }, t0, t1);
            break;
        }
    }
    return total;
}

EntropyFluxes entropy_fluxes(const EntropyProfile& eta, const FluxModel& flux, const DiffusionModel& diff,
                             double z, double c) {
    std::vector<double> bps;
    for (double p : eta.breakpoints()) bps.push_back(p + c);
    const double q = integrate_split([&](double s) { return eta.prime(s - c) * flux.derivative(s); }, c, z, bps);
    bps.insert(bps.end(), diff.kinks().begin(), diff.kinks().end());
    const double r = diff.identically_zero()
                         ? 0.0
                         : integrate_split([&](double s) { return eta.prime(s - c) * diff.a(s); }, c, z, bps);
    return {q, r};
}

EntropyFluxes kruzkov_limit_fluxes(KruzkovRegularization::Variant variant, const FluxModel& flux,
                                   const DiffusionModel& diff, double z, double c) {
    using V = KruzkovRegularization::Variant;
    const double d = z - c;
    double s = 0.0;
    switch (variant) {
    case V::plus: s = d > 0.0 ? 1.0 : 0.0; break;
    case V::minus: s = d < 0.0 ? -1.0 : 0.0; break;
    case V::signed_: s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0); break;
    }
    if (s == 0.0) return {0.0, 0.0};
    return {s * (flux(z) - flux(c)), s * (A_primitive(diff, z) - A_primitive(diff, c))};
}

namespace {

std::vector<double> sign_changes(const std::function<double(double)>& g, const Interval& I, int samples = 1024) {
    std::vector<double> roots;
    double x0 = I.lo;
    double g0 = g(x0);
    for (int k = 1; k <= samples; ++k) {
        const double x1 = I.lo + I.width() * k / samples;
        const double g1 = g(x1);
        if ((g0 < 0.0) != (g1 < 0.0)) {
            double lo = x0, hi = x1;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((g(mid) < 0.0) == (g0 < 0.0)) lo = mid; else hi = mid;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        x0 = x1;
        g0 = g1;
    }
    return roots;
}

}  // namespace

EntropyTriple::EntropyTriple(EntropyProfile profile, double c, const FluxModel& flux, const DiffusionModel& diff,
                             const Interval& I)
    : profile_(std::move(profile)), c_(c) {
    std::vector<double> bps;
    for (double p : profile_.breakpoints()) bps.push_back(p + c);
    const EntropyProfile& eta = profile_;
    q_ = PrimitiveTable([eta, c, flux](double s) { return eta.prime(s - c) * flux.derivative(s); }, I, c, bps,
                        PrimitiveTable::Interp::hermite);
    std::vector<double> plus_bps = bps;
    for (double z : sign_changes([&flux](double s) { return flux.derivative(s); }, I)) plus_bps.push_back(z);
    q_plus_ = PrimitiveTable([eta, c, flux](double s) { return eta.prime(s - c) * std::max(flux.derivative(s), 0.0); },
                             I, c, plus_bps, PrimitiveTable::Interp::hermite);
    if (diff.identically_zero()) {
        r_ = PrimitiveTable([](double) { return 0.0; }, I, c, {}, PrimitiveTable::Interp::linear, 2);
    } else {
        has_r_ = true;
        bps.insert(bps.end(), diff.kinks().begin(), diff.kinks().end());
        r_ = PrimitiveTable([eta, c, diff](double s) { return eta.prime(s - c) * diff.a(s); }, I, c, bps,
                            PrimitiveTable::Interp::hermite);
    }
}

double EntropyTriple::eta_secant(double a, double b) const {
    if (a == b) return eta_double_prime(a);
    return std::max((eta_prime(b) - eta_prime(a)) / (b - a), 0.0);
}

}  // namespace levy
