#include "levy/levy_measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "levy/integrate.hpp"

namespace levy {

namespace {

using Kind = LevyMeasure::Kind;

// Radial support [lo, hi) of a component after its window and intrinsic cut-offs.
std::pair<double, double> radial_support(const LevyMeasure::Component& c) {
    double hi = c.window_hi;
    if (c.kind == Kind::fractional_truncated) hi = std::min(hi, 1.0);
    if (c.kind == Kind::custom) hi = std::min(hi, c.support_radius);
    return {c.window_lo, hi};
}

bool atom_in(const LevyMeasure::Component& c, double r, double a, double b) {
    return r > a && r <= b && r >= c.window_lo && r < c.window_hi;
}

// int_A^B r^q dr for 0 <= A < B <= inf; inf when divergent.
double power_integral(double q, double A, double B) {
    if (std::abs(q + 1.0) < 1e-14) {
        if (A == 0.0 || std::isinf(B)) return kInf;
        return std::log(B / A);
    }
    const double e = q + 1.0;
    if (e > 0.0) {
        if (std::isinf(B)) return kInf;
        return (std::pow(B, e) - std::pow(A, e)) / e;
    }
    if (A == 0.0) return kInf;
    const double upper = std::isinf(B) ? 0.0 : std::pow(B, e);
    return (upper - std::pow(A, e)) / e;
}

double integrate_piece(const std::function<double(double)>& f, double A, double B) {
    try {
        if (std::isinf(B)) return quad::half_infinite(f, A);
        if (A == 0.0) return quad::endpoint_singular(f, A, B);
        return quad::adaptive(f, A, B);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw InvalidMeasure(std::string("density integral does not converge: ") + e.what());
    }
}

double component_density(const LevyMeasure::Component& c, double z) {
    const double r = std::abs(z);
    if (c.kind == Kind::point_masses || r == 0.0) return 0.0;
    const auto [lo, hi] = radial_support(c);
    if (r < lo || r >= hi) return 0.0;
    if (c.kind == Kind::custom) return c.density(z);
    return c.strength * std::pow(r, -1.0 - c.alpha);
}

double component_moment(const LevyMeasure::Component& c, double p, double a, double b, int side) {
    if (c.kind == Kind::point_masses) {
        double s = 0.0;
        for (const auto& [r, m] : c.atoms)
            if (atom_in(c, r, a, b)) s += m * std::pow(r, p);
        return s;
    }
    const auto [lo, hi] = radial_support(c);
    const double A = std::max(a, lo);
    const double B = std::min(b, hi);
    if (!(B > A)) return 0.0;
    if (c.kind == Kind::custom) {
        auto f = [&](double r) { return std::pow(r, p) * c.density(side * r); };
        return integrate_piece(f, A, B);
    }
    return c.strength * power_integral(p - 1.0 - c.alpha, A, B);
}

double component_integral(const LevyMeasure::Component& c, const std::function<double(double)>& g,
                          double a, double b, int side) {
    if (c.kind == Kind::point_masses) {
        double s = 0.0;
        for (const auto& [r, m] : c.atoms)
            if (atom_in(c, r, a, b)) s += m * g(side * r);
        return s;
    }
    const auto [lo, hi] = radial_support(c);
    const double A = std::max(a, lo);
    const double B = std::min(b, hi);
    if (!(B > A)) return 0.0;
    auto f = [&](double r) { return g(side * r) * component_density(c, side * r); };
    return integrate_piece(f, A, B);
}

// int over r in [A, B) of (cos(omega r) - 1) m(side r) dr for the continuous part,
// split into half periods so the tanh-sinh rule never sees many oscillations.
double component_symbol(const LevyMeasure::Component& c, double omega, int side) {
    if (c.kind == Kind::point_masses) {
        double s = 0.0;
        for (const auto& [r, m] : c.atoms)
            if (r >= c.window_lo && r < c.window_hi) s += m * (std::cos(omega * r) - 1.0);
        return s;
    }
    const auto [A, B] = radial_support(c);
    if (!(B > A)) return 0.0;
    auto integrand = [&](double r) {
        const double s = std::sin(0.5 * omega * r);
        const double v = -2.0 * s * s * component_density(c, side * r);
        // Near r = 0 the factors underflow and overflow; the true value tends to 0.
        return std::isfinite(v) ? v : 0.0;
    };
    const double finite_end = std::isinf(B) ? std::max(A, 1.0) : B;
    const double half_period = std::numbers::pi / std::abs(omega);
    const auto pieces = static_cast<std::size_t>(
        std::min(20000.0, std::ceil((finite_end - A) / half_period)));
    double total = 0.0;
    double left = A;
    for (std::size_t k = 1; k <= std::max<std::size_t>(pieces, 1); ++k) {
        const double right = (k == std::max<std::size_t>(pieces, 1)) ? finite_end
                                                                     : A + static_cast<double>(k) * half_period;
        if (right > left) total += quad::endpoint_singular(integrand, left, right);
        left = right;
    }
    if (std::isinf(B)) {
        // Only the full fractional kernel reaches here: tail of s r^{-1-alpha}.
        const double R = finite_end;
        auto decay = [&](double r) { return std::pow(r, -1.0 - c.alpha); };
        total += c.strength * (quad::cosine_tail(decay, R, omega) - std::pow(R, -c.alpha) / c.alpha);
    }
    return total;
}

double guard(double value, const char* what) {
    if (!std::isfinite(value) || value > 1e300)
        throw InvalidMeasure(std::string("measure violates the moment condition: ") + what + " diverges");
    return value;
}

}  // namespace

LevyMeasure LevyMeasure::fractional_truncated(double alpha, double strength) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidMeasure("fractional_truncated: alpha must lie in (0, 2)");
    if (!(strength >= 0.0)) throw InvalidMeasure("fractional_truncated: strength must be nonnegative");
    LevyMeasure m;
    Component c;
    c.kind = Kind::fractional_truncated;
    c.alpha = alpha;
    c.strength = strength;
    m.components_.push_back(c);
    return m;
}

LevyMeasure LevyMeasure::fractional_full(double alpha, double strength) {
    if (!(alpha > 1.0 && alpha < 2.0)) throw InvalidMeasure("fractional_full: alpha must lie in (1, 2)");
    if (!(strength >= 0.0)) throw InvalidMeasure("fractional_full: strength must be nonnegative");
    LevyMeasure m;
    Component c;
    c.kind = Kind::fractional_full;
    c.alpha = alpha;
    c.strength = strength;
    m.components_.push_back(c);
    return m;
}

LevyMeasure LevyMeasure::custom(std::function<double(double)> density, double support_radius, bool symmetric) {
    if (!(support_radius > 0.0) || !std::isfinite(support_radius))
        throw InvalidMeasure("custom density: support_radius must be positive and finite");
    for (int k = 1; k <= 64; ++k) {
        const double z = support_radius * k / 64.0;
        const double mp = density(z);
        const double mm = density(-z);
        if (!(mp >= 0.0) || !(mm >= 0.0)) throw InvalidMeasure("custom density must be nonnegative");
        if (symmetric && std::abs(mp - mm) > 1e-12 * std::max({1.0, mp, mm}))
            throw InvalidMeasure("custom density is not even: m(z) != m(-z) at z = " + std::to_string(z));
    }
    LevyMeasure m;
    Component c;
    c.kind = Kind::custom;
    c.density = std::move(density);
    c.support_radius = support_radius;
    c.symmetric = symmetric;
    m.components_.push_back(std::move(c));
    return m;
}

LevyMeasure LevyMeasure::from_table(std::vector<double> z, std::vector<double> m) {
    if (z.size() != m.size() || z.size() < 2) throw InvalidMeasure("density table needs >= 2 matching rows");
    for (std::size_t k = 0; k < z.size(); ++k) {
        if (!(z[k] > 0.0)) throw InvalidMeasure("density table: z must be positive");
        if (k > 0 && !(z[k] > z[k - 1])) throw InvalidMeasure("density table: z must be increasing");
        if (!(m[k] >= 0.0)) throw InvalidMeasure("density table: m must be nonnegative");
    }
    const double radius = z.back();
    auto density = [z = std::move(z), m = std::move(m)](double s) {
        const double r = std::abs(s);
        if (r > z.back()) return 0.0;
        if (r <= z.front()) return m.front();
        const auto it = std::upper_bound(z.begin(), z.end(), r);
        const std::size_t k = static_cast<std::size_t>(it - z.begin());
        const double t = (r - z[k - 1]) / (z[k] - z[k - 1]);
        return (1.0 - t) * m[k - 1] + t * m[k];
    };
    return custom(std::move(density), radius, true);
}

LevyMeasure LevyMeasure::from_table_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidMeasure("cannot open density table " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "z,m") throw InvalidMeasure(path.string() + ": expected header `z,m`");
    std::vector<double> z, m;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b;
        if (!std::getline(row, a, ',') || !std::getline(row, b))
            throw InvalidMeasure(path.string() + ": malformed row `" + line + "`");
        z.push_back(std::stod(a));
        m.push_back(std::stod(b));
    }
    return from_table(std::move(z), std::move(m));
}

LevyMeasure LevyMeasure::point_masses(std::vector<std::pair<double, double>> atoms) {
    for (const auto& [r, w] : atoms)
        if (!(r > 0.0) || !(w >= 0.0)) throw InvalidMeasure("point masses need |z| > 0 and mass >= 0");
    LevyMeasure m;
    Component c;
    c.kind = Kind::point_masses;
    c.atoms = std::move(atoms);
    m.components_.push_back(std::move(c));
    return m;
}

LevyMeasure LevyMeasure::restricted(double lo, double hi) const {
    LevyMeasure out = *this;
    for (auto& c : out.components_) {
        c.window_lo = std::max(c.window_lo, lo);
        c.window_hi = std::min(c.window_hi, hi);
    }
    return out;
}

LevyMeasure LevyMeasure::scaled(double factor) const {
    if (!(factor >= 0.0)) throw InvalidMeasure("measure scale factor must be nonnegative");
    LevyMeasure out = *this;
    for (auto& c : out.components_) {
        c.strength *= factor;
        for (auto& a : c.atoms) a.second *= factor;
        if (c.kind == Kind::custom) {
            auto d = c.density;
            c.density = [d, factor](double z) { return factor * d(z); };
        }
    }
    return out;
}

LevyMeasure LevyMeasure::operator+(const LevyMeasure& other) const {
    LevyMeasure out = *this;
    out.components_.insert(out.components_.end(), other.components_.begin(), other.components_.end());
    return out;
}

bool LevyMeasure::symmetric() const {
    return std::all_of(components_.begin(), components_.end(), [](const Component& c) { return c.symmetric; });
}

double LevyMeasure::density(double z) const {
    double s = 0.0;
    for (const auto& c : components_) s += component_density(c, z);
    return s;
}

double LevyMeasure::integrate_side(const std::function<double(double)>& g, double a, double b, int side) const {
    double s = 0.0;
    for (const auto& c : components_) s += component_integral(c, g, a, b, side);
    return s;
}

double LevyMeasure::radial_moment(double p, double a, double b, int side) const {
    double s = 0.0;
    for (const auto& c : components_) s += component_moment(c, p, a, b, side);
    return s;
}

std::string LevyMeasure::describe() const {
    if (components_.empty()) return "none";
    std::ostringstream os;
    for (std::size_t k = 0; k < components_.size(); ++k) {
        const auto& c = components_[k];
        if (k) os << " + ";
        switch (c.kind) {
            case Kind::fractional_truncated:
                os << "fractional_truncated(alpha=" << c.alpha << ", strength=" << c.strength << ")";
                break;
            case Kind::fractional_full:
                os << "fractional_full(alpha=" << c.alpha << ", strength=" << c.strength << ")";
                break;
            case Kind::custom: os << "custom(support=" << c.support_radius << ")"; break;
            case Kind::point_masses: os << "point_masses(" << c.atoms.size() << ")"; break;
        }
        if (c.window_lo > 0.0 || std::isfinite(c.window_hi))
            os << "[" << c.window_lo << "<=|z|<" << c.window_hi << "]";
    }
    return os.str();
}

MomentReport check_integrability(const LevyMeasure& measure) {
    const double below_one = std::nextafter(1.0, 0.0);
    MomentReport r;
    r.second_moment_inner = guard(measure.radial_moment(2.0, 0.0, below_one), "int_{|z|<1} |z|^2 pi(dz)");
    r.first_moment_outer = guard(measure.radial_moment(1.0, below_one, kInf), "int_{|z|>=1} |z| pi(dz)");
    return r;
}

double small_jump_moment(const LevyMeasure& measure, double kappa) {
    if (!(kappa > 0.0)) throw Error("small_jump_moment: kappa must be positive");
    return guard(measure.radial_moment(2.0, 0.0, kappa), "small-jump second moment");
}

double drift_correction(const LevyMeasure& measure, double kappa) {
    if (!(kappa > 0.0)) throw Error("drift_correction: kappa must be positive");
    if (kappa >= 1.0) return 0.0;
    const double b = std::nextafter(1.0, 0.0);
    double drift = 0.0;
    for (const auto& c : measure.components()) {
        if (c.symmetric) continue;
        const double up = component_moment(c, 1.0, kappa, b, +1);
        const double down = component_moment(c, 1.0, kappa, b, -1);
        drift += up - down;
    }
    return drift;
}

double levy_symbol(const LevyMeasure& measure, double omega) {
    if (omega == 0.0) return 0.0;
    double psi = 0.0;
    for (const auto& c : measure.components()) {
        if (c.symmetric) {
            psi += 2.0 * component_symbol(c, omega, +1);
        } else {
            psi += component_symbol(c, omega, +1) + component_symbol(c, omega, -1);
        }
    }
    return std::min(psi, 0.0);
}

double fractional_symbol_strength(double alpha) {
    // int_0^inf (1 - cos u) u^{-1-alpha} du = pi / (2 Gamma(1+alpha) sin(pi alpha / 2)).
    return std::tgamma(1.0 + alpha) * std::sin(0.5 * std::numbers::pi * alpha) / std::numbers::pi;
}

double density_distance(const LevyMeasure& a, const LevyMeasure& b, double p, double lo, double hi) {
    std::vector<double> cuts{lo, hi, 1.0};
    for (const auto* m : {&a, &b})
        for (const auto& c : m->components()) {
            const auto [s0, s1] = radial_support(c);
            cuts.push_back(s0);
            cuts.push_back(s1);
        }
    std::erase_if(cuts, [&](double x) { return !(x >= lo && x <= hi); });
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double total = 0.0;
    for (int side : {+1, -1}) {
        auto f = [&](double r) {
            // Both densities overflow at the innermost nodes; the integrand is integrable there.
            const double v = std::pow(r, p) * std::abs(a.density(side * r) - b.density(side * r));
            return std::isfinite(v) ? v : 0.0;
        };
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            if (!(cuts[k + 1] > cuts[k])) continue;
            total += integrate_piece(f, cuts[k], cuts[k + 1]);
        }
    }
    // Atoms: net signed mass per radius.
    std::vector<std::pair<double, double>> net;
    auto add_atoms = [&](const LevyMeasure& m, double sign) {
        for (const auto& c : m.components())
            if (c.kind == Kind::point_masses)
                for (const auto& [r, w] : c.atoms)
                    if (r >= c.window_lo && r < c.window_hi && r >= lo && r < hi) net.emplace_back(r, sign * w);
    };
    add_atoms(a, 1.0);
    add_atoms(b, -1.0);
    std::sort(net.begin(), net.end());
    for (std::size_t k = 0; k < net.size();) {
        double w = 0.0;
        std::size_t j = k;
        for (; j < net.size() && net[j].first == net[k].first; ++j) w += net[j].second;
        total += 2.0 * std::pow(net[k].first, p) * std::abs(w);
        k = j;
    }
    return total;
}

LevyQuadrature LevyQuadrature::none(double spacing) {
    LevyQuadrature q;
    q.spacing = spacing;
    q.split_radius = spacing;
    q.tail_cut = 1.0;
    return q;
}

double LevyQuadrature::surrogate_moment() const { return std::max(0.0, small_moment + moment_defect); }

double LevyQuadrature::total_rate() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

int LevyQuadrature::max_offset() const {
    int m = 0;
    for (int o : node_offsets) m = std::max(m, std::abs(o));
    return m;
}

LevyQuadrature build_quadrature(const LevyMeasure& measure, double spacing, double kappa, double tail_cut) {
    if (!(spacing > 0.0)) throw Error("build_quadrature: spacing must be positive");
    if (kappa < spacing)
        throw Error("build_quadrature: kappa (" + std::to_string(kappa) + ") < spacing (" +
                    std::to_string(spacing) + "); small jumps must be sub-grid");
    if (tail_cut < 1.0) throw Error("build_quadrature: tail_cut must be >= 1");
    if (!(kappa < tail_cut)) throw Error("build_quadrature: kappa must be below tail_cut");

    LevyQuadrature q;
    q.spacing = spacing;
    q.split_radius = kappa;
    q.tail_cut = tail_cut;

    const long j_lo = static_cast<long>(std::floor(kappa / spacing + 1e-9)) + 1;
    const long j_hi = static_cast<long>(std::floor(tail_cut / spacing + 1e-9));
    const bool symmetric = measure.symmetric();

    std::vector<long> offsets;
    std::vector<double> w_plus, w_minus;
    double cell_second_moment = 0.0;
    double node_second_moment = 0.0;
    for (long j = j_lo; j <= j_hi; ++j) {
        // Cells partition (kappa, tail_cut]: the first and last absorb the clipped ends.
        const double lo = (j == j_lo) ? kappa : (static_cast<double>(j) - 0.5) * spacing;
        const double hi = (j == j_hi) ? tail_cut : (static_cast<double>(j) + 0.5) * spacing;
        const double wp = measure.radial_moment(0.0, lo, hi, +1);
        const double wm = symmetric ? wp : measure.radial_moment(0.0, lo, hi, -1);
        const double z = static_cast<double>(j) * spacing;
        if (wp > 0.0 || wm > 0.0) {
            offsets.push_back(j);
            w_plus.push_back(wp);
            w_minus.push_back(wm);
        }
        cell_second_moment += measure.radial_moment(2.0, lo, hi, +1) +
                              (symmetric ? measure.radial_moment(2.0, lo, hi, +1)
                                         : measure.radial_moment(2.0, lo, hi, -1));
        node_second_moment += (wp + wm) * z * z;
    }
    for (std::size_t k = offsets.size(); k-- > 0;) {
        q.node_offsets.push_back(-static_cast<int>(offsets[k]));
        q.weights.push_back(w_minus[k]);
    }
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        q.node_offsets.push_back(static_cast<int>(offsets[k]));
        q.weights.push_back(w_plus[k]);
    }

    q.small_moment = small_jump_moment(measure, kappa);
    q.moment_defect = cell_second_moment - node_second_moment;
    q.drift = drift_correction(measure, kappa);
    q.tail_mass_dropped = measure.radial_moment(1.0, tail_cut, kInf);

    if (q.small_moment + q.moment_defect < 0.0)
        q.warnings.push_back("second-moment defect exceeds the small-jump moment; surrogate clamped at 0");
    if (!measure.empty() && q.node_offsets.empty() && q.small_moment == 0.0)
        q.warnings.push_back("degenerate measure: no quadrature nodes and zero small-jump moment");
    else if (!measure.empty() && q.total_rate() == 0.0 && q.small_moment == 0.0)
        q.warnings.push_back("degenerate measure: all weights vanish on this grid");
    if (q.tail_mass_dropped > 1e-10)
        q.warnings.push_back("first-moment tail beyond tail_cut dropped: " + std::to_string(q.tail_mass_dropped));
    return q;
}

double default_tail_cut(const LevyMeasure& measure, double length) {
    double reach = 0.0;
    for (const auto& c : measure.components()) {
        if (c.kind == Kind::point_masses) {
            for (const auto& a : c.atoms) reach = std::max(reach, a.first);
        } else {
            reach = std::max(reach, radial_support(c).second);
        }
    }
    if (reach <= 1.0) return 1.0;
    return std::max(1.0, std::min(reach, 0.5 * length));
}

std::optional<std::string> wraparound_warning(const LevyQuadrature& quad, const Grid1D& grid) {
    if (quad.has_jumps() && quad.max_offset() * grid.spacing() > 0.5 * grid.length() * (1.0 + 1e-12))
        return "tail_cut " + std::to_string(quad.tail_cut) + " exceeds half the period " +
               std::to_string(0.5 * grid.length()) + "; long jumps wrap onto themselves";
    return std::nullopt;
}

}  // namespace levy
