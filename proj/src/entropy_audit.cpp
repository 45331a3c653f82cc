#include "levy/entropy_audit.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "levy/integrate.hpp"
#include "levy/nonlocal.hpp"

namespace levy {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t wrap(long k, std::size_t n) {
    const long m = static_cast<long>(n);
    if (k >= 0 && k < m) return static_cast<std::size_t>(k);
    return static_cast<std::size_t>(((k % m) + m) % m);
}

double forward(std::span<const double> v, std::size_t i, double h) {
    return (v[i + 1 == v.size() ? 0 : i + 1] - v[i]) / h;
}

double central(std::span<const double> v, std::size_t i, double h) {
    const std::size_t n = v.size();
    return (v[i + 1 == n ? 0 : i + 1] - v[i == 0 ? n - 1 : i - 1]) / (2.0 * h);
}

// Deterministic sum of per-cell terms computed in parallel.
template <class F>
double cell_sum(std::size_t n, F&& term) {
    std::vector<double> parts(n);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(n); ++i) parts[static_cast<std::size_t>(i)] = term(static_cast<std::size_t>(i));
    double s = 0.0;
    for (double p : parts) s += p;
    return s;
}

}  // namespace

// ---- test functions ----

TestFunction TestFunction::bump(double center, double width, double ramp_end) {
    if (!(width > 0.0) || !(ramp_end > 0.0)) throw Error("bump test function needs width > 0 and ramp_end > 0");
    TestFunction phi;
    phi.center_ = center;
    phi.width_ = width;
    phi.ramp_end_ = ramp_end;
    std::ostringstream id;
    id << "bump(" << center << "," << width << "," << ramp_end << ")";
    phi.id_ = id.str();
    return phi;
}

TestFunction TestFunction::unit() {
    TestFunction phi;
    phi.unit_ = true;
    phi.id_ = "unit";
    return phi;
}

double TestFunction::offset(double x, double length) const {
    double d = std::fmod(x - center_, length);
    if (d < -0.5 * length) d += length;
    if (d >= 0.5 * length) d -= length;
    return d;
}

double TestFunction::space(double x, double length) const {
    if (unit_) return 1.0;
    const double d = offset(x, length);
    if (std::abs(d) >= width_) return 0.0;
    const double c = std::cos(kPi * d / (2.0 * width_));
    return c * c * c * c;
}

double TestFunction::space_dx(double x, double length) const {
    if (unit_) return 0.0;
    const double d = offset(x, length);
    if (std::abs(d) >= width_) return 0.0;
    const double k = kPi / (2.0 * width_);
    const double c = std::cos(k * d);
    const double s = std::sin(k * d);
    return -4.0 * k * c * c * c * s;
}

double TestFunction::space_dxx(double x, double length) const {
    if (unit_) return 0.0;
    const double d = offset(x, length);
    if (std::abs(d) >= width_) return 0.0;
    const double k = kPi / (2.0 * width_);
    const double c = std::cos(k * d);
    const double s = std::sin(k * d);
    return k * k * (12.0 * c * c * s * s - 4.0 * c * c * c * c);
}

double TestFunction::time(double t) const {
    if (unit_) return 1.0;
    if (t >= ramp_end_) return 0.0;
    return 0.5 * (1.0 + std::cos(kPi * t / ramp_end_));
}

double TestFunction::time_dt(double t) const {
    if (unit_ || t >= ramp_end_) return 0.0;
    return -0.5 * kPi / ramp_end_ * std::sin(kPi * t / ramp_end_);
}

// ---- moments and weights ----

MeasureMoments total_moments(const LevyMeasure& measure) {
    auto moment = [&](double p) {
        try {
            return measure.radial_moment(p, 0.0, kInf);
        } catch (const InvalidMeasure&) {
            return kInf;
        } catch (const QuadratureError&) {
            return kInf;
        }
    };
    return {moment(1.0), moment(2.0)};
}

TimeWeights time_weights(const std::vector<double>& times, const TestFunction& phi) {
    const std::size_t K = times.size();
    TimeWeights w{std::vector<double>(K, 0.0), std::vector<double>(K, 0.0), std::vector<double>(K, 0.0), 0.0, 0.0};
    if (K < 2) return w;
    std::vector<double> mean(K - 1);
    for (std::size_t k = 0; k + 1 < K; ++k) {
        const double a = times[k];
        const double b = times[k + 1];
        double integral = 0.0;
        if (phi.ramp_end() > a && phi.ramp_end() < b) {
            integral = quad::gauss_legendre<10>([&](double t) { return phi.time(t); }, a, phi.ramp_end()) +
                       quad::gauss_legendre<10>([&](double t) { return phi.time(t); }, phi.ramp_end(), b);
        } else {
            integral = quad::gauss_legendre<10>([&](double t) { return phi.time(t); }, a, b);
        }
        w.plain[k] = b - a;
        w.ramp[k] = integral;
        mean[k] = integral / (b - a);
    }
    for (std::size_t k = 1; k + 1 < K; ++k) w.ramp_dt[k] = mean[k] - mean[k - 1];
    w.start = mean.front();
    w.end = mean.back();
    return w;
}

// ---- workspace ----

AuditWorkspace::AuditWorkspace(const Trajectory& traj, const DiffusionModel& diff, const LevyQuadrature& quad,
                               const TestFunction& phi, double rho)
    : AuditWorkspace(traj, diff, quad, std::vector<TestFunction>{phi}, rho) {}

AuditWorkspace::AuditWorkspace(const Trajectory& traj, const DiffusionModel& diff, const LevyQuadrature& quad,
                               std::vector<TestFunction> phis, double rho)
    : traj_(traj), quad_(quad), rho_(rho) {
    if (phis.empty()) throw Error("AuditWorkspace: no test function");
    const Grid1D& grid = traj.grid();
    const std::size_t n = grid.n_cells();
    const double h = grid.spacing();
    const auto& offsets = quad.node_offsets;
    const auto& wj = quad.weights;

    for (TestFunction& phi : phis) {
        Slice sl{std::move(phi), {}, {}, {}, {}, {}, {}, {}};
        sl.weights = time_weights(traj.times(), sl.phi);
        sl.B.resize(n);
        sl.Bface.resize(n);
        sl.Bdiff.resize(n);
        sl.Bxx.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            sl.B[i] = sl.phi.space(grid.x(i), grid.length());
            sl.Bface[i] = sl.phi.space(grid.x(i) + 0.5 * h, grid.length());
            sl.Bxx[i] = sl.phi.space_dxx(grid.x(i), grid.length());
        }
        for (std::size_t i = 0; i < n; ++i) sl.Bdiff[i] = forward(sl.B, i, h);
        const Field LB = apply_levy(Field(grid, sl.B), quad);
        sl.LB.assign(LB.values().begin(), LB.values().end());
        sl.LjB.assign(n, 0.0);
        for (std::size_t i = 0; i < n && !offsets.empty(); ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < offsets.size(); ++j)
                acc += wj[j] * (sl.B[wrap(static_cast<long>(i) - offsets[j], n)] - sl.B[i]);
            sl.LjB[i] = acc;
        }
        slices_.push_back(std::move(sl));
    }

    Lju_.resize(traj.size());
    if (!offsets.empty()) {
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const auto u = traj[k].values();
            auto& out = Lju_[k];
            out.resize(n);
#pragma omp parallel for schedule(static)
            for (long il = 0; il < static_cast<long>(n); ++il) {
                const auto i = static_cast<std::size_t>(il);
                double acc = 0.0;
                for (std::size_t j = 0; j < offsets.size(); ++j) acc += wj[j] * (u[wrap(il + offsets[j], n)] - u[i]);
                out[i] = acc;
            }
        }
    }

    // zeta_k tabulated over the range the trajectory visits.
    std::vector<PrimitiveTable> zeta_tables;
    if (!diff.identically_zero()) {
        Interval range = Interval::around(traj.initial());
        for (const Field& f : traj.snapshots()) range = range.hull(Interval::around(f));
        for (std::size_t c = 0; c < diff.components(); ++c)
            zeta_tables.emplace_back([&diff, c](double s) { return diff.sigma(c, s); }, range, 0.0, diff.kinks(),
                                     PrimitiveTable::Interp::hermite);
    }

    energy_.resize(traj.size());
    grad2_.resize(traj.size());
    std::vector<double> z(n);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto u = traj[k].values();
        grad2_[k].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double g = forward(u, i, h);
            grad2_[k][i] = g * g;
        }
        energy_[k].assign(n, 0.0);
        for (const PrimitiveTable& table : zeta_tables) {
            for (std::size_t i = 0; i < n; ++i) z[i] = table(u[i]);
            for (std::size_t i = 0; i < n; ++i) {
                const double g = forward(z, i, h);
                energy_[k][i] += g * g;
            }
        }
    }
}

std::vector<AuditWorkspace::Terms> AuditWorkspace::accumulate(const EntropyTriple& eta, JumpPath path) const {
    const std::size_t n = traj_.grid().n_cells();
    const std::size_t K = traj_.size();
    const double h = traj_.grid().spacing();
    const double half_surrogate = 0.5 * quad_.surrogate_moment();
    const auto& offsets = quad_.node_offsets;
    const auto& wj = quad_.weights;
    const bool jumps = !offsets.empty();

    std::vector<Terms> out(slices_.size());
    std::vector<double> e(n), qp(n), qq(n), qf(n), r(n), sec(n), ep(n), mq(n);
    for (std::size_t k = 0; k < K; ++k) {
        bool active = false;
        for (const Slice& sl : slices_)
            active = active || sl.weights.ramp[k] != 0.0 || sl.weights.ramp_dt[k] != 0.0 ||
                     (k == 0 && sl.weights.start != 0.0) || (k + 1 == K && sl.weights.end != 0.0);
        if (!active) continue;
        const auto u = traj_[k].values();
        const auto& g2 = grad2_[k];
        const auto& en = energy_[k];
#pragma omp parallel for schedule(static)
        for (long il = 0; il < static_cast<long>(n); ++il) {
            const auto i = static_cast<std::size_t>(il);
            const std::size_t ip = i + 1 == n ? 0 : i + 1;
            e[i] = eta.eta(u[i]);
            qp[i] = eta.q_plus(u[i]);
            qq[i] = eta.q(u[i]);
            r[i] = (eta.has_r() ? eta.r(u[i]) : 0.0) + rho_ * e[i];
            sec[i] = (en[i] != 0.0 || g2[i] != 0.0) ? eta.eta_secant(u[i], u[ip]) : 0.0;
            if (jumps && path == JumpPath::closed_form) ep[i] = eta.eta_prime(u[i]);
            if (jumps && path == JumpPath::quadrature) {
                double acc = 0.0;
                for (std::size_t j = 0; j < offsets.size(); ++j) {
                    const double there = u[wrap(il + offsets[j], n)];
                    const double d = there - u[i];
                    if (d != 0.0) acc += wj[j] * eta_bar_double_prime(eta.profile(), u[i], there, eta.c()) * d * d;
                }
                mq[i] = acc;
            }
        }
        // Engquist-Osher entropy flux at face i+1/2: q+(u_i) + q-(u_{i+1}).
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t ip = i + 1 == n ? 0 : i + 1;
            qf[i] = qp[i] + qq[ip] - qp[ip];
        }
        for (std::size_t p = 0; p < slices_.size(); ++p) {
            const Slice& sl = slices_[p];
            const double wr = sl.weights.ramp[k];
            const double wd = sl.weights.ramp_dt[k];
            double lhs = 0.0, par = 0.0, sur = 0.0, jmp = 0.0, ends = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                lhs += wd * e[i] * sl.B[i] + wr * (qf[i] * sl.Bdiff[i] + r[i] * sl.Bxx[i] + e[i] * sl.LB[i]);
                par += sec[i] * (en[i] + rho_ * g2[i]) * sl.Bface[i];
                sur += sec[i] * g2[i] * sl.Bface[i];
            }
            if (jumps && wr != 0.0) {
                if (path == JumpPath::closed_form) {
                    // sum_i B_i sum_j w_j [eta(u_{i+j}) - eta(u_i) - eta'(u_i)(u_{i+j} - u_i)]
                    const auto& lu = Lju_[k];
                    for (std::size_t i = 0; i < n; ++i) jmp += e[i] * sl.LjB[i] - sl.B[i] * ep[i] * lu[i];
                } else {
                    for (std::size_t i = 0; i < n; ++i) jmp += mq[i] * sl.B[i];
                }
            }
            if (k == 0 && sl.weights.start != 0.0)
                for (std::size_t i = 0; i < n; ++i) ends += sl.weights.start * e[i] * sl.B[i];
            if (k + 1 == K && sl.weights.end != 0.0)
                for (std::size_t i = 0; i < n; ++i) ends -= sl.weights.end * e[i] * sl.B[i];
            out[p].lhs += h * (lhs + ends);
            out[p].n_u += wr * h * par;
            // The rearranged closed form can dip below 0 by rounding only; each summand is nonnegative.
            out[p].m_u += wr * h * (half_surrogate * sur + std::max(jmp, 0.0));
        }
    }
    return out;
}

std::vector<DissipationReport> AuditWorkspace::reports(const EntropyTriple& eta, AuditMode mode,
                                                       JumpPath path) const {
    std::vector<DissipationReport> out;
    for (const Terms& t : accumulate(eta, path)) {
        DissipationReport r;
        r.mode = mode;
        r.lhs = t.lhs;
        r.n_u = t.n_u;
        r.m_u = t.m_u;
        r.residual = mode == AuditMode::full ? r.lhs - r.n_u - r.m_u : r.lhs - r.n_u;
        out.push_back(r);
    }
    return out;
}

DissipationReport AuditWorkspace::report(const EntropyTriple& eta, AuditMode mode) const {
    return reports(eta, mode).front();
}

double AuditWorkspace::parabolic(const EntropyTriple& eta) const { return accumulate(eta, JumpPath::closed_form).front().n_u; }

double AuditWorkspace::fractional(const EntropyTriple& eta, JumpPath path) const {
    return accumulate(eta, path).front().m_u;
}

double AuditWorkspace::lhs(const EntropyTriple& eta) const { return accumulate(eta, JumpPath::closed_form).front().lhs; }

// ---- free functions ----

void require_simpler_mode(const Trajectory& traj, const std::optional<MeasureMoments>& moments) {
    if (!moments)
        throw PreconditionError("simpler audit mode: measure moments not supplied, hypothesis unverifiable");
    if (std::isfinite(moments->first_total)) return;
    if (!std::isfinite(moments->second_total))
        throw PreconditionError(
            "simpler audit mode: total first moment diverges and total second moment diverges");
    const double bv0 = bv_seminorm(traj.initial());
    for (const Field& f : traj.snapshots())
        if (bv_seminorm(f) > bv0 * (1.0 + 1e-9) + 1e-12)
            throw PreconditionError(
                "simpler audit mode: total first moment diverges and the trajectory's BV seminorm grows");
}

double parabolic_dissipation(const Trajectory& traj, const EntropyTriple& eta, const DiffusionModel& diff,
                             const TestFunction& phi) {
    const LevyQuadrature none = LevyQuadrature::none(traj.grid().spacing());
    return AuditWorkspace(traj, diff, none, phi).parabolic(eta);
}

double fractional_dissipation(const Trajectory& traj, const EntropyTriple& eta, const LevyQuadrature& quad,
                              const TestFunction& phi, JumpPath path) {
    return AuditWorkspace(traj, DiffusionModel::none(), quad, phi).fractional(eta, path);
}

DissipationReport entropy_residual(const Trajectory& traj, const EntropyTriple& eta, const DiffusionModel& diff,
                                   const LevyQuadrature& quad, const TestFunction& phi, AuditMode mode,
                                   const std::optional<MeasureMoments>& moments, double rho) {
    if (mode == AuditMode::simpler) require_simpler_mode(traj, moments);
    return AuditWorkspace(traj, diff, quad, phi, rho).report(eta, mode);
}

double chain_rule_residual(const Trajectory& traj, const DiffusionModel& diff, const ScalarFn& psi) {
    if (diff.identically_zero()) return 0.0;
    const double h = traj.grid().spacing();
    const TimeWeights w = time_weights(traj.times(), TestFunction::unit());
    const std::size_t n = traj.grid().n_cells();
    Interval range = Interval::around(traj.initial());
    for (const Field& f : traj.snapshots()) range = range.hull(Interval::around(f));
    std::vector<PrimitiveTable> plain, weighted;
    for (std::size_t c = 0; c < diff.components(); ++c) {
        plain.emplace_back([&diff, c](double s) { return diff.sigma(c, s); }, range, 0.0, diff.kinks(),
                           PrimitiveTable::Interp::hermite);
        weighted.emplace_back([&diff, &psi, c](double s) { return psi(s) * diff.sigma(c, s); }, range, 0.0,
                              diff.kinks(), PrimitiveTable::Interp::hermite);
    }
    double total = 0.0;
    std::vector<double> zp(n), zw(n);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (w.plain[k] == 0.0) continue;
        const auto u = traj[k].values();
        double sum = 0.0;
        for (std::size_t c = 0; c < plain.size(); ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                zp[i] = plain[c](u[i]);
                zw[i] = weighted[c](u[i]);
            }
            for (std::size_t i = 0; i < n; ++i) {
                const double d = central(zw, i, h) - psi(u[i]) * central(zp, i, h);
                sum += d * d;
            }
        }
        total += w.plain[k] * h * sum;
    }
    return std::sqrt(total);
}

double square_increment_functional(const Trajectory& traj, const LevyQuadrature& quad) {
    const double h = traj.grid().spacing();
    const TimeWeights w = time_weights(traj.times(), TestFunction::unit());
    double total = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto u = traj[k].values();
        const std::size_t n = u.size();
        total += w.plain[k] * h * cell_sum(n, [&](std::size_t i) {
            double s = 0.0;
            for (std::size_t j = 0; j < quad.node_offsets.size(); ++j) {
                const double d = u[wrap(static_cast<long>(i) + quad.node_offsets[j], n)] - u[i];
                s += quad.weights[j] * d * d;
            }
            const double g = forward(u, i, h);
            return s + quad.surrogate_moment() * g * g;
        });
    }
    return total;
}

std::vector<BatteryEntry> entropy_battery(const Interval& I) {
    using V = KruzkovRegularization::Variant;
    std::vector<BatteryEntry> out;
    out.push_back({EntropyProfile::quadratic(), 0.0, "quadratic"});
    out.push_back({EntropyProfile::exponential(), 0.0, "exp"});
    for (double eps : {0.1, 0.01})
        for (V variant : {V::plus, V::minus})
            for (int k = 0; k < 9; ++k) {
                const double c = I.lo + I.width() * k / 8.0;
                EntropyProfile p = EntropyProfile::kruzkov({eps, variant});
                std::ostringstream label;
                label << p.name() << "@" << eps;
                out.push_back({std::move(p), c, label.str()});
            }
    return out;
}

}  // namespace levy
