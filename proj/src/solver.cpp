#include "levy/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "levy/nonlocal.hpp"

namespace levy {

void SolverConfig::validate() const {
    if (!(rho >= 0.0)) throw ConfigError("solver: rho must be nonnegative");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("solver: t_end must be a finite nonnegative time");
    if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw ConfigError("solver: cfl_safety must lie in (0, 1]");
    if (!std::is_sorted(snapshot_times.begin(), snapshot_times.end()))
        throw ConfigError("solver: snapshot_times must be sorted");
    if (std::abs(quad.spacing - grid.spacing()) > 1e-12 * grid.spacing())
        throw GridMismatch("solver: quadrature spacing does not match the grid");
    if (state_interval && !(state_interval->hi > state_interval->lo))
        throw ConfigError("solver: empty state interval");
}

double cfl_dt(const SolverConfig& config, const Interval& state) {
    const double h = config.grid.spacing();
    const double lip = config.flux.lipschitz_bound(state);
    const double amax = config.diffusion.max_a(state);
    const double denom = 2.0 * lip / h + 2.0 * (amax + config.rho + config.quad.surrogate_moment()) / (h * h) +
                         config.quad.total_rate();
    double dt = denom > 0.0 ? config.cfl_safety / denom : config.t_end;
    if (config.t_end > 0.0) dt = std::min(dt, config.t_end);
    if (!(dt >= 1e-12))
        throw Error("cfl_dt: time step " + std::to_string(dt) +
                    " underflows; use a coarser operator (larger kappa, smaller strength) or a smaller t_end");
    return dt;
}

double cfl_dt(const SolverConfig& config) {
    if (!config.state_interval) throw PreconditionError("cfl_dt: config has no state interval");
    return cfl_dt(config, *config.state_interval);
}

StepBudget step_budget(const SolverConfig& config, const Interval& state) {
    const double dt = cfl_dt(config, state);
    const auto n = static_cast<std::size_t>(std::ceil(config.t_end / dt - 1e-9));
    return {dt, std::max<std::size_t>(n, 1)};
}

Scheme::Scheme(const SolverConfig& config, const Interval& state) : config_(config), state_(state) {
    config_.validate();
    dt_ = cfl_dt(config_, state_);
    if (!config_.flux.has_closed_split()) {
        const FluxModel& f = config_.flux;
        plus_ = PrimitiveTable([f](double s) { return std::max(f.derivative(s), 0.0); }, state_, 0.0);
        minus_ = PrimitiveTable([f](double s) { return std::min(f.derivative(s), 0.0); }, state_, 0.0);
    }
    use_A_ = !config_.diffusion.identically_zero();
    if (use_A_) {
        const DiffusionModel& d = config_.diffusion;
        A_ = PrimitiveTable([d](double s) { return d.a(s); }, state_, 0.0, d.kinks());
    }
}

double Scheme::face_flux(double a, double b) const {
    const FluxModel& f = config_.flux;
    if (f.has_closed_split()) return f(0.0) + f.split_plus(a) + f.split_minus(b);
    return f(0.0) + plus_(a) + minus_(b);
}

double Scheme::A(double u) const { return use_A_ ? A_(u) : 0.0; }

void Scheme::advance(std::span<const double> u, double dt, std::span<double> out, bool parallel) const {
    const long n = static_cast<long>(u.size());
    if (static_cast<std::size_t>(n) != config_.grid.n_cells() || out.size() != u.size())
        throw GridMismatch("step: field size does not match the grid");
    const double h = config_.grid.spacing();
    const double r1 = dt / h;
    const double r2 = dt / (h * h);
    const double r3 = config_.rho * dt / (h * h);
    const bool jumps = config_.quad.has_jumps() || config_.quad.surrogate_moment() != 0.0 || config_.quad.drift != 0.0;

    std::vector<double> F(u.size());
    std::vector<double> Au(use_A_ ? u.size() : 0);
    std::vector<double> Lu(jumps ? u.size() : 0);

#pragma omp parallel for schedule(static) if (parallel)
    for (long i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        F[k] = face_flux(u[k], u[i + 1 == n ? 0 : k + 1]);
        if (use_A_) Au[k] = A_(u[k]);
    }
    if (jumps) {
        if (parallel)
            kernels::apply_levy(u, config_.quad, Lu);
        else
            kernels::apply_levy_serial(u, config_.quad, Lu);
    }

#pragma omp parallel for schedule(static) if (parallel)
    for (long i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const std::size_t up = i + 1 == n ? 0 : k + 1;
        const std::size_t down = i == 0 ? static_cast<std::size_t>(n - 1) : k - 1;
        double v = u[k] - r1 * (F[k] - F[down]);
        if (use_A_) v = v + r2 * (Au[up] - 2.0 * Au[k] + Au[down]);
        if (jumps) v = v + dt * Lu[k];
        if (r3 != 0.0) v = v + r3 * (u[up] - 2.0 * u[k] + u[down]);
        out[k] = v;
    }

    for (std::size_t k = 0; k < out.size(); ++k)
        if (!std::isfinite(out[k]))
            throw InstabilityError("step produced a non-finite value at cell " + std::to_string(k), k);
}

void Scheme::step(std::span<const double> u, double dt, std::span<double> out) const {
    advance(u, dt, out, true);
}

void Scheme::step_serial(std::span<const double> u, double dt, std::span<double> out) const {
    advance(u, dt, out, false);
}

Field step(const Field& u, const SolverConfig& config, double dt) {
    const Interval state = config.state_interval.value_or(Interval::around(u));
    const Scheme scheme(config, state);
    std::vector<double> out(u.size());
    scheme.step(u.values(), dt, out);
    return Field(u.grid(), std::move(out), u.time() + dt);
}

Trajectory solve(const SolverConfig& config, const Field& u0) {
    if (!(u0.grid() == config.grid)) throw GridMismatch("solve: initial datum is not on the config grid");
    const Interval state = config.state_interval.value_or(Interval::around(u0));
    if (!(min_value(u0) >= state.lo && max_value(u0) <= state.hi))
        throw PreconditionError("solve: initial datum leaves the state interval");
    if (config.t_end == 0.0) return Trajectory(u0.with_time(0.0));
    return solve(Scheme(config, state), u0);
}

Trajectory solve(const Scheme& scheme, const Field& u0) {
    const SolverConfig& config = scheme.config();
    Trajectory traj(u0.with_time(0.0));
    if (config.t_end == 0.0) return traj;

    std::vector<double> targets;
    for (double t : config.snapshot_times)
        if (t > 0.0 && t < config.t_end) targets.push_back(t);
    targets.push_back(config.t_end);
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    const double dt_max = scheme.dt();
    std::vector<double> cur(u0.values().begin(), u0.values().end());
    std::vector<double> next(cur.size());
    double t = 0.0;
    std::size_t steps = 0;
    for (double target : targets) {
        double last_dt = 0.0;
        while (t < target) {
            double dt = dt_max;
            bool lands = false;
            // Absorb slivers so no step is vanishingly short.
            if (t + dt >= target - 1e-9 * dt_max) {
                dt = target - t;
                lands = true;
            }
            scheme.step(cur, dt, next);
            cur.swap(next);
            t = lands ? target : t + dt;
            last_dt = dt;
            if (config.record_steps && !lands) traj.append(Field(config.grid, cur, t), dt);
            if (++steps > config.max_steps)
                throw Error("solve: exceeded max_steps = " + std::to_string(config.max_steps));
        }
        traj.append(Field(config.grid, cur, target), last_dt);
    }
    traj.set_total_steps(steps);
    return traj;
}

}  // namespace levy
