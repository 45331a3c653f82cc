#pragma once

#include <optional>
#include <span>
#include <vector>

#include "levy/grid.hpp"
#include "levy/levy_measure.hpp"
#include "levy/local_models.hpp"

namespace levy {

struct SolverConfig {
    Grid1D grid{64, 1.0};
    FluxModel flux = FluxModel::zero();
    DiffusionModel diffusion = DiffusionModel::none();
    LevyQuadrature quad = LevyQuadrature::none(grid.spacing());
    double rho = 0.0;
    double t_end = 0.0;
    double cfl_safety = 0.9;
    std::vector<double> snapshot_times;
    /// Shared state interval; paired runs must use the same one so they share dt.
    std::optional<Interval> state_interval;
    std::size_t max_steps = 1'000'000;
    /// Also keep the state after every time step, not only at snapshot_times.
    bool record_steps = false;

    void validate() const;
};

struct StepBudget {
    double dt;
    std::size_t n_steps;
};

/// Discretisation of one SolverConfig on a fixed state interval: lookup tables, dt and the update map.
class Scheme {
public:
    Scheme(const SolverConfig& config, const Interval& state);

    double dt() const { return dt_; }
    const Interval& state() const { return state_; }
    const SolverConfig& config() const { return config_; }

    /// Engquist-Osher flux from closed forms or tables.
    double face_flux(double a, double b) const;
    /// int_0^u a, tabulated.
    double A(double u) const;

    /// One explicit step, OpenMP over cells.
    void step(std::span<const double> u, double dt, std::span<double> out) const;
    /// Same arithmetic on one thread with the reference jump kernel.
    void step_serial(std::span<const double> u, double dt, std::span<double> out) const;

private:
    void advance(std::span<const double> u, double dt, std::span<double> out, bool parallel) const;

    SolverConfig config_;
    Interval state_;
    double dt_ = 0.0;
    PrimitiveTable plus_;
    PrimitiveTable minus_;
    PrimitiveTable A_;
    bool use_A_ = false;
};

/// safety / (2 Lip f / h + 2 (max a + rho + sigma_eff^2) / h^2 + sum_j w_j), capped at t_end.
double cfl_dt(const SolverConfig& config, const Interval& state);
/// Uses config.state_interval, which must be set.
double cfl_dt(const SolverConfig& config);
StepBudget step_budget(const SolverConfig& config, const Interval& state);

/// Single step with dt <= cfl_dt; state interval from the config or from u.
Field step(const Field& u, const SolverConfig& config, double dt);

/// Marches to t_end, shortening steps to land on every snapshot time.
Trajectory solve(const SolverConfig& config, const Field& u0);
Trajectory solve(const Scheme& scheme, const Field& u0);

}  // namespace levy
