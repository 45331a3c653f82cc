#pragma once

#include <optional>
#include <string>
#include <vector>

#include "levy/grid.hpp"
#include "levy/levy_measure.hpp"
#include "levy/local_models.hpp"

namespace levy {

/// phi(t, x) = B(x) R(t): B = cos^4(pi d / 2w) on the periodic distance |d| < w from the
/// centre, R = (1 + cos(pi t / T_r)) / 2 up to the ramp end T_r and 0 after.
class TestFunction {
public:
    static TestFunction bump(double center, double width, double ramp_end);
    /// phi = 1; the weak form then reduces to total entropy decay.
    static TestFunction unit();

    const std::string& id() const { return id_; }
    bool is_unit() const { return unit_; }

    double space(double x, double length) const;
    double space_dx(double x, double length) const;
    double space_dxx(double x, double length) const;
    double time(double t) const;
    double time_dt(double t) const;
    double ramp_end() const { return ramp_end_; }

    double value(double t, double x, double length) const { return time(t) * space(x, length); }

private:
    double offset(double x, double length) const;

    std::string id_;
    bool unit_ = false;
    double center_ = 0.0;
    double width_ = 1.0;
    double ramp_end_ = 1.0;
};

enum class AuditMode { full, simpler };

/// How m_u evaluates eta_bar''(u_i, u_j)(u_j - u_i)^2 for the large jumps: as the Taylor
/// remainder eta(u_j) - eta(u_i) - eta'(u_i)(u_j - u_i) summed against L, or pair by pair
/// with eta_bar_double_prime.
enum class JumpPath { closed_form, quadrature };

struct DissipationReport {
    double n_u = 0.0;
    double m_u = 0.0;
    double lhs = 0.0;
    double residual = 0.0;
    AuditMode mode = AuditMode::full;
};

/// Evidence for the simpler mode: either the total first moment is finite, or the total
/// second moment is finite and the trajectory has bounded variation.
struct MeasureMoments {
    double first_total = 0.0;
    double second_total = 0.0;
};
MeasureMoments total_moments(const LevyMeasure& measure);

/// Forward-Euler weights: snapshot k holds on [t_k, t_{k+1}), and the time derivative is
/// moved onto R by summation by parts, so recording every step reproduces the scheme's update.
struct TimeWeights {
    std::vector<double> plain;    // t_{k+1} - t_k
    std::vector<double> ramp;     // int_{t_k}^{t_{k+1}} R
    std::vector<double> ramp_dt;  // Rbar_k - Rbar_{k-1}, Rbar the step average of R
    double start = 0.0;           // Rbar_0, weight of the initial state
    double end = 0.0;             // Rbar_{K-1}, weight of the final state
};
TimeWeights time_weights(const std::vector<double>& times, const TestFunction& phi);

/// Per-trajectory quantities shared by every entropy of a battery: test-function samples,
/// L[B], time weights and face increments of u and zeta(u) for each snapshot. Several test
/// functions can share one workspace; entropy values are then computed once per snapshot.
///
/// Gradient terms live on faces i+1/2 with one-sided differences, and eta''(u) is replaced
/// by its mean over [u_i, u_{i+1}]. For smooth u this is the same Riemann sum to O(h^2);
/// across unresolved fronts it never exceeds the dissipation the scheme actually applies.
class AuditWorkspace {
public:
    AuditWorkspace(const Trajectory& traj, const DiffusionModel& diff, const LevyQuadrature& quad,
                   std::vector<TestFunction> phis, double rho = 0.0);
    AuditWorkspace(const Trajectory& traj, const DiffusionModel& diff, const LevyQuadrature& quad,
                   const TestFunction& phi, double rho = 0.0);

    std::size_t test_function_count() const { return slices_.size(); }
    const TestFunction& test_function(std::size_t p) const { return slices_.at(p).phi; }

    /// One report per test function, in construction order.
    std::vector<DissipationReport> reports(const EntropyTriple& eta, AuditMode mode,
                                           JumpPath path = JumpPath::closed_form) const;
    /// Single-test-function accessors; they use the first test function.
    DissipationReport report(const EntropyTriple& eta, AuditMode mode) const;
    double parabolic(const EntropyTriple& eta) const;
    double fractional(const EntropyTriple& eta, JumpPath path = JumpPath::closed_form) const;
    double lhs(const EntropyTriple& eta) const;

    const Trajectory& trajectory() const { return traj_; }

private:
    struct Slice {
        TestFunction phi;
        TimeWeights weights;
        std::vector<double> B, Bface, Bdiff, Bxx, LB;
        std::vector<double> LjB;  // adjoint of the large-jump sum applied to B
    };
    struct Terms {
        double lhs = 0.0;
        double n_u = 0.0;
        double m_u = 0.0;
    };
    std::vector<Terms> accumulate(const EntropyTriple& eta, JumpPath path) const;

    const Trajectory& traj_;
    const LevyQuadrature& quad_;
    double rho_;
    std::vector<Slice> slices_;
    std::vector<std::vector<double>> Lju_;     // large-jump sum applied to u per snapshot
    std::vector<std::vector<double>> energy_;  // sum_k (D+ zeta_k(u))^2 per snapshot and face
    std::vector<std::vector<double>> grad2_;   // (D+ u)^2
};

/// Checks the simpler-mode hypothesis; throws PreconditionError naming the failed branch.
void require_simpler_mode(const Trajectory& traj, const std::optional<MeasureMoments>& moments);

double parabolic_dissipation(const Trajectory& traj, const EntropyTriple& eta, const DiffusionModel& diff,
                             const TestFunction& phi);
double fractional_dissipation(const Trajectory& traj, const EntropyTriple& eta, const LevyQuadrature& quad,
                              const TestFunction& phi, JumpPath path = JumpPath::closed_form);

DissipationReport entropy_residual(const Trajectory& traj, const EntropyTriple& eta, const DiffusionModel& diff,
                                   const LevyQuadrature& quad, const TestFunction& phi, AuditMode mode,
                                   const std::optional<MeasureMoments>& moments = std::nullopt,
                                   double rho = 0.0);

/// L^2 space-time distance between D_x zeta^psi(u) and psi(u) D_x zeta(u).
double chain_rule_residual(const Trajectory& traj, const DiffusionModel& diff, const ScalarFn& psi);

/// sum_j w_j (u_{i+j} - u_i)^2 plus the surrogate sigma_eff^2 (D+ u)^2, integrated in space-time.
double square_increment_functional(const Trajectory& traj, const LevyQuadrature& quad);

struct BatteryEntry {
    EntropyProfile profile;
    double c;
    std::string label;
};
/// z^2/2, exp, and Kruzkov plus/minus at eps in {0.1, 0.01} over 9 thresholds spanning I.
std::vector<BatteryEntry> entropy_battery(const Interval& I);

}  // namespace levy
