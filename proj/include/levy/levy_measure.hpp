#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "levy/grid.hpp"

namespace levy {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Pure-jump Levy measure pi(dz) = m(z) dz on R \ {0}, stored as a sum of
/// components, each optionally restricted to a radial window lo <= |z| < hi.
class LevyMeasure {
public:
    enum class Kind { fractional_truncated, fractional_full, custom, point_masses };

    struct Component {
        Kind kind = Kind::custom;
        double alpha = 0.0;
        double strength = 0.0;
        std::function<double(double)> density;  // custom only; evaluated at signed z
        double support_radius = kInf;
        std::vector<std::pair<double, double>> atoms;  // (|z|, mass) placed at +-|z|
        double window_lo = 0.0;
        double window_hi = kInf;
        bool symmetric = true;
    };

    LevyMeasure() = default;

    static LevyMeasure none() { return {}; }
    /// strength |z|^{-1-alpha} 1_{|z|<1}, alpha in (0, 2).
    static LevyMeasure fractional_truncated(double alpha, double strength);
    /// strength |z|^{-1-alpha}, alpha in (1, 2) so the outer first moment is finite.
    static LevyMeasure fractional_full(double alpha, double strength);
    /// Density sampled at signed z; `symmetric = false` disables the evenness check
    /// (used for one-sided test measures only).
    static LevyMeasure custom(std::function<double(double)> density, double support_radius,
                              bool symmetric = true);
    /// Piecewise-linear density from samples (z_k, m_k), z_k > 0 increasing, mirrored to z < 0.
    static LevyMeasure from_table(std::vector<double> z, std::vector<double> m);
    static LevyMeasure from_table_csv(const std::filesystem::path& path);
    /// Atoms of the given masses at +-|z_k|.
    static LevyMeasure point_masses(std::vector<std::pair<double, double>> atoms);

    /// Keep only jumps with lo <= |z| < hi.
    LevyMeasure restricted(double lo, double hi) const;
    LevyMeasure scaled(double factor) const;
    LevyMeasure operator+(const LevyMeasure& other) const;

    bool empty() const { return components_.empty(); }
    bool symmetric() const;
    const std::vector<Component>& components() const { return components_; }

    /// Density of the absolutely continuous part (atoms excluded).
    double density(double z) const;

    /// int over r in (a, b] of g(side * r) m(side * r) dr, side = +1 or -1, 0 <= a < b.
    double integrate_side(const std::function<double(double)>& g, double a, double b, int side) const;
    /// int over r in (a, b] of r^p m(side * r) dr, closed form where available.
    double radial_moment(double p, double a, double b, int side) const;
    /// Both sides of radial_moment.
    double radial_moment(double p, double a, double b) const {
        return radial_moment(p, a, b, +1) + radial_moment(p, a, b, -1);
    }

    std::string describe() const;

private:
    std::vector<Component> components_;
};

struct MomentReport {
    double second_moment_inner = 0.0;  // int_{|z|<1} z^2 pi(dz)
    double first_moment_outer = 0.0;   // int_{|z|>=1} |z| pi(dz)
};

MomentReport check_integrability(const LevyMeasure& measure);

/// sigma^2_kappa = int_{|z|<=kappa} z^2 pi(dz).
double small_jump_moment(const LevyMeasure& measure, double kappa);

/// b_kappa = int_{kappa<|z|<1} z pi(dz); zero for symmetric measures and for kappa >= 1.
double drift_correction(const LevyMeasure& measure, double kappa);

/// psi(omega) = int (cos(omega z) - 1) pi(dz) <= 0.
double levy_symbol(const LevyMeasure& measure, double omega);

/// Strength s for which s |z|^{-1-alpha} dz has symbol -|omega|^alpha.
double fractional_symbol_strength(double alpha);

/// int_{lo<=|z|<hi} |z|^p |m_a(z) - m_b(z)| dz over the absolutely continuous parts,
/// plus |z|^p |mass difference| for atoms.
double density_distance(const LevyMeasure& a, const LevyMeasure& b, double p, double lo, double hi);

/// Grid-aligned discretisation of pi with nodes z_j = j h, kappa < |z_j| <= tail_cut.
struct LevyQuadrature {
    double spacing = 0.0;
    std::vector<int> node_offsets;  // ascending
    std::vector<double> weights;    // 1/time
    double split_radius = 0.0;
    double small_moment = 0.0;
    /// int_{kappa<|z|<=cut} z^2 pi(dz) - sum_j w_j z_j^2; folded into the surrogate.
    double moment_defect = 0.0;
    double drift = 0.0;
    double tail_cut = 0.0;
    double tail_mass_dropped = 0.0;
    std::vector<std::string> warnings;

    static LevyQuadrature none(double spacing);

    /// Coefficient of the three-point small-jump surrogate (sigma^2_eff / 2) u_xx.
    double surrogate_moment() const;
    double total_rate() const;
    int max_offset() const;
    bool has_jumps() const { return !node_offsets.empty(); }
};

LevyQuadrature build_quadrature(const LevyMeasure& measure, double spacing, double kappa,
                                double tail_cut);

/// 1 for measures supported in |z| < 1, otherwise max(1, length / 2).
double default_tail_cut(const LevyMeasure& measure, double length);

/// Warning text when jumps beyond half the period wrap onto themselves.
std::optional<std::string> wraparound_warning(const LevyQuadrature& quad, const Grid1D& grid);

}  // namespace levy
