#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "levy/entropy_audit.hpp"
#include "levy/grid.hpp"
#include "levy/levy_measure.hpp"
#include "levy/nonlocal.hpp"
#include "levy/solver.hpp"

namespace levy {

enum class ExperimentKind { solve, contraction, comparison, contdep, regularity, opcheck, audit };
enum class Ingredient { flux, sigma, measure_small, measure_large };
enum class Status { pass, fail, inconclusive };

std::string to_string(ExperimentKind kind);
std::string to_string(Ingredient ingredient);
std::string to_string(Status status);
ExperimentKind parse_experiment_kind(const std::string& name);
Ingredient parse_ingredient(const std::string& name);

struct Check {
    std::string name;
    Status status = Status::pass;
    std::string detail;
};

/// fail if any check failed, else inconclusive if any was, else pass.
Status overall(const std::vector<Check>& checks);
/// 0 pass, 1 fail, 2 inconclusive.
int exit_code(Status status);

/// Band-limited data sum_{k=1}^{modes} a_k cos(2 pi k x / L) + b_k sin(2 pi k x / L) with
/// a_k, b_k ~ U(-1, 1) / k, divided by sum |a_k| + |b_k| so that |u| <= 1.
/// `stream` selects an independent sequence for the same seed.
Field random_fourier(const Grid1D& grid, std::uint64_t seed, std::uint64_t stream = 0, int modes = 8);

/// cos^4 bump of the given half-width centred at x0 (periodic), peak 1.
Field cos4_bump(const Grid1D& grid, double x0, double half_width);

struct InitialData {
    enum class Kind { random, sine, square, csv };
    Kind kind = Kind::random;
    double amplitude = 1.0;
    double offset = 0.0;
    int wavenumber = 1;
    std::filesystem::path path;

    Field make(const Grid1D& grid, std::uint64_t seed, std::uint64_t stream = 0) const;
};

/// How the second datum of a pair is formed. Random pairs draw v0 from an independent
/// stream; otherwise v0 = u0 + constant + bump * cos4_bump + random * |random_fourier|.
struct PairSpec {
    bool independent = true;
    double constant = 0.0;
    double bump = 0.0;
    double random = 0.0;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::solve;
    SolverConfig base;
    /// Source of base.quad; rebuilt whenever an experiment changes resolution.
    LevyMeasure measure;
    double kappa_cells = 1.0;
    /// 0 selects default_tail_cut.
    double tail_cut = 0.0;

    InitialData initial;
    PairSpec pair;
    std::vector<std::uint64_t> seeds{0};

    // contdep
    std::vector<Ingredient> ingredients;
    std::vector<double> ladder{0.04, 0.02, 0.01};
    std::vector<double> times{0.01, 0.02, 0.05, 0.1};
    /// Also perturb the first two ingredients together and check the triangle bound.
    bool combined = false;

    // regularity levels, or the two symbol levels of opcheck
    std::vector<std::size_t> resolutions{128, 256, 512};
    std::size_t samples = 80;
    /// Fraction of t_end ignored by the "smooth" test.
    double transient = 0.1;
    /// Expected regularity class; empty accepts either.
    std::string expect_class;

    // audit
    std::size_t coarse_divisor = 2;
    AuditMode audit_mode = AuditMode::full;

    std::filesystem::path output_dir;

    void validate() const;
};

/// base with the grid, quadrature and time spacing rebuilt for n cells.
SolverConfig at_resolution(const ExperimentConfig& cfg, std::size_t n);
/// Rebuilds base.quad from the measure on the current grid.
void refresh_quadrature(ExperimentConfig& cfg);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Least-squares line through (log x, log y); needs >= 2 points with x, y > 0.
RateFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y);

struct InitialPair {
    std::uint64_t seed = 0;
    Field u0;
    Field v0;
};

/// Pairs from cfg.seeds and cfg.pair on the base grid.
std::vector<InitialPair> make_pairs(const ExperimentConfig& cfg);

struct SolveReport {
    Trajectory trajectory;
    std::vector<Check> checks;
};

struct ContractionRow {
    std::uint64_t seed = 0;
    double positive_initial = 0.0;
    double positive_final = 0.0;
    double l1_initial = 0.0;
    double l1_final = 0.0;
    /// Largest step-to-step increase divided by the pair's scale.
    double positive_violation = 0.0;
    double l1_violation = 0.0;
    std::size_t snapshots = 0;
};

struct ContractionReport {
    std::vector<ContractionRow> rows;
    std::vector<Check> checks;
};

struct ComparisonRow {
    std::uint64_t seed = 0;
    double min_gap = 0.0;
    /// max over snapshots and cells of u - v, <= 1e-12 required.
    double max_violation = 0.0;
    double gap_mass_initial = 0.0;
    double gap_mass_final = 0.0;
    std::size_t snapshots = 0;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    std::vector<Check> checks;
};

struct ContdepRung {
    double delta = 0.0;
    std::vector<double> E;  // one per time
    double flux_w1inf = 0.0;
    double flux_lip = 0.0;
    double sigma_distance = 0.0;
    /// sqrt(int_{|z|<1} z^2 |m - m~|)
    double small_distance = 0.0;
    /// int_{|z|>=1} |z| |m - m~|
    double large_distance = 0.0;
    /// The functional the delta fit uses for this ingredient.
    double distance = 0.0;
};

struct IngredientResult {
    Ingredient ingredient = Ingredient::flux;
    double expected_t_slope = 1.0;
    std::vector<ContdepRung> rungs;
    std::vector<RateFit> t_fits;  // one per rung
    std::vector<RateFit> d_fits;  // one per time
    /// Flux only: the delta fit against the W^{1,inf} distance instead of the Lipschitz one.
    std::vector<RateFit> d_fits_w1inf;
    Status status = Status::pass;
};

struct ContdepReport {
    std::vector<double> times;
    std::vector<IngredientResult> ingredients;
    /// E of the simultaneous perturbation, per rung and time.
    std::vector<std::vector<double>> combined_E;
    std::vector<Check> checks;
};

struct RegularityReport {
    std::vector<double> times;
    std::vector<std::size_t> resolutions;
    std::vector<std::vector<double>> G;  // [level][time]
    std::string classification;          // shock, smooth or inconclusive
    double max_ratio = 0.0;              // max_t G_finest / G_coarsest
    double max_late_deviation = 0.0;     // max past the transient of |G_finest / G_coarsest - 1|
    std::vector<Check> checks;
};

struct KappaRung {
    double kappa = 0.0;
    double small_moment = 0.0;
    double deviation = 0.0;
};

struct OpcheckReport {
    std::vector<double> adjoint_relative;
    double matrix_asymmetry = 0.0;
    double constant_max = 0.0;
    double sum_relative = 0.0;
    double max_dissipation = 0.0;  // max over fields of <u, Lu>
    std::vector<std::size_t> symbol_levels;
    std::vector<std::vector<SymbolSample>> symbol;  // [level][mode - 1]
    std::vector<KappaRung> kappa;
    int kappa_in_order = 0;
    double kappa_constant = 0.0;
    std::vector<Check> checks;
};

struct AuditRow {
    std::uint64_t seed = 0;
    std::string trajectory;  // "u" or "v"
    std::string entropy;
    double c = 0.0;
    std::string phi_id;
    DissipationReport fine;
    DissipationReport coarse;
    double tol = 0.0;
};

struct ChainRuleRow {
    std::uint64_t seed = 0;
    std::string trajectory;
    double fine = 0.0;
    double coarse = 0.0;
};

struct AuditReport {
    std::vector<AuditRow> rows;
    std::vector<ChainRuleRow> chain_rule;
    std::size_t residual_failures = 0;
    /// Entries with r_fine < -2 |r_fine - r_coarse|; informational.
    std::size_t per_entry_failures = 0;
    double worst_ratio = 0.0;  // max -r / tol
    std::vector<Check> checks;
};

SolveReport run_solve(const ExperimentConfig& cfg, std::uint64_t seed);

ContractionReport run_contraction(const ExperimentConfig& cfg);
ContractionReport run_contraction(const ExperimentConfig& cfg, const std::vector<InitialPair>& pairs);

/// Throws PreconditionError when some pair is not ordered u0 <= v0.
ComparisonReport run_comparison(const ExperimentConfig& cfg);
ComparisonReport run_comparison(const ExperimentConfig& cfg, const std::vector<InitialPair>& pairs);

ContdepReport run_contdep(const ExperimentConfig& cfg);

/// Requires Burgers flux, a = 0 and rho = 0.
RegularityReport run_regularity(const ExperimentConfig& cfg);

OpcheckReport run_opcheck(const ExperimentConfig& cfg);

/// Two-level entropy audit of every trajectory of the contraction pairs.
AuditReport run_audit(const ExperimentConfig& cfg);

/// Single-level audit of a stored trajectory; residuals are reported, only n_u, m_u >= 0 checked.
AuditReport run_audit(const ExperimentConfig& cfg, const Trajectory& traj);

// Preset configurations of the acceptance runs.
enum class DeskConfig { burgers, degenerate, fractal, mixed };
ExperimentConfig desk_config(DeskConfig which, ExperimentKind kind, std::size_t n = 256);
ExperimentConfig contdep_preset(Ingredient ingredient);
enum class RegularityCase { burgers, fractal_shock, fractional_smooth };
ExperimentConfig regularity_preset(RegularityCase which);
ExperimentConfig opcheck_preset(const LevyMeasure& measure);

// Output writers; each creates cfg.output_dir if needed.
void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj);
Trajectory read_trajectory(const std::filesystem::path& dir, const Grid1D& grid);
void write_report(const std::filesystem::path& dir, const ContractionReport& r);
void write_report(const std::filesystem::path& dir, const ComparisonReport& r);
void write_report(const std::filesystem::path& dir, const ContdepReport& r);
void write_report(const std::filesystem::path& dir, const RegularityReport& r);
void write_report(const std::filesystem::path& dir, const OpcheckReport& r);
void write_audit_csv(const std::filesystem::path& file, const AuditReport& r);
void write_summary(const std::filesystem::path& dir, const std::string& experiment, const std::vector<Check>& checks);

/// TOML loader; unknown sections or keys throw ConfigError naming them.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
ExperimentConfig parse_experiment_config(const std::string& toml_text, const std::filesystem::path& base_dir = {});

}  // namespace levy
