#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "levy/harness.hpp"

namespace fs = std::filesystem;
using namespace levy;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string traj;
};

void print_checks(const std::vector<Check>& checks) {
    for (const auto& c : checks) std::cout << to_string(c.status) << "  " << c.name << ": " << c.detail << '\n';
}

int finish(const fs::path& dir, const std::string& name, const std::vector<Check>& checks) {
    write_summary(dir, name, checks);
    print_checks(checks);
    const Status st = overall(checks);
    std::cout << name << ": " << to_string(st) << " (" << (dir / "summary.json").string() << ")\n";
    return exit_code(st);
}

ExperimentConfig load(const Options& o, ExperimentKind kind) {
    ExperimentConfig cfg = load_experiment_config(o.config);
    cfg.kind = kind;
    if (o.seed) cfg.seeds = {*o.seed};
    if (!o.out.empty()) cfg.output_dir = o.out;
    if (cfg.output_dir.empty()) cfg.output_dir = "out";
    cfg.validate();
    return cfg;
}

int run(const std::string& sub, const Options& o) {
    if (sub == "solve") {
        const ExperimentConfig cfg = load(o, ExperimentKind::solve);
        const SolveReport r = run_solve(cfg, cfg.seeds.front());
        write_trajectory(cfg.output_dir, r.trajectory);
        std::cout << "steps=" << r.trajectory.total_steps() << " snapshots=" << r.trajectory.size() << '\n';
        return finish(cfg.output_dir, "solve", r.checks);
    }
    if (sub == "contract") {
        const ExperimentConfig cfg = load(o, ExperimentKind::contraction);
        const auto r = run_contraction(cfg);
        write_report(cfg.output_dir, r);
        return finish(cfg.output_dir, "contraction", r.checks);
    }
    if (sub == "compare") {
        const ExperimentConfig cfg = load(o, ExperimentKind::comparison);
        const auto r = run_comparison(cfg);
        write_report(cfg.output_dir, r);
        return finish(cfg.output_dir, "comparison", r.checks);
    }
    if (sub == "contdep") {
        const ExperimentConfig cfg = load(o, ExperimentKind::contdep);
        const auto r = run_contdep(cfg);
        write_report(cfg.output_dir, r);
        return finish(cfg.output_dir, "contdep", r.checks);
    }
    if (sub == "regularity") {
        const ExperimentConfig cfg = load(o, ExperimentKind::regularity);
        const auto r = run_regularity(cfg);
        write_report(cfg.output_dir, r);
        std::cout << "classification=" << r.classification << '\n';
        return finish(cfg.output_dir, "regularity", r.checks);
    }
    if (sub == "opcheck") {
        const ExperimentConfig cfg = load(o, ExperimentKind::opcheck);
        const auto r = run_opcheck(cfg);
        write_report(cfg.output_dir, r);
        double worst = 0.0;
        for (double a : r.adjoint_relative) worst = std::max(worst, a);
        std::cout << "adjoint_max_residual=" << worst << '\n';
        return finish(cfg.output_dir, "opcheck", r.checks);
    }
    if (sub == "audit") {
        ExperimentConfig cfg = load(o, ExperimentKind::audit);
        if (!o.traj.empty()) {
            const Trajectory traj = read_trajectory(o.traj, cfg.base.grid);
            const auto r = run_audit(cfg, traj);
            const fs::path out = o.out.empty() ? fs::path("audit.csv") : fs::path(o.out);
            const fs::path file = out.extension() == ".csv" ? out : out / "audit.csv";
            write_audit_csv(file, r);
            return finish(file.has_parent_path() ? file.parent_path() : fs::path("."), "audit", r.checks);
        }
        const auto r = run_audit(cfg);
        write_audit_csv(cfg.output_dir / "audit.csv", r);
        return finish(cfg.output_dir, "audit", r.checks);
    }
    throw ConfigError("unknown subcommand " + sub);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Levy mixed hyperbolic-parabolic solver and verification harness", "levy-hypar"};
    app.require_subcommand(1);
    Options o;
    const std::vector<std::pair<std::string, std::string>> subs{
        {"solve", "march one datum to t_end; writes snapshot CSVs and meta.csv"},
        {"contract", "L1 and positive-part contraction on seeded pairs"},
        {"compare", "comparison principle on ordered pairs"},
        {"contdep", "continuous-dependence ladders and rate fits"},
        {"regularity", "gradient growth across resolutions: shock or smooth"},
        {"opcheck", "adjointness, symbol consistency and the kappa sweep"},
        {"audit", "entropy inequality audit (two-level, or a stored trajectory with --traj)"}};
    for (const auto& [name, help] : subs) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "TOML experiment file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory (audit --traj: CSV file or directory)");
        sub->add_option("--seed", o.seed, "override the seed list with a single seed");
        if (name == "audit") sub->add_option("--traj", o.traj, "trajectory directory written by solve");
    }
    CLI11_PARSE(app, argc, argv);

    try {
        return run(app.get_subcommands().front()->get_name(), o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
