#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

#include "levy/harness.hpp"

namespace levy {

namespace {

std::ofstream open_csv(const std::filesystem::path& path, const std::string& header) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << std::setprecision(17) << header << '\n';
    return out;
}

std::string snapshot_name(std::size_t k) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "snapshot_%05zu.csv", k);
    return buf;
}

}  // namespace

void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj) {
    std::filesystem::create_directories(dir);
    auto meta = open_csv(dir / "meta.csv", "time,mass,min,max,bv,dt_used");
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const Field& f = traj[k];
        write_field_csv(dir / snapshot_name(k), f);
        meta << f.time() << ',' << mass(f) << ',' << min_value(f) << ',' << max_value(f) << ','
             << bv_seminorm(f) << ',' << traj.dt_used()[k] << '\n';
    }
}

Trajectory read_trajectory(const std::filesystem::path& dir, const Grid1D& grid) {
    std::ifstream meta(dir / "meta.csv");
    if (!meta) throw Error("cannot open " + (dir / "meta.csv").string());
    std::string line;
    std::getline(meta, line);
    std::vector<std::pair<double, double>> rows;
    while (std::getline(meta, line)) {
        if (line.empty()) continue;
        std::vector<double> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
        if (cols.size() != 6) throw Error("meta.csv: expected 6 columns in `" + line + "`");
        rows.emplace_back(cols[0], cols[5]);
    }
    if (rows.empty()) throw Error("meta.csv: no snapshots");
    Trajectory traj(read_field_csv(dir / snapshot_name(0), grid, 0.0));
    for (std::size_t k = 1; k < rows.size(); ++k)
        traj.append(read_field_csv(dir / snapshot_name(k), grid, rows[k].first), rows[k].second);
    return traj;
}

void write_report(const std::filesystem::path& dir, const ContractionReport& r) {
    auto out = open_csv(dir / "contraction.csv",
                        "seed,snapshots,positive_initial,positive_final,l1_initial,l1_final,"
                        "positive_violation,l1_violation");
    for (const auto& row : r.rows)
        out << row.seed << ',' << row.snapshots << ',' << row.positive_initial << ',' << row.positive_final << ','
            << row.l1_initial << ',' << row.l1_final << ',' << row.positive_violation << ',' << row.l1_violation
            << '\n';
}

void write_report(const std::filesystem::path& dir, const ComparisonReport& r) {
    auto out = open_csv(dir / "comparison.csv",
                        "seed,snapshots,min_gap,max_violation,gap_mass_initial,gap_mass_final");
    for (const auto& row : r.rows)
        out << row.seed << ',' << row.snapshots << ',' << row.min_gap << ',' << row.max_violation << ','
            << row.gap_mass_initial << ',' << row.gap_mass_final << '\n';
}

void write_report(const std::filesystem::path& dir, const ContdepReport& r) {
    auto out = open_csv(dir / "contdep.csv",
                        "ingredient,delta,t,E,distance,flux_w1inf,flux_lip,sigma_distance,small_distance,"
                        "large_distance");
    for (const auto& ing : r.ingredients)
        for (const auto& rung : ing.rungs)
            for (std::size_t k = 0; k < r.times.size(); ++k)
                out << to_string(ing.ingredient) << ',' << rung.delta << ',' << r.times[k] << ',' << rung.E[k]
                    << ',' << rung.distance << ',' << rung.flux_w1inf << ',' << rung.flux_lip << ','
                    << rung.sigma_distance << ',' << rung.small_distance << ',' << rung.large_distance << '\n';
    auto fits = open_csv(dir / "contdep_fits.csv", "ingredient,against,at,slope,intercept,r_squared,expected");
    for (const auto& ing : r.ingredients) {
        const std::string name = to_string(ing.ingredient);
        for (std::size_t i = 0; i < ing.t_fits.size(); ++i) {
            const auto& f = ing.t_fits[i];
            fits << name << ",t," << ing.rungs[i].delta << ',' << f.slope << ',' << f.intercept << ','
                 << f.r_squared << ',' << ing.expected_t_slope << '\n';
        }
        for (std::size_t k = 0; k < ing.d_fits.size(); ++k) {
            const auto& f = ing.d_fits[k];
            fits << name << ",distance," << r.times[k] << ',' << f.slope << ',' << f.intercept << ','
                 << f.r_squared << ",1\n";
        }
        for (std::size_t k = 0; k < ing.d_fits_w1inf.size(); ++k) {
            const auto& f = ing.d_fits_w1inf[k];
            fits << name << ",w1inf," << r.times[k] << ',' << f.slope << ',' << f.intercept << ','
                 << f.r_squared << ",1\n";
        }
    }
    if (!r.combined_E.empty()) {
        auto comb = open_csv(dir / "contdep_combined.csv", "rung,t,E");
        for (std::size_t i = 0; i < r.combined_E.size(); ++i)
            for (std::size_t k = 0; k < r.times.size(); ++k)
                comb << i << ',' << r.times[k] << ',' << r.combined_E[i][k] << '\n';
    }
}

void write_report(const std::filesystem::path& dir, const RegularityReport& r) {
    auto out = open_csv(dir / "regularity.csv", "t,n,G");
    for (std::size_t l = 0; l < r.resolutions.size(); ++l)
        for (std::size_t k = 0; k < r.times.size(); ++k)
            out << r.times[k] << ',' << r.resolutions[l] << ',' << r.G[l][k] << '\n';
}

void write_report(const std::filesystem::path& dir, const OpcheckReport& r) {
    {
        auto out = open_csv(dir / "opcheck.csv", "mode,psi_exact,psi_discrete,residual");
        if (!r.symbol.empty())
            for (const auto& s : r.symbol.back())
                out << s.mode << ',' << s.psi_exact << ',' << s.psi_discrete << ',' << s.residual << '\n';
    }
    {
        auto out = open_csv(dir / "symbol_levels.csv", "n,mode,omega,psi_exact,psi_discrete,residual");
        for (std::size_t l = 0; l < r.symbol.size(); ++l)
            for (const auto& s : r.symbol[l])
                out << r.symbol_levels[l] << ',' << s.mode << ',' << s.omega << ',' << s.psi_exact << ','
                    << s.psi_discrete << ',' << s.residual << '\n';
    }
    {
        auto out = open_csv(dir / "adjoint.csv", "pair,relative_residual");
        for (std::size_t k = 0; k < r.adjoint_relative.size(); ++k)
            out << k << ',' << r.adjoint_relative[k] << '\n';
    }
    auto out = open_csv(dir / "kappa_sweep.csv", "kappa,small_moment,deviation");
    for (const auto& k : r.kappa) out << k.kappa << ',' << k.small_moment << ',' << k.deviation << '\n';
}

void write_audit_csv(const std::filesystem::path& file, const AuditReport& r) {
    const bool two_level = !r.chain_rule.empty();
    auto out = open_csv(file, two_level ? "seed,trajectory,entropy,c,phi_id,mode,n_u,m_u,lhs,residual,"
                                          "coarse_residual,tol"
                                        : "entropy,c,phi_id,mode,n_u,m_u,lhs,residual");
    for (const auto& row : r.rows) {
        if (two_level) out << row.seed << ',' << row.trajectory << ',';
        out << row.entropy << ',' << row.c << ',' << row.phi_id << ','
            << (row.fine.mode == AuditMode::full ? "full" : "simpler") << ',' << row.fine.n_u << ','
            << row.fine.m_u << ',' << row.fine.lhs << ',' << row.fine.residual;
        if (two_level) out << ',' << row.coarse.residual << ',' << row.tol;
        out << '\n';
    }
    if (two_level) {
        auto cr = open_csv(file.parent_path() / "chain_rule.csv", "seed,trajectory,fine,coarse");
        for (const auto& c : r.chain_rule) cr << c.seed << ',' << c.trajectory << ',' << c.fine << ',' << c.coarse << '\n';
    }
}

void write_summary(const std::filesystem::path& dir, const std::string& experiment, const std::vector<Check>& checks) {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["status"] = to_string(overall(checks));
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks)
        j["checks"].push_back({{"name", c.name}, {"status", to_string(c.status)}, {"detail", c.detail}});
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "summary.json");
    if (!out) throw Error("cannot write " + (dir / "summary.json").string());
    out << j.dump(2) << '\n';
}

// ---- TOML ----

namespace {

class Section {
public:
    Section(const toml::table* t, std::string name, std::set<std::string> allowed)
        : t_(t), name_(std::move(name)) {
        if (!t_) return;
        for (const auto& [key, node] : *t_)
            if (!allowed.count(std::string(key.str())))
                throw ConfigError("[" + name_ + "]: unknown key '" + std::string(key.str()) + "'");
    }

    bool has(const char* key) const { return t_ && t_->contains(key); }

    double number(const char* key, double fallback) const {
        if (!has(key)) return fallback;
        if (auto v = (*t_)[key].value<double>()) return *v;
        throw ConfigError(where(key) + " must be a number");
    }
    std::int64_t integer(const char* key, std::int64_t fallback) const {
        if (!has(key)) return fallback;
        if (auto v = (*t_)[key].value<std::int64_t>()) return *v;
        throw ConfigError(where(key) + " must be an integer");
    }
    bool boolean(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        if (auto v = (*t_)[key].value<bool>()) return *v;
        throw ConfigError(where(key) + " must be true or false");
    }
    std::string string(const char* key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        if (auto v = (*t_)[key].value<std::string>()) return *v;
        throw ConfigError(where(key) + " must be a string");
    }
    template <class T>
    std::vector<T> list(const char* key, std::vector<T> fallback) const {
        if (!has(key)) return fallback;
        const toml::array* arr = (*t_)[key].as_array();
        if (!arr) throw ConfigError(where(key) + " must be an array");
        std::vector<T> out;
        for (const auto& node : *arr) {
            auto v = node.value<T>();
            if (!v) throw ConfigError(where(key) + " has an element of the wrong type");
            out.push_back(*v);
        }
        return out;
    }
    const toml::node* node(const char* key) const { return has(key) ? (*t_).get(key) : nullptr; }
    std::string where(const char* key) const { return "[" + name_ + "] " + key; }

private:
    const toml::table* t_;
    std::string name_;
};

LevyMeasure parse_measure(const toml::table& t, const std::filesystem::path& base_dir) {
    const Section s(&t, "levy.measure", {"kind", "alpha", "strength", "symbol_strength", "table", "restrict", "scale"});
    const std::string kind = s.string("kind", "none");
    LevyMeasure m;
    const double alpha = s.number("alpha", 1.0);
    double strength = s.number("strength", 1.0);
    if (s.boolean("symbol_strength", false)) strength = fractional_symbol_strength(alpha);
    if (kind == "none") {
        return m;
    } else if (kind == "fractional_truncated") {
        m = LevyMeasure::fractional_truncated(alpha, strength);
    } else if (kind == "fractional_full") {
        m = LevyMeasure::fractional_full(alpha, strength);
    } else if (kind == "custom") {
        if (!s.has("table")) throw ConfigError("[levy] custom measure needs table = \"path.csv\"");
        std::filesystem::path p = s.string("table", "");
        if (p.is_relative()) p = base_dir / p;
        m = LevyMeasure::from_table_csv(p);
    } else {
        throw ConfigError("[levy] unknown measure kind '" + kind + "'");
    }
    if (s.has("restrict")) {
        const auto r = s.list<double>("restrict", {});
        if (r.size() != 2) throw ConfigError("[levy] restrict must be [lo, hi]");
        m = m.restricted(r[0], r[1]);
    }
    if (s.has("scale")) m = m.scaled(s.number("scale", 1.0));
    return m;
}

const toml::table* section(const toml::table& root, const char* name) {
    const toml::node* n = root.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) throw ConfigError(std::string("[") + name + "] must be a table");
    return n->as_table();
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& toml_text, const std::filesystem::path& base_dir) {
    toml::table root;
    try {
        root = toml::parse(toml_text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config: " << e.description() << " at line " << e.source().begin.line;
        throw ConfigError(os.str());
    }
    static const std::set<std::string> sections{"grid", "flux", "diffusion", "levy", "solver", "experiment"};
    for (const auto& [key, node] : root)
        if (!sections.count(std::string(key.str())))
            throw ConfigError("config: unknown section [" + std::string(key.str()) + "]");

    ExperimentConfig cfg;

    const Section grid(section(root, "grid"), "grid", {"n", "length"});
    cfg.base.grid = Grid1D(static_cast<std::size_t>(grid.integer("n", 256)), grid.number("length", 1.0));

    const Section flux(section(root, "flux"), "flux", {"kind", "drift", "speed"});
    const std::string fk = flux.string("kind", "burgers");
    if (fk == "burgers")
        cfg.base.flux = FluxModel::burgers(flux.number("drift", 0.0));
    else if (fk == "linear")
        cfg.base.flux = FluxModel::linear(flux.number("speed", 1.0));
    else if (fk == "zero")
        cfg.base.flux = FluxModel::zero();
    else
        throw ConfigError("[flux] unknown kind '" + fk + "'");

    const Section diff(section(root, "diffusion"), "diffusion", {"kind", "value", "exponent", "scale", "threshold"});
    const std::string dk = diff.string("kind", "none");
    if (dk == "none")
        cfg.base.diffusion = DiffusionModel::none();
    else if (dk == "constant")
        cfg.base.diffusion = DiffusionModel::constant(diff.number("value", 0.0));
    else if (dk == "power")
        cfg.base.diffusion = DiffusionModel::power(diff.number("exponent", 2.0), diff.number("scale", 0.1));
    else if (dk == "threshold")
        cfg.base.diffusion = DiffusionModel::threshold(diff.number("scale", 1.0), diff.number("threshold", 0.5));
    else
        throw ConfigError("[diffusion] unknown kind '" + dk + "'");

    const Section levy(section(root, "levy"), "levy", {"measure", "kappa_cells", "tail_cut"});
    if (const toml::node* m = levy.node("measure")) {
        if (const toml::table* t = m->as_table()) {
            cfg.measure = parse_measure(*t, base_dir);
        } else if (const toml::array* arr = m->as_array()) {
            for (const auto& item : *arr) {
                if (!item.is_table()) throw ConfigError("[levy] measure array entries must be tables");
                cfg.measure = cfg.measure + parse_measure(*item.as_table(), base_dir);
            }
        } else {
            throw ConfigError("[levy] measure must be a table or an array of tables");
        }
    }
    cfg.kappa_cells = levy.number("kappa_cells", 1.0);
    cfg.tail_cut = levy.number("tail_cut", 0.0);

    const Section solver(section(root, "solver"), "solver",
                         {"t_end", "cfl", "rho", "snapshots", "record_steps", "state_interval", "max_steps"});
    cfg.base.t_end = solver.number("t_end", 0.1);
    cfg.base.cfl_safety = solver.number("cfl", 0.9);
    cfg.base.rho = solver.number("rho", 0.0);
    cfg.base.snapshot_times = solver.list<double>("snapshots", {});
    cfg.base.record_steps = solver.boolean("record_steps", false);
    cfg.base.max_steps = static_cast<std::size_t>(solver.integer("max_steps", 100000));
    if (solver.has("state_interval")) {
        const auto si = solver.list<double>("state_interval", {});
        if (si.size() != 2) throw ConfigError("[solver] state_interval must be [lo, hi]");
        cfg.base.state_interval = Interval{si[0], si[1]};
    }

    const Section ex(section(root, "experiment"), "experiment",
                     {"kind", "seeds", "seed_count", "seed_base", "data", "amplitude", "offset", "wavenumber",
                      "data_path", "pair", "pair_constant", "pair_bump", "pair_random", "ingredients", "ladder",
                      "times", "combined", "resolutions", "samples", "transient", "expect", "coarse_divisor",
                      "audit_mode", "output"});
    cfg.kind = parse_experiment_kind(ex.string("kind", "solve"));
    if (ex.has("seeds") && ex.has("seed_count")) throw ConfigError("[experiment] give seeds or seed_count, not both");
    if (ex.has("seeds")) {
        cfg.seeds.clear();
        for (auto s : ex.list<std::int64_t>("seeds", {})) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    } else if (ex.has("seed_count")) {
        cfg.seeds.clear();
        const auto base_seed = ex.integer("seed_base", 0);
        for (std::int64_t k = 0; k < ex.integer("seed_count", 1); ++k)
            cfg.seeds.push_back(static_cast<std::uint64_t>(base_seed + k));
    }
    const std::string data = ex.string("data", "random");
    if (data == "random")
        cfg.initial.kind = InitialData::Kind::random;
    else if (data == "sine")
        cfg.initial.kind = InitialData::Kind::sine;
    else if (data == "square")
        cfg.initial.kind = InitialData::Kind::square;
    else if (data == "csv")
        cfg.initial.kind = InitialData::Kind::csv;
    else
        throw ConfigError("[experiment] unknown data '" + data + "'");
    cfg.initial.amplitude = ex.number("amplitude", 1.0);
    cfg.initial.offset = ex.number("offset", 0.0);
    cfg.initial.wavenumber = static_cast<int>(ex.integer("wavenumber", 1));
    if (ex.has("data_path")) {
        cfg.initial.path = ex.string("data_path", "");
        if (cfg.initial.path.is_relative()) cfg.initial.path = base_dir / cfg.initial.path;
    }
    const std::string pair = ex.string("pair", "independent");
    if (pair != "independent" && pair != "shifted") throw ConfigError("[experiment] pair must be independent or shifted");
    cfg.pair.independent = pair == "independent";
    cfg.pair.constant = ex.number("pair_constant", 0.0);
    cfg.pair.bump = ex.number("pair_bump", 0.0);
    cfg.pair.random = ex.number("pair_random", cfg.kind == ExperimentKind::comparison ? 0.5 : 0.0);
    for (const auto& name : ex.list<std::string>("ingredients", {})) cfg.ingredients.push_back(parse_ingredient(name));
    cfg.ladder = ex.list<double>("ladder", cfg.ladder);
    cfg.times = ex.list<double>("times", cfg.times);
    cfg.combined = ex.boolean("combined", false);
    if (ex.has("resolutions")) {
        cfg.resolutions.clear();
        for (auto n : ex.list<std::int64_t>("resolutions", {})) cfg.resolutions.push_back(static_cast<std::size_t>(n));
    } else if (cfg.kind == ExperimentKind::opcheck) {
        cfg.resolutions = {256, 512};
    }
    cfg.samples = static_cast<std::size_t>(ex.integer("samples", cfg.kind == ExperimentKind::opcheck ? 50 : 80));
    cfg.transient = ex.number("transient", 0.1);
    cfg.expect_class = ex.string("expect", "");
    if (!cfg.expect_class.empty() && cfg.expect_class != "shock" && cfg.expect_class != "smooth")
        throw ConfigError("[experiment] expect must be shock or smooth");
    cfg.coarse_divisor = static_cast<std::size_t>(ex.integer("coarse_divisor", 2));
    const std::string mode = ex.string("audit_mode", "full");
    if (mode != "full" && mode != "simpler") throw ConfigError("[experiment] audit_mode must be full or simpler");
    cfg.audit_mode = mode == "full" ? AuditMode::full : AuditMode::simpler;
    if (ex.has("output")) cfg.output_dir = ex.string("output", "");

    refresh_quadrature(cfg);
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str(), path.parent_path());
}

}  // namespace levy
