#include "levy/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace levy {

Grid1D::Grid1D(std::size_t n_cells, double length)
    : n_cells_(n_cells), length_(length), spacing_(length / static_cast<double>(n_cells)) {
    if (n_cells < 4) throw Error("Grid1D: n_cells must be at least 4");
    if (!(length > 0.0) || !std::isfinite(length)) throw Error("Grid1D: length must be positive");
}

Field::Field(Grid1D grid, std::vector<double> values, double time)
    : grid_(grid), values_(std::move(values)), time_(time) {
    if (values_.size() != grid_.n_cells())
        throw Error("Field: expected " + std::to_string(grid_.n_cells()) + " values, got " +
                    std::to_string(values_.size()));
    if (!(time >= 0.0)) throw Error("Field: time must be nonnegative");
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (!std::isfinite(values_[i])) throw Error("Field: non-finite value at cell " + std::to_string(i));
}

Field Field::constant(const Grid1D& grid, double value, double time) {
    return Field(grid, std::vector<double>(grid.n_cells(), value), time);
}

Trajectory::Trajectory(Field initial) {
    if (initial.time() != 0.0) throw Error("Trajectory: initial snapshot must be at t = 0");
    snapshots_.push_back(std::move(initial));
    dt_used_.push_back(0.0);
}

void Trajectory::append(Field snapshot, double dt_used) {
    if (!(snapshot.grid() == grid())) throw GridMismatch("Trajectory: snapshot grid differs");
    if (!(snapshot.time() > snapshots_.back().time()))
        throw Error("Trajectory: snapshot times must be strictly increasing");
    snapshots_.push_back(std::move(snapshot));
    dt_used_.push_back(dt_used);
}

std::vector<double> Trajectory::times() const {
    std::vector<double> t;
    t.reserve(snapshots_.size());
    for (const auto& s : snapshots_) t.push_back(s.time());
    return t;
}

void require_same_grid(const Field& f, const Field& g) {
    if (!(f.grid() == g.grid())) throw GridMismatch("fields live on different grids");
}

double l1_distance(const Field& f, const Field& g) {
    require_same_grid(f, g);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(f[i] - g[i]);
    return f.grid().spacing() * s;
}

double positive_part_mass(const Field& f, const Field& g) {
    require_same_grid(f, g);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::max(f[i] - g[i], 0.0);
    return f.grid().spacing() * s;
}

double bv_seminorm(const Field& f) {
    const std::size_t n = f.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(f[(i + 1) % n] - f[i]);
    return s;
}

double mass(const Field& f) {
    double s = 0.0;
    for (double v : f.values()) s += v;
    return f.grid().spacing() * s;
}

double min_value(const Field& f) { return *std::min_element(f.values().begin(), f.values().end()); }

double max_value(const Field& f) { return *std::max_element(f.values().begin(), f.values().end()); }

double max_gradient(const Field& f) {
    const std::size_t n = f.size();
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) g = std::max(g, std::abs(f[(i + 1) % n] - f[i]));
    return g / f.grid().spacing();
}

double inner_product(const Field& f, const Field& g) {
    require_same_grid(f, g);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
    return f.grid().spacing() * s;
}

Field cyclic_shift(const Field& f, long offset) {
    const long n = static_cast<long>(f.size());
    std::vector<double> v(f.size());
    for (long i = 0; i < n; ++i) v[i] = f[static_cast<std::size_t>(((i + offset) % n + n) % n)];
    return Field(f.grid(), std::move(v), f.time());
}

void write_field_csv(const std::filesystem::path& path, const Field& f) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "x,u\n" << std::setprecision(17);
    for (std::size_t i = 0; i < f.size(); ++i) out << f.grid().x(i) << ',' << f[i] << '\n';
}

Field read_field_csv(const std::filesystem::path& path, const Grid1D& grid, double time) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "x,u") throw Error(path.string() + ": expected header `x,u`");
    std::vector<double> values;
    values.reserve(grid.n_cells());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error(path.string() + ": malformed row `" + line + "`");
        values.push_back(std::stod(line.substr(comma + 1)));
    }
    if (values.size() != grid.n_cells())
        throw GridMismatch(path.string() + ": " + std::to_string(values.size()) +
                           " rows do not match grid of " + std::to_string(grid.n_cells()) + " cells");
    return Field(grid, std::move(values), time);
}

}  // namespace levy
