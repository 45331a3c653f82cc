#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "levy/error.hpp"

namespace levy {

/// Uniform periodic grid on [0, length) with cell-centred nodes x_i = (i + 1/2) h.
class Grid1D {
public:
    Grid1D(std::size_t n_cells, double length);

    std::size_t n_cells() const { return n_cells_; }
    double length() const { return length_; }
    double spacing() const { return spacing_; }
    double x(std::size_t i) const { return (static_cast<double>(i) + 0.5) * spacing_; }

    bool operator==(const Grid1D& other) const = default;

private:
    std::size_t n_cells_;
    double length_;
    double spacing_;
};

/// Immutable snapshot u(t, .) of point values on a grid.
class Field {
public:
    Field(Grid1D grid, std::vector<double> values, double time = 0.0);

    static Field constant(const Grid1D& grid, double value, double time = 0.0);

    template <class F>
    static Field sample(const Grid1D& grid, F&& fn, double time = 0.0) {
        std::vector<double> v(grid.n_cells());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.x(i));
        return Field(grid, std::move(v), time);
    }

    const Grid1D& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double time() const { return time_; }

    Field with_time(double t) const { return Field(grid_, values_, t); }

private:
    Grid1D grid_;
    std::vector<double> values_;
    double time_;
};

/// Time history of a solution; snapshot 0 is the initial datum at t = 0.
class Trajectory {
public:
    explicit Trajectory(Field initial);

    void append(Field snapshot, double dt_used = 0.0);

    const Grid1D& grid() const { return snapshots_.front().grid(); }
    std::size_t size() const { return snapshots_.size(); }
    const Field& operator[](std::size_t k) const { return snapshots_[k]; }
    const Field& initial() const { return snapshots_.front(); }
    const Field& final() const { return snapshots_.back(); }
    const std::vector<Field>& snapshots() const { return snapshots_; }
    std::vector<double> times() const;
    /// Length of the last time step taken before each snapshot (0 for the initial datum).
    const std::vector<double>& dt_used() const { return dt_used_; }
    std::size_t total_steps() const { return total_steps_; }
    void set_total_steps(std::size_t n) { total_steps_ = n; }

private:
    std::vector<Field> snapshots_;
    std::vector<double> dt_used_;
    std::size_t total_steps_ = 0;
};

void require_same_grid(const Field& f, const Field& g);

// Riemann-sum functionals at grid resolution.
double l1_distance(const Field& f, const Field& g);
double positive_part_mass(const Field& f, const Field& g);
double bv_seminorm(const Field& f);
double mass(const Field& f);
double min_value(const Field& f);
double max_value(const Field& f);
/// max_i |u_{i+1} - u_i| / h with periodic wraparound.
double max_gradient(const Field& f);
/// Spacing-weighted inner product.
double inner_product(const Field& f, const Field& g);
/// (shifted)_i = f_{i + offset}, periodic.
Field cyclic_shift(const Field& f, long offset);

/// Writes `x,u` with 17 significant digits.
void write_field_csv(const std::filesystem::path& path, const Field& f);
/// Reads an `x,u` CSV written by write_field_csv onto the given grid.
Field read_field_csv(const std::filesystem::path& path, const Grid1D& grid, double time);

}  // namespace levy
