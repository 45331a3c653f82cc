#include "levy/nonlocal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace levy {

namespace {

constexpr std::size_t kBlock = 256;

void check_spacing(const LevyQuadrature& quad, double spacing) {
    if (std::abs(quad.spacing - spacing) > 1e-12 * spacing)
        throw GridMismatch("quadrature built for spacing " + std::to_string(quad.spacing) +
                           " applied on spacing " + std::to_string(spacing));
}

struct Coefficients {
    double second;  // surrogate / (2 h^2)
    double drift;   // b / (2 h)
};

Coefficients coefficients(const LevyQuadrature& quad) {
    const double h = quad.spacing;
    return {0.5 * quad.surrogate_moment() / (h * h), quad.drift / (2.0 * h)};
}

// Periodic extension: ext[pad + k] = u[k mod n] for k in [-pad, n + pad).
std::vector<double> periodic_extension(std::span<const double> u, std::size_t pad) {
    const std::size_t n = u.size();
    std::vector<double> ext(n + 2 * pad);
    for (std::size_t k = 0; k < ext.size(); ++k) {
        const std::size_t shift = (k + n * (pad / n + 1) - pad) % n;
        ext[k] = u[shift];
    }
    return ext;
}

}  // namespace

namespace kernels {

void apply_levy(std::span<const double> u, const LevyQuadrature& quad, std::span<double> out) {
    const std::size_t n = u.size();
    const auto c = coefficients(quad);
    const std::size_t pad = static_cast<std::size_t>(quad.max_offset());
    const std::vector<double> ext = periodic_extension(u, pad);
    const std::size_t n_nodes = quad.node_offsets.size();
    const long n_blocks = static_cast<long>((n + kBlock - 1) / kBlock);

#pragma omp parallel for schedule(static)
    for (long b = 0; b < n_blocks; ++b) {
        const std::size_t i0 = static_cast<std::size_t>(b) * kBlock;
        const std::size_t len = std::min(kBlock, n - i0);
        std::array<double, kBlock> large{};
        for (std::size_t j = 0; j < n_nodes; ++j) {
            const double w = quad.weights[j];
            const double* src = ext.data() + static_cast<long>(pad + i0) + quad.node_offsets[j];
            const double* here = u.data() + i0;
            for (std::size_t k = 0; k < len; ++k) large[k] += w * (src[k] - here[k]);
        }
        for (std::size_t k = 0; k < len; ++k) {
            const std::size_t i = i0 + k;
            const double up = u[i + 1 == n ? 0 : i + 1];
            const double down = u[i == 0 ? n - 1 : i - 1];
            const double small = c.second * (up - 2.0 * u[i] + down);
            const double drift = -c.drift * (up - down);
            out[i] = (small + large[k]) + drift;
        }
    }
}

void apply_levy_serial(std::span<const double> u, const LevyQuadrature& quad, std::span<double> out) {
    const long n = static_cast<long>(u.size());
    const auto c = coefficients(quad);
    auto at = [&](long k) { return u[static_cast<std::size_t>(((k % n) + n) % n)]; };
    for (long i = 0; i < n; ++i) {
        double large = 0.0;
        for (std::size_t j = 0; j < quad.node_offsets.size(); ++j)
            large += quad.weights[j] * (at(i + quad.node_offsets[j]) - at(i));
        const double small = c.second * (at(i + 1) - 2.0 * at(i) + at(i - 1));
        const double drift = -c.drift * (at(i + 1) - at(i - 1));
        out[static_cast<std::size_t>(i)] = (small + large) + drift;
    }
}

}  // namespace kernels

Field apply_levy(const Field& u, const LevyQuadrature& quad) {
    check_spacing(quad, u.grid().spacing());
    std::vector<double> out(u.size());
    kernels::apply_levy(u.values(), quad, out);
    return Field(u.grid(), std::move(out), u.time());
}

Field apply_levy_serial(const Field& u, const LevyQuadrature& quad) {
    check_spacing(quad, u.grid().spacing());
    std::vector<double> out(u.size());
    kernels::apply_levy_serial(u.values(), quad, out);
    return Field(u.grid(), std::move(out), u.time());
}

OperatorSplit apply_levy_split(const Field& u, const LevyQuadrature& quad) {
    check_spacing(quad, u.grid().spacing());
    const long n = static_cast<long>(u.size());
    const auto c = coefficients(quad);
    auto at = [&](long k) { return u[static_cast<std::size_t>(((k % n) + n) % n)]; };
    std::vector<double> small(u.size()), large(u.size()), drift(u.size());
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < quad.node_offsets.size(); ++j)
            acc += quad.weights[j] * (at(i + quad.node_offsets[j]) - at(i));
        const auto k = static_cast<std::size_t>(i);
        large[k] = acc;
        small[k] = c.second * (at(i + 1) - 2.0 * at(i) + at(i - 1));
        drift[k] = -c.drift * (at(i + 1) - at(i - 1));
    }
    return {Field(u.grid(), std::move(small), u.time()), Field(u.grid(), std::move(large), u.time()),
            Field(u.grid(), std::move(drift), u.time())};
}

double adjoint_residual(const Field& phi, const Field& psi, const LevyQuadrature& quad) {
    require_same_grid(phi, psi);
    return std::abs(inner_product(apply_levy(phi, quad), psi) - inner_product(phi, apply_levy(psi, quad)));
}

double discrete_symbol(const LevyQuadrature& quad, double omega) {
    const double h = quad.spacing;
    double jumps = 0.0;
    for (std::size_t j = 0; j < quad.node_offsets.size(); ++j)
        jumps += quad.weights[j] * (std::cos(omega * quad.node_offsets[j] * h) - 1.0);
    return jumps + 0.5 * quad.surrogate_moment() * (2.0 * std::cos(omega * h) - 2.0) / (h * h);
}

SymbolSample symbol_sample(const LevyQuadrature& quad, const LevyMeasure& measure, const Grid1D& grid,
                           int mode_index) {
    if (mode_index < 1 || static_cast<std::size_t>(mode_index) > grid.n_cells() / 2)
        throw Error("symbol_residual: mode_index must lie in [1, n/2]");
    const double omega = 2.0 * std::numbers::pi * mode_index / grid.length();
    const Field c = Field::sample(grid, [&](double x) { return std::cos(omega * x); });
    const Field s = Field::sample(grid, [&](double x) { return std::sin(omega * x); });
    const double num = inner_product(apply_levy(c, quad), c) + inner_product(apply_levy(s, quad), s);
    const double den = inner_product(c, c) + inner_product(s, s);
    SymbolSample out;
    out.mode = mode_index;
    out.omega = omega;
    out.psi_discrete = num / den;
    out.psi_exact = levy_symbol(measure, omega);
    out.residual = std::abs(out.psi_discrete - out.psi_exact);
    return out;
}

double symbol_residual(const LevyQuadrature& quad, const LevyMeasure& measure, const Grid1D& grid,
                       int mode_index) {
    return symbol_sample(quad, measure, grid, mode_index).residual;
}

}  // namespace levy
