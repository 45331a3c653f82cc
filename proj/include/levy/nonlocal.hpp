#pragma once

#include <span>

#include "levy/grid.hpp"
#include "levy/levy_measure.hpp"

namespace levy {

/// The three contributions of the discrete Levy operator. Summing
/// (small_part + large_part) + drift_part cell by cell reproduces apply_levy bit for bit.
struct OperatorSplit {
    Field small_part;  // surrogate (sigma^2_eff / 2) D+D- u
    Field large_part;  // sum_j w_j (u_{i+j} - u_i)
    Field drift_part;  // -b_kappa D0 u
};

namespace kernels {

/// (Lu)_i = c2 (u_{i+1} - 2u_i + u_{i-1}) + sum_j w_j (u_{i+j} - u_i) - cd (u_{i+1} - u_{i-1}),
/// with c2 = surrogate / (2 h^2), cd = b / (2h); periodic indexing. OpenMP over cells.
void apply_levy(std::span<const double> u, const LevyQuadrature& quad, std::span<double> out);

/// Reference implementation with the same per-cell summation order.
void apply_levy_serial(std::span<const double> u, const LevyQuadrature& quad, std::span<double> out);

}  // namespace kernels

Field apply_levy(const Field& u, const LevyQuadrature& quad);
Field apply_levy_serial(const Field& u, const LevyQuadrature& quad);
OperatorSplit apply_levy_split(const Field& u, const LevyQuadrature& quad);

/// |<L phi, psi> - <phi, L psi>| with the spacing-weighted inner product.
double adjoint_residual(const Field& phi, const Field& psi, const LevyQuadrature& quad);

/// Real part of the discrete eigenvalue on e^{i omega x}.
double discrete_symbol(const LevyQuadrature& quad, double omega);

struct SymbolSample {
    int mode = 0;
    double omega = 0.0;
    double psi_exact = 0.0;
    double psi_discrete = 0.0;
    double residual = 0.0;
};

/// Applies L to cos/sin at omega_k = 2 pi k / length, extracts the eigenvalue by
/// projection and compares with levy_symbol. Requires 1 <= mode_index <= n/2.
SymbolSample symbol_sample(const LevyQuadrature& quad, const LevyMeasure& measure, const Grid1D& grid,
                           int mode_index);
double symbol_residual(const LevyQuadrature& quad, const LevyMeasure& measure, const Grid1D& grid,
                       int mode_index);

}  // namespace levy
