#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "plastafem/fem.hpp"

namespace plastafem {

/// Squared refinement indicators and data oscillations of a discrete state.
/// eta_sq[T] = |T| ||f||^2_{L2(T)} + |T|^{1/2} sum_{E in E(T)} R_E^2.
struct IndicatorField {
    std::vector<double> eta_sq;
    std::vector<double> osc_f_sq;
    /// Indexed by edge; zero for edges that are not on Gamma_N.
    std::vector<double> osc_g_sq;
    double eta_global_sq = 0.0;

    double osc_sq() const;
};

/// R_E: L2 norm over E of the normal stress jump (interior), of
/// g - sigma nu (Neumann), or zero (Dirichlet). `sigma` holds one stress per
/// element.
double edge_residual(const Mesh& mesh, std::size_t e, std::span<const Sym2> sigma, const LoadData& loads);

double element_indicator(const Mesh& mesh, std::size_t t, std::span<const Sym2> sigma, const LoadData& loads);

/// |T| ||f||^2_{L2(T)} by the three-point edge-midpoint rule.
double volume_term(const Mesh& mesh, std::size_t t, const LoadData& loads);

struct Oscillations {
    std::vector<double> f_sq;
    std::vector<double> g_sq;
};

/// osc^2(T; f) = |T| ||f - f_T||^2 and osc^2(E; g) = |T|^{1/2} ||g - g_E||^2
/// with the same quadrature rules as assembly.
Oscillations oscillations(const Mesh& mesh, const LoadData& loads);

IndicatorField compute_indicators(const Mesh& mesh, const DiscreteState& z, const Material& m, const LoadData& loads);

}  // namespace plastafem
