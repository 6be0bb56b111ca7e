#pragma once

#include <cstddef>

#include "plastafem/fem.hpp"

namespace plastafem {

struct OracleOptions {
    /// Stop once the preconditioned step norm falls below tol * (1 + |x|).
    double tol = 1e-13;
    std::size_t max_iterations = 2'000'000;
    /// Refuses problems with more total dofs than this.
    std::size_t max_dofs = 500;
};

struct OracleResult {
    DiscreteState state;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Independent minimizer of the discrete energy for small problems: FISTA
/// with adaptive restart on all unknowns (w, q, beta) at once, with the exact
/// proximal map of sigma_y |q| + indicator(|q| <= beta) (soft-thresholding of
/// |q| followed by projection onto the cone |q| <= beta). It does not use the
/// return map or the displacement solver.
OracleResult oracle_minimize(const Mesh& mesh, const Material& m, const LoadData& loads,
                             const OracleOptions& options = {});

}  // namespace plastafem
