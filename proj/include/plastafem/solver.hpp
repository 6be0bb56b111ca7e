#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "plastafem/fem.hpp"

namespace plastafem {

/// Minimizer of the local energy density over (q, beta) for a given strain.
struct ReturnMapResult {
    Dev2 p;
    double alpha = 0.0;
};

/// Closed-form radial return: with s = 2 mu dev(eps) and t = |s|, p = 0 if
/// t <= sigma_y, else p = (t - sigma_y) / (2 mu + h_kin + h_iso) * s / t.
/// alpha = |p|.
ReturnMapResult return_map(const Sym2& eps, const Material& m);

/// phi(q, beta) = 1/2 C(eps - q):(eps - q) + 1/2 h_kin |q|^2 + 1/2 h_iso beta^2
/// + j(q, beta); +infinity when |q| > beta.
double local_energy_density(const Sym2& eps, const Dev2& q, double beta, const Material& m);

enum class LinearSolverKind { Direct, ConjugateGradient };

struct SolverOptions {
    /// Stopping tolerance for the energy decrement (relative) and the state
    /// increment in the error measure (absolute).
    double tol = 1e-10;
    std::size_t max_iterations = 500;
    /// Relative residual bound for every displacement solve.
    double linear_tol = 1e-12;
    LinearSolverKind linear_solver = LinearSolverKind::Direct;
};

/// Displacement step for a fixed plastic field: assembles the stiffness once
/// and solves (C(eps(w) - p), eps(v)) = b(v) for each new p.
class DisplacementSolver {
public:
    DisplacementSolver(const Mesh& mesh, const Material& m, const LoadData& loads, const SolverOptions& options = {});
    ~DisplacementSolver();
    DisplacementSolver(DisplacementSolver&&) noexcept;

    /// Full nodal displacement vector. `dirichlet_values` (full nodal layout,
    /// only entries on Gamma_D are read) lifts non-homogeneous boundary data.
    std::vector<double> solve(std::span<const Dev2> p, std::span<const double> dirichlet_values = {},
                              std::span<const double> initial_guess = {}) const;

    const DofMap& dofs() const { return dofs_; }
    const CsrMatrix& stiffness() const { return stiffness_; }

private:
    const Mesh& mesh_;
    Material material_;
    SolverOptions options_;
    DofMap dofs_;
    CsrMatrix stiffness_;
    std::vector<double> load_;
    std::unique_ptr<DirectSolver> direct_;
};

std::vector<double> displacement_solve(const Mesh& mesh, const Material& m, const LoadData& loads,
                                       std::span<const Dev2> p, const SolverOptions& options = {});

struct SolveResult {
    DiscreteState state;
    /// Energy after every outer iteration (entry 0 is the initial state).
    std::vector<double> energies;
    std::size_t iterations = 0;
    /// False if any iterate increased the energy beyond round-off.
    bool monotone = true;
};

/// Discrete solution U(T) by alternating minimization: displacement solve
/// for fixed p, then the per-element return map for fixed w. Stops when the
/// energy decrement is below tol * (1 + |E|) and the state increment is below
/// tol on two consecutive iterations. Throws NonConvergence after
/// max_iterations.
SolveResult solve_vi(const Mesh& mesh, const Material& m, const LoadData& loads, const SolverOptions& options = {},
                     std::span<const Dev2> initial_p = {});

struct ViCheck {
    /// max over samples of b(z - U) - a(U, z - U) - psi(z) + psi(U).
    double max_violation = 0.0;
    std::size_t samples = 0;
    bool passed = true;
};

/// Spot-check of the discrete variational inequality with random feasible z.
ViCheck check_variational_inequality(const Mesh& mesh, const Material& m, const LoadData& loads,
                                     const DiscreteState& u, std::size_t samples, std::uint64_t seed,
                                     double slack = 1e-8);

/// L2 distance of the stress fields of two states on the same mesh.
double state_distance(const Mesh& mesh, const Material& m, const DiscreteState& a, const DiscreteState& b);

}  // namespace plastafem
