#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "plastafem/mesh.hpp"
#include "plastafem/sparse.hpp"
#include "plastafem/tensor.hpp"

namespace plastafem {

/// Isotropic elasticity with kinematic hardening tensor h_kin * Id and
/// isotropic hardening modulus h_iso.
struct Material {
    double mu = 1.0;
    double lambda = 1.0;
    double h_kin = 1.0;
    double h_iso = 1.0;
    double sigma_y = 1.0;

    /// Throws ArgumentError unless mu, h_kin, h_iso, sigma_y > 0 and lambda >= 0.
    void validate() const;
    /// C tau = 2 mu tau + lambda tr(tau) Id.
    Sym2 elasticity(const Sym2& tau) const { return 2.0 * mu * tau + Sym2{lambda * tau.trace(), 0.0, lambda * tau.trace()}; }
};

using VectorField = std::function<Vec2(Vec2)>;

/// Body force f on the domain and traction g on the Neumann boundary.
struct LoadData {
    VectorField f;
    VectorField g;

    static LoadData zero();
    static LoadData constant(Vec2 f, Vec2 g);
};

/// Free displacement dofs (two per non-Dirichlet vertex) plus three plastic
/// slots per element (q11, q12, beta).
class DofMap {
public:
    explicit DofMap(const Mesh& mesh);

    std::size_t num_free_vertices() const { return free_vertices_.size(); }
    std::size_t num_displacement_dofs() const { return 2 * free_vertices_.size(); }
    std::size_t num_total_dofs() const { return 2 * free_vertices_.size() + 3 * num_elements_; }
    /// Global displacement dof of (vertex, component), or kNone on Gamma_D.
    std::size_t dof(std::size_t vertex, int component) const {
        const std::size_t f = free_index_[vertex];
        return f == kNone ? kNone : 2 * f + static_cast<std::size_t>(component);
    }
    const std::vector<std::size_t>& free_vertices() const { return free_vertices_; }

private:
    std::vector<std::size_t> free_vertices_;
    std::vector<std::size_t> free_index_;
    std::size_t num_elements_ = 0;
};

/// U = (w, p, alpha): nodal displacements (x, y interleaved), per-element
/// trace-free plastic strain, per-element accumulated plastic strain.
struct DiscreteState {
    std::vector<double> w;
    std::vector<Dev2> p;
    std::vector<double> alpha;

    static DiscreteState zero(const Mesh& mesh);
    /// Throws ArgumentError if the sizes do not fit the mesh.
    void check_matches(const Mesh& mesh) const;
    Vec2 displacement(std::size_t vertex) const { return {w[2 * vertex], w[2 * vertex + 1]}; }
};

/// Gradients of the three P1 hat functions on element t.
std::array<Vec2, 3> shape_gradients(const Mesh& mesh, std::size_t t);

Sym2 strain(const Mesh& mesh, std::span<const double> w, std::size_t t);
Sym2 stress(const Mesh& mesh, std::span<const double> w, const Dev2& p, std::size_t t, const Material& m);
/// Piecewise-constant stress sigma(w, p) on every element.
std::vector<Sym2> stresses(const Mesh& mesh, const DiscreteState& z, const Material& m);

double bilinear_a(const Mesh& mesh, const Material& m, const DiscreteState& y, const DiscreteState& z);
double linear_b(const Mesh& mesh, const LoadData& loads, const DiscreteState& z);
/// Relative slack used when testing |q| <= beta.
inline constexpr double kFeasibilityTol = 1e-12;
/// Integral of the dissipation potential; +infinity if |q_T| > beta_T anywhere.
double psi(const Mesh& mesh, const Material& m, const DiscreteState& z);
double energy(const Mesh& mesh, const Material& m, const LoadData& loads, const DiscreteState& z);

/// ||sigma(z) - sigma(z_hat)||_{L2} over the whole domain, evaluated on the
/// overlay of the two meshes.
double error_measure(const Mesh& mesh, const DiscreteState& z, const Mesh& mesh_hat, const DiscreteState& z_hat,
                     const Material& m);
/// Same, restricted to the union of the given elements of `mesh`.
double error_measure_on(const Mesh& mesh, const DiscreteState& z, const Mesh& mesh_hat, const DiscreteState& z_hat,
                        const Material& m, std::span<const std::size_t> region);

/// Edge midpoints used by the three-point triangle rule.
std::array<Vec2, 3> triangle_quadrature_points(const Mesh& mesh, std::size_t t);
/// Two-point Gauss nodes on edge e (weights |E|/2 each).
std::array<Vec2, 2> edge_quadrature_points(const Mesh& mesh, std::size_t e);

/// Stiffness matrix and right-hand side over the free displacement dofs.
struct SparseSystem {
    CsrMatrix matrix;
    std::vector<double> rhs;
};

/// (C eps(w), eps(v)) restricted to free dofs.
CsrMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs, const Material& m);
/// b(v) for every free hat function v.
std::vector<double> assemble_load(const Mesh& mesh, const DofMap& dofs, const LoadData& loads);
/// sum_T |T| tau_T : eps(v) for every free hat function v.
std::vector<double> assemble_stress_load(const Mesh& mesh, const DofMap& dofs, std::span<const Sym2> tau);
/// System of (C(eps(w) - p), eps(v)) = b(v).
SparseSystem assemble_elastic_system(const Mesh& mesh, const DofMap& dofs, const Material& m, const LoadData& loads,
                                     std::span<const Dev2> p);

/// Scatter free-dof values into a full nodal vector (zero on Gamma_D).
std::vector<double> expand_displacement(const Mesh& mesh, const DofMap& dofs, std::span<const double> free);
std::vector<double> restrict_displacement(const Mesh& mesh, const DofMap& dofs, std::span<const double> full);

}  // namespace plastafem
