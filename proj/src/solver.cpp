#include "plastafem/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "plastafem/error.hpp"
#include "plastafem/parallel.hpp"

namespace plastafem {

ReturnMapResult return_map(const Sym2& eps, const Material& m) {
    if (!std::isfinite(eps.xx) || !std::isfinite(eps.xy) || !std::isfinite(eps.yy)) {
        throw ArgumentError("return_map: non-finite strain");
    }
    const Dev2 s = 2.0 * m.mu * Dev2::from(eps);
    const double t = s.norm();
    if (t <= m.sigma_y) return {};
    const double gamma = (t - m.sigma_y) / (2.0 * m.mu + m.h_kin + m.h_iso);
    ReturnMapResult r;
    r.p = (gamma / t) * s;
    r.alpha = r.p.norm();
    return r;
}

double local_energy_density(const Sym2& eps, const Dev2& q, double beta, const Material& m) {
    const double qn = q.norm();
    if (qn > beta * (1.0 + kFeasibilityTol) + std::numeric_limits<double>::min()) {
        return std::numeric_limits<double>::infinity();
    }
    const Sym2 e = eps - q.full();
    return 0.5 * ddot(m.elasticity(e), e) + 0.5 * m.h_kin * qn * qn + 0.5 * m.h_iso * beta * beta + m.sigma_y * qn;
}

// ---------------------------------------------------------------------------

DisplacementSolver::DisplacementSolver(const Mesh& mesh, const Material& m, const LoadData& loads,
                                       const SolverOptions& options)
    : mesh_(mesh),
      material_(m),
      options_(options),
      dofs_(mesh),
      stiffness_(assemble_stiffness(mesh, dofs_, m)),
      load_(assemble_load(mesh, dofs_, loads)) {
    if (options_.linear_solver == LinearSolverKind::Direct && stiffness_.n > 0) {
        direct_ = std::make_unique<DirectSolver>(stiffness_);
    }
}

DisplacementSolver::~DisplacementSolver() = default;
DisplacementSolver::DisplacementSolver(DisplacementSolver&&) noexcept = default;

std::vector<double> DisplacementSolver::solve(std::span<const Dev2> p, std::span<const double> dirichlet_values,
                                              std::span<const double> initial_guess) const {
    if (p.size() != mesh_.num_elements()) throw ArgumentError("plastic field does not match the mesh");
    std::vector<double> rhs = load_;
    std::vector<Sym2> tau(p.size());
    for (std::size_t t = 0; t < p.size(); ++t) tau[t] = material_.elasticity(p[t].full());

    std::vector<double> lift;
    if (!dirichlet_values.empty()) {
        if (dirichlet_values.size() != 2 * mesh_.num_vertices()) throw ArgumentError("dirichlet values: size mismatch");
        lift.assign(2 * mesh_.num_vertices(), 0.0);
        for (std::size_t v = 0; v < mesh_.num_vertices(); ++v) {
            if (mesh_.is_dirichlet_vertex(v)) {
                lift[2 * v] = dirichlet_values[2 * v];
                lift[2 * v + 1] = dirichlet_values[2 * v + 1];
            }
        }
        // Move (C eps(lift), eps(v)) to the right-hand side.
        for (std::size_t t = 0; t < p.size(); ++t) tau[t] = tau[t] - material_.elasticity(strain(mesh_, lift, t));
    }
    const auto extra = assemble_stress_load(mesh_, dofs_, tau);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += extra[i];

    std::vector<double> x;
    if (stiffness_.n > 0) {
        const double target = options_.linear_tol * inf_norm(rhs);
        if (direct_) {
            x = direct_->solve(rhs);
            std::vector<double> r = stiffness_.multiply(x);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
            if (inf_norm(r) > target) x = conjugate_gradient(stiffness_, rhs, x, options_.linear_tol).x;
        } else {
            std::vector<double> x0;
            if (!initial_guess.empty()) x0 = restrict_displacement(mesh_, dofs_, initial_guess);
            x = conjugate_gradient(stiffness_, rhs, x0, options_.linear_tol).x;
        }
    }
    std::vector<double> w = expand_displacement(mesh_, dofs_, x);
    if (!lift.empty()) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] += lift[i];
    }
    return w;
}

std::vector<double> displacement_solve(const Mesh& mesh, const Material& m, const LoadData& loads,
                                       std::span<const Dev2> p, const SolverOptions& options) {
    return DisplacementSolver(mesh, m, loads, options).solve(p);
}

double state_distance(const Mesh& mesh, const Material& m, const DiscreteState& a, const DiscreteState& b) {
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const Sym2 d = stress(mesh, a.w, a.p[t], t, m) - stress(mesh, b.w, b.p[t], t, m);
        sum += mesh.area(t) * ddot(d, d);
    }
    return std::sqrt(sum);
}

SolveResult solve_vi(const Mesh& mesh, const Material& m, const LoadData& loads, const SolverOptions& options,
                     std::span<const Dev2> initial_p) {
    m.validate();
    if (!(options.tol > 0.0)) throw ArgumentError("solve_vi: tol must be positive");
    const DisplacementSolver disp(mesh, m, loads, options);

    SolveResult res;
    res.state = DiscreteState::zero(mesh);
    if (!initial_p.empty()) {
        if (initial_p.size() != mesh.num_elements()) throw ArgumentError("initial plastic field does not match the mesh");
        for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
            res.state.p[t] = initial_p[t];
            res.state.alpha[t] = initial_p[t].norm();
        }
    }
    double e_prev = energy(mesh, m, loads, res.state);
    res.energies.push_back(e_prev);

    int consecutive = 0;
    for (std::size_t k = 1; k <= options.max_iterations; ++k) {
        DiscreteState prev = res.state;
        res.state.w = disp.solve(res.state.p, {}, prev.w);
        parallel_for(mesh.num_elements(), [&](std::size_t t) {
            const ReturnMapResult r = return_map(strain(mesh, res.state.w, t), m);
            res.state.p[t] = r.p;
            res.state.alpha[t] = r.alpha;
        });
        const double e = energy(mesh, m, loads, res.state);
        res.energies.push_back(e);
        res.iterations = k;
        if (e > e_prev + 1e-12 * (1.0 + std::abs(e))) res.monotone = false;

        const double decrement = e_prev - e;
        const double increment = state_distance(mesh, m, res.state, prev);
        e_prev = e;
        if (decrement < options.tol * (1.0 + std::abs(e)) && increment < options.tol) {
            if (++consecutive >= 2) return res;
        } else {
            consecutive = 0;
        }
    }
    throw NonConvergence("solve_vi: no convergence within " + std::to_string(options.max_iterations) + " iterations",
                         res.energies);
}

ViCheck check_variational_inequality(const Mesh& mesh, const Material& m, const LoadData& loads,
                                     const DiscreteState& u, std::size_t samples, std::uint64_t seed, double slack) {
    u.check_matches(mesh);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> expo(-3.0, 0.0);

    double scale0 = 1.0;
    for (double v : u.w) scale0 = std::max(scale0, std::abs(v));
    for (double a : u.alpha) scale0 = std::max(scale0, a);

    const double a_uu = bilinear_a(mesh, m, u, u);
    const double b_u = linear_b(mesh, loads, u);
    const double psi_u = psi(mesh, m, u);

    ViCheck chk;
    chk.max_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < samples; ++s) {
        const double scale = std::pow(10.0, expo(rng)) * scale0;
        DiscreteState z = u;
        for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
            if (mesh.is_dirichlet_vertex(v)) continue;
            z.w[2 * v] += scale * normal(rng);
            z.w[2 * v + 1] += scale * normal(rng);
        }
        for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
            z.p[t] = z.p[t] + Dev2{scale * normal(rng), scale * normal(rng)};
            z.alpha[t] = z.p[t].norm() + scale * std::abs(normal(rng));
        }
        const double lhs = linear_b(mesh, loads, z) - b_u;
        const double rhs = bilinear_a(mesh, m, u, z) - a_uu + psi(mesh, m, z) - psi_u;
        chk.max_violation = std::max(chk.max_violation, lhs - rhs);
        ++chk.samples;
    }
    chk.passed = chk.max_violation <= slack;
    return chk;
}

}  // namespace plastafem
