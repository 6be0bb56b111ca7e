#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "plastafem/error.hpp"
#include "plastafem/oracle.hpp"
#include "plastafem/solver.hpp"

using namespace plastafem;
using namespace plastafem::testing;

namespace {

Material unit_material() { return {1.0, 1.0, 1.0, 1.0, 1.0}; }

LoadData right_traction(Vec2 g) {
    return {[](Vec2) { return Vec2{}; }, [g](Vec2 x) { return x.x > 1.0 - 1e-12 ? g : Vec2{}; }};
}

}  // namespace

TEST(ReturnMap, ZeroStrain) {
    const ReturnMapResult r = return_map(Sym2{}, unit_material());
    EXPECT_EQ(r.p.norm(), 0.0);
    EXPECT_EQ(r.alpha, 0.0);
}

TEST(ReturnMap, ElasticExampleMatchesBruteForce) {
    const Sym2 eps{0.1, 0.0, -0.1};
    const Material m = unit_material();
    const ReturnMapResult r = return_map(eps, m);
    EXPECT_EQ(r.p.norm(), 0.0);
    const LocalMinimum bf = brute_force_local(eps, m);
    EXPECT_LE(bf.q.norm(), 1e-6);
}

TEST(ReturnMap, PlasticExampleMatchesBruteForce) {
    const Sym2 eps{1.0, 0.0, -1.0};
    const Material m = unit_material();
    const ReturnMapResult r = return_map(eps, m);
    const double expected = (2.0 * std::sqrt(2.0) - 1.0) / 4.0;
    EXPECT_NEAR(r.p.norm(), expected, 1e-15);
    EXPECT_NEAR(r.alpha, expected, 1e-15);
    EXPECT_NEAR(r.p.d11, expected / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(r.p.d12, 0.0, 1e-15);

    const LocalMinimum bf = brute_force_local(eps, m);
    EXPECT_NEAR(bf.q.d11, r.p.d11, 1e-6);
    EXPECT_NEAR(bf.q.d12, r.p.d12, 1e-6);
    EXPECT_NEAR(bf.beta, r.alpha, 1e-6);
    EXPECT_LE(local_energy_density(eps, r.p, r.alpha, m), bf.value + 1e-12);
}

TEST(ReturnMap, OptimalAgainstRandomFeasiblePoints) {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int k = 0; k < 50; ++k) {
        const Material m{u(rng), u(rng), u(rng), u(rng), u(rng)};
        const Sym2 eps{n(rng), n(rng), n(rng)};
        const ReturnMapResult r = return_map(eps, m);
        const double best = local_energy_density(eps, r.p, r.alpha, m);
        for (int j = 0; j < 10000 / 50; ++j) {
            const Dev2 q{n(rng), n(rng)};
            const double beta = q.norm() + std::abs(n(rng));
            EXPECT_LE(best, local_energy_density(eps, q, beta, m) + 1e-12);
        }
    }
}

TEST(ReturnMap, Complementarity) {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> n(0.0, 1.0);
    const Material m{1.3, 0.7, 0.5, 0.9, 0.8};
    for (int k = 0; k < 1000; ++k) {
        const Sym2 eps{n(rng), n(rng), n(rng)};
        const ReturnMapResult r = return_map(eps, m);
        const Dev2 s = 2.0 * m.mu * Dev2::from(eps);
        if (r.p.norm() == 0.0) {
            EXPECT_LE(s.norm(), m.sigma_y);
        } else {
            // Radial return: s - (2 mu + h_kin + h_iso) p = sigma_y p / |p|.
            const Dev2 lhs = s - (2.0 * m.mu + m.h_kin + m.h_iso) * r.p;
            const Dev2 rhs = (m.sigma_y / r.p.norm()) * r.p;
            EXPECT_LE((lhs - rhs).norm(), 1e-12 * (1.0 + s.norm()));
        }
    }
}

TEST(ReturnMap, NonFiniteThrows) {
    EXPECT_THROW(return_map(Sym2{std::nan(""), 0, 0}, unit_material()), ArgumentError);
    EXPECT_THROW(return_map(Sym2{0, std::numeric_limits<double>::infinity(), 0}, unit_material()), ArgumentError);
}

TEST(DisplacementSolve, ZeroLoadsGiveZero) {
    const Mesh m = l_shape(2);
    const std::vector<Dev2> p(m.num_elements());
    for (double v : displacement_solve(m, unit_material(), LoadData::zero(), p)) EXPECT_EQ(v, 0.0);
}

TEST(DisplacementSolve, ManufacturedSolutionConvergesAtFirstOrder) {
    const double mu = 1.0, lambda = 1.0;
    const Material mat{mu, lambda, 1.0, 1.0, 1.0};
    // w = (x y, 0): sigma = [[(2mu+lambda) y, mu x], [mu x, lambda y]].
    auto exact_stress = [&](Vec2 x) { return Sym2{(2 * mu + lambda) * x.y, mu * x.x, lambda * x.y}; };
    LoadData loads{[&](Vec2) { return Vec2{0.0, -(mu + lambda)}; },
                   [&](Vec2 x) {
                       if (x.x > 1.0 - 1e-12) return apply(exact_stress(x), {1, 0});
                       if (x.y > 1.0 - 1e-12) return apply(exact_stress(x), {0, 1});
                       return apply(exact_stress(x), {0, -1});
                   }};
    std::vector<double> log_h, log_err;
    for (int r = 2; r <= 7; ++r) {
        const Mesh m = square(r);
        const std::vector<Dev2> p(m.num_elements());
        const std::vector<double> w = displacement_solve(m, mat, loads, p, {1e-10, 500, 1e-14, LinearSolverKind::Direct});
        double err = 0.0;
        for (std::size_t t = 0; t < m.num_elements(); ++t) {
            const Sym2 sh = stress(m, w, Dev2{}, t, mat);
            // Three-point rule: exact for the quadratic integrand.
            for (const Vec2& x : triangle_quadrature_points(m, t)) {
                const Sym2 d = exact_stress(x) - sh;
                err += m.area(t) / 3.0 * ddot(d, d);
            }
        }
        log_h.push_back(std::log(std::pow(2.0, -r / 2.0)));
        log_err.push_back(0.5 * std::log(err));
    }
    const double n = static_cast<double>(log_h.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < log_h.size(); ++i) {
        mx += log_h[i] / n;
        my += log_err[i] / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < log_h.size(); ++i) {
        sxy += (log_h[i] - mx) * (log_err[i] - my);
        sxx += (log_h[i] - mx) * (log_h[i] - mx);
    }
    EXPECT_NEAR(sxy / sxx, 1.0, 0.15);
}

TEST(DisplacementSolve, ConstantDirichletShiftIsTranslation) {
    const Mesh m = square(3);
    const Material mat = unit_material();
    const LoadData loads = LoadData::constant({0.2, -0.5}, {0.1, 0.3});
    const DisplacementSolver solver(m, mat, loads);
    const std::vector<Dev2> p(m.num_elements(), Dev2{0.01, -0.02});
    const std::vector<double> w0 = solver.solve(p);
    std::vector<double> lift(2 * m.num_vertices());
    for (std::size_t v = 0; v < m.num_vertices(); ++v) {
        lift[2 * v] = 0.7;
        lift[2 * v + 1] = -1.3;
    }
    const std::vector<double> w1 = solver.solve(p, lift);
    for (std::size_t v = 0; v < m.num_vertices(); ++v) {
        EXPECT_NEAR(w1[2 * v] - w0[2 * v], 0.7, 1e-12);
        EXPECT_NEAR(w1[2 * v + 1] - w0[2 * v + 1], -1.3, 1e-12);
    }
}

TEST(DisplacementSolve, ConjugateGradientAgreesWithDirect) {
    const Mesh m = l_shape(3);
    const Material mat = unit_material();
    const LoadData loads = LoadData::constant({0.0, -1.0}, {0.0, 0.0});
    const std::vector<Dev2> p(m.num_elements(), Dev2{0.1, 0.05});
    SolverOptions cg;
    cg.linear_solver = LinearSolverKind::ConjugateGradient;
    const auto a = displacement_solve(m, mat, loads, p);
    const auto b = displacement_solve(m, mat, loads, p, cg);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9);
}

TEST(SolveVi, ElasticLimit) {
    const Mesh m = square(3);
    const Material mat{1.0, 1.0, 1.0, 1.0, 1e12};
    const LoadData loads = right_traction({0.1, 0.0});
    const SolveResult sr = solve_vi(m, mat, loads);
    for (std::size_t t = 0; t < m.num_elements(); ++t) {
        EXPECT_EQ(sr.state.p[t].norm(), 0.0);
        EXPECT_EQ(sr.state.alpha[t], 0.0);
    }
    const std::vector<double> w = displacement_solve(m, mat, loads, std::vector<Dev2>(m.num_elements()));
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        diff += (w[i] - sr.state.w[i]) * (w[i] - sr.state.w[i]);
        ref += w[i] * w[i];
    }
    EXPECT_LE(std::sqrt(diff / ref), 1e-10);
}

TEST(SolveVi, ZeroLoads) {
    const Mesh m = l_shape(1);
    const SolveResult sr = solve_vi(m, unit_material(), LoadData::zero());
    EXPECT_EQ(energy(m, unit_material(), LoadData::zero(), sr.state), 0.0);
    for (double v : sr.state.w) EXPECT_EQ(v, 0.0);
}

TEST(SolveVi, MatchesOracleOnEightElementSquare) {
    const Mesh m = square(2);
    ASSERT_EQ(m.num_elements(), 8u);
    const Material mat{1.0, 1.0, 1.0, 1.0, 0.2};
    const LoadData loads = right_traction({1.0, 0.5});
    const SolveResult sr = solve_vi(m, mat, loads);
    const OracleResult orc = oracle_minimize(m, mat, loads);
    ASSERT_TRUE(orc.converged);
    double plastic = 0.0;
    for (const Dev2& p : sr.state.p) plastic = std::max(plastic, p.norm());
    EXPECT_GT(plastic, 0.0);
    const double e_vi = sr.energies.back();
    const double e_or = energy(m, mat, loads, orc.state);
    EXPECT_LE(std::abs(e_vi - e_or), 1e-8 * (1.0 + std::abs(e_vi)));
    EXPECT_LE(e_or, e_vi + 1e-8);
    EXPECT_LE(error_measure(m, sr.state, m, orc.state, mat), 1e-5);
}

TEST(SolveVi, EnergyMonotoneAndFeasible) {
    const Mesh m = l_shape(3);
    const Material mat{1.0, 1.0, 1.0, 1.0, 0.5};
    const LoadData loads = LoadData::constant({0.0, -1.0}, {0.0, 0.0});
    const SolveResult sr = solve_vi(m, mat, loads);
    EXPECT_TRUE(sr.monotone);
    for (std::size_t k = 1; k < sr.energies.size(); ++k) {
        EXPECT_LE(sr.energies[k], sr.energies[k - 1] + 1e-12 * (1.0 + std::abs(sr.energies[k])));
    }
    for (std::size_t t = 0; t < m.num_elements(); ++t) {
        EXPECT_LE(sr.state.p[t].norm(), sr.state.alpha[t] * (1.0 + 1e-12));
    }
    for (std::size_t v = 0; v < m.num_vertices(); ++v) {
        if (m.is_dirichlet_vertex(v)) {
            EXPECT_EQ(sr.state.w[2 * v], 0.0);
            EXPECT_EQ(sr.state.w[2 * v + 1], 0.0);
        }
    }
}

TEST(SolveVi, UniqueFromDifferentStarts) {
    const Mesh m = l_shape(2);
    const Material mat{1.0, 1.0, 1.0, 1.0, 0.5};
    const LoadData loads = LoadData::constant({0.0, -1.0}, {0.0, 0.0});
    SolverOptions opts;
    const SolveResult a = solve_vi(m, mat, loads, opts);
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n(0.0, 0.5);
    std::vector<Dev2> p0(m.num_elements());
    for (auto& p : p0) p = Dev2{n(rng), n(rng)};
    const SolveResult b = solve_vi(m, mat, loads, opts, p0);
    EXPECT_LE(error_measure(m, a.state, m, b.state, mat), 10.0 * opts.tol);
}

TEST(SolveVi, VariationalInequalityAndPerturbations) {
    const Mesh m = l_shape(2);
    const Material mat{1.0, 1.0, 1.0, 1.0, 0.5};
    const LoadData loads = LoadData::constant({0.0, -1.0}, {0.0, 0.0});
    const SolveResult sr = solve_vi(m, mat, loads);
    const ViCheck chk = check_variational_inequality(m, mat, loads, sr.state, 200, 5);
    EXPECT_TRUE(chk.passed) << chk.max_violation;
    EXPECT_EQ(chk.samples, 200u);

    std::mt19937_64 rng(17);
    const double e = sr.energies.back();
    for (int k = 0; k < 100; ++k) {
        DiscreteState z = random_state(m, rng, std::pow(10.0, -1.0 - 3.0 * (k % 4) / 3.0));
        for (std::size_t i = 0; i < z.w.size(); ++i) z.w[i] += sr.state.w[i];
        for (std::size_t t = 0; t < m.num_elements(); ++t) {
            z.p[t] = z.p[t] + sr.state.p[t];
            z.alpha[t] = std::max(z.alpha[t] + sr.state.alpha[t], z.p[t].norm());
        }
        EXPECT_LE(e, energy(m, mat, loads, z) + 1e-12);
    }
}

TEST(SolveVi, IterationCapThrowsWithEnergies) {
    const Mesh m = l_shape(2);
    SolverOptions opts;
    opts.max_iterations = 1;
    try {
        solve_vi(m, {1.0, 1.0, 1.0, 1.0, 0.5}, LoadData::constant({0.0, -1.0}, {0.0, 0.0}), opts);
        FAIL() << "expected NonConvergence";
    } catch (const NonConvergence& e) {
        EXPECT_EQ(e.energies().size(), 2u);
    }
}

TEST(SolveVi, RejectsBadTolerance) {
    SolverOptions opts;
    opts.tol = 0.0;
    EXPECT_THROW(solve_vi(square(), unit_material(), LoadData::zero(), opts), ArgumentError);
}

TEST(Oracle, RefusesLargeProblems) {
    const Mesh m = square(6);
    EXPECT_THROW(oracle_minimize(m, unit_material(), LoadData::zero()), ArgumentError);
}

TEST(Oracle, ElasticLimitMatchesLinearSolve) {
    const Mesh m = square(2);
    const Material mat{1.0, 1.0, 1.0, 1.0, 1e12};
    const LoadData loads = right_traction({0.1, 0.0});
    const OracleResult orc = oracle_minimize(m, mat, loads);
    ASSERT_TRUE(orc.converged);
    const auto w = displacement_solve(m, mat, loads, std::vector<Dev2>(m.num_elements()));
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(orc.state.w[i], w[i], 1e-7);
}
