#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "helpers.hpp"
#include "plastafem/diagnostics.hpp"
#include "plastafem/error.hpp"

using namespace plastafem;
using namespace plastafem::testing;

namespace {

Problem elastic_square() {
    return {square(1), Material{1.0, 1.0, 1.0, 1.0, 1e12},
            LoadData{[](Vec2 x) { return Vec2{x.y, -1.0}; }, [](Vec2) { return Vec2{0.2, 0.0}; }}};
}

Problem l_shape_problem() {
    return {l_shape(1), Material{1.0, 1.0, 1.0, 1.0, 0.5}, LoadData::constant({0.0, -1.0}, {0.0, 0.0})};
}

AdaptRun run_levels(const Problem& p, std::size_t levels, double theta = 0.3) {
    AdaptOptions opts;
    opts.theta = theta;
    opts.stop.max_levels = levels;
    return adapt_loop(p, opts);
}

/// Index of the coarse element containing x (by barycentric coordinates).
std::size_t locate(const Mesh& m, Vec2 x) {
    for (std::size_t t = 0; t < m.num_elements(); ++t) {
        const auto& v = m.element(t).v;
        const Vec2 a = m.vertex(v[0]), b = m.vertex(v[1]), c = m.vertex(v[2]);
        const double det = cross(b - a, c - a);
        const double l1 = cross(x - a, c - a) / det, l2 = cross(b - a, x - a) / det;
        if (l1 >= -1e-12 && l2 >= -1e-12 && l1 + l2 <= 1.0 + 1e-12) return t;
    }
    return kNone;
}

/// d[fine, coarse]^2 for a fine mesh that refines the coarse one.
double nested_distance_sq(const Mesh& coarse, const DiscreteState& uc, const Mesh& fine, const DiscreteState& uf,
                          const Material& mat) {
    double s = 0.0;
    for (std::size_t t = 0; t < fine.num_elements(); ++t) {
        const std::size_t parent = locate(coarse, fine.centroid(t));
        const Sym2 d = stress(fine, uf.w, uf.p[t], t, mat) - stress(coarse, uc.w, uc.p[parent], parent, mat);
        s += fine.area(t) * ddot(d, d);
    }
    return s;
}

using VertexSet = std::set<std::pair<double, double>>;

VertexSet corners(const Mesh& m, std::size_t t) {
    VertexSet s;
    for (std::size_t v : m.element(t).v) s.insert({m.vertex(v).x, m.vertex(v).y});
    return s;
}

/// Coarse element ids whose triangle also appears in the fine mesh.
std::vector<std::size_t> kept(const Mesh& coarse, const Mesh& fine) {
    std::set<VertexSet> fine_sets;
    for (std::size_t t = 0; t < fine.num_elements(); ++t) fine_sets.insert(corners(fine, t));
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < coarse.num_elements(); ++t) {
        if (fine_sets.count(corners(coarse, t))) out.push_back(t);
    }
    return out;
}

/// Uniformly refined levels solved directly, independent of marking.
AdaptRun uniform_run(const Problem& p, int levels) {
    AdaptRun run;
    Mesh mesh = p.mesh;
    for (int l = 0; l < levels; ++l) {
        SolveResult sr = solve_vi(mesh, p.material, p.loads);
        IndicatorField ind = compute_indicators(mesh, sr.state, p.material, p.loads);
        run.levels.push_back({mesh, std::move(sr.state), std::move(ind), {}, sr.energies.back(), sr.iterations});
        mesh = refine_uniform(mesh, 1);
    }
    return run;
}

AdaptTrace synthetic_trace(std::size_t levels) {
    AdaptTrace trace;
    for (std::size_t l = 0; l < levels; ++l) {
        LevelRecord r;
        r.level = l;
        r.n_elements = 10 + 7 * l * l;
        r.eta_sq = 4.0 * std::pow(0.5, static_cast<double>(l));
        r.energy = -1.0 - 1.0 / static_cast<double>(l + 1);
        trace.push_back(r);
    }
    return trace;
}

}  // namespace

TEST(CheckA1, IdenticalLevelsAreGuarded) {
    const Problem p = elastic_square();
    AdaptRun run = run_levels(p, 0);
    run.levels.push_back(run.levels.front());
    const StabilityCheck c = check_A1(run, p, 1);
    ASSERT_EQ(c.per_pair.size(), 1u);
    EXPECT_EQ(c.per_pair[0], 0.0);
    EXPECT_EQ(c.guarded, 1u);
}

TEST(CheckA1, ElasticTwoLevelMatchesRecomputation) {
    const Problem p = elastic_square();
    const AdaptRun run = run_levels(p, 1);
    ASSERT_EQ(run.levels.size(), 2u);
    const Level& a = run.levels[0];
    const Level& b = run.levels[1];
    const StabilityCheck c = check_A1(run, p, 7, 0);

    const std::vector<std::size_t> s = kept(a.mesh, b.mesh);
    ASSERT_FALSE(s.empty());
    double sa = 0.0, sb = 0.0;
    for (std::size_t t : s) {
        sa += a.indicators.eta_sq[t];
        sb += b.indicators.eta_sq[locate(b.mesh, a.mesh.centroid(t))];
    }
    const double d = std::sqrt(nested_distance_sq(a.mesh, a.state, b.mesh, b.state, p.material));
    const double expected = std::abs(std::sqrt(sb) - std::sqrt(sa)) / d;
    ASSERT_EQ(c.per_pair.size(), 1u);
    EXPECT_TRUE(std::isfinite(c.c1_est));
    EXPECT_NEAR(c.per_pair[0], expected, 1e-10 * (1.0 + expected));

    // Random subsets can only raise the maximum.
    EXPECT_GE(check_A1(run, p, 7).c1_est, c.c1_est);
}

TEST(CheckA1, ShortRunThrows) {
    const Problem p = elastic_square();
    const AdaptRun run = run_levels(p, 0);
    EXPECT_THROW(check_A1(run, p, 1), InsufficientData);
    EXPECT_THROW(check_A2(run, p), InsufficientData);
    EXPECT_THROW(check_A4(run, p), InsufficientData);
}

TEST(CheckA1, RunningIsMonotone) {
    const Problem p = l_shape_problem();
    const AdaptRun run = run_levels(p, 6);
    const StabilityCheck c = check_A1(run, p, 3);
    for (std::size_t i = 1; i < c.running.size(); ++i) EXPECT_GE(c.running[i], c.running[i - 1]);
    EXPECT_EQ(c.running.back(), c.c1_est);
}

TEST(CheckA2, ZeroDataFitsZero) {
    const Problem p{square(1), Material{}, LoadData::zero()};
    const AdaptRun run = uniform_run(p, 4);
    const ReductionCheck c = check_A2(run, p);
    EXPECT_EQ(c.rho2_est, 0.0);
    EXPECT_EQ(c.c2_est, 0.0);
    EXPECT_TRUE(c.passed);
}

TEST(CheckA2, FittedEnvelopeIsFeasible) {
    const Problem p = l_shape_problem();
    const AdaptRun run = run_levels(p, 8);
    const ReductionCheck c = check_A2(run, p);
    ASSERT_EQ(c.samples.size(), 8u);
    for (const auto& s : c.samples) {
        const double rhs = c.rho2_est * s.old_refined + c.c2_est * s.dist_sq;
        EXPECT_LE(s.new_refined, rhs * (1.0 + 1e-10));
    }
    EXPECT_TRUE(std::isfinite(c.rho2_est));
    EXPECT_TRUE(std::isfinite(c.c2_est));
}

TEST(FitReduction, SolvesSmallProgram) {
    const std::vector<ReductionSample> samples{{1.0, 0.5, 0.0}, {0.0, 1.0, 1.0}, {2.0, 1.0, 0.5}};
    const ReductionFit fit = fit_reduction(samples);
    EXPECT_NEAR(fit.rho2, 0.5, 1e-15);
    EXPECT_NEAR(fit.c2, 1.0, 1e-15);

    // No feasible grid point has a smaller objective.
    double ox = 0.0, oy = 0.0;
    for (const auto& s : samples) {
        ox += s.old_refined;
        oy += s.dist_sq;
    }
    const double best = fit.rho2 * ox + fit.c2 * oy;
    for (int i = 0; i <= 200; ++i) {
        for (int j = 0; j <= 200; ++j) {
            const double rho = 0.01 * i, c = 0.01 * j;
            bool ok = true;
            for (const auto& s : samples) ok = ok && s.new_refined <= rho * s.old_refined + c * s.dist_sq;
            if (ok) EXPECT_GE(rho * ox + c * oy, best - 1e-12);
        }
    }
}

TEST(CheckA3, ConstantSolutionGivesNonPositiveSums) {
    const Problem p{square(1), Material{}, LoadData::zero()};
    const AdaptRun run = uniform_run(p, 4);
    const Reference ref = compute_reference(run, p, 1);
    const QuasiOrthogonalityCheck c = check_A3(run, p, ref);
    for (std::size_t i = 0; i < c.eps3.size(); ++i) {
        if (c.eps3[i] == 0.0) continue;
        for (const auto& row : c.table[i]) {
            for (double v : row) EXPECT_LE(v, 0.0);
        }
    }
}

TEST(CheckA3, ZeroShiftSumsAreNondecreasing) {
    const Problem p = l_shape_problem();
    const AdaptRun run = run_levels(p, 6);
    const Reference ref = compute_reference(run, p, 1);
    const QuasiOrthogonalityCheck c = check_A3(run, p, ref);
    ASSERT_EQ(c.eps3.front(), 0.0);
    ASSERT_EQ(c.table[0].size(), run.levels.size() - 1);
    for (const auto& row : c.table[0]) {
        for (std::size_t k = 1; k < row.size(); ++k) EXPECT_GE(row[k], row[k - 1]);
    }
    for (std::size_t i = 0; i < c.eps3.size(); ++i) {
        EXPECT_TRUE(std::isfinite(c.max_entry[i]));
        EXPECT_TRUE(c.bounded[i]);
    }
}

TEST(CheckA4, IdenticalPairIsSkipped) {
    const Problem p = elastic_square();
    AdaptRun run = run_levels(p, 0);
    run.levels.push_back(run.levels.front());
    const DiscreteReliabilityCheck c = check_A4(run, p);
    EXPECT_EQ(c.skipped, 1u);
    EXPECT_EQ(c.c4_est, 0.0);
    const Level& l = run.levels.front();
    EXPECT_LT(discrete_reliability_ratio(l.mesh, l.state, l.indicators, l.mesh, l.state, p.material), 0.0);
}

TEST(CheckA4, SingleMarkedElementMatchesRecomputation) {
    const Problem p = elastic_square();
    const Mesh coarse = square(2);
    const SolveResult uc = solve_vi(coarse, p.material, p.loads);
    const IndicatorField ind = compute_indicators(coarse, uc.state, p.material, p.loads);
    const std::vector<std::size_t> mark{3};
    const Mesh fine = refine(coarse, mark);
    const SolveResult uf = solve_vi(fine, p.material, p.loads);

    const std::vector<std::size_t> keep = kept(coarse, fine);
    double denom = 0.0;
    for (std::size_t t = 0; t < coarse.num_elements(); ++t) {
        if (std::find(keep.begin(), keep.end(), t) == keep.end()) denom += ind.eta_sq[t];
    }
    const double expected = nested_distance_sq(coarse, uc.state, fine, uf.state, p.material) / denom;
    const double r = discrete_reliability_ratio(coarse, uc.state, ind, fine, uf.state, p.material);
    EXPECT_GT(r, 0.0);
    EXPECT_NEAR(r, expected, 1e-10 * expected);
}

TEST(CheckA4, StableOverRandomRefinementPairs) {
    const Problem p = l_shape_problem();
    std::mt19937_64 rng(9);
    Mesh coarse = refine_uniform(p.mesh, 1);
    std::vector<double> ratios;
    for (int k = 0; k < 10; ++k) {
        const SolveResult uc = solve_vi(coarse, p.material, p.loads);
        const IndicatorField ind = compute_indicators(coarse, uc.state, p.material, p.loads);
        const Mesh fine = refine(coarse, random_subset(coarse.num_elements(), 0.2, rng));
        const SolveResult uf = solve_vi(fine, p.material, p.loads);
        const double r = discrete_reliability_ratio(coarse, uc.state, ind, fine, uf.state, p.material);
        ASSERT_GT(r, 0.0);
        ratios.push_back(r);
        coarse = fine;
    }
    EXPECT_LE(spread(ratios), 3.0);
}

TEST(FitRates, GeometricSequence) {
    const AdaptTrace trace = synthetic_trace(8);
    EXPECT_NEAR(fit_rates(trace).rho_linear, 0.5, 1e-12);
}

TEST(FitRates, InverseSquareRootRate) {
    AdaptTrace trace = synthetic_trace(8);
    for (auto& r : trace) {
        const double n = static_cast<double>(r.n_elements - trace.front().n_elements + 1);
        r.eta_sq = 1.0 / n;
    }
    EXPECT_NEAR(fit_rates(trace).rate_s, 0.5, 1e-12);
}

TEST(FitRates, NeedsSixLevels) {
    EXPECT_THROW(fit_rates(synthetic_trace(5)), InsufficientData);
    EXPECT_NO_THROW(fit_rates(synthetic_trace(6)));
}

TEST(FitRates, EnergyRateOnSyntheticGap) {
    AdaptTrace trace = synthetic_trace(8);
    for (auto& r : trace) {
        const double n = static_cast<double>(r.n_elements - trace.front().n_elements + 1);
        r.energy = -2.0 + 1.0 / n;
    }
    // The gap uses the finest level as the minimum, so the slope is close to 1.
    const RateFit fit = fit_rates(trace);
    EXPECT_GT(fit.energy_rate, 0.9);
    EXPECT_LT(fit.energy_rate, 1.3);
}

TEST(Diagnostics, AsymptoticStartAndSpread) {
    const AdaptTrace trace = synthetic_trace(10);
    // n - n0 = 7 l^2 >= 100 first at l = 4.
    EXPECT_EQ(asymptotic_start(trace), 4u);
    EXPECT_EQ(asymptotic_start(synthetic_trace(5), 1e9), 2u);
    const std::vector<double> v{2.0, 4.0, 3.0};
    EXPECT_DOUBLE_EQ(spread(v), 2.0);
}

TEST(Diagnostics, ClosureConstant) {
    AdaptTrace trace(3);
    trace[0].n_elements = 10;
    trace[0].n_marked = 2;
    trace[1].n_elements = 16;
    trace[1].n_marked = 4;
    trace[2].n_elements = 30;
    // max(6 / 2, 20 / 6)
    EXPECT_DOUBLE_EQ(closure_constant(trace), 10.0 / 3.0);
    EXPECT_EQ(closure_constant(AdaptTrace(1)), 0.0);
}

TEST(Diagnostics, ReportIsDeterministic) {
    const Problem p = l_shape_problem();
    const AdaptRun run = run_levels(p, 6);
    const Reference ref = compute_reference(run, p, 1);
    const AxiomReport a = build_axiom_report(run, p, ref, 5);
    const AxiomReport b = build_axiom_report(run, p, ref, 5);
    EXPECT_EQ(a.a1.per_pair, b.a1.per_pair);
    EXPECT_EQ(a.a2.running_rho2, b.a2.running_rho2);
    EXPECT_EQ(a.a3.table, b.a3.table);
    EXPECT_EQ(a.a4.per_pair, b.a4.per_pair);
    EXPECT_EQ(a.rates.rho_linear, b.rates.rho_linear);
    ASSERT_EQ(a.levels.size(), b.levels.size());
    for (std::size_t l = 0; l < a.levels.size(); ++l) {
        EXPECT_EQ(a.levels[l].reliability, b.levels[l].reliability);
        EXPECT_EQ(a.levels[l].xi_sq, b.levels[l].xi_sq);
    }
}
