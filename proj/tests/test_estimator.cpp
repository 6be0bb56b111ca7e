#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "plastafem/error.hpp"
#include "plastafem/estimator.hpp"
#include "plastafem/solver.hpp"

using namespace plastafem;
using namespace plastafem::testing;

namespace {

/// Two triangles sharing the vertical edge (0,-1)-(0,1), which is the
/// reference edge of both.
Mesh diamond() {
    std::vector<Vec2> v{{0, -1}, {0, 1}, {-1, 0}, {1, 0}};
    BoundaryTags tags{{{0, 2}, EdgeTag::Dirichlet},
                      {{1, 2}, EdgeTag::Neumann},
                      {{1, 3}, EdgeTag::Neumann},
                      {{0, 3}, EdgeTag::Neumann}};
    return Mesh::from_parts(std::move(v), {Element{{0, 1, 2}, 0}, Element{{1, 0, 3}, 0}}, std::move(tags));
}

/// Gauss-Legendre nodes and weights on [0, 1].
constexpr std::array<double, 5> kGaussX{0.046910077030668, 0.230765344947158, 0.5, 0.769234655052842,
                                        0.953089922969332};
constexpr std::array<double, 5> kGaussW{0.118463442528095, 0.239314335249683, 0.284444444444444, 0.239314335249683,
                                        0.118463442528095};

/// Integral over the triangle (p0, p1, p2) via the collapsed-square map.
template <class G>
double integrate(Vec2 p0, Vec2 p1, Vec2 p2, G&& g) {
    const double jac = std::abs(cross(p1 - p0, p2 - p0));
    double s = 0.0;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const double u = kGaussX[i], v = kGaussX[j];
            const Vec2 x = p0 + u * (p1 - p0) + (1.0 - u) * v * (p2 - p0);
            s += kGaussW[i] * kGaussW[j] * (1.0 - u) * g(x);
        }
    }
    return jac * s;
}

double total(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

}  // namespace

TEST(EdgeResidual, ConstantStressInteriorIsZero) {
    const Mesh m = square(2);
    const std::vector<Sym2> sigma(m.num_elements(), Sym2{0.3, -0.2, 1.1});
    for (std::size_t e = 0; e < m.num_edges(); ++e) {
        if (m.edge(e).tag == EdgeTag::Interior) {
            EXPECT_EQ(edge_residual(m, e, sigma, LoadData::zero()), 0.0);
        }
    }
}

TEST(EdgeResidual, DirichletIsZero) {
    const Mesh m = square(1);
    std::vector<Sym2> sigma(m.num_elements(), Sym2{5.0, 1.0, 2.0});
    const LoadData loads = LoadData::constant({1.0, 1.0}, {3.0, 3.0});
    for (std::size_t e = 0; e < m.num_edges(); ++e) {
        if (m.edge(e).tag == EdgeTag::Dirichlet) EXPECT_EQ(edge_residual(m, e, sigma, loads), 0.0);
    }
}

TEST(EdgeResidual, UnitJumpOnLengthTwoEdge) {
    const Mesh m = diamond();
    const std::size_t e = m.find_edge(0, 1);
    ASSERT_NE(e, kNone);
    EXPECT_DOUBLE_EQ(m.edge_length(e), 2.0);
    const std::vector<Sym2> sigma{Sym2{1, 0, 0}, Sym2{0, 0, 0}};
    EXPECT_NEAR(edge_residual(m, e, sigma, LoadData::zero()), std::sqrt(2.0), 1e-15);
}

TEST(EdgeResidual, UnknownEdgeThrows) {
    const Mesh m = square();
    const std::vector<Sym2> sigma(m.num_elements());
    EXPECT_THROW(edge_residual(m, m.num_edges(), sigma, LoadData::zero()), ArgumentError);
}

TEST(ElementIndicator, ConstantStressNoLoadIsZero) {
    const Mesh m = square(3);
    const std::vector<Sym2> sigma(m.num_elements(), Sym2{0.5, 0.25, -1.0});
    for (std::size_t t = 0; t < m.num_elements(); ++t) {
        bool interior = true;
        for (std::size_t e : m.element_edges(t)) interior = interior && m.edge(e).tag == EdgeTag::Interior;
        if (interior) EXPECT_EQ(element_indicator(m, t, sigma, LoadData::zero()), 0.0);
    }
}

TEST(ElementIndicator, AllDirichletTriangle) {
    const Mesh m = unit_right_triangle(true);
    const std::vector<Sym2> sigma{Sym2{2.0, 1.0, 3.0}};
    const double area = m.area(0);
    EXPECT_NEAR(element_indicator(m, 0, sigma, LoadData::constant({1.0, 0.0}, {0.0, 0.0})), area * area, 1e-15);
}

TEST(ElementIndicator, CheckerboardMatchesHandSum) {
    const Mesh m = square();
    ASSERT_EQ(m.num_elements(), 2u);
    const Vec2 f{0.5, -2.0}, g{1.0, 0.25};
    const LoadData loads = LoadData::constant(f, g);
    const Sym2 lower{1.0, 2.0, 3.0}, upper{-1.0, 0.0, 1.0};
    std::vector<Sym2> sigma(2);
    std::size_t lower_id = 0, upper_id = 1;
    if (m.centroid(0).x < m.centroid(0).y) std::swap(lower_id, upper_id);
    sigma[lower_id] = lower;
    sigma[upper_id] = upper;

    auto sq = [](Vec2 v) { return v.x * v.x + v.y * v.y; };
    auto trac = [](const Sym2& s, Vec2 n) { return Vec2{s.xx * n.x + s.xy * n.y, s.xy * n.x + s.yy * n.y}; };
    const double area = 0.5, diag = std::sqrt(2.0);
    const Vec2 nu_diag{1.0 / diag, -1.0 / diag};
    const double jump = diag * sq(trac(lower - upper, nu_diag));
    // Lower-right triangle: bottom and right edges are Neumann.
    const double lower_expected = area * area * sq(f) + std::sqrt(area) * (jump + sq(g - trac(lower, {0, -1})) +
                                                                           sq(g - trac(lower, {1, 0})));
    // Upper-left triangle: top edge Neumann, left edge Dirichlet.
    const double upper_expected = area * area * sq(f) + std::sqrt(area) * (jump + sq(g - trac(upper, {0, 1})));

    EXPECT_NEAR(element_indicator(m, lower_id, sigma, loads), lower_expected, 1e-12);
    EXPECT_NEAR(element_indicator(m, upper_id, sigma, loads), upper_expected, 1e-12);
}

TEST(Indicators, ZeroResidualForConstantStress) {
    const Mesh m = square(4);
    const Material mat{1.0, 2.0, 1.0, 1.0, 1.0};
    DiscreteState z = DiscreteState::zero(m);
    // Vanishes on the clamped left edge.
    z.w = interpolate(m, [](Vec2 x) { return Vec2{2.0 * x.x, x.x}; });
    const Sym2 sigma = mat.elasticity(Sym2{2.0, 0.5, 0.0});
    const LoadData loads{[](Vec2) { return Vec2{}; },
                         [sigma](Vec2 x) {
                             if (x.x > 1.0 - 1e-12) return apply(sigma, {1, 0});
                             if (x.y > 1.0 - 1e-12) return apply(sigma, {0, 1});
                             return apply(sigma, {0, -1});
                         }};
    const IndicatorField ind = compute_indicators(m, z, mat, loads);
    EXPECT_EQ(ind.eta_global_sq, 0.0);
    for (double v : ind.eta_sq) EXPECT_EQ(v, 0.0);
}

TEST(Indicators, GlobalIsSumAndNonnegative) {
    const Mesh m = l_shape(2);
    std::mt19937_64 rng(3);
    const DiscreteState z = random_state(m, rng);
    const IndicatorField ind =
        compute_indicators(m, z, Material{}, LoadData{[](Vec2 x) { return Vec2{x.x, std::sin(x.y)}; },
                                                      [](Vec2 x) { return Vec2{x.y, 1.0}; }});
    double s = 0.0;
    for (double v : ind.eta_sq) {
        EXPECT_GE(v, 0.0);
        s += v;
    }
    EXPECT_EQ(ind.eta_global_sq, s);
}

TEST(Oscillations, ConstantDataHasNone) {
    const Mesh m = l_shape(2);
    const Oscillations osc = oscillations(m, LoadData::constant({1.0, -3.0}, {0.5, 0.5}));
    for (double v : osc.f_sq) EXPECT_EQ(v, 0.0);
    for (double v : osc.g_sq) EXPECT_EQ(v, 0.0);
}

TEST(Oscillations, LinearLoadMatchesDenseQuadrature) {
    const Mesh m = unit_right_triangle();
    const LoadData loads{[](Vec2 x) { return Vec2{x.x, 0.0}; }, [](Vec2) { return Vec2{}; }};
    const Oscillations osc = oscillations(m, loads);
    const Vec2 a = m.vertex(0), b = m.vertex(1), c = m.vertex(2);
    const double area = integrate(a, b, c, [](Vec2) { return 1.0; });
    const double mean = integrate(a, b, c, [](Vec2 x) { return x.x; }) / area;
    const double l2 = integrate(a, b, c, [mean](Vec2 x) { return (x.x - mean) * (x.x - mean); });
    EXPECT_NEAR(osc.f_sq[0], area * l2, 1e-10);
    EXPECT_NEAR(osc.f_sq[0], 1.0 / 72.0, 1e-10);
}

TEST(Oscillations, BoundedByIndicator) {
    const Mesh m = l_shape(3);
    std::mt19937_64 rng(4);
    const LoadData loads{[](Vec2 x) { return Vec2{std::exp(x.x), x.x * x.y}; }, [](Vec2) { return Vec2{}; }};
    for (int k = 0; k < 5; ++k) {
        const DiscreteState z = random_state(m, rng);
        const IndicatorField ind = compute_indicators(m, z, Material{}, loads);
        for (std::size_t t = 0; t < m.num_elements(); ++t) EXPECT_LE(ind.osc_f_sq[t], ind.eta_sq[t]);
    }
}

TEST(Oscillations, MonotoneUnderRefinementForLinearData) {
    const LoadData loads{[](Vec2 x) { return Vec2{x.x - 2.0 * x.y, 3.0 * x.y}; },
                         [](Vec2 x) { return Vec2{x.x + x.y, -x.x}; }};
    std::mt19937_64 rng(5);
    Mesh m = l_shape(1);
    Oscillations prev = oscillations(m, loads);
    for (int step = 0; step < 15; ++step) {
        const Mesh next = refine(m, random_subset(m.num_elements(), 0.3, rng));
        const Oscillations cur = oscillations(next, loads);
        EXPECT_LE(total(cur.f_sq), total(prev.f_sq) * (1.0 + 1e-12));
        EXPECT_LE(total(cur.g_sq), total(prev.g_sq) * (1.0 + 1e-12));
        m = next;
        prev = cur;
    }
}

TEST(Indicators, EstimatorDecaysUnderUniformRefinement) {
    const Material mat{1.0, 1.0, 1.0, 1.0, 1e12};
    const LoadData loads = LoadData::constant({0.0, -1.0}, {0.0, 0.0});
    double prev = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= 6; r += 2) {
        const Mesh m = square(r);
        const SolveResult sr = solve_vi(m, mat, loads);
        const double eta = compute_indicators(m, sr.state, mat, loads).eta_global_sq;
        EXPECT_LT(eta, prev);
        prev = eta;
    }
}
