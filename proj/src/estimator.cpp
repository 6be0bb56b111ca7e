#include "plastafem/estimator.hpp"

#include <cmath>

#include "plastafem/error.hpp"
#include "plastafem/parallel.hpp"

namespace plastafem {

double IndicatorField::osc_sq() const {
    double s = 0.0;
    for (double v : osc_f_sq) s += v;
    for (double v : osc_g_sq) s += v;
    return s;
}

double edge_residual(const Mesh& mesh, std::size_t e, std::span<const Sym2> sigma, const LoadData& loads) {
    if (e >= mesh.num_edges()) throw ArgumentError("edge_residual: unknown edge " + std::to_string(e));
    const Edge& ed = mesh.edge(e);
    switch (ed.tag) {
        case EdgeTag::Dirichlet:
            return 0.0;
        case EdgeTag::Interior: {
            const Vec2 jump = apply(sigma[ed.elements[0]] - sigma[ed.elements[1]], mesh.edge_normal(e));
            return std::sqrt(mesh.edge_length(e)) * norm(jump);
        }
        case EdgeTag::Neumann: {
            const Vec2 nu = mesh.edge_normal(e);
            const Vec2 traction = apply(sigma[ed.elements[0]], nu);
            double s = 0.0;
            for (const Vec2& x : edge_quadrature_points(mesh, e)) {
                const Vec2 r = loads.g(x) - traction;
                s += dot(r, r);
            }
            return std::sqrt(0.5 * mesh.edge_length(e) * s);
        }
    }
    return 0.0;
}

double volume_term(const Mesh& mesh, std::size_t t, const LoadData& loads) {
    double s = 0.0;
    for (const Vec2& x : triangle_quadrature_points(mesh, t)) {
        const Vec2 f = loads.f(x);
        s += dot(f, f);
    }
    const double area = mesh.area(t);
    return area * (area / 3.0 * s);
}

double element_indicator(const Mesh& mesh, std::size_t t, std::span<const Sym2> sigma, const LoadData& loads) {
    if (t >= mesh.num_elements()) throw ArgumentError("element_indicator: unknown element");
    double jumps = 0.0;
    for (std::size_t e : mesh.element_edges(t)) {
        const double r = edge_residual(mesh, e, sigma, loads);
        jumps += r * r;
    }
    return volume_term(mesh, t, loads) + std::sqrt(mesh.area(t)) * jumps;
}

Oscillations oscillations(const Mesh& mesh, const LoadData& loads) {
    Oscillations osc;
    osc.f_sq.assign(mesh.num_elements(), 0.0);
    osc.g_sq.assign(mesh.num_edges(), 0.0);
    parallel_for(mesh.num_elements(), [&](std::size_t t) {
        const auto pts = triangle_quadrature_points(mesh, t);
        std::array<Vec2, 3> f;
        Vec2 mean;
        for (int j = 0; j < 3; ++j) {
            f[j] = loads.f(pts[j]);
            mean = mean + (1.0 / 3.0) * f[j];
        }
        double s = 0.0;
        for (const Vec2& v : f) s += dot(v - mean, v - mean);
        const double area = mesh.area(t);
        osc.f_sq[t] = area * (area / 3.0 * s);
    });
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        const Edge& ed = mesh.edge(e);
        if (ed.tag != EdgeTag::Neumann) continue;
        const auto pts = edge_quadrature_points(mesh, e);
        const Vec2 g0 = loads.g(pts[0]);
        const Vec2 g1 = loads.g(pts[1]);
        const Vec2 mean = 0.5 * (g0 + g1);
        const double s = dot(g0 - mean, g0 - mean) + dot(g1 - mean, g1 - mean);
        osc.g_sq[e] = std::sqrt(mesh.area(ed.elements[0])) * 0.5 * mesh.edge_length(e) * s;
    }
    return osc;
}

IndicatorField compute_indicators(const Mesh& mesh, const DiscreteState& z, const Material& m, const LoadData& loads) {
    const std::vector<Sym2> sigma = stresses(mesh, z, m);
    IndicatorField ind;
    ind.eta_sq.assign(mesh.num_elements(), 0.0);
    std::vector<double> r_sq(mesh.num_edges());
    parallel_for(mesh.num_edges(), [&](std::size_t e) {
        const double r = edge_residual(mesh, e, sigma, loads);
        r_sq[e] = r * r;
    });
    parallel_for(mesh.num_elements(), [&](std::size_t t) {
        double jumps = 0.0;
        for (std::size_t e : mesh.element_edges(t)) jumps += r_sq[e];
        ind.eta_sq[t] = volume_term(mesh, t, loads) + std::sqrt(mesh.area(t)) * jumps;
    });
    for (double v : ind.eta_sq) ind.eta_global_sq += v;
    Oscillations osc = oscillations(mesh, loads);
    ind.osc_f_sq = std::move(osc.f_sq);
    ind.osc_g_sq = std::move(osc.g_sq);
    return ind;
}

}  // namespace plastafem
