#include "plastafem/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "plastafem/error.hpp"

namespace plastafem {

void Material::validate() const {
    std::string bad;
    if (!(mu > 0.0)) bad += " mu";
    if (!(lambda >= 0.0)) bad += " lambda";
    if (!(h_kin > 0.0)) bad += " h_kin";
    if (!(h_iso > 0.0)) bad += " h_iso";
    if (!(sigma_y > 0.0)) bad += " sigma_y";
    if (!bad.empty()) throw ArgumentError("material parameters out of range:" + bad);
}

LoadData LoadData::zero() { return constant({0.0, 0.0}, {0.0, 0.0}); }

LoadData LoadData::constant(Vec2 f, Vec2 g) {
    return {[f](Vec2) { return f; }, [g](Vec2) { return g; }};
}

DofMap::DofMap(const Mesh& mesh) : free_index_(mesh.num_vertices(), kNone), num_elements_(mesh.num_elements()) {
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        if (!mesh.is_dirichlet_vertex(v)) {
            free_index_[v] = free_vertices_.size();
            free_vertices_.push_back(v);
        }
    }
}

DiscreteState DiscreteState::zero(const Mesh& mesh) {
    return {std::vector<double>(2 * mesh.num_vertices(), 0.0), std::vector<Dev2>(mesh.num_elements()),
            std::vector<double>(mesh.num_elements(), 0.0)};
}

void DiscreteState::check_matches(const Mesh& mesh) const {
    if (w.size() != 2 * mesh.num_vertices() || p.size() != mesh.num_elements() ||
        alpha.size() != mesh.num_elements()) {
        throw ArgumentError("discrete state does not match the mesh");
    }
}

std::array<Vec2, 3> shape_gradients(const Mesh& mesh, std::size_t t) {
    const auto& v = mesh.element(t).v;
    const Vec2 x0 = mesh.vertex(v[0]);
    const Vec2 x1 = mesh.vertex(v[1]);
    const Vec2 x2 = mesh.vertex(v[2]);
    const double two_area = 2.0 * mesh.area(t);
    if (!(two_area > 0.0)) throw InvalidElement("degenerate element");
    return {{{(x1.y - x2.y) / two_area, (x2.x - x1.x) / two_area},
             {(x2.y - x0.y) / two_area, (x0.x - x2.x) / two_area},
             {(x0.y - x1.y) / two_area, (x1.x - x0.x) / two_area}}};
}

Sym2 strain(const Mesh& mesh, std::span<const double> w, std::size_t t) {
    const auto grads = shape_gradients(mesh, t);
    const auto& v = mesh.element(t).v;
    Sym2 e;
    for (int i = 0; i < 3; ++i) {
        const double ux = w[2 * v[i]];
        const double uy = w[2 * v[i] + 1];
        e.xx += ux * grads[i].x;
        e.yy += uy * grads[i].y;
        e.xy += 0.5 * (ux * grads[i].y + uy * grads[i].x);
    }
    return e;
}

Sym2 stress(const Mesh& mesh, std::span<const double> w, const Dev2& p, std::size_t t, const Material& m) {
    return m.elasticity(strain(mesh, w, t) - p.full());
}

std::vector<Sym2> stresses(const Mesh& mesh, const DiscreteState& z, const Material& m) {
    z.check_matches(mesh);
    std::vector<Sym2> s(mesh.num_elements());
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) s[t] = stress(mesh, z.w, z.p[t], t, m);
    return s;
}

double bilinear_a(const Mesh& mesh, const Material& m, const DiscreteState& y, const DiscreteState& z) {
    y.check_matches(mesh);
    z.check_matches(mesh);
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const Sym2 sig = stress(mesh, y.w, y.p[t], t, m);
        const Sym2 eps_z = strain(mesh, z.w, t);
        const double dens = ddot(sig, eps_z - z.p[t].full()) + m.h_kin * ddot(y.p[t].full(), z.p[t].full()) +
                            m.h_iso * y.alpha[t] * z.alpha[t];
        sum += mesh.area(t) * dens;
    }
    return sum;
}

std::array<Vec2, 3> triangle_quadrature_points(const Mesh& mesh, std::size_t t) {
    const auto& v = mesh.element(t).v;
    const Vec2 x0 = mesh.vertex(v[0]);
    const Vec2 x1 = mesh.vertex(v[1]);
    const Vec2 x2 = mesh.vertex(v[2]);
    return {0.5 * (x0 + x1), 0.5 * (x1 + x2), 0.5 * (x2 + x0)};
}

std::array<Vec2, 2> edge_quadrature_points(const Mesh& mesh, std::size_t e) {
    const Vec2 p = mesh.vertex(mesh.edge(e).v.first);
    const Vec2 q = mesh.vertex(mesh.edge(e).v.second);
    const double s = 0.5 / std::sqrt(3.0);
    const Vec2 mid = 0.5 * (p + q);
    return {mid - s * (q - p), mid + s * (q - p)};
}

namespace {

/// Value of a P1 field at the midpoint of the element edge (v[j], v[j+1]).
Vec2 midpoint_value(const DiscreteState& z, const Element& el, int j) {
    return 0.5 * (z.displacement(el.v[j]) + z.displacement(el.v[(j + 1) % 3]));
}

}  // namespace

double linear_b(const Mesh& mesh, const LoadData& loads, const DiscreteState& z) {
    z.check_matches(mesh);
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const auto pts = triangle_quadrature_points(mesh, t);
        const Element& el = mesh.element(t);
        double s = 0.0;
        for (int j = 0; j < 3; ++j) s += dot(loads.f(pts[j]), midpoint_value(z, el, j));
        sum += mesh.area(t) / 3.0 * s;
    }
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        const Edge& ed = mesh.edge(e);
        if (ed.tag != EdgeTag::Neumann) continue;
        const auto pts = edge_quadrature_points(mesh, e);
        const Vec2 p = mesh.vertex(ed.v.first);
        const double len = mesh.edge_length(e);
        const Vec2 wa = z.displacement(ed.v.first);
        const Vec2 wb = z.displacement(ed.v.second);
        double s = 0.0;
        for (const Vec2& x : pts) {
            const double lam = norm(x - p) / len;
            s += dot(loads.g(x), (1.0 - lam) * wa + lam * wb);
        }
        sum += 0.5 * len * s;
    }
    return sum;
}

double psi(const Mesh& mesh, const Material& m, const DiscreteState& z) {
    z.check_matches(mesh);
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const double q = z.p[t].norm();
        if (q > z.alpha[t] * (1.0 + kFeasibilityTol) + std::numeric_limits<double>::min()) {
            return std::numeric_limits<double>::infinity();
        }
        sum += mesh.area(t) * m.sigma_y * q;
    }
    return sum;
}

double energy(const Mesh& mesh, const Material& m, const LoadData& loads, const DiscreteState& z) {
    return 0.5 * bilinear_a(mesh, m, z, z) - linear_b(mesh, loads, z) + psi(mesh, m, z);
}

double error_measure(const Mesh& mesh, const DiscreteState& z, const Mesh& mesh_hat, const DiscreteState& z_hat,
                     const Material& m) {
    const auto s = stresses(mesh, z, m);
    const auto s_hat = stresses(mesh_hat, z_hat, m);
    std::vector<double> terms;
    for (const OverlayCell& c : overlay_cells(mesh, mesh_hat)) {
        const Sym2 d = s[c.a] - s_hat[c.b];
        terms.push_back(c.area * ddot(d, d));
    }
    // Summing in sorted order makes the result exactly symmetric in its arguments.
    std::sort(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += t;
    return std::sqrt(sum);
}

double error_measure_on(const Mesh& mesh, const DiscreteState& z, const Mesh& mesh_hat, const DiscreteState& z_hat,
                        const Material& m, std::span<const std::size_t> region) {
    std::vector<char> in(mesh.num_elements(), 0);
    for (std::size_t t : region) {
        if (t >= mesh.num_elements()) throw ArgumentError("region element out of range");
        in[t] = 1;
    }
    const auto s = stresses(mesh, z, m);
    const auto s_hat = stresses(mesh_hat, z_hat, m);
    double sum = 0.0;
    for (const OverlayCell& c : overlay_cells(mesh, mesh_hat)) {
        if (!in[c.a]) continue;
        const Sym2 d = s[c.a] - s_hat[c.b];
        sum += c.area * ddot(d, d);
    }
    return std::sqrt(sum);
}

CsrMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs, const Material& m) {
    std::vector<Triplet> trips;
    trips.reserve(36 * mesh.num_elements());
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const auto g = shape_gradients(mesh, t);
        const auto& v = mesh.element(t).v;
        const double area = mesh.area(t);
        // eps(phi_i e_c) for the six local basis functions.
        std::array<Sym2, 6> eps;
        std::array<std::size_t, 6> idx;
        for (int i = 0; i < 3; ++i) {
            eps[2 * i] = {g[i].x, 0.5 * g[i].y, 0.0};
            eps[2 * i + 1] = {0.0, 0.5 * g[i].x, g[i].y};
            idx[2 * i] = dofs.dof(v[i], 0);
            idx[2 * i + 1] = dofs.dof(v[i], 1);
        }
        for (int r = 0; r < 6; ++r) {
            if (idx[r] == kNone) continue;
            const Sym2 sig = m.elasticity(eps[r]);
            for (int c = 0; c < 6; ++c) {
                if (idx[c] == kNone) continue;
                trips.push_back({idx[r], idx[c], area * ddot(sig, eps[c])});
            }
        }
    }
    return CsrMatrix::from_triplets(dofs.num_displacement_dofs(), std::move(trips));
}

std::vector<double> assemble_load(const Mesh& mesh, const DofMap& dofs, const LoadData& loads) {
    std::vector<double> b(dofs.num_displacement_dofs(), 0.0);
    auto add = [&](std::size_t vertex, Vec2 val) {
        for (int c = 0; c < 2; ++c) {
            const std::size_t d = dofs.dof(vertex, c);
            if (d != kNone) b[d] += c == 0 ? val.x : val.y;
        }
    };
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const auto pts = triangle_quadrature_points(mesh, t);
        const auto& v = mesh.element(t).v;
        const double wq = mesh.area(t) / 3.0;
        for (int j = 0; j < 3; ++j) {
            // The hat functions of the two end points are 1/2 at this midpoint.
            const Vec2 f = loads.f(pts[j]);
            add(v[j], 0.5 * wq * f);
            add(v[(j + 1) % 3], 0.5 * wq * f);
        }
    }
    for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
        const Edge& ed = mesh.edge(e);
        if (ed.tag != EdgeTag::Neumann) continue;
        const auto pts = edge_quadrature_points(mesh, e);
        const Vec2 p = mesh.vertex(ed.v.first);
        const double len = mesh.edge_length(e);
        for (const Vec2& x : pts) {
            const double lam = norm(x - p) / len;
            const Vec2 g = loads.g(x);
            add(ed.v.first, 0.5 * len * (1.0 - lam) * g);
            add(ed.v.second, 0.5 * len * lam * g);
        }
    }
    return b;
}

std::vector<double> assemble_stress_load(const Mesh& mesh, const DofMap& dofs, std::span<const Sym2> tau) {
    if (tau.size() != mesh.num_elements()) throw ArgumentError("assemble_stress_load: one tensor per element expected");
    std::vector<double> b(dofs.num_displacement_dofs(), 0.0);
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        const auto g = shape_gradients(mesh, t);
        const auto& v = mesh.element(t).v;
        const double area = mesh.area(t);
        const Sym2& s = tau[t];
        for (int i = 0; i < 3; ++i) {
            // tau : eps(phi_i e_x) = tau_xx g_x + tau_xy g_y, similarly for e_y.
            const std::size_t dx = dofs.dof(v[i], 0);
            const std::size_t dy = dofs.dof(v[i], 1);
            if (dx != kNone) b[dx] += area * (s.xx * g[i].x + s.xy * g[i].y);
            if (dy != kNone) b[dy] += area * (s.xy * g[i].x + s.yy * g[i].y);
        }
    }
    return b;
}

SparseSystem assemble_elastic_system(const Mesh& mesh, const DofMap& dofs, const Material& m, const LoadData& loads,
                                     std::span<const Dev2> p) {
    if (p.size() != mesh.num_elements()) throw ArgumentError("plastic field does not match the mesh");
    SparseSystem sys{assemble_stiffness(mesh, dofs, m), assemble_load(mesh, dofs, loads)};
    std::vector<Sym2> cp(p.size());
    for (std::size_t t = 0; t < p.size(); ++t) cp[t] = m.elasticity(p[t].full());
    const auto extra = assemble_stress_load(mesh, dofs, cp);
    for (std::size_t i = 0; i < extra.size(); ++i) sys.rhs[i] += extra[i];
    return sys;
}

std::vector<double> expand_displacement(const Mesh& mesh, const DofMap& dofs, std::span<const double> free) {
    if (free.size() != dofs.num_displacement_dofs()) throw ArgumentError("expand_displacement: size mismatch");
    std::vector<double> w(2 * mesh.num_vertices(), 0.0);
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        for (int c = 0; c < 2; ++c) {
            const std::size_t d = dofs.dof(v, c);
            if (d != kNone) w[2 * v + static_cast<std::size_t>(c)] = free[d];
        }
    }
    return w;
}

std::vector<double> restrict_displacement(const Mesh& mesh, const DofMap& dofs, std::span<const double> full) {
    if (full.size() != 2 * mesh.num_vertices()) throw ArgumentError("restrict_displacement: size mismatch");
    std::vector<double> out(dofs.num_displacement_dofs());
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        for (int c = 0; c < 2; ++c) {
            const std::size_t d = dofs.dof(v, c);
            if (d != kNone) out[d] = full[2 * v + static_cast<std::size_t>(c)];
        }
    }
    return out;
}

}  // namespace plastafem
