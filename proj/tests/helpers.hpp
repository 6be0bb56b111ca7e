#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "plastafem/adaptivity.hpp"
#include "plastafem/fem.hpp"
#include "plastafem/mesh.hpp"
#include "plastafem/solver.hpp"

namespace plastafem::testing {

/// (0,0), (1,0), (0,1) with reference edge (0,0)-(1,0). That edge is
/// Dirichlet; the other two are Neumann unless `all_dirichlet`.
inline Mesh unit_right_triangle(bool all_dirichlet = false) {
    std::vector<Vec2> v{{0, 0}, {1, 0}, {0, 1}};
    BoundaryTags tags{{{0, 1}, EdgeTag::Dirichlet},
                      {{1, 2}, all_dirichlet ? EdgeTag::Dirichlet : EdgeTag::Neumann},
                      {{0, 2}, all_dirichlet ? EdgeTag::Dirichlet : EdgeTag::Neumann}};
    return Mesh::from_parts(std::move(v), {Element{{0, 1, 2}, 0}}, std::move(tags));
}

inline std::vector<Segment> left_edge() { return {{{0, 0}, {0, 1}}}; }

inline Mesh square(int refinements = 0) { return refine_uniform(unit_square_mesh(left_edge()), refinements); }

inline Mesh l_shape(int refinements = 0) {
    const std::vector<Segment> d{{{0, 0}, {1, 0}}, {{0, 0}, {0, -1}}};
    return refine_uniform(l_shape_mesh(d), refinements);
}

/// Nodal interpolant of a vector field, zero on Dirichlet vertices if asked.
template <class F>
std::vector<double> interpolate(const Mesh& mesh, F&& w, bool zero_on_dirichlet = false) {
    std::vector<double> out(2 * mesh.num_vertices());
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        if (zero_on_dirichlet && mesh.is_dirichlet_vertex(v)) continue;
        const Vec2 x = w(mesh.vertex(v));
        out[2 * v] = x.x;
        out[2 * v + 1] = x.y;
    }
    return out;
}

/// Random state with w = 0 on Gamma_D and beta = |q| + slack.
inline DiscreteState random_state(const Mesh& mesh, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    std::uniform_real_distribution<double> u(0.0, scale);
    DiscreteState z = DiscreteState::zero(mesh);
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        if (mesh.is_dirichlet_vertex(v)) continue;
        z.w[2 * v] = n(rng);
        z.w[2 * v + 1] = n(rng);
    }
    for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
        z.p[t] = Dev2{n(rng), n(rng)};
        z.alpha[t] = z.p[t].norm() + u(rng);
    }
    return z;
}

struct LocalMinimum {
    Dev2 q;
    double beta = 0.0;
    double value = 0.0;
};

/// Minimizer of the local energy density by grid search followed by
/// projected gradient descent on the cone |q| <= beta, in the coordinates
/// y = sqrt(2) (q11, q12) where |q| = |y|.
inline LocalMinimum brute_force_local(const Sym2& eps, const Material& m, int grid = 10, int iterations = 3000) {
    const double r2 = std::sqrt(2.0);
    auto phi = [&](double y1, double y2, double beta) {
        return local_energy_density(eps, Dev2{y1 / r2, y2 / r2}, beta, m);
    };
    const double range = norm(deviator(eps)) + 1e-3;
    double b1 = 0.0, b2 = 0.0, bb = 0.0, best = phi(0.0, 0.0, 0.0);
    for (int i = -grid; i <= grid; ++i) {
        for (int j = -grid; j <= grid; ++j) {
            const double y1 = range * i / grid, y2 = range * j / grid;
            for (int k = 0; k <= grid; ++k) {
                const double beta = std::hypot(y1, y2) + range * k / grid;
                const double v = phi(y1, y2, beta);
                if (v < best) {
                    best = v;
                    b1 = y1;
                    b2 = y2;
                    bb = beta;
                }
            }
        }
    }
    LocalMinimum out{Dev2{b1 / r2, b2 / r2}, bb, best};
    const double step = 1.0 / std::max(2.0 * m.mu + m.h_kin, m.h_iso);
    for (int it = 0; it < iterations; ++it) {
        const Dev2 q{b1 / r2, b2 / r2};
        const Sym2 sigma = m.elasticity(eps - q.full());
        const double g1 = (-(sigma.xx - sigma.yy) + 2.0 * m.h_kin * q.d11) / r2;
        const double g2 = (-2.0 * sigma.xy + 2.0 * m.h_kin * q.d12) / r2;
        const double gb = m.h_iso * bb + m.sigma_y;
        double y1 = b1 - step * g1, y2 = b2 - step * g2, beta = bb - step * gb;
        const double r = std::hypot(y1, y2);
        if (r <= -beta) {
            y1 = y2 = beta = 0.0;
        } else if (r > beta) {
            const double s = 0.5 * (r + beta);
            y1 *= s / r;
            y2 *= s / r;
            beta = s;
        }
        b1 = y1;
        b2 = y2;
        bb = std::max(beta, std::hypot(y1, y2));
        const double v = phi(b1, b2, bb);
        if (v < out.value) out = {Dev2{b1 / r2, b2 / r2}, bb, v};
    }
    return out;
}

inline std::vector<std::size_t> random_subset(std::size_t n, double fraction, std::mt19937_64& rng) {
    std::bernoulli_distribution coin(fraction);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (coin(rng)) out.push_back(i);
    }
    if (out.empty() && n > 0) out.push_back(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    return out;
}

/// Exhaustive check that no subset smaller than `chosen` reaches the bulk.
inline bool no_smaller_admissible_set(const std::vector<double>& eta_sq, double theta, std::size_t chosen) {
    const std::size_t n = eta_sq.size();
    double total = 0.0;
    for (double v : eta_sq) total += v;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double s = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                s += eta_sq[i];
                ++count;
            }
        }
        if (count < chosen && theta * total <= s) return false;
    }
    return true;
}

}  // namespace plastafem::testing
