#include "plastafem/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "plastafem/error.hpp"

namespace plastafem {

namespace {

/// Orthonormal basis of the trace-free symmetric 2x2 tensors.
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
const Sym2 kDev1{kInvSqrt2, 0.0, -kInvSqrt2};
const Sym2 kDev2{0.0, kInvSqrt2, 0.0};

/// Projection of (r, b) onto the cone {0 <= r <= b}.
void project_cone(double& r, double& b) {
    if (r <= b && r >= 0.0) return;
    if (r < 0.0) {
        r = 0.0;
        b = std::max(b, 0.0);
        return;
    }
    const double t = 0.5 * (r + b);
    if (t <= 0.0) {
        r = b = 0.0;
    } else {
        r = b = t;
    }
}

}  // namespace

OracleResult oracle_minimize(const Mesh& mesh, const Material& m, const LoadData& loads,
                             const OracleOptions& options) {
    m.validate();
    const DofMap dofs(mesh);
    if (dofs.num_total_dofs() > options.max_dofs) {
        throw ArgumentError("oracle_minimize: " + std::to_string(dofs.num_total_dofs()) + " dofs exceed the cap of " +
                            std::to_string(options.max_dofs));
    }
    const std::size_t nw = dofs.num_displacement_dofs();
    const std::size_t ne = mesh.num_elements();
    const std::size_t n = nw + 3 * ne;
    auto y1 = [&](std::size_t t) { return nw + 3 * t; };

    // Hessian of 1/2 a(z, z) in the variables (w, sqrt2*q11, sqrt2*q12, beta).
    std::vector<Triplet> trips;
    {
        const CsrMatrix k = assemble_stiffness(mesh, dofs, m);
        for (std::size_t i = 0; i < k.n; ++i) {
            for (std::size_t c = k.row_ptr[i]; c < k.row_ptr[i + 1]; ++c) trips.push_back({i, k.col[c], k.val[c]});
        }
    }
    for (std::size_t t = 0; t < ne; ++t) {
        const double area = mesh.area(t);
        const auto g = shape_gradients(mesh, t);
        const auto& v = mesh.element(t).v;
        for (int i = 0; i < 3; ++i) {
            const std::array<Sym2, 2> eps{Sym2{g[i].x, 0.5 * g[i].y, 0.0}, Sym2{0.0, 0.5 * g[i].x, g[i].y}};
            for (int c = 0; c < 2; ++c) {
                const std::size_t d = dofs.dof(v[i], c);
                if (d == kNone) continue;
                const std::array<Sym2, 2> basis{kDev1, kDev2};
                for (int k = 0; k < 2; ++k) {
                    const double val = -area * ddot(m.elasticity(basis[k]), eps[c]);
                    trips.push_back({d, y1(t) + k, val});
                    trips.push_back({y1(t) + k, d, val});
                }
            }
        }
        for (int k = 0; k < 2; ++k) trips.push_back({y1(t) + k, y1(t) + k, area * (2.0 * m.mu + m.h_kin)});
        trips.push_back({y1(t) + 2, y1(t) + 2, area * m.h_iso});
    }
    const CsrMatrix h = CsrMatrix::from_triplets(n, std::move(trips));
    std::vector<double> c(n, 0.0);
    {
        const auto b = assemble_load(mesh, dofs, loads);
        std::copy(b.begin(), b.end(), c.begin());
    }

    // Diagonal metric: Jacobi on w, one common weight per element block so the
    // proximal map stays exact.
    std::vector<double> metric = h.diagonal();
    for (std::size_t t = 0; t < ne; ++t) {
        const double s = mesh.area(t) * std::max(2.0 * m.mu + m.h_kin, m.h_iso);
        for (int k = 0; k < 3; ++k) metric[y1(t) + k] = s;
    }

    // Lipschitz constant of the scaled gradient by power iteration.
    double lip = 0.0;
    {
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * static_cast<double>(i % 7);
        for (int it = 0; it < 500; ++it) {
            for (std::size_t i = 0; i < n; ++i) y[i] = x[i] / std::sqrt(metric[i]);
            std::vector<double> hy = h.multiply(y);
            for (std::size_t i = 0; i < n; ++i) hy[i] /= std::sqrt(metric[i]);
            const double nrm = std::sqrt(std::inner_product(hy.begin(), hy.end(), hy.begin(), 0.0));
            lip = nrm / std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
            for (std::size_t i = 0; i < n; ++i) x[i] = hy[i] / nrm;
        }
        lip *= 1.05;
    }
    const double step = 1.0 / lip;

    auto prox = [&](std::vector<double>& x) {
        for (std::size_t t = 0; t < ne; ++t) {
            double& a = x[y1(t)];
            double& b = x[y1(t) + 1];
            double& beta = x[y1(t) + 2];
            const double r0 = std::hypot(a, b);
            double r = r0 - step * mesh.area(t) * m.sigma_y / metric[y1(t)];
            project_cone(r, beta);
            if (r0 > 0.0) {
                a *= r / r0;
                b *= r / r0;
            } else {
                a = b = 0.0;
            }
        }
    };

    std::vector<double> x(n, 0.0), x_prev(n, 0.0), y(n, 0.0), grad(n);
    double momentum = 1.0;
    OracleResult res;
    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
        h.multiply(y, grad);
        for (std::size_t i = 0; i < n; ++i) grad[i] -= c[i];
        x_prev = x;
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] - step * grad[i] / metric[i];
        prox(x);

        double step_norm = 0.0, x_norm = 0.0, restart = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = x[i] - x_prev[i];
            step_norm += metric[i] * dx * dx;
            x_norm += metric[i] * x[i] * x[i];
            restart += (y[i] - x[i]) * dx * metric[i];
        }
        res.iterations = it;
        if (std::sqrt(step_norm) <= options.tol * (1.0 + std::sqrt(x_norm)) && it > 10) {
            res.converged = true;
            break;
        }
        if (restart > 0.0) {
            momentum = 1.0;
            y = x;
            continue;
        }
        const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        const double beta = (momentum - 1.0) / next;
        momentum = next;
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + beta * (x[i] - x_prev[i]);
    }

    res.state = DiscreteState::zero(mesh);
    res.state.w = expand_displacement(mesh, dofs, std::span<const double>(x.data(), nw));
    for (std::size_t t = 0; t < ne; ++t) {
        res.state.p[t] = {x[y1(t)] * kInvSqrt2, x[y1(t) + 1] * kInvSqrt2};
        res.state.alpha[t] = std::max(x[y1(t) + 2], res.state.p[t].norm());
    }
    return res;
}

}  // namespace plastafem
