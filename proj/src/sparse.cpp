#include "plastafem/sparse.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "plastafem/error.hpp"

namespace plastafem {

double inf_norm(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

CsrMatrix CsrMatrix::from_triplets(std::size_t n, std::vector<Triplet> triplets) {
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m;
    m.n = n;
    m.row_ptr.assign(n + 1, 0);
    for (std::size_t i = 0; i < triplets.size();) {
        const Triplet& t = triplets[i];
        if (t.row >= n || t.col >= n) throw ArgumentError("triplet index out of range");
        double sum = 0.0;
        std::size_t j = i;
        while (j < triplets.size() && triplets[j].row == t.row && triplets[j].col == t.col) sum += triplets[j++].value;
        m.col.push_back(t.col);
        m.val.push_back(sum);
        ++m.row_ptr[t.row + 1];
        i = j;
    }
    std::partial_sum(m.row_ptr.begin(), m.row_ptr.end(), m.row_ptr.begin());
    return m;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
        y[i] = s;
    }
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(n);
    multiply(x, y);
    return y;
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
    return d;
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
    auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
    auto it = std::lower_bound(first, last, j);
    return (it != last && *it == j) ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
}

CgResult conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<const double> x0,
                            double rel_tol, std::size_t max_iterations) {
    const std::size_t n = a.n;
    if (b.size() != n || (!x0.empty() && x0.size() != n)) throw ArgumentError("conjugate_gradient: size mismatch");
    if (max_iterations == 0) max_iterations = 20 * std::max<std::size_t>(n, 1);

    CgResult res;
    res.x.assign(n, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), res.x.begin());

    const double target = rel_tol * inf_norm(b);
    std::vector<double> r(n), z(n), p(n), q(n);
    a.multiply(res.x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    res.residual = inf_norm(r);
    if (res.residual <= target) return res;

    std::vector<double> inv_diag = a.diagonal();
    for (double& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);

    for (std::size_t it = 1; it <= max_iterations; ++it) {
        a.multiply(p, q);
        const double pq = std::inner_product(p.begin(), p.end(), q.begin(), 0.0);
        if (!(pq > 0.0)) throw SolverFailure("conjugate_gradient: matrix is not positive definite", res.residual);
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        res.iterations = it;
        res.residual = inf_norm(r);
        if (res.residual <= target) return res;
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolverFailure("conjugate_gradient: no convergence after " + std::to_string(max_iterations) +
                            " iterations, residual " + std::to_string(res.residual),
                        res.residual);
}

struct DirectSolver::Impl {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    std::size_t n = 0;
};

DirectSolver::DirectSolver(const CsrMatrix& a) : impl_(std::make_unique<Impl>()) {
    impl_->n = a.n;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(a.val.size());
    for (std::size_t i = 0; i < a.n; ++i) {
        for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            trips.emplace_back(static_cast<int>(i), static_cast<int>(a.col[k]), a.val[k]);
        }
    }
    Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(a.n), static_cast<Eigen::Index>(a.n));
    m.setFromTriplets(trips.begin(), trips.end());
    impl_->ldlt.compute(m);
    if (impl_->ldlt.info() != Eigen::Success) throw SolverFailure("sparse LDL^T factorization failed", 0.0);
    const auto d = impl_->ldlt.vectorD();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (!(d[i] > 0.0)) throw SolverFailure("stiffness matrix is not positive definite", 0.0);
    }
}

DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

std::vector<double> DirectSolver::solve(std::span<const double> b) const {
    if (b.size() != impl_->n) throw ArgumentError("DirectSolver::solve: size mismatch");
    Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd x = impl_->ldlt.solve(rhs);
    return {x.data(), x.data() + x.size()};
}

}  // namespace plastafem
