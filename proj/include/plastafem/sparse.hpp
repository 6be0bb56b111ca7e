#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace plastafem {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Square matrix in compressed sparse row form.
struct CsrMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col;
    std::vector<double> val;

    /// Duplicate entries are summed in input order, so equal input gives
    /// bit-identical output.
    static CsrMatrix from_triplets(std::size_t n, std::vector<Triplet> triplets);

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> multiply(std::span<const double> x) const;
    std::vector<double> diagonal() const;
    double at(std::size_t i, std::size_t j) const;
};

struct CgResult {
    std::vector<double> x;
    std::size_t iterations = 0;
    /// Final residual in the infinity norm.
    double residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients. Stops once the residual
/// infinity norm is <= rel_tol * ||b||_inf. Throws SolverFailure after
/// max_iterations (0 means 20 * n).
CgResult conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::span<const double> x0,
                            double rel_tol, std::size_t max_iterations = 0);

/// Sparse LDL^T factorization, reusable across right-hand sides.
class DirectSolver {
public:
    explicit DirectSolver(const CsrMatrix& a);
    ~DirectSolver();
    DirectSolver(DirectSolver&&) noexcept;
    DirectSolver& operator=(DirectSolver&&) noexcept;

    std::vector<double> solve(std::span<const double> b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

double inf_norm(std::span<const double> x);

}  // namespace plastafem
