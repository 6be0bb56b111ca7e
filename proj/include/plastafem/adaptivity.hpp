#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "plastafem/error.hpp"
#include "plastafem/estimator.hpp"
#include "plastafem/fem.hpp"
#include "plastafem/mesh.hpp"
#include "plastafem/solver.hpp"

namespace plastafem {

struct Problem {
    Mesh mesh;
    Material material;
    LoadData loads;
};

/// Smallest set M with theta * sum(eta_sq) <= sum_{T in M} eta_sq[T]: the
/// shortest prefix of the elements sorted by eta_sq descending (ties by id).
/// Returned ids are sorted ascending.
std::vector<std::size_t> dorfler_mark(std::span<const double> eta_sq, double theta);

/// One row of trace.csv.
struct LevelRecord {
    std::size_t level = 0;
    std::size_t n_elements = 0;
    std::size_t n_dofs = 0;
    double eta_sq = 0.0;
    double energy = 0.0;
    std::size_t n_marked = 0;
    double wall_ms = 0.0;

    friend bool operator==(const LevelRecord&, const LevelRecord&) = default;
};

using AdaptTrace = std::vector<LevelRecord>;

struct Level {
    Mesh mesh;
    DiscreteState state;
    IndicatorField indicators;
    std::vector<std::size_t> marked;
    double energy = 0.0;
    std::size_t solver_iterations = 0;
};

struct AdaptRun {
    std::vector<Level> levels;
    AdaptTrace trace;
};

/// Disjunctive stop rules checked after each Estimate step. A refined mesh
/// whose dof count would exceed max_dofs is not solved.
struct StopCriteria {
    std::size_t max_dofs = 200'000;
    double eta_tol = 0.0;
    std::size_t max_levels = 30;
};

struct AdaptOptions {
    double theta = 0.5;
    StopCriteria stop;
    SolverOptions solver;
    /// When false, wall_ms is written as 0 so traces are byte-reproducible.
    bool record_wall_time = false;
};

/// Solver failure inside the loop, carrying the levels finished so far.
class AdaptFailure : public Error {
public:
    AdaptFailure(const std::string& what, AdaptTrace trace) : Error(what), trace_(std::move(trace)) {}
    const AdaptTrace& trace() const { return trace_; }

private:
    AdaptTrace trace_;
};

/// Solve -> Estimate -> Mark -> Refine until a stop rule fires.
AdaptRun adapt_loop(const Problem& problem, const AdaptOptions& options);

}  // namespace plastafem
