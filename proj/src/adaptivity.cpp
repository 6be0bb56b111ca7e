#include "plastafem/adaptivity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace plastafem {

std::vector<std::size_t> dorfler_mark(std::span<const double> eta_sq, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw ArgumentError("dorfler_mark: theta must lie in (0, 1]");
    std::vector<std::size_t> order(eta_sq.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (double v : eta_sq) {
        if (!(v >= 0.0)) throw ArgumentError("dorfler_mark: indicators must be finite and non-negative");
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return eta_sq[a] > eta_sq[b]; });

    // Total in the same order as the prefix sums.
    double total = 0.0;
    for (std::size_t i : order) total += eta_sq[i];
    const double goal = theta * total;

    std::vector<std::size_t> marked;
    if (theta == 1.0) {
        for (std::size_t i = 0; i < eta_sq.size(); ++i) {
            if (eta_sq[i] > 0.0) marked.push_back(i);
        }
        return marked;
    }
    double acc = 0.0;
    for (std::size_t i : order) {
        if (acc >= goal) break;
        acc += eta_sq[i];
        marked.push_back(i);
    }
    std::sort(marked.begin(), marked.end());
    return marked;
}

AdaptRun adapt_loop(const Problem& problem, const AdaptOptions& options) {
    using Clock = std::chrono::steady_clock;
    if (!(options.theta > 0.0 && options.theta <= 1.0)) throw ArgumentError("adapt_loop: theta must lie in (0, 1]");
    AdaptRun run;
    Mesh mesh = problem.mesh;
    for (std::size_t level = 0;; ++level) {
        const auto start = Clock::now();
        Level lv{mesh, {}, {}, {}, 0.0, 0};
        try {
            SolveResult sr = solve_vi(mesh, problem.material, problem.loads, options.solver);
            lv.state = std::move(sr.state);
            lv.energy = sr.energies.back();
            lv.solver_iterations = sr.iterations;
        } catch (const Error& e) {
            throw AdaptFailure(std::string("level ") + std::to_string(level) + ": " + e.what(), run.trace);
        }
        lv.indicators = compute_indicators(mesh, lv.state, problem.material, problem.loads);

        const double eta = std::sqrt(lv.indicators.eta_global_sq);
        const bool stop = level >= options.stop.max_levels || eta <= options.stop.eta_tol;
        if (!stop) lv.marked = dorfler_mark(lv.indicators.eta_sq, options.theta);

        LevelRecord rec;
        rec.level = level;
        rec.n_elements = mesh.num_elements();
        rec.n_dofs = DofMap(mesh).num_total_dofs();
        rec.eta_sq = lv.indicators.eta_global_sq;
        rec.energy = lv.energy;
        rec.n_marked = lv.marked.size();
        if (options.record_wall_time) {
            rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        }
        run.trace.push_back(rec);
        const bool nothing_marked = lv.marked.empty();
        Mesh next = nothing_marked ? mesh : refine(mesh, lv.marked);
        run.levels.push_back(std::move(lv));
        if (stop || nothing_marked) break;
        if (DofMap(next).num_total_dofs() > options.stop.max_dofs) break;
        mesh = std::move(next);
    }
    return run;
}

}  // namespace plastafem
