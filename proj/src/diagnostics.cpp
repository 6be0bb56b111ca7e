#include "plastafem/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace plastafem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_levels(const AdaptRun& run, std::size_t n, const char* what) {
    if (run.levels.size() < n) {
        throw InsufficientData(std::string(what) + ": needs at least " + std::to_string(n) + " levels");
    }
}

double sum_over(std::span<const double> values, std::span<const std::size_t> ids) {
    double s = 0.0;
    for (std::size_t i : ids) s += values[i];
    return s;
}

/// Slope of the least-squares line through (x, y).
double ls_slope(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

double distance(const Level& a, const Level& b, const Material& m) {
    return error_measure(a.mesh, a.state, b.mesh, b.state, m);
}

}  // namespace

double spread(std::span<const double> values) {
    if (values.empty()) return 1.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*hi == 0.0) return 1.0;
    if (*lo <= 0.0) return kInf;
    return *hi / *lo;
}

Reference compute_reference(const AdaptRun& run, const Problem& problem, int uniform_refinements,
                            const SolverOptions& solver) {
    require_levels(run, 1, "compute_reference");
    Mesh mesh = run.levels.front().mesh;
    for (std::size_t l = 1; l < run.levels.size(); ++l) mesh = overlay(mesh, run.levels[l].mesh);
    mesh = refine_uniform(mesh, uniform_refinements);
    SolveResult sr = solve_vi(mesh, problem.material, problem.loads, solver);
    const IndicatorField ind = compute_indicators(mesh, sr.state, problem.material, problem.loads);
    return {std::move(mesh), std::move(sr.state), sr.energies.back(), ind.eta_global_sq, uniform_refinements};
}

StabilityCheck check_A1(const AdaptRun& run, const Problem& problem, std::uint64_t seed, std::size_t subsets) {
    require_levels(run, 2, "check_A1");
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    StabilityCheck out;
    for (std::size_t l = 0; l + 1 < run.levels.size(); ++l) {
        const Level& a = run.levels[l];
        const Level& b = run.levels[l + 1];
        const std::vector<std::size_t> common = common_elements(a.mesh, b.mesh);
        std::vector<std::size_t> common_b(common.size());
        for (std::size_t i = 0; i < common.size(); ++i) common_b[i] = b.mesh.find_element(a.mesh.key(common[i]));

        const double d = distance(a, b, problem.material);
        double ratio = 0.0;
        if (d < kDenominatorGuard) {
            ++out.guarded;
        } else {
            auto eval = [&](const std::vector<char>& pick) {
                double sa = 0.0, sb = 0.0;
                for (std::size_t i = 0; i < common.size(); ++i) {
                    if (!pick[i]) continue;
                    sa += a.indicators.eta_sq[common[i]];
                    sb += b.indicators.eta_sq[common_b[i]];
                }
                return std::abs(std::sqrt(sb) - std::sqrt(sa)) / d;
            };
            std::vector<char> pick(common.size(), 1);
            ratio = eval(pick);
            for (std::size_t s = 0; s < subsets; ++s) {
                for (auto& p : pick) p = coin(rng) ? 1 : 0;
                ratio = std::max(ratio, eval(pick));
            }
        }
        out.per_pair.push_back(ratio);
        out.c1_est = std::max(out.c1_est, ratio);
        out.running.push_back(out.c1_est);
    }
    return out;
}

ReductionFit fit_reduction(std::span<const ReductionSample> samples) {
    auto feasible = [&](double rho, double c) {
        for (const auto& s : samples) {
            const double rhs = rho * s.old_refined + c * s.dist_sq;
            if (s.new_refined > rhs + 1e-12 * std::max(s.new_refined, rhs)) return false;
        }
        return true;
    };
    double obj_x = 0.0, obj_y = 0.0;
    for (const auto& s : samples) {
        obj_x += s.old_refined;
        obj_y += s.dist_sq;
    }
    std::vector<ReductionFit> candidates{{0.0, 0.0}};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& si = samples[i];
        if (si.old_refined > 0.0) candidates.push_back({si.new_refined / si.old_refined, 0.0});
        if (si.dist_sq > 0.0) candidates.push_back({0.0, si.new_refined / si.dist_sq});
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            const auto& sj = samples[j];
            const double det = si.old_refined * sj.dist_sq - sj.old_refined * si.dist_sq;
            if (det == 0.0) continue;
            const double rho = (si.new_refined * sj.dist_sq - sj.new_refined * si.dist_sq) / det;
            const double c = (si.old_refined * sj.new_refined - sj.old_refined * si.new_refined) / det;
            if (rho >= 0.0 && c >= 0.0) candidates.push_back({rho, c});
        }
    }
    ReductionFit best{kInf, kInf};
    double best_obj = kInf;
    for (const auto& cand : candidates) {
        if (!feasible(cand.rho2, cand.c2)) continue;
        const double obj = cand.rho2 * obj_x + cand.c2 * obj_y;
        if (obj < best_obj || (obj == best_obj && cand.rho2 < best.rho2)) {
            best_obj = obj;
            best = cand;
        }
    }
    return best;
}

ReductionCheck check_A2(const AdaptRun& run, const Problem& problem) {
    require_levels(run, 2, "check_A2");
    ReductionCheck out;
    for (std::size_t l = 0; l + 1 < run.levels.size(); ++l) {
        const Level& a = run.levels[l];
        const Level& b = run.levels[l + 1];
        ReductionSample s;
        s.old_refined = sum_over(a.indicators.eta_sq, elements_not_in(a.mesh, b.mesh));
        s.new_refined = sum_over(b.indicators.eta_sq, elements_not_in(b.mesh, a.mesh));
        const double d = distance(a, b, problem.material);
        s.dist_sq = d * d;
        out.samples.push_back(s);
        const ReductionFit fit = fit_reduction(out.samples);
        out.running_rho2.push_back(fit.rho2);
        out.running_c2.push_back(fit.c2);
    }
    out.rho2_est = out.running_rho2.back();
    out.c2_est = out.running_c2.back();
    out.passed = out.rho2_est < 1.0;
    return out;
}

QuasiOrthogonalityCheck check_A3(const AdaptRun& run, const Problem& problem, const Reference& reference,
                                 std::vector<double> eps3) {
    require_levels(run, 2, "check_A3");
    const std::size_t n = run.levels.size();
    std::vector<double> d_next(n - 1), d_ref(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double d = distance(run.levels[k], run.levels[k + 1], problem.material);
        d_next[k] = d * d;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double d = error_measure(reference.mesh, reference.state, run.levels[k].mesh, run.levels[k].state,
                                       problem.material);
        d_ref[k] = d * d;
    }
    QuasiOrthogonalityCheck out;
    out.eps3 = std::move(eps3);
    for (double eps : out.eps3) {
        std::vector<std::vector<double>> rows;
        double max_entry = -kInf;
        bool finite = true;
        for (std::size_t l = 0; l + 1 < n; ++l) {
            const double eta_sq = run.levels[l].indicators.eta_global_sq;
            std::vector<double> row;
            double acc = 0.0;
            for (std::size_t k = l; k + 1 < n; ++k) {
                acc += d_next[k] - eps * d_ref[k];
                const double v = eta_sq > 0.0 ? acc / eta_sq : (acc <= 0.0 ? 0.0 : kInf);
                finite &= std::isfinite(v);
                max_entry = std::max(max_entry, v);
                row.push_back(v);
            }
            rows.push_back(std::move(row));
        }
        out.table.push_back(std::move(rows));
        out.max_entry.push_back(max_entry);
        out.bounded.push_back(finite && max_entry <= kQuasiOrthogonalityBound);
    }
    return out;
}

double discrete_reliability_ratio(const Mesh& coarse, const DiscreteState& u, const IndicatorField& ind,
                                  const Mesh& fine, const DiscreteState& u_fine, const Material& m) {
    const std::vector<std::size_t> refined = elements_not_in(coarse, fine);
    if (refined.empty()) return -1.0;
    const double denom = sum_over(ind.eta_sq, refined);
    if (denom < kDenominatorGuard) return -1.0;
    const double d = error_measure(fine, u_fine, coarse, u, m);
    return d * d / denom;
}

DiscreteReliabilityCheck check_A4(const AdaptRun& run, const Problem& problem) {
    require_levels(run, 2, "check_A4");
    DiscreteReliabilityCheck out;
    for (std::size_t l = 0; l + 1 < run.levels.size(); ++l) {
        const Level& a = run.levels[l];
        const Level& b = run.levels[l + 1];
        double r = discrete_reliability_ratio(a.mesh, a.state, a.indicators, b.mesh, b.state, problem.material);
        if (r < 0.0) {
            ++out.skipped;
            r = 0.0;
        }
        out.per_pair.push_back(r);
        out.c4_est = std::max(out.c4_est, r);
        out.running.push_back(out.c4_est);
    }
    return out;
}

RateFit fit_rates(const AdaptTrace& trace, std::size_t first_level) {
    if (trace.size() < 6 || trace.size() < first_level + 2) {
        throw InsufficientData("fit_rates: needs at least 6 levels");
    }
    const double n0 = static_cast<double>(trace.front().n_elements);
    std::vector<double> lvl, log_eta_sq, log_n, log_eta;
    for (std::size_t i = first_level; i < trace.size(); ++i) {
        const LevelRecord& r = trace[i];
        if (!(r.eta_sq > 0.0)) continue;
        lvl.push_back(static_cast<double>(r.level));
        log_eta_sq.push_back(std::log(r.eta_sq));
        log_n.push_back(std::log(static_cast<double>(r.n_elements) - n0 + 1.0));
        log_eta.push_back(0.5 * std::log(r.eta_sq));
    }
    RateFit fit;
    if (lvl.size() < 2) return fit;
    fit.rho_linear = std::exp(ls_slope(lvl, log_eta_sq));
    fit.rate_s = -ls_slope(log_n, log_eta);

    const double e_min = trace.back().energy;
    std::vector<double> xs, ys;
    for (std::size_t i = first_level; i + 1 < trace.size(); ++i) {
        const double gap = trace[i].energy - e_min;
        if (gap > 0.0) {
            xs.push_back(std::log(static_cast<double>(trace[i].n_elements) - n0 + 1.0));
            ys.push_back(std::log(gap));
        }
    }
    if (xs.size() >= 2) fit.energy_rate = -ls_slope(xs, ys);
    return fit;
}

std::size_t asymptotic_start(const AdaptTrace& trace, double factor) {
    if (trace.size() < 3) return 0;
    const double n0 = static_cast<double>(trace.front().n_elements);
    std::size_t l = 0;
    while (l < trace.size() && static_cast<double>(trace[l].n_elements) - n0 < factor * n0) ++l;
    return std::min(l, trace.size() - 3);
}

double closure_constant(const AdaptTrace& trace) {
    double c = 0.0;
    std::size_t marked = 0;
    for (std::size_t l = 1; l < trace.size(); ++l) {
        marked += trace[l - 1].n_marked;
        if (marked == 0) continue;
        const double grown = static_cast<double>(trace[l].n_elements) - static_cast<double>(trace.front().n_elements);
        c = std::max(c, grown / static_cast<double>(marked));
    }
    return c;
}

AxiomReport build_axiom_report(const AdaptRun& run, const Problem& problem, const Reference& reference,
                               std::uint64_t seed) {
    require_levels(run, 2, "build_axiom_report");
    AxiomReport rep;
    rep.trace = run.trace;
    rep.reference_eta_sq = reference.eta_sq;
    rep.reference_energy = reference.energy;
    rep.a1 = check_A1(run, problem, seed);
    rep.a2 = check_A2(run, problem);
    rep.a3 = check_A3(run, problem, reference);
    rep.a4 = check_A4(run, problem);
    if (run.trace.size() >= 6) {
        rep.rates = fit_rates(run.trace);
        rep.asymptotic_from = asymptotic_start(run.trace);
        rep.rates_asymptotic = fit_rates(run.trace, rep.asymptotic_from);
    }
    rep.c_mesh = closure_constant(run.trace);

    const Material& m = problem.material;
    for (std::size_t l = 0; l < run.levels.size(); ++l) {
        const Level& lv = run.levels[l];
        LevelDiagnostics d;
        d.level = l;
        d.d_ref = error_measure(reference.mesh, reference.state, lv.mesh, lv.state, m);
        if (l + 1 < run.levels.size()) d.d_next = distance(lv, run.levels[l + 1], m);
        d.osc_sq = lv.indicators.osc_sq();
        const double eta_sq = lv.indicators.eta_global_sq;
        d.reliability = eta_sq > 0.0 ? d.d_ref / std::sqrt(eta_sq) : 0.0;
        const double denom = d.d_ref * d.d_ref + d.osc_sq;
        d.efficiency = denom > 0.0 ? eta_sq / denom : 0.0;
        d.energy_gap = lv.energy - reference.energy;
        d.equivalence = d.energy_gap > kDenominatorGuard ? d.d_ref * d.d_ref / d.energy_gap : 0.0;
        d.xi_sq = eta_sq + d.energy_gap;
        double plastic = 0.0;
        for (std::size_t t = 0; t < lv.mesh.num_elements(); ++t) {
            if (lv.state.p[t].norm() > 0.0) plastic += lv.mesh.area(t);
        }
        d.plastic_fraction = plastic / lv.mesh.total_area();
        rep.levels.push_back(d);
    }
    return rep;
}

}  // namespace plastafem
