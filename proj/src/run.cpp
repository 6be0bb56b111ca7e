#include "plastafem/run.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "plastafem/diagnostics.hpp"
#include "plastafem/io.hpp"
#include "plastafem/oracle.hpp"

namespace plastafem {

RunMode parse_run_mode(const std::string& text) {
    if (text == "adaptive") return RunMode::Adaptive;
    if (text == "uniform") return RunMode::Uniform;
    if (text == "verify") return RunMode::Verify;
    throw ArgumentError("unknown mode '" + text + "' (expected adaptive, uniform or verify)");
}

namespace {

Mesh root_mesh(const Mesh& mesh) {
    const MeshRoot& r = *mesh.root();
    return Mesh::from_parts(r.vertices, r.elements, r.tags);
}

/// Finest uniform refinement of the root with at most `max_dofs` unknowns.
Mesh small_mesh(const Mesh& mesh, std::size_t max_dofs) {
    Mesh m = root_mesh(mesh);
    for (;;) {
        Mesh next = refine_uniform(m);
        if (DofMap(next).num_total_dofs() > max_dofs) return m;
        m = std::move(next);
    }
}

bool minimal_by_enumeration(std::span<const double> eta_sq, double theta) {
    const std::size_t n = eta_sq.size();
    const std::vector<std::size_t> greedy = dorfler_mark(eta_sq, theta);
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
        if (count < greedy.size() && theta * total <= s) return false;
    }
    double chosen = 0.0;
    for (std::size_t i : greedy) chosen += eta_sq[i];
    return theta * total <= chosen;
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, pattern, a, b);
    return buf;
}

VerifyCheck check_solver_vs_oracle(const Problem& p) {
    VerifyCheck c{"solver-vs-oracle", false, ""};
    const Mesh mesh = small_mesh(p.mesh, 200);
    const SolveResult vi = solve_vi(mesh, p.material, p.loads);
    const OracleResult orc = oracle_minimize(mesh, p.material, p.loads);
    const double e_vi = vi.energies.back();
    const double e_or = energy(mesh, p.material, p.loads, orc.state);
    const double gap = std::abs(e_vi - e_or);
    const double d = error_measure(mesh, vi.state, mesh, orc.state, p.material);
    c.passed = orc.converged && gap <= 1e-8 * (1.0 + std::abs(e_vi)) && d <= 1e-5;
    c.detail = std::to_string(mesh.num_elements()) + " elements, " + fmt("|dE| = %.3g, d = %.3g", gap, d);
    return c;
}

VerifyCheck check_marking(const Problem& p, const AdaptOptions& opts, std::mt19937_64& rng) {
    VerifyCheck c{"marking-minimality", true, ""};
    std::uniform_int_distribution<std::size_t> len(1, 12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t cases = 0;
    for (int k = 0; k < 100; ++k) {
        std::vector<double> eta(len(rng));
        for (double& v : eta) v = unit(rng);
        const double theta = 1e-3 + (1.0 - 1e-3) * unit(rng);
        c.passed &= minimal_by_enumeration(eta, theta);
        ++cases;
    }
    AdaptOptions small = opts;
    small.stop.max_levels = 4;
    const AdaptRun run = adapt_loop({root_mesh(p.mesh), p.material, p.loads}, small);
    for (const Level& lv : run.levels) {
        if (lv.mesh.num_elements() > 12 || lv.marked.empty()) continue;
        c.passed &= minimal_by_enumeration(lv.indicators.eta_sq, opts.theta);
        ++cases;
    }
    c.detail = std::to_string(cases) + " indicator vectors enumerated";
    return c;
}

VerifyCheck check_mesh_invariants(const Problem& p, std::mt19937_64& rng) {
    VerifyCheck c{"mesh-invariants", true, ""};
    const Mesh root = root_mesh(p.mesh);
    const double area0 = root.total_area();
    Mesh mesh = root;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t steps = 0;
    for (int k = 0; k < 200 && c.passed; ++k) {
        if (mesh.num_elements() > 3000) mesh = root;
        std::vector<std::size_t> marked;
        const double frac = 0.05 + 0.3 * unit(rng);
        for (std::size_t t = 0; t < mesh.num_elements(); ++t) {
            if (unit(rng) < frac) marked.push_back(t);
        }
        if (marked.empty()) marked.push_back(0);
        Mesh next = refine(mesh, marked);
        const ConformityReport conf = check_conformity(next);
        const bool area_ok = std::abs(next.total_area() - area0) <= 1e-12 * area0;
        const std::size_t removed = elements_not_in(mesh, next).size();
        const bool count_ok = removed <= next.num_elements() - mesh.num_elements();
        c.passed = conf.conforming && area_ok && count_ok;
        if (!conf.conforming && !conf.problems.empty()) c.detail = conf.problems.front();
        if (!area_ok) c.detail = "area not conserved";
        if (!count_ok) c.detail = "refined elements exceed the growth";
        mesh = std::move(next);
        ++steps;
    }
    if (c.passed) c.detail = std::to_string(steps) + " random refinements";
    return c;
}

VerifyCheck check_vi(const Problem& p, std::uint64_t seed) {
    VerifyCheck c{"variational-inequality", false, ""};
    const SolveResult sr = solve_vi(p.mesh, p.material, p.loads);
    const ViCheck chk = check_variational_inequality(p.mesh, p.material, p.loads, sr.state, 200, seed);
    c.passed = chk.passed;
    c.detail = fmt("max violation %.3g over 200 samples", chk.max_violation);
    return c;
}

VerifyCheck check_return_map(const Material& m, std::mt19937_64& rng) {
    VerifyCheck c{"return-map", true, ""};
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = -HUGE_VAL;
    for (int k = 0; k < 1000; ++k) {
        const double scale = m.sigma_y / m.mu * 3.0 * unit(rng);
        const Sym2 eps{scale * normal(rng), scale * normal(rng), scale * normal(rng)};
        const ReturnMapResult r = return_map(eps, m);
        const double phi = local_energy_density(eps, r.p, r.alpha, m);
        for (int j = 0; j < 20; ++j) {
            const double h = scale * std::pow(10.0, -4.0 * unit(rng));
            const Dev2 q = r.p + Dev2{h * normal(rng), h * normal(rng)};
            const double beta = q.norm() + h * unit(rng);
            worst = std::max(worst, phi - local_energy_density(eps, q, beta, m));
        }
    }
    c.passed = worst <= 1e-9;
    c.detail = fmt("max phi(closed form) - phi(candidate) = %.3g", worst);
    return c;
}

}  // namespace

std::vector<VerifyCheck> verify_suite(const ProblemConfig& config, std::uint64_t seed) {
    const Problem p = build_problem(config);
    std::mt19937_64 rng(seed);
    std::vector<VerifyCheck> checks;
    auto guarded = [&](const char* name, auto&& fn) {
        try {
            checks.push_back(fn());
        } catch (const Error& e) {
            checks.push_back({name, false, e.what()});
        }
    };
    guarded("solver-vs-oracle", [&] { return check_solver_vs_oracle(p); });
    guarded("marking-minimality", [&] { return check_marking(p, config.adapt, rng); });
    guarded("mesh-invariants", [&] { return check_mesh_invariants(p, rng); });
    guarded("variational-inequality", [&] { return check_vi(p, seed); });
    guarded("return-map", [&] { return check_return_map(p.material, rng); });
    return checks;
}

RunOutcome execute_run(const ProblemConfig& config, RunMode mode, std::uint64_t seed) {
    const Problem problem = build_problem(config);
    AdaptOptions opts = config.adapt;
    if (mode == RunMode::Uniform) opts.theta = 1.0;
    RunOutcome out;
    out.run = adapt_loop(problem, opts);
    if (out.run.levels.size() >= 2) {
        const Reference ref = compute_reference(out.run, problem, config.reference_refinements, opts.solver);
        out.report = build_axiom_report(out.run, problem, ref, seed);
    }
    return out;
}

namespace {

void write_artifacts(const RunOutcome& res, const ProblemConfig& config, const std::filesystem::path& dir) {
    write_text_file(dir / "trace.csv", trace_to_csv(res.run.trace));
    if (res.report) write_text_file(dir / "report.json", report_to_json(*res.report));
    if (config.snapshots) {
        for (std::size_t l = 0; l < res.run.levels.size(); ++l) {
            char name[32];
            std::snprintf(name, sizeof name, "mesh_%03zu.svg", l);
            write_text_file(dir / name, mesh_to_svg(res.run.levels[l].mesh, res.run.levels[l].marked));
        }
    }
    const double n0 = static_cast<double>(res.run.trace.front().n_elements);
    RateSeries eta{"eta", {}, {}};
    for (const LevelRecord& r : res.run.trace) {
        eta.n.push_back(static_cast<double>(r.n_elements) - n0 + 1.0);
        eta.value.push_back(std::sqrt(r.eta_sq));
    }
    std::vector<RateSeries> series{eta};
    if (res.report) {
        RateSeries err{"d[u_ref, U]", {}, {}};
        for (std::size_t l = 0; l < res.report->levels.size(); ++l) {
            err.n.push_back(eta.n[l]);
            err.value.push_back(res.report->levels[l].d_ref);
        }
        series.push_back(err);
    }
    write_text_file(dir / "rates.svg", rate_plot_svg(series, "|T| - |T0| + 1"));
}

}  // namespace

int run_command(const ProblemConfig& config, RunMode mode, const std::filesystem::path& out_dir, std::uint64_t seed,
                std::ostream& log, std::ostream& err) {
    try {
        if (mode == RunMode::Verify) {
            bool ok = true;
            for (const VerifyCheck& c : verify_suite(config, seed)) {
                log << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
                ok &= c.passed;
            }
            return ok ? 0 : 1;
        }
        const RunOutcome res = execute_run(config, mode, seed);
        write_artifacts(res, config, out_dir);
        const LevelRecord& last = res.run.trace.back();
        log << "levels " << res.run.trace.size() << ", elements " << last.n_elements << ", eta " << format_double(std::sqrt(last.eta_sq))
            << '\n';
        if (res.report) {
            log << "rate_s " << format_double(res.report->rates.rate_s) << ", rho_linear "
                << format_double(res.report->rates.rho_linear) << '\n';
        }
        log << "artifacts in " << out_dir.string() << '\n';
        return 0;
    } catch (const ConfigError& e) {
        err << "error: config: " << e.what() << '\n';
        return 2;
    } catch (const AdaptFailure& e) {
        err << "error: adaptivity: " << e.what() << " (after " << e.trace().size() << " levels)\n";
        return 3;
    } catch (const NonConvergence& e) {
        err << "error: solver: " << e.what() << '\n';
        return 3;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << '\n';
        return 4;
    }
}

}  // namespace plastafem
