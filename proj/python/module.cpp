#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <tuple>
#include <vector>

#include "plastafem/adaptivity.hpp"
#include "plastafem/config.hpp"
#include "plastafem/error.hpp"
#include "plastafem/io.hpp"
#include "plastafem/run.hpp"
#include "plastafem/solver.hpp"

namespace py = pybind11;
using namespace plastafem;

namespace {

py::dict record_to_dict(const LevelRecord& r) {
    py::dict d;
    d["level"] = r.level;
    d["n_elements"] = r.n_elements;
    d["n_dofs"] = r.n_dofs;
    d["eta_sq"] = r.eta_sq;
    d["energy"] = r.energy;
    d["n_marked"] = r.n_marked;
    d["wall_ms"] = r.wall_ms;
    return d;
}

py::list trace_to_list(const AdaptTrace& trace) {
    py::list out;
    for (const LevelRecord& r : trace) out.append(record_to_dict(r));
    return out;
}

}  // namespace

PYBIND11_MODULE(_plastafem, m) {
    m.doc() = "Adaptive finite elements for one step of elastoplasticity with hardening";

    static py::exception<Error> error(m, "PlastafemError", PyExc_RuntimeError);
    static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            config_error(e.what());
        } catch (const ArgumentError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const Error& e) {
            error(e.what());
        }
    });

    m.def(
        "return_map",
        [](std::tuple<double, double, double> eps, double mu, double lambda, double h_kin, double h_iso,
           double sigma_y) {
            const Material mat{mu, lambda, h_kin, h_iso, sigma_y};
            mat.validate();
            const auto [xx, xy, yy] = eps;
            const ReturnMapResult r = return_map(Sym2{xx, xy, yy}, mat);
            return std::make_tuple(r.p.d11, r.p.d12, r.alpha);
        },
        py::arg("strain"), py::arg("mu") = 1.0, py::arg("lam") = 1.0, py::arg("h_kin") = 1.0, py::arg("h_iso") = 1.0,
        py::arg("sigma_y") = 1.0,
        "Closed-form local minimizer for the strain (xx, xy, yy). Returns (p11, p12, alpha).");

    m.def(
        "dorfler_mark", [](const std::vector<double>& eta_sq, double theta) { return dorfler_mark(eta_sq, theta); },
        py::arg("eta_sq"), py::arg("theta"), "Minimal set of element ids carrying theta of the total.");

    m.def(
        "validate_config",
        [](const std::string& text) {
            parse_config(text);
            return true;
        },
        py::arg("text"), "Parses and validates a configuration text; raises ConfigError listing every problem.");

    m.def(
        "run",
        [](const std::string& text, const std::string& mode, std::uint64_t seed) {
            const ProblemConfig config = parse_config(text);
            const RunMode rm = parse_run_mode(mode);
            if (rm == RunMode::Verify) throw ArgumentError("use verify() for the oracle suite");
            RunOutcome res;
            {
                py::gil_scoped_release release;
                res = execute_run(config, rm, seed);
            }
            py::dict out;
            out["trace"] = trace_to_list(res.run.trace);
            out["trace_csv"] = trace_to_csv(res.run.trace);
            out["report_json"] = res.report ? py::cast(report_to_json(*res.report)) : py::none();
            return out;
        },
        py::arg("config_text"), py::arg("mode") = "adaptive", py::arg("seed") = 0,
        "Runs the adaptive loop (or the uniform control) and returns the trace and the report JSON.");

    m.def(
        "verify",
        [](const std::string& text, std::uint64_t seed) {
            const ProblemConfig config = parse_config(text);
            std::vector<VerifyCheck> checks;
            {
                py::gil_scoped_release release;
                checks = verify_suite(config, seed);
            }
            std::vector<std::tuple<std::string, bool, std::string>> out;
            for (const VerifyCheck& c : checks) out.emplace_back(c.name, c.passed, c.detail);
            return out;
        },
        py::arg("config_text"), py::arg("seed") = 0, "Oracle suite: list of (name, passed, detail).");

    m.attr("TRACE_HEADER") = std::string(kTraceHeader);
}
