#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "plastafem/config.hpp"
#include "plastafem/diagnostics.hpp"

namespace plastafem {

enum class RunMode { Adaptive, Uniform, Verify };

RunMode parse_run_mode(const std::string& text);

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Oracle suite on a configured problem: solver against the independent
/// minimizer, marking against subset enumeration, mesh invariants under
/// random refinement, the discrete variational inequality and the return map.
std::vector<VerifyCheck> verify_suite(const ProblemConfig& config, std::uint64_t seed);

struct RunOutcome {
    AdaptRun run;
    std::optional<AxiomReport> report;
};

/// Adaptive or uniform (theta = 1) run with diagnostics; writes nothing.
RunOutcome execute_run(const ProblemConfig& config, RunMode mode, std::uint64_t seed);

/// Full command: runs the mode and writes its artifacts under `out_dir`.
/// Returns the process exit status; errors are reported on `err`.
int run_command(const ProblemConfig& config, RunMode mode, const std::filesystem::path& out_dir, std::uint64_t seed,
                std::ostream& log, std::ostream& err);

}  // namespace plastafem
