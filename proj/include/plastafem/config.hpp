#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "plastafem/adaptivity.hpp"
#include "plastafem/expression.hpp"
#include "plastafem/mesh.hpp"

namespace plastafem {

/// Validated run configuration. Text schema (one key per line, '#' starts a
/// comment, strings in double quotes, arrays in brackets):
///
///   [mesh]        builtin = "unit-square" | "l-shape", or file = "path";
///                 initial_refinements = 0
///   [boundary]    dirichlet = [[x0, y0, x1, y1], ...]
///   [material]    mu, lambda, h_kin, h_iso, sigma_y
///   [loads]       f = "(e1, e2)", g = "(e1, e2)"
///   [adaptivity]  theta, max_levels, max_dofs, eta_tol
///   [solver]      tol, max_iterations, linear_tol, linear_solver = "direct" | "cg"
///   [diagnostics] reference_refinements, seed
///   [output]      dir, wall_time, snapshots
struct ProblemConfig {
    std::string mesh_builtin;
    std::string mesh_file;
    int initial_refinements = 0;
    /// Filled by parse_config with the builtin default when absent: the left
    /// edge of the unit square or the two re-entrant edges of the L-shape.
    std::vector<Segment> dirichlet;
    Material material;
    VectorExpression f = VectorExpression::parse("(0, 0)");
    VectorExpression g = VectorExpression::parse("(0, 0)");
    AdaptOptions adapt;
    int reference_refinements = 2;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    bool snapshots = true;
    /// Directory against which a relative mesh file is resolved.
    std::filesystem::path base_dir;
};

/// Parses and validates. Throws ConfigError listing every syntax error
/// (with line and column), range violation and unknown key.
ProblemConfig parse_config(std::string_view text);
ProblemConfig load_config(const std::filesystem::path& path);

std::vector<Segment> default_dirichlet(const std::string& builtin);

/// Initial mesh (after initial_refinements) with loads and material.
Problem build_problem(const ProblemConfig& config);

}  // namespace plastafem
