#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "plastafem/adaptivity.hpp"

namespace plastafem {

/// Ratio denominators below this are skipped and counted.
inline constexpr double kDenominatorGuard = 1e-13;

/// Stand-in for the exact solution: the overlay of all meshes of a run,
/// refined uniformly a few more times, and its discrete solution.
struct Reference {
    Mesh mesh;
    DiscreteState state;
    double energy = 0.0;
    double eta_sq = 0.0;
    int refinements = 0;
};

Reference compute_reference(const AdaptRun& run, const Problem& problem, int uniform_refinements = 2,
                            const SolverOptions& solver = {});

/// Stability on non-refined elements. per_pair[l] compares levels l and l+1;
/// running[l] is the largest ratio seen up to pair l.
struct StabilityCheck {
    double c1_est = 0.0;
    std::vector<double> per_pair;
    std::vector<double> running;
    std::size_t guarded = 0;
};

StabilityCheck check_A1(const AdaptRun& run, const Problem& problem, std::uint64_t seed, std::size_t subsets = 50);

/// Inputs of the reduction inequality for one pair of meshes.
struct ReductionSample {
    /// sum of eta_sq over refined elements of the coarse mesh.
    double old_refined = 0.0;
    /// sum of eta_sq over new elements of the fine mesh.
    double new_refined = 0.0;
    /// d[U_fine, U_coarse]^2.
    double dist_sq = 0.0;
};

struct ReductionFit {
    double rho2 = 0.0;
    double c2 = 0.0;
};

/// Tightest envelope new <= rho2 * old + c2 * dist_sq over all samples:
/// minimizes sum(rho2 * old + c2 * dist_sq) subject to the inequalities and
/// rho2, c2 >= 0 (a two-variable linear program solved by vertex enumeration).
ReductionFit fit_reduction(std::span<const ReductionSample> samples);

struct ReductionCheck {
    double rho2_est = 0.0;
    double c2_est = 0.0;
    bool passed = true;
    std::vector<ReductionSample> samples;
    std::vector<double> running_rho2;
    std::vector<double> running_c2;
};

ReductionCheck check_A2(const AdaptRun& run, const Problem& problem);

/// Partial sums sum_{k=l}^{N} (d[U_{k+1},U_k]^2 - eps3 d[u,U_k]^2) / eta_l^2.
struct QuasiOrthogonalityCheck {
    std::vector<double> eps3;
    /// table[i][l][N - l] for eps3[i].
    std::vector<std::vector<std::vector<double>>> table;
    std::vector<double> max_entry;
    std::vector<bool> bounded;
};

/// Table entries must stay below this for the sums to count as bounded.
inline constexpr double kQuasiOrthogonalityBound = 10.0;

QuasiOrthogonalityCheck check_A3(const AdaptRun& run, const Problem& problem, const Reference& reference,
                                 std::vector<double> eps3 = {0.0, 0.01, 0.1});

/// d[U(fine), U(coarse)]^2 / sum_{T in coarse \ fine} eta_T^2, or a negative
/// value if the mesh pair is identical or the denominator is guarded.
double discrete_reliability_ratio(const Mesh& coarse, const DiscreteState& u, const IndicatorField& ind,
                                  const Mesh& fine, const DiscreteState& u_fine, const Material& m);

struct DiscreteReliabilityCheck {
    double c4_est = 0.0;
    std::vector<double> per_pair;
    std::vector<double> running;
    std::size_t skipped = 0;
};

DiscreteReliabilityCheck check_A4(const AdaptRun& run, const Problem& problem);

struct RateFit {
    double rho_linear = 0.0;
    double rate_s = 0.0;
    /// Negated slope of log(E_l - E_min) against log(|T_l| - |T_0| + 1).
    double energy_rate = 0.0;
};

/// Least-squares fits on a trace with at least 6 levels. `first_level`
/// drops the leading levels from all fits.
RateFit fit_rates(const AdaptTrace& trace, std::size_t first_level = 0);

/// First level with |T_l| - |T_0| >= factor * |T_0|: the fit window that
/// leaves out the pre-asymptotic levels (clamped so that at least three
/// levels remain).
std::size_t asymptotic_start(const AdaptTrace& trace, double factor = 10.0);

/// Max over min of a positive sequence (1 if all zero, infinity if mixed).
double spread(std::span<const double> values);

struct LevelDiagnostics {
    std::size_t level = 0;
    double d_ref = 0.0;
    double d_next = 0.0;
    double osc_sq = 0.0;
    double reliability = 0.0;
    double efficiency = 0.0;
    double energy_gap = 0.0;
    double equivalence = 0.0;
    double xi_sq = 0.0;
    /// Area fraction of elements with p != 0.
    double plastic_fraction = 0.0;
};

struct AxiomReport {
    StabilityCheck a1;
    ReductionCheck a2;
    QuasiOrthogonalityCheck a3;
    DiscreteReliabilityCheck a4;
    RateFit rates;
    /// Fit restricted to levels from asymptotic_from on.
    RateFit rates_asymptotic;
    std::size_t asymptotic_from = 0;
    double reference_eta_sq = 0.0;
    double reference_energy = 0.0;
    double c_mesh = 0.0;
    std::vector<LevelDiagnostics> levels;
    AdaptTrace trace;
};

AxiomReport build_axiom_report(const AdaptRun& run, const Problem& problem, const Reference& reference,
                               std::uint64_t seed);

/// (|T_l| - |T_0|) / sum_{k<l} |M_k| maximized over levels; 0 for one level.
double closure_constant(const AdaptTrace& trace);

}  // namespace plastafem
