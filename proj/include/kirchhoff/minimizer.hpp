#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kirchhoff/field.hpp"
#include "kirchhoff/ground_state.hpp"
#include "kirchhoff/limit_oracle.hpp"
#include "kirchhoff/potential.hpp"

namespace kirchhoff {

struct Problem {
    double a = 0.0;
    double b = 0.0;
    std::optional<PotentialSpec> potential;
};

enum class InitKind { Gaussian, FieldSnapshot, Random };

struct InitSpec {
    InitKind kind = InitKind::Gaussian;
    Vec2 center;
    double sigma = 1.0;
    uint64_t seed = 1;
    Field2D snapshot;  // used when kind == FieldSnapshot
};

struct MinimizeConfig {
    GridSpec grid;
    double dt = 0.05;
    double tol_energy = 1e-11;
    double tol_residual = 1e-5;
    int max_iter = 50000;
    InitSpec init;
    double theta_max = 1e4;
    double cg_tol = 1e-10;
    bool record_log = false;
};

void validate(const MinimizeConfig& cfg);

enum class SolveStatus { Converged, NotConverged, BlowupDetected };

struct IterationLogRow {
    int iter = 0;
    double energy = 0.0;
    double residual = 0.0;
    double dt = 0.0;
    double theta = 0.0;
};

struct MinimizerResult {
    Field2D field;  // unit mass
    EnergyBreakdown breakdown;
    double mu = 0.0;
    int iterations = 0;
    SolveStatus status = SolveStatus::NotConverged;
    bool converged = false;
    double residual = 0.0;
    Vec2 peak;  // grid point of the global maximum
    double peak_value = 0.0;
    FieldIntegrals integrals;
    double v_integral = 0.0;  // int V u^2
    std::vector<IterationLogRow> log;
};

/// Deterministic smooth random nonnegative unit-mass field (low-frequency
/// sine modes, absolute value taken at initialization only).
Field2D random_smooth_field(const GridSpec& grid, uint64_t seed);

Field2D gaussian_field(const GridSpec& grid, Vec2 center, double sigma);

/// Normalized gradient flow with semi-implicit stepping: the linear part
/// (1 + b theta)(-lap) + V - mu is treated implicitly at frozen theta, the
/// cubic term explicitly; each step renormalizes and must not increase the
/// energy (step halving otherwise).
MinimizerResult minimize(const Problem& problem, const MinimizeConfig& config);

/// Summarize a known field as a result (integrals, multiplier, peak).
MinimizerResult describe_field(const Field2D& u, const Problem& problem);

struct MultiStartResult {
    MinimizerResult best;
    std::vector<MinimizerResult> all;
    double energy_spread = 0.0;  // (max - min)/|best| over converged runs
    double peak_spread = 0.0;    // max pairwise refined-peak distance
    int n_converged = 0;
};

MultiStartResult multi_start(const Problem& problem, const MinimizeConfig& config, int n_starts,
                             uint64_t seed, int jobs = 1);

struct SweepRow {
    double b = 0.0;
    double energy = 0.0;
    double theta = 0.0;
    double l4 = 0.0;
    double v_integral = 0.0;
    double mu = 0.0;
    Vec2 z;  // refined peak
    double eps_meas = 0.0;
    double eps_theory = 0.0;
    double l2_dist = 0.0;  // NaN when no reference profile given
    double h1_dist = 0.0;
    int iters = 0;
    bool converged = false;
    bool resolution_ok = true;
    // extra diagnostics kept out of the canonical CSV
    double trial_energy = 0.0;  // NaN when unavailable
    double decay_c = 0.0;       // sup of w e^{|x|/2} on 4 <= |x| <= 8; NaN if unset
};

struct SweepResult {
    double a = 0.0;
    double a_star = 0.0;
    double p = 0.0;        // 0 when no potential context
    double lambda0 = 0.0;  // 0 when no potential context
    std::vector<SweepRow> rows;
    bool aborted = false;  // blow-up stopped the remaining b values
};

struct SweepContext {
    const RadialProfile* profile = nullptr;  // required
    GroundStateConstants constants;
    const WellAnalysis* analysis = nullptr;  // enables trial states and eps at a = a*
    GridSpec reference_grid{10.0, 201};      // for rescaled-profile distances
    bool trial_restart = true;
};

/// Warm-started continuation over strictly decreasing b values.
SweepResult sweep_b(const Problem& problem, const std::vector<double>& b_list,
                    const MinimizeConfig& config, const SweepContext& ctx);

}  // namespace kirchhoff
