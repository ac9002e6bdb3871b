#pragma once

#include <string>
#include <vector>

#include "kirchhoff/minimizer.hpp"

namespace kirchhoff {

struct BlowupMeasurement {
    double eps_meas = 0.0;  // theta^{-1/2}
    Vec2 z;                 // refined peak
    double peak_value = 0.0;
};

/// Requires a converged result.
BlowupMeasurement measure_blowup(const MinimizerResult& result);

/// w(x) = eps * u(eps x + z) resampled onto a fixed reference grid.
struct RescaledProfile {
    Field2D w;
    double eps = 0.0;
    Vec2 z;
};

RescaledProfile rescale_profile(const MinimizerResult& result, const GridSpec& reference);

struct ProfileDistance {
    double l2 = 0.0;
    double h1 = 0.0;
};

/// Distance of w to Q/sqrt(a*) in L2 and H1 grid norms.
ProfileDistance profile_distance(const RescaledProfile& w, const RadialProfile& profile);

/// sup of w(x) e^{|x|/2} over the annulus 4 <= |x| <= 8 (decay constant).
double decay_constant(const Field2D& w);

enum class FitMode { SupercriticalEnergy, CriticalEnergy, Epsilon };

struct FitResult {
    double slope = 0.0;
    double prefactor = 0.0;
    double residual_rms = 0.0;
    int n_points = 0;
};

/// Least squares of log|quantity| vs log b over usable rows.
FitResult fit_power_law(const SweepResult& sweep, FitMode mode);

enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Verdict v);

struct CheckResult {
    std::string name;
    Verdict verdict = Verdict::Inconclusive;
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    std::string note;
};

struct VerifyOptions {
    double ratio_tol = 0.05;       // theta/r_b and l4 ratios
    double mu_tol = 0.10;          // mu eps^2 vs -a/a*
    double drift_tol = 0.25;       // |(z - x_i0)/eps - y0|
    double trend_slack = 0.10;     // monotone-within-noise slack
    double decay_spread_max = 3.0; // max/min of per-row decay constants
    double gap_tol = 0.20;         // (e - ebar)/eps^p vs lambda0/(2 a*)
};

struct DiagnosticsReport {
    double a = 0.0;
    double a_star = 0.0;
    double p = 0.0;
    double lambda0 = 0.0;
    std::vector<CheckResult> checks;

    bool all_passed() const;
};

/// Turn a sweep into named PASS/FAIL/INCONCLUSIVE checks of the limit laws.
DiagnosticsReport verify_limits(const SweepResult& sweep, const WellAnalysis* analysis,
                                const PotentialSpec* potential,
                                const VerifyOptions& opts = {});

enum class UniquenessVerdict { Unique, Split, NotApplicable };

std::string to_string(UniquenessVerdict v);

struct UniquenessProbe {
    UniquenessVerdict verdict = UniquenessVerdict::NotApplicable;
    double energy_spread = 0.0;
    double peak_spread = 0.0;
    int n_converged = 0;
};

/// Multi-start agreement probe; requires a singleton Z0 (else NotApplicable).
UniquenessProbe uniqueness_probe(const Problem& problem, double b, const MinimizeConfig& config,
                                 int n_starts, uint64_t seed, const RadialProfile& profile,
                                 int jobs = 1);

}  // namespace kirchhoff
