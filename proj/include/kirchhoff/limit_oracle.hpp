#pragma once

#include <optional>

#include "kirchhoff/field.hpp"
#include "kirchhoff/ground_state.hpp"
#include "kirchhoff/potential.hpp"

namespace kirchhoff {

/// Quadratic reduction h(r) = (b/4) r^2 - ((a - a*)/(2 a*)) r whose minimum
/// over r >= 0 is the closed-form limit energy.
double h_quadratic(double r, double a, double b, double a_star);

/// Derived scales of one (a, b) point. r_b is NaN at a = a_star; epsilon
/// needs (p, lambda0) there.
struct TheoryScales {
    double r_b = 0.0;
    double epsilon = 0.0;
    double e_closed = 0.0;
};

/// Empty when a < a_star (no supercritical/critical scales apply).
std::optional<TheoryScales> theory_scales(double a, double b, double a_star, double p = 0.0,
                                          double lambda0 = 0.0);

/// r_b = (a - a*)/(b a*); defined for a > a*.
std::optional<double> r_b(double a, double b, double a_star);

/// Closed-form limit energy -(1/4b)((a-a*)/a*)^2 for a > a*, 0 at a = a*,
/// empty (not applicable) for a < a*.
std::optional<double> e_bar_closed(double a, double b, double a_star);

/// Blow-up scale: sqrt(b a*/(a-a*)) for a > a*, (2 b a*/(p lambda0))^{1/(p+4)}
/// at a = a*; empty for a < a*.
std::optional<double> theory_epsilon(double a, double b, double a_star, double p = 0.0,
                                     double lambda0 = 0.0);

/// Leading coefficient law ((4+p)/(4p)) (p lambda0/(2 a*))^{4/(p+4)} b^{p/(p+4)}.
double theory_energy_astar(double b, double p, double lambda0, double a_star);

struct UbarField {
    Field2D field;
    bool resolved = true;  // grid resolves the blow-up scale (h <= eps/4)
};

/// Exact limit minimizer shape (r_b^{1/2}/sqrt(a*)) Q(r_b^{1/2} x) sampled on
/// the grid; requires a > a*.
UbarField u_bar_field(double a, double b, const GridSpec& grid, const RadialProfile& profile,
                      double a_star);

/// C^2 cut-off: 1 for s <= 1, 0 for s >= 2, quintic smoothstep between.
double cutoff(double s);

struct TrialState {
    Field2D field;
    EnergyBreakdown breakdown;
    double energy = 0.0;
    Vec2 center;
    double scale = 0.0;  // tau (a = a*) or r_b^{1/2} (a > a*)
    bool resolved = true;
};

/// Cut-off trial state centered per the concentration theory; its discrete
/// energy is an upper bound for e_a(b) in the continuum limit.
TrialState trial_upper_bound(double a, double b, const PotentialSpec& potential,
                             const WellAnalysis& analysis, const RadialProfile& profile,
                             const GroundStateConstants& constants, const GridSpec& grid);

}  // namespace kirchhoff
