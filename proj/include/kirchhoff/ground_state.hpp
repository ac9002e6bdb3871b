#pragma once

#include <vector>

#include "kirchhoff/field.hpp"

namespace kirchhoff {

enum class ShootOutcome { CrossedZero, Diverged, Decayed };

/// One radial integration of Q'' + Q'/r - Q + Q^3 = 0 from Q(0)=q0, Q'(0)=0.
struct ShootingTrace {
    double q0 = 0.0;
    std::vector<double> r_grid;
    std::vector<double> q_values;
    std::vector<double> dq_values;
    ShootOutcome outcome = ShootOutcome::Decayed;
    double event_r = 0.0;  // crossing/divergence radius, or r_max when decayed

    // side information for the shooting bisection
    bool crossed = false;       // some sample <= 0
    bool upturn = false;        // dq turned positive after the initial descent
    double upturn_q = 0.0;      // Q at the first upturn sample
};

/// Converged radial ground state. Monotone cubic interpolation on the
/// samples, fitted c r^{-1/2} e^{-kappa r} tail beyond r_cut.
struct RadialProfile {
    std::vector<double> r_grid;
    std::vector<double> q_values;
    std::vector<double> dq_values;
    std::vector<double> slopes;  // interpolation slopes (Fritsch-Carlson)
    double dr = 0.0;
    double q0_star = 0.0;
    double r_cut = 0.0;
    double tail_amplitude = 0.0;
    double tail_rate = 1.0;

    double value(double r) const;
    double derivative(double r) const;
};

struct GroundStateConstants {
    double a_star = 0.0;         // int Q^2
    double grad_sq = 0.0;        // int |grad Q|^2
    double quartic = 0.0;        // int Q^4
    double second_moment = 0.0;  // int |x|^2 Q^2
    double decay_rate = 0.0;
    double q0_star = 0.0;
};

/// RK4 with the regularized origin expansion Q''(0) = (Q(0) - Q(0)^3)/2.
/// Integration stops at a zero crossing or a divergence event.
ShootingTrace integrate_radial(double q0, double r_max, double dr);

/// Bisection on q0 in [1, 5]; the returned profile is trimmed to the range
/// where Q stays positive and strictly decreasing.
RadialProfile solve_q(double tol, double r_max = 20.0, double dr = 1e-4);

/// Integrals 2*pi*int f(r) r dr over the samples plus the analytic tail.
GroundStateConstants ground_state_constants(const RadialProfile& profile);

struct SampledField {
    Field2D field;
    double mass_defect = 0.0;
    bool coverage_ok = true;
};

/// x -> (inv_scale / sqrt(a_star)) Q(inv_scale |x - center|): a unit-mass
/// rescaled ground state up to boundary truncation.
SampledField sample_field(const RadialProfile& profile, const GridSpec& grid, Vec2 center,
                          double inv_scale);

}  // namespace kirchhoff
