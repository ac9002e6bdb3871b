#include "kirchhoff/limit_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kirchhoff {

double h_quadratic(double r, double a, double b, double a_star) {
    return 0.25 * b * r * r - 0.5 * (a - a_star) / a_star * r;
}

std::optional<double> r_b(double a, double b, double a_star) {
    if (!(b > 0.0)) throw std::invalid_argument("r_b: b must be > 0");
    if (a <= a_star) return std::nullopt;
    return (a - a_star) / (b * a_star);
}

std::optional<double> e_bar_closed(double a, double b, double a_star) {
    if (!(b > 0.0)) throw std::invalid_argument("e_bar_closed: b must be > 0");
    if (a < a_star) return std::nullopt;
    double rel = (a - a_star) / a_star;
    return -0.25 / b * rel * rel;
}

std::optional<double> theory_epsilon(double a, double b, double a_star, double p,
                                     double lambda0) {
    if (!(b > 0.0)) throw std::invalid_argument("theory_epsilon: b must be > 0");
    if (a < a_star) return std::nullopt;
    if (a > a_star) return std::sqrt(b * a_star / (a - a_star));
    if (!(p > 0.0) || !(lambda0 > 0.0))
        throw std::invalid_argument("theory_epsilon: a = a_star requires p > 0 and lambda0 > 0");
    return std::pow(2.0 * b * a_star / (p * lambda0), 1.0 / (p + 4.0));
}

std::optional<TheoryScales> theory_scales(double a, double b, double a_star, double p,
                                          double lambda0) {
    if (a < a_star) return std::nullopt;
    TheoryScales s;
    auto rb = r_b(a, b, a_star);
    s.r_b = rb ? *rb : std::numeric_limits<double>::quiet_NaN();
    s.epsilon = *theory_epsilon(a, b, a_star, p, lambda0);
    s.e_closed = (a > a_star) ? *e_bar_closed(a, b, a_star)
                              : theory_energy_astar(b, p, lambda0, a_star);
    return s;
}

double theory_energy_astar(double b, double p, double lambda0, double a_star) {
    if (!(b > 0.0) || !(p > 0.0) || !(lambda0 > 0.0))
        throw std::invalid_argument("theory_energy_astar: b, p, lambda0 must be > 0");
    double coeff = (4.0 + p) / (4.0 * p) * std::pow(p * lambda0 / (2.0 * a_star), 4.0 / (p + 4.0));
    return coeff * std::pow(b, p / (p + 4.0));
}

UbarField u_bar_field(double a, double b, const GridSpec& grid, const RadialProfile& profile,
                      double a_star) {
    auto rb = r_b(a, b, a_star);
    if (!rb) throw std::invalid_argument("u_bar_field: requires a > a_star");
    double inv_scale = std::sqrt(*rb);
    UbarField out;
    out.field = sample_field(profile, grid, {0.0, 0.0}, inv_scale).field;
    out.resolved = grid.h() <= 0.25 / inv_scale;
    return out;
}

double cutoff(double s) {
    s = std::abs(s);
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    double t = s - 1.0;  // quintic smoothstep, C^2 at both ends
    return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

TrialState trial_upper_bound(double a, double b, const PotentialSpec& potential,
                             const WellAnalysis& analysis, const RadialProfile& profile,
                             const GroundStateConstants& constants, const GridSpec& grid) {
    if (a < constants.a_star)
        throw std::invalid_argument("trial_upper_bound: requires a >= a_star");
    if (analysis.z0.empty()) throw std::invalid_argument("trial_upper_bound: empty Z0");
    validate(grid);

    const WellReport& flattest = analysis.wells[analysis.z0.front() - 1];
    Vec2 xi = potential.wells[analysis.z0.front() - 1].location;
    Vec2 y0 = flattest.y_star;

    TrialState out;
    double tau;
    if (a == constants.a_star) {
        tau = std::pow(analysis.p * analysis.lambda0 / (2.0 * b * constants.a_star),
                       1.0 / (analysis.p + 4.0));
        out.center = {xi.x + y0.x / tau, xi.y + y0.y / tau};
    } else {
        double rb = (a - constants.a_star) / (b * constants.a_star);
        tau = std::sqrt(rb);
        out.center = {xi.x + y0.x / tau, xi.y + y0.y / tau};
    }
    out.scale = tau;
    out.resolved = grid.h() <= 0.25 / tau;

    Field2D u(grid);
    double amp = tau / std::sqrt(constants.a_star);
    for (int i = 0; i < grid.n; ++i) {
        double x = grid.coord(i) - out.center.x;
        for (int j = 0; j < grid.n; ++j) {
            double y = grid.coord(j) - out.center.y;
            double r = std::hypot(x, y);
            u.at(i, j) = amp * cutoff(r) * profile.value(tau * r);
        }
    }
    enforce_boundary(u);
    out.field = normalize(u);  // the normalization constant A
    Field2D V = sample_potential(potential, grid);
    out.breakdown = energy(out.field, a, b, &V);
    out.energy = out.breakdown.total;
    return out;
}

}  // namespace kirchhoff
