#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kirchhoff/asymptotics.hpp"
#include "kirchhoff/io.hpp"
#include "kirchhoff/minimizer.hpp"
#include "test_support.hpp"

using namespace kirchhoff;
using kirchhoff::testing::harmonic_potential;
using kirchhoff::testing::isotropic_well;
using kirchhoff::testing::single_well;
using kirchhoff::testing::test_constants;
using kirchhoff::testing::test_profile;

namespace {

MinimizeConfig quick_config(GridSpec grid) {
    MinimizeConfig cfg;
    cfg.grid = grid;
    cfg.dt = 0.1;
    cfg.tol_energy = 1e-12;
    cfg.tol_residual = 1e-3;  // energy-level accuracy; tight residuals are slow
    cfg.max_iter = 20000;
    return cfg;
}

SweepContext context() {
    SweepContext ctx;
    ctx.profile = &test_profile();
    ctx.constants = test_constants();
    ctx.reference_grid = {10.0, 201};
    return ctx;
}

}  // namespace

TEST_SUITE_BEGIN("minimizer");

TEST_CASE("harmonic trap ground state") {
    Problem problem{0.0, 0.0, harmonic_potential()};
    MinimizeConfig cfg = quick_config({8.0, 129});
    cfg.tol_residual = 1e-6;
    cfg.init.sigma = 1.4;
    MinimizerResult res = minimize(problem, cfg);
    REQUIRE(res.converged);
    CHECK(res.breakdown.total == doctest::Approx(1.0).epsilon(0.005));
    CHECK(res.integrals.mass == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.residual <= cfg.tol_residual);
    // Gaussian profile: compare against exp(-r^2/2)/sqrt(pi)
    double worst = 0.0;
    for (int i = 0; i < cfg.grid.n; ++i)
        for (int j = 0; j < cfg.grid.n; ++j) {
            double r2 = cfg.grid.coord(i) * cfg.grid.coord(i) +
                        cfg.grid.coord(j) * cfg.grid.coord(j);
            double expect = std::exp(-r2 / 2) / std::sqrt(std::numbers::pi);
            worst = std::max(worst, std::abs(res.field.at(i, j) - expect));
        }
    CHECK(worst < 5e-3);
    CHECK(std::hypot(res.peak.x, res.peak.y) < 1.5 * cfg.grid.h());
}

TEST_CASE("free Kirchhoff minimizer reaches the closed-form energy") {
    double as = test_constants().a_star;
    Problem problem{2 * as, 0.1, std::nullopt};
    MinimizeConfig cfg = quick_config({12.0, 256});
    cfg.dt = 0.05;
    cfg.init.sigma = 0.5;
    MinimizerResult res = minimize(problem, cfg);
    REQUIRE(res.converged);
    CHECK(res.breakdown.total == doctest::Approx(-2.5).epsilon(0.01));
    CHECK(res.integrals.theta == doctest::Approx(10.0).epsilon(0.02));
}

TEST_CASE("nonexistence at b = 0, a = a_star is detected, not converged") {
    double as = test_constants().a_star;
    Problem problem{as, 0.0, harmonic_potential()};
    MinimizeConfig cfg = quick_config({8.0, 129});
    cfg.tol_residual = 1e-9;
    cfg.max_iter = 600;
    MinimizerResult res = minimize(problem, cfg);
    CHECK_FALSE(res.converged);
    // grid-scale collapse is caught by the divergence guard while the
    // energy is still drifting near 0
    CHECK(res.status == SolveStatus::BlowupDetected);
    CHECK(std::abs(res.breakdown.total) < 1.0);
}

TEST_CASE("iteration log is monotone and mass is conserved") {
    double as = test_constants().a_star;
    Problem problem{1.5 * as, 0.2, harmonic_potential()};
    MinimizeConfig cfg = quick_config({8.0, 129});
    cfg.record_log = true;
    MinimizerResult res = minimize(problem, cfg);
    REQUIRE(res.converged);
    REQUIRE(res.log.size() > 3);
    for (size_t i = 1; i < res.log.size(); ++i)
        CHECK(res.log[i].energy <= res.log[i - 1].energy + 1e-13);
    CHECK(res.integrals.mass == doctest::Approx(1.0).epsilon(1e-10));
    double floor = 0.0;
    for (double v : res.field.values) floor = std::min(floor, v);
    CHECK(floor >= -1e-12);
    CHECK(res.residual <= cfg.tol_residual);
}

TEST_CASE("final energy does not exceed the trial-state bound") {
    double as = test_constants().a_star;
    PotentialSpec pot = harmonic_potential();
    WellAnalysis analysis = analyze_wells(pot, test_profile());
    Problem problem{2 * as, 0.1, pot};
    MinimizeConfig cfg = quick_config({6.0, 193});
    MinimizerResult res = minimize(problem, cfg);
    REQUIRE(res.converged);
    TrialState ts =
        trial_upper_bound(2 * as, 0.1, pot, analysis, test_profile(), test_constants(), cfg.grid);
    CHECK(res.breakdown.total <= ts.energy + 1e-9);
    // and the closed-form lower bound holds with discretization slack
    double ebar = *e_bar_closed(2 * as, 0.1, as);
    CHECK(res.breakdown.total >= ebar - 0.005 * std::abs(ebar));
}

TEST_CASE("blow-up guard aborts concentrating runs") {
    double as = test_constants().a_star;
    Problem problem{2 * as, 0.1, std::nullopt};
    MinimizeConfig cfg = quick_config({12.0, 129});
    cfg.theta_max = 2.0;  // r_b = 10 would exceed this
    MinimizerResult res = minimize(problem, cfg);
    CHECK(res.status == SolveStatus::BlowupDetected);
    CHECK_FALSE(res.converged);
}

TEST_CASE("multi_start determinism and agreement in a single well") {
    double as = test_constants().a_star;
    Problem problem{as, 0.01, harmonic_potential()};
    MinimizeConfig cfg = quick_config({6.0, 129});
    cfg.init.sigma = 0.8;

    MultiStartResult m1 = multi_start(problem, cfg, 3, 1234, 1);
    MultiStartResult m2 = multi_start(problem, cfg, 3, 1234, 2);
    REQUIRE(m1.n_converged == 3);
    REQUIRE(m2.n_converged == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(m1.all[i].breakdown.total == m2.all[i].breakdown.total);  // bitwise
        for (size_t k = 0; k < m1.all[i].field.values.size(); ++k)
            if (m1.all[i].field.values[k] != m2.all[i].field.values[k]) {
                CHECK(false);
                break;
            }
    }
    CHECK(m1.energy_spread <= 1e-6);
    CHECK(m1.peak_spread <= cfg.grid.h());

    CHECK_THROWS_AS(multi_start(problem, cfg, 1, 1, 1), std::invalid_argument);
}

TEST_CASE("symmetric twin wells split the starts across basins at equal energy") {
    double as = test_constants().a_star;
    PotentialSpec pot;
    pot.composition = Composition::Product;
    pot.wells = {isotropic_well({-1, 0}, 2.0), isotropic_well({1, 0}, 2.0)};
    Problem problem{as, 0.01, pot};
    MinimizeConfig cfg = quick_config({6.0, 129});
    cfg.init.center = {-1, 0};
    cfg.init.sigma = 0.5;
    MultiStartResult ms = multi_start(problem, cfg, 4, 77, 2);
    REQUIRE(ms.n_converged >= 3);
    for (const auto& r : ms.all) {
        if (!r.converged) continue;
        CHECK(std::abs(r.breakdown.total - ms.best.breakdown.total) <=
              1e-5 * std::abs(ms.best.breakdown.total));
        Vec2 z = refine_peak(r.field);
        double d = std::min(dist(z, {-1, 0}), dist(z, {1, 0}));
        CHECK(d < 0.3);  // every converged run sits in one of the wells
    }
}

TEST_CASE("sweep tracks the branch with decreasing b") {
    double as = test_constants().a_star;
    Problem problem{2 * as, 0.0, harmonic_potential()};
    MinimizeConfig cfg = quick_config({6.0, 193});
    WellAnalysis analysis = analyze_wells(*problem.potential, test_profile());
    SweepContext ctx = context();
    ctx.analysis = &analysis;

    SweepResult sweep = sweep_b(problem, {0.2, 0.1, 0.05}, cfg, ctx);
    REQUIRE(sweep.rows.size() == 3);
    for (const auto& row : sweep.rows) {
        REQUIRE(row.converged);
        // closed-form trend e ~ -C/b
        double eb = row.energy * row.b;
        CHECK(eb == doctest::Approx(-0.25).epsilon(0.2));
        // sandwich per row
        double ebar = *e_bar_closed(2 * as, row.b, as);
        CHECK(row.energy >= ebar - 0.005 * std::abs(ebar));
        REQUIRE(std::isfinite(row.trial_energy));
        CHECK(row.energy <= row.trial_energy + 1e-9);
        CHECK(row.eps_meas == doctest::Approx(1.0 / std::sqrt(row.theta)).epsilon(1e-12));
    }
    CHECK(sweep.rows[2].v_integral < sweep.rows[0].v_integral);
    CHECK(sweep.rows[2].energy < sweep.rows[1].energy);
    CHECK(sweep.rows[1].energy < sweep.rows[0].energy);

    // input contracts
    CHECK_THROWS_AS(sweep_b(problem, {0.1, 0.2}, cfg, ctx), std::invalid_argument);
    CHECK_THROWS_AS(sweep_b(problem, {0.1, -0.2}, cfg, ctx), std::invalid_argument);
    CHECK_THROWS_AS(sweep_b(problem, {}, cfg, ctx), std::invalid_argument);
}

TEST_CASE("critical sweep drives the potential term to zero") {
    double as = test_constants().a_star;
    Problem problem{as, 0.0, harmonic_potential()};
    MinimizeConfig cfg = quick_config({6.0, 193});
    WellAnalysis analysis = analyze_wells(*problem.potential, test_profile());
    SweepContext ctx = context();
    ctx.analysis = &analysis;
    SweepResult sweep = sweep_b(problem, {1e-2, 3e-3}, cfg, ctx);
    REQUIRE(sweep.rows.size() == 2);
    REQUIRE(sweep.rows[0].converged);
    REQUIRE(sweep.rows[1].converged);
    CHECK(sweep.rows[1].v_integral < sweep.rows[0].v_integral);
    CHECK(sweep.rows[0].energy > 0.0);
    CHECK(sweep.rows[1].energy > 0.0);
    CHECK(sweep.rows[1].energy < sweep.rows[0].energy);
    CHECK(sweep.rows[1].theta > sweep.rows[0].theta);
}

TEST_CASE("single-element sweep equals one minimize call") {
    double as = test_constants().a_star;
    Problem problem{2 * as, 0.0, harmonic_potential()};
    MinimizeConfig cfg = quick_config({6.0, 129});
    SweepContext ctx = context();
    WellAnalysis analysis = analyze_wells(*problem.potential, test_profile());
    ctx.analysis = &analysis;
    ctx.trial_restart = false;

    SweepResult sweep = sweep_b(problem, {0.1}, cfg, ctx);
    Problem pb = problem;
    pb.b = 0.1;
    MinimizerResult direct = minimize(pb, cfg);
    REQUIRE(sweep.rows.size() == 1);
    CHECK(sweep.rows[0].energy == direct.breakdown.total);  // bitwise
}

TEST_CASE("sweep aborts the remaining b values on blow-up") {
    double as = test_constants().a_star;
    Problem problem{2 * as, 0.0, std::nullopt};
    MinimizeConfig cfg = quick_config({12.0, 129});
    cfg.theta_max = 3.0;
    SweepContext ctx = context();
    ctx.trial_restart = false;
    SweepResult sweep = sweep_b(problem, {0.5, 0.2, 0.1}, cfg, ctx);
    CHECK(sweep.aborted);
    CHECK(sweep.rows.size() < 3);
}

TEST_SUITE_END();
