#include <cmath>

#include "doctest.h"
#include "kirchhoff/limit_oracle.hpp"
#include "test_support.hpp"

using namespace kirchhoff;
using kirchhoff::testing::harmonic_potential;
using kirchhoff::testing::test_constants;
using kirchhoff::testing::test_profile;

TEST_SUITE_BEGIN("limit_oracle");

TEST_CASE("closed-form limit energy") {
    double as = test_constants().a_star;
    CHECK(*e_bar_closed(2 * as, 1.0, as) == doctest::Approx(-0.25).epsilon(1e-14));
    CHECK(*e_bar_closed(3 * as, 0.5, as) == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(*e_bar_closed(as, 0.37, as) == 0.0);
    CHECK_FALSE(e_bar_closed(0.5 * as, 0.1, as).has_value());
    CHECK_THROWS_AS(e_bar_closed(as, 0.0, as), std::invalid_argument);
}

TEST_CASE("quadratic reduction attains the closed form only at r_b") {
    double as = test_constants().a_star;
    double a = 2.3 * as, b = 0.07;
    double rb = *r_b(a, b, as);
    double ebar = *e_bar_closed(a, b, as);
    CHECK(h_quadratic(rb, a, b, as) == doctest::Approx(ebar).epsilon(1e-14));
    CHECK(h_quadratic(0.5 * rb, a, b, as) > ebar);
    CHECK(h_quadratic(2.0 * rb, a, b, as) > ebar);
}

TEST_CASE("blow-up scale") {
    double as = test_constants().a_star;
    CHECK(*theory_epsilon(2 * as, 0.01, as) == doctest::Approx(0.1).epsilon(1e-14));
    // (2 b a* / (p lambda0))^{1/(p+4)} with p=2, lambda0=a*: (1e-6)^{1/6} = 0.1
    CHECK(*theory_epsilon(as, 1e-6, as, 2.0, as) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK_FALSE(theory_epsilon(0.9 * as, 0.1, as).has_value());
    CHECK_THROWS_AS(theory_epsilon(as, 0.1, as), std::invalid_argument);  // needs p, lambda0

    double prev = 0.0;
    for (double b : {1e-4, 1e-3, 1e-2, 1e-1}) {
        double eps = *theory_epsilon(1.7 * as, b, as);
        CHECK(eps > prev);
        prev = eps;
    }
}

TEST_CASE("theory_scales bundles the derived quantities") {
    double as = test_constants().a_star;
    auto s = theory_scales(2 * as, 0.01, as);
    REQUIRE(s.has_value());
    CHECK(s->r_b == doctest::Approx(100.0).epsilon(1e-12));
    // for a > a*, epsilon = r_b^{-1/2} exactly
    CHECK(s->epsilon == doctest::Approx(1.0 / std::sqrt(s->r_b)).epsilon(1e-14));
    CHECK(s->e_closed == doctest::Approx(-25.0).epsilon(1e-12));

    auto c = theory_scales(as, 1e-3, as, 2.0, test_constants().second_moment);
    REQUIRE(c.has_value());
    CHECK(std::isnan(c->r_b));
    CHECK(c->epsilon > 0.0);
    CHECK(c->e_closed > 0.0);

    CHECK_FALSE(theory_scales(0.5 * as, 0.01, as).has_value());
}

TEST_CASE("critical energy law coefficients") {
    double as = test_constants().a_star;
    CHECK(theory_energy_astar(1.0, 2.0, 2 * as, as) ==
          doctest::Approx(0.75 * std::cbrt(4.0)).epsilon(1e-14));
    CHECK(theory_energy_astar(1.0, 2.0, as, as) == doctest::Approx(0.75).epsilon(1e-14));
    // the ratio e / b^{p/(p+4)} is b-independent
    double c1 = theory_energy_astar(1e-2, 2.0, as, as) / std::pow(1e-2, 1.0 / 3.0);
    double c2 = theory_energy_astar(1e-5, 2.0, as, as) / std::pow(1e-5, 1.0 / 3.0);
    CHECK(c1 == doctest::Approx(c2).epsilon(1e-12));
}

TEST_CASE("u_bar_field realizes the limit scales") {
    double as = test_constants().a_star;
    double a = 2 * as, b = 0.1;
    GridSpec g{12.0, 256};
    UbarField ub = u_bar_field(a, b, g, test_profile(), as);
    // h = 0.094 is just above r_b^{-1/2}/4 = 0.079: flagged, values still good
    CHECK_FALSE(ub.resolved);
    CHECK(u_bar_field(a, b, {12.0, 385}, test_profile(), as).resolved);
    double rb = *r_b(a, b, as);
    FieldIntegrals I = field_integrals(ub.field);
    CHECK(I.theta == doctest::Approx(rb).epsilon(0.01));
    CHECK(I.l4 == doctest::Approx(2 * rb / as).epsilon(0.01));
    CHECK(energy(ub.field, a, b).total == doctest::Approx(*e_bar_closed(a, b, as)).epsilon(0.01));

    CHECK_THROWS_AS(u_bar_field(0.5 * as, b, g, test_profile(), as), std::invalid_argument);
}

TEST_CASE("scale identity b r_b under refinement") {
    double as = test_constants().a_star;
    double a = 2 * as;
    for (double b : {0.2, 0.1}) {
        GridSpec g{12.0, 385};
        UbarField ub = u_bar_field(a, b, g, test_profile(), as);
        CHECK(b * field_integrals(ub.field).theta ==
              doctest::Approx((a - as) / as).epsilon(5e-3));
    }
}

TEST_CASE("cutoff has the required support") {
    CHECK(cutoff(0.0) == 1.0);
    CHECK(cutoff(1.0) == 1.0);
    CHECK(cutoff(2.0) == 0.0);
    CHECK(cutoff(3.0) == 0.0);
    CHECK(cutoff(1.5) > 0.0);
    CHECK(cutoff(1.5) < 1.0);
    // monotone transition
    double prev = 1.0;
    for (double s = 1.0; s <= 2.0; s += 0.01) {
        CHECK(cutoff(s) <= prev + 1e-15);
        prev = cutoff(s);
    }
}

TEST_CASE("trial state at a = a_star matches the critical coefficient") {
    double as = test_constants().a_star;
    PotentialSpec pot = harmonic_potential();
    WellAnalysis analysis = analyze_wells(pot, test_profile());
    GridSpec g{6.0, 257};
    double b = 1e-3;
    TrialState ts = trial_upper_bound(as, b, pot, analysis, test_profile(), test_constants(), g);
    CHECK(ts.resolved);
    CHECK(std::abs(mass(ts.field) - 1.0) < 1e-6);
    double coeff = ts.energy / std::pow(b, 1.0 / 3.0);
    double theory = theory_energy_astar(1.0, 2.0, analysis.lambda0, as);
    CHECK(coeff == doctest::Approx(theory).epsilon(0.10));
    CHECK(ts.energy >= theory_energy_astar(b, 2.0, analysis.lambda0, as) * 0.9);
}

TEST_CASE("trial state above a_star approaches the closed form from above") {
    double as = test_constants().a_star;
    double a = 2 * as;
    PotentialSpec pot = harmonic_potential();
    WellAnalysis analysis = analyze_wells(pot, test_profile());
    GridSpec g{6.0, 353};
    double prev_gap = 1e9;
    for (double b : {0.2, 0.1, 0.05}) {
        TrialState ts = trial_upper_bound(a, b, pot, analysis, test_profile(), test_constants(), g);
        double gap = ts.energy - *e_bar_closed(a, b, as);
        CHECK(gap > 0.0);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
}

TEST_SUITE_END();
