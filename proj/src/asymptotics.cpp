#include "kirchhoff/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kirchhoff {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

BlowupMeasurement measure_blowup(const MinimizerResult& result) {
    if (!result.converged)
        throw std::invalid_argument("measure_blowup: result did not converge");
    BlowupMeasurement m;
    if (!(result.integrals.theta > 0.0))
        throw std::invalid_argument("measure_blowup: zero gradient energy");
    m.eps_meas = 1.0 / std::sqrt(result.integrals.theta);
    m.z = refine_peak(result.field);
    m.peak_value = result.peak_value;
    return m;
}

RescaledProfile rescale_profile(const MinimizerResult& result, const GridSpec& reference) {
    validate(reference);
    BlowupMeasurement m = measure_blowup(result);
    if (result.field.grid.h() > 0.5 * m.eps_meas)
        throw numeric_error("rescale_profile: source grid does not resolve eps (h > eps/2)");
    RescaledProfile out;
    out.eps = m.eps_meas;
    out.z = m.z;
    out.w = Field2D(reference);
    for (int i = 0; i < reference.n; ++i) {
        double x = reference.coord(i);
        for (int j = 0; j < reference.n; ++j) {
            double y = reference.coord(j);
            out.w.at(i, j) =
                m.eps_meas * bilinear(result.field, m.eps_meas * x + m.z.x, m.eps_meas * y + m.z.y);
        }
    }
    enforce_boundary(out.w);
    return out;
}

ProfileDistance profile_distance(const RescaledProfile& w, const RadialProfile& profile) {
    const GridSpec& g = w.w.grid;
    if (g.half_width < 10.0)
        throw std::invalid_argument("profile_distance: reference grid must cover radius >= 10");
    GroundStateConstants c = ground_state_constants(profile);
    double amp = 1.0 / std::sqrt(c.a_star);
    Field2D diff(g);
    for (int i = 0; i < g.n; ++i) {
        double x = g.coord(i);
        for (int j = 0; j < g.n; ++j) {
            double y = g.coord(j);
            diff.at(i, j) = w.w.at(i, j) - amp * profile.value(std::hypot(x, y));
        }
    }
    enforce_boundary(diff);
    ProfileDistance d;
    double l2sq = mass(diff);
    d.l2 = std::sqrt(l2sq);
    d.h1 = std::sqrt(l2sq + theta(diff));
    return d;
}

double decay_constant(const Field2D& w) {
    const GridSpec& g = w.grid;
    double best = 0.0;
    for (int i = 0; i < g.n; ++i) {
        double x = g.coord(i);
        for (int j = 0; j < g.n; ++j) {
            double r = std::hypot(x, g.coord(j));
            if (r < 4.0 || r > 8.0) continue;
            best = std::max(best, w.at(i, j) * std::exp(0.5 * r));
        }
    }
    return best;
}

FitResult fit_power_law(const SweepResult& sweep, FitMode mode) {
    std::vector<double> lx, ly;
    for (const auto& row : sweep.rows) {
        if (!row.resolution_ok || !row.converged) continue;
        double q = 0.0;
        switch (mode) {
            case FitMode::SupercriticalEnergy:
            case FitMode::CriticalEnergy:
                q = std::abs(row.energy);
                break;
            case FitMode::Epsilon:
                q = row.eps_meas;
                break;
        }
        if (!(q > 0.0) || !std::isfinite(q)) continue;
        lx.push_back(std::log(row.b));
        ly.push_back(std::log(q));
    }
    if (lx.size() < 3)
        throw std::invalid_argument("fit_power_law: fewer than 3 usable rows");
    size_t n = lx.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    FitResult f;
    f.n_points = (int)n;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double icpt = (sy - f.slope * sx) / n;
    f.prefactor = std::exp(icpt);
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double r = ly[i] - (icpt + f.slope * lx[i]);
        ss += r * r;
    }
    f.residual_rms = std::sqrt(ss / n);
    return f;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

std::string to_string(UniquenessVerdict v) {
    switch (v) {
        case UniquenessVerdict::Unique: return "UNIQUE";
        case UniquenessVerdict::Split: return "SPLIT";
        case UniquenessVerdict::NotApplicable: return "NOT_APPLICABLE";
    }
    return "?";
}

bool DiagnosticsReport::all_passed() const {
    for (const auto& c : checks)
        if (c.verdict == Verdict::Fail) return false;
    return true;
}

namespace {

// Monotone within a relative noise slack.
bool trend_decreasing(const std::vector<double>& v, double slack) {
    for (size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1] * (1.0 + slack)) return false;
    return true;
}

bool trend_increasing(const std::vector<double>& v, double slack) {
    for (size_t i = 1; i < v.size(); ++i)
        if (v[i] < v[i - 1] * (1.0 - slack)) return false;
    return true;
}

}  // namespace

DiagnosticsReport verify_limits(const SweepResult& sweep, const WellAnalysis* analysis,
                                const PotentialSpec* potential, const VerifyOptions& opts) {
    if (sweep.rows.empty()) throw std::invalid_argument("verify_limits: empty sweep");

    DiagnosticsReport rep;
    rep.a = sweep.a;
    rep.a_star = sweep.a_star;
    rep.p = sweep.p;
    rep.lambda0 = sweep.lambda0;

    bool supercritical = sweep.a > sweep.a_star * (1.0 + 1e-10);
    bool critical = !supercritical && sweep.a >= sweep.a_star * (1.0 - 1e-10);

    std::vector<const SweepRow*> resolved;
    for (const auto& r : sweep.rows)
        if (r.converged && r.resolution_ok) resolved.push_back(&r);
    const SweepRow* last = resolved.empty() ? nullptr : resolved.back();

    auto add = [&](CheckResult c) { rep.checks.push_back(std::move(c)); };
    auto inconclusive = [&](const std::string& name, const std::string& why) {
        CheckResult c;
        c.name = name;
        c.verdict = Verdict::Inconclusive;
        c.measured = kNaN;
        c.note = why;
        add(c);
    };

    // (i) supercritical ratios theta/r_b -> 1, l4 a*/(2 r_b) -> 1
    if (supercritical) {
        if (!last) {
            inconclusive("theta_over_rb", "no resolved converged rows");
            inconclusive("l4_over_rb", "no resolved converged rows");
        } else {
            double rb = (sweep.a - sweep.a_star) / (last->b * sweep.a_star);
            CheckResult c1;
        c1.name = "theta_over_rb";
            c1.measured = last->theta / rb;
            c1.target = 1.0;
            c1.tolerance = opts.ratio_tol;
            c1.verdict = std::abs(c1.measured - 1.0) <= opts.ratio_tol ? Verdict::Pass
                                                                       : Verdict::Fail;
            add(c1);
            CheckResult c2;
        c2.name = "l4_over_rb";
            c2.measured = last->l4 * sweep.a_star / (2.0 * rb);
            c2.target = 1.0;
            c2.tolerance = opts.ratio_tol;
            c2.verdict = std::abs(c2.measured - 1.0) <= opts.ratio_tol ? Verdict::Pass
                                                                       : Verdict::Fail;
            add(c2);
        }
    }

    // (ii) critical trends: e -> 0+, theta -> inf, b theta^2 -> 0, int V u^2 -> 0
    if (critical) {
        std::vector<double> e, th, kirch;
        for (auto* r : resolved) {
            e.push_back(r->energy);
            th.push_back(r->theta);
            kirch.push_back(r->b * r->theta * r->theta);
        }
        if (resolved.size() < 2) {
            inconclusive("critical_energy_to_zero", "fewer than 2 resolved rows");
        } else {
            bool pos = std::all_of(e.begin(), e.end(), [](double x) { return x > 0.0; });
            CheckResult c;
        c.name = "critical_energy_to_zero";
            c.measured = e.back();
            c.target = 0.0;
            c.verdict = (pos && trend_decreasing(e, opts.trend_slack)) ? Verdict::Pass
                                                                       : Verdict::Fail;
            c.note = "energies positive and decreasing toward 0";
            add(c);
            CheckResult c2;
        c2.name = "critical_theta_diverges";
            c2.measured = th.back();
            c2.verdict = trend_increasing(th, opts.trend_slack) ? Verdict::Pass : Verdict::Fail;
            c2.note = "theta increasing along the sweep";
            add(c2);
            CheckResult c3;
        c3.name = "critical_kirchhoff_vanishes";
            c3.measured = kirch.back();
            c3.target = 0.0;
            c3.verdict = (trend_decreasing(kirch, opts.trend_slack) && kirch.back() < kirch.front())
                             ? Verdict::Pass
                             : Verdict::Fail;
            add(c3);
        }
    }

    // V-integral vanishes in both regimes (when a potential is present)
    if (potential) {
        std::vector<double> vints;
        for (auto* r : resolved) vints.push_back(r->v_integral);
        if (vints.size() < 2) {
            inconclusive("v_integral_vanishes", "fewer than 2 resolved rows");
        } else {
            CheckResult c;
        c.name = "v_integral_vanishes";
            c.measured = vints.back();
            c.target = 0.0;
            c.verdict = (trend_decreasing(vints, opts.trend_slack) && vints.back() < vints.front())
                            ? Verdict::Pass
                            : Verdict::Fail;
            add(c);
        }
    }

    // (iii) mu eps^2 -> -a/a*
    if (!last) {
        inconclusive("mu_eps_sq", "no resolved converged rows");
    } else {
        CheckResult c;
        c.name = "mu_eps_sq";
        c.measured = last->mu / last->theta;  // eps^2 = 1/theta
        c.target = -sweep.a / sweep.a_star;
        c.tolerance = opts.mu_tol * std::abs(c.target);
        c.verdict = std::abs(c.measured - c.target) <= c.tolerance ? Verdict::Pass : Verdict::Fail;
        add(c);
    }

    // (iv) peak selection and sub-scale drift
    if (analysis && potential && last) {
        auto nearest_well = [&](Vec2 z) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (size_t i = 0; i < potential->wells.size(); ++i) {
                double d = dist(z, potential->wells[i].location);
                if (d < bd) {
                    bd = d;
                    best = (int)i + 1;
                }
            }
            return best;
        };
        int tail_rows = std::min<size_t>(2, resolved.size());
        bool sel_ok = true;
        int selected = nearest_well(last->z);
        for (int k = 0; k < tail_rows; ++k) {
            int idx = nearest_well(resolved[resolved.size() - 1 - k]->z);
            if (std::find(analysis->z0.begin(), analysis->z0.end(), idx) == analysis->z0.end())
                sel_ok = false;
        }
        CheckResult c;
        c.name = "peak_at_flattest_well";
        c.measured = (double)selected;
        c.verdict = sel_ok ? Verdict::Pass : Verdict::Fail;
        c.note = "nearest Z0 element selected on the smallest " + std::to_string(tail_rows) +
                 " resolved rows";
        add(c);

        const auto& well = potential->wells[selected - 1];
        const auto& wrep = analysis->wells[selected - 1];
        double eps_bar = std::isfinite(last->eps_theory) ? last->eps_theory : last->eps_meas;
        CheckResult c2;
        c2.name = "peak_drift";
        Vec2 drift = {(last->z.x - well.location.x) / eps_bar,
                      (last->z.y - well.location.y) / eps_bar};
        c2.measured = dist(drift, wrep.y_star);
        c2.target = 0.0;
        c2.tolerance = opts.drift_tol;
        c2.verdict = c2.measured <= opts.drift_tol ? Verdict::Pass : Verdict::Fail;
        c2.note = "|(z - x_i0)/eps - y0|";
        add(c2);
    }

    // (v) rescaled decay constant uniform over rows
    {
        std::vector<double> cs;
        bool missing = false;
        for (auto* r : resolved) {
            if (std::isfinite(r->decay_c) && r->decay_c > 0.0)
                cs.push_back(r->decay_c);
            else
                missing = true;
        }
        if (missing || cs.size() < 2) {
            inconclusive("rescaled_decay_uniform", "decay constants unavailable on some rows");
        } else {
            CheckResult c;
        c.name = "rescaled_decay_uniform";
            double mn = *std::min_element(cs.begin(), cs.end());
            double mx = *std::max_element(cs.begin(), cs.end());
            c.measured = mx / mn;
            c.tolerance = opts.decay_spread_max;
            c.verdict = c.measured <= opts.decay_spread_max ? Verdict::Pass : Verdict::Fail;
            c.note = "max/min of sup w e^{|x|/2} on 4<=|x|<=8";
            add(c);
        }
    }

    // eps monotone in b at the measured level
    {
        std::vector<double> eps;
        for (const auto& r : sweep.rows)
            if (r.converged) eps.push_back(r.eps_meas);
        if (eps.size() >= 2) {
            CheckResult c;
        c.name = "eps_meas_decreasing";
            bool ok = true;
            for (size_t i = 1; i < eps.size(); ++i)
                if (!(eps[i] < eps[i - 1])) ok = false;
            c.measured = eps.back();
            c.verdict = ok ? Verdict::Pass : Verdict::Fail;
            add(c);
        }
    }

    // energy sandwich and the gap law (supercritical)
    if (supercritical) {
        bool sandwich_ok = true, have_trial = false;
        double worst = 0.0;
        for (auto* r : resolved) {
            double ebar = -0.25 / r->b;
            double rel = (sweep.a - sweep.a_star) / sweep.a_star;
            ebar *= rel * rel;
            if (r->energy < ebar - 0.005 * std::abs(ebar)) sandwich_ok = false;
            worst = std::max(worst, (ebar - r->energy) / std::abs(ebar));
            if (std::isfinite(r->trial_energy)) {
                have_trial = true;
                if (r->energy > r->trial_energy + 1e-9) sandwich_ok = false;
            }
        }
        CheckResult c;
        c.name = "energy_sandwich";
        c.verdict = resolved.empty() ? Verdict::Inconclusive
                                     : (sandwich_ok ? Verdict::Pass : Verdict::Fail);
        c.measured = worst;
        c.note = have_trial ? "ebar - 0.5% <= e <= trial + 1e-9"
                            : "lower bound only (no trial energies recorded)";
        add(c);

        if (last && analysis && sweep.p > 0.0 && sweep.lambda0 > 0.0) {
            double rel = (sweep.a - sweep.a_star) / sweep.a_star;
            double ebar = -0.25 / last->b * rel * rel;
            double eps_bar = std::sqrt(last->b * sweep.a_star / (sweep.a - sweep.a_star));
            CheckResult c2;
        c2.name = "gap_law";
            c2.measured = (last->energy - ebar) / std::pow(eps_bar, sweep.p);
            c2.target = sweep.lambda0 / (2.0 * sweep.a_star);
            c2.tolerance = opts.gap_tol * c2.target;
            c2.verdict = std::abs(c2.measured - c2.target) <= c2.tolerance ? Verdict::Pass
                                                                           : Verdict::Fail;
            add(c2);
        }
    }

    return rep;
}

UniquenessProbe uniqueness_probe(const Problem& problem, double b, const MinimizeConfig& config,
                                 int n_starts, uint64_t seed, const RadialProfile& profile,
                                 int jobs) {
    if (!(b > 0.0)) throw std::invalid_argument("uniqueness_probe: b must be > 0");
    if (n_starts < 2)
        throw std::invalid_argument("uniqueness_probe: n_starts must be >= 2 (cannot probe)");
    if (!problem.potential)
        throw std::invalid_argument("uniqueness_probe: potential required");

    UniquenessProbe out;
    WellAnalysis analysis = analyze_wells(*problem.potential, profile);
    if (analysis.z0.size() != 1) {
        out.verdict = UniquenessVerdict::NotApplicable;
        return out;
    }
    Problem pb = problem;
    pb.b = b;
    MultiStartResult ms = multi_start(pb, config, n_starts, seed, jobs);
    out.energy_spread = ms.energy_spread;
    out.peak_spread = ms.peak_spread;
    out.n_converged = ms.n_converged;
    bool agree = ms.energy_spread <= 1e-6 && ms.peak_spread <= config.grid.h();
    out.verdict = agree ? UniquenessVerdict::Unique : UniquenessVerdict::Split;
    return out;
}

}  // namespace kirchhoff
