// Acceptance suite: one pass/fail line per criterion.
//
//   acceptance [--criterion N] [--jobs J]
//
// Exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kirchhoff/asymptotics.hpp"
#include "kirchhoff/io.hpp"
#include "kirchhoff/minimizer.hpp"

using namespace kirchhoff;

namespace {

struct Shared {
    int jobs = 1;
    RadialProfile profile;
    GroundStateConstants constants;
    std::optional<WellAnalysis> harmonic_analysis;
    std::optional<SweepResult> sweep_super;     // a = 2a*, V = |x|^2
    std::optional<SweepResult> sweep_critical;  // a = a*, V = |x|^2
    std::optional<SweepResult> sweep_twowell;   // a = a*, degrees 2 and 4

    PotentialSpec harmonic = [] {
        PotentialSpec p;
        p.composition = Composition::Single;
        WellSpec w;
        w.degree = 2.0;
        p.wells = {w};
        return p;
    }();

    const WellAnalysis& harmonic_wells() {
        if (!harmonic_analysis) harmonic_analysis = analyze_wells(harmonic, profile);
        return *harmonic_analysis;
    }

    MinimizeConfig sweep_config(GridSpec grid, double tol_residual) const {
        MinimizeConfig cfg;
        cfg.grid = grid;
        cfg.dt = 0.05;
        cfg.tol_energy = 1e-12;
        cfg.tol_residual = tol_residual;
        cfg.max_iter = 60000;
        cfg.init.sigma = 1.0;
        return cfg;
    }

    SweepContext context(const WellAnalysis* analysis) const {
        SweepContext ctx;
        ctx.profile = &profile;
        ctx.constants = constants;
        ctx.analysis = analysis;
        ctx.reference_grid = {10.0, 201};
        return ctx;
    }

    const SweepResult& super_sweep() {
        if (!sweep_super) {
            Problem problem{2 * constants.a_star, 0.0, harmonic};
            sweep_super = sweep_b(problem, {0.2, 0.1, 0.05, 0.02},
                                  sweep_config({6.0, 513}, 0.05), context(&harmonic_wells()));
        }
        return *sweep_super;
    }

    const SweepResult& critical_sweep() {
        if (!sweep_critical) {
            Problem problem{constants.a_star, 0.0, harmonic};
            sweep_critical = sweep_b(problem, {1e-2, 3e-3, 1e-3, 3e-4},
                                     sweep_config({6.0, 257}, 0.02), context(&harmonic_wells()));
        }
        return *sweep_critical;
    }

    const SweepResult& twowell_sweep() {
        if (!sweep_twowell) {
            PotentialSpec pot;
            pot.composition = Composition::Product;
            WellSpec w2;
            w2.location = {-1.0, 0.0};
            w2.degree = 2.0;
            WellSpec w4;
            w4.location = {1.0, 0.0};
            w4.degree = 4.0;
            pot.wells = {w2, w4};
            static WellAnalysis analysis = analyze_wells(pot, profile);
            Problem problem{constants.a_star, 0.0, pot};
            MinimizeConfig cfg = sweep_config({6.0, 257}, 0.02);
            cfg.init.center = {1.0, 0.0};
            sweep_twowell = sweep_b(problem, {3e-3, 1e-3}, cfg, context(&analysis));
        }
        return *sweep_twowell;
    }
};

bool criterion_1(Shared& sh, std::string& detail) {
    (void)sh;  // solves independently to exercise the refinement check
    RadialProfile coarse = solve_q(1e-10, 20.0, 1e-3);
    RadialProfile fine = solve_q(1e-10, 20.0, 5e-4);
    GroundStateConstants c = ground_state_constants(coarse);
    GroundStateConstants cf = ground_state_constants(fine);
    double r1 = c.grad_sq / c.a_star, r2 = c.quartic / c.a_star;
    double drift = std::abs(cf.a_star - c.a_star) / c.a_star;
    std::ostringstream os;
    os << "a*=" << c.a_star << " grad/mass=" << r1 << " quartic/mass=" << r2
       << " refinement drift=" << drift;
    detail = os.str();
    return std::abs(r1 - 1.0) <= 1e-3 && std::abs(r2 - 2.0) <= 1e-3 && drift < 1e-5;
}

bool criterion_2(Shared& sh, std::string& detail) {
    double as = sh.constants.a_star;
    Problem problem{2 * as, 0.1, std::nullopt};
    MinimizeConfig cfg;
    cfg.grid = {12.0, 256};
    cfg.dt = 0.05;
    cfg.tol_energy = 1e-12;
    cfg.tol_residual = 1e-3;
    cfg.max_iter = 20000;
    cfg.init.sigma = 0.5;
    MinimizerResult res = minimize(problem, cfg);
    std::ostringstream os;
    os << "E=" << res.breakdown.total << " (target -2.5 +- 1%), theta=" << res.integrals.theta
       << " (target 10 +- 2%), iters=" << res.iterations;
    detail = os.str();
    return res.converged && std::abs(res.breakdown.total + 2.5) <= 0.025 &&
           std::abs(res.integrals.theta - 10.0) <= 0.2;
}

bool criterion_3(Shared& sh, std::string& detail) {
    const SweepResult& sweep = sh.super_sweep();
    double as = sh.constants.a_star;
    const SweepRow* last = nullptr;
    for (const auto& r : sweep.rows)
        if (r.converged && r.resolution_ok) last = &r;
    if (!last) {
        detail = "no resolved converged rows";
        return false;
    }
    double product = last->energy * last->b;
    bool gaps_ok = true;
    double prev_gap = 1e300;
    std::ostringstream os;
    os << "e*b=" << product << " (target -0.25 +- 10%), gaps:";
    for (const auto& r : sweep.rows) {
        if (!r.converged) continue;
        double ebar = *e_bar_closed(2 * as, r.b, as);
        double gap = r.energy - ebar;
        os << " " << gap;
        if (!(gap > 0.0) || !(gap < prev_gap)) gaps_ok = false;
        prev_gap = gap;
    }
    detail = os.str();
    return std::abs(product + 0.25) <= 0.025 && gaps_ok;
}

bool criterion_4(Shared& sh, std::string& detail) {
    const SweepResult& sweep = sh.critical_sweep();
    FitResult fit = fit_power_law(sweep, FitMode::CriticalEnergy);
    double lambda0 = sh.harmonic_wells().lambda0;
    double theory = theory_energy_astar(1.0, 2.0, lambda0, sh.constants.a_star);
    std::ostringstream os;
    os << "slope=" << fit.slope << " (target 1/3 +- 0.05), prefactor=" << fit.prefactor
       << " vs theory " << theory << " (+- 15%), lambda0=" << lambda0;
    detail = os.str();
    return std::abs(fit.slope - 1.0 / 3.0) <= 0.05 &&
           std::abs(fit.prefactor / theory - 1.0) <= 0.15;
}

bool criterion_5(Shared& sh, std::string& detail) {
    auto last_ratio = [](const SweepResult& sweep) -> std::optional<double> {
        const SweepRow* last = nullptr;
        for (const auto& r : sweep.rows)
            if (r.converged && r.resolution_ok && std::isfinite(r.eps_theory)) last = &r;
        if (!last) return std::nullopt;
        return last->eps_meas / last->eps_theory;
    };
    auto super_ratio = last_ratio(sh.super_sweep());
    auto critical_ratio = last_ratio(sh.critical_sweep());
    std::ostringstream os;
    os << "eps_meas/eps_theory super=" << (super_ratio ? *super_ratio : -1.0)
       << " critical=" << (critical_ratio ? *critical_ratio : -1.0) << " (target 1 +- 10%)";
    detail = os.str();
    return super_ratio && critical_ratio && std::abs(*super_ratio - 1.0) <= 0.1 &&
           std::abs(*critical_ratio - 1.0) <= 0.1;
}

bool criterion_6(Shared& sh, std::string& detail) {
    const SweepResult& two = sh.twowell_sweep();
    bool at_deg4 = two.rows.size() == 2;
    for (const auto& r : two.rows) {
        if (!r.converged) at_deg4 = false;
        double d_deg4 = dist(r.z, {1.0, 0.0});
        double d_deg2 = dist(r.z, {-1.0, 0.0});
        if (!(d_deg4 < d_deg2)) at_deg4 = false;
    }
    const SweepResult& crit = sh.critical_sweep();
    const SweepRow* last = nullptr;
    for (const auto& r : crit.rows)
        if (r.converged && r.resolution_ok) last = &r;
    double drift = last ? std::hypot(last->z.x, last->z.y) / last->eps_theory : 1e9;
    std::ostringstream os;
    os << "two-well peaks at degree-4 well: " << (at_deg4 ? "yes" : "no")
       << ", single-well |z/eps|=" << drift << " (<= 0.1)";
    detail = os.str();
    return at_deg4 && drift <= 0.1;
}

bool criterion_7(Shared& sh, std::string& detail) {
    const SweepResult& sweep = sh.critical_sweep();
    std::vector<double> l2;
    for (const auto& r : sweep.rows)
        if (r.converged && r.resolution_ok && std::isfinite(r.l2_dist)) l2.push_back(r.l2_dist);
    if (l2.empty()) {
        detail = "no usable rows";
        return false;
    }
    bool monotone = true;
    for (size_t i = 1; i < l2.size(); ++i)
        if (l2[i] > l2[i - 1] * 1.10) monotone = false;
    std::ostringstream os;
    os << "l2 distances:";
    for (double v : l2) os << " " << v;
    os << " (last <= 0.05, non-increasing within 10%)";
    detail = os.str();
    return l2.back() <= 0.05 && monotone;
}

bool criterion_8(Shared& sh, std::string& detail) {
    GridSpec g{6.0, 97};
    Field2D V = sample_potential(sh.harmonic, g);
    double as = sh.constants.a_star;
    double worst = 0.0;
    for (uint64_t seed = 0; seed < 100; ++seed) {
        Field2D u = random_smooth_field(g, 2 * seed + 1);
        Field2D v = random_smooth_field(g, 2 * seed + 2);
        double a = (seed % 5) * 0.5 * as;
        double b = (seed % 3) * 0.1 + 0.05;  // always a live Kirchhoff term
        const Field2D* Vp = (seed % 2) ? &V : nullptr;
        Field2D grad = l2_gradient(u, a, b, Vp);
        double lhs = inner(grad, v);
        double t = 1e-6;
        Field2D up = u, um = u;
        for (size_t k = 0; k < u.values.size(); ++k) {
            up.values[k] += t * v.values[k];
            um.values[k] -= t * v.values[k];
        }
        double fd = (energy(up, a, b, Vp).total - energy(um, a, b, Vp).total) / (2 * t);
        worst = std::max(worst, std::abs(fd - lhs) / std::max(std::abs(lhs), 1e-12));
    }
    std::ostringstream os;
    os << "worst relative mismatch over 100 pairs = " << worst << " (<= 1e-4)";
    detail = os.str();
    return worst <= 1e-4;
}

bool criterion_9(Shared& sh, std::string& detail) {
    double as = sh.constants.a_star;
    GridSpec g{6.0, 65};
    double worst = 0.0;
    for (uint64_t seed = 0; seed < 1000; ++seed)
        worst = std::max(worst, gn_ratio(random_smooth_field(g, seed), as));
    Field2D q = sample_field(sh.profile, {12.0, 256}, {0, 0}, 1.0).field;
    double at_q = gn_ratio(q, as);
    std::ostringstream os;
    os << "max ratio over 1000 random fields = " << worst << " (<= 1.005), at sampled Q = "
       << at_q << " (1 +- 1%)";
    detail = os.str();
    return worst <= 1.005 && std::abs(at_q - 1.0) <= 0.01;
}

bool criterion_10(Shared& sh, std::string& detail) {
    WellSpec aniso;
    aniso.model = WellModel::Anisotropic;
    aniso.degree = 2.0;
    aniso.c1 = 1.0;
    aniso.c2 = 4.0;
    PotentialSpec pot;
    pot.composition = Composition::Single;
    pot.wells = {aniso};
    Problem problem{sh.constants.a_star, 0.0, pot};
    MinimizeConfig cfg;
    // h = 0.0625 resolves eps_bar(1e-3) = 0.264; the agreement thresholds
    // need residual ~ 1e-4, not a deep energy stall
    cfg.grid = {6.0, 193};
    cfg.dt = 0.1;
    cfg.tol_energy = 1e-9;
    cfg.tol_residual = 1e-4;
    cfg.max_iter = 60000;
    cfg.init.sigma = 0.8;
    UniquenessProbe probe = uniqueness_probe(problem, 1e-3, cfg, 5, 2024, sh.profile, sh.jobs);
    std::ostringstream os;
    os << "verdict=" << to_string(probe.verdict) << " energy_spread=" << probe.energy_spread
       << " (<= 1e-6) peak_spread=" << probe.peak_spread << " (<= h=" << cfg.grid.h()
       << "), converged " << probe.n_converged << "/5";
    detail = os.str();
    return probe.verdict == UniquenessVerdict::Unique && probe.n_converged == 5;
}

bool criterion_11(Shared& sh, std::string& detail) {
    double as = sh.constants.a_star;
    int checked = 0;
    double worst_upper = -1e300, worst_lower = 1e300;
    bool ok = true;
    auto scan = [&](const SweepResult& sweep) {
        for (const auto& r : sweep.rows) {
            if (!r.converged) continue;
            auto ebar = e_bar_closed(sweep.a, r.b, as);
            if (ebar) {
                double slack = 0.005 * std::abs(*ebar);
                if (r.energy < *ebar - slack) ok = false;
                worst_lower = std::min(worst_lower, r.energy - *ebar);
            }
            if (std::isfinite(r.trial_energy)) {
                if (r.energy > r.trial_energy + 1e-9) ok = false;
                worst_upper = std::max(worst_upper, r.energy - r.trial_energy);
            }
            ++checked;
        }
    };
    scan(sh.super_sweep());
    scan(sh.critical_sweep());
    scan(sh.twowell_sweep());
    std::ostringstream os;
    os << checked << " rows; min(e - ebar)=" << worst_lower
       << " (>= -0.5%|ebar|), max(e - trial)=" << worst_upper << " (<= 1e-9)";
    detail = os.str();
    return ok && checked > 0;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    Shared sh;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) only = std::atoi(argv[++i]);
        if (!std::strcmp(argv[i], "--jobs") && i + 1 < argc) sh.jobs = std::atoi(argv[++i]);
    }

    sh.profile = solve_q(1e-10, 20.0, 1e-3);
    sh.constants = ground_state_constants(sh.profile);

    struct Criterion {
        int id;
        const char* name;
        std::function<bool(Shared&, std::string&)> run;
    };
    std::vector<Criterion> criteria = {
        {1, "ground-state identities and refinement", criterion_1},
        {2, "closed-form limit energy on the mandated grid", criterion_2},
        {3, "supercritical energy law e ~ -1/(4b)", criterion_3},
        {4, "critical scaling e ~ b^{1/3}", criterion_4},
        {5, "blow-up rate in both regimes", criterion_5},
        {6, "concentration selects the flattest well", criterion_6},
        {7, "rescaled profile converges to Q/sqrt(a*)", criterion_7},
        {8, "gradient consistency with the energy", criterion_8},
        {9, "Gagliardo-Nirenberg property suite", criterion_9},
        {10, "small-b uniqueness probe", criterion_10},
        {11, "oracle sandwich on every converged run", criterion_11},
    };

    int failures = 0;
    for (auto& c : criteria) {
        if (only && c.id != only) continue;
        auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool pass = false;
        try {
            pass = c.run(sh, detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] criterion %2d: %s — %s (%.1fs)\n", pass ? "PASS" : "FAIL", c.id,
                    c.name, detail.c_str(), secs);
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    return failures;
}
