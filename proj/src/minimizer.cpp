#include "kirchhoff/minimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "kirchhoff/asymptotics.hpp"

namespace kirchhoff {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Matrix-free preconditioned CG for (1 + dt*s + dt*V)I + dt*kin*(-lap4).
// Vectors carry the full grid; the boundary ring stays zero throughout.
struct ImplicitSolve {
    int n;
    double inv12h2;
    double dt, kin;
    const std::vector<double>* V;  // nullable
    double shift;

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        auto val = [&](int i, int j) -> double {
            return (i < 0 || i >= n || j < 0 || j >= n) ? 0.0 : x[(size_t)i * n + j];
        };
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                size_t k = (size_t)i * n + j;
                double lap = 60.0 * x[k] -
                             16.0 * (val(i - 1, j) + val(i + 1, j) + val(i, j - 1) + val(i, j + 1)) +
                             val(i - 2, j) + val(i + 2, j) + val(i, j - 2) + val(i, j + 2);
                double diag = 1.0 + dt * shift + (V ? dt * (*V)[k] : 0.0);
                y[k] = diag * x[k] + dt * kin * inv12h2 * lap;
            }
        // Dirichlet ring
        for (int j = 0; j < n; ++j) {
            y[(size_t)0 * n + j] = 0.0;
            y[(size_t)(n - 1) * n + j] = 0.0;
        }
        for (int i = 0; i < n; ++i) {
            y[(size_t)i * n + 0] = 0.0;
            y[(size_t)i * n + n - 1] = 0.0;
        }
    }

    int solve(const std::vector<double>& rhs, std::vector<double>& x, double tol) const {
        size_t m = rhs.size();
        std::vector<double> r(m), z(m), p(m), q(m);
        double diag_lap = dt * kin * inv12h2 * 60.0;
        auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
            for (size_t k = 0; k < m; ++k) {
                double d = 1.0 + dt * shift + (V ? dt * (*V)[k] : 0.0) + diag_lap;
                out[k] = in[k] / d;
            }
        };
        apply(x, q);
        long double rhs_norm2 = 0.0L;
        for (size_t k = 0; k < m; ++k) {
            r[k] = rhs[k] - q[k];
            rhs_norm2 += (long double)rhs[k] * rhs[k];
        }
        double stop = tol * tol * std::max((double)rhs_norm2, 1e-300);
        precond(r, z);
        p = z;
        long double rz = 0.0L, rr = 0.0L;
        for (size_t k = 0; k < m; ++k) {
            rz += (long double)r[k] * z[k];
            rr += (long double)r[k] * r[k];
        }
        int it = 0;
        const int max_it = 20000;
        while ((double)rr > stop && it < max_it) {
            apply(p, q);
            long double pq = 0.0L;
            for (size_t k = 0; k < m; ++k) pq += (long double)p[k] * q[k];
            double alpha = (double)(rz / pq);
            rr = 0.0L;
            for (size_t k = 0; k < m; ++k) {
                x[k] += alpha * p[k];
                r[k] -= alpha * q[k];
                rr += (long double)r[k] * r[k];
            }
            precond(r, z);
            long double rz_new = 0.0L;
            for (size_t k = 0; k < m; ++k) rz_new += (long double)r[k] * z[k];
            double beta = (double)(rz_new / rz);
            rz = rz_new;
            for (size_t k = 0; k < m; ++k) p[k] = z[k] + beta * p[k];
            ++it;
        }
        if ((double)rr > stop) throw numeric_error("implicit step: CG did not converge");
        return it;
    }
};

double v_quadrature(const Field2D& u, const Field2D* V) {
    if (!V) return 0.0;
    long double s = 0.0L;
    for (size_t k = 0; k < u.values.size(); ++k)
        s += (long double)V->values[k] * u.values[k] * u.values[k];
    return (double)(s * u.grid.h() * u.grid.h());
}

void fill_summary(MinimizerResult& res, const Problem& problem, const Field2D* V) {
    res.integrals = field_integrals(res.field);
    res.v_integral = v_quadrature(res.field, V);
    res.breakdown = energy(res.field, problem.a, problem.b, V);
    res.mu = res.integrals.theta + res.v_integral +
             problem.b * res.integrals.theta * res.integrals.theta - problem.a * res.integrals.l4;
    res.residual = el_residual(res.field, problem.a, problem.b, V);
    PeakInfo pk = grid_peak(res.field);
    res.peak = pk.point;
    res.peak_value = pk.value;
}

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

}  // namespace

void validate(const MinimizeConfig& cfg) {
    validate(cfg.grid);
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("config: dt must be > 0");
    if (!(cfg.tol_energy > 0.0) || !(cfg.tol_residual > 0.0))
        throw std::invalid_argument("config: tolerances must be > 0");
    if (cfg.max_iter < 1) throw std::invalid_argument("config: max_iter must be >= 1");
    if (!(cfg.theta_max > 0.0)) throw std::invalid_argument("config: theta_max must be > 0");
}

Field2D gaussian_field(const GridSpec& grid, Vec2 center, double sigma) {
    validate(grid);
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_field: sigma must be > 0");
    Field2D u(grid);
    double inv2s2 = 0.5 / (sigma * sigma);
    for (int i = 0; i < grid.n; ++i) {
        double dx = grid.coord(i) - center.x;
        for (int j = 0; j < grid.n; ++j) {
            double dy = grid.coord(j) - center.y;
            u.at(i, j) = std::exp(-(dx * dx + dy * dy) * inv2s2);
        }
    }
    enforce_boundary(u);
    return normalize(u);
}

Field2D random_smooth_field(const GridSpec& grid, uint64_t seed) {
    validate(grid);
    // splitmix64 stream -> uniform in [-1,1]; fixed low-frequency sine basis
    uint64_t state = seed;
    auto next_unit = [&]() {
        state += 0x9E3779B97F4A7C15ULL;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return 2.0 * ((z >> 11) * 0x1.0p-53) - 1.0;
    };
    const int modes = 4;
    double coeff[modes][modes];
    for (int k = 0; k < modes; ++k)
        for (int l = 0; l < modes; ++l)
            coeff[k][l] = next_unit() / double((k + 1) * (k + 1) + (l + 1) * (l + 1));

    Field2D u(grid);
    double L = grid.half_width;
    constexpr double pi = std::numbers::pi_v<double>;
    for (int i = 0; i < grid.n; ++i) {
        double sx = (grid.coord(i) + L) / (2.0 * L);
        for (int j = 0; j < grid.n; ++j) {
            double sy = (grid.coord(j) + L) / (2.0 * L);
            double v = 0.0;
            for (int k = 0; k < modes; ++k)
                for (int l = 0; l < modes; ++l)
                    v += coeff[k][l] * std::sin((k + 1) * pi * sx) * std::sin((l + 1) * pi * sy);
            u.at(i, j) = std::abs(v);
        }
    }
    enforce_boundary(u);
    return normalize(u);
}

namespace {

Field2D build_init(const InitSpec& init, const GridSpec& grid) {
    switch (init.kind) {
        case InitKind::Gaussian:
            return gaussian_field(grid, init.center, init.sigma);
        case InitKind::Random:
            return random_smooth_field(grid, init.seed);
        case InitKind::FieldSnapshot: {
            if (!(init.snapshot.grid == grid))
                throw std::invalid_argument("init: snapshot grid does not match config grid");
            Field2D u = init.snapshot;
            for (double& v : u.values) v = std::abs(v);
            enforce_boundary(u);
            return normalize(u);
        }
    }
    throw std::invalid_argument("init: unknown kind");
}

}  // namespace

MinimizerResult minimize(const Problem& problem, const MinimizeConfig& config) {
    validate(config);
    if (problem.a < 0.0 || problem.b < 0.0)
        throw std::invalid_argument("minimize: a, b must be >= 0");
    const GridSpec& grid = config.grid;
    std::optional<Field2D> Vfield;
    if (problem.potential) Vfield = sample_potential(*problem.potential, grid);
    const Field2D* V = Vfield ? &*Vfield : nullptr;

    Field2D u = build_init(config.init, grid);
    EnergyBreakdown E = energy(u, problem.a, problem.b, V);

    MinimizerResult res;
    res.field = u;
    res.status = SolveStatus::NotConverged;

    double dt = config.dt;
    double h = grid.h();
    ImplicitSolve op{grid.n, 1.0 / (12.0 * h * h), dt, 1.0, V ? &V->values : nullptr, 0.0};

    std::vector<double> rhs(u.values.size()), star(u.values.size());
    int iter = 0;
    bool stalled = false;

    // Also guard at the grid scale: theta^{-1/2} < 2h means the iterate is
    // collapsing onto single cells, where the discrete GN bound fails and
    // the b = 0 functional is unbounded (continuum nonexistence shows up as
    // spike formation).
    double theta_guard = std::min(config.theta_max, 0.25 / (h * h));

    while (iter < config.max_iter) {
        ++iter;
        FieldIntegrals I = field_integrals(u);
        if (I.theta > theta_guard) {
            res.status = SolveStatus::BlowupDetected;
            break;
        }
        double vint = v_quadrature(u, V);
        double mu = I.theta + vint + problem.b * I.theta * I.theta - problem.a * I.l4;

        bool accepted = false;
        Field2D u_new;
        EnergyBreakdown E_new;
        for (int halving = 0; halving < 60; ++halving) {
            op.dt = dt;
            op.kin = 1.0 + problem.b * I.theta;
            // -mu shift makes discrete EL points exact fixed points; capped to
            // keep the diagonal positive when mu > 0.
            op.shift = (dt * mu >= 0.9) ? -0.9 / dt : -mu;
            for (size_t k = 0; k < rhs.size(); ++k) {
                double v = u.values[k];
                rhs[k] = v + dt * problem.a * v * v * v;
            }
            star = u.values;
            op.solve(rhs, star, config.cg_tol);
            u_new.grid = grid;
            u_new.values = star;
            enforce_boundary(u_new);
            double m = mass(u_new);
            if (m > 0.0 && std::isfinite(m)) {
                double s = 1.0 / std::sqrt(m);
                for (double& v : u_new.values) v *= s;
                E_new = energy(u_new, problem.a, problem.b, V);
                if (std::isfinite(E_new.total) &&
                    E_new.total <= E.total + 1e-14 * std::max(1.0, std::abs(E.total))) {
                    accepted = true;
                    break;
                }
            }
            dt *= 0.5;
            if (dt < 1e-15) break;
        }
        if (!accepted) {
            stalled = true;
            break;
        }

        double rel_de = std::abs(E.total - E_new.total) / std::max(std::abs(E_new.total), 1e-30);
        u = std::move(u_new);
        E = E_new;

        if (config.record_log) {
            IterationLogRow row;
            row.iter = iter;
            row.energy = E.total;
            row.residual = el_residual(u, problem.a, problem.b, V);
            row.dt = dt;
            row.theta = theta(u);
            res.log.push_back(row);
        }

        dt = std::min(dt * 1.25, config.dt);

        if (rel_de <= config.tol_energy) {
            double r = el_residual(u, problem.a, problem.b, V);
            if (r <= config.tol_residual) {
                res.status = SolveStatus::Converged;
                break;
            }
        }
    }
    if (stalled && res.status == SolveStatus::NotConverged) {
        // flat to rounding: accept if the residual criterion holds
        double r = el_residual(u, problem.a, problem.b, V);
        if (r <= config.tol_residual) res.status = SolveStatus::Converged;
    }

    res.field = std::move(u);
    res.iterations = iter;
    res.converged = (res.status == SolveStatus::Converged);
    fill_summary(res, problem, V);
    return res;
}

MinimizerResult describe_field(const Field2D& u, const Problem& problem) {
    std::optional<Field2D> Vfield;
    if (problem.potential) Vfield = sample_potential(*problem.potential, u.grid);
    MinimizerResult res;
    res.field = normalize(u);
    res.status = SolveStatus::Converged;
    res.converged = true;
    fill_summary(res, problem, Vfield ? &*Vfield : nullptr);
    return res;
}

MultiStartResult multi_start(const Problem& problem, const MinimizeConfig& config, int n_starts,
                             uint64_t seed, int jobs) {
    if (n_starts < 2) throw std::invalid_argument("multi_start: n_starts must be >= 2");
    size_t n_wells = problem.potential ? problem.potential->wells.size() : 0;

    auto config_for = [&](int i) {
        MinimizeConfig c = config;
        if (i == 0) return c;
        if ((size_t)(i - 1) < n_wells) {
            c.init.kind = InitKind::Gaussian;
            c.init.center = problem.potential->wells[i - 1].location;
            c.init.sigma = config.init.sigma;
        } else {
            c.init.kind = InitKind::Random;
            c.init.seed = mix_seed(seed, (uint64_t)i);
        }
        return c;
    };

    std::vector<MinimizerResult> all(n_starts);
    std::vector<std::exception_ptr> errors(n_starts);
    jobs = std::max(1, std::min(jobs, n_starts));
    if (jobs == 1) {
        for (int i = 0; i < n_starts; ++i) all[i] = minimize(problem, config_for(i));
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < jobs; ++w)
            pool.emplace_back([&]() {
                for (int i = next.fetch_add(1); i < n_starts; i = next.fetch_add(1)) {
                    try {
                        all[i] = minimize(problem, config_for(i));
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    MultiStartResult out;
    out.all = std::move(all);
    int best_idx = -1;
    double emin = std::numeric_limits<double>::infinity();
    double emax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_starts; ++i) {
        if (!out.all[i].converged) continue;
        ++out.n_converged;
        double e = out.all[i].breakdown.total;
        if (e < emin) {
            emin = e;
            best_idx = i;
        }
        emax = std::max(emax, e);
    }
    if (best_idx < 0) throw numeric_error("multi_start: no start converged");
    out.best = out.all[best_idx];
    out.energy_spread = (emax - emin) / std::max(std::abs(emin), 1e-300);
    double spread = 0.0;
    for (int i = 0; i < n_starts; ++i) {
        if (!out.all[i].converged) continue;
        Vec2 zi = refine_peak(out.all[i].field);
        for (int j = i + 1; j < n_starts; ++j) {
            if (!out.all[j].converged) continue;
            spread = std::max(spread, dist(zi, refine_peak(out.all[j].field)));
        }
    }
    out.peak_spread = spread;
    return out;
}

namespace {

enum class Regime { Subcritical, Critical, Supercritical };

Regime regime_of(double a, double a_star) {
    if (a > a_star * (1.0 + 1e-10)) return Regime::Supercritical;
    if (a >= a_star * (1.0 - 1e-10)) return Regime::Critical;
    return Regime::Subcritical;
}

// Warm start for the next (smaller) b: previous solution re-centered on its
// peak and contracted by the predicted blow-up scale ratio.
Field2D rescale_warm_start(const Field2D& prev, Vec2 z, double scale_ratio) {
    Field2D out(prev.grid);
    double inv = 1.0 / scale_ratio;
    for (int i = 0; i < prev.grid.n; ++i) {
        double x = prev.grid.coord(i);
        for (int j = 0; j < prev.grid.n; ++j) {
            double y = prev.grid.coord(j);
            out.at(i, j) =
                inv * bilinear(prev, z.x + (x - z.x) * inv, z.y + (y - z.y) * inv);
        }
    }
    enforce_boundary(out);
    return out;
}

}  // namespace

SweepResult sweep_b(const Problem& problem, const std::vector<double>& b_list,
                    const MinimizeConfig& config, const SweepContext& ctx) {
    if (b_list.empty()) throw std::invalid_argument("sweep_b: empty b list");
    for (size_t i = 0; i < b_list.size(); ++i) {
        if (!(b_list[i] > 0.0)) throw std::invalid_argument("sweep_b: b values must be > 0");
        if (i > 0 && !(b_list[i] < b_list[i - 1]))
            throw std::invalid_argument("sweep_b: b values must be strictly decreasing");
    }
    if (!ctx.profile) throw std::invalid_argument("sweep_b: context requires a radial profile");
    validate(config);

    SweepResult sweep;
    sweep.a = problem.a;
    sweep.a_star = ctx.constants.a_star;
    if (ctx.analysis) {
        sweep.p = ctx.analysis->p;
        sweep.lambda0 = ctx.analysis->lambda0;
    }
    Regime regime = regime_of(problem.a, sweep.a_star);

    auto eps_theory_for = [&](double b) -> double {
        if (regime == Regime::Supercritical)
            return std::sqrt(b * sweep.a_star / (problem.a - sweep.a_star));
        if (regime == Regime::Critical && ctx.analysis)
            return std::pow(2.0 * b * sweep.a_star / (sweep.p * sweep.lambda0),
                            1.0 / (sweep.p + 4.0));
        return kNaN;
    };

    std::optional<MinimizerResult> prev;
    double prev_eps = kNaN;

    for (double b : b_list) {
        Problem pb = problem;
        pb.b = b;
        MinimizeConfig cfg = config;
        double eps_th = eps_theory_for(b);
        if (prev && prev->converged) {
            double ratio = (std::isfinite(eps_th) && std::isfinite(prev_eps))
                               ? eps_th / prev_eps
                               : 1.0;
            cfg.init.kind = InitKind::FieldSnapshot;
            cfg.init.snapshot = rescale_warm_start(prev->field, refine_peak(prev->field), ratio);
        }
        MinimizerResult res = minimize(pb, cfg);

        double trial_energy = kNaN;
        if (ctx.trial_restart) {
            std::optional<Field2D> trial;
            if (problem.potential && ctx.analysis) {
                TrialState ts = trial_upper_bound(problem.a, b, *problem.potential, *ctx.analysis,
                                                  *ctx.profile, ctx.constants, config.grid);
                trial_energy = ts.energy;
                trial = std::move(ts.field);
            } else if (!problem.potential && regime == Regime::Supercritical) {
                UbarField ub = u_bar_field(problem.a, b, config.grid, *ctx.profile, sweep.a_star);
                Field2D f = normalize(ub.field);
                trial_energy = energy(f, problem.a, b).total;
                trial = std::move(f);
            }
            if (trial && (!res.converged || res.breakdown.total > trial_energy + 1e-12)) {
                MinimizeConfig cfg2 = config;
                cfg2.init.kind = InitKind::FieldSnapshot;
                cfg2.init.snapshot = std::move(*trial);
                MinimizerResult res2 = minimize(pb, cfg2);
                bool take = res2.converged &&
                            (!res.converged || res2.breakdown.total < res.breakdown.total);
                if (take) res = std::move(res2);
            }
        }

        SweepRow row;
        row.b = b;
        row.energy = res.breakdown.total;
        row.theta = res.integrals.theta;
        row.l4 = res.integrals.l4;
        row.v_integral = res.v_integral;
        row.mu = res.mu;
        row.z = res.converged ? refine_peak(res.field) : res.peak;
        row.eps_meas = res.integrals.theta > 0.0 ? 1.0 / std::sqrt(res.integrals.theta) : kNaN;
        row.eps_theory = eps_th;
        row.iters = res.iterations;
        row.converged = res.converged;
        row.resolution_ok = !std::isfinite(eps_th) || config.grid.h() <= 0.25 * eps_th;
        row.trial_energy = trial_energy;
        row.l2_dist = row.h1_dist = row.decay_c = kNaN;
        if (res.converged) {
            try {
                RescaledProfile w = rescale_profile(res, ctx.reference_grid);
                ProfileDistance d = profile_distance(w, *ctx.profile);
                row.l2_dist = d.l2;
                row.h1_dist = d.h1;
                row.decay_c = decay_constant(w.w);
            } catch (const numeric_error&) {
                // unresolved rescaling: distances stay NaN
            }
        }
        sweep.rows.push_back(std::move(row));

        if (res.status == SolveStatus::BlowupDetected) {
            sweep.aborted = true;
            break;
        }
        prev = std::move(res);
        prev_eps = std::isfinite(eps_th) ? eps_th
                                         : (prev->integrals.theta > 0.0
                                                ? 1.0 / std::sqrt(prev->integrals.theta)
                                                : kNaN);
    }
    return sweep;
}

}  // namespace kirchhoff
