#include "kirchhoff/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace kirchhoff {

namespace {
constexpr double kPi = std::numbers::pi_v<double>;
}

double WellSpec::local(Vec2 x) const {
    double r2 = x.x * x.x + x.y * x.y;
    switch (model) {
        case WellModel::Isotropic:
            return c * std::pow(r2, 0.5 * degree);
        case WellModel::Anisotropic:
            return c1 * x.x * x.x + c2 * x.y * x.y;
        case WellModel::Dihedral: {
            if (r2 == 0.0) return 0.0;
            double th = std::atan2(x.y, x.x);
            return c * std::pow(r2, 0.5 * degree) * (1.0 + kappa * std::cos(k_fold * th));
        }
    }
    return 0.0;
}

void validate(const WellSpec& w) {
    if (!(w.degree > 0.0)) throw std::invalid_argument("well: degree must be > 0");
    switch (w.model) {
        case WellModel::Isotropic:
            if (!(w.c > 0.0)) throw std::invalid_argument("well: c must be > 0");
            break;
        case WellModel::Anisotropic:
            if (w.degree != 2.0)
                throw std::invalid_argument("well: anisotropic model requires degree 2");
            if (!(w.c1 > 0.0) || !(w.c2 > 0.0))
                throw std::invalid_argument("well: c1, c2 must be > 0");
            break;
        case WellModel::Dihedral:
            if (!(w.c > 0.0)) throw std::invalid_argument("well: c must be > 0");
            if (!(std::abs(w.kappa) < 1.0))
                throw std::invalid_argument("well: |kappa| must be < 1");
            if (w.k_fold < 1) throw std::invalid_argument("well: k must be >= 1");
            break;
    }
}

void validate(const PotentialSpec& spec) {
    if (spec.wells.empty()) throw std::invalid_argument("potential: at least one well required");
    if (spec.composition == Composition::Single && spec.wells.size() != 1)
        throw std::invalid_argument("potential: SINGLE composition takes exactly one well");
    for (const auto& w : spec.wells) validate(w);
    // distinct zeros
    for (size_t i = 0; i < spec.wells.size(); ++i)
        for (size_t j = i + 1; j < spec.wells.size(); ++j)
            if (dist(spec.wells[i].location, spec.wells[j].location) < 1e-9)
                throw std::invalid_argument("potential: wells must have distinct locations");
}

double eval_potential(const PotentialSpec& spec, Vec2 x) {
    if (spec.composition == Composition::Single)
        return spec.wells[0].local({x.x - spec.wells[0].location.x, x.y - spec.wells[0].location.y});
    double v = 1.0;
    for (const auto& w : spec.wells)
        v *= w.local({x.x - w.location.x, x.y - w.location.y});
    return v;
}

WellSpec effective_local_model(const PotentialSpec& spec, int i) {
    if (i < 0 || (size_t)i >= spec.wells.size())
        throw std::invalid_argument("effective_local_model: well index out of range");
    WellSpec w = spec.wells[i];
    if (spec.composition == Composition::Product) {
        double factor = 1.0;
        for (size_t j = 0; j < spec.wells.size(); ++j) {
            if ((int)j == i) continue;
            const auto& o = spec.wells[j];
            factor *= o.local({w.location.x - o.location.x, w.location.y - o.location.y});
        }
        w.c *= factor;
        w.c1 *= factor;
        w.c2 *= factor;
    }
    return w;
}

Field2D sample_potential(const PotentialSpec& spec, const GridSpec& grid) {
    validate(spec);
    validate(grid);
    Field2D V(grid);
    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j)
            V.at(i, j) = eval_potential(spec, {grid.coord(i), grid.coord(j)});
    return V;
}

namespace {

// Polar quadrature rule with radial weights r Q^2(r) baked in: Gauss-Legendre
// 4-point panels to r=14 on the samples plus tail panels on the fitted decay,
// uniform trapezoid in the angle (periodic, so spectrally accurate).
struct HQuadrature {
    std::vector<double> r_nodes;
    std::vector<double> r_weights;  // w * r * Q^2(r)
    std::vector<double> cos_phi, sin_phi;
    double phi_weight = 0.0;

    explicit HQuadrature(const RadialProfile& profile) {
        static constexpr std::array<double, 4> gx = {-0.8611363115940526, -0.3399810435848563,
                                                     0.3399810435848563, 0.8611363115940526};
        static constexpr std::array<double, 4> gw = {0.3478548451374538, 0.6521451548625461,
                                                     0.6521451548625461, 0.3478548451374538};
        const double core = 14.0, tail_end = 30.0;
        const int core_panels = 70, tail_panels = 32;
        auto add_panels = [&](double a, double b, int panels) {
            double width = (b - a) / panels;
            for (int p = 0; p < panels; ++p) {
                double mid = a + (p + 0.5) * width;
                for (int g = 0; g < 4; ++g) {
                    double r = mid + 0.5 * width * gx[g];
                    double q = profile.value(r);
                    r_nodes.push_back(r);
                    r_weights.push_back(0.5 * width * gw[g] * r * q * q);
                }
            }
        };
        add_panels(0.0, core, core_panels);
        add_panels(core, tail_end, tail_panels);
        const int nphi = 96;
        phi_weight = 2.0 * kPi / nphi;
        for (int k = 0; k < nphi; ++k) {
            double phi = phi_weight * k;
            cos_phi.push_back(std::cos(phi));
            sin_phi.push_back(std::sin(phi));
        }
    }
};

double h_eval(const HQuadrature& quad, const WellSpec& well, Vec2 y) {
    double total = 0.0;
    for (size_t ir = 0; ir < quad.r_nodes.size(); ++ir) {
        double r = quad.r_nodes[ir];
        double ring = 0.0;
        for (size_t k = 0; k < quad.cos_phi.size(); ++k)
            ring += well.local({r * quad.cos_phi[k] + y.x, r * quad.sin_phi[k] + y.y});
        total += quad.r_weights[ir] * ring;
    }
    return total * quad.phi_weight;
}

struct MinimizeH {
    Vec2 y_star;
    double value = 0.0;
    double grad_norm = 0.0;
    bool converged = false;
};

// BFGS in 2D with central-difference gradients and backtracking line search.
MinimizeH minimize_h(const HQuadrature& quad, const WellSpec& well) {
    auto f = [&](Vec2 y) { return h_eval(quad, well, y); };
    auto grad = [&](Vec2 y) -> Vec2 {
        double e = 1e-5 * (1.0 + std::abs(y.x) + std::abs(y.y));
        return {(f({y.x + e, y.y}) - f({y.x - e, y.y})) / (2 * e),
                (f({y.x, y.y + e}) - f({y.x, y.y - e})) / (2 * e)};
    };

    MinimizeH best;
    best.value = std::numeric_limits<double>::infinity();
    for (int si = 0; si < 5; ++si)
        for (int sj = 0; sj < 5; ++sj) {
            Vec2 y = {-3.0 + 1.5 * si, -3.0 + 1.5 * sj};
            double fy = f(y);
            Vec2 g = grad(y);
            double scale = std::max(1.0, std::abs(fy));
            // inverse Hessian estimate
            double b11 = 1.0, b12 = 0.0, b22 = 1.0;
            bool ok = false;
            for (int it = 0; it < 80; ++it) {
                double gn = std::hypot(g.x, g.y);
                if (gn <= 1e-7 * scale) {
                    ok = true;
                    break;
                }
                Vec2 d = {-(b11 * g.x + b12 * g.y), -(b12 * g.x + b22 * g.y)};
                if (d.x * g.x + d.y * g.y >= 0.0) {  // reset on loss of descent
                    b11 = b22 = 1.0;
                    b12 = 0.0;
                    d = {-g.x, -g.y};
                }
                double step = 1.0;
                Vec2 yn;
                double fn = 0.0;
                bool accepted = false;
                for (int ls = 0; ls < 40; ++ls) {
                    yn = {y.x + step * d.x, y.y + step * d.y};
                    fn = f(yn);
                    if (fn <= fy + 1e-4 * step * (d.x * g.x + d.y * g.y)) {
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                }
                if (!accepted) break;
                Vec2 gn2 = grad(yn);
                double sx = yn.x - y.x, sy = yn.y - y.y;
                double qx = gn2.x - g.x, qy = gn2.y - g.y;
                double sq = sx * qx + sy * qy;
                if (sq > 1e-14) {  // BFGS inverse update
                    double bqx = b11 * qx + b12 * qy, bqy = b12 * qx + b22 * qy;
                    double qbq = qx * bqx + qy * bqy;
                    double alpha = (sq + qbq) / (sq * sq);
                    b11 += alpha * sx * sx - 2.0 * bqx * sx / sq;
                    b12 += alpha * sx * sy - (bqx * sy + bqy * sx) / sq;
                    b22 += alpha * sy * sy - 2.0 * bqy * sy / sq;
                }
                y = yn;
                fy = fn;
                g = gn2;
            }
            if (ok && fy < best.value) {
                best.value = fy;
                best.y_star = y;
                best.grad_norm = std::hypot(g.x, g.y);
                best.converged = true;
            }
        }
    return best;
}

}  // namespace

double h_function(const WellSpec& well, const RadialProfile& profile, Vec2 y) {
    validate(well);
    if (well.degree > 8.0)
        throw numeric_error("h_function: degree too large for the fixed quadrature box");
    HQuadrature quad(profile);
    return h_eval(quad, well, y);
}

WellAnalysis analyze_wells(const PotentialSpec& spec, const RadialProfile& profile) {
    validate(spec);
    HQuadrature quad(profile);

    WellAnalysis out;
    for (size_t i = 0; i < spec.wells.size(); ++i) {
        WellSpec eff = effective_local_model(spec, (int)i);
        MinimizeH mh = minimize_h(quad, eff);
        WellReport rep;
        rep.index = (int)i + 1;
        rep.degree = eff.degree;
        rep.lambda = mh.value;
        rep.y_star = mh.y_star;
        rep.grad_norm = mh.grad_norm;
        rep.converged = mh.converged;
        if (!mh.converged) out.all_converged = false;
        out.wells.push_back(rep);
    }

    out.p = 0.0;
    for (const auto& w : out.wells) out.p = std::max(out.p, w.degree);
    for (const auto& w : out.wells)
        if (w.degree == out.p) out.zbar.push_back(w.index);

    out.lambda0 = std::numeric_limits<double>::infinity();
    for (int idx : out.zbar) {
        const auto& w = out.wells[idx - 1];
        if (w.converged) out.lambda0 = std::min(out.lambda0, w.lambda);
    }
    if (!std::isfinite(out.lambda0))
        throw numeric_error("analyze_wells: no converged well among the max-degree set");
    const double tie = 1e-6 * std::max(1.0, std::abs(out.lambda0));
    for (int idx : out.zbar) {
        const auto& w = out.wells[idx - 1];
        if (w.converged && w.lambda <= out.lambda0 + tie) out.z0.push_back(idx);
    }
    return out;
}

}  // namespace kirchhoff
