#include "kirchhoff/field.hpp"

#include <algorithm>
#include <cmath>

namespace kirchhoff {

void validate(const GridSpec& g) {
    if (g.n < 32) throw std::invalid_argument("GridSpec: n must be >= 32");
    if (!(g.half_width > 0.0)) throw std::invalid_argument("GridSpec: half_width must be > 0");
}

void enforce_boundary(Field2D& u) {
    int n = u.grid.n;
    for (int j = 0; j < n; ++j) {
        u.at(0, j) = 0.0;
        u.at(n - 1, j) = 0.0;
    }
    for (int i = 0; i < n; ++i) {
        u.at(i, 0) = 0.0;
        u.at(i, n - 1) = 0.0;
    }
}

namespace {

void check_same_grid(const Field2D& a, const Field2D& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("fields live on different grids");
}

// Fourth-order axis stencil [-1 16 -30 16 -1]/(12 h^2); its quadratic form is
// the theta below, so discrete integration by parts is an identity.
void apply_neg_laplacian(const Field2D& u, Field2D& out) {
    int n = u.grid.n;
    double c = 1.0 / (12.0 * u.grid.h() * u.grid.h());
    const double* v = u.values.data();
    double* o = out.values.data();
    auto val = [&](int i, int j) -> double {
        return (i < 0 || i >= n || j < 0 || j >= n) ? 0.0 : v[(size_t)i * n + j];
    };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double center = v[(size_t)i * n + j];
            double s = 60.0 * center;
            s -= 16.0 * (val(i - 1, j) + val(i + 1, j) + val(i, j - 1) + val(i, j + 1));
            s += val(i - 2, j) + val(i + 2, j) + val(i, j - 2) + val(i, j + 2);
            o[(size_t)i * n + j] = c * s;
        }
}

// theta = sum over axis lines of (16 S1 - S2)/12 with S1 the squared first
// differences and S2 the squared second-neighbor differences, both including
// the zero-padded boundary pairs. Matches apply_neg_laplacian exactly.
double theta_form(const Field2D& u) {
    int n = u.grid.n;
    const double* v = u.values.data();
    long double s1 = 0.0L, s2 = 0.0L;
    for (int i = 0; i < n; ++i) {
        const double* row = v + (size_t)i * n;
        for (int j = 0; j + 1 < n; ++j) {
            double d = row[j + 1] - row[j];
            s1 += (long double)d * d;
        }
        for (int j = 0; j + 2 < n; ++j) {
            double d = row[j + 2] - row[j];
            s2 += (long double)d * d;
        }
        s2 += (long double)row[1] * row[1] + (long double)row[n - 2] * row[n - 2];
    }
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i + 1 < n; ++i) {
            double d = v[(size_t)(i + 1) * n + j] - v[(size_t)i * n + j];
            s1 += (long double)d * d;
        }
        for (int i = 0; i + 2 < n; ++i) {
            double d = v[(size_t)(i + 2) * n + j] - v[(size_t)i * n + j];
            s2 += (long double)d * d;
        }
        s2 += (long double)v[(size_t)1 * n + j] * v[(size_t)1 * n + j];
        s2 += (long double)v[(size_t)(n - 2) * n + j] * v[(size_t)(n - 2) * n + j];
    }
    return (double)((16.0L * s1 - s2) / 12.0L);
}

}  // namespace

FieldIntegrals field_integrals(const Field2D& u) {
    validate(u.grid);
    double h2 = u.grid.h() * u.grid.h();
    long double m = 0.0L, q = 0.0L;
    for (double v : u.values) {
        if (!std::isfinite(v)) throw numeric_error("field_integrals: non-finite value");
        long double v2 = (long double)v * v;
        m += v2;
        q += v2 * v2;
    }
    FieldIntegrals out;
    out.mass = (double)(m * h2);
    out.l4 = (double)(q * h2);
    out.theta = theta_form(u);
    return out;
}

double mass(const Field2D& u) {
    double h2 = u.grid.h() * u.grid.h();
    long double m = 0.0L;
    for (double v : u.values) m += (long double)v * v;
    return (double)(m * h2);
}

double theta(const Field2D& u) { return theta_form(u); }

double inner(const Field2D& f, const Field2D& g) {
    check_same_grid(f, g);
    long double s = 0.0L;
    for (size_t k = 0; k < f.values.size(); ++k) s += (long double)f.values[k] * g.values[k];
    return (double)(s * f.grid.h() * f.grid.h());
}

double l2_norm(const Field2D& f) { return std::sqrt(mass(f)); }

Field2D neg_laplacian(const Field2D& u) {
    Field2D out(u.grid);
    apply_neg_laplacian(u, out);
    return out;
}

Field2D normalize(const Field2D& u) {
    double m = mass(u);
    if (!(m > 0.0)) throw std::invalid_argument("normalize: zero field");
    Field2D out = u;
    double s = 1.0 / std::sqrt(m);
    for (double& v : out.values) v *= s;
    return out;
}

EnergyBreakdown energy(const Field2D& u, double a, double b, const Field2D* V) {
    if (a < 0.0 || b < 0.0) throw std::invalid_argument("energy: a, b must be >= 0");
    FieldIntegrals I = field_integrals(u);
    EnergyBreakdown e;
    e.kinetic = 0.5 * I.theta;
    e.kirchhoff = 0.25 * b * I.theta * I.theta;
    e.interaction = -0.25 * a * I.l4;
    if (V) {
        check_same_grid(u, *V);
        long double s = 0.0L;
        for (size_t k = 0; k < u.values.size(); ++k)
            s += (long double)V->values[k] * u.values[k] * u.values[k];
        e.potential = 0.5 * (double)(s * u.grid.h() * u.grid.h());
    }
    e.total = e.kinetic + e.potential + e.kirchhoff + e.interaction;
    return e;
}

double gn_ratio(const Field2D& u, double a_star) {
    FieldIntegrals I = field_integrals(u);
    if (!(I.mass > 0.0) || !(I.theta > 0.0))
        throw std::invalid_argument("gn_ratio: degenerate field");
    return I.l4 * a_star / (2.0 * I.theta * I.mass);
}

Field2D l2_gradient(const Field2D& u, double a, double b, const Field2D* V) {
    double th = theta_form(u);
    Field2D g(u.grid);
    apply_neg_laplacian(u, g);
    double kin = 1.0 + b * th;
    size_t total = u.values.size();
    if (V) check_same_grid(u, *V);
    for (size_t k = 0; k < total; ++k) {
        double uv = u.values[k];
        double val = kin * g.values[k] - a * uv * uv * uv;
        if (V) val += V->values[k] * uv;
        g.values[k] = val;
    }
    return g;
}

double lagrange_mu(const Field2D& u, double a, double b, const Field2D* V) {
    FieldIntegrals I = field_integrals(u);
    if (std::abs(I.mass - 1.0) > 1e-8)
        throw std::invalid_argument("lagrange_mu: field must have unit mass");
    double vterm = 0.0;
    if (V) {
        check_same_grid(u, *V);
        long double s = 0.0L;
        for (size_t k = 0; k < u.values.size(); ++k)
            s += (long double)V->values[k] * u.values[k] * u.values[k];
        vterm = (double)(s * u.grid.h() * u.grid.h());
    }
    return I.theta + vterm + b * I.theta * I.theta - a * I.l4;
}

double el_residual(const Field2D& u, double a, double b, const Field2D* V) {
    double mu = lagrange_mu(u, a, b, V);
    Field2D g = l2_gradient(u, a, b, V);
    long double s = 0.0L;
    for (size_t k = 0; k < g.values.size(); ++k) {
        double d = g.values[k] - mu * u.values[k];
        s += (long double)d * d;
    }
    return std::sqrt((double)(s * u.grid.h() * u.grid.h()));
}

PeakInfo grid_peak(const Field2D& u) {
    int n = u.grid.n;
    PeakInfo p;
    p.value = u.values[0];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (u.at(i, j) > p.value) {
                p.value = u.at(i, j);
                p.i = i;
                p.j = j;
            }
    p.point = {u.grid.coord(p.i), u.grid.coord(p.j)};
    return p;
}

Vec2 refine_peak(const Field2D& u) {
    PeakInfo p = grid_peak(u);
    int n = u.grid.n;
    double h = u.grid.h();
    Vec2 z = p.point;
    if (p.i > 0 && p.i < n - 1) {
        double um = u.at(p.i - 1, p.j), u0 = u.at(p.i, p.j), up = u.at(p.i + 1, p.j);
        double denom = um - 2.0 * u0 + up;
        if (denom < 0.0) z.x += 0.5 * h * (um - up) / denom;
    }
    if (p.j > 0 && p.j < n - 1) {
        double um = u.at(p.i, p.j - 1), u0 = u.at(p.i, p.j), up = u.at(p.i, p.j + 1);
        double denom = um - 2.0 * u0 + up;
        if (denom < 0.0) z.y += 0.5 * h * (um - up) / denom;
    }
    return z;
}

double bilinear(const Field2D& u, double x, double y) {
    int n = u.grid.n;
    double h = u.grid.h(), L = u.grid.half_width;
    double fx = (x + L) / h, fy = (y + L) / h;
    if (fx < 0.0 || fy < 0.0 || fx > n - 1 || fy > n - 1) return 0.0;
    int i = std::min((int)fx, n - 2), j = std::min((int)fy, n - 2);
    double tx = fx - i, ty = fy - j;
    return (1 - tx) * (1 - ty) * u.at(i, j) + tx * (1 - ty) * u.at(i + 1, j) +
           (1 - tx) * ty * u.at(i, j + 1) + tx * ty * u.at(i + 1, j + 1);
}

}  // namespace kirchhoff
