#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace kirchhoff {

/// Numerical failure (non-convergence, blow-up, accuracy loss). Contract
/// violations use std::invalid_argument instead.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double dist(Vec2 a, Vec2 b) {
    double dx = a.x - b.x, dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

enum class Boundary { DirichletZero };

/// Uniform square grid on [-L, L]^2 with n points per axis.
struct GridSpec {
    double half_width = 0.0;
    int n = 0;
    Boundary boundary = Boundary::DirichletZero;

    double h() const { return 2.0 * half_width / (n - 1); }
    double coord(int i) const { return -half_width + i * h(); }
    bool operator==(const GridSpec& o) const {
        return half_width == o.half_width && n == o.n && boundary == o.boundary;
    }
};

void validate(const GridSpec& g);

/// Real scalar field sampled on a GridSpec; values are zero on the boundary
/// ring under DirichletZero. Value type, safe to copy/share.
struct Field2D {
    GridSpec grid;
    std::vector<double> values;  // row-major, index i*n + j for (x_i, y_j)

    Field2D() = default;
    explicit Field2D(const GridSpec& g) : grid(g), values((size_t)g.n * g.n, 0.0) {}

    double& at(int i, int j) { return values[(size_t)i * grid.n + j]; }
    double at(int i, int j) const { return values[(size_t)i * grid.n + j]; }
};

/// Zero the boundary ring in place.
void enforce_boundary(Field2D& u);

struct FieldIntegrals {
    double mass = 0.0;   // integral of u^2
    double theta = 0.0;  // integral of |grad u|^2
    double l4 = 0.0;     // integral of u^4
};

struct EnergyBreakdown {
    double kinetic = 0.0;      // theta / 2
    double potential = 0.0;    // integral of V u^2 / 2
    double kirchhoff = 0.0;    // (b/4) theta^2
    double interaction = 0.0;  // -(a/4) integral of u^4
    double total = 0.0;
};

FieldIntegrals field_integrals(const Field2D& u);

double mass(const Field2D& u);
double theta(const Field2D& u);

/// Grid quadrature of f*g (trapezoid weights; exact plain sum for fields
/// vanishing on the ring).
double inner(const Field2D& f, const Field2D& g);

double l2_norm(const Field2D& f);

/// -Laplacian (Dirichlet zero outside the grid), matched to theta so that
/// inner(u, neg_laplacian(u)) == theta(u) to rounding.
Field2D neg_laplacian(const Field2D& u);

/// Rescale to unit mass. Throws std::invalid_argument on a zero field.
Field2D normalize(const Field2D& u);

/// Energy of E_a^b; pass V = nullptr for the auxiliary functional without
/// potential. V must share u's grid.
EnergyBreakdown energy(const Field2D& u, double a, double b, const Field2D* V = nullptr);

/// l4 * a_star / (2 theta mass); 1 at Q-shaped fields in the continuum.
double gn_ratio(const Field2D& u, double a_star);

/// Unprojected L2 gradient  -(1 + b theta) lap u + V u - a u^3.
Field2D l2_gradient(const Field2D& u, double a, double b, const Field2D* V = nullptr);

/// Multiplier theta + int V u^2 + b theta^2 - a int u^4 at unit mass.
double lagrange_mu(const Field2D& u, double a, double b, const Field2D* V = nullptr);

/// || l2_gradient - mu u ||_2; zero at discrete critical points.
double el_residual(const Field2D& u, double a, double b, const Field2D* V = nullptr);

/// Grid argmax.
struct PeakInfo {
    int i = 0, j = 0;
    Vec2 point;
    double value = 0.0;
};
PeakInfo grid_peak(const Field2D& u);

/// Sub-grid peak via quadratic interpolation on the 3x3 stencil around the
/// discrete argmax.
Vec2 refine_peak(const Field2D& u);

/// Bilinear sample at an arbitrary point (zero outside the grid).
double bilinear(const Field2D& u, double x, double y);

}  // namespace kirchhoff
