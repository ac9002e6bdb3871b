#pragma once

#include <string>
#include <vector>

#include "kirchhoff/field.hpp"
#include "kirchhoff/ground_state.hpp"

namespace kirchhoff {

enum class WellModel { Isotropic, Anisotropic, Dihedral };

/// Homogeneous local well model V_i of degree p_i: one of
///   Isotropic    c |x|^p
///   Anisotropic  c1 x1^2 + c2 x2^2          (p = 2)
///   Dihedral     c |x|^p (1 + kappa cos(k atan2(y,x))), |kappa| < 1
struct WellSpec {
    Vec2 location;
    double degree = 2.0;
    WellModel model = WellModel::Isotropic;
    double c = 1.0;
    double c1 = 1.0, c2 = 1.0;
    double kappa = 0.0;
    int k_fold = 2;

    /// Local model evaluated in well-centered coordinates.
    double local(Vec2 x) const;
};

void validate(const WellSpec& w);

enum class Composition { Product, Single };

/// Coercive multi-well potential; Product composes V(x) = prod_i V_i(x-x_i),
/// Single is one well's local model. envelope stores the e^{beta|x|} growth
/// bound parameters (metadata for the uniqueness hypothesis).
struct PotentialSpec {
    Composition composition = Composition::Single;
    std::vector<WellSpec> wells;
    struct Envelope {
        double C = 0.0;
        double beta = 0.0;
    } envelope;
};

void validate(const PotentialSpec& spec);

double eval_potential(const PotentialSpec& spec, Vec2 x);

/// Local model at well i with the nonzero product factors absorbed into the
/// constant, so V(x_i + x) / local(x) -> 1 as x -> 0.
WellSpec effective_local_model(const PotentialSpec& spec, int i);

/// Sample the potential on a grid for the solver.
Field2D sample_potential(const PotentialSpec& spec, const GridSpec& grid);

/// H_i(y) = int V_i(x + y) Q^2(x) dx by polar tensor quadrature.
double h_function(const WellSpec& well, const RadialProfile& profile, Vec2 y);

struct WellReport {
    int index = 0;       // 1-based well index
    double degree = 0.0;
    double lambda = 0.0;  // min_y H_i(y)
    Vec2 y_star;
    double grad_norm = 0.0;
    bool converged = false;
};

struct WellAnalysis {
    std::vector<WellReport> wells;
    double p = 0.0;              // max degree
    std::vector<int> zbar;       // 1-based indices with degree == p
    double lambda0 = 0.0;        // min lambda over zbar
    std::vector<int> z0;         // flattest wells (lambda within tie tolerance)
    bool all_converged = true;
};

/// Per-well minimization of H_i by multi-start BFGS from a 5x5 seed lattice
/// in [-3,3]^2; aggregates p, Zbar, lambda0, Z0.
WellAnalysis analyze_wells(const PotentialSpec& spec, const RadialProfile& profile);

}  // namespace kirchhoff
