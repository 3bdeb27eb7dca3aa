#pragma once

#include <vector>

#include "qplab/constants.hpp"
#include "qplab/grid.hpp"

namespace qplab {

// Both forms of the potential compatible with a stationary density:
// V = 2 m D^2 Delta rho_*^{1/2} / rho_*^{1/2} and V = m D [b^2/2D + grad b]
// with b = D grad ln rho_*.
struct CompatibilityForms {
    GridField root_form;
    GridField drift_form;
    GridField drift;       // b
    double relative_gap = 0.0;  // max |root - drift| / max |root| on unmasked interior nodes
};
CompatibilityForms compatibility_forms(const GridPdf& rho_star, const PhysicalConstants& c);

// The forms agree to O(h^2); on the acceptance grid (h = 1e-3) the gap is
// below this tolerance.
inline constexpr double kCompatibilityTolerance = 1e-5;

// Root form of V. It uses the same three-point stencil as the evolvers, so
// rho_*^{1/2} is an exact discrete zero mode.
GridField compatibility_potential(const GridPdf& rho_star, const PhysicalConstants& c);

// b = D grad ln rho_*.
GridField stationary_drift(const GridPdf& rho_star, const PhysicalConstants& c);

struct SemigroupState {
    GridField psi;
    double time = 0.0;
};

// Crank-Nicolson stepping of d Psi/dt = [D Delta - V/2mD] Psi with Psi = 0 at
// the boundary nodes. The first two steps are replaced by four backward-Euler
// half steps so rough data does not ring. Returns steps 0, k, 2k, ... and the
// last one. V must be renormalized (discrete ground value >= 0, checked);
// StabilityError when Psi turns negative.
std::vector<SemigroupState> evolve_semigroup(const GridField& psi0, const GridField& potential,
                                             const PhysicalConstants& c, double dt, std::size_t n_steps,
                                             std::size_t record_every = 1);

// rho = Psi rho_*^{1/2}.
GridPdf semigroup_density(const SemigroupState& state, const GridPdf& rho_star);

// Psi_0 = rho_0 / rho_*^{1/2}.
GridField semigroup_initial(const GridPdf& rho0, const GridPdf& rho_star);

struct DensitySnapshot {
    GridPdf rho;
    double time = 0.0;
};

// Conservative Scharfetter-Gummel finite volumes for
// d rho/dt = D Delta rho - grad(b rho) with zero flux at both ends, stepped
// like evolve_semigroup. Trapezoid mass is conserved to round-off. BoxError
// when more than 1e-6 of the mass sits in the boundary bands, StabilityError
// on negative density.
std::vector<DensitySnapshot> evolve_fokker_planck(const GridPdf& rho0, const GridField& drift,
                                                  const PhysicalConstants& c, double dt, std::size_t n_steps,
                                                  std::size_t record_every = 1);

// Hydrodynamic fields of a diffusion: u = D grad ln rho, v = b - u.
struct BrownianFields {
    GridPdf rho;
    GridField u;
    GridField v;
    GridField Q;
    double time = 0.0;
};
BrownianFields brownian_fields(const DensitySnapshot& snap, const GridField& drift, const PhysicalConstants& c);

// H^- = <(m/2)(v^2 - u^2) - V>.
double brownian_invariant(const BrownianFields& f, const GridField& potential, const PhysicalConstants& c);

struct BrownianResidual {
    GridField gradient_form;  // dv/dt + v grad v - (1/m) grad(V + Q), at the midpoint
    double max_gradient_form = 0.0;
    std::vector<double> h_minus;      // per snapshot
    std::vector<double> osmotic_energy;  // <(m/2) u^2> per snapshot
    double max_relative_h_minus = 0.0;   // max |H^-| / <(m/2) u^2>
};

// Residuals along a Fokker-Planck run. The gradient form is evaluated between
// the last two snapshots on nodes where rho exceeds `core` times its peak.
BrownianResidual brownian_hydro_residuals(const std::vector<DensitySnapshot>& snaps, const GridField& drift,
                                          const GridField& potential, const PhysicalConstants& c,
                                          double core = 1e-6);

// Residual of the gradient-form Brownian law between two snapshots.
GridField brownian_gradient_residual(const BrownianFields& before, const BrownianFields& after,
                                     const GridField& potential, const PhysicalConstants& c, double core = 1e-6);

}  // namespace qplab
