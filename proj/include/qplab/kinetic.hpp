#pragma once

#include <optional>
#include <vector>

#include "qplab/constants.hpp"
#include "qplab/functionals.hpp"
#include "qplab/grid.hpp"

namespace qplab {

// Local velocity moments of free phase-space Brownian motion in the
// large-friction regime. `u` here is the phase-space velocity coordinate,
// not the osmotic velocity.
struct LocalMoments {
    double time = 0.0;
    GridPdf w;            // heat kernel (4 pi D t)^{-1/2} exp(-x^2 / 4Dt)
    GridField u_mean;     // <u>_x = x / 2t
    GridField u2_mean;    // <u^2>_x = (D beta - D/2t) + <u>_x^2
    GridField P_kin;      // (<u^2>_x - <u>_x^2) w
    GridField P_osm;      // D^2 w Delta ln w
    GridField Theta_kin;  // m P_kin / w
    GridField Theta_osm;  // -m D^2 Delta ln w
    double kbt = 0.0;
};

// Default grid: [-8 s, 8 s] with s^2 = 2Dt.
Grid large_friction_grid(double t, const PhysicalConstants& c, std::size_t n_points = 6001);

// RegimeError for t <= 1 / (2 beta).
LocalMoments large_friction_moments(double t, const PhysicalConstants& c, std::optional<Grid> grid = std::nullopt);

// max |<u>_x + D grad ln w| over unmasked nodes.
double mean_velocity_consistency(const LocalMoments& m, const PhysicalConstants& c);

// max |Theta_kin + Theta_osm - k_B T| over unmasked nodes.
double temperature_balance(const LocalMoments& m);

struct PressureBalance {
    GridField kinetic;     // -grad P_kin / w - beta <u>_x + grad P_osm / w
    GridField transport;   // (d_t + v grad) v + grad P_osm / w, v = <u>_x
    GridField quantum;     // -grad P_osm / w - (1/m) grad Q
    GridField momentum;    // (d_t + v grad) v + beta v + grad P_kin / w
    GridField osmotic;     // -grad P_osm - (D/2t) grad w
    double max_abs = 0.0;  // over all five, inside the core
};

// Residuals of the pressure balances; time derivatives from moments at
// t -+ 1e-4 t. `core` restricts the maxima to w >= core * max w.
PressureBalance pressure_balance_residual(const LocalMoments& m, const PhysicalConstants& c,
                                          double core = 0.1353352832366127);

struct ThermalLaw {
    double lhs = 0.0;       // (d_t + v grad) Theta_osm
    double rhs = 0.0;       // -2 (grad v) Theta_osm
    double expected = 0.0;  // -m D / 2t^2
};
// Evaluated at the node nearest x.
ThermalLaw thermal_energy_law(double t, const PhysicalConstants& c, double x = 0.0,
                              std::optional<Grid> grid = std::nullopt);

// One time level of a hydrodynamic flow.
struct FlowSnapshot {
    GridPdf rho;
    GridField v;
    double time = 0.0;
};

// Co-moving interval balances between two snapshots, endpoints shifted by
// v dt as alpha -> alpha + v(alpha) dt. Rates are forward differences;
// right-hand sides are evaluated at the earlier snapshot. For quantum
// motion the (V + Q) terms change sign and P = -P_osm.
struct DropletBalance {
    double time = 0.0;
    double dt = 0.0;
    double mass_rate = 0.0;          // -> 0
    double mass_flux = 0.0;          // max(|rho v|) at the ends, the scale of (i)
    double momentum_rate = 0.0;
    double momentum_rhs = 0.0;       // +- int rho (1/m) grad(V + Q)
    double momentum_pressure = 0.0;  // +- (1/m) E[grad V] + P(alpha) - P(beta)
    double energy_rate = 0.0;
    double energy_rhs = 0.0;         // +- int (rho v) (1/m) grad(V + Q)
    double power_lhs = 0.0;          // int rho v grad Q
    double power_rhs = 0.0;          // -m int v grad P_osm
    double dominant = 0.0;           // largest magnitude among the terms above

    double mass_closure() const;      // |mass_rate| / dominant
    double momentum_closure() const;  // |rate - rhs| / dominant
    double energy_closure() const;
    double power_closure() const;     // relative gap of the power-release identity
};

DropletBalance droplet_balances(const FlowSnapshot& now, const FlowSnapshot& next, const GridField& potential,
                                double alpha, double beta, Motion motion, const PhysicalConstants& c);

// Power-release identity on [alpha, beta] for one snapshot.
struct PowerRelease {
    double lhs = 0.0;  // int rho v grad Q
    double rhs = 0.0;  // -m int v grad P_osm
};
PowerRelease power_release(const FlowSnapshot& s, double alpha, double beta, const PhysicalConstants& c);

struct HeatTransfer {
    GridField theta;       // Theta_osm at the centre
    GridField heat;        // q = -(1/2) m D^2 rho Delta v
    GridField lhs;         // (d_t + v grad) Theta_osm
    GridField rhs;         // -2 grad q / rho - 2 (grad v) Theta_osm
    GridField reduced;     // lhs + 2 (grad v) Theta_osm (the q-free form)
    GridField residual;    // lhs - rhs
    double max_residual = 0.0;
    double max_heat_term = 0.0;  // max |2 grad q / rho|
    double scale = 0.0;          // max |lhs|
};

// Heat-transfer balance at `centre` with the time derivative from the
// neighbouring snapshots. Maxima over nodes where rho >= core * peak.
HeatTransfer quantum_heat_transfer_residual(const FlowSnapshot& before, const FlowSnapshot& centre,
                                            const FlowSnapshot& after, const PhysicalConstants& c,
                                            double core = 1e-3);

}  // namespace qplab
