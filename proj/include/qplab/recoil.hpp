#pragma once

#include <vector>

#include "qplab/constants.hpp"
#include "qplab/functionals.hpp"
#include "qplab/grid.hpp"
#include "qplab/paths.hpp"

namespace qplab {

// Shared matter data of the paired Brownian / anti-Brownian impulses.
struct MatterState {
    GridPdf rho;
    GridField v;
    double time = 0.0;
    PhysicalConstants constants;

    // rho normalized within 1e-5, v on the same grid
    void validate() const;
};

enum class ImpulseBranch { brownian, anti_brownian };
const char* impulse_branch_name(ImpulseBranch b);

// Q = -(hbar^2/2m) [Delta ln rho / 2 + (grad ln rho)^2 / 4], ln taken of
// max(rho, floor). Exact on quadratic ln rho, which keeps Gaussian data
// free of spatial error.
GridField log_quantum_potential(const GridPdf& rho, const PhysicalConstants& c);

// +-(1/m) grad(V + Q[rho]) dt, + for the Brownian pulse.
GridField impulse_pulse(const MatterState& s, const GridField& potential, double dt, ImpulseBranch branch);

struct ImpulseLog {
    GridField pulse;
    double mass_drift = 0.0;  // trapezoid mass change before renormalization
};

// One co-moving impulse in Eulerian form:
//   rho <- rho - grad(v rho) dt,  v <- v - (v grad v) dt +- (1/m) grad(V + Q) dt,
// Q from the pre-step rho, rho renormalized afterwards. StabilityError when
// dt max|grad v| >= 0.1 or rho turns negative.
MatterState impulse_step(const MatterState& s, const GridField& potential, double dt, ImpulseBranch branch,
                         ImpulseLog* log = nullptr);

struct RecoilRun {
    std::vector<MatterState> states;            // steps 0, k, 2k, ... and the last one
    std::vector<GridField> brownian_pulse;      // the discarded pulse at each recorded state
    std::vector<GridField> anti_pulse;          // the applied pulse at each recorded state
    std::vector<double> mass_drift;             // per step
    double max_mass_drift = 0.0;
};

// Iterates impulse_step; the anti-Brownian branch carries the matter data and
// the Brownian pulse is computed and kept only as a record.
RecoilRun recoil_trajectory(const MatterState& s0, const GridField& potential, double dt, std::size_t n_steps,
                            std::size_t record_every = 1, ImpulseBranch branch = ImpulseBranch::anti_brownian);

// Sup-norm distance between two (rho, v) states on the nodes where the
// reference density is at least `core` times its peak.
double matter_distance(const MatterState& a, const GridPdf& rho_ref, const GridField& v_ref, double core = 1e-2);

// Short-time drift increments against their predictions.
struct ImpulseReport {
    Motion motion = Motion::brownian;
    double dt = 0.0;
    GridField forward;    // <b>(x, t + dt) - b(x, t) = dt D b
    GridField backward;   // b_*(x, t) - <b_*>(x, t - dt) = dt D_* b_*
    GridField predicted;  // dt grad V / m (diffusion) or -dt grad(V + 2Q) / m (quantum)
    GridField mapped;     // the other motion's prediction through the +-(2/m) grad(V + Q) dt map
    double max_forward_gap = 0.0;
    double max_backward_gap = 0.0;
    double mapping_closure = 0.0;  // |mapped - direct prediction of the other motion|
    double scale = 0.0;            // max |predicted|
};

// `before` / `after` are drift pairs a time `spacing` apart, `rho` the
// density at their midpoint; impulses are scaled to `dt`. Gaps are maxima
// over nodes with rho >= core * peak.
ImpulseReport impulse_momentum_report(const DriftPair& before, const DriftPair& after, double spacing,
                                      const GridPdf& rho, const GridField& potential, Motion motion,
                                      const PhysicalConstants& c, double dt, double core = 1e-3);

}  // namespace qplab
