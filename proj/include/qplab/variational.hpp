#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qplab/constants.hpp"
#include "qplab/grid.hpp"

namespace qplab {

struct ExtremumSolution {
    GridPdf rho;
    double multiplier = 0.0;  // alpha or lambda
    double constraint_value = 0.0;
    double achieved_constraint = 0.0;
    double functional_value = 0.0;  // S for max entropy, F for the Fisher extremum
    bool degenerate = false;        // constraint independent of the multiplier
    std::size_t iterations = 0;
    double constraint_residual() const { return achieved_constraint - constraint_value; }
};

// Multiplier bracket; widened automatically (x2, at most 60 doublings).
struct Bracket {
    double lo;
    double hi;
};

// rho_alpha = A exp(alpha V) with <V>_alpha = zeta, alpha by bisection.
// ConstraintError when zeta is outside (min V, max V); DivergenceError when
// the solution piles its mass against the box walls (exp(alpha V) would not
// be integrable beyond the box).
ExtremumSolution max_entropy_pdf(const GridField& potential, double zeta, Bracket bracket = {-1.0, 1.0});

// <V> under rho_alpha.
double max_entropy_mean(const GridField& potential, double alpha);
GridPdf max_entropy_family(const GridField& potential, double alpha);

// rho^{1/2} is the positive ground state of -Delta + (lambda/4) V, so that
// V = (4/lambda) Delta rho^{1/2} / rho^{1/2} up to the normalization
// multiplier; lambda > 0 tuned so that <V>_lambda = zeta. <V>_lambda
// decreases with lambda. ConstraintError for an unreachable zeta or a V that
// does not confine; SpectrumError when the ground state is not bound inside
// the box.
ExtremumSolution fisher_extremum_pdf(const GridField& potential, double zeta, Bracket bracket = {1.0, 16.0});

GridPdf fisher_family(const GridField& potential, double lambda);

// lambda = 2 / (m D^2): the diffusion value, equal to 8 m / hbar^2.
double fisher_brownian_lambda(const PhysicalConstants& c);

enum class FisherBranch { quantum, brownian, classical };
const char* branch_name(FisherBranch b);

// gamma = -mD^2/2 -> quantum, +mD^2/2 -> brownian, 0 -> classical; anything
// else is a BranchError.
FisherBranch classify_gamma(double gamma, const PhysicalConstants& c);

struct BranchSnapshot {
    GridPdf rho;
    GridField s;
    GridField v;
    double time = 0.0;
};

struct BranchEvolution {
    FisherBranch branch;
    std::vector<BranchSnapshot> snapshots;
    GridField potential;     // the potential actually used (sign applied, renormalized for diffusions)
    GridField drift;         // forward drift (diffusion branch only)
    double hj_residual = 0.0;  // max gradient-form Hamilton-Jacobi residual between the last two snapshots
};

// Euler-Lagrange system of the constrained Fisher action,
//   d_t rho = -grad(v rho),  d_t s + (grad s)^2 / 2m +- V + 4 gamma Delta rho^{1/2} / rho^{1/2} = 0,
// dispatched by gamma to the quantum evolver, the Fokker-Planck evolver
// (only with -V; drift from the ground state of V) or classical
// characteristics. s0 is ignored by the diffusion branch, whose velocity is
// b - u.
BranchEvolution constrained_fisher_branches(const GridPdf& rho0, const GridField& s0, const GridField& potential,
                                            double gamma, int sign_v, const PhysicalConstants& c, double dt,
                                            std::size_t n_steps, std::size_t record_every = 1);

// Classical Hamilton-Jacobi ensemble: Lagrangian markers at the grid nodes
// move with v = grad s / m under -+grad V / m (velocity Verlet); rho follows
// from the Jacobian of the marker map. DivergenceError once the
// characteristics cross.
std::vector<BranchSnapshot> evolve_classical(const GridPdf& rho0, const GridField& s0, const GridField& potential,
                                             const PhysicalConstants& c, double dt, std::size_t n_steps,
                                             std::size_t record_every = 1);

}  // namespace qplab
