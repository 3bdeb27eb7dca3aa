#pragma once

#include "qplab/constants.hpp"
#include "qplab/grid.hpp"

namespace qplab {

struct GroundState {
    double energy = 0.0;
    // Positive, unit L2 norm on the grid, zero at both boundary nodes.
    GridField amplitude;
    std::size_t iterations = 0;
};

// Lowest eigenpair of -kinetic * Delta_h + V with homogeneous Dirichlet
// values at the two boundary nodes, by shifted inverse iteration followed by
// Rayleigh-quotient refinement.
GroundState discrete_ground_state(const GridField& potential, double kinetic);

// Ground state of H = -(hbar^2/2m) Delta + V.
GroundState hamiltonian_ground_state(const GridField& potential, const PhysicalConstants& c);

// V - E_0 so that the discrete Hamiltonian has bottom eigenvalue 0.
GridField renormalize_potential(const GridField& potential, const PhysicalConstants& c,
                                double* shift = nullptr);

}  // namespace qplab
