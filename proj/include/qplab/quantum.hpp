#pragma once

#include <complex>
#include <vector>

#include "qplab/constants.hpp"
#include "qplab/grid.hpp"

namespace qplab {

using cplx = std::complex<double>;

class WaveFunction {
public:
    WaveFunction(const Grid& grid, std::vector<cplx> values, const PhysicalConstants& c, double time = 0.0);

    // psi = rho^{1/2} exp(i s / hbar).
    static WaveFunction from_density_phase(const GridPdf& rho, const GridField& action, const PhysicalConstants& c);
    // Gaussian packet with |psi|^2 of variance sigma^2, centred at `mean`, wavenumber k.
    static WaveFunction gaussian(const Grid& grid, double mean, double sigma, double wavenumber,
                                 const PhysicalConstants& c);

    const Grid& grid() const noexcept { return grid_; }
    const std::vector<cplx>& values() const noexcept { return values_; }
    const PhysicalConstants& constants() const noexcept { return constants_; }
    double time() const noexcept { return time_; }
    std::size_t size() const noexcept { return values_.size(); }
    cplx operator[](std::size_t i) const noexcept { return values_[i]; }

    double norm() const;  // integral |psi|^2
    WaveFunction normalized() const;
    GridPdf density() const;
    // max(|psi_0|, |psi_{n-1}|) / max |psi|.
    double boundary_ratio() const;

private:
    Grid grid_;
    std::vector<cplx> values_;
    PhysicalConstants constants_;
    double time_;
};

struct HydroFields {
    GridPdf rho;
    GridField s;      // action, zero at `anchor`
    GridField v;      // current velocity
    GridField u;      // osmotic velocity
    GridField Q;      // quantum potential
    double time = 0.0;
    std::size_t anchor = 0;      // leftmost unmasked node
    double anchor_phase = 0.0;   // hbar arg psi(anchor), restores the absolute phase
};

// Crank-Nicolson stepping of i hbar psi_t = [-(hbar^2/2m) Delta + V] psi with
// psi = 0 at both boundary nodes. Returns the states at steps 0, k, 2k, ...
// (k = record_every) plus the final step.
// Throws StabilityError when dt max|V| / hbar >= 0.5, BoxError when more than
// 1e-6 of the mass reaches the boundary bands.
std::vector<WaveFunction> evolve_quantum(const WaveFunction& psi0, const GridField& potential, double dt,
                                         std::size_t n_steps, std::size_t record_every = 1);

// v = (hbar/m) Im(grad psi / psi), evaluated through neighbour phase
// differences arg(psi_{i+1} psi_{i-1}^*) / 2h, so linear and quadratic phases
// are differentiated exactly.
GridField current_velocity(const WaveFunction& psi);

HydroFields madelung_fields(const WaveFunction& psi);

// H = <(m/2)(u^2 + v^2) + V> per state.
std::vector<double> quantum_invariant_H(const std::vector<WaveFunction>& states, const GridField& potential);
double quantum_energy(const HydroFields& f, const GridField& potential, const PhysicalConstants& c);

struct HjResidual {
    GridField potential_form;  // dS/dt + (1/2m)(grad S)^2 + V + Q
    GridField gradient_form;   // dv/dt + v grad v + (1/m) grad(V + Q)
    double max_potential_form = 0.0;
    double max_gradient_form = 0.0;
};

// Residual of the quantum Hamilton-Jacobi equation between two consecutive
// snapshots, centred at the midpoint. Nodes with rho below `core` times the
// peak (or next to the boundary) are masked.
HjResidual hj_residual_quantum(const HydroFields& before, const HydroFields& after, const GridField& potential,
                               const PhysicalConstants& c, double core = 1e-6);

// Analytic free Gaussian packet: variance and current velocity.
double free_packet_variance(double sigma0, double t, const PhysicalConstants& c);
double free_packet_velocity(double x, double mean, double sigma0, double t, const PhysicalConstants& c);

}  // namespace qplab
