#pragma once

#include <optional>

#include "qplab/constants.hpp"
#include "qplab/grid.hpp"

namespace qplab {

// -integral rho ln rho over unmasked nodes. Requires |mass - 1| <= 1e-3.
double shannon_entropy(const GridPdf& rho);

// Fisher information evaluated two ways: integral (grad rho)^2 / rho over
// every node above the density floor, and <(grad ln rho)^2> over unmasked
// nodes. The two must agree to 1e-8 relative.
struct FisherRoutes {
    double direct = 0.0;
    double score = 0.0;
    double relative_gap() const;
};
FisherRoutes fisher_routes(const GridPdf& rho);

// The routes are different O(h^2) discretizations. On resolved gaussians and
// mixtures they agree to 1e-8; a masking error shows up as a gap far beyond
// kFisherRouteGuard, at which fisher_information throws NumericalError.
inline constexpr double kFisherRouteAgreement = 1e-8;
inline constexpr double kFisherRouteGuard = 1e-6;
double fisher_information(const GridPdf& rho);

// Delta rho^{1/2} / rho^{1/2} on unmasked nodes.
GridField root_density_curvature(const GridPdf& rho);

// Q = -(hbar^2 / 2m) Delta rho^{1/2} / rho^{1/2}.
GridField quantum_potential(const GridPdf& rho, const PhysicalConstants& c);

// u = D grad ln rho.
GridField osmotic_velocity(const GridPdf& rho, const PhysicalConstants& c);

// P_osm = D^2 rho Delta ln rho.
GridField osmotic_pressure(const GridPdf& rho, const PhysicalConstants& c);

// grad P_osm + (rho/m) grad Q, which vanishes identically in the continuum.
GridField osmotic_pressure_identity_residual(const GridPdf& rho, const PhysicalConstants& c);

// Theta_osm = -m D^2 Delta ln rho.
GridField osmotic_temperature(const GridPdf& rho, const PhysicalConstants& c);

// Density-weighted mean <f> = integral rho f over nodes unmasked in f.
double expectation(const GridPdf& rho, const GridField& f);

// Fourier-side variance of psi = rho^{1/2}, from a zero-padded discrete
// transform psi~(p) = sum_j w_j h psi_j exp(-2 pi i p x_j) over |p| <= 1/(2h).
double fourier_variance(const GridPdf& rho);

struct InequalitySlacks {
    double cramer_rao = 0.0;          // F sigma^2 - 1
    double isoperimetric = 0.0;       // F - 2 pi e exp(-2S)
    double fourier_upper = 0.0;       // 16 pi^2 sigma~^2 - F
    double entropy_upper = 0.0;       // sigma - exp(S) / sqrt(2 pi e)
    double entropy_lower = 0.0;       // exp(S) / sqrt(2 pi e) - 1 / (4 pi sigma~)
};

struct FunctionalReport {
    double shannon = 0.0;
    double fisher = 0.0;
    double mean_quantum_potential = 0.0;
    double variance = 0.0;
    std::optional<double> fourier_variance;
    InequalitySlacks slacks;
    bool violation = false;
};

// Slack below -kSlackTolerance on any bound sets `violation`. The Fourier-side
// bounds are discretization-limited and use kFourierSlackTolerance relative to F.
inline constexpr double kSlackTolerance = 1e-8;
inline constexpr double kFourierSlackTolerance = 1e-4;

FunctionalReport inequality_report(const GridPdf& rho, const PhysicalConstants& c = {});

enum class Motion { brownian, quantum };

// Pressure entering dF/dt: P = rho Delta ln rho for diffusions, the quantum
// pressure P = -rho Delta ln rho for Schrodinger motion.
GridField pressure_term(const GridPdf& rho, Motion motion);

// Finite-difference rate of a functional against its closed-form rate at
// the centre snapshot (central difference between `before` and `after`,
// which are `span` apart).
struct RateCheck {
    double finite_difference = 0.0;
    double identity = 0.0;
    double alternate = 0.0;
    double relative_error() const;
    double alternate_relative_error() const;
};

// dS/dt = <grad v> = -(1/D) <v u>; `alternate` holds the second form.
RateCheck entropy_rate_check(const GridPdf& before, const GridPdf& after, double span, const GridPdf& centre,
                             const GridField& v, const PhysicalConstants& c);

// dF/dt = -+2 int v grad P dx (minus for diffusions, plus for quantum motion
// with its own P); `alternate` holds -2 int v grad(rho Delta ln rho) dx.
RateCheck fisher_rate_check(const GridPdf& before, const GridPdf& after, double span, const GridPdf& centre,
                            const GridField& v, Motion motion);

}  // namespace qplab
