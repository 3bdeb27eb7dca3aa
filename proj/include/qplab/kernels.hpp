#pragma once

#include <complex>
#include <string>
#include <vector>

#include "qplab/grid.hpp"

// Closed-form propagators and transition densities. Conventions: the heat
// kernel is that of exp(t Delta) (unit diffusion; a diffusion constant D is
// absorbed as t -> D t), the Mehler kernel is that of exp(-t H) with
// H = (1/2)(-Delta + x^2 - 1), and rho_*(x) = pi^{-1/2} exp(-x^2).
namespace qplab::kernels {

using complex = std::complex<double>;

enum class Kind { heat, mehler, ou_transition, free_schrodinger, oscillator_schrodinger };

const char* kind_name(Kind k);
Kind kind_from_name(const std::string& name);

double heat_kernel(double y, double x, double t);
double heat_kernel(double y, double x, double t, double diffusion);

// Heat kernel at complex time tau (Re tau >= 0), principal square root.
complex heat_kernel_complex(double y, double x, complex tau);

// exp(t/2) (2 pi sinh t)^{-1/2} exp(-[(x^2 + y^2) cosh t - 2xy] / (2 sinh t)).
double mehler_kernel(double y, double x, double t);

// [pi (1 - e^{-2t})]^{-1/2} exp(-(x^2 - y^2)/2 - (x e^{-t} - y)^2 / (1 - e^{-2t})).
double mehler_kernel_exponential_form(double y, double x, double t);

complex mehler_kernel_complex(double y, double x, complex tau);

// Transition density from x to y in time t: k(y, x, t) rho_*^{1/2}(y) / rho_*^{1/2}(x).
double ou_transition(double y, double x, double t);

// Gaussian with mean x e^{-t} and variance (1 - e^{-2t}) / 2.
double ou_transition_gaussian(double y, double x, double t);

double ou_stationary_density(double x);

// E[X(t1) X(t2)] of the stationary process, by double quadrature of
// rho_*(x') x' p(x, x', t2 - t1) x over `grid`; the inner integral uses a
// local refinement around the kernel peak so any lag is resolved.
double ou_covariance(double t1, double t2, const Grid& grid);
double ou_covariance(double t1, double t2);
double ou_covariance_closed_form(double t1, double t2);

// (4 pi i t)^{-1/2} exp(i (y - x)^2 / (4t)), t != 0.
complex free_propagator(double y, double x, double t);

// exp(it/2) (2 pi i sin t)^{-1/2} exp(i[(x^2 + y^2) cos t - 2xy] / (2 sin t)),
// refused at caustics |sin t| < 1e-12.
complex oscillator_propagator(double y, double x, double t);

enum class Propagator { free, oscillator };
complex schrodinger_propagator(Propagator kind, double y, double x, double t);

// |K(t) - k(i t)| where k is the Euclidean kernel continued to imaginary time.
double wick_rotation_gap(Propagator kind, double y, double x, double t);

// integral K(y, z, t) K(z, x, s) dz by windowed trapezoid quadrature.
// The chirped integrand is damped by exp(-eps (z - c)^2) for a ladder of eps
// values and the results are Richardson-extrapolated to eps = 0.
complex free_propagator_composition(double y, double x, double t, double s);

// Kernel row k(y_i, x, t) over the grid nodes y_i.
std::vector<complex> kernel_row(Kind kind, const Grid& grid, double x, double t);

}  // namespace qplab::kernels
