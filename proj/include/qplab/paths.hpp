#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qplab/constants.hpp"
#include "qplab/grid.hpp"

namespace qplab {

struct Ensemble {
    std::vector<double> positions;
    double time = 0.0;
    std::uint64_t seed = 0;
    PhysicalConstants constants;
    std::size_t reflected = 0;  // particles that hit a wall so far
};

// Drift as a function of (x, t).
using DriftFunction = std::function<double(double, double)>;

// Piecewise-linear drift read off a grid field (masked nodes read as 0).
DriftFunction drift_function(const GridField& b);

// N draws from rho by inverting the piecewise-linear trapezoid CDF.
// Draw i uses stream i, so prefixes of larger ensembles agree.
std::vector<double> sample_density(const GridPdf& rho, std::size_t n, std::uint64_t seed);

// Euler-Maruyama for dX = b(X, t) dt + sqrt(2D) dW inside [x_min, x_max] of
// `box`; walls reflect. Particle i draws from its own counter stream.
// Returns ensembles at steps 0, k, 2k, ... and the last one. BoxError when
// more than 1% of the particles touched a wall.
// With noise_refinement r each increment is the sum of r finer draws, so a
// run at (dt, r = 2) shares its Brownian path with one at (dt/2, r = 1).
// first_step offsets the draw counters, so a run continued from step k
// reproduces the tail of one long run.
std::vector<Ensemble> simulate_sde(const std::vector<double>& x0, const Grid& box, const DriftFunction& b,
                                   const PhysicalConstants& c, double dt, std::size_t n_steps, std::uint64_t seed,
                                   std::size_t record_every = 1, double t0 = 0.0, std::size_t noise_refinement = 1,
                                   std::size_t first_step = 0);
// Same, starting from N samples of rho0 (box = the grid of rho0).
std::vector<Ensemble> simulate_sde(const GridPdf& rho0, const DriftFunction& b, const PhysicalConstants& c, double dt,
                                   std::size_t n_steps, std::size_t n_particles, std::uint64_t seed,
                                   std::size_t record_every = 1);

// Forward and backward drifts b = v + u, b_* = v - u with u = D grad ln rho.
struct DriftPair {
    GridField b;
    GridField b_star;
    GridField v;
    GridField u;
};
DriftPair drift_pair_from_fields(const GridPdf& rho, const GridField& v, const PhysicalConstants& c);

// d rho/dt computed three ways: -grad(v rho), D Delta rho - grad(b rho),
// -D Delta rho - grad(b_* rho). They agree to O(h^2).
struct ContinuityForms {
    GridField current;
    GridField forward;
    GridField backward;
    double max_gap = 0.0;  // max pairwise difference on unmasked interior nodes
};
ContinuityForms continuity_forms(const GridPdf& rho, const DriftPair& pair, const PhysicalConstants& c);

enum class Direction { forward, backward };

// Binned conditional mean increment over one ensemble step. Forward bins by
// the earlier position, backward by the later one.
struct BinnedDrift {
    std::vector<double> centre;
    std::vector<double> mean_position;  // sample mean of the binning coordinate
    std::vector<std::size_t> count;
    std::vector<double> drift;
    std::vector<double> standard_error;
    std::vector<bool> undersampled;     // fewer than kMinBinCount samples
    double dt = 0.0;
};
inline constexpr std::size_t kMinBinCount = 50;

BinnedDrift estimate_drift_empirical(const Ensemble& before, const Ensemble& after, Direction direction,
                                     std::size_t bins, double lo, double hi);

struct DriftAgreement {
    std::size_t populated = 0;
    std::size_t within = 0;  // |estimate - analytic| <= sigmas * stderr
    double fraction() const { return populated == 0 ? 0.0 : static_cast<double>(within) / populated; }
};
// Compares populated bins against `analytic` at the in-bin mean position.
DriftAgreement compare_drift(const BinnedDrift& est, const std::function<double(double)>& analytic,
                             double sigmas = 3.0);

// (D f) = (d_t + b grad + D Delta) f and (D_* f) = (d_t + b_* grad - D Delta) f,
// with f and the drifts taken at the midpoint of the two snapshots.
GridField mean_derivative(const GridField& f_before, const GridField& f_after, double dt, const DriftPair& at,
                          Direction direction, const PhysicalConstants& c);

enum class AccelerationKind { forward, backward, symmetric };

// Candidate accelerations of the position process between two drift pairs:
// D^2 X = D b, D_*^2 X = D_* b_*, 1/2 (D D_* + D_* D) X = 1/2 (D b_* + D_* b),
// plus the hydrodynamical forms (d_t + v grad) v -+ (1/m) grad Q.
struct AccelerationReport {
    GridField forward;
    GridField backward;
    GridField symmetric;
    GridField hydro_brownian;  // (d_t + v grad) v - grad Q / m
    GridField hydro_quantum;   // (d_t + v grad) v + grad Q / m
};
AccelerationReport accelerations(const DriftPair& before, const DriftPair& after, double dt, const GridPdf& rho,
                                 const PhysicalConstants& c);
GridField acceleration(const DriftPair& before, const DriftPair& after, double dt, AccelerationKind kind,
                       const PhysicalConstants& c);

// Velocity snapshots v(x, t_k), linear in x and t between them.
class VelocityHistory {
public:
    void push(double t, GridField v);
    bool empty() const noexcept { return times_.empty(); }
    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }
    // false when x falls on a masked node or outside the grid
    bool sample(double x, double t, double& out) const;

private:
    std::vector<double> times_;
    std::vector<GridField> fields_;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<double> x;
    bool truncated = false;  // stopped on entering a masked region
};

// Classical RK4 for dx/dt = v(x, t) from t_begin, steps of dt, until t_end.
std::vector<Trajectory> bohmian_trajectories(const VelocityHistory& v, const std::vector<double>& x0, double dt);

// sup |F_emp - F| against the trapezoid CDF of rho.
double ks_distance(std::vector<double> samples, const GridPdf& rho);

}  // namespace qplab
