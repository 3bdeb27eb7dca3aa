#include "qplab/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "tridiagonal.hpp"

namespace qplab {

namespace {

// Interior operator rows of -k Delta_h + V (boundary nodes are Dirichlet).
struct InteriorOperator {
    std::vector<double> lower, diag, upper;
};

InteriorOperator interior_operator(const GridField& potential, double kinetic, double shift) {
    const std::size_t n = potential.size() - 2;
    const double h = potential.grid.spacing();
    const double off = -kinetic / (h * h);
    InteriorOperator op{std::vector<double>(n, off), std::vector<double>(n), std::vector<double>(n, off)};
    for (std::size_t i = 0; i < n; ++i) op.diag[i] = 2.0 * kinetic / (h * h) + potential[i + 1] - shift;
    return op;
}

double apply_row(const GridField& potential, double kinetic, std::span<const double> x, std::size_t i) {
    const double h = potential.grid.spacing();
    const double left = i > 0 ? x[i - 1] : 0.0;
    const double right = i + 1 < x.size() ? x[i + 1] : 0.0;
    return kinetic * (2.0 * x[i] - left - right) / (h * h) + potential[i + 1] * x[i];
}

double normalize(std::vector<double>& x, double h) {
    double s = 0.0;
    for (double v : x) s += v * v;
    const double norm = std::sqrt(s * h);
    for (double& v : x) v /= norm;
    return norm;
}

}  // namespace

GroundState discrete_ground_state(const GridField& potential, double kinetic) {
    if (!(kinetic > 0.0)) throw DomainError("kinetic coefficient must be positive");
    const std::size_t n = potential.size() - 2;
    const double h = potential.grid.spacing();
    for (double v : potential.values) {
        if (!std::isfinite(v)) throw DomainError("potential must be finite at every node");
    }
    const double vmin = *std::min_element(potential.values.begin() + 1, potential.values.end() - 1);

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(i + 1) / static_cast<double>(n + 1);
        x[i] = std::sin(M_PI * s);
    }
    normalize(x, h);

    auto rayleigh = [&](const std::vector<double>& y) {
        double num = 0.0;
        for (std::size_t i = 0; i < n; ++i) num += y[i] * apply_row(potential, kinetic, y, i);
        return num * h;
    };

    // fixed shift below the spectrum: every eigenvalue exceeds min V
    const double shift = vmin - 1.0;
    const InteriorOperator op = interior_operator(potential, kinetic, shift);
    detail::TridiagonalSolver<double> solver(op.lower, op.diag, op.upper);

    std::size_t iterations = 0;
    double energy = rayleigh(x);
    for (; iterations < 20000; ++iterations) {
        solver.solve_in_place(x);
        normalize(x, h);
        const double next = rayleigh(x);
        const bool settled = std::abs(next - energy) <= 1e-13 * std::max(1.0, std::abs(next));
        energy = next;
        if (settled && iterations > 8) break;
    }

    // Rayleigh-quotient refinement from the converged neighbourhood
    for (int k = 0; k < 4; ++k) {
        const InteriorOperator rq = interior_operator(potential, kinetic, energy - 1e-10 * std::max(1.0, std::abs(energy)));
        std::vector<double> y;
        try {
            y = detail::solve_tridiagonal<double>(rq.lower, rq.diag, rq.upper, x);
        } catch (const NumericalError&) {
            break;
        }
        if (!std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) break;
        normalize(y, h);
        x = std::move(y);
        energy = rayleigh(x);
    }

    // fix sign so the amplitude is positive
    double total = 0.0;
    for (double v : x) total += v;
    if (total < 0.0) {
        for (double& v : x) v = -v;
    }

    GroundState gs{energy, GridField(potential.grid), iterations};
    for (std::size_t i = 0; i < n; ++i) gs.amplitude[i + 1] = x[i];
    return gs;
}

GroundState hamiltonian_ground_state(const GridField& potential, const PhysicalConstants& c) {
    return discrete_ground_state(potential, c.quantum_coefficient());
}

GridField renormalize_potential(const GridField& potential, const PhysicalConstants& c, double* shift) {
    const GroundState gs = hamiltonian_ground_state(potential, c);
    GridField out = potential;
    for (double& v : out.values) v -= gs.energy;
    if (shift != nullptr) *shift = gs.energy;
    return out;
}

}  // namespace qplab
