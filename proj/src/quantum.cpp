#include "qplab/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qplab/functionals.hpp"
#include "tridiagonal.hpp"

namespace qplab {

WaveFunction::WaveFunction(const Grid& grid, std::vector<cplx> values, const PhysicalConstants& c, double time)
    : grid_(grid), values_(std::move(values)), constants_(c), time_(time) {
    if (values_.size() != grid_.size()) throw SizeError("wave function size does not match grid");
    for (const cplx& z : values_) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("wave function must be finite");
    }
}

WaveFunction WaveFunction::from_density_phase(const GridPdf& rho, const GridField& action, const PhysicalConstants& c) {
    if (!(action.grid == rho.grid())) throw SizeError("density and action live on different grids");
    std::vector<cplx> v(rho.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::polar(std::sqrt(rho[i]), action[i] / c.hbar());
    return WaveFunction(rho.grid(), std::move(v), c);
}

WaveFunction WaveFunction::gaussian(const Grid& grid, double mean, double sigma, double wavenumber,
                                    const PhysicalConstants& c) {
    if (!(sigma > 0.0)) throw DomainError("packet width must be positive");
    const double amp = std::pow(2.0 * M_PI * sigma * sigma, -0.25);
    std::vector<cplx> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double d = grid.x(i) - mean;
        v[i] = std::polar(amp * std::exp(-d * d / (4.0 * sigma * sigma)), wavenumber * grid.x(i));
    }
    return WaveFunction(grid, std::move(v), c);
}

double WaveFunction::norm() const {
    std::vector<double> d(values_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::norm(values_[i]);
    return quadrature(grid_, d);
}

WaveFunction WaveFunction::normalized() const {
    const double n = norm();
    if (!(n > 0.0)) throw DegenerateDensityError("wave function vanishes identically");
    std::vector<cplx> v(values_);
    const double s = 1.0 / std::sqrt(n);
    for (cplx& z : v) z *= s;
    return WaveFunction(grid_, std::move(v), constants_, time_);
}

GridPdf WaveFunction::density() const {
    std::vector<double> d(values_.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::norm(values_[i]);
    return GridPdf(grid_, std::move(d));
}

double WaveFunction::boundary_ratio() const {
    double peak = 0.0;
    for (const cplx& z : values_) peak = std::max(peak, std::abs(z));
    if (!(peak > 0.0)) return 0.0;
    return std::max(std::abs(values_.front()), std::abs(values_.back())) / peak;
}

std::vector<WaveFunction> evolve_quantum(const WaveFunction& psi0, const GridField& potential, double dt,
                                         std::size_t n_steps, std::size_t record_every) {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    if (!(potential.grid == psi0.grid())) throw SizeError("potential and wave function live on different grids");
    if (record_every == 0) record_every = 1;
    const PhysicalConstants& c = psi0.constants();
    const double hbar = c.hbar();
    const double vmax = potential.max_abs();
    if (dt * vmax / hbar >= 0.5) {
        throw StabilityError("dt * max|V| / hbar = " + std::to_string(dt * vmax / hbar) + " must stay below 0.5");
    }

    const Grid& g = psi0.grid();
    const std::size_t n = g.size();
    const std::size_t m = n - 2;
    const double h = g.spacing();
    const double kin = c.quantum_coefficient() / (h * h);
    // (1 + i dt H / 2 hbar) psi^{n+1} = (1 - i dt H / 2 hbar) psi^n
    const cplx a(0.0, 0.5 * dt / hbar);
    std::vector<cplx> lower(m, -a * kin), upper(m, -a * kin), diag(m);
    for (std::size_t i = 0; i < m; ++i) diag[i] = 1.0 + a * (2.0 * kin + potential[i + 1]);
    detail::TridiagonalSolver<cplx> solver(lower, diag, upper);

    std::vector<cplx> psi(psi0.values());
    psi.front() = 0.0;
    psi.back() = 0.0;

    std::vector<WaveFunction> out;
    out.reserve(n_steps / record_every + 2);
    out.emplace_back(g, psi, c, psi0.time());

    std::vector<cplx> rhs(m);
    for (std::size_t step = 1; step <= n_steps; ++step) {
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t j = i + 1;
            const cplx hpsi = kin * (2.0 * psi[j] - psi[j - 1] - psi[j + 1]) + potential[j] * psi[j];
            rhs[i] = psi[j] - a * hpsi;
        }
        solver.solve_in_place(rhs);
        std::copy(rhs.begin(), rhs.end(), psi.begin() + 1);

        if (step % record_every == 0 || step == n_steps) {
            WaveFunction state(g, psi, c, psi0.time() + static_cast<double>(step) * dt);
            const double leak = boundary_band_mass(state.density());
            if (leak > 1e-6) {
                throw BoxError("boundary mass " + std::to_string(leak) + " exceeds 1e-6 at t = " +
                               std::to_string(state.time()) + "; enlarge the box");
            }
            out.push_back(std::move(state));
        }
    }
    return out;
}

GridField current_velocity(const WaveFunction& psi) {
    const GridPdf rho = psi.density();
    const auto mask = rho.mask();
    const std::size_t n = psi.size();
    const double h = psi.grid().spacing();
    const double scale = psi.constants().hbar() / psi.constants().mass();
    auto dphase = [&](std::size_t i, std::size_t j) { return std::arg(psi[j] * std::conj(psi[i])); };
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!mask[i]) v[i] = scale * dphase(i - 1, i + 1) / (2.0 * h);
    }
    if (!mask[0]) {
        const double d1 = dphase(0, 1), d2 = dphase(1, 2);
        v[0] = scale * (4.0 * d1 - (d1 + d2)) / (2.0 * h);
    }
    if (!mask[n - 1]) {
        const double d1 = dphase(n - 2, n - 1), d2 = dphase(n - 3, n - 2);
        v[n - 1] = scale * (4.0 * d1 - (d1 + d2)) / (2.0 * h);
    }
    return GridField(psi.grid(), std::move(v), mask);
}

HydroFields madelung_fields(const WaveFunction& psi) {
    const PhysicalConstants& c = psi.constants();
    GridPdf rho = psi.density();
    GridField v = current_velocity(psi);
    const auto& mask = v.masked;
    std::size_t anchor = 0;
    while (anchor < mask.size() && mask[anchor]) ++anchor;

    std::vector<double> momentum(v.size());
    for (std::size_t i = 0; i < momentum.size(); ++i) momentum[i] = c.mass() * v[i];
    GridField s(psi.grid(), cumulative_quadrature(psi.grid(), momentum, anchor), mask);

    GridField u = osmotic_velocity(rho, c);
    GridField q = quantum_potential(rho, c);
    const double anchor_phase = c.hbar() * std::arg(psi[anchor]);
    return HydroFields{std::move(rho), std::move(s), std::move(v), std::move(u), std::move(q),
                       psi.time(), anchor, anchor_phase};
}

double quantum_energy(const HydroFields& f, const GridField& potential, const PhysicalConstants& c) {
    std::vector<double> e(f.rho.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        e[i] = 0.5 * c.mass() * (f.u[i] * f.u[i] + f.v[i] * f.v[i]) + potential[i];
    }
    return expectation(f.rho, GridField(f.rho.grid(), std::move(e), f.v.masked));
}

std::vector<double> quantum_invariant_H(const std::vector<WaveFunction>& states, const GridField& potential) {
    std::vector<double> out;
    out.reserve(states.size());
    for (const WaveFunction& psi : states) {
        out.push_back(quantum_energy(madelung_fields(psi), potential, psi.constants()));
    }
    return out;
}

HjResidual hj_residual_quantum(const HydroFields& before, const HydroFields& after, const GridField& potential,
                               const PhysicalConstants& c, double core) {
    const Grid& g = before.rho.grid();
    if (!(after.rho.grid() == g) || !(potential.grid == g)) throw SizeError("snapshots live on different grids");
    const double dt = after.time - before.time;
    if (!(dt > 0.0)) throw DomainError("snapshots must be ordered in time");
    const std::size_t n = g.size();
    const double hbar = c.hbar();

    // absolute phases S = s + anchor_phase, differenced modulo 2 pi hbar
    std::vector<double> ds(n);
    for (std::size_t i = 0; i < n; ++i) ds[i] = (after.s[i] + after.anchor_phase) - (before.s[i] + before.anchor_phase);
    const std::size_t ref = std::max(before.anchor, after.anchor);
    const double period = 2.0 * M_PI * hbar;
    const double wrap = period * std::round(ds[ref] / period);
    for (double& d : ds) d = (d - wrap) / dt;

    std::vector<double> vbar(n), qbar(n), vq(n), vdot(n);
    for (std::size_t i = 0; i < n; ++i) {
        vbar[i] = 0.5 * (before.v[i] + after.v[i]);
        qbar[i] = 0.5 * (before.Q[i] + after.Q[i]);
        vq[i] = potential[i] + qbar[i];
        vdot[i] = (after.v[i] - before.v[i]) / dt;
    }
    const auto gv = gradient(g, vbar);
    const auto gvq = gradient(g, vq);

    std::vector<double> pot(n, 0.0), grad(n, 0.0);
    std::vector<bool> mask(n, false);
    const double peak = std::max(before.rho.max_value(), after.rho.max_value());
    for (std::size_t i = 0; i < n; ++i) {
        const bool edge = i < 2 || i + 2 >= n;
        const bool thin = before.rho[i] < core * peak || after.rho[i] < core * peak;
        const bool flagged = before.v.is_masked(i) || after.v.is_masked(i);
        if (edge || thin || flagged) {
            mask[i] = true;
            continue;
        }
        pot[i] = ds[i] + 0.5 * c.mass() * vbar[i] * vbar[i] + vq[i];
        grad[i] = vdot[i] + vbar[i] * gv[i] + gvq[i] / c.mass();
    }
    HjResidual r{GridField(g, std::move(pot), mask), GridField(g, std::move(grad), mask), 0.0, 0.0};
    r.max_potential_form = r.potential_form.max_abs();
    r.max_gradient_form = r.gradient_form.max_abs();
    return r;
}

double free_packet_variance(double sigma0, double t, const PhysicalConstants& c) {
    const double spread = c.hbar() * t / (2.0 * c.mass() * sigma0);
    return sigma0 * sigma0 + spread * spread;
}

double free_packet_velocity(double x, double mean, double sigma0, double t, const PhysicalConstants& c) {
    const double rate = c.hbar() / (2.0 * c.mass() * sigma0 * sigma0);
    const double tau = rate * t;
    return (x - mean) * rate * tau / (1.0 + tau * tau);
}

}  // namespace qplab
