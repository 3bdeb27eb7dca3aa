#include "qplab/brownian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "linear_stepper.hpp"
#include "qplab/functionals.hpp"
#include "qplab/spectrum.hpp"

namespace qplab {

namespace {

// Bernoulli function z / (e^z - 1).
double bernoulli(double z) {
    if (std::abs(z) < 1e-8) return 1.0 - 0.5 * z;
    return z / std::expm1(z);
}

void require_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw SizeError(std::string(what) + " live on different grids");
}

}  // namespace

GridField stationary_drift(const GridPdf& rho_star, const PhysicalConstants& c) {
    GridField b = log_density_gradient(rho_star);
    for (double& v : b.values) v *= c.diffusion();
    return b;
}

CompatibilityForms compatibility_forms(const GridPdf& rho_star, const PhysicalConstants& c) {
    const Grid& g = rho_star.grid();
    const double m = c.mass(), d = c.diffusion();
    // the root form is kept on every node above the density floor, not just the
    // unmasked core, so the far tails of rho_*^{1/2} stay stationary too
    const std::size_t n = g.size();
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = std::sqrt(rho_star[i]);
    const auto lap = laplacian(g, r);
    GridField root(g);
    std::size_t first = n, last = 0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (rho_star[i] > kDensityFloor) {
            root[i] = c.quantum_coefficient() * lap[i] / r[i];
            first = std::min(first, i);
            last = std::max(last, i);
        }
    }
    if (first > last) throw DegenerateDensityError("rho_* vanishes identically");
    for (std::size_t i = 0; i < first; ++i) root[i] = root[first];
    for (std::size_t i = last + 1; i < n; ++i) root[i] = root[last];

    GridField b = stationary_drift(rho_star, c);
    const auto db = gradient(g, b.values);
    GridField drift_form(g, std::vector<double>(g.size(), 0.0), b.masked);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!b.is_masked(i)) drift_form[i] = m * d * (b[i] * b[i] / (2.0 * d) + db[i]);
    }

    // gradient of b is one-sided at the mask edge and the boundary: compare inside
    double gap = 0.0, scale = 0.0;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        bool clear = true;
        for (std::size_t j = i - 2; j <= i + 2; ++j) clear = clear && !b.is_masked(j);
        if (!clear) continue;
        gap = std::max(gap, std::abs(root[i] - drift_form[i]));
        scale = std::max(scale, std::abs(root[i]));
    }
    CompatibilityForms out{std::move(root), std::move(drift_form), std::move(b), 0.0};
    out.relative_gap = scale > 0.0 ? gap / scale : gap;
    return out;
}

GridField compatibility_potential(const GridPdf& rho_star, const PhysicalConstants& c) {
    return std::move(compatibility_forms(rho_star, c).root_form);
}

std::vector<SemigroupState> evolve_semigroup(const GridField& psi0, const GridField& potential,
                                             const PhysicalConstants& c, double dt, std::size_t n_steps,
                                             std::size_t record_every) {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    require_grid(psi0.grid, potential.grid, "initial data and potential");
    if (record_every == 0) record_every = 1;
    const Grid& g = psi0.grid;
    for (double v : psi0.values) {
        if (!std::isfinite(v) || v < 0.0) throw DomainError("semigroup initial data must be finite and nonnegative");
    }
    const double ground = hamiltonian_ground_state(potential, c).energy;
    if (ground < -1e-4) {
        throw DomainError("potential is not renormalized (ground value " + std::to_string(ground) +
                          "); the semigroup is contractive only for a ground value of 0");
    }

    const std::size_t n = g.size(), m = n - 2;
    const double h = g.spacing(), d = c.diffusion();
    const double off = d / (h * h);
    std::vector<double> diag(m);
    for (std::size_t i = 0; i < m; ++i) diag[i] = -2.0 * off - potential[i + 1] / (2.0 * c.mass() * d);
    detail::LinearStepper stepper(std::vector<double>(m, off), std::move(diag), std::vector<double>(m, off), dt);

    std::vector<double> y(psi0.values.begin() + 1, psi0.values.end() - 1);
    auto snapshot = [&](double t) {
        GridField f(g);
        std::copy(y.begin(), y.end(), f.values.begin() + 1);
        return SemigroupState{std::move(f), t};
    };
    std::vector<SemigroupState> out;
    out.push_back(snapshot(0.0));
    for (std::size_t step = 1; step <= n_steps; ++step) {
        stepper.step(y, step - 1);
        const double peak = *std::max_element(y.begin(), y.end());
        const double low = *std::min_element(y.begin(), y.end());
        if (low < -1e-10 * std::max(peak, 0.0)) {
            throw StabilityError("semigroup solution turned negative at step " + std::to_string(step) +
                                 "; reduce dt");
        }
        if (step % record_every == 0 || step == n_steps) out.push_back(snapshot(static_cast<double>(step) * dt));
    }
    return out;
}

GridPdf semigroup_density(const SemigroupState& state, const GridPdf& rho_star) {
    require_grid(state.psi.grid, rho_star.grid(), "semigroup state and rho_*");
    std::vector<double> r(rho_star.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::max(state.psi[i], 0.0) * std::sqrt(rho_star[i]);
    return GridPdf(rho_star.grid(), std::move(r));
}

GridField semigroup_initial(const GridPdf& rho0, const GridPdf& rho_star) {
    require_grid(rho0.grid(), rho_star.grid(), "initial density and rho_*");
    GridField psi(rho0.grid());
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double root = std::sqrt(rho_star[i]);
        if (rho0[i] == 0.0) continue;
        if (!(root > 0.0)) throw DegenerateDensityError("rho_* vanishes where the initial density does not");
        psi[i] = rho0[i] / root;
    }
    return psi;
}

std::vector<DensitySnapshot> evolve_fokker_planck(const GridPdf& rho0, const GridField& drift,
                                                  const PhysicalConstants& c, double dt, std::size_t n_steps,
                                                  std::size_t record_every) {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    require_grid(rho0.grid(), drift.grid, "initial density and drift");
    if (record_every == 0) record_every = 1;
    const Grid& g = rho0.grid();
    const std::size_t n = g.size();
    const double h = g.spacing(), d = c.diffusion();

    std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0);
    auto weight = [&](std::size_t i) { return (i == 0 || i + 1 == n) ? 0.5 * h : h; };
    for (std::size_t i = 0; i + 1 < n; ++i) {
        // J_{i+1/2} = (D/h) [B(-P) rho_i - B(P) rho_{i+1}], P = b h / D at the face
        const double face = 0.5 * (drift[i] + drift[i + 1]);
        const double p = face * h / d;
        const double left = d / h * bernoulli(-p);
        const double right = d / h * bernoulli(p);
        diag[i] -= left / weight(i);
        upper[i] += right / weight(i);
        lower[i + 1] += left / weight(i + 1);
        diag[i + 1] -= right / weight(i + 1);
    }
    detail::LinearStepper stepper(std::move(lower), std::move(diag), std::move(upper), dt);

    std::vector<double> y(rho0.values().begin(), rho0.values().end());
    std::vector<DensitySnapshot> out;
    out.push_back({rho0, 0.0});
    for (std::size_t step = 1; step <= n_steps; ++step) {
        stepper.step(y, step - 1);
        const double peak = *std::max_element(y.begin(), y.end());
        const double low = *std::min_element(y.begin(), y.end());
        if (low < -1e-10 * peak) {
            throw StabilityError("Fokker-Planck density turned negative at step " + std::to_string(step) +
                                 "; reduce dt");
        }
        if (step % record_every == 0 || step == n_steps) {
            std::vector<double> clipped(y);
            for (double& v : clipped) v = std::max(v, 0.0);
            GridPdf rho(g, std::move(clipped));
            const double leak = boundary_band_mass(rho);
            if (leak > 1e-6) {
                throw BoxError("boundary mass " + std::to_string(leak) + " exceeds 1e-6 at t = " +
                               std::to_string(static_cast<double>(step) * dt) + "; enlarge the box");
            }
            out.push_back({std::move(rho), static_cast<double>(step) * dt});
        }
    }
    return out;
}

BrownianFields brownian_fields(const DensitySnapshot& snap, const GridField& drift, const PhysicalConstants& c) {
    require_grid(snap.rho.grid(), drift.grid, "density and drift");
    GridField u = osmotic_velocity(snap.rho, c);
    GridField v(drift.grid, std::vector<double>(drift.size(), 0.0), merge_masks(u.masked, drift.masked));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v.is_masked(i)) v[i] = drift[i] - u[i];
    }
    GridField q = quantum_potential(snap.rho, c);
    return BrownianFields{snap.rho, std::move(u), std::move(v), std::move(q), snap.time};
}

double brownian_invariant(const BrownianFields& f, const GridField& potential, const PhysicalConstants& c) {
    std::vector<double> e(f.rho.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        e[i] = 0.5 * c.mass() * (f.v[i] * f.v[i] - f.u[i] * f.u[i]) - potential[i];
    }
    return expectation(f.rho, GridField(f.rho.grid(), std::move(e), f.v.masked));
}

GridField brownian_gradient_residual(const BrownianFields& before, const BrownianFields& after,
                                     const GridField& potential, const PhysicalConstants& c, double core) {
    const Grid& g = before.rho.grid();
    require_grid(g, after.rho.grid(), "snapshots");
    const double dt = after.time - before.time;
    if (!(dt > 0.0)) throw DomainError("snapshots must be ordered in time");
    const std::size_t n = g.size();
    std::vector<double> vbar(n), vq(n);
    for (std::size_t i = 0; i < n; ++i) {
        vbar[i] = 0.5 * (before.v[i] + after.v[i]);
        vq[i] = potential[i] + 0.5 * (before.Q[i] + after.Q[i]);
    }
    const auto gv = gradient(g, vbar);
    const auto gvq = gradient(g, vq);
    const double peak = std::max(before.rho.max_value(), after.rho.max_value());
    std::vector<double> r(n, 0.0);
    std::vector<bool> mask(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const bool edge = i < 2 || i + 2 >= n;
        const bool thin = before.rho[i] < core * peak || after.rho[i] < core * peak;
        if (edge || thin || before.v.is_masked(i) || after.v.is_masked(i)) {
            mask[i] = true;
            continue;
        }
        r[i] = (after.v[i] - before.v[i]) / dt + vbar[i] * gv[i] - gvq[i] / c.mass();
    }
    return GridField(g, std::move(r), std::move(mask));
}

BrownianResidual brownian_hydro_residuals(const std::vector<DensitySnapshot>& snaps, const GridField& drift,
                                          const GridField& potential, const PhysicalConstants& c, double core) {
    if (snaps.size() < 2) throw DomainError("residuals need at least two snapshots");
    BrownianResidual out{GridField(drift.grid), 0.0, {}, {}, 0.0};
    for (const auto& s : snaps) {
        const BrownianFields f = brownian_fields(s, drift, c);
        std::vector<double> half_u2(f.u.size());
        for (std::size_t i = 0; i < half_u2.size(); ++i) half_u2[i] = 0.5 * c.mass() * f.u[i] * f.u[i];
        const double osmotic = expectation(f.rho, GridField(f.rho.grid(), std::move(half_u2), f.u.masked));
        const double hm = brownian_invariant(f, potential, c);
        out.h_minus.push_back(hm);
        out.osmotic_energy.push_back(osmotic);
        out.max_relative_h_minus = std::max(out.max_relative_h_minus, std::abs(hm) / osmotic);
    }
    const auto before = brownian_fields(snaps[snaps.size() - 2], drift, c);
    const auto after = brownian_fields(snaps.back(), drift, c);
    out.gradient_form = brownian_gradient_residual(before, after, potential, c, core);
    out.max_gradient_form = out.gradient_form.max_abs();
    return out;
}

}  // namespace qplab
