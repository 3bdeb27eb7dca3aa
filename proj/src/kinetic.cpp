#include "qplab/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qplab {

namespace {

// grad P / w written as grad(P/w) + (P/w) grad ln w, so that ratios which
// are smooth (often polynomial) are differentiated instead of P itself
std::vector<double> grad_over_density(const Grid& g, const std::vector<double>& ratio, const GridField& dlog) {
    auto out = gradient(g, ratio);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += ratio[i] * dlog[i];
    return out;
}

std::vector<bool> widen(std::vector<bool> m, std::size_t n, std::size_t by) {
    if (m.empty()) m.assign(n, false);
    for (std::size_t k = 0; k < by; ++k) {
        std::vector<bool> next(m);
        for (std::size_t i = 0; i < n; ++i) {
            if (!m[i]) continue;
            if (i > 0) next[i - 1] = true;
            if (i + 1 < n) next[i + 1] = true;
        }
        next.front() = true;
        next.back() = true;
        m = std::move(next);
    }
    return m;
}

double masked_max(const GridField& f, const std::vector<bool>& mask) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!mask[i]) m = std::max(m, std::abs(f[i]));
    }
    return m;
}

std::vector<bool> core_mask(const GridPdf& rho, double core, const std::vector<bool>& base, std::size_t widen_by) {
    auto m = merge_masks(widen(base, rho.size(), widen_by), density_core_mask(rho, core));
    return m;
}

// Trapezoid integral of f over [a, b], requiring the nodes involved to be unmasked.
double interval_integral(const Grid& g, const std::vector<double>& f, const std::vector<bool>& mask, double a,
                         double b) {
    const std::size_t first = g.cell_index(a), last = std::min(g.cell_index(b) + 1, g.size() - 1);
    for (std::size_t i = first; i <= last; ++i) {
        if (!mask.empty() && mask[i]) throw DomainError("interval reaches the masked tail of the density");
    }
    return integrate_interval(g, f, a, b);
}

}  // namespace

Grid large_friction_grid(double t, const PhysicalConstants& c, std::size_t n_points) {
    if (!(t > 0.0)) throw DomainError("time must be positive");
    const double s = std::sqrt(2.0 * c.diffusion() * t);
    return Grid(-8.0 * s, 8.0 * s, n_points);
}

LocalMoments large_friction_moments(double t, const PhysicalConstants& c, std::optional<Grid> grid) {
    const double beta = c.friction();
    if (!(t > 0.5 / beta)) {
        throw RegimeError("large-friction moments need t > 1/(2 beta) = " + std::to_string(0.5 / beta) +
                          ", got t = " + std::to_string(t));
    }
    const Grid g = grid ? *grid : large_friction_grid(t, c);
    const double d = c.diffusion();
    const double m = c.mass();
    const std::size_t n = g.size();
    std::vector<double> w(n), um(n), u2(n), pk(n), tk(n);
    const double spread = d * beta - d / (2.0 * t);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = g.x(i);
        w[i] = std::exp(-x * x / (4.0 * d * t)) / std::sqrt(4.0 * M_PI * d * t);
        um[i] = x / (2.0 * t);
        u2[i] = spread + um[i] * um[i];
        pk[i] = (u2[i] - um[i] * um[i]) * w[i];
        tk[i] = m * spread;
    }
    GridPdf pdf(g, w);
    GridField posm = osmotic_pressure(pdf, c);
    GridField tosm = osmotic_temperature(pdf, c);
    return LocalMoments{t,
                        std::move(pdf),
                        GridField(g, std::move(um)),
                        GridField(g, std::move(u2)),
                        GridField(g, std::move(pk)),
                        std::move(posm),
                        GridField(g, std::move(tk)),
                        std::move(tosm),
                        c.kbt()};
}

double mean_velocity_consistency(const LocalMoments& m, const PhysicalConstants& c) {
    const GridField dlog = log_density_gradient(m.w);
    double worst = 0.0;
    for (std::size_t i = 0; i < dlog.size(); ++i) {
        if (!dlog.is_masked(i)) worst = std::max(worst, std::abs(m.u_mean[i] + c.diffusion() * dlog[i]));
    }
    return worst;
}

double temperature_balance(const LocalMoments& m) {
    double worst = 0.0;
    for (std::size_t i = 0; i < m.Theta_osm.size(); ++i) {
        if (!m.Theta_osm.is_masked(i)) worst = std::max(worst, std::abs(m.Theta_kin[i] + m.Theta_osm[i] - m.kbt));
    }
    return worst;
}

PressureBalance pressure_balance_residual(const LocalMoments& m, const PhysicalConstants& c, double core) {
    const Grid& g = m.w.grid();
    const std::size_t n = g.size();
    const double t = m.time;
    const double dt = 1e-4 * t;
    const LocalMoments early = large_friction_moments(t - dt, c, g);
    const LocalMoments late = large_friction_moments(t + dt, c, g);

    const GridField dlog = log_density_gradient(m.w);
    std::vector<double> kin_ratio(n), osm_ratio(n), w(m.w.values().begin(), m.w.values().end());
    for (std::size_t i = 0; i < n; ++i) {
        kin_ratio[i] = m.u2_mean[i] - m.u_mean[i] * m.u_mean[i];
        osm_ratio[i] = m.P_osm.is_masked(i) ? 0.0 : m.P_osm[i] / w[i];
    }
    const auto gkin = grad_over_density(g, kin_ratio, dlog);
    const auto gosm = grad_over_density(g, osm_ratio, dlog);
    const auto gv = gradient(g, m.u_mean.values);
    const GridField q = quantum_potential(m.w, c);
    const auto gq = gradient(g, q.values);

    PressureBalance r{GridField(g), GridField(g), GridField(g), GridField(g), GridField(g), 0.0};
    const double beta = c.friction();
    for (std::size_t i = 0; i < n; ++i) {
        const double v = m.u_mean[i];
        const double conv = (late.u_mean[i] - early.u_mean[i]) / (2.0 * dt) + v * gv[i];
        r.kinetic[i] = -gkin[i] - beta * v + gosm[i];
        r.transport[i] = conv + gosm[i];
        r.quantum[i] = -gosm[i] - gq[i] / c.mass();
        r.momentum[i] = conv + beta * v + gkin[i];
        r.osmotic[i] = -gosm[i] * w[i] - c.diffusion() / (2.0 * t) * w[i] * dlog[i];
    }
    const auto mask = core_mask(m.w, core, merge_masks(m.P_osm.masked, q.masked), 2);
    for (GridField* f : {&r.kinetic, &r.transport, &r.quantum, &r.momentum, &r.osmotic}) {
        f->masked = mask;
        r.max_abs = std::max(r.max_abs, masked_max(*f, mask));
    }
    return r;
}

ThermalLaw thermal_energy_law(double t, const PhysicalConstants& c, double x, std::optional<Grid> grid) {
    const Grid g = grid ? *grid : large_friction_grid(t, c, 1601);
    const double dt = 1e-3 * t;
    const LocalMoments now = large_friction_moments(t, c, g);
    const LocalMoments early = large_friction_moments(t - dt, c, g);
    const LocalMoments late = large_friction_moments(t + dt, c, g);
    const std::size_t i = std::min(g.cell_index(x) + (x - g.x(g.cell_index(x)) > 0.5 * g.spacing() ? 1 : 0),
                                   g.size() - 1);
    if (now.Theta_osm.is_masked(i) || i == 0 || i + 1 == g.size()) {
        throw DomainError("evaluation point lies in the masked tail");
    }
    const auto gtheta = gradient(g, now.Theta_osm.values);
    const auto gv = gradient(g, now.u_mean.values);
    ThermalLaw law;
    law.lhs = (late.Theta_osm[i] - early.Theta_osm[i]) / (2.0 * dt) + now.u_mean[i] * gtheta[i];
    law.rhs = -2.0 * gv[i] * now.Theta_osm[i];
    law.expected = -c.mass() * c.diffusion() / (2.0 * t * t);
    return law;
}

double DropletBalance::mass_closure() const { return dominant > 0.0 ? std::abs(mass_rate) / dominant : 0.0; }
double DropletBalance::momentum_closure() const {
    return dominant > 0.0 ? std::abs(momentum_rate - momentum_rhs) / dominant : 0.0;
}
double DropletBalance::energy_closure() const {
    return dominant > 0.0 ? std::abs(energy_rate - energy_rhs) / dominant : 0.0;
}
double DropletBalance::power_closure() const {
    const double s = std::max(std::abs(power_lhs), std::abs(power_rhs));
    return s > 0.0 ? std::abs(power_lhs - power_rhs) / s : 0.0;
}

PowerRelease power_release(const FlowSnapshot& s, double alpha, double beta, const PhysicalConstants& c) {
    if (!(beta > alpha)) throw DomainError("interval must satisfy alpha < beta");
    const Grid& g = s.rho.grid();
    const std::size_t n = g.size();
    const GridField q = quantum_potential(s.rho, c);
    const GridField p = osmotic_pressure(s.rho, c);
    const auto gq = gradient(g, q.values);
    const auto gp = gradient(g, p.values);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = s.rho[i] * s.v[i] * gq[i];
        b[i] = -c.mass() * s.v[i] * gp[i];
    }
    const auto mask = widen(merge_masks(q.masked, p.masked), n, 1);
    return PowerRelease{interval_integral(g, a, mask, alpha, beta), interval_integral(g, b, mask, alpha, beta)};
}

DropletBalance droplet_balances(const FlowSnapshot& now, const FlowSnapshot& next, const GridField& potential,
                                double alpha, double beta, Motion motion, const PhysicalConstants& c) {
    const Grid& g = now.rho.grid();
    if (!(next.rho.grid() == g) || !(potential.grid == g)) throw SizeError("snapshots live on different grids");
    if (!(beta > alpha)) throw DomainError("interval must satisfy alpha < beta");
    const double dt = next.time - now.time;
    if (!(dt > 0.0)) throw DomainError("snapshots must be ordered in time");
    const std::size_t n = g.size();
    const double sgn = motion == Motion::brownian ? 1.0 : -1.0;
    const double m = c.mass();

    const GridField q = quantum_potential(now.rho, c);
    const GridField posm = osmotic_pressure(now.rho, c);
    const auto base = widen(merge_masks(merge_masks(q.masked, posm.masked), now.v.masked), n, 1);

    std::vector<double> vq(n);
    for (std::size_t i = 0; i < n; ++i) vq[i] = potential[i] + q[i];
    const auto gvq = gradient(g, vq);
    const auto gV = gradient(g, potential.values);

    auto field = [&](const FlowSnapshot& s, int power) {
        std::vector<double> f(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = s.v[i];
            f[i] = power == 0 ? s.rho[i] : power == 1 ? s.rho[i] * v : 0.5 * s.rho[i] * v * v;
        }
        return f;
    };
    const double va = interpolate(g, now.v.values, alpha), vb = interpolate(g, now.v.values, beta);
    const double a1 = alpha + va * dt, b1 = beta + vb * dt;
    const auto next_mask = merge_masks(next.rho.mask(), next.v.masked);

    DropletBalance r;
    r.time = now.time;
    r.dt = dt;
    auto rate = [&](int power) {
        return (interval_integral(g, field(next, power), next_mask, a1, b1) -
                interval_integral(g, field(now, power), base, alpha, beta)) /
               dt;
    };
    r.mass_rate = rate(0);
    r.momentum_rate = rate(1);
    r.energy_rate = rate(2);
    r.mass_flux = std::max(std::abs(interpolate(g, field(now, 1), alpha)), std::abs(interpolate(g, field(now, 1), beta)));

    std::vector<double> force(n), power(n), dv(n);
    for (std::size_t i = 0; i < n; ++i) {
        force[i] = sgn * now.rho[i] * gvq[i] / m;
        power[i] = force[i] * now.v[i];
        dv[i] = now.rho[i] * gV[i] / m;
    }
    r.momentum_rhs = interval_integral(g, force, base, alpha, beta);
    r.energy_rhs = interval_integral(g, power, base, alpha, beta);
    const double pa = sgn * interpolate(g, posm.values, alpha), pb = sgn * interpolate(g, posm.values, beta);
    r.momentum_pressure = sgn * interval_integral(g, dv, base, alpha, beta) + pa - pb;

    const PowerRelease pr = power_release(now, alpha, beta, c);
    r.power_lhs = pr.lhs;
    r.power_rhs = pr.rhs;
    r.dominant = std::max({r.mass_flux, std::abs(r.momentum_rate), std::abs(r.momentum_rhs), std::abs(r.energy_rate),
                           std::abs(r.energy_rhs)});
    return r;
}

HeatTransfer quantum_heat_transfer_residual(const FlowSnapshot& before, const FlowSnapshot& centre,
                                            const FlowSnapshot& after, const PhysicalConstants& c, double core) {
    const Grid& g = centre.rho.grid();
    if (!(before.rho.grid() == g) || !(after.rho.grid() == g)) throw SizeError("snapshots live on different grids");
    const double span = after.time - before.time;
    if (!(span > 0.0)) throw DomainError("snapshots must be ordered in time");
    const std::size_t n = g.size();
    const double k = 0.5 * c.mass() * c.diffusion() * c.diffusion();

    const GridField t0 = osmotic_temperature(before.rho, c);
    const GridField t1 = osmotic_temperature(centre.rho, c);
    const GridField t2 = osmotic_temperature(after.rho, c);
    const GridField dlog = log_density_gradient(centre.rho);
    const auto& v = centre.v.values;
    const auto gv = gradient(g, v);
    const auto lv = laplacian(g, v);
    const auto glv = gradient(g, lv);
    const auto gt = gradient(g, t1.values);

    HeatTransfer r{t1, GridField(g), GridField(g), GridField(g), GridField(g), GridField(g), 0.0, 0.0, 0.0};
    std::vector<double> heat_term(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.heat[i] = -k * centre.rho[i] * lv[i];
        // grad q / rho = -k (grad Delta v + Delta v grad ln rho)
        heat_term[i] = -2.0 * (-k) * (glv[i] + lv[i] * dlog[i]);
        r.lhs[i] = (t2[i] - t0[i]) / span + v[i] * gt[i];
        r.rhs[i] = heat_term[i] - 2.0 * gv[i] * t1[i];
        r.reduced[i] = r.lhs[i] + 2.0 * gv[i] * t1[i];
        r.residual[i] = r.lhs[i] - r.rhs[i];
    }
    auto base = merge_masks(merge_masks(t0.masked, t1.masked), merge_masks(t2.masked, centre.v.masked));
    const auto mask = core_mask(centre.rho, core, base, 2);
    for (GridField* f : {&r.heat, &r.lhs, &r.rhs, &r.reduced, &r.residual}) f->masked = mask;
    r.max_residual = masked_max(r.residual, mask);
    r.max_heat_term = masked_max(GridField(g, heat_term), mask);
    r.scale = masked_max(r.lhs, mask);
    return r;
}

}  // namespace qplab
