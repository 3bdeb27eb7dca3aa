#include "qplab/recoil.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qplab {

void MatterState::validate() const {
    if (!(v.grid == rho.grid())) throw SizeError("rho and v live on different grids");
    rho.require_normalized(1e-5);
}

const char* impulse_branch_name(ImpulseBranch b) {
    return b == ImpulseBranch::brownian ? "brownian" : "anti_brownian";
}

GridField log_quantum_potential(const GridPdf& rho, const PhysicalConstants& c) {
    const Grid& g = rho.grid();
    std::vector<double> lr(rho.size());
    for (std::size_t i = 0; i < lr.size(); ++i) lr[i] = std::log(std::max(rho[i], kDensityFloor));
    const auto g1 = gradient(g, lr);
    const auto g2 = laplacian(g, lr);
    std::vector<double> q(rho.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = -c.quantum_coefficient() * (0.5 * g2[i] + 0.25 * g1[i] * g1[i]);
    return GridField(g, std::move(q));
}

GridField impulse_pulse(const MatterState& s, const GridField& potential, double dt, ImpulseBranch branch) {
    const Grid& g = s.rho.grid();
    if (!(potential.grid == g)) throw SizeError("potential lives on a different grid");
    const GridField q = log_quantum_potential(s.rho, s.constants);
    std::vector<double> w(g.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = potential[i] + q[i];
    auto p = gradient(g, w);
    const double k = (branch == ImpulseBranch::brownian ? 1.0 : -1.0) * dt / s.constants.mass();
    for (double& x : p) x *= k;
    return GridField(g, std::move(p));
}

MatterState impulse_step(const MatterState& s, const GridField& potential, double dt, ImpulseBranch branch,
                         ImpulseLog* log) {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    s.validate();
    const Grid& g = s.rho.grid();
    const std::size_t n = g.size();
    const auto gv = gradient(g, s.v.values);
    double worst = 0.0;
    for (double x : gv) worst = std::max(worst, std::abs(x));
    if (dt * worst >= 0.1) {
        throw StabilityError("dt max|grad v| = " + std::to_string(dt * worst) + " >= 0.1; reduce dt");
    }
    std::vector<double> lr(n);
    for (std::size_t i = 0; i < n; ++i) lr[i] = std::log(std::max(s.rho[i], kDensityFloor));
    const auto glr = gradient(g, lr);
    const GridField pulse = impulse_pulse(s, potential, dt, branch);

    // grad(v rho) = rho (grad v + v grad ln rho)
    std::vector<double> rho(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
        rho[i] = s.rho[i] * (1.0 - dt * (gv[i] + s.v[i] * glr[i]));
        if (!(rho[i] >= 0.0)) {
            throw StabilityError("density turned negative at x = " + std::to_string(g.x(i)) + "; reduce dt");
        }
        v[i] = s.v[i] - dt * s.v[i] * gv[i] + pulse[i];
    }
    GridPdf next(g, std::move(rho));
    const double drift = next.mass() - s.rho.mass();
    if (log) {
        log->pulse = pulse;
        log->mass_drift = drift;
    }
    return MatterState{next.normalized(), GridField(g, std::move(v)), s.time + dt, s.constants};
}

RecoilRun recoil_trajectory(const MatterState& s0, const GridField& potential, double dt, std::size_t n_steps,
                            std::size_t record_every, ImpulseBranch branch) {
    if (record_every == 0) record_every = 1;
    RecoilRun run;
    const ImpulseBranch other =
        branch == ImpulseBranch::anti_brownian ? ImpulseBranch::brownian : ImpulseBranch::anti_brownian;
    auto record = [&](const MatterState& s) {
        GridField applied = impulse_pulse(s, potential, dt, branch);
        GridField kept = impulse_pulse(s, potential, dt, other);
        run.states.push_back(s);
        if (branch == ImpulseBranch::anti_brownian) {
            run.anti_pulse.push_back(std::move(applied));
            run.brownian_pulse.push_back(std::move(kept));
        } else {
            run.brownian_pulse.push_back(std::move(applied));
            run.anti_pulse.push_back(std::move(kept));
        }
    };
    s0.validate();
    MatterState s = s0;
    record(s);
    ImpulseLog log{GridField(s0.rho.grid()), 0.0};
    for (std::size_t k = 1; k <= n_steps; ++k) {
        s = impulse_step(s, potential, dt, branch, &log);
        run.mass_drift.push_back(log.mass_drift);
        run.max_mass_drift = std::max(run.max_mass_drift, std::abs(log.mass_drift));
        if (k % record_every == 0 || k == n_steps) record(s);
    }
    return run;
}

double matter_distance(const MatterState& a, const GridPdf& rho_ref, const GridField& v_ref, double core) {
    const Grid& g = a.rho.grid();
    auto at = [&](std::span<const double> f, const Grid& fg, double x) { return interpolate(fg, f, x); };
    const double peak = rho_ref.max_value();
    double d = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.x(i);
        if (x < rho_ref.grid().x_min() || x > rho_ref.grid().x_max()) continue;
        const double r = at(rho_ref.values(), rho_ref.grid(), x);
        if (r < core * peak) continue;
        d = std::max(d, std::abs(a.rho[i] - r));
        d = std::max(d, std::abs(a.v[i] - at(v_ref.values, v_ref.grid, x)));
    }
    return d;
}

ImpulseReport impulse_momentum_report(const DriftPair& before, const DriftPair& after, double spacing,
                                      const GridPdf& rho, const GridField& potential, Motion motion,
                                      const PhysicalConstants& c, double dt, double core) {
    const Grid& g = rho.grid();
    const std::size_t n = g.size();
    if (!(potential.grid == g)) throw SizeError("potential lives on a different grid");
    ImpulseReport r{motion,
                    dt,
                    acceleration(before, after, spacing, AccelerationKind::forward, c),
                    acceleration(before, after, spacing, AccelerationKind::backward, c),
                    GridField(g),
                    GridField(g)};
    const GridField q = quantum_potential(rho, c);
    const auto gvq = [&] {
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = potential[i] + q[i];
        return gradient(g, w);
    }();
    const auto gv = gradient(g, potential.values);
    const auto gq = gradient(g, q.values);
    const double m = c.mass();
    const double sign = motion == Motion::brownian ? 1.0 : -1.0;
    const double peak = rho.max_value();
    for (std::size_t i = 0; i < n; ++i) {
        r.forward[i] *= dt;
        r.backward[i] *= dt;
        const double diffusion = dt * gv[i] / m;
        const double quantum = -dt * (gv[i] + 2.0 * gq[i]) / m;
        // quantum -> diffusion by +(2/m) grad(V + Q) dt, and back by -
        r.predicted[i] = motion == Motion::brownian ? diffusion : quantum;
        r.mapped[i] = r.predicted[i] - sign * 2.0 * dt * gvq[i] / m;
        const double direct = motion == Motion::brownian ? quantum : diffusion;
        const bool skip = q.is_masked(i) || r.forward.is_masked(i) || r.backward.is_masked(i) || rho[i] < core * peak;
        if (skip) continue;
        r.max_forward_gap = std::max(r.max_forward_gap, std::abs(r.forward[i] - r.predicted[i]));
        r.max_backward_gap = std::max(r.max_backward_gap, std::abs(r.backward[i] - r.predicted[i]));
        r.mapping_closure = std::max(r.mapping_closure, std::abs(r.mapped[i] - direct));
        r.scale = std::max(r.scale, std::abs(r.predicted[i]));
    }
    r.mapped.masked = q.masked;
    r.predicted.masked = q.masked;
    return r;
}

}  // namespace qplab
