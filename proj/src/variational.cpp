#include "qplab/variational.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "qplab/brownian.hpp"
#include "qplab/functionals.hpp"
#include "qplab/quantum.hpp"
#include "qplab/spectrum.hpp"

namespace qplab {

namespace {

constexpr int kMaxDoublings = 60;
constexpr int kMaxBisections = 200;

double weighted_mean(const Grid& g, std::span<const double> w, std::span<const double> f) {
    std::vector<double> wf(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) wf[i] = w[i] * f[i];
    return quadrature(g, wf) / quadrature(g, w);
}

// Bisection for a monotone scalar map; `increasing` gives the direction.
// The bracket is widened first (lo shrinks toward `floor` when positive-only).
struct Solve {
    double root;
    std::size_t iterations;
};

Solve bisect(const std::function<double(double)>& mean, double zeta, double lo, double hi, bool increasing,
             bool positive_only) {
    auto below = [&](double a) { return increasing ? mean(a) <= zeta : mean(a) >= zeta; };
    int k = 0;
    while (!below(lo)) {
        if (++k > kMaxDoublings) throw ConstraintError("constraint value is not reachable: bracket widening failed");
        if (positive_only) {
            hi = lo;
            lo *= 0.5;
        } else {
            hi = std::min(hi, lo);
            lo = lo < 0.0 ? 2.0 * lo : lo - 2.0 * (std::abs(lo) + 1.0);
        }
    }
    k = 0;
    while (below(hi)) {
        if (++k > kMaxDoublings) throw ConstraintError("constraint value is not reachable: bracket widening failed");
        lo = std::max(lo, hi);
        hi = hi > 0.0 ? 2.0 * hi : hi + 2.0 * (std::abs(hi) + 1.0);
    }
    // monotonicity on the final bracket, checked rather than assumed
    const double mlo = mean(lo), mhi = mean(hi);
    if (increasing ? !(mlo <= mhi) : !(mlo >= mhi)) throw ConstraintError("constraint map is not monotone on the bracket");

    std::size_t it = 0;
    for (; it < kMaxBisections; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (below(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-14 * std::max(1.0, std::abs(mid))) break;
    }
    return Solve{0.5 * (lo + hi), it};
}

GridField scaled(const GridField& v, double s) {
    GridField out = v;
    for (double& x : out.values) x *= s;
    return out;
}

GridField action_from_velocity(const GridPdf& rho, const GridField& v, const PhysicalConstants& c) {
    std::size_t anchor = 0;
    while (anchor < v.size() && v.is_masked(anchor)) ++anchor;
    if (anchor == v.size()) anchor = 0;
    std::vector<double> p(v.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = v.is_masked(i) ? 0.0 : c.mass() * v[i];
    return GridField(rho.grid(), cumulative_quadrature(rho.grid(), p, anchor), v.masked);
}

}  // namespace

GridPdf max_entropy_family(const GridField& potential, double alpha) {
    const Grid& g = potential.grid;
    const auto [mn, mx] = std::minmax_element(potential.values.begin(), potential.values.end());
    // shift so the largest exponent is zero
    const double ref = alpha >= 0.0 ? *mx : *mn;
    std::vector<double> w(g.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(alpha * (potential[i] - ref));
    return GridPdf(g, std::move(w)).normalized();
}

double max_entropy_mean(const GridField& potential, double alpha) {
    const GridPdf rho = max_entropy_family(potential, alpha);
    return weighted_mean(potential.grid, rho.values(), potential.values);
}

ExtremumSolution max_entropy_pdf(const GridField& potential, double zeta, Bracket bracket) {
    const Grid& g = potential.grid;
    for (double v : potential.values) {
        if (!std::isfinite(v)) throw DomainError("potential must be finite");
    }
    const auto [mn, mx] = std::minmax_element(potential.values.begin(), potential.values.end());
    const double span = *mx - *mn;
    const double tol = 1e-6 * std::max(1.0, std::abs(zeta));
    if (span <= 1e-14 * std::max(1.0, std::abs(*mx))) {
        if (std::abs(zeta - *mx) > tol) throw ConstraintError("constant potential cannot reach the constraint value");
        GridPdf rho = max_entropy_family(potential, 0.0);
        return ExtremumSolution{rho, 0.0, zeta, *mx, shannon_entropy(rho), true, 0};
    }
    if (!(zeta > *mn && zeta < *mx)) {
        throw ConstraintError("constraint value " + std::to_string(zeta) + " lies outside the attainable range (" +
                              std::to_string(*mn) + ", " + std::to_string(*mx) + ")");
    }
    if (!(bracket.lo < bracket.hi)) throw DomainError("bracket must satisfy lo < hi");

    auto mean = [&](double a) { return max_entropy_mean(potential, a); };
    const Solve s = bisect(mean, zeta, bracket.lo, bracket.hi, true, false);
    GridPdf rho = max_entropy_family(potential, s.root);
    const double achieved = weighted_mean(g, rho.values(), potential.values);
    if (boundary_band_mass(rho) > 1e-6) {
        throw DivergenceError("exp(alpha V) with alpha = " + std::to_string(s.root) +
                              " is not integrable: the mass piles up at the box walls");
    }
    if (std::abs(achieved - zeta) > tol) throw ConstraintError("bisection did not close the constraint");
    return ExtremumSolution{rho, s.root, zeta, achieved, shannon_entropy(rho), false, s.iterations};
}

GridPdf fisher_family(const GridField& potential, double lambda) {
    if (!(lambda > 0.0)) throw ConstraintError("the Fisher extremum needs lambda > 0 with a confining V");
    const GroundState gs = discrete_ground_state(scaled(potential, 0.25 * lambda), 1.0);
    std::vector<double> rho(gs.amplitude.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = gs.amplitude[i] * gs.amplitude[i];
    return GridPdf(potential.grid, std::move(rho)).normalized();
}

double fisher_brownian_lambda(const PhysicalConstants& c) {
    return 2.0 / (c.mass() * c.diffusion() * c.diffusion());
}

ExtremumSolution fisher_extremum_pdf(const GridField& potential, double zeta, Bracket bracket) {
    const Grid& g = potential.grid;
    for (double v : potential.values) {
        if (!std::isfinite(v)) throw DomainError("potential must be finite");
    }
    const std::size_t n = g.size();
    const double vmin = *std::min_element(potential.values.begin(), potential.values.end());
    // confining: rises from its minimum toward both walls
    const std::size_t argmin =
        static_cast<std::size_t>(std::min_element(potential.values.begin(), potential.values.end()) -
                                 potential.values.begin());
    if (argmin == 0 || argmin + 1 == n || !(potential[0] > vmin) || !(potential[n - 1] > vmin)) {
        throw ConstraintError("(lambda/4) V must be confining on the box: V has to rise toward both walls");
    }
    if (!(zeta > vmin)) throw ConstraintError("constraint value lies below min V");
    if (!(bracket.lo > 0.0 && bracket.lo < bracket.hi)) throw DomainError("bracket must satisfy 0 < lo < hi");

    auto mean = [&](double lambda) {
        const GridPdf rho = fisher_family(potential, lambda);
        return weighted_mean(g, rho.values(), potential.values);
    };
    const Solve s = bisect(mean, zeta, bracket.lo, bracket.hi, false, true);
    GridPdf rho = fisher_family(potential, s.root);
    if (boundary_band_mass(rho) > 1e-6) {
        throw SpectrumError("no ground state bound inside the box for lambda = " + std::to_string(s.root));
    }
    const double achieved = weighted_mean(g, rho.values(), potential.values);
    if (std::abs(achieved - zeta) > 1e-6 * std::max(1.0, std::abs(zeta))) {
        throw ConstraintError("bisection did not close the constraint");
    }
    return ExtremumSolution{rho, s.root, zeta, achieved, fisher_information(rho), false, s.iterations};
}

const char* branch_name(FisherBranch b) {
    switch (b) {
        case FisherBranch::quantum: return "quantum";
        case FisherBranch::brownian: return "brownian";
        case FisherBranch::classical: return "classical";
    }
    return "unknown";
}

FisherBranch classify_gamma(double gamma, const PhysicalConstants& c) {
    const double g0 = 0.5 * c.mass() * c.diffusion() * c.diffusion();
    const double tol = 1e-12 * g0;
    if (std::abs(gamma + g0) <= tol) return FisherBranch::quantum;
    if (std::abs(gamma - g0) <= tol) return FisherBranch::brownian;
    if (std::abs(gamma) <= tol) return FisherBranch::classical;
    throw BranchError("gamma = " + std::to_string(gamma) + " is not one of -mD^2/2, 0, +mD^2/2 (= -+" +
                      std::to_string(g0) + ")");
}

std::vector<BranchSnapshot> evolve_classical(const GridPdf& rho0, const GridField& s0, const GridField& potential,
                                             const PhysicalConstants& c, double dt, std::size_t n_steps,
                                             std::size_t record_every) {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    if (record_every == 0) record_every = 1;
    const Grid& g = rho0.grid();
    if (!(s0.grid == g) || !(potential.grid == g)) throw SizeError("inputs live on different grids");
    const std::size_t n = g.size();
    const double m = c.mass();
    const auto gv = gradient(g, potential.values);
    const auto v0 = gradient(g, s0.values);
    auto force = [&](double x) { return -interpolate(g, gv, x) / m; };
    auto pot = [&](double x) { return interpolate(g, potential.values, x); };

    std::vector<double> x(n), v(n), s(s0.values), a(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = g.x(i);
        v[i] = v0[i] / m;
        a[i] = force(x[i]);
    }

    auto snapshot = [&](double t) {
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (!(x[i + 1] > x[i])) {
                throw DivergenceError("classical characteristics cross at t = " + std::to_string(t) +
                                      " (caustic); the Hamilton-Jacobi field is no longer single valued");
            }
        }
        // Jacobian of the marker map and its inverse on the Eulerian grid
        const auto jac = gradient(g, x);
        std::vector<double> rm(n);
        for (std::size_t i = 0; i < n; ++i) rm[i] = rho0[i] / jac[i];
        std::vector<double> rho(n, 0.0), ss(n, 0.0), vv(n, 0.0);
        std::vector<bool> mask(n, true);
        for (std::size_t j = 0; j < n; ++j) {
            const double xe = g.x(j);
            if (xe < x.front() || xe > x.back()) continue;
            const auto k = std::min(static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), xe) - x.begin()),
                                    n - 1);
            const std::size_t lo = k == 0 ? 0 : k - 1;
            const double w = x[lo + 1] > x[lo] ? (xe - x[lo]) / (x[lo + 1] - x[lo]) : 0.0;
            rho[j] = std::max((1.0 - w) * rm[lo] + w * rm[lo + 1], 0.0);
            ss[j] = (1.0 - w) * s[lo] + w * s[lo + 1];
            vv[j] = (1.0 - w) * v[lo] + w * v[lo + 1];
            mask[j] = false;
        }
        GridPdf r(g, std::move(rho));
        GridField sv(g, std::move(ss), mask), vf(g, std::move(vv), mask);
        return BranchSnapshot{std::move(r), std::move(sv), std::move(vf), t};
    };

    std::vector<BranchSnapshot> out;
    out.push_back(snapshot(0.0));
    for (std::size_t step = 1; step <= n_steps; ++step) {
        for (std::size_t i = 0; i < n; ++i) {
            // ds/dt = (m/2) v^2 - V along the marker, trapezoid in time
            const double lag0 = 0.5 * m * v[i] * v[i] - pot(x[i]);
            const double vh = v[i] + 0.5 * dt * a[i];
            x[i] += dt * vh;
            a[i] = force(x[i]);
            v[i] = vh + 0.5 * dt * a[i];
            const double lag1 = 0.5 * m * v[i] * v[i] - pot(x[i]);
            s[i] += 0.5 * dt * (lag0 + lag1);
        }
        if (step % record_every == 0 || step == n_steps) out.push_back(snapshot(static_cast<double>(step) * dt));
    }
    return out;
}

BranchEvolution constrained_fisher_branches(const GridPdf& rho0, const GridField& s0, const GridField& potential,
                                            double gamma, int sign_v, const PhysicalConstants& c, double dt,
                                            std::size_t n_steps, std::size_t record_every) {
    if (sign_v != 1 && sign_v != -1) throw BranchError("the potential sign must be +1 or -1");
    const FisherBranch branch = classify_gamma(gamma, c);
    const Grid& g = rho0.grid();
    BranchEvolution out{branch, {}, GridField(g), GridField(g), 0.0};

    switch (branch) {
        case FisherBranch::quantum: {
            out.potential = scaled(potential, sign_v);
            const auto states = evolve_quantum(WaveFunction::from_density_phase(rho0, s0, c), out.potential, dt,
                                               n_steps, record_every);
            std::vector<HydroFields> fields;
            for (const WaveFunction& psi : states) {
                fields.push_back(madelung_fields(psi));
                HydroFields& f = fields.back();
                GridField s = f.s;
                for (double& x : s.values) x += f.anchor_phase;
                out.snapshots.push_back(BranchSnapshot{f.rho, std::move(s), f.v, f.time});
            }
            if (fields.size() >= 2) {
                out.hj_residual =
                    hj_residual_quantum(fields[fields.size() - 2], fields.back(), out.potential, c).max_gradient_form;
            }
            break;
        }
        case FisherBranch::brownian: {
            if (sign_v != -1) {
                throw BranchError("the diffusion branch (gamma = +mD^2/2) admits the potential term -V only");
            }
            out.potential = renormalize_potential(potential, c);
            const GroundState gs = hamiltonian_ground_state(potential, c);
            std::vector<double> star(g.size());
            for (std::size_t i = 0; i < star.size(); ++i) star[i] = gs.amplitude[i] * gs.amplitude[i];
            out.drift = stationary_drift(GridPdf(g, std::move(star)), c);
            const auto snaps = evolve_fokker_planck(rho0, out.drift, c, dt, n_steps, record_every);
            for (const DensitySnapshot& s : snaps) {
                BrownianFields f = brownian_fields(s, out.drift, c);
                out.snapshots.push_back(BranchSnapshot{f.rho, action_from_velocity(f.rho, f.v, c), f.v, f.time});
            }
            if (snaps.size() >= 2) {
                const std::vector<DensitySnapshot> last{snaps[snaps.size() - 2], snaps.back()};
                out.hj_residual = brownian_hydro_residuals(last, out.drift, out.potential, c).max_gradient_form;
            }
            break;
        }
        case FisherBranch::classical: {
            out.potential = scaled(potential, sign_v);
            out.snapshots = evolve_classical(rho0, s0, out.potential, c, dt, n_steps, record_every);
            if (out.snapshots.size() >= 2) {
                // d_t v + v grad v + grad(+-V)/m on the core of the later snapshot
                const BranchSnapshot& a = out.snapshots[out.snapshots.size() - 2];
                const BranchSnapshot& b = out.snapshots.back();
                const double span = b.time - a.time;
                std::vector<double> vm(g.size());
                for (std::size_t i = 0; i < vm.size(); ++i) vm[i] = 0.5 * (a.v[i] + b.v[i]);
                const auto gvm = gradient(g, vm);
                const auto gpot = gradient(g, out.potential.values);
                const double peak = std::max(a.rho.max_value(), b.rho.max_value());
                double worst = 0.0;
                for (std::size_t i = 2; i + 2 < g.size(); ++i) {
                    if (a.v.is_masked(i) || b.v.is_masked(i)) continue;
                    if (a.rho[i] < 1e-6 * peak || b.rho[i] < 1e-6 * peak) continue;
                    const double r = (b.v[i] - a.v[i]) / span + vm[i] * gvm[i] + gpot[i] / c.mass();
                    worst = std::max(worst, std::abs(r));
                }
                out.hj_residual = worst;
            }
            break;
        }
    }
    return out;
}

}  // namespace qplab
