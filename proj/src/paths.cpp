#include "qplab/paths.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qplab/functionals.hpp"
#include "qplab/random.hpp"

namespace qplab {

namespace {

// sampling and stepping use disjoint key spaces
constexpr std::uint64_t kSamplingDomain = 0x5a4d50ULL << 40;

// Cumulative trapezoid mass at the nodes, plus exact mass of the linear
// interpolant inside a cell.
struct PiecewiseCdf {
    Grid grid;
    std::vector<double> rho;
    std::vector<double> cum;

    explicit PiecewiseCdf(const GridPdf& p) : grid(p.grid()), rho(p.values().begin(), p.values().end()), cum(p.size()) {
        const double h = grid.spacing();
        for (std::size_t i = 1; i < rho.size(); ++i) cum[i] = cum[i - 1] + 0.5 * h * (rho[i - 1] + rho[i]);
        if (!(cum.back() > 0.0)) throw DegenerateDensityError("density has zero mass");
    }

    double total() const { return cum.back(); }

    double at(double x) const {
        if (x <= grid.x_min()) return 0.0;
        if (x >= grid.x_max()) return 1.0;
        const std::size_t j = grid.cell_index(x);
        const double s = x - grid.x(j);
        const double slope = (rho[j + 1] - rho[j]) / grid.spacing();
        return (cum[j] + rho[j] * s + 0.5 * slope * s * s) / total();
    }

    double invert(double u) const {
        const double target = u * total();
        auto it = std::upper_bound(cum.begin(), cum.end(), target);
        std::size_t j = it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
        j = std::min(j, cum.size() - 2);
        const double h = grid.spacing();
        const double r = target - cum[j];
        const double a = 0.5 * (rho[j + 1] - rho[j]) / h;
        const double b = rho[j];
        double s;
        if (std::abs(a) * h < 1e-12 * std::max(b, 1e-300)) {
            s = b > 0.0 ? r / b : 0.5 * h;
        } else {
            // a s^2 + b s - r = 0, root in [0, h]; cancellation-free form
            const double disc = std::max(b * b + 4.0 * a * r, 0.0);
            s = 2.0 * r / (b + std::sqrt(disc));
        }
        return grid.x(j) + std::clamp(s, 0.0, h);
    }
};

std::vector<bool> dilate(std::vector<bool> m, std::size_t n) {
    if (m.empty()) m.assign(n, false);
    std::vector<bool> out(m);
    for (std::size_t i = 0; i < n; ++i) {
        if (m[i]) {
            if (i > 0) out[i - 1] = true;
            if (i + 1 < n) out[i + 1] = true;
        }
    }
    out.front() = true;
    out.back() = true;
    return out;
}

GridField zero_masked(GridField f) {
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.is_masked(i)) f[i] = 0.0;
    }
    return f;
}

GridField average(const GridField& a, const GridField& b) {
    if (!(a.grid == b.grid)) throw SizeError("fields live on different grids");
    GridField out(a.grid);
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = 0.5 * (a[i] + b[i]);
    out.masked = merge_masks(a.masked, b.masked);
    return out;
}

DriftPair midpoint(const DriftPair& p, const DriftPair& q) {
    return DriftPair{average(p.b, q.b), average(p.b_star, q.b_star), average(p.v, q.v), average(p.u, q.u)};
}

}  // namespace

DriftFunction drift_function(const GridField& b) {
    GridField f = zero_masked(b);
    return [f = std::move(f)](double x, double) { return interpolate(f.grid, f.values, x); };
}

std::vector<double> sample_density(const GridPdf& rho, std::size_t n, std::uint64_t seed) {
    const PiecewiseCdf cdf(rho);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const CounterRng rng(seed ^ kSamplingDomain, i);
        out[i] = cdf.invert(rng.uniform(0));
    }
    return out;
}

std::vector<Ensemble> simulate_sde(const std::vector<double>& x0, const Grid& box, const DriftFunction& b,
                                   const PhysicalConstants& c, double dt, std::size_t n_steps, std::uint64_t seed,
                                   std::size_t record_every, double t0, std::size_t noise_refinement,
                                   std::size_t first_step) {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    if (noise_refinement == 0) throw DomainError("noise refinement must be at least 1");
    if (record_every == 0) record_every = 1;
    const double lo = box.x_min(), hi = box.x_max();
    for (double x : x0) {
        if (!(x >= lo && x <= hi)) throw DomainError("initial position outside the box");
    }
    const std::size_t n = x0.size();
    const double kick = std::sqrt(2.0 * c.diffusion() * dt);

    std::vector<CounterRng> streams;
    streams.reserve(n);
    for (std::size_t i = 0; i < n; ++i) streams.emplace_back(seed, i);

    std::vector<double> x(x0);
    std::vector<char> hit(n, 0);
    std::size_t reflected = 0;
    std::vector<Ensemble> out;
    out.push_back(Ensemble{x, t0, seed, c, 0});

    for (std::size_t step = 0; step < n_steps; ++step) {
        const double t = t0 + static_cast<double>(step) * dt;
        for (std::size_t i = 0; i < n; ++i) {
            double xi = 0.0;
            for (std::size_t r = 0; r < noise_refinement; ++r) {
                xi += streams[i].normal((first_step + step) * noise_refinement + r);
            }
            if (noise_refinement > 1) xi /= std::sqrt(static_cast<double>(noise_refinement));
            double y = x[i] + b(x[i], t) * dt + kick * xi;
            if (y < lo || y > hi) {
                y = y < lo ? 2.0 * lo - y : 2.0 * hi - y;
                y = std::clamp(y, lo, hi);
                if (!hit[i]) {
                    hit[i] = 1;
                    ++reflected;
                }
            }
            x[i] = y;
        }
        if (n > 0 && static_cast<double>(reflected) > 0.01 * static_cast<double>(n)) {
            throw BoxError(std::to_string(reflected) + " of " + std::to_string(n) +
                           " particles reached the walls; enlarge the box");
        }
        if ((step + 1) % record_every == 0 || step + 1 == n_steps) {
            out.push_back(Ensemble{x, t0 + static_cast<double>(step + 1) * dt, seed, c, reflected});
        }
    }
    return out;
}

std::vector<Ensemble> simulate_sde(const GridPdf& rho0, const DriftFunction& b, const PhysicalConstants& c, double dt,
                                   std::size_t n_steps, std::size_t n_particles, std::uint64_t seed,
                                   std::size_t record_every) {
    return simulate_sde(sample_density(rho0, n_particles, seed), rho0.grid(), b, c, dt, n_steps, seed, record_every);
}

DriftPair drift_pair_from_fields(const GridPdf& rho, const GridField& v, const PhysicalConstants& c) {
    if (!(v.grid == rho.grid())) throw SizeError("velocity and density live on different grids");
    GridField u = osmotic_velocity(rho, c);
    const auto mask = merge_masks(u.masked, v.masked);
    GridField b(rho.grid()), bs(rho.grid());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (!mask.empty() && mask[i]) continue;
        b[i] = v[i] + u[i];
        bs[i] = v[i] - u[i];
    }
    b.masked = mask;
    bs.masked = mask;
    GridField vv = v;
    vv.masked = mask;
    u.masked = mask;
    return DriftPair{std::move(b), std::move(bs), zero_masked(std::move(vv)), zero_masked(std::move(u))};
}

ContinuityForms continuity_forms(const GridPdf& rho, const DriftPair& pair, const PhysicalConstants& c) {
    const Grid& g = rho.grid();
    const std::size_t n = g.size();
    const double d = c.diffusion();
    std::vector<double> r(rho.values().begin(), rho.values().end());
    std::vector<double> jv(n), jb(n), js(n);
    for (std::size_t i = 0; i < n; ++i) {
        jv[i] = pair.v[i] * r[i];
        jb[i] = pair.b[i] * r[i];
        js[i] = pair.b_star[i] * r[i];
    }
    const auto lap = laplacian(g, r);
    const auto gv = gradient(g, jv), gb = gradient(g, jb), gs = gradient(g, js);
    const auto mask = dilate(pair.b.masked, n);
    ContinuityForms out{GridField(g), GridField(g), GridField(g), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        out.current[i] = -gv[i];
        out.forward[i] = d * lap[i] - gb[i];
        out.backward[i] = -d * lap[i] - gs[i];
        if (mask[i]) continue;
        out.max_gap = std::max({out.max_gap, std::abs(out.current[i] - out.forward[i]),
                                std::abs(out.current[i] - out.backward[i]),
                                std::abs(out.forward[i] - out.backward[i])});
    }
    out.current.masked = mask;
    out.forward.masked = mask;
    out.backward.masked = mask;
    return out;
}

BinnedDrift estimate_drift_empirical(const Ensemble& before, const Ensemble& after, Direction direction,
                                     std::size_t bins, double lo, double hi) {
    if (before.positions.size() != after.positions.size()) throw SizeError("ensembles differ in size");
    const double dt = after.time - before.time;
    if (!(dt > 0.0)) throw DomainError("ensembles must be ordered in time");
    if (bins == 0 || !(hi > lo)) throw DomainError("need at least one bin over a nonempty range");

    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<double> sum(bins, 0.0), sum2(bins, 0.0), pos(bins, 0.0);
    std::vector<std::size_t> count(bins, 0);
    for (std::size_t i = 0; i < before.positions.size(); ++i) {
        const double key = direction == Direction::forward ? before.positions[i] : after.positions[i];
        if (key < lo || key >= hi) continue;
        const auto k = std::min(static_cast<std::size_t>((key - lo) / width), bins - 1);
        const double inc = (after.positions[i] - before.positions[i]) / dt;
        sum[k] += inc;
        sum2[k] += inc * inc;
        pos[k] += key;
        ++count[k];
    }

    BinnedDrift out;
    out.dt = dt;
    for (std::size_t k = 0; k < bins; ++k) {
        out.centre.push_back(lo + (static_cast<double>(k) + 0.5) * width);
        out.count.push_back(count[k]);
        out.undersampled.push_back(count[k] < kMinBinCount);
        if (count[k] == 0) {
            out.mean_position.push_back(out.centre.back());
            out.drift.push_back(0.0);
            out.standard_error.push_back(0.0);
            continue;
        }
        const double cnt = static_cast<double>(count[k]);
        const double mean = sum[k] / cnt;
        const double var = count[k] > 1 ? std::max(sum2[k] / cnt - mean * mean, 0.0) * cnt / (cnt - 1.0) : 0.0;
        out.mean_position.push_back(pos[k] / cnt);
        out.drift.push_back(mean);
        out.standard_error.push_back(std::sqrt(var / cnt));
    }
    return out;
}

DriftAgreement compare_drift(const BinnedDrift& est, const std::function<double(double)>& analytic, double sigmas) {
    DriftAgreement a;
    for (std::size_t k = 0; k < est.drift.size(); ++k) {
        if (est.undersampled[k]) continue;
        ++a.populated;
        if (std::abs(est.drift[k] - analytic(est.mean_position[k])) <= sigmas * est.standard_error[k]) ++a.within;
    }
    return a;
}

GridField mean_derivative(const GridField& f_before, const GridField& f_after, double dt, const DriftPair& at,
                          Direction direction, const PhysicalConstants& c) {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    const Grid& g = f_before.grid;
    if (!(f_after.grid == g) || !(at.b.grid == g)) throw SizeError("fields live on different grids");
    const std::size_t n = g.size();
    std::vector<double> mid(n), rate(n);
    for (std::size_t i = 0; i < n; ++i) {
        mid[i] = 0.5 * (f_before[i] + f_after[i]);
        rate[i] = (f_after[i] - f_before[i]) / dt;
    }
    const auto grad = gradient(g, mid);
    const auto lap = laplacian(g, mid);
    const bool fwd = direction == Direction::forward;
    const GridField& drift = fwd ? at.b : at.b_star;
    const double d = fwd ? c.diffusion() : -c.diffusion();
    auto mask = dilate(merge_masks(merge_masks(f_before.masked, f_after.masked), drift.masked), n);
    GridField out(g);
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask[i]) out[i] = rate[i] + drift[i] * grad[i] + d * lap[i];
    }
    out.masked = std::move(mask);
    return out;
}

GridField acceleration(const DriftPair& before, const DriftPair& after, double dt, AccelerationKind kind,
                       const PhysicalConstants& c) {
    const DriftPair mid = midpoint(before, after);
    switch (kind) {
        case AccelerationKind::forward:
            return mean_derivative(before.b, after.b, dt, mid, Direction::forward, c);
        case AccelerationKind::backward:
            return mean_derivative(before.b_star, after.b_star, dt, mid, Direction::backward, c);
        case AccelerationKind::symmetric: {
            GridField p = mean_derivative(before.b_star, after.b_star, dt, mid, Direction::forward, c);
            const GridField q = mean_derivative(before.b, after.b, dt, mid, Direction::backward, c);
            p.masked = merge_masks(p.masked, q.masked);
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = p.is_masked(i) ? 0.0 : 0.5 * (p[i] + q[i]);
            return p;
        }
    }
    throw DomainError("unknown acceleration kind");
}

AccelerationReport accelerations(const DriftPair& before, const DriftPair& after, double dt, const GridPdf& rho,
                                 const PhysicalConstants& c) {
    AccelerationReport r{acceleration(before, after, dt, AccelerationKind::forward, c),
                         acceleration(before, after, dt, AccelerationKind::backward, c),
                         acceleration(before, after, dt, AccelerationKind::symmetric, c), GridField(rho.grid()),
                         GridField(rho.grid())};
    const Grid& g = rho.grid();
    const std::size_t n = g.size();
    const GridField q = quantum_potential(rho, c);
    std::vector<double> vm(n);
    for (std::size_t i = 0; i < n; ++i) vm[i] = 0.5 * (before.v[i] + after.v[i]);
    const auto gv = gradient(g, vm);
    const auto gq = gradient(g, q.values);
    const auto mask = dilate(merge_masks(merge_masks(before.v.masked, after.v.masked), q.masked), n);
    for (std::size_t i = 0; i < n; ++i) {
        if (mask[i]) continue;
        const double conv = (after.v[i] - before.v[i]) / dt + vm[i] * gv[i];
        r.hydro_brownian[i] = conv - gq[i] / c.mass();
        r.hydro_quantum[i] = conv + gq[i] / c.mass();
    }
    r.hydro_brownian.masked = mask;
    r.hydro_quantum.masked = mask;
    return r;
}

void VelocityHistory::push(double t, GridField v) {
    if (!times_.empty()) {
        if (!(t > times_.back())) throw DomainError("velocity snapshots must increase in time");
        if (!(v.grid == fields_.front().grid)) throw SizeError("velocity snapshots live on different grids");
    }
    times_.push_back(t);
    fields_.push_back(std::move(v));
}

bool VelocityHistory::sample(double x, double t, double& out) const {
    if (times_.empty()) return false;
    const Grid& g = fields_.front().grid;
    if (!(x >= g.x_min() && x <= g.x_max())) return false;
    std::size_t k = 0;
    double w = 0.0;
    if (times_.size() > 1) {
        t = std::clamp(t, times_.front(), times_.back());
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        k = std::min(static_cast<std::size_t>(it - times_.begin()), times_.size() - 1);
        k = k == 0 ? 0 : k - 1;
        k = std::min(k, times_.size() - 2);
        w = (t - times_[k]) / (times_[k + 1] - times_[k]);
    }
    const std::size_t j = g.cell_index(x);
    const double s = (x - g.x(j)) / g.spacing();
    auto at = [&](const GridField& f, double& value) {
        if (f.is_masked(j) || f.is_masked(j + 1)) return false;
        value = (1.0 - s) * f[j] + s * f[j + 1];
        return true;
    };
    double a = 0.0, b = 0.0;
    if (!at(fields_[k], a)) return false;
    if (times_.size() > 1 && !at(fields_[k + 1], b)) return false;
    out = times_.size() > 1 ? (1.0 - w) * a + w * b : a;
    return true;
}

std::vector<Trajectory> bohmian_trajectories(const VelocityHistory& v, const std::vector<double>& x0, double dt) {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    if (v.empty()) throw DomainError("no velocity snapshots");
    const double t0 = v.t_begin(), t1 = v.t_end();
    const auto steps = static_cast<std::size_t>(std::ceil((t1 - t0) / dt - 1e-9));
    const double step = steps > 0 ? (t1 - t0) / static_cast<double>(steps) : 0.0;

    std::vector<Trajectory> out(x0.size());
    for (std::size_t p = 0; p < x0.size(); ++p) {
        Trajectory& tr = out[p];
        double x = x0[p], t = t0;
        tr.t.push_back(t);
        tr.x.push_back(x);
        for (std::size_t k = 0; k < steps; ++k) {
            double k1, k2, k3, k4;
            const bool ok = v.sample(x, t, k1) && v.sample(x + 0.5 * step * k1, t + 0.5 * step, k2) &&
                            v.sample(x + 0.5 * step * k2, t + 0.5 * step, k3) &&
                            v.sample(x + step * k3, t + step, k4);
            if (!ok) {
                tr.truncated = true;
                break;
            }
            x += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t = t0 + static_cast<double>(k + 1) * step;
            tr.t.push_back(t);
            tr.x.push_back(x);
        }
    }
    return out;
}

double ks_distance(std::vector<double> samples, const GridPdf& rho) {
    if (samples.empty()) throw DomainError("no samples");
    const PiecewiseCdf cdf(rho);
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf.at(samples[i]);
        d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f), std::abs(static_cast<double>(i) / n - f)});
    }
    return d;
}

}  // namespace qplab
