#include "qplab/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <random>
#include <sstream>

#include "qplab/brownian.hpp"
#include "qplab/functionals.hpp"
#include "qplab/io.hpp"
#include "qplab/kernels.hpp"
#include "qplab/kinetic.hpp"
#include "qplab/paths.hpp"
#include "qplab/quantum.hpp"
#include "qplab/recoil.hpp"
#include "qplab/spectrum.hpp"
#include "qplab/variational.hpp"

namespace qplab {

namespace {

const char* const kNames[kCriterionCount] = {
    "gaussian_functionals", "inequalities",          "kernel_goldens",   "ground_state_compatibility",
    "evolver_goldens",      "conservation",          "kinetic_identities", "acceleration_equivalences",
    "empirical_drifts",     "bohmian_equivariance",  "variational_solvers", "recoil_stepper"};

// Collects "name=value<bound" items; the criterion passes when all hold.
class Checks {
public:
    void below(const std::string& name, double value, double bound) {
        const bool ok = value < bound;  // NaN fails
        add(name, value, ok ? "<" : ">=", bound, ok);
    }
    void above(const std::string& name, double value, double bound) {
        const bool ok = value > bound;
        add(name, value, ok ? ">" : "<=", bound, ok);
    }
    void at_least(const std::string& name, double value, double bound) {
        const bool ok = value >= bound;
        add(name, value, ok ? ">=" : "<", bound, ok);
    }
    void holds(const std::string& name, bool ok) {
        items_.push_back(name + (ok ? "=yes" : "=no"));
        pass_ = pass_ && ok;
    }
    bool pass() const { return pass_; }
    std::string detail() const {
        std::string s;
        for (std::size_t i = 0; i < items_.size(); ++i) s += (i ? " " : "") + items_[i];
        return s;
    }

private:
    void add(const std::string& name, double value, const char* op, double bound, bool ok) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s=%.3g%s%.3g", name.c_str(), value, op, bound);
        items_.push_back(buf);
        pass_ = pass_ && ok;
    }
    std::vector<std::string> items_;
    bool pass_ = true;
};

struct Context {
    const VerifyOptions& o;
    Grid grid(double lo, double hi, std::size_t n) const { return Grid(lo, hi, o.n_points ? o.n_points : n); }
};

GridPdf rho_star(const Grid& g) {
    return GridPdf::from_function(g, [](double x) { return std::exp(-x * x) / std::sqrt(M_PI); });
}

double sup_gap(const GridPdf& a, const GridPdf& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

// max |f - target| over unmasked nodes with rho >= core * peak
double core_error(const GridField& f, const GridPdf& rho, double core, const std::function<double(double)>& target) {
    double worst = 0.0;
    const double peak = rho.max_value();
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.is_masked(i) || rho[i] < core * peak) continue;
        worst = std::max(worst, std::abs(f[i] - target(f.grid.x(i))));
    }
    return worst;
}

void gaussian_functionals(const Context& ctx, Checks& ck) {
    double es = 0.0, ef = 0.0, eq = 0.0;
    for (double sigma : {0.5, 1.0, 2.0}) {
        const Grid g = ctx.grid(-8.0 * sigma, 8.0 * sigma, 2001);
        const auto rho = GridPdf::gaussian(g, 0.0, sigma);
        const double f = fisher_information(rho);
        es = std::max(es, std::abs(shannon_entropy(rho) - 0.5 * std::log(2.0 * M_PI * M_E * sigma * sigma)));
        ef = std::max(ef, std::abs(f - 1.0 / (sigma * sigma)));
        eq = std::max(eq, std::abs(-expectation(rho, root_density_curvature(rho)) - f / 4.0));
    }
    ck.below("S_err", es, 1e-5);
    ck.below("F_err", ef, 1e-5);
    ck.below("curvature_err", eq, 1e-5);
}

void inequalities(const Context& ctx, Checks& ck) {
    double worst = 0.0;
    bool violated = false;
    for (double sigma : {0.5, 1.0, 2.0}) {
        const Grid g = ctx.grid(-8.0 * sigma, 8.0 * sigma, 2001);
        const auto r = inequality_report(GridPdf::gaussian(g, 0.0, sigma));
        worst = std::max({worst, std::abs(r.slacks.cramer_rao), std::abs(r.slacks.isoperimetric)});
        violated = violated || r.violation;
    }
    ck.below("gaussian_slack", worst, 1e-4);
    const Grid g = ctx.grid(-12.0, 12.0, 2401);
    const auto mix = GridPdf::from_function(g, [](double x) {
        return 0.5 * (std::exp(-0.5 * (x - 4.0) * (x - 4.0)) + std::exp(-0.5 * (x + 4.0) * (x + 4.0))) /
               std::sqrt(2.0 * M_PI);
    });
    const auto r = inequality_report(mix);
    ck.above("mixture_cramer_rao_slack", r.slacks.cramer_rao, 1e-4);
    ck.above("mixture_isoperimetric_slack", r.slacks.isoperimetric, 1e-4);
    ck.holds("no_violation", !violated && !r.violation);
}

void kernel_goldens(const Context& ctx, Checks& ck) {
    std::mt19937_64 gen(ctx.o.seed);
    std::uniform_real_distribution<double> pos(-4.0, 4.0), time(0.05, 6.0);
    double mehler = 0.0, ou = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double x = pos(gen), y = pos(gen), t = time(gen);
        const double b = kernels::mehler_kernel_exponential_form(y, x, t);
        mehler = std::max(mehler, std::abs(kernels::mehler_kernel(y, x, t) - b) / std::abs(b));
        const double ref = kernels::ou_transition_gaussian(y, x, t);
        ou = std::max(ou, std::abs(kernels::ou_transition(y, x, t) - ref) / std::max(1.0, ref));
    }
    ck.below("mehler_rel", mehler, 1e-12);
    ck.below("ou_transition", ou, 1e-10);
    double cov = 0.0;
    for (double t : {0.0, 0.5, 2.0}) {
        cov = std::max(cov, std::abs(kernels::ou_covariance(t, t + 1.0, ctx.grid(-9.0, 9.0, 1801)) - 0.5 * std::exp(-1.0)));
    }
    ck.below("ou_covariance", cov, 1e-6);
}

void ground_state_compatibility(const Context& ctx, Checks& ck) {
    const PhysicalConstants c;
    const Grid g = ctx.grid(-6.0, 6.0, 12001);
    const auto forms = compatibility_forms(rho_star(g), c);
    double root = 0.0, drift = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.x(i);
        if (std::abs(x) > 5.0) continue;
        const double v = 0.5 * (x * x - 1.0);
        root = std::max(root, std::abs(forms.root_form[i] - v));
        drift = std::max(drift, std::abs(forms.drift_form[i] - v));
    }
    ck.below("root_form", root, 1e-4);
    ck.below("drift_form", drift, 1e-4);
}

void evolver_goldens(const Context& ctx, Checks& ck) {
    const PhysicalConstants c;
    {
        const Grid g = ctx.grid(-15.0, 15.0, 3001);
        const auto states = evolve_quantum(WaveFunction::gaussian(g, 0.0, 1.0, 0.0, c), GridField(g), 1e-3, 1000, 1000);
        ck.below("free_variance", std::abs(states.back().density().variance() - 1.25), 1e-3);
    }
    const Grid g = ctx.grid(-8.0, 8.0, 3201);
    const auto star = rho_star(g);
    const auto b = stationary_drift(star, c);
    const double s0 = 0.03;
    const auto rho0 = GridPdf::gaussian(g, 1.0, s0);
    const auto snaps = evolve_fokker_planck(rho0, b, c, 1e-3, 1000, 100);
    const auto& last = snaps.back().rho;
    // exact moments of the transition kernel convolved with the narrow start
    const double e2 = std::exp(-2.0);
    ck.below("ou_mean", std::abs(last.mean() - std::exp(-1.0)), 1e-3);
    ck.below("ou_variance", std::abs(last.variance() - (0.5 * (1.0 - e2) + s0 * s0 * e2)), 1e-3);
    const auto v = compatibility_potential(star, c);
    const auto states = evolve_semigroup(semigroup_initial(rho0, star), v, c, 1e-3, 1000, 100);
    double route = 0.0;
    for (std::size_t k = 1; k < snaps.size() && k < states.size(); ++k) {
        route = std::max(route, sup_gap(semigroup_density(states[k], star), snaps[k].rho));
    }
    ck.below("semigroup_vs_fp", route, 1e-4);
}

void conservation(const Context& ctx, Checks& ck) {
    const PhysicalConstants c;
    const double dt = 1e-3;
    {
        const Grid g = ctx.grid(-15.0, 15.0, 3001);
        const auto states = evolve_quantum(WaveFunction::gaussian(g, 0.0, 1.0, 0.0, c), GridField(g), dt, 2000, 1);
        const auto h = quantum_invariant_H(states, GridField(g));
        double drift = 0.0;
        for (double e : h) drift = std::max(drift, std::abs(e - h.front()) / std::abs(h.front()));
        ck.below("H_plus_drift", drift, 1e-5);
        // rates at t = 1
        const std::size_t k = 1000;
        const auto f = madelung_fields(states[k]);
        const auto before = states[k - 1].density(), after = states[k + 1].density();
        const auto sr = entropy_rate_check(before, after, 2 * dt, f.rho, f.v, c);
        const auto fr = fisher_rate_check(before, after, 2 * dt, f.rho, f.v, Motion::quantum);
        ck.below("quantum_dS", std::max(sr.relative_error(), sr.alternate_relative_error()), 0.02);
        ck.below("quantum_dF", fr.relative_error(), 0.02);
    }
    const Grid g = ctx.grid(-8.0, 8.0, 1601);
    const auto star = rho_star(g);
    const auto b = stationary_drift(star, c);
    const auto v = compatibility_forms(star, c).drift_form;
    const auto snaps = evolve_fokker_planck(GridPdf::gaussian(g, 1.5, 0.5), b, c, dt, 1000, 50);
    ck.below("H_minus_rel", brownian_hydro_residuals(snaps, b, v, c).max_relative_h_minus, 1e-4);

    const auto ou = evolve_fokker_planck(GridPdf::gaussian(g, 1.5, 0.5), b, c, dt, 501, 1);
    const std::size_t k = 500;
    const auto f = brownian_fields(ou[k], b, c);
    const auto sr = entropy_rate_check(ou[k - 1].rho, ou[k + 1].rho, 2 * dt, ou[k].rho, f.v, c);
    const auto fr = fisher_rate_check(ou[k - 1].rho, ou[k + 1].rho, 2 * dt, ou[k].rho, f.v, Motion::brownian);
    ck.below("brownian_dS", std::max(sr.relative_error(), sr.alternate_relative_error()), 0.02);
    ck.below("brownian_dF", fr.relative_error(), 0.02);
}

void kinetic_identities(const Context& ctx, Checks& ck) {
    const PhysicalConstants hot(1.0, 0.5, 4.0);
    double balance = 0.0;
    for (double t : {0.2, 1.0, 5.0}) {
        std::optional<Grid> g;
        if (ctx.o.n_points) g = large_friction_grid(t, hot, ctx.o.n_points);
        balance = std::max(balance, temperature_balance(large_friction_moments(t, hot, g)));
    }
    ck.below("temperature_balance", balance, 1e-8);
    std::optional<Grid> lg;
    if (ctx.o.n_points) lg = large_friction_grid(1.0, hot, ctx.o.n_points);
    const auto law = thermal_energy_law(1.0, hot, 0.0, lg);
    ck.below("thermal_law", std::max(std::abs(law.lhs - law.expected), std::abs(law.rhs - law.expected)), 1e-6);

    const PhysicalConstants c;
    const Grid g = ctx.grid(-8.0, 8.0, 3201);
    const auto star = rho_star(g);
    const auto b = stationary_drift(star, c);
    const auto v = compatibility_potential(star, c);
    const auto snaps = evolve_fokker_planck(GridPdf::gaussian(g, 1.5, 0.5), b, c, 1e-4, 5001, 1);
    const auto f0 = brownian_fields(snaps[5000], b, c), f1 = brownian_fields(snaps[5001], b, c);
    const auto r = droplet_balances({f0.rho, f0.v, f0.time}, {f1.rho, f1.v, f1.time}, v, -0.5, 0.5, Motion::brownian, c);
    ck.below("droplet_mass", r.mass_closure(), 0.01);
    ck.below("droplet_momentum", r.momentum_closure(), 0.01);
    ck.below("droplet_energy", r.energy_closure(), 0.01);
    ck.below("power_release", r.power_closure(), 1e-4);
}

void acceleration_equivalences(const Context& ctx, Checks& ck) {
    const PhysicalConstants c;
    {
        const Grid g = ctx.grid(-6.0, 6.0, 6001);
        const auto star = rho_star(g);
        const auto pair = drift_pair_from_fields(star, GridField(g), c);
        const auto r = accelerations(pair, pair, 0.01, star, c);
        auto grad_v = [](double x) { return x; };
        ck.below("ou_forward", core_error(r.forward, star, 1e-6, grad_v), 1e-4);
        ck.below("ou_backward", core_error(r.backward, star, 1e-6, grad_v), 1e-4);
    }
    {
        const Grid g = ctx.grid(-8.0, 8.0, 8001);
        const auto star = rho_star(g);
        std::vector<cplx> psi0(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) psi0[i] = std::sqrt(star[i]);
        const auto v = compatibility_potential(star, c);
        const auto states = evolve_quantum(WaveFunction(g, psi0, c), v, 1e-3, 10, 10);
        const auto f0 = madelung_fields(states.front()), f1 = madelung_fields(states.back());
        const auto r = accelerations(drift_pair_from_fields(f0.rho, f0.v, c), drift_pair_from_fields(f1.rho, f1.v, c),
                                     states.back().time() - states.front().time(), f1.rho, c);
        ck.below("ground_state_symmetric", core_error(r.symmetric, star, 1e-6, [](double x) { return -x; }), 1e-4);
    }
    const Grid g = ctx.grid(-8.0, 8.0, 1601);
    const auto star = rho_star(g);
    const auto pair = drift_pair_from_fields(star, GridField(g), c);
    const auto v = compatibility_potential(star, c);
    double closure = 0.0;
    for (auto motion : {Motion::brownian, Motion::quantum}) {
        closure = std::max(closure, impulse_momentum_report(pair, pair, 1e-2, star, v, motion, c, 1e-3).mapping_closure);
    }
    ck.below("mapping_closure", closure, 1e-8);
}

void empirical_drifts(const Context& ctx, Checks& ck) {
    const PhysicalConstants c;
    const Grid g = ctx.grid(-8.0, 8.0, 1601);
    const auto star = rho_star(g);
    const auto runs = simulate_sde(star, drift_function(stationary_drift(star, c)), c, 0.01, 1, 100000, ctx.o.seed);
    const auto fwd = estimate_drift_empirical(runs[0], runs[1], Direction::forward, 40, -2.0, 2.0);
    const auto bwd = estimate_drift_empirical(runs[0], runs[1], Direction::backward, 40, -2.0, 2.0);
    const auto fa = compare_drift(fwd, [](double x) { return -x; });
    const auto ba = compare_drift(bwd, [](double x) { return x; });
    ck.at_least("forward_within_3se", fa.fraction(), 0.95);
    ck.at_least("backward_within_3se", ba.fraction(), 0.95);
    ck.at_least("populated_bins", static_cast<double>(std::min(fa.populated, ba.populated)), 30.0);
}

void bohmian_equivariance(const Context& ctx, Checks& ck) {
    const PhysicalConstants c;
    const Grid g = ctx.grid(-15.0, 15.0, 3001);
    const auto psi = WaveFunction::gaussian(g, 0.0, 1.0, 0.0, c);
    const auto states = evolve_quantum(psi, GridField(g), 1e-3, 1000, 10);
    VelocityHistory h;
    for (const auto& s : states) h.push(s.time(), current_velocity(s));
    const auto single = bohmian_trajectories(h, {1.0}, 0.01);
    ck.below("x1_err", std::abs(single[0].x.back() - std::sqrt(1.25)), 1e-3);
    const auto paths = bohmian_trajectories(h, sample_density(psi.density(), 10000, ctx.o.seed), 0.01);
    std::vector<double> ends;
    bool truncated = false;
    for (const auto& p : paths) {
        ends.push_back(p.x.back());
        truncated = truncated || p.truncated;
    }
    ck.below("ks", ks_distance(ends, states.back().density()), 0.02);
    ck.holds("untruncated", !truncated);
}

void variational_solvers(const Context& ctx, Checks& ck) {
    const PhysicalConstants c;
    {
        const Grid g = ctx.grid(-10.0, 10.0, 2001);
        const auto s = max_entropy_pdf(GridField::from_function(g, [](double x) { return x * x; }), 0.5);
        ck.below("alpha_err", std::abs(s.multiplier + 1.0), 1e-6);
    }
    {
        const Grid g = ctx.grid(-8.0, 8.0, 3201);
        const auto star = rho_star(g);
        double sup = 0.0;
        for (double l0 : {4.0, 8.0, 16.0}) {
            const auto v = GridField::from_function(g, [&](double x) { return 4.0 / l0 * (x * x - 1.0); });
            sup = std::max(sup, sup_gap(fisher_extremum_pdf(v, -2.0 / l0).rho, star));
        }
        ck.below("fisher_rho_sup", sup, 1e-5);
    }
    const Grid g = ctx.grid(-8.0, 8.0, 1601);
    const auto v = GridField::from_function(g, [](double x) { return 0.5 * x * x; });
    // quantum branch against the Schrodinger evolver
    const auto gs = hamiltonian_ground_state(v, c);
    std::vector<double> r(g.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = gs.amplitude[i] * gs.amplitude[i];
    const GridPdf rho0 = GridPdf(g, r).normalized();
    const auto q = constrained_fisher_branches(rho0, GridField(g), v, -0.125, 1, c, 1e-3, 100, 50);
    const auto direct = evolve_quantum(WaveFunction::from_density_phase(rho0, GridField(g), c), v, 1e-3, 100, 50);
    double qgap = 0.0;
    for (std::size_t k = 0; k < direct.size(); ++k) qgap = std::max(qgap, sup_gap(direct[k].density(), q.snapshots[k].rho));
    ck.below("quantum_dispatch", qgap, 1e-10);
    // diffusion branch against the Fokker-Planck evolver
    const auto start = GridPdf::gaussian(g, 1.5, 0.5);
    const auto d = constrained_fisher_branches(start, GridField(g), v, 0.125, -1, c, 1e-3, 500, 100);
    const auto fp = evolve_fokker_planck(start, d.drift, c, 1e-3, 500, 100);
    double dgap = 0.0;
    for (std::size_t k = 0; k < fp.size(); ++k) dgap = std::max(dgap, sup_gap(fp[k].rho, d.snapshots[k].rho));
    ck.below("diffusion_dispatch", dgap, 1e-10);
    ck.holds("branches", q.branch == FisherBranch::quantum && d.branch == FisherBranch::brownian &&
                             classify_gamma(0.0, c) == FisherBranch::classical);
}

std::string ensemble_bytes(const GridPdf& rho, const PhysicalConstants& c, std::uint64_t seed) {
    const auto b = drift_function(stationary_drift(rho, c));
    CsvTable t({"trajectory_id", "t", "x"});
    const auto runs = simulate_sde(rho, b, c, 0.01, 20, 500, seed, 5);
    for (std::size_t i = 0; i < 500; ++i) {
        for (const auto& e : runs) t.row({static_cast<double>(i), e.time, e.positions[i]});
    }
    return t.text();
}

void recoil_stepper(const Context& ctx, Checks& ck) {
    const PhysicalConstants c;
    {
        const Grid gf = ctx.grid(-10.0, 10.0, 8001);
        const auto ref = evolve_quantum(WaveFunction::gaussian(gf, 0.0, 1.0, 0.0, c), GridField(gf), 1e-4, 5000, 5000);
        const auto f = madelung_fields(ref.back());
        const Grid g = ctx.grid(-8.0, 8.0, 161);
        const MatterState s0{GridPdf::gaussian(g, 0.0, 1.0), GridField(g), 0.0, c};
        const auto coarse = recoil_trajectory(s0, GridField(g), 1e-3, 500, 500);
        const auto fine = recoil_trajectory(s0, GridField(g), 5e-4, 1000, 1000);
        const double ratio =
            matter_distance(coarse.states.back(), f.rho, f.v) / matter_distance(fine.states.back(), f.rho, f.v);
        ck.below("ratio_minus_2", std::abs(ratio - 2.0), 0.4);
    }
    {
        const Grid g = ctx.grid(-6.0, 6.0, 61);
        const auto v = GridField::from_function(g, [](double x) { return 0.5 * (x * x - 1.0); });
        const MatterState s{rho_star(g).normalized(), GridField(g), 0.0, c};
        const auto run = recoil_trajectory(s, v, 1e-3, 500, 1);
        double worst = 0.0;
        for (std::size_t k = 1; k < run.states.size(); ++k) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                worst = std::max({worst, std::abs(run.states[k].rho[i] - run.states[k - 1].rho[i]),
                                  std::abs(run.states[k].v[i] - run.states[k - 1].v[i])});
            }
        }
        ck.below("stationary_per_step", worst, 1e-8);
    }
    const Grid g = ctx.grid(-8.0, 8.0, 801);
    const auto star = rho_star(g);
    ck.holds("ensemble_bytes_identical", ensemble_bytes(star, c, ctx.o.seed) == ensemble_bytes(star, c, ctx.o.seed));
}

using Criterion = void (*)(const Context&, Checks&);
const Criterion kCriteria[kCriterionCount] = {gaussian_functionals, inequalities,          kernel_goldens,
                                              ground_state_compatibility, evolver_goldens, conservation,
                                              kinetic_identities,   acceleration_equivalences, empirical_drifts,
                                              bohmian_equivariance, variational_solvers,   recoil_stepper};

CriterionResult run_one(int id, const VerifyOptions& o) {
    CriterionResult r;
    r.id = id;
    r.name = kNames[id - 1];
    const auto start = std::chrono::steady_clock::now();
    Checks ck;
    try {
        kCriteria[id - 1](Context{o}, ck);
        r.pass = ck.pass();
        r.detail = ck.detail();
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = ck.detail();
        r.detail += (r.detail.empty() ? "" : " ") + std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace

const char* criterion_name(int id) {
    if (id < 1 || id > kCriterionCount) throw DomainError("criterion ids run from 1 to 12");
    return kNames[id - 1];
}

std::vector<CriterionResult> run_verify(const VerifyOptions& options) {
    std::vector<int> ids = options.only;
    if (ids.empty()) {
        for (int k = 1; k <= kCriterionCount; ++k) ids.push_back(k);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (int id : ids) criterion_name(id);

    std::vector<CriterionResult> out;
    if (!options.parallel) {
        for (int id : ids) out.push_back(run_one(id, options));
        return out;
    }
    std::vector<std::future<CriterionResult>> jobs;
    for (int id : ids) jobs.push_back(std::async(std::launch::async, run_one, id, std::cref(options)));
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

std::string format_result(const CriterionResult& r) {
    char head[96];
    std::snprintf(head, sizeof head, "%s %02d %s (%.1f s): ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
    return head + r.detail;
}

}  // namespace qplab
