#include "qplab/runner.hpp"

#include <ostream>

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
#include "qplab/verify.hpp"

namespace qplab {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double cell(const GridField& f, std::size_t i) { return f.is_masked(i) ? kNan : f[i]; }

// s = m int v dx from the left wall
GridField action_of(const GridField& v, const PhysicalConstants& c) {
    std::vector<double> mv(v.size());
    for (std::size_t i = 0; i < mv.size(); ++i) mv[i] = c.mass() * (v.is_masked(i) ? 0.0 : v[i]);
    return GridField(v.grid, cumulative_quadrature(v.grid, mv));
}

// <(m/2)(v^2 + u^2) + V>
double hydro_energy(const GridPdf& rho, const GridField& v, const GridField& u, const GridField& V,
                    const PhysicalConstants& c) {
    std::vector<double> e(rho.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double vi = v.is_masked(i) ? 0.0 : v[i], ui = u.is_masked(i) ? 0.0 : u[i];
        e[i] = rho[i] * (0.5 * c.mass() * (vi * vi + ui * ui) + V[i]);
    }
    return quadrature(rho.grid(), e);
}

void finish(RunWriter& w, std::ostream& log) {
    const std::string hash = w.finish();
    log << "wrote " << w.dir().string() << " (content " << hash << ")\n";
}

int run_functionals(const ScenarioConfig& cfg, RunWriter& w) {
    const Grid g = make_grid(cfg);
    const PhysicalConstants c = make_constants(cfg);
    const GridPdf rho = initial_density(cfg, g);
    const FunctionalReport r = inequality_report(rho, c);
    CsvTable summary({"S", "F", "mean_quantum_potential", "variance", "fourier_variance", "cramer_rao_slack",
                      "isoperimetric_slack", "fourier_upper_slack", "entropy_upper_slack", "entropy_lower_slack",
                      "violation"});
    const auto& s = r.slacks;
    summary.row({r.shannon, r.fisher, r.mean_quantum_potential, r.variance, r.fourier_variance.value_or(kNan),
                 s.cramer_rao, s.isoperimetric, s.fourier_upper, s.entropy_upper, s.entropy_lower,
                 r.violation ? 1.0 : 0.0});
    w.write("functionals.csv", summary);

    const GridField u = osmotic_velocity(rho, c), q = quantum_potential(rho, c);
    const GridField p = osmotic_pressure(rho, c), theta = osmotic_temperature(rho, c);
    CsvTable fields({"x", "rho", "u", "Q", "P_osm", "Theta_osm"});
    for (std::size_t i = 0; i < g.size(); ++i) fields.row({g.x(i), rho[i], cell(u, i), cell(q, i), cell(p, i), cell(theta, i)});
    w.write("fields.csv", fields);
    return kExitOk;
}

int run_kernels(const ScenarioConfig& cfg, RunWriter& w) {
    const Grid g = make_grid(cfg);
    const auto kind = kernels::kind_from_name(cfg.kernels.kind);
    CsvTable t({"x", "y", "t", "value_re", "value_im"});
    for (double time : cfg.kernels.times) {
        const auto row = kernels::kernel_row(kind, g, cfg.kernels.x, time);
        for (std::size_t i = 0; i < g.size(); ++i) t.row({cfg.kernels.x, g.x(i), time, row[i].real(), row[i].imag()});
    }
    w.write("kernel.csv", t);
    return kExitOk;
}

int run_evolve_quantum(const ScenarioConfig& cfg, RunWriter& w) {
    const Grid g = make_grid(cfg);
    const GridField V = make_potential(cfg, g);
    const auto states =
        evolve_quantum(initial_wavefunction(cfg, g), V, cfg.run.dt, cfg.step_count(), cfg.run.record_every);
    const auto H = quantum_invariant_H(states, V);
    CsvTable series({"t", "S", "F", "H", "norm"});
    CsvTable fields({"t", "x", "rho", "v", "u", "Q", "s"});
    for (std::size_t k = 0; k < states.size(); ++k) {
        const auto f = madelung_fields(states[k]);
        series.row({f.time, shannon_entropy(f.rho), fisher_routes(f.rho).score, H[k], states[k].norm()});
        for (std::size_t i = 0; i < g.size(); ++i) {
            fields.row({f.time, g.x(i), f.rho[i], cell(f.v, i), cell(f.u, i), cell(f.Q, i), cell(f.s, i)});
        }
    }
    w.write("series.csv", series);
    w.write("fields.csv", fields);
    return kExitOk;
}

int run_evolve_brownian(const ScenarioConfig& cfg, RunWriter& w) {
    const Grid g = make_grid(cfg);
    const PhysicalConstants c = make_constants(cfg);
    const GridField b = diffusion_drift(cfg, g);
    const GridField V = cfg.potential.kind == PotentialKind::free ? GridField(g)
                                                                  : renormalize_potential(make_potential(cfg, g), c);
    const auto snaps = evolve_fokker_planck(initial_density(cfg, g), b, c, cfg.run.dt, cfg.step_count(),
                                            cfg.run.record_every);
    CsvTable series({"t", "S", "F", "H", "norm", "H_minus"});
    CsvTable fields({"t", "x", "rho", "v", "u", "Q", "s"});
    for (const auto& snap : snaps) {
        const auto f = brownian_fields(snap, b, c);
        series.row({f.time, shannon_entropy(f.rho), fisher_routes(f.rho).score, hydro_energy(f.rho, f.v, f.u, V, c),
                    f.rho.mass(), brownian_invariant(f, V, c)});
        const GridField s = action_of(f.v, c);
        for (std::size_t i = 0; i < g.size(); ++i) {
            fields.row({f.time, g.x(i), f.rho[i], cell(f.v, i), cell(f.u, i), cell(f.Q, i), s[i]});
        }
    }
    w.write("series.csv", series);
    w.write("fields.csv", fields);
    return kExitOk;
}

int run_ensemble(const ScenarioConfig& cfg, RunWriter& w) {
    const Grid g = make_grid(cfg);
    const PhysicalConstants c = make_constants(cfg);
    const GridField b = diffusion_drift(cfg, g);
    const GridPdf rho0 = initial_density(cfg, g);
    const auto drift = drift_function(b);
    const std::size_t n = cfg.step_count();
    const double dt = cfg.run.dt;
    const std::uint64_t seed = cfg.run.seed;

    // all but the last step, then the last step on its own so that the final
    // pair of ensembles is always available to the drift estimator
    auto runs = simulate_sde(sample_density(rho0, cfg.ensemble.particles, seed), g, drift, c, dt, n - 1, seed,
                             cfg.run.record_every);
    if (n == 1) runs.resize(1);
    const Ensemble before = runs.back();
    auto tail = simulate_sde(before.positions, g, drift, c, dt, 1, seed, 1, before.time, 1, n - 1);
    if (runs.back().time != tail.back().time) runs.push_back(tail.back());
    const Ensemble& after = tail.back();

    CsvTable paths({"trajectory_id", "t", "x"});
    const std::size_t shown = std::min(cfg.ensemble.paths_written, cfg.ensemble.particles);
    for (std::size_t i = 0; i < shown; ++i) {
        for (const auto& e : runs) paths.row({static_cast<double>(i), e.time, e.positions[i]});
    }
    w.write("trajectories.csv", paths);

    // reference density at the final time for the backward drift b - 2u
    const auto ref = evolve_fokker_planck(rho0, b, c, dt, n, n).back().rho;
    const GridField u = osmotic_velocity(ref, c);
    GridField b_star(g);
    for (std::size_t i = 0; i < g.size(); ++i) b_star[i] = b[i] - 2.0 * (u.is_masked(i) ? 0.0 : u[i]);

    const auto& e = cfg.ensemble;
    for (auto dir : {Direction::forward, Direction::backward}) {
        const auto est = estimate_drift_empirical(before, after, dir, e.bins, e.bin_lo, e.bin_hi);
        const GridField& exact = dir == Direction::forward ? b : b_star;
        CsvTable t({"bin_center", "count", "drift_est", "drift_analytic", "stderr"});
        for (std::size_t k = 0; k < est.centre.size(); ++k) {
            const bool empty = est.count[k] == 0;
            t.row({est.centre[k], static_cast<double>(est.count[k]), empty ? kNan : est.drift[k],
                   interpolate(g, exact.values, est.centre[k]), empty ? kNan : est.standard_error[k]});
        }
        w.write(dir == Direction::forward ? "drift_forward.csv" : "drift_backward.csv", t);
    }
    return kExitOk;
}

int run_kinetic(const ScenarioConfig& cfg, RunWriter& w) {
    const PhysicalConstants c = make_constants(cfg);
    CsvTable t({"x", "t", "P_kin", "P_osm", "Theta_kin", "Theta_osm", "temperature_residual", "kinetic_residual",
                "transport_residual", "quantum_residual", "momentum_residual", "osmotic_residual"});
    CsvTable laws({"t", "thermal_lhs", "thermal_rhs", "thermal_expected", "max_pressure_residual"});
    for (double time : cfg.kinetic.times) {
        const auto m = large_friction_moments(time, c, large_friction_grid(time, c, cfg.grid.n_points));
        const auto r = pressure_balance_residual(m, c);
        const Grid& g = m.w.grid();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double temp = m.Theta_osm.is_masked(i) ? kNan : m.Theta_kin[i] + m.Theta_osm[i] - m.kbt;
            t.row({g.x(i), time, cell(m.P_kin, i), cell(m.P_osm, i), cell(m.Theta_kin, i), cell(m.Theta_osm, i), temp,
                   cell(r.kinetic, i), cell(r.transport, i), cell(r.quantum, i), cell(r.momentum, i),
                   cell(r.osmotic, i)});
        }
        const auto law = thermal_energy_law(time, c);
        laws.row({time, law.lhs, law.rhs, law.expected, r.max_abs});
    }
    w.write("kinetic.csv", t);
    w.write("kinetic_laws.csv", laws);
    return kExitOk;
}

int run_variational(const ScenarioConfig& cfg, RunWriter& w) {
    const Grid g = make_grid(cfg);
    const PhysicalConstants c = make_constants(cfg);
    const GridField V = make_potential(cfg, g);
    const auto& v = cfg.variational;
    CsvTable fields({"x", "rho", "V"});
    if (v.mode == VariationalMode::branches) {
        const GridField s0 = action_of(initial_velocity(cfg, g), c);
        const auto ev = constrained_fisher_branches(initial_density(cfg, g), s0, V, v.gamma, v.sign, c, cfg.run.dt,
                                                    cfg.step_count(), cfg.run.record_every);
        const auto& last = ev.snapshots.back();
        for (std::size_t i = 0; i < g.size(); ++i) fields.row({g.x(i), last.rho[i], ev.potential[i]});
        CsvTable path({"t", "x", "rho", "v", "s"});
        for (const auto& snap : ev.snapshots) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                path.row({snap.time, g.x(i), snap.rho[i], cell(snap.v, i), cell(snap.s, i)});
            }
        }
        CsvTable summary({"branch", "gamma", "hj_residual"});
        summary.row_cells({branch_name(ev.branch), CsvTable::number(v.gamma), CsvTable::number(ev.hj_residual)});
        w.write("variational.csv", fields);
        w.write("branch.csv", path);
        w.write("summary.csv", summary);
        return kExitOk;
    }
    const ExtremumSolution s = v.mode == VariationalMode::max_entropy ? max_entropy_pdf(V, v.zeta)
                                                                      : fisher_extremum_pdf(V, v.zeta);
    for (std::size_t i = 0; i < g.size(); ++i) fields.row({g.x(i), s.rho[i], V[i]});
    CsvTable summary({"multiplier", "functional_value", "constraint_residual"});
    summary.row({s.multiplier, s.functional_value, s.constraint_residual()});
    w.write("variational.csv", fields);
    w.write("summary.csv", summary);
    return kExitOk;
}

int run_recoil(const ScenarioConfig& cfg, RunWriter& w) {
    const Grid g = make_grid(cfg);
    const PhysicalConstants c = make_constants(cfg);
    const GridField V = make_potential(cfg, g);
    const auto branch = cfg.recoil.branch == "brownian" ? ImpulseBranch::brownian : ImpulseBranch::anti_brownian;
    const MatterState s0{initial_density(cfg, g), initial_velocity(cfg, g), 0.0, c};
    const auto run = recoil_trajectory(s0, V, cfg.run.dt, cfg.step_count(), cfg.run.record_every, branch);
    CsvTable t({"t", "x", "rho", "v", "Q", "brownian_pulse_v", "anti_pulse_v"});
    for (std::size_t k = 0; k < run.states.size(); ++k) {
        const auto& s = run.states[k];
        const GridField q = log_quantum_potential(s.rho, c);
        for (std::size_t i = 0; i < g.size(); ++i) {
            t.row({s.time, g.x(i), s.rho[i], s.v[i], q[i], run.brownian_pulse[k][i], run.anti_pulse[k][i]});
        }
    }
    w.write("recoil.csv", t);
    CsvTable drift({"step", "mass_drift"});
    for (std::size_t k = 0; k < run.mass_drift.size(); ++k) drift.row({static_cast<double>(k + 1), run.mass_drift[k]});
    w.write("recoil_mass.csv", drift);
    return kExitOk;
}

int run_verify_command(const ScenarioConfig& cfg, RunWriter& w, std::ostream& log) {
    VerifyOptions o;
    o.n_points = cfg.verify.n_points;
    o.seed = cfg.run.seed;
    o.only = cfg.verify.only;
    o.parallel = cfg.verify.parallel;
    const auto results = run_verify(o);
    CsvTable t({"criterion", "name", "status", "detail"});
    bool ok = true;
    for (const auto& r : results) {
        log << format_result(r) << "\n";
        ok = ok && r.pass;
        std::string detail = r.detail;
        for (char& ch : detail) {
            if (ch == ',' || ch == '\n') ch = ';';
        }
        t.row_cells({std::to_string(r.id), r.name, r.pass ? "pass" : "fail", detail});
    }
    w.write("verify.csv", t);
    log << (ok ? "verify: all selected criteria passed\n" : "verify: FAILED\n");
    return ok ? kExitOk : kExitVerifyFailed;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"functionals", "kernels",  "evolve-quantum", "evolve-brownian", "ensemble",
                                                "kinetic",     "variational", "recoil",       "verify"};
    return names;
}

void apply_overrides(ScenarioConfig& c, const RunOverrides& o) {
    if (o.out) c.run.outputs = *o.out;
    if (o.seed) c.run.seed = *o.seed;
    if (o.dt) c.run.dt = *o.dt;
    if (o.steps) c.run.steps = *o.steps;
}

int run_subcommand(const std::string& name, const ScenarioConfig& c, std::ostream& log) {
    c.validate();
    // the echo leaves out where the run was written so reruns hash identically
    ScenarioConfig echo = c;
    echo.run.outputs = ".";
    RunWriter w(c.run.outputs, name, serialize_config(echo));
    int status = kExitOk;
    if (name == "functionals") status = run_functionals(c, w);
    else if (name == "kernels") status = run_kernels(c, w);
    else if (name == "evolve-quantum") status = run_evolve_quantum(c, w);
    else if (name == "evolve-brownian") status = run_evolve_brownian(c, w);
    else if (name == "ensemble") status = run_ensemble(c, w);
    else if (name == "kinetic") status = run_kinetic(c, w);
    else if (name == "variational") status = run_variational(c, w);
    else if (name == "recoil") status = run_recoil(c, w);
    else if (name == "verify") status = run_verify_command(c, w, log);
    else throw ConfigError("unknown subcommand '" + name + "'");
    finish(w, log);
    return status;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e)) return kExitConfig;
    return kExitVerifyFailed;
}

int execute(const std::string& name, const std::optional<std::string>& config_path, const RunOverrides& overrides,
            std::ostream& log, std::ostream& err) {
    try {
        ScenarioConfig c = config_path ? load_config(*config_path) : ScenarioConfig{};
        apply_overrides(c, overrides);
        return run_subcommand(name, c, log);
    } catch (const std::exception& e) {
        const int code = exit_code_for(e);
        const char* kind = code == kExitNumerical ? "numerical error" : code == kExitConfig ? "config error" : "error";
        err << "qplab " << name << ": " << kind << ": " << e.what() << "\n";
        return code;
    }
}

}  // namespace qplab
