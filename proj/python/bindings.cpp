#include <cmath>
#include <limits>
#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qplab/brownian.hpp"
#include "qplab/functionals.hpp"
#include "qplab/io.hpp"
#include "qplab/kernels.hpp"
#include "qplab/kinetic.hpp"
#include "qplab/paths.hpp"
#include "qplab/quantum.hpp"
#include "qplab/recoil.hpp"
#include "qplab/runner.hpp"
#include "qplab/variational.hpp"
#include "qplab/verify.hpp"

namespace py = pybind11;
using namespace qplab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ComplexArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

// a bare count would pick the strides-less constructor overload
std::vector<py::ssize_t> shape(std::size_t n) { return {static_cast<py::ssize_t>(n)}; }

std::vector<double> to_vector(const Array& a) {
    if (a.ndim() != 1) throw SizeError("expected a one-dimensional array");
    return {a.data(), a.data() + a.size()};
}

Grid grid_for(double x_min, double x_max, const Array& a) { return Grid(x_min, x_max, static_cast<std::size_t>(a.size())); }

GridField field(const Grid& g, const Array& a) { return GridField(g, to_vector(a)); }

// masked nodes come back as nan
py::array_t<double> out(const GridField& f) {
    py::array_t<double> r(shape(f.size()));
    auto m = r.mutable_unchecked<1>();
    for (std::size_t i = 0; i < f.size(); ++i)
        m(i) = f.is_masked(i) ? std::numeric_limits<double>::quiet_NaN() : f[i];
    return r;
}

py::array_t<double> out(std::span<const double> v) {
    py::array_t<double> r(shape(v.size()));
    std::copy(v.begin(), v.end(), r.mutable_data());
    return r;
}

template <class Seq, class Get>
py::array_t<double> stack(const Seq& rows, std::size_t width, Get get) {
    py::array_t<double> r({static_cast<py::ssize_t>(rows.size()), static_cast<py::ssize_t>(width)});
    auto m = r.mutable_unchecked<2>();
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto row = get(rows[k]);
        for (std::size_t i = 0; i < width; ++i) m(k, i) = row[i];
    }
    return r;
}

PhysicalConstants constants(double mass, double diffusion, double beta = 1.0) { return {mass, diffusion, beta}; }

py::dict report_dict(const FunctionalReport& r) {
    py::dict d;
    d["S"] = r.shannon;
    d["F"] = r.fisher;
    d["mean_quantum_potential"] = r.mean_quantum_potential;
    d["variance"] = r.variance;
    d["fourier_variance"] = r.fourier_variance ? py::cast(*r.fourier_variance) : py::none();
    d["cramer_rao_slack"] = r.slacks.cramer_rao;
    d["isoperimetric_slack"] = r.slacks.isoperimetric;
    d["fourier_upper_slack"] = r.slacks.fourier_upper;
    d["entropy_upper_slack"] = r.slacks.entropy_upper;
    d["entropy_lower_slack"] = r.slacks.entropy_lower;
    d["violation"] = r.violation;
    return d;
}

py::dict extremum_dict(const ExtremumSolution& s) {
    py::dict d;
    d["rho"] = out(s.rho.values());
    d["multiplier"] = s.multiplier;
    d["functional_value"] = s.functional_value;
    d["constraint_residual"] = s.constraint_residual();
    d["degenerate"] = s.degenerate;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Grid densities, information functionals, kernels, evolvers and stochastic paths";
    m.attr("__version__") = library_version();

    auto base = py::register_exception<Error>(m, "QplabError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    m.def(
        "functionals",
        [](const Array& rho, double x_min, double x_max, double mass, double diffusion) {
            const Grid g = grid_for(x_min, x_max, rho);
            return report_dict(inequality_report(GridPdf(g, to_vector(rho)), constants(mass, diffusion)));
        },
        py::arg("rho"), py::arg("x_min"), py::arg("x_max"), py::arg("mass") = 1.0, py::arg("diffusion") = 0.5,
        "Entropy, Fisher information and inequality slacks of a normalized grid density.");

    m.def(
        "hydro_fields",
        [](const Array& rho, double x_min, double x_max, double mass, double diffusion) {
            const Grid g = grid_for(x_min, x_max, rho);
            const GridPdf p(g, to_vector(rho));
            const auto c = constants(mass, diffusion);
            py::dict d;
            d["u"] = out(osmotic_velocity(p, c));
            d["Q"] = out(quantum_potential(p, c));
            d["P_osm"] = out(osmotic_pressure(p, c));
            d["Theta_osm"] = out(osmotic_temperature(p, c));
            return d;
        },
        py::arg("rho"), py::arg("x_min"), py::arg("x_max"), py::arg("mass") = 1.0, py::arg("diffusion") = 0.5,
        "Osmotic velocity, quantum potential, osmotic pressure and temperature (nan on masked tails).");

    m.def("heat_kernel", py::overload_cast<double, double, double, double>(&kernels::heat_kernel), py::arg("y"),
          py::arg("x"), py::arg("t"), py::arg("diffusion") = 1.0);
    m.def("mehler_kernel", &kernels::mehler_kernel, py::arg("y"), py::arg("x"), py::arg("t"));
    m.def("ou_transition", &kernels::ou_transition, py::arg("y"), py::arg("x"), py::arg("t"));
    m.def("ou_covariance", py::overload_cast<double, double>(&kernels::ou_covariance), py::arg("t1"), py::arg("t2"));
    m.def("free_propagator", &kernels::free_propagator, py::arg("y"), py::arg("x"), py::arg("t"));
    m.def("oscillator_propagator", &kernels::oscillator_propagator, py::arg("y"), py::arg("x"), py::arg("t"));
    m.def(
        "kernel_row",
        [](const std::string& kind, double x_min, double x_max, std::size_t n, double x, double t) {
            const auto row = kernels::kernel_row(kernels::kind_from_name(kind), Grid(x_min, x_max, n), x, t);
            py::array_t<std::complex<double>> r(shape(row.size()));
            std::copy(row.begin(), row.end(), r.mutable_data());
            return r;
        },
        py::arg("kind"), py::arg("x_min"), py::arg("x_max"), py::arg("n_points"), py::arg("x"), py::arg("t"),
        "k(y_i, x, t) over the grid nodes; kind is heat, mehler, ou_transition, free_schrodinger or "
        "oscillator_schrodinger.");

    m.def(
        "evolve_quantum",
        [](const ComplexArray& psi0, const Array& potential, double x_min, double x_max, double dt,
           std::size_t n_steps, std::size_t record_every, double mass, double diffusion) {
            const Grid g(x_min, x_max, static_cast<std::size_t>(psi0.size()));
            const WaveFunction psi(g, {psi0.data(), psi0.data() + psi0.size()}, constants(mass, diffusion));
            const auto states = evolve_quantum(psi, field(g, potential), dt, n_steps, record_every);
            py::array_t<std::complex<double>> r(
                {static_cast<py::ssize_t>(states.size()), static_cast<py::ssize_t>(g.size())});
            auto w = r.mutable_unchecked<2>();
            std::vector<double> times;
            for (std::size_t k = 0; k < states.size(); ++k) {
                times.push_back(states[k].time());
                for (std::size_t i = 0; i < g.size(); ++i) w(k, i) = states[k][i];
            }
            return py::make_tuple(out(times), r, out(quantum_invariant_H(states, field(g, potential))));
        },
        py::arg("psi0"), py::arg("potential"), py::arg("x_min"), py::arg("x_max"), py::arg("dt"), py::arg("n_steps"),
        py::arg("record_every") = 1, py::arg("mass") = 1.0, py::arg("diffusion") = 0.5,
        "Crank-Nicolson evolution; returns (times, psi[k, i], H per recorded state).");

    m.def(
        "evolve_fokker_planck",
        [](const Array& rho0, const Array& drift, double x_min, double x_max, double dt, std::size_t n_steps,
           std::size_t record_every, double mass, double diffusion) {
            const Grid g = grid_for(x_min, x_max, rho0);
            const auto snaps = evolve_fokker_planck(GridPdf(g, to_vector(rho0)), field(g, drift),
                                                    constants(mass, diffusion), dt, n_steps, record_every);
            std::vector<double> times;
            for (const auto& s : snaps) times.push_back(s.time);
            return py::make_tuple(out(times),
                                  stack(snaps, g.size(), [](const DensitySnapshot& s) { return s.rho.values(); }));
        },
        py::arg("rho0"), py::arg("drift"), py::arg("x_min"), py::arg("x_max"), py::arg("dt"), py::arg("n_steps"),
        py::arg("record_every") = 1, py::arg("mass") = 1.0, py::arg("diffusion") = 0.5,
        "Conservative Fokker-Planck evolution; returns (times, rho[k, i]).");

    m.def(
        "stationary_drift",
        [](const Array& rho_star, double x_min, double x_max, double mass, double diffusion) {
            const Grid g = grid_for(x_min, x_max, rho_star);
            return out(stationary_drift(GridPdf(g, to_vector(rho_star)), constants(mass, diffusion)));
        },
        py::arg("rho_star"), py::arg("x_min"), py::arg("x_max"), py::arg("mass") = 1.0, py::arg("diffusion") = 0.5);

    m.def(
        "sample_density",
        [](const Array& rho, double x_min, double x_max, std::size_t n, std::uint64_t seed) {
            return out(sample_density(GridPdf(grid_for(x_min, x_max, rho), to_vector(rho)), n, seed));
        },
        py::arg("rho"), py::arg("x_min"), py::arg("x_max"), py::arg("n"), py::arg("seed"));

    m.def(
        "simulate_sde",
        [](const Array& x0, const Array& drift, double x_min, double x_max, double dt, std::size_t n_steps,
           std::uint64_t seed, std::size_t record_every, double mass, double diffusion) {
            const Grid g = grid_for(x_min, x_max, drift);
            const auto runs = simulate_sde(to_vector(x0), g, drift_function(field(g, drift)),
                                           constants(mass, diffusion), dt, n_steps, seed, record_every);
            std::vector<double> times;
            for (const auto& e : runs) times.push_back(e.time);
            return py::make_tuple(out(times), stack(runs, static_cast<std::size_t>(x0.size()),
                                                    [](const Ensemble& e) { return std::span<const double>(e.positions); }));
        },
        py::arg("x0"), py::arg("drift"), py::arg("x_min"), py::arg("x_max"), py::arg("dt"), py::arg("n_steps"),
        py::arg("seed"), py::arg("record_every") = 1, py::arg("mass") = 1.0, py::arg("diffusion") = 0.5,
        "Euler-Maruyama with reflecting walls and a drift tabulated on the grid; returns (times, x[k, particle]).");

    m.def(
        "max_entropy_pdf",
        [](const Array& potential, double x_min, double x_max, double zeta) {
            return extremum_dict(max_entropy_pdf(field(grid_for(x_min, x_max, potential), potential), zeta));
        },
        py::arg("potential"), py::arg("x_min"), py::arg("x_max"), py::arg("zeta"));
    m.def(
        "fisher_extremum_pdf",
        [](const Array& potential, double x_min, double x_max, double zeta) {
            return extremum_dict(fisher_extremum_pdf(field(grid_for(x_min, x_max, potential), potential), zeta));
        },
        py::arg("potential"), py::arg("x_min"), py::arg("x_max"), py::arg("zeta"));

    m.def(
        "recoil_trajectory",
        [](const Array& rho0, const Array& v0, const Array& potential, double x_min, double x_max, double dt,
           std::size_t n_steps, std::size_t record_every, double mass, double diffusion) {
            const Grid g = grid_for(x_min, x_max, rho0);
            const MatterState s0{GridPdf(g, to_vector(rho0)), field(g, v0), 0.0, constants(mass, diffusion)};
            const auto run = recoil_trajectory(s0, field(g, potential), dt, n_steps, record_every);
            py::dict d;
            std::vector<double> times;
            for (const auto& s : run.states) times.push_back(s.time);
            d["t"] = out(times);
            d["rho"] = stack(run.states, g.size(), [](const MatterState& s) { return s.rho.values(); });
            d["v"] = stack(run.states, g.size(), [](const MatterState& s) { return std::span<const double>(s.v.values); });
            d["mass_drift"] = out(run.mass_drift);
            return d;
        },
        py::arg("rho0"), py::arg("v0"), py::arg("potential"), py::arg("x_min"), py::arg("x_max"), py::arg("dt"),
        py::arg("n_steps"), py::arg("record_every") = 1, py::arg("mass") = 1.0, py::arg("diffusion") = 0.5,
        "Anti-Brownian impulse iteration of (rho, v).");

    m.def(
        "large_friction_moments",
        [](double t, double mass, double diffusion, double beta, std::size_t n_points) {
            const auto c = constants(mass, diffusion, beta);
            const auto mo = large_friction_moments(t, c, large_friction_grid(t, c, n_points));
            py::dict d;
            d["x"] = out(mo.w.grid().nodes());
            d["w"] = out(mo.w.values());
            d["P_kin"] = out(mo.P_kin);
            d["P_osm"] = out(mo.P_osm);
            d["Theta_kin"] = out(mo.Theta_kin);
            d["Theta_osm"] = out(mo.Theta_osm);
            d["kbt"] = mo.kbt;
            return d;
        },
        py::arg("t"), py::arg("mass") = 1.0, py::arg("diffusion") = 0.5, py::arg("beta") = 1.0,
        py::arg("n_points") = 6001);

    m.def(
        "run",
        [](const std::string& subcommand, std::optional<std::string> config, std::optional<std::string> out_dir,
           std::optional<std::uint64_t> seed, std::optional<double> dt, std::optional<std::size_t> steps) {
            std::ostringstream log, err;
            const int code = execute(subcommand, config, {out_dir, seed, dt, steps}, log, err);
            return py::make_tuple(code, log.str(), err.str());
        },
        py::arg("subcommand"), py::arg("config") = py::none(), py::arg("out") = py::none(),
        py::arg("seed") = py::none(), py::arg("dt") = py::none(), py::arg("steps") = py::none(),
        "Runs a command-line subcommand in-process; returns (exit_code, log, errors).");

    m.def(
        "verify",
        [](std::size_t n_points, std::vector<int> only, bool parallel) {
            VerifyOptions o;
            o.n_points = n_points;
            o.only = std::move(only);
            o.parallel = parallel;
            py::list r;
            {
                py::gil_scoped_release release;
                auto results = run_verify(o);
                py::gil_scoped_acquire acquire;
                for (const auto& c : results) {
                    py::dict d;
                    d["id"] = c.id;
                    d["name"] = c.name;
                    d["pass"] = c.pass;
                    d["detail"] = c.detail;
                    r.append(d);
                }
            }
            return r;
        },
        py::arg("n_points") = 0, py::arg("only") = std::vector<int>{}, py::arg("parallel") = true);

    m.def("git_blob_hash", &git_blob_hash, py::arg("data"));
}
