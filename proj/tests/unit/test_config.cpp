#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "qplab/config.hpp"
#include "qplab/io.hpp"

using namespace qplab;
namespace fs = std::filesystem;

namespace {

ScenarioConfig everything_changed() {
    ScenarioConfig c;
    c.grid = {-5.5, 6.25, 777};
    c.constants = {2.0, 0.3, 3.5};
    c.potential.kind = PotentialKind::polynomial;
    c.potential.omega = 1.7;
    c.potential.coefficients = {0.1, -0.2, 1.0 / 3.0};
    c.initial = {InitialKind::custom_csv, 0.25, 0.7, -1.5, "data/start.csv"};
    c.run = {2.5e-4, 0.75, 12, 3, 99, "some dir/out"};
    c.ensemble = {321, 17, -1.5, 1.25, 7};
    c.kinetic.times = {0.6, 1.0 / 7.0 + 1.0};
    c.variational = {VariationalMode::branches, 0.1, 0.125, -1};
    c.recoil.branch = "brownian";
    c.kernels = {"ou_transition", 0.3, {0.1, 2.0}};
    c.verify = {16, {3, 1, 12}, false};
    return c;
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("config round trip") {
    for (const auto& c : {ScenarioConfig{}, everything_changed()}) {
        const std::string text = serialize_config(c);
        const auto back = parse_config(text);
        CHECK(back == c);
        CHECK(serialize_config(back) == text);
    }
    CHECK(everything_changed() != ScenarioConfig{});
}

TEST_CASE("strict parsing") {
    auto c = parse_config("# comment\n\n[grid]\n  n_points = 11  \nx_min=-1\n[run]\ndt = 0.5\n");
    CHECK(c.grid.n_points == 11);
    CHECK(c.grid.x_min == -1.0);
    CHECK(c.run.dt == 0.5);
    CHECK(c.grid.x_max == ScenarioConfig{}.grid.x_max);

    CHECK(error_of("[grid]\nnpoints = 3\n").find("unknown key 'grid.npoints'") != std::string::npos);
    CHECK(error_of("[mesh]\n").find("unknown section [mesh]") != std::string::npos);
    CHECK(error_of("[run]\ndt = 1\ndt = 2\n").find("duplicate key 'run.dt'") != std::string::npos);
    CHECK(error_of("dt = 1\n").find("outside of any section") != std::string::npos);
    CHECK(error_of("[run]\ndt = fast\n").find("run.dt") != std::string::npos);
    CHECK(error_of("[run]\ndt = 1e-3 # inline\n").find("run.dt") != std::string::npos);
    CHECK(error_of("[run]\nsteps = -4\n").find("run.steps") != std::string::npos);
    CHECK(error_of("[run]\ndt =\n").find("empty value") != std::string::npos);
    CHECK(error_of("[potential]\nkind = quartic\n").find("unknown value 'quartic'") != std::string::npos);
    CHECK(error_of("[kernels]\nkind = gauss\n").find("unknown kernel") != std::string::npos);
    CHECK(error_of("[grid\n").find("malformed section") != std::string::npos);
    CHECK(error_of("[run]\njust words\n").find("key = value") != std::string::npos);
    CHECK(error_of("[grid]\nx_min = nan\n").find("finite") != std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/qplab.ini"), ConfigError);
}

TEST_CASE("validation names the violated invariant") {
    auto message = [](auto mutate) {
        ScenarioConfig c;
        mutate(c);
        try {
            c.validate();
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message([](ScenarioConfig&) {}).empty());
    CHECK(message([](ScenarioConfig& c) { c.run.dt = -1e-3; }) == "dt must be positive");
    CHECK(message([](ScenarioConfig& c) { c.grid.x_max = c.grid.x_min; }) == "grid.x_max must exceed grid.x_min");
    CHECK(message([](ScenarioConfig& c) { c.constants.D = 0.0; }) == "constants.D must be positive");
    CHECK(message([](ScenarioConfig& c) { c.initial.sigma = -1.0; }) == "initial.sigma must be positive");
    CHECK(message([](ScenarioConfig& c) { c.potential.kind = PotentialKind::polynomial; }).find("coefficients") !=
          std::string::npos);
    CHECK(message([](ScenarioConfig& c) { c.variational.sign = 0; }) == "variational.sign must be +1 or -1");
    CHECK(message([](ScenarioConfig& c) { c.verify.only = {13}; }).find("1..12") != std::string::npos);
    CHECK(message([](ScenarioConfig& c) { c.kinetic.times.clear(); }).find("kinetic.times") != std::string::npos);

    ScenarioConfig c;
    c.run.dt = 0.3;
    c.run.horizon = 1.0;
    CHECK(c.step_count() == 4);
    c.run.dt = 0.1;
    CHECK(c.step_count() == 10);
    c.run.steps = 7;
    CHECK(c.step_count() == 7);
}

TEST_CASE("scenario builders") {
    ScenarioConfig c;
    c.grid = {-4.0, 4.0, 81};
    const Grid g = make_grid(c);
    auto v = make_potential(c, g);
    CHECK(v[40] == -0.5);
    CHECK(std::abs(v[60] - 1.5) < 1e-14);
    c.potential.kind = PotentialKind::harmonic;
    c.potential.omega = 2.0;
    c.constants.m = 0.5;
    CHECK(std::abs(make_potential(c, g)[60] - 0.5 * 0.5 * 4.0 * 4.0) < 1e-14);
    c.potential.kind = PotentialKind::polynomial;
    c.potential.coefficients = {1.0, 0.0, -2.0, 0.5};
    CHECK(std::abs(make_potential(c, g)[60] - (1.0 - 8.0 + 4.0)) < 1e-13);
    c.potential.kind = PotentialKind::free;
    CHECK(make_potential(c, g).max_abs() == 0.0);
    CHECK(!stationary_density(c, g));
    CHECK(diffusion_drift(c, g).max_abs() == 0.0);

    // the rescaled oscillator diffuses with drift -x
    ScenarioConfig o;
    o.grid = {-8.0, 8.0, 1601};
    const Grid og = make_grid(o);
    auto b = diffusion_drift(o, og);
    CHECK(std::abs(b[1000] + og.x(1000)) < 1e-4);

    ScenarioConfig q;
    q.initial.wavenumber = 1.5;
    const Grid qg = make_grid(q);
    auto v0 = initial_velocity(q, qg);
    CHECK(v0[100] == doctest::Approx(1.5));
    auto psi = initial_wavefunction(q, qg);
    CHECK(std::abs(psi.norm() - 1.0) < 1e-10);
    q.initial.kind = InitialKind::ground_state;
    auto rho = initial_density(q, qg);
    CHECK(std::abs(rho.variance() - 0.5) < 1e-4);
    CHECK(std::abs(initial_wavefunction(q, qg).density()[800] - rho[800]) < 1e-12);
}

TEST_CASE("custom initial state") {
    const fs::path dir = fs::temp_directory_path() / "qplab_custom_initial";
    fs::create_directories(dir);
    const fs::path file = dir / "start.csv";
    {
        std::ofstream out(file);
        out << "x,rho,v\n-2,0,1\n0,2,1\n2,0,3\n";
    }
    ScenarioConfig c;
    c.grid = {-4.0, 4.0, 81};
    c.initial.kind = InitialKind::custom_csv;
    c.initial.path = file.string();
    const Grid g = make_grid(c);
    auto rho = initial_density(c, g);
    CHECK(std::abs(rho.mass() - 1.0) < 1e-12);
    CHECK(rho[0] == 0.0);
    CHECK(std::abs(rho[40] - 0.5) < 1e-12);  // triangle of height 2 and mass 4
    CHECK(std::abs(rho[50] - 0.25) < 1e-12);
    auto v = initial_velocity(c, g);
    CHECK(std::abs(v[50] - 2.0) < 1e-12);
    {
        std::ofstream out(file);
        out << "x,density\n0,1\n1,1\n";
    }
    CHECK_THROWS_AS(initial_density(c, g), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("csv tables and blob hashes") {
    CsvTable t({"a", "b"});
    t.row({1.0, 0.1});
    t.row_cells({"x", "y"});
    CHECK(t.rows() == 2);
    CHECK(t.text() == "a,b\n1,0.10000000000000001\nx,y\n");
    CHECK(t.text().find('\r') == std::string::npos);
    CHECK_THROWS_AS(t.row({1.0}), SizeError);
    CHECK(std::stod(CsvTable::number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(CsvTable::number(std::nan("")) == "nan");
    // `git hash-object` of the empty file and of "hello\n"
    CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}
