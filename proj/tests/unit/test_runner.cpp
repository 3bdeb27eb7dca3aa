#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qplab/runner.hpp"

using namespace qplab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("qplab_test_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "scenario.ini";
    std::ofstream(p, std::ios::binary) << text;
    return p.string();
}

// column `name` of a CSV file
std::vector<double> column(const fs::path& p, const std::string& name) {
    std::istringstream in(slurp(p));
    std::string line;
    std::getline(in, line);
    std::size_t idx = 0, k = 0;
    std::stringstream head(line);
    for (std::string cell; std::getline(head, cell, ','); ++k) {
        if (cell == name) idx = k;
    }
    std::vector<double> out;
    while (std::getline(in, line)) {
        std::stringstream row(line);
        std::string cell;
        for (std::size_t j = 0; j <= idx; ++j) std::getline(row, cell, ',');
        out.push_back(std::stod(cell));
    }
    return out;
}

int run(const std::string& sub, const std::optional<std::string>& config, const RunOverrides& o, std::string* err_out = nullptr) {
    std::ostringstream log, err;
    const int code = execute(sub, config, o, log, err);
    if (err_out) *err_out = err.str();
    return code;
}

}  // namespace

TEST_CASE("negative dt is a config error") {
    TempDir d("negative_dt");
    std::string err;
    const auto cfg = write_config(d.path, "[run]\ndt = -0.001\n");
    CHECK(run("evolve-quantum", cfg, {(d.path / "out").string()}, &err) == kExitConfig);
    CHECK(err.find("dt must be positive") != std::string::npos);
    CHECK(run("ensemble", std::nullopt, {(d.path / "o2").string(), {}, -1.0}, &err) == kExitConfig);
    CHECK(err.find("dt must be positive") != std::string::npos);
    CHECK(run("ensemble", write_config(d.path, "[run]\nspeed = 1\n"), {}, &err) == kExitConfig);
    CHECK(err.find("unknown key 'run.speed'") != std::string::npos);
    CHECK(run("teleport", std::nullopt, {(d.path / "o3").string()}, &err) == kExitConfig);
}

TEST_CASE("numerical failures exit with 3") {
    TempDir d("unstable");
    std::string err;
    CHECK(run("evolve-quantum", std::nullopt, {d.path.string(), {}, 0.5}, &err) == kExitNumerical);
    CHECK(err.find("numerical error") != std::string::npos);
    // the default fine grid is outside the stable range of the explicit recoil iteration
    CHECK(run("recoil", std::nullopt, {d.path.string()}) == kExitNumerical);
    // large-friction formulas refuse t <= 1/(2 beta): invalid input
    CHECK(run("kinetic", write_config(d.path, "[kinetic]\ntimes = 0.4\n"), {d.path.string()}, &err) == kExitConfig);
}

TEST_CASE("evolve-quantum keeps H constant on the ground state") {
    TempDir d("ground_state");
    const auto cfg = write_config(d.path,
                                  "[potential]\nkind = rescaled_oscillator\n[initial]\nkind = ground_state\n"
                                  "[run]\ndt = 1e-3\nhorizon = 1\nrecord_every = 100\n");
    const fs::path out = d.path / "out";
    REQUIRE(run("evolve-quantum", cfg, {out.string()}) == kExitOk);
    const auto h = column(out / "series.csv", "H");
    const auto t = column(out / "series.csv", "t");
    REQUIRE(h.size() == 11);
    CHECK(t.back() == doctest::Approx(1.0));
    for (double e : h) CHECK(std::abs(e - h.front()) < 1e-10);
    CHECK(std::abs(h.front()) < 1e-3);  // zero for the continuum ground state
    const auto norm = column(out / "series.csv", "norm");
    for (double n : norm) CHECK(std::abs(n - 1.0) < 1e-10);
    CHECK(slurp(out / "fields.csv").rfind("t,x,rho,v,u,Q,s\n", 0) == 0);
    const std::string manifest = slurp(out / "manifest.json");
    CHECK(manifest.find("\"content_hash\"") != std::string::npos);
    CHECK(manifest.find("kind = ground_state") != std::string::npos);
}

TEST_CASE("ensemble reruns are byte-identical") {
    TempDir d("ensemble");
    const auto cfg = write_config(d.path,
                                  "[grid]\nn_points = 801\n[run]\ndt = 0.01\nsteps = 25\nrecord_every = 10\n"
                                  "[ensemble]\nparticles = 2000\nbins = 10\npaths_written = 5\n");
    const fs::path a = d.path / "a", b = d.path / "b", c = d.path / "c";
    REQUIRE(run("ensemble", cfg, {a.string(), 7}) == kExitOk);
    REQUIRE(run("ensemble", cfg, {b.string(), 7}) == kExitOk);
    REQUIRE(run("ensemble", cfg, {c.string(), 8}) == kExitOk);
    for (const char* f : {"trajectories.csv", "drift_forward.csv", "drift_backward.csv"}) {
        CHECK(slurp(a / f) == slurp(b / f));
        CHECK(slurp(a / f) != slurp(c / f));
    }
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
    CHECK(slurp(a / "manifest.json") != slurp(c / "manifest.json"));
    // steps 0, 10, 20, 24 and 25 for each written path
    const auto t = column(a / "trajectories.csv", "t");
    CHECK(t.size() == 25);
    CHECK(t[3] == doctest::Approx(0.24));
    CHECK(t[4] == doctest::Approx(0.25));
    // splitting off the last step does not change the process
    const fs::path e = d.path / "e";
    REQUIRE(run("ensemble", cfg, {e.string(), 7, {}, 24}) == kExitOk);
    const auto x24 = column(a / "trajectories.csv", "x");
    const auto x24b = column(e / "trajectories.csv", "x");
    CHECK(x24[3] == x24b[4]);
    const auto fwd = column(a / "drift_forward.csv", "drift_analytic");
    const auto centre = column(a / "drift_forward.csv", "bin_center");
    for (std::size_t k = 0; k < fwd.size(); ++k) CHECK(std::abs(fwd[k] + centre[k]) < 1e-3);
}

TEST_CASE("each subcommand writes its schema") {
    TempDir d("schemas");
    const std::string common = "[potential]\nkind = free\n[run]\ndt = 1e-3\nsteps = 20\nrecord_every = 10\n"
                               "[ensemble]\nparticles = 200\n";
    const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> expected{
        {"functionals",
         {{"functionals.csv", "S,F,mean_quantum_potential,variance,fourier_variance,cramer_rao_slack,"
                              "isoperimetric_slack,fourier_upper_slack,entropy_upper_slack,entropy_lower_slack,violation"},
          {"fields.csv", "x,rho,u,Q,P_osm,Theta_osm"}}},
        {"kernels", {{"kernel.csv", "x,y,t,value_re,value_im"}}},
        {"evolve-quantum", {{"series.csv", "t,S,F,H,norm"}, {"fields.csv", "t,x,rho,v,u,Q,s"}}},
        {"evolve-brownian", {{"series.csv", "t,S,F,H,norm,H_minus"}, {"fields.csv", "t,x,rho,v,u,Q,s"}}},
        {"ensemble",
         {{"trajectories.csv", "trajectory_id,t,x"},
          {"drift_forward.csv", "bin_center,count,drift_est,drift_analytic,stderr"},
          {"drift_backward.csv", "bin_center,count,drift_est,drift_analytic,stderr"}}},
        {"kinetic",
         {{"kinetic.csv", "x,t,P_kin,P_osm,Theta_kin,Theta_osm,temperature_residual,kinetic_residual,"
                          "transport_residual,quantum_residual,momentum_residual,osmotic_residual"},
          {"kinetic_laws.csv", "t,thermal_lhs,thermal_rhs,thermal_expected,max_pressure_residual"}}},
        {"variational", {{"variational.csv", "x,rho,V"}, {"summary.csv", "multiplier,functional_value,constraint_residual"}}},
        {"recoil",
         {{"recoil.csv", "t,x,rho,v,Q,brownian_pulse_v,anti_pulse_v"}, {"recoil_mass.csv", "step,mass_drift"}}},
    };
    for (const auto& [sub, files] : expected) {
        const fs::path out = d.path / sub;
        std::string err;
        INFO(sub);
        // max entropy needs a confining potential; the explicit recoil iteration a coarse grid
        const auto c = write_config(
            d.path, sub == "variational" ? "[grid]\nx_min = -10\nx_max = 10\nn_points = 2001\n"
                                           "[potential]\nkind = polynomial\ncoefficients = 0, 0, 1\n"
                    : sub == "recoil"    ? "[grid]\nn_points = 161\n" + common
                                         : common);
        REQUIRE_MESSAGE(run(sub, c, {out.string()}, &err) == kExitOk, err);
        for (const auto& [file, header] : files) {
            const std::string text = slurp(out / file);
            CHECK(text.substr(0, text.find('\n')) == header);
            CHECK(text.find('\r') == std::string::npos);
        }
        CHECK(fs::exists(out / "manifest.json"));
    }
    // max entropy multiplier of x^2 at <x^2> = 1/2
    CHECK(std::abs(column(d.path / "variational" / "summary.csv", "multiplier")[0] + 1.0) < 1e-6);
}

TEST_CASE("verify: subset selection and the coarse-grid control") {
    TempDir d("verify");
    std::ostringstream log, err;
    const auto subset = write_config(d.path, "[verify]\nonly = 4, 1\n");
    CHECK(execute("verify", subset, {(d.path / "s").string()}, log, err) == kExitOk);
    const std::string report = log.str();
    CHECK(report.find("PASS 01 gaussian_functionals") != std::string::npos);
    CHECK(report.find("PASS 04 ground_state_compatibility") != std::string::npos);
    CHECK(report.find(" 02 ") == std::string::npos);
    CHECK(report.find("01") < report.find("04"));
    const auto ids = column(d.path / "s" / "verify.csv", "criterion");
    CHECK(ids == std::vector<double>{1.0, 4.0});

    std::ostringstream clog, cerr_;
    const auto coarse = write_config(d.path, "[verify]\nn_points = 16\nonly = 1, 3, 4, 11\n");
    CHECK(execute("verify", coarse, {(d.path / "c").string()}, clog, cerr_) == kExitVerifyFailed);
    CHECK(clog.str().find("FAIL 01") != std::string::npos);
    CHECK(clog.str().find("FAIL 04") != std::string::npos);
    CHECK(clog.str().find("verify: FAILED") != std::string::npos);
}
