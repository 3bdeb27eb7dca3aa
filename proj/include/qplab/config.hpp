#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qplab/constants.hpp"
#include "qplab/grid.hpp"
#include "qplab/quantum.hpp"

namespace qplab {

enum class PotentialKind { free, rescaled_oscillator, harmonic, polynomial };
enum class InitialKind { gaussian, ground_state, custom_csv };
enum class VariationalMode { max_entropy, fisher, branches };

struct GridConfig {
    double x_min = -8.0;
    double x_max = 8.0;
    std::size_t n_points = 1601;
    bool operator==(const GridConfig&) const = default;
};

struct ConstantsConfig {
    double m = 1.0;
    double D = 0.5;
    double beta = 1.0;
    bool operator==(const ConstantsConfig&) const = default;
};

struct PotentialConfig {
    PotentialKind kind = PotentialKind::rescaled_oscillator;
    double omega = 1.0;                // harmonic: (1/2) m omega^2 x^2
    std::vector<double> coefficients;  // polynomial: sum c_k x^k
    bool operator==(const PotentialConfig&) const = default;
};

struct InitialConfig {
    InitialKind kind = InitialKind::gaussian;
    double mean = 0.0;
    double sigma = 1.0;
    double wavenumber = 0.0;
    std::string path;  // custom_csv: columns x, rho and optionally v
    bool operator==(const InitialConfig&) const = default;
};

struct RunConfig {
    double dt = 1e-3;
    double horizon = 1.0;
    std::size_t steps = 0;  // 0: ceil(horizon / dt)
    std::size_t record_every = 100;
    std::uint64_t seed = 2024;
    std::string outputs = "qplab_out";
    bool operator==(const RunConfig&) const = default;
};

struct EnsembleConfig {
    std::size_t particles = 10000;
    std::size_t bins = 40;
    double bin_lo = -2.0;
    double bin_hi = 2.0;
    std::size_t paths_written = 100;
    bool operator==(const EnsembleConfig&) const = default;
};

struct KineticConfig {
    std::vector<double> times{1.0, 2.0, 4.0};
    bool operator==(const KineticConfig&) const = default;
};

struct VariationalConfig {
    VariationalMode mode = VariationalMode::max_entropy;
    double zeta = 0.5;
    double gamma = -0.125;
    int sign = 1;
    bool operator==(const VariationalConfig&) const = default;
};

struct RecoilConfig {
    std::string branch = "anti_brownian";
    bool operator==(const RecoilConfig&) const = default;
};

struct KernelsConfig {
    std::string kind = "mehler";
    double x = 0.0;
    std::vector<double> times{0.5, 1.0};
    bool operator==(const KernelsConfig&) const = default;
};

struct VerifyConfig {
    std::size_t n_points = 0;  // 0: every criterion at its own resolution
    std::vector<int> only;     // empty: all twelve
    bool parallel = true;
    bool operator==(const VerifyConfig&) const = default;
};

struct ScenarioConfig {
    GridConfig grid;
    ConstantsConfig constants;
    PotentialConfig potential;
    InitialConfig initial;
    RunConfig run;
    EnsembleConfig ensemble;
    KineticConfig kinetic;
    VariationalConfig variational;
    RecoilConfig recoil;
    KernelsConfig kernels;
    VerifyConfig verify;

    // ConfigError naming the first violated invariant.
    void validate() const;
    // Steps implied by run.steps or by horizon / dt.
    std::size_t step_count() const;
    bool operator==(const ScenarioConfig&) const = default;
};

// Strict `key = value` parser with [section] headers and full-line '#'
// comments. Unknown sections, unknown or repeated keys and malformed values
// are ConfigErrors. The result is not validated.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
// Every key, numbers printed with 17 significant digits, so
// parse_config(serialize_config(c)) == c.
std::string serialize_config(const ScenarioConfig& c);

const char* potential_kind_name(PotentialKind k);
const char* initial_kind_name(InitialKind k);
const char* variational_mode_name(VariationalMode m);

// Scenario builders.
Grid make_grid(const ScenarioConfig& c);
PhysicalConstants make_constants(const ScenarioConfig& c);
GridField make_potential(const ScenarioConfig& c, const Grid& g);
// Stationary density of the diffusion in V: the squared ground state of the
// renormalized Hamiltonian. Nullopt for the free potential.
std::optional<GridPdf> stationary_density(const ScenarioConfig& c, const Grid& g);
// Drift of the diffusion in V (zero for the free potential).
GridField diffusion_drift(const ScenarioConfig& c, const Grid& g);
GridPdf initial_density(const ScenarioConfig& c, const Grid& g);
// Initial current velocity: hbar k / m for a Gaussian packet, zero for the
// ground state, the optional v column of a custom file.
GridField initial_velocity(const ScenarioConfig& c, const Grid& g);
WaveFunction initial_wavefunction(const ScenarioConfig& c, const Grid& g);

}  // namespace qplab
