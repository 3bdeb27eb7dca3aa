#include "qplab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "qplab/brownian.hpp"
#include "qplab/kernels.hpp"
#include "qplab/spectrum.hpp"

namespace qplab {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

double parse_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end || !std::isfinite(out)) {
        throw ConfigError(key + ": expected a finite number, got '" + v + "'");
    }
    return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
    Int out = 0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> parse_reals(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split_list(v)) out.push_back(parse_real(key, item));
    return out;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s;
}

template <class E>
E parse_enum(const std::string& key, const std::string& v, std::initializer_list<std::pair<const char*, E>> names) {
    std::string options;
    for (const auto& [name, e] : names) {
        if (v == name) return e;
        options += (options.empty() ? "" : ", ") + std::string(name);
    }
    throw ConfigError(key + ": unknown value '" + v + "' (one of " + options + ")");
}

using Setter = std::function<void(ScenarioConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        t["grid.x_min"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.grid.x_min = parse_real(k, v); };
        t["grid.x_max"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.grid.x_max = parse_real(k, v); };
        t["grid.n_points"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.grid.n_points = parse_int<std::size_t>(k, v);
        };
        t["constants.m"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.constants.m = parse_real(k, v); };
        t["constants.D"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.constants.D = parse_real(k, v); };
        t["constants.beta"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.constants.beta = parse_real(k, v);
        };
        t["potential.kind"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.potential.kind = parse_enum<PotentialKind>(k, v,
                                                         {{"free", PotentialKind::free},
                                                          {"rescaled_oscillator", PotentialKind::rescaled_oscillator},
                                                          {"harmonic", PotentialKind::harmonic},
                                                          {"polynomial", PotentialKind::polynomial}});
        };
        t["potential.omega"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.potential.omega = parse_real(k, v);
        };
        t["potential.coefficients"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.potential.coefficients = parse_reals(k, v);
        };
        t["initial.kind"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.initial.kind = parse_enum<InitialKind>(k, v,
                                                     {{"gaussian", InitialKind::gaussian},
                                                      {"ground_state", InitialKind::ground_state},
                                                      {"custom_csv", InitialKind::custom_csv}});
        };
        t["initial.mean"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.initial.mean = parse_real(k, v); };
        t["initial.sigma"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.initial.sigma = parse_real(k, v);
        };
        t["initial.wavenumber"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.initial.wavenumber = parse_real(k, v);
        };
        t["initial.path"] = [](ScenarioConfig& c, const std::string&, const std::string& v) { c.initial.path = v; };
        t["run.dt"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.run.dt = parse_real(k, v); };
        t["run.horizon"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.run.horizon = parse_real(k, v); };
        t["run.steps"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.run.steps = parse_int<std::size_t>(k, v);
        };
        t["run.record_every"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.run.record_every = parse_int<std::size_t>(k, v);
        };
        t["run.seed"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.run.seed = parse_int<std::uint64_t>(k, v);
        };
        t["run.outputs"] = [](ScenarioConfig& c, const std::string&, const std::string& v) { c.run.outputs = v; };
        t["ensemble.particles"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.ensemble.particles = parse_int<std::size_t>(k, v);
        };
        t["ensemble.bins"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.ensemble.bins = parse_int<std::size_t>(k, v);
        };
        t["ensemble.bin_lo"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.ensemble.bin_lo = parse_real(k, v);
        };
        t["ensemble.bin_hi"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.ensemble.bin_hi = parse_real(k, v);
        };
        t["ensemble.paths_written"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.ensemble.paths_written = parse_int<std::size_t>(k, v);
        };
        t["kinetic.times"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.kinetic.times = parse_reals(k, v);
        };
        t["variational.mode"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.variational.mode = parse_enum<VariationalMode>(k, v,
                                                             {{"max_entropy", VariationalMode::max_entropy},
                                                              {"fisher", VariationalMode::fisher},
                                                              {"branches", VariationalMode::branches}});
        };
        t["variational.zeta"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.variational.zeta = parse_real(k, v);
        };
        t["variational.gamma"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.variational.gamma = parse_real(k, v);
        };
        t["variational.sign"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.variational.sign = parse_int<int>(k, v);
        };
        t["recoil.branch"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.recoil.branch = parse_enum<std::string>(k, v, {{"anti_brownian", "anti_brownian"}, {"brownian", "brownian"}});
        };
        t["kernels.kind"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            try {
                c.kernels.kind = kernels::kind_name(kernels::kind_from_name(v));
            } catch (const Error&) {
                throw ConfigError(k + ": unknown kernel '" + v + "'");
            }
        };
        t["kernels.x"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.kernels.x = parse_real(k, v); };
        t["kernels.times"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.kernels.times = parse_reals(k, v);
        };
        t["verify.n_points"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.verify.n_points = parse_int<std::size_t>(k, v);
        };
        t["verify.only"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.verify.only.clear();
            for (const auto& item : split_list(v)) c.verify.only.push_back(parse_int<int>(k, item));
        };
        t["verify.parallel"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.verify.parallel = parse_bool(k, v);
        };
        return t;
    }();
    return table;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

}  // namespace

const char* potential_kind_name(PotentialKind k) {
    switch (k) {
        case PotentialKind::free: return "free";
        case PotentialKind::rescaled_oscillator: return "rescaled_oscillator";
        case PotentialKind::harmonic: return "harmonic";
        case PotentialKind::polynomial: return "polynomial";
    }
    return "?";
}

const char* initial_kind_name(InitialKind k) {
    switch (k) {
        case InitialKind::gaussian: return "gaussian";
        case InitialKind::ground_state: return "ground_state";
        case InitialKind::custom_csv: return "custom_csv";
    }
    return "?";
}

const char* variational_mode_name(VariationalMode m) {
    switch (m) {
        case VariationalMode::max_entropy: return "max_entropy";
        case VariationalMode::fisher: return "fisher";
        case VariationalMode::branches: return "branches";
    }
    return "?";
}

ScenarioConfig parse_config(const std::string& text) {
    static const std::set<std::string> sections{"grid",        "constants", "potential", "initial",
                                                "run",         "ensemble",  "kinetic",   "variational",
                                                "recoil",      "kernels",   "verify"};
    ScenarioConfig c;
    std::string section;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    for (int line_no = 1; std::getline(in, raw); ++line_no) {
        const std::string line = trim(raw);
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (!sections.count(section)) throw ConfigError(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value, got '" + line + "'");
        if (section.empty()) throw ConfigError(where + "key outside of any section");
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError(where + "unknown key '" + key + "'");
        if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
        if (value.empty()) throw ConfigError(where + key + ": empty value");
        it->second(c, key, value);
    }
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ScenarioConfig& c) {
    std::ostringstream o;
    o << "[grid]\n"
      << "x_min = " << fmt(c.grid.x_min) << "\n"
      << "x_max = " << fmt(c.grid.x_max) << "\n"
      << "n_points = " << c.grid.n_points << "\n\n";
    o << "[constants]\n"
      << "m = " << fmt(c.constants.m) << "\n"
      << "D = " << fmt(c.constants.D) << "\n"
      << "beta = " << fmt(c.constants.beta) << "\n\n";
    o << "[potential]\n"
      << "kind = " << potential_kind_name(c.potential.kind) << "\n"
      << "omega = " << fmt(c.potential.omega) << "\n";
    if (!c.potential.coefficients.empty()) o << "coefficients = " << fmt_list(c.potential.coefficients) << "\n";
    o << "\n[initial]\n"
      << "kind = " << initial_kind_name(c.initial.kind) << "\n"
      << "mean = " << fmt(c.initial.mean) << "\n"
      << "sigma = " << fmt(c.initial.sigma) << "\n"
      << "wavenumber = " << fmt(c.initial.wavenumber) << "\n";
    if (!c.initial.path.empty()) o << "path = " << c.initial.path << "\n";
    o << "\n[run]\n"
      << "dt = " << fmt(c.run.dt) << "\n"
      << "horizon = " << fmt(c.run.horizon) << "\n"
      << "steps = " << c.run.steps << "\n"
      << "record_every = " << c.run.record_every << "\n"
      << "seed = " << c.run.seed << "\n"
      << "outputs = " << c.run.outputs << "\n\n";
    o << "[ensemble]\n"
      << "particles = " << c.ensemble.particles << "\n"
      << "bins = " << c.ensemble.bins << "\n"
      << "bin_lo = " << fmt(c.ensemble.bin_lo) << "\n"
      << "bin_hi = " << fmt(c.ensemble.bin_hi) << "\n"
      << "paths_written = " << c.ensemble.paths_written << "\n\n";
    o << "[kinetic]\n";
    if (!c.kinetic.times.empty()) o << "times = " << fmt_list(c.kinetic.times) << "\n";
    o << "\n[variational]\n"
      << "mode = " << variational_mode_name(c.variational.mode) << "\n"
      << "zeta = " << fmt(c.variational.zeta) << "\n"
      << "gamma = " << fmt(c.variational.gamma) << "\n"
      << "sign = " << c.variational.sign << "\n\n";
    o << "[recoil]\n"
      << "branch = " << c.recoil.branch << "\n\n";
    o << "[kernels]\n"
      << "kind = " << c.kernels.kind << "\n"
      << "x = " << fmt(c.kernels.x) << "\n";
    if (!c.kernels.times.empty()) o << "times = " << fmt_list(c.kernels.times) << "\n";
    o << "\n[verify]\n"
      << "n_points = " << c.verify.n_points << "\n";
    if (!c.verify.only.empty()) {
        o << "only = ";
        for (std::size_t i = 0; i < c.verify.only.size(); ++i) o << (i ? ", " : "") << c.verify.only[i];
        o << "\n";
    }
    o << "parallel = " << (c.verify.parallel ? "true" : "false") << "\n";
    return o.str();
}

void ScenarioConfig::validate() const {
    require(grid.x_max > grid.x_min, "grid.x_max must exceed grid.x_min");
    require(grid.n_points >= 3, "grid.n_points must be at least 3");
    require(constants.m > 0.0, "constants.m must be positive");
    require(constants.D > 0.0, "constants.D must be positive");
    require(constants.beta > 0.0, "constants.beta must be positive");
    require(potential.omega > 0.0, "potential.omega must be positive");
    require(potential.kind != PotentialKind::polynomial || !potential.coefficients.empty(),
            "potential.coefficients are required for a polynomial potential");
    require(initial.sigma > 0.0, "initial.sigma must be positive");
    require(initial.kind != InitialKind::custom_csv || !initial.path.empty(),
            "initial.path is required for a custom_csv initial state");
    require(run.dt > 0.0, "dt must be positive");
    require(run.horizon > 0.0, "horizon must be positive");
    require(run.record_every >= 1, "run.record_every must be at least 1");
    require(!run.outputs.empty(), "run.outputs must name a directory");
    require(ensemble.particles >= 1, "ensemble.particles must be at least 1");
    require(ensemble.bins >= 1, "ensemble.bins must be at least 1");
    require(ensemble.bin_hi > ensemble.bin_lo, "ensemble.bin_hi must exceed ensemble.bin_lo");
    require(!kinetic.times.empty(), "kinetic.times must list at least one time");
    for (double t : kinetic.times) require(t > 0.0, "kinetic.times must be positive");
    require(variational.sign == 1 || variational.sign == -1, "variational.sign must be +1 or -1");
    require(!kernels.times.empty(), "kernels.times must list at least one time");
    for (double t : kernels.times) require(t > 0.0, "kernels.times must be positive");
    require(verify.n_points == 0 || verify.n_points >= 3, "verify.n_points must be 0 or at least 3");
    for (int k : verify.only) require(k >= 1 && k <= 12, "verify.only entries must lie in 1..12");
}

std::size_t ScenarioConfig::step_count() const {
    if (run.steps > 0) return run.steps;
    return static_cast<std::size_t>(std::ceil(run.horizon / run.dt - 1e-9));
}

Grid make_grid(const ScenarioConfig& c) { return Grid(c.grid.x_min, c.grid.x_max, c.grid.n_points); }

PhysicalConstants make_constants(const ScenarioConfig& c) {
    return PhysicalConstants(c.constants.m, c.constants.D, c.constants.beta);
}

GridField make_potential(const ScenarioConfig& c, const Grid& g) {
    const auto& p = c.potential;
    switch (p.kind) {
        case PotentialKind::free: return GridField(g);
        case PotentialKind::rescaled_oscillator:
            return GridField::from_function(g, [](double x) { return 0.5 * (x * x - 1.0); });
        case PotentialKind::harmonic: {
            const double k = c.constants.m * p.omega * p.omega;
            return GridField::from_function(g, [k](double x) { return 0.5 * k * x * x; });
        }
        case PotentialKind::polynomial:
            return GridField::from_function(g, [&](double x) {
                double s = 0.0;
                for (auto it = p.coefficients.rbegin(); it != p.coefficients.rend(); ++it) s = s * x + *it;
                return s;
            });
    }
    return GridField(g);
}

namespace {

GridPdf ground_density(const GridField& v, const PhysicalConstants& c) {
    const auto gs = hamiltonian_ground_state(v, c);
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = gs.amplitude[i] * gs.amplitude[i];
    return GridPdf(v.grid, std::move(r)).normalized();
}

struct CustomData {
    std::vector<double> x, rho, v;
};

CustomData read_custom(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read initial.path '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("initial.path '" + path + "' is empty");
    const auto header = split_list(line);
    int ix = -1, ir = -1, iv = -1;
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == "x") ix = static_cast<int>(k);
        if (header[k] == "rho") ir = static_cast<int>(k);
        if (header[k] == "v") iv = static_cast<int>(k);
    }
    if (ix < 0 || ir < 0) throw ConfigError("initial.path: header must contain columns x and rho");
    CustomData d;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto cells = split_list(line);
        if (cells.size() != header.size()) throw ConfigError("initial.path: ragged row '" + line + "'");
        d.x.push_back(parse_real("initial.path x", cells[ix]));
        d.rho.push_back(parse_real("initial.path rho", cells[ir]));
        if (iv >= 0) d.v.push_back(parse_real("initial.path v", cells[iv]));
    }
    if (d.x.size() < 2) throw ConfigError("initial.path: at least two rows are required");
    for (std::size_t i = 1; i < d.x.size(); ++i) {
        if (!(d.x[i] > d.x[i - 1])) throw ConfigError("initial.path: x must be strictly increasing");
    }
    for (double r : d.rho) {
        if (r < 0.0) throw ConfigError("initial.path: rho must be nonnegative");
    }
    return d;
}

// piecewise-linear resampling, zero outside the tabulated range
std::vector<double> resample(const std::vector<double>& xs, const std::vector<double>& f, const Grid& g) {
    std::vector<double> out(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.x(i);
        if (x < xs.front() || x > xs.back()) continue;
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t k = it == xs.end() ? xs.size() - 1 : static_cast<std::size_t>(it - xs.begin());
        if (k == 0) k = 1;
        const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        out[i] = (1.0 - w) * f[k - 1] + w * f[k];
    }
    return out;
}

}  // namespace

std::optional<GridPdf> stationary_density(const ScenarioConfig& c, const Grid& g) {
    if (c.potential.kind == PotentialKind::free) return std::nullopt;
    return ground_density(make_potential(c, g), make_constants(c));
}

GridField diffusion_drift(const ScenarioConfig& c, const Grid& g) {
    auto star = stationary_density(c, g);
    if (!star) return GridField(g);
    return stationary_drift(*star, make_constants(c));
}

GridPdf initial_density(const ScenarioConfig& c, const Grid& g) {
    switch (c.initial.kind) {
        case InitialKind::gaussian: return GridPdf::gaussian(g, c.initial.mean, c.initial.sigma);
        case InitialKind::ground_state: return ground_density(make_potential(c, g), make_constants(c));
        case InitialKind::custom_csv: {
            const auto d = read_custom(c.initial.path);
            GridPdf rho(g, resample(d.x, d.rho, g));
            if (!(rho.mass() > 0.0)) throw ConfigError("initial.path: density has no mass on the grid");
            return rho.normalized();
        }
    }
    throw ConfigError("unknown initial kind");
}

GridField initial_velocity(const ScenarioConfig& c, const Grid& g) {
    const PhysicalConstants pc = make_constants(c);
    switch (c.initial.kind) {
        case InitialKind::gaussian: {
            const double v = pc.hbar() * c.initial.wavenumber / pc.mass();
            return GridField(g, std::vector<double>(g.size(), v));
        }
        case InitialKind::ground_state: return GridField(g);
        case InitialKind::custom_csv: {
            const auto d = read_custom(c.initial.path);
            if (d.v.empty()) return GridField(g);
            return GridField(g, resample(d.x, d.v, g));
        }
    }
    return GridField(g);
}

WaveFunction initial_wavefunction(const ScenarioConfig& c, const Grid& g) {
    const PhysicalConstants pc = make_constants(c);
    if (c.initial.kind == InitialKind::gaussian) {
        return WaveFunction::gaussian(g, c.initial.mean, c.initial.sigma, c.initial.wavenumber, pc);
    }
    // s = m int v dx
    const GridField v = initial_velocity(c, g);
    std::vector<double> mv(g.size());
    for (std::size_t i = 0; i < mv.size(); ++i) mv[i] = pc.mass() * v[i];
    GridField s(g, cumulative_quadrature(g, mv));
    return WaveFunction::from_density_phase(initial_density(c, g), s, pc);
}

}  // namespace qplab
