#include <cmath>

#include "doctest.h"
#include "qplab/brownian.hpp"
#include "qplab/quantum.hpp"
#include "qplab/recoil.hpp"

using namespace qplab;

namespace {

GridPdf rho_star(const Grid& g) {
    return GridPdf::from_function(g, [](double x) { return std::exp(-x * x) / std::sqrt(M_PI); });
}

double sup_gap(const MatterState& a, const MatterState& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.rho.size(); ++i) {
        d = std::max(d, std::abs(a.rho[i] - b.rho[i]));
        d = std::max(d, std::abs(a.v[i] - b.v[i]));
    }
    return d;
}

}  // namespace

TEST_CASE("impulse step fixed points") {
    PhysicalConstants c;
    Grid g(-6.0, 6.0, 61);
    auto v = GridField::from_function(g, [](double x) { return 0.5 * (x * x - 1.0); });
    MatterState s{rho_star(g).normalized(), GridField(g), 0.0, c};
    for (auto branch : {ImpulseBranch::brownian, ImpulseBranch::anti_brownian}) {
        auto next = impulse_step(s, v, 1e-3, branch);
        CHECK(sup_gap(s, next) < 1e-12);
        CHECK(next.time == doctest::Approx(1e-3));
    }
    // oscillator ground state under repeated anti-Brownian impulses; the
    // hydrodynamic form amplifies relative round-off in the far tails at a
    // rate ~ |k x|, so the horizon is kept at T = 0.5
    auto run = recoil_trajectory(s, v, 1e-3, 500, 1);
    double worst = 0.0;
    for (std::size_t k = 1; k < run.states.size(); ++k) worst = std::max(worst, sup_gap(run.states[k - 1], run.states[k]));
    MESSAGE("per step " << worst);
    CHECK(worst < 1e-8);
    CHECK(run.max_mass_drift < 1e-8);
}

TEST_CASE("single anti-Brownian impulse on a free packet") {
    PhysicalConstants c;
    Grid g(-8.0, 8.0, 161);
    MatterState s{GridPdf::gaussian(g, 0.0, 1.0), GridField(g), 0.0, c};
    ImpulseLog log{GridField(g), 0.0};
    auto next = impulse_step(s, GridField(g), 1e-3, ImpulseBranch::anti_brownian, &log);
    const std::size_t at = 90;
    CHECK(std::abs(g.x(at) - 1.0) < 1e-12);
    CHECK(std::abs(next.v[at] - 2.5e-4) < 1e-6);
    CHECK(std::abs(log.pulse[at] - 2.5e-4) < 1e-6);
    CHECK(std::abs(log.mass_drift) < 1e-8);
    // Q of the unit Gaussian: -(1/2)(x^2/4 - 1/2)
    auto q = log_quantum_potential(s.rho, c);
    CHECK(std::abs(q[at] + 0.5 * (0.25 - 0.5)) < 1e-10);
    auto b = impulse_step(s, GridField(g), 1e-3, ImpulseBranch::brownian);
    CHECK(std::abs(b.v[at] + 2.5e-4) < 1e-6);
}

TEST_CASE("recoil records and errors") {
    PhysicalConstants c;
    Grid g(-8.0, 8.0, 161);
    MatterState s{GridPdf::gaussian(g, 0.0, 1.0), GridField(g), 0.0, c};
    auto run = recoil_trajectory(s, GridField(g), 1e-3, 10, 4);
    REQUIRE(run.states.size() == 4);
    CHECK(run.states.back().time == doctest::Approx(1e-2));
    CHECK(run.mass_drift.size() == 10);
    for (std::size_t k = 0; k < run.states.size(); ++k) {
        for (std::size_t i = 0; i < g.size(); ++i) CHECK(run.brownian_pulse[k][i] == -run.anti_pulse[k][i]);
    }
    auto again = recoil_trajectory(s, GridField(g), 1e-3, 10, 4);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(again.states.back().v[i] == run.states.back().v[i]);
    auto steep = GridField::from_function(g, [](double x) { return 200.0 * x; });
    CHECK_THROWS_AS(impulse_step({s.rho, steep, 0.0, c}, GridField(g), 1e-3, ImpulseBranch::anti_brownian),
                    StabilityError);
    MatterState bad{GridPdf(g, std::vector<double>(g.size(), 1.0)), GridField(g), 0.0, c};
    CHECK_THROWS_AS(impulse_step(bad, GridField(g), 1e-3, ImpulseBranch::anti_brownian), NormalizationError);
}

TEST_CASE("anti-Brownian iteration converges to the quantum flow") {
    PhysicalConstants c;
    Grid gf(-10.0, 10.0, 8001);
    auto ref = evolve_quantum(WaveFunction::gaussian(gf, 0.0, 1.0, 0.0, c), GridField(gf), 1e-4, 5000, 5000);
    auto f = madelung_fields(ref.back());
    CHECK(std::abs(f.time - 0.5) < 1e-12);
    Grid g(-8.0, 8.0, 161);
    MatterState s0{GridPdf::gaussian(g, 0.0, 1.0), GridField(g), 0.0, c};
    auto coarse = recoil_trajectory(s0, GridField(g), 1e-3, 500, 500);
    auto fine = recoil_trajectory(s0, GridField(g), 5e-4, 1000, 1000);
    const double e1 = matter_distance(coarse.states.back(), f.rho, f.v);
    const double e2 = matter_distance(fine.states.back(), f.rho, f.v);
    MESSAGE("quantum distance " << e1 << " -> " << e2);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.2));
    CHECK(e1 < 1e-3);
    CHECK(fine.max_mass_drift < 1e-8);
}

TEST_CASE("Brownian iteration converges to the diffusion flow on a coarse grid") {
    // the forward Brownian Euler system is ill-posed; only coarse grids and
    // short horizons stay bounded
    PhysicalConstants c;
    Grid gf(-8.0, 8.0, 3201);
    auto bf = GridField::from_function(gf, [](double x) { return -x; });
    auto snaps = evolve_fokker_planck(GridPdf::gaussian(gf, 1.5, 0.5), bf, c, 1e-4, 2500, 2500);
    auto f = brownian_fields(snaps.back(), bf, c);
    Grid g(-8.0, 8.0, 65);
    auto v = GridField::from_function(g, [](double x) { return 0.5 * (x * x - 1.0); });
    // v = b - u with u = D grad ln rho
    auto v0 = GridField::from_function(g, [](double x) { return -x + 2.0 * (x - 1.5); });
    MatterState s0{GridPdf::gaussian(g, 1.5, 0.5), v0, 0.0, c};
    auto coarse = recoil_trajectory(s0, v, 1e-3, 250, 250, ImpulseBranch::brownian);
    auto fine = recoil_trajectory(s0, v, 5e-4, 500, 500, ImpulseBranch::brownian);
    const double e1 = matter_distance(coarse.states.back(), f.rho, f.v);
    const double e2 = matter_distance(fine.states.back(), f.rho, f.v);
    MESSAGE("diffusion distance " << e1 << " -> " << e2);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("impulse momentum laws") {
    PhysicalConstants c;
    Grid g(-8.0, 8.0, 1601);
    auto star = rho_star(g);
    auto v = compatibility_potential(star, c);
    const double dt = 1e-3;

    SUBCASE("stationary ou and the oscillator ground state") {
        auto pair = drift_pair_from_fields(star, GridField(g), c);
        for (auto motion : {Motion::brownian, Motion::quantum}) {
            auto r = impulse_momentum_report(pair, pair, 1e-2, star, v, motion, c, dt);
            MESSAGE("gaps " << r.max_forward_gap << " " << r.max_backward_gap << " scale " << r.scale);
            CHECK(r.max_forward_gap < 1e-3 * r.scale);
            CHECK(r.max_backward_gap < 1e-3 * r.scale);
            CHECK(r.mapping_closure < 1e-8);
            // impulse = x dt in both readings
            const std::size_t at = 1000;
            CHECK(std::abs(r.forward[at] - g.x(at) * dt) < 1e-3 * dt);
        }
    }
    SUBCASE("relaxing ou") {
        auto b = stationary_drift(star, c);
        auto snaps = evolve_fokker_planck(GridPdf::gaussian(g, 1.5, 0.5), b, c, 1e-3, 501, 1);
        auto f0 = brownian_fields(snaps[500], b, c), f1 = brownian_fields(snaps[501], b, c);
        auto r = impulse_momentum_report(drift_pair_from_fields(f0.rho, f0.v, c), drift_pair_from_fields(f1.rho, f1.v, c),
                                         1e-3, f0.rho, v, Motion::brownian, c, dt);
        MESSAGE("relaxing ou " << r.max_forward_gap << " " << r.max_backward_gap << " scale " << r.scale);
        CHECK(r.max_forward_gap < 1e-2 * r.scale);
        CHECK(r.max_backward_gap < 1e-2 * r.scale);
        CHECK(r.mapping_closure < 1e-8);
    }
    SUBCASE("free quantum packet") {
        Grid w(-15.0, 15.0, 3001);
        auto states = evolve_quantum(WaveFunction::gaussian(w, 0.0, 1.0, 0.0, c), GridField(w), 1e-3, 501, 1);
        auto f0 = madelung_fields(states[500]), f1 = madelung_fields(states[501]);
        auto r = impulse_momentum_report(drift_pair_from_fields(f0.rho, f0.v, c), drift_pair_from_fields(f1.rho, f1.v, c),
                                         1e-3, f0.rho, GridField(w), Motion::quantum, c, dt);
        MESSAGE("free packet " << r.max_forward_gap << " " << r.max_backward_gap << " scale " << r.scale);
        CHECK(r.max_forward_gap < 1e-2 * r.scale);
        CHECK(r.max_backward_gap < 1e-2 * r.scale);
        CHECK(r.mapping_closure < 1e-8);
    }
}
