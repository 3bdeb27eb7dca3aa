#include <cmath>

#include "doctest.h"
#include "qplab/functionals.hpp"
#include "qplab/quantum.hpp"
#include "qplab/spectrum.hpp"

using namespace qplab;

namespace {

GridField oscillator(const Grid& g) {
    return GridField::from_function(g, [](double x) { return 0.5 * (x * x - 1.0); });
}

// V for which rho_*^{1/2} is an exact zero mode of the discrete Hamiltonian
GridField discrete_oscillator(const Grid& g, const PhysicalConstants& c) {
    auto root = GridField::from_function(g, [](double x) { return std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x); });
    auto lap = laplacian(root);
    GridField v(g);
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = c.quantum_coefficient() * lap[i] / root[i];
    return v;
}

WaveFunction ground(const Grid& g, const PhysicalConstants& c) {
    std::vector<cplx> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::pow(M_PI, -0.25) * std::exp(-0.5 * g.x(i) * g.x(i));
    return WaveFunction(g, std::move(v), c);
}

}  // namespace

TEST_CASE("free packet spreads") {
    PhysicalConstants c;
    Grid g(-15.0, 15.0, 3001);
    auto psi0 = WaveFunction::gaussian(g, 0.0, 1.0, 0.0, c);
    auto states = evolve_quantum(psi0, GridField(g), 1e-3, 1000, 250);
    REQUIRE(states.size() == 5);
    CHECK(std::abs(states.back().time() - 1.0) < 1e-12);
    CHECK(std::abs(states.back().density().variance() - 1.25) < 1e-3);
    CHECK(std::abs(free_packet_variance(1.0, 1.0, c) - 1.25) < 1e-15);
    for (const auto& s : states) CHECK(std::abs(s.norm() - 1.0) < 1e-10);
}

TEST_CASE("zero steps return the initial state") {
    PhysicalConstants c;
    Grid g(-10.0, 10.0, 501);
    auto psi0 = WaveFunction::gaussian(g, 0.5, 1.0, 1.0, c);
    auto states = evolve_quantum(psi0, GridField(g), 1e-2, 0);
    REQUIRE(states.size() == 1);
    for (std::size_t i = 1; i + 1 < g.size(); ++i) CHECK(states[0][i] == psi0[i]);
}

TEST_CASE("stability and box checks") {
    PhysicalConstants c;
    Grid g(-10.0, 10.0, 501);
    auto psi0 = WaveFunction::gaussian(g, 0.0, 1.0, 0.0, c);
    CHECK_THROWS_AS(evolve_quantum(psi0, oscillator(g), 0.1, 1), StabilityError);
    CHECK_THROWS_AS(evolve_quantum(psi0, GridField(g), -0.1, 1), DomainError);
    Grid small(-4.0, 4.0, 401);
    auto near = WaveFunction::gaussian(small, 0.0, 1.0, 0.0, c);
    CHECK_THROWS_AS(evolve_quantum(near, GridField(small), 1e-2, 300), BoxError);
}

TEST_CASE("oscillator ground state is stationary") {
    PhysicalConstants c;
    Grid g(-8.0, 8.0, 1601);
    auto v = discrete_oscillator(g, c);
    auto psi0 = ground(g, c);
    auto states = evolve_quantum(psi0, v, 1e-3, 2000, 500);
    const auto rho0 = psi0.density();
    for (const auto& s : states) {
        const auto rho = s.density();
        double err = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(rho[i] - rho0[i]));
        CHECK(err < 1e-8);
    }
    // with the analytic potential <(m/2) u^2> = 1/4 = -<V>
    auto h0 = quantum_invariant_H({psi0}, oscillator(g));
    CHECK(std::abs(h0.front()) < 1e-10);
    auto h = quantum_invariant_H(states, v);
    for (double e : h) CHECK(std::abs(e - h.front()) < 1e-8);

    auto real = madelung_fields(psi0);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(real.v[i] == 0.0);
    auto a = madelung_fields(states[2]);
    auto b = madelung_fields(states[3]);
    const auto core = density_core_mask(a.rho, 1e-6);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!core[i]) CHECK(std::abs(a.v[i]) < 1e-8);
    }
    auto r = hj_residual_quantum(a, b, v, c);
    CHECK(r.max_potential_form < 1e-6);
    CHECK(r.max_gradient_form < 1e-6);
}

TEST_CASE("renormalized oscillator has zero ground energy") {
    PhysicalConstants c;
    Grid g(-8.0, 8.0, 1601);
    double shift = 1.0;
    auto v = renormalize_potential(oscillator(g), c, &shift);
    CHECK(std::abs(shift) < 1e-4);
    auto gs = hamiltonian_ground_state(v, c);
    CHECK(std::abs(gs.energy) < 1e-10);
    CHECK(std::abs(hamiltonian_ground_state(discrete_oscillator(g, c), c).energy) < 1e-10);
}

TEST_CASE("plane wave velocity") {
    PhysicalConstants c;
    Grid g(-12.0, 12.0, 2401);
    const double k = 1.7;
    auto psi = WaveFunction::gaussian(g, 0.0, 1.0, k, c);
    auto f = madelung_fields(psi);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!f.v.is_masked(i)) CHECK(std::abs(f.v[i] - c.hbar() * k / c.mass()) < 1e-8);
    }
    CHECK(f.s[f.anchor] == 0.0);
}

TEST_CASE("free packet fields and hamilton jacobi residual") {
    PhysicalConstants c;
    Grid g(-15.0, 15.0, 3001);
    auto psi0 = WaveFunction::gaussian(g, 0.0, 1.0, 0.0, c);
    const double dt = 1e-3;
    auto states = evolve_quantum(psi0, GridField(g), dt, 1000);
    auto before = madelung_fields(states[999]);
    auto after = madelung_fields(states[1000]);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.x(i);
        if (std::abs(x) < 4.0) err = std::max(err, std::abs(after.v[i] - free_packet_velocity(x, 0.0, 1.0, 1.0, c)));
    }
    CHECK(err < 1e-3);
    auto r = hj_residual_quantum(before, after, GridField(g), c);
    CHECK(r.max_potential_form < 5e-3);
    CHECK(r.max_gradient_form < 5e-3);

    auto h = quantum_invariant_H(states, GridField(g));
    CHECK(std::abs(h.front() - 0.125) < 1e-5);
    CHECK(std::abs(h.back() - h.front()) < 1e-5 * h.front());
    for (double e : h) CHECK(e > 0.0);
}

TEST_CASE("entropy and fisher rates of the free packet") {
    PhysicalConstants c;
    Grid g(-15.0, 15.0, 3001);
    const double dt = 1e-3;
    auto states = evolve_quantum(WaveFunction::gaussian(g, 0.0, 1.0, 0.0, c), GridField(g), dt, 1001, 1);
    const std::size_t k = 1000;
    auto before = states[k - 1].density(), centre = states[k].density(), after = states[k + 1].density();
    auto f = madelung_fields(states[k]);
    // sigma^2 = 1 + t^2/4: dS/dt = 0.2, dF/dt = -0.32 at t = 1
    auto sr = entropy_rate_check(before, after, 2 * dt, centre, f.v, c);
    CHECK(std::abs(sr.finite_difference - 0.2) < 1e-3);
    CHECK(sr.relative_error() < 0.02);
    CHECK(sr.alternate_relative_error() < 0.02);
    auto fr = fisher_rate_check(before, after, 2 * dt, centre, f.v, Motion::quantum);
    MESSAGE("dF/dt " << fr.finite_difference << " vs " << fr.identity << " alt " << fr.alternate);
    CHECK(std::abs(fr.finite_difference + 0.32) < 2e-3);
    CHECK(fr.relative_error() < 0.02);
}
