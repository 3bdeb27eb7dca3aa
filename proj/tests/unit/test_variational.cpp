#include <cmath>

#include "doctest.h"
#include "qplab/brownian.hpp"
#include "qplab/functionals.hpp"
#include "qplab/quantum.hpp"
#include "qplab/random.hpp"
#include "qplab/spectrum.hpp"
#include "qplab/variational.hpp"

using namespace qplab;

namespace {

double mean_of(const GridPdf& rho, const GridField& f) {
    std::vector<double> w(rho.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rho[i] * f[i];
    return quadrature(rho.grid(), w);
}

// Smooth random direction delta = rho (xi - a - b V) with int delta = int delta V = 0.
std::vector<double> projected_direction(const GridPdf& rho, const GridField& v, std::uint64_t seed) {
    const Grid& g = rho.grid();
    CounterRng rng(seed, 0);
    std::vector<double> xi(g.size(), 0.0);
    for (int k = 1; k <= 4; ++k) {
        const double a = rng.normal(2 * k), b = rng.normal(2 * k + 1);
        for (std::size_t i = 0; i < xi.size(); ++i) {
            xi[i] += a * std::cos(0.5 * k * g.x(i)) + b * std::sin(0.5 * k * g.x(i));
        }
    }
    // solve the 2x2 moment system for a, b
    std::vector<double> one(g.size(), 1.0);
    auto m = [&](const std::vector<double>& f, const std::vector<double>& h) {
        std::vector<double> w(g.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = rho[i] * f[i] * h[i];
        return quadrature(g, w);
    };
    const auto& V = v.values;
    const double m00 = m(one, one), m01 = m(one, V), m11 = m(V, V);
    const double r0 = m(xi, one), r1 = m(xi, V);
    const double det = m00 * m11 - m01 * m01;
    const double a = (r0 * m11 - r1 * m01) / det, b = (m00 * r1 - m01 * r0) / det;
    std::vector<double> d(g.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = rho[i] * (xi[i] - a - b * V[i]);
    return d;
}

GridPdf perturbed(const GridPdf& rho, const std::vector<double>& d, double eps) {
    std::vector<double> r(rho.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = rho[i] + eps * d[i];
    return GridPdf(rho.grid(), std::move(r));
}

}  // namespace

TEST_CASE("maximum entropy pdf") {
    Grid g(-10.0, 10.0, 2001);
    auto v = GridField::from_function(g, [](double x) { return x * x; });
    auto s = max_entropy_pdf(v, 0.5);
    CHECK(std::abs(s.multiplier + 1.0) < 1e-6);
    CHECK(std::abs(s.constraint_residual()) < 1e-10);
    CHECK(!s.degenerate);
    auto q = max_entropy_pdf(v, 0.25);
    CHECK(std::abs(q.multiplier + 2.0) < 1e-6);
    // entropy of N(0, 1/2)
    CHECK(std::abs(s.functional_value - 0.5 * std::log(M_PI * M_E)) < 1e-8);

    SUBCASE("maximal under constrained perturbations") {
        for (std::uint64_t k = 0; k < 100; ++k) {
            auto d = projected_direction(s.rho, v, 1000 + k);
            double scale = 0.0;
            for (std::size_t i = 0; i < d.size(); ++i) {
                if (s.rho[i] > 0.0) scale = std::max(scale, std::abs(d[i]) / s.rho[i]);
            }
            auto p = perturbed(s.rho, d, 0.5 / scale);
            CHECK(std::abs(p.mass() - 1.0) < 1e-10);
            CHECK(std::abs(mean_of(p, v) - 0.5) < 1e-10);
            CHECK(shannon_entropy(p) < s.functional_value);
        }
    }
    SUBCASE("degenerate and infeasible") {
        GridField flat(g);
        for (double& x : flat.values) x = 3.0;
        auto d = max_entropy_pdf(flat, 3.0);
        CHECK(d.degenerate);
        CHECK(d.multiplier == 0.0);
        CHECK(std::abs(d.rho[0] - d.rho[1000]) < 1e-14);
        CHECK_THROWS_AS(max_entropy_pdf(flat, 2.0), ConstraintError);
        CHECK_THROWS_AS(max_entropy_pdf(v, -0.1), ConstraintError);
        CHECK_THROWS_AS(max_entropy_pdf(v, 100.0), ConstraintError);
    }
    SUBCASE("mass against the walls") {
        Grid b(-3.0, 3.0, 601);
        auto w = GridField::from_function(b, [](double x) { return x * x; });
        CHECK_THROWS_AS(max_entropy_pdf(w, 8.0), DivergenceError);
    }
    SUBCASE("bracket widening") {
        auto far = max_entropy_pdf(v, 0.01, {-0.5, -0.25});
        CHECK(std::abs(far.multiplier + 50.0) < 1e-4);
    }
}

TEST_CASE("fisher extremum recovers a known density") {
    Grid g(-8.0, 8.0, 3201);
    const double l0 = 8.0;
    auto v = GridField::from_function(g, [&](double x) { return 4.0 / l0 * (x * x - 1.0); });
    auto s = fisher_extremum_pdf(v, -2.0 / l0);
    MESSAGE("lambda " << s.multiplier);
    CHECK(std::abs(s.multiplier - l0) < 1e-4);
    auto star = GridPdf::from_function(g, [](double x) { return std::exp(-x * x) / std::sqrt(M_PI); });
    double sup = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) sup = std::max(sup, std::abs(s.rho[i] - star[i]));
    MESSAGE("sup " << sup);
    CHECK(sup < 1e-5);
    CHECK(std::abs(s.functional_value - 2.0) < 1e-4);
    CHECK(fisher_brownian_lambda(PhysicalConstants()) == 8.0);
    PhysicalConstants c(2.0, 0.25);
    CHECK(fisher_brownian_lambda(c) == doctest::Approx(8.0 * c.mass() / (c.hbar() * c.hbar())));
}

TEST_CASE("fisher extremum of the oscillator") {
    Grid g(-8.0, 8.0, 3201);
    auto v = GridField::from_function(g, [](double x) { return x * x; });
    auto s = fisher_extremum_pdf(v, 0.25);
    // rho ~ exp(-sqrt(lambda) x^2 / 2), <x^2> = 1 / sqrt(lambda)
    CHECK(std::abs(s.multiplier - 16.0) < 1e-3);
    CHECK(std::abs(s.constraint_residual()) < 1e-9);
    // V = (4/lambda) Delta rho^{1/2} / rho^{1/2} + const on the core
    std::vector<double> r(g.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::sqrt(s.rho[i]);
    auto lap = laplacian(g, r);
    const double peak = s.rho.max_value();
    const std::size_t mid = g.size() / 2;
    const double k = v[mid] - 4.0 / s.multiplier * lap[mid] / r[mid];
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
        if (s.rho[i] < 1e-6 * peak) continue;
        worst = std::max(worst, std::abs(4.0 / s.multiplier * lap[i] / r[i] + k - v[i]));
    }
    CHECK(worst < 1e-6);

    SUBCASE("stationary under constrained perturbations") {
        const double base = s.functional_value + s.multiplier * mean_of(s.rho, v);
        for (std::uint64_t k2 = 0; k2 < 20; ++k2) {
            auto d = projected_direction(s.rho, v, 77 + k2);
            double scale = 0.0;
            for (std::size_t i = 0; i < d.size(); ++i) {
                if (s.rho[i] > 0.0) scale = std::max(scale, std::abs(d[i]) / s.rho[i]);
            }
            const double eps = 0.1 / scale;
            auto up = perturbed(s.rho, d, eps), down = perturbed(s.rho, d, -eps);
            const double fu = fisher_information(up) + s.multiplier * mean_of(up, v);
            const double fd = fisher_information(down) + s.multiplier * mean_of(down, v);
            // first variation vanishes up to the O(h^2) mismatch between the
            // discrete functional and the discrete eigenproblem
            // odd part: a tiny first variation plus the cubic term
            CHECK(std::abs(fu - fd) < 1e-6 + 1e-2 * std::abs(fu + fd - 2.0 * base));
            CHECK(fu > base);
            CHECK(fd > base);
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(fisher_extremum_pdf(v, -1.0), ConstraintError);
        auto ramp = GridField::from_function(g, [](double x) { return x; });
        CHECK_THROWS_AS(fisher_extremum_pdf(ramp, 0.0), ConstraintError);
        CHECK_THROWS_AS(fisher_family(v, -1.0), ConstraintError);
    }
}

TEST_CASE("branch classification") {
    PhysicalConstants c;
    CHECK(classify_gamma(-0.125, c) == FisherBranch::quantum);
    CHECK(classify_gamma(0.125, c) == FisherBranch::brownian);
    CHECK(classify_gamma(0.0, c) == FisherBranch::classical);
    CHECK_THROWS_AS(classify_gamma(0.3, c), BranchError);
    CHECK(std::string(branch_name(FisherBranch::brownian)) == "brownian");
}

TEST_CASE("quantum branch keeps the ground state") {
    PhysicalConstants c;
    Grid g(-8.0, 8.0, 1601);
    auto v = GridField::from_function(g, [](double x) { return 0.5 * x * x; });
    auto gs = hamiltonian_ground_state(v, c);
    std::vector<double> r(g.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = gs.amplitude[i] * gs.amplitude[i];
    GridPdf rho0 = GridPdf(g, r).normalized();
    auto ev = constrained_fisher_branches(rho0, GridField(g), v, -0.125, 1, c, 1e-3, 100, 50);
    CHECK(ev.branch == FisherBranch::quantum);
    double sup = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) sup = std::max(sup, std::abs(ev.snapshots.back().rho[i] - rho0[i]));
    CHECK(sup < 1e-8);
    CHECK(ev.hj_residual < 1e-4);
    // same code path as the evolver
    auto direct = evolve_quantum(WaveFunction::from_density_phase(rho0, GridField(g), c), v, 1e-3, 100, 50);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(direct.back().density()[i] == ev.snapshots.back().rho[i]);
}

TEST_CASE("diffusion branch is the ou process") {
    PhysicalConstants c;
    Grid g(-8.0, 8.0, 1601);
    auto v = GridField::from_function(g, [](double x) { return 0.5 * x * x; });
    auto rho0 = GridPdf::gaussian(g, 1.5, 0.5);
    auto ev = constrained_fisher_branches(rho0, GridField(g), v, 0.125, -1, c, 1e-3, 500, 100);
    CHECK(ev.branch == FisherBranch::brownian);
    auto b = GridField::from_function(g, [](double x) { return -x; });
    auto ref = evolve_fokker_planck(rho0, b, c, 1e-3, 500, 100);
    REQUIRE(ref.size() == ev.snapshots.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) sup = std::max(sup, std::abs(ref.back().rho[i] - ev.snapshots.back().rho[i]));
    MESSAGE("ou gap " << sup);
    CHECK(sup < 1e-4);
    auto same = evolve_fokker_planck(rho0, ev.drift, c, 1e-3, 500, 100);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(same.back().rho[i] == ev.snapshots.back().rho[i]);
    // residual between consecutive steps, once the initial transient has decayed
    auto fine = constrained_fisher_branches(rho0, GridField(g), v, 0.125, -1, c, 1e-3, 500, 499);
    MESSAGE("diffusion hj " << fine.hj_residual);
    CHECK(fine.hj_residual < 1e-3);
    CHECK_THROWS_AS(constrained_fisher_branches(rho0, GridField(g), v, 0.125, 1, c, 1e-3, 10), BranchError);
    CHECK_THROWS_AS(constrained_fisher_branches(rho0, GridField(g), v, 0.2, -1, c, 1e-3, 10), BranchError);
}

TEST_CASE("classical branch") {
    PhysicalConstants c;
    SUBCASE("free drift") {
        Grid g(-10.0, 10.0, 2001);
        const double v0 = 0.7;
        auto rho0 = GridPdf::gaussian(g, 0.0, 1.0);
        auto s0 = GridField::from_function(g, [&](double x) { return c.mass() * v0 * x; });
        auto ev = constrained_fisher_branches(rho0, s0, GridField(g), 0.0, 1, c, 1e-2, 200, 200);
        CHECK(ev.branch == FisherBranch::classical);
        const auto& last = ev.snapshots.back();
        CHECK(std::abs(last.time - 2.0) < 1e-12);
        CHECK(std::abs(last.rho.mean() - v0 * 2.0) < 1e-3);
        CHECK(std::abs(last.rho.mass() - 1.0) < 1e-3);
        CHECK(ev.hj_residual < 1e-6);
    }
    SUBCASE("harmonic ensemble") {
        Grid g(-6.0, 6.0, 2401);
        auto v = GridField::from_function(g, [](double x) { return 0.5 * x * x; });
        const double sigma = 0.5;
        auto rho0 = GridPdf::gaussian(g, 1.0, sigma);
        auto snaps = evolve_classical(rho0, GridField(g), v, c, 1e-3, 1000, 250);
        for (const auto& s : snaps) {
            const double ct = std::cos(s.time);
            CHECK(std::abs(s.rho.mean() - ct) < 1e-3);
            CHECK(std::abs(std::sqrt(s.rho.variance()) - sigma * std::abs(ct)) < 1e-3);
        }
        CHECK_THROWS_AS(evolve_classical(rho0, GridField(g), v, c, 1e-3, 1700, 100), DivergenceError);
    }
}
