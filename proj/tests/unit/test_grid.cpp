#include <cmath>

#include "doctest.h"
#include "qplab/grid.hpp"

using namespace qplab;

TEST_CASE("grid construction") {
    Grid g(-1.0, 1.0, 101);
    CHECK(g.spacing() == doctest::Approx(0.02));
    CHECK(g.x(0) == -1.0);
    CHECK(g.x(50) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK_THROWS_AS(Grid(0.0, 1.0, 7), SizeError);
    CHECK_THROWS_AS(Grid(1.0, 0.0, 10), DomainError);
}

TEST_CASE("gradient") {
    Grid g(-1.0, 1.0, 101);
    auto c = gradient(GridField::from_function(g, [](double) { return 3.0; }));
    for (double v : c.values) CHECK(std::abs(v) < 1e-12);
    auto lin = gradient(GridField::from_function(g, [](double x) { return x; }));
    for (double v : lin.values) CHECK(std::abs(v - 1.0) < 1e-12);
    auto quad = gradient(GridField::from_function(g, [](double x) { return x * x; }));
    for (std::size_t i = 1; i + 1 < g.size(); ++i) CHECK(std::abs(quad[i] - 2.0 * g.x(i)) < 1e-10);
    CHECK(std::abs(quad[0] + 2.0) < 1e-10);
}

TEST_CASE("laplacian") {
    Grid g(-1.0, 1.0, 101);
    auto quad = laplacian(GridField::from_function(g, [](double x) { return x * x; }));
    for (std::size_t i = 1; i + 1 < g.size(); ++i) CHECK(std::abs(quad[i] - 2.0) < 1e-9);
    Grid gs(-M_PI, M_PI, 401);
    auto s = laplacian(GridField::from_function(gs, [](double x) { return std::sin(x); }));
    double err = 0.0;
    for (std::size_t i = 1; i + 1 < gs.size(); ++i) err = std::max(err, std::abs(s[i] + std::sin(gs.x(i))));
    CHECK(err < 1e-4);
}

TEST_CASE("linearity of the stencils") {
    Grid g(-2.0, 3.0, 77);
    auto f = GridField::from_function(g, [](double x) { return std::cos(3 * x); });
    auto h = GridField::from_function(g, [](double x) { return std::exp(-x * x); });
    GridField comb(g);
    for (std::size_t i = 0; i < g.size(); ++i) comb[i] = 2.5 * f[i] - 0.75 * h[i];
    auto gc = gradient(comb), gf = gradient(f), gh = gradient(h);
    auto lc = laplacian(comb), lf = laplacian(f), lh = laplacian(h);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(std::abs(gc[i] - (2.5 * gf[i] - 0.75 * gh[i])) < 1e-11);
        CHECK(std::abs(lc[i] - (2.5 * lf[i] - 0.75 * lh[i])) < 1e-8);
    }
}

TEST_CASE("quadrature") {
    Grid g(0.0, 1.0, 11);
    CHECK(quadrature(GridField::from_function(g, [](double) { return 1.0; })) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(quadrature(GridField::from_function(g, [](double x) { return x; })) == doctest::Approx(0.5).epsilon(1e-15));
    Grid w(-8.0, 8.0, 1601);
    auto n = GridPdf::gaussian(w, 0.0, 1.0);
    CHECK(std::abs(n.mass() - 1.0) < 1e-10);

    Grid s(-1.0, 2.0, 301);
    auto f = GridField::from_function(s, [](double x) { return std::sin(x) * x; });
    const double expected = f[s.size() - 1] - f[0];
    CHECK(std::abs(quadrature(gradient(f)) - expected) < 1e-3);
}

TEST_CASE("interval integration and interpolation") {
    Grid g(0.0, 1.0, 101);
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = 2.0 * g.x(i);
    CHECK(integrate_interval(g, f, 0.123, 0.789) == doctest::Approx(0.789 * 0.789 - 0.123 * 0.123).epsilon(1e-12));
    CHECK(interpolate(g, f, 0.3333) == doctest::Approx(0.6666).epsilon(1e-12));
    auto cum = cumulative_quadrature(g, f, 50);
    CHECK(cum[50] == 0.0);
    CHECK(cum[100] == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(cum[0] == doctest::Approx(-0.25).epsilon(1e-12));
}

TEST_CASE("log density gradient") {
    Grid g(-6.0, 6.0, 2001);
    auto rho = GridPdf::gaussian(g, 0.0, 1.0);
    auto s = log_density_gradient(rho);
    for (std::size_t i = 1; i + 1 < g.size(); ++i) CHECK(std::abs(s[i] + g.x(i)) < 1e-6);

    std::vector<double> weighted(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) weighted[i] = rho[i] * s[i];
    CHECK(std::abs(quadrature(g, weighted)) < 1e-8);

    Grid wide(-40.0, 40.0, 801);
    auto tail = GridPdf::gaussian(wide, 0.0, 1.0);
    auto st = log_density_gradient(tail);
    const double peak = tail.max_value();
    for (std::size_t i = 0; i < wide.size(); ++i) CHECK(st.is_masked(i) == (tail[i] < kMaskThreshold * peak));
    CHECK(st.masked_count() > 0);

    CHECK_THROWS_AS(log_density_gradient(GridPdf(g, std::vector<double>(g.size(), 0.0))), DegenerateDensityError);
}

TEST_CASE("plateau has zero score") {
    Grid g(-10.0, 10.0, 2001);
    auto rho = GridPdf::from_function(g, [](double x) {
        return 0.5 * (std::tanh(4.0 * (x + 6.0)) - std::tanh(4.0 * (x - 6.0)));
    });
    auto s = log_density_gradient(rho.normalized());
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (std::abs(g.x(i)) < 2.0) CHECK(std::abs(s[i]) < 1e-9);
    }
}
