#include "qplab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace qplab {

namespace {

std::vector<double> root_density(const GridPdf& rho) {
    std::vector<double> r(rho.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::sqrt(rho[i]);
    return r;
}

}  // namespace

double shannon_entropy(const GridPdf& rho) {
    rho.require_normalized();
    const auto mask = rho.mask();
    std::vector<double> f(rho.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!mask[i]) f[i] = -rho[i] * std::log(rho[i]);
    }
    return quadrature(GridField(rho.grid(), std::move(f), mask));
}

double FisherRoutes::relative_gap() const {
    const double scale = std::max(std::abs(direct), std::abs(score));
    return scale > 0.0 ? std::abs(direct - score) / scale : 0.0;
}

FisherRoutes fisher_routes(const GridPdf& rho) {
    rho.require_normalized();
    const auto grad = gradient(rho.grid(), rho.values());
    std::vector<double> direct(rho.size(), 0.0);
    for (std::size_t i = 0; i < direct.size(); ++i) {
        if (rho[i] > kDensityFloor) direct[i] = grad[i] * grad[i] / rho[i];
    }
    const GridField score = log_density_gradient(rho);
    std::vector<double> sq(rho.size(), 0.0);
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = score[i] * score[i];
    FisherRoutes out;
    out.direct = quadrature(rho.grid(), direct);
    out.score = expectation(rho, GridField(rho.grid(), std::move(sq), score.masked));
    return out;
}

double fisher_information(const GridPdf& rho) {
    const FisherRoutes r = fisher_routes(rho);
    if (r.relative_gap() > kFisherRouteGuard) {
        throw NumericalError("Fisher information routes disagree (relative gap " +
                             std::to_string(r.relative_gap()) + "); density tails are under-resolved");
    }
    return r.score;
}

GridField root_density_curvature(const GridPdf& rho) {
    const auto mask = rho.mask();
    const auto root = root_density(rho);
    auto lap = laplacian(rho.grid(), root);
    for (std::size_t i = 0; i < lap.size(); ++i) {
        lap[i] = mask[i] ? 0.0 : lap[i] / std::max(root[i], std::sqrt(kDensityFloor));
    }
    return GridField(rho.grid(), std::move(lap), mask);
}

GridField quantum_potential(const GridPdf& rho, const PhysicalConstants& c) {
    GridField q = root_density_curvature(rho);
    const double coeff = -c.quantum_coefficient();
    for (double& v : q.values) v *= coeff;
    return q;
}

GridField osmotic_velocity(const GridPdf& rho, const PhysicalConstants& c) {
    GridField u = log_density_gradient(rho);
    for (double& v : u.values) v *= c.diffusion();
    return u;
}

GridField osmotic_pressure(const GridPdf& rho, const PhysicalConstants& c) {
    GridField p = log_density_laplacian(rho);
    const double d2 = c.diffusion() * c.diffusion();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] *= d2 * rho[i];
    return p;
}

GridField osmotic_pressure_identity_residual(const GridPdf& rho, const PhysicalConstants& c) {
    const GridField p = osmotic_pressure(rho, c);
    const GridField q = quantum_potential(rho, c);
    const auto gp = gradient(rho.grid(), p.values);
    const auto gq = gradient(rho.grid(), q.values);
    std::vector<double> r(rho.size(), 0.0);
    std::vector<bool> mask = p.masked;
    const std::size_t n = rho.size();
    for (std::size_t i = 0; i < n; ++i) {
        // the stencils read both neighbours, so nodes next to the mask are excluded as well
        const bool edge = (i == 0 || i + 1 == n);
        const bool near_mask = mask[i] || (i > 0 && p.is_masked(i - 1)) || (i + 1 < n && p.is_masked(i + 1));
        if (edge || near_mask) {
            mask[i] = true;
            continue;
        }
        r[i] = gp[i] + rho[i] / c.mass() * gq[i];
    }
    return GridField(rho.grid(), std::move(r), std::move(mask));
}

GridField osmotic_temperature(const GridPdf& rho, const PhysicalConstants& c) {
    GridField t = log_density_laplacian(rho);
    const double coeff = -c.mass() * c.diffusion() * c.diffusion();
    for (double& v : t.values) v *= coeff;
    return t;
}

double expectation(const GridPdf& rho, const GridField& f) {
    if (!(f.grid == rho.grid())) throw SizeError("field and density live on different grids");
    std::vector<double> w(rho.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = rho[i] * f[i];
    return quadrature(GridField(rho.grid(), std::move(w), f.masked));
}

double fourier_variance(const GridPdf& rho) {
    const Grid& g = rho.grid();
    const std::size_t n = g.size();
    const double h = g.spacing();
    const auto root = root_density(rho);

    // frequency spacing 1/(2L): zero padding the box to twice its length
    const double dp = 1.0 / (2.0 * g.length());
    const double p_max = 0.5 / h;
    const auto k_max = static_cast<long>(std::floor(p_max / dp));

    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (long k = -k_max; k <= k_max; ++k) {
        const double p = static_cast<double>(k) * dp;
        const std::complex<double> step = std::polar(1.0, -2.0 * M_PI * p * h);
        std::complex<double> phase = std::polar(1.0, -2.0 * M_PI * p * g.x_min());
        std::complex<double> acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
            acc += w * root[j] * phase;
            phase *= step;
        }
        const double a = std::norm(acc * h);
        const double wk = (k == -k_max || k == k_max) ? 0.5 : 1.0;
        m0 += wk * a;
        m1 += wk * a * p;
        m2 += wk * a * p * p;
    }
    const double mean = m1 / m0;
    return m2 / m0 - mean * mean;
}

FunctionalReport inequality_report(const GridPdf& rho, const PhysicalConstants& c) {
    FunctionalReport r;
    r.shannon = shannon_entropy(rho);
    r.fisher = fisher_information(rho);
    r.variance = rho.variance();
    r.mean_quantum_potential = expectation(rho, quantum_potential(rho, c));
    const double sf2 = fourier_variance(rho);
    r.fourier_variance = sf2;

    const double two_pi_e = 2.0 * M_PI * std::exp(1.0);
    const double entropy_power = std::exp(r.shannon) / std::sqrt(two_pi_e);
    const double sigma = std::sqrt(r.variance);
    const double sigma_f = std::sqrt(sf2);

    auto& s = r.slacks;
    s.cramer_rao = r.fisher * r.variance - 1.0;
    s.isoperimetric = r.fisher - two_pi_e * std::exp(-2.0 * r.shannon);
    s.fourier_upper = 16.0 * M_PI * M_PI * sf2 - r.fisher;
    s.entropy_upper = sigma - entropy_power;
    s.entropy_lower = entropy_power - 1.0 / (4.0 * M_PI * sigma_f);

    const double ftol = kFourierSlackTolerance * r.fisher;
    r.violation = s.cramer_rao < -kSlackTolerance || s.isoperimetric < -kSlackTolerance ||
                  s.entropy_upper < -kSlackTolerance || s.fourier_upper < -ftol ||
                  s.entropy_lower < -ftol * entropy_power;
    return r;
}

GridField pressure_term(const GridPdf& rho, Motion motion) {
    GridField p = log_density_laplacian(rho);
    const double sign = motion == Motion::brownian ? 1.0 : -1.0;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = p.is_masked(i) ? 0.0 : sign * rho[i] * p[i];
    return p;
}

double RateCheck::relative_error() const {
    return std::abs(finite_difference - identity) / std::max(std::abs(identity), 1e-300);
}

double RateCheck::alternate_relative_error() const {
    return std::abs(finite_difference - alternate) / std::max(std::abs(alternate), 1e-300);
}

namespace {

void require_same_grid(const GridPdf& a, const GridPdf& b, const GridPdf& c, const GridField& v) {
    if (!(a.grid() == c.grid()) || !(b.grid() == c.grid()) || !(v.grid == c.grid())) {
        throw SizeError("rate check inputs live on different grids");
    }
}

// integral of f over nodes valid in `mask` and away from its edge
double interior_integral(const Grid& g, const std::vector<double>& f, const std::vector<bool>& mask) {
    const std::size_t n = f.size();
    std::vector<bool> skip(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const bool near = (i > 0 && mask[i - 1]) || (i + 1 < n && mask[i + 1]);
        skip[i] = mask[i] || near || i == 0 || i + 1 == n;
    }
    return quadrature(GridField(g, f, skip));
}

}  // namespace

RateCheck entropy_rate_check(const GridPdf& before, const GridPdf& after, double span, const GridPdf& centre,
                             const GridField& v, const PhysicalConstants& c) {
    require_same_grid(before, after, centre, v);
    if (!(span > 0.0)) throw DomainError("rate check needs a positive time span");
    const Grid& g = centre.grid();
    const auto mask = merge_masks(centre.mask(), v.masked);
    const auto dv = gradient(g, v.values);
    const GridField u = osmotic_velocity(centre, c);
    std::vector<double> a(g.size()), b(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        a[i] = centre[i] * dv[i];
        b[i] = centre[i] * v[i] * u[i];
    }
    RateCheck r;
    r.finite_difference = (shannon_entropy(after) - shannon_entropy(before)) / span;
    r.identity = interior_integral(g, a, mask);
    r.alternate = -interior_integral(g, b, mask) / c.diffusion();
    return r;
}

RateCheck fisher_rate_check(const GridPdf& before, const GridPdf& after, double span, const GridPdf& centre,
                            const GridField& v, Motion motion) {
    require_same_grid(before, after, centre, v);
    if (!(span > 0.0)) throw DomainError("rate check needs a positive time span");
    const Grid& g = centre.grid();
    const auto mask = merge_masks(centre.mask(), v.masked);
    const GridField p = pressure_term(centre, motion);
    const auto dp = gradient(g, p.values);
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = v[i] * dp[i];
    const double sign = motion == Motion::brownian ? -2.0 : 2.0;
    RateCheck r;
    r.finite_difference = (fisher_information(after) - fisher_information(before)) / span;
    r.identity = sign * interior_integral(g, f, mask);
    const GridField pb = pressure_term(centre, Motion::brownian);
    const auto dpb = gradient(g, pb.values);
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = v[i] * dpb[i];
    r.alternate = -2.0 * interior_integral(g, f, mask);
    return r;
}

}  // namespace qplab
