#include "qplab/kernels.hpp"

#include <array>
#include <cmath>

namespace qplab::kernels {

namespace {

constexpr double kPi = M_PI;
constexpr complex kI{0.0, 1.0};

void require_positive_time(double t) {
    if (!(t > 0.0)) throw DomainError("kernel time must be positive");
}

}  // namespace

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::heat: return "heat";
        case Kind::mehler: return "mehler";
        case Kind::ou_transition: return "ou_transition";
        case Kind::free_schrodinger: return "free_schrodinger";
        case Kind::oscillator_schrodinger: return "oscillator_schrodinger";
    }
    return "unknown";
}

Kind kind_from_name(const std::string& name) {
    for (Kind k : {Kind::heat, Kind::mehler, Kind::ou_transition, Kind::free_schrodinger,
                   Kind::oscillator_schrodinger}) {
        if (name == kind_name(k)) return k;
    }
    throw DomainError("unknown kernel kind '" + name + "'");
}

double heat_kernel(double y, double x, double t) {
    require_positive_time(t);
    const double d = y - x;
    return std::exp(-d * d / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
}

double heat_kernel(double y, double x, double t, double diffusion) {
    if (!(diffusion > 0.0)) throw DomainError("diffusion constant must be positive");
    return heat_kernel(y, x, diffusion * t);
}

complex heat_kernel_complex(double y, double x, complex tau) {
    if (tau == 0.0 || tau.real() < 0.0) throw DomainError("complex time must satisfy Re tau >= 0, tau != 0");
    const double d = y - x;
    return std::exp(-d * d / (4.0 * tau)) / std::sqrt(4.0 * kPi * tau);
}

double mehler_kernel(double y, double x, double t) {
    require_positive_time(t);
    const double sh = std::sinh(t);
    const double ch = std::cosh(t);
    const double expo = -((x * x + y * y) * ch - 2.0 * x * y) / (2.0 * sh);
    return std::exp(0.5 * t + expo) / std::sqrt(2.0 * kPi * sh);
}

double mehler_kernel_exponential_form(double y, double x, double t) {
    require_positive_time(t);
    const double one_minus = -std::expm1(-2.0 * t);
    const double d = x * std::exp(-t) - y;
    return std::exp(-0.5 * (x * x - y * y) - d * d / one_minus) / std::sqrt(kPi * one_minus);
}

complex mehler_kernel_complex(double y, double x, complex tau) {
    if (tau == 0.0 || tau.real() < 0.0) throw DomainError("complex time must satisfy Re tau >= 0, tau != 0");
    const complex sh = std::sinh(tau);
    const complex ch = std::cosh(tau);
    const complex expo = -((x * x + y * y) * ch - 2.0 * x * y) / (2.0 * sh);
    return std::exp(0.5 * tau + expo) / std::sqrt(2.0 * kPi * sh);
}

double ou_stationary_density(double x) { return std::exp(-x * x) / std::sqrt(kPi); }

double ou_transition(double y, double x, double t) {
    // density in the endpoint y: k(y, x, t) rho_*^{1/2}(y) / rho_*^{1/2}(x)
    return mehler_kernel_exponential_form(y, x, t) * std::exp(0.5 * (x * x - y * y));
}

double ou_transition_gaussian(double y, double x, double t) {
    require_positive_time(t);
    const double var = -0.5 * std::expm1(-2.0 * t);
    const double d = y - x * std::exp(-t);
    return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * kPi * var);
}

double ou_covariance_closed_form(double t1, double t2) {
    if (t1 < 0.0 || t2 < 0.0) throw DomainError("correlation times must be nonnegative");
    return 0.5 * std::exp(-std::abs(t2 - t1));
}

double ou_covariance(double t1, double t2, const Grid& grid) {
    if (t1 < 0.0 || t2 < 0.0) throw DomainError("correlation times must be nonnegative");
    if (t2 < t1) throw DomainError("ou_covariance expects t1 <= t2");
    const double lag = t2 - t1;
    const std::size_t n = grid.size();
    std::vector<double> outer(n);
    if (lag == 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            const double x = grid.x(i);
            outer[i] = ou_stationary_density(x) * x * x;
        }
        return quadrature(grid, outer);
    }
    const double spread = std::sqrt(-0.5 * std::expm1(-2.0 * lag));
    constexpr std::size_t kInner = 401;
    for (std::size_t i = 0; i < n; ++i) {
        const double xp = grid.x(i);
        const double centre = xp * std::exp(-lag);
        // inner integral of x p(x, xp, lag) over +-12 standard deviations
        const Grid local(centre - 12.0 * spread, centre + 12.0 * spread, kInner);
        std::vector<double> inner(kInner);
        for (std::size_t j = 0; j < kInner; ++j) {
            const double x = local.x(j);
            inner[j] = x * ou_transition(x, xp, lag);
        }
        outer[i] = ou_stationary_density(xp) * xp * quadrature(local, inner);
    }
    return quadrature(grid, outer);
}

double ou_covariance(double t1, double t2) { return ou_covariance(t1, t2, Grid(-9.0, 9.0, 1801)); }

complex free_propagator(double y, double x, double t) {
    if (t == 0.0) throw SingularityError("free propagator is singular at t = 0");
    const double d = y - x;
    return std::exp(kI * (d * d / (4.0 * t))) / std::sqrt(4.0 * kPi * kI * t);
}

complex oscillator_propagator(double y, double x, double t) {
    const double s = std::sin(t);
    if (std::abs(s) < 1e-12) {
        throw SingularityError("oscillator propagator refused at caustic time (sin t = 0)");
    }
    const double c = std::cos(t);
    const complex phase = kI * (((x * x + y * y) * c - 2.0 * x * y) / (2.0 * s));
    return std::exp(kI * (0.5 * t) + phase) / std::sqrt(2.0 * kPi * kI * s);
}

complex schrodinger_propagator(Propagator kind, double y, double x, double t) {
    return kind == Propagator::free ? free_propagator(y, x, t) : oscillator_propagator(y, x, t);
}

double wick_rotation_gap(Propagator kind, double y, double x, double t) {
    const complex tau = kI * t;
    if (kind == Propagator::free) return std::abs(free_propagator(y, x, t) - heat_kernel_complex(y, x, tau));
    return std::abs(oscillator_propagator(y, x, t) - mehler_kernel_complex(y, x, tau));
}

complex free_propagator_composition(double y, double x, double t, double s) {
    if (!(t > 0.0) || !(s > 0.0)) throw DomainError("composition expects positive times");
    const double a = 0.25 / t + 0.25 / s;
    const double centre = (y * s + x * t) / (t + s);
    const complex pref = 1.0 / (std::sqrt(4.0 * kPi * kI * t) * std::sqrt(4.0 * kPi * kI * s));

    constexpr std::size_t kLevels = 6;
    std::array<complex, kLevels> table{};
    double eps = 0.1 * a;
    for (std::size_t level = 0; level < kLevels; ++level, eps *= 0.5) {
        const double half_width = std::sqrt(42.0 / eps);
        const double h = 0.25 / (2.0 * a * half_width);
        const auto n = static_cast<std::size_t>(std::ceil(2.0 * half_width / h));
        const double step = 2.0 * half_width / static_cast<double>(n);
        complex acc = 0.0;
        for (std::size_t j = 0; j <= n; ++j) {
            const double z = centre - half_width + static_cast<double>(j) * step;
            const double dz = z - centre;
            const double p1 = (y - z) * (y - z) / (4.0 * t);
            const double p2 = (z - x) * (z - x) / (4.0 * s);
            const double w = (j == 0 || j == n) ? 0.5 : 1.0;
            acc += w * std::exp(complex(-eps * dz * dz, p1 + p2));
        }
        table[level] = acc * step;
    }
    // Richardson (Neville) extrapolation to eps = 0 for a ladder eps_k = eps_0 / 2^k
    for (std::size_t col = 1; col < kLevels; ++col) {
        const double factor = std::ldexp(1.0, static_cast<int>(col));
        for (std::size_t k = kLevels - 1; k >= col; --k) {
            table[k] = (factor * table[k] - table[k - 1]) / (factor - 1.0);
        }
    }
    return pref * table[kLevels - 1];
}

std::vector<complex> kernel_row(Kind kind, const Grid& grid, double x, double t) {
    std::vector<complex> row(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double y = grid.x(i);
        switch (kind) {
            case Kind::heat: row[i] = heat_kernel(y, x, t); break;
            case Kind::mehler: row[i] = mehler_kernel(y, x, t); break;
            case Kind::ou_transition: row[i] = ou_transition(y, x, t); break;
            case Kind::free_schrodinger: row[i] = free_propagator(y, x, t); break;
            case Kind::oscillator_schrodinger: row[i] = oscillator_propagator(y, x, t); break;
        }
    }
    return row;
}

}  // namespace qplab::kernels
