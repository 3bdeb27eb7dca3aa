#include "qplab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qplab {

Grid::Grid(double x_min, double x_max, std::size_t n_points)
    : x_min_(x_min), x_max_(x_max), n_(n_points), h_(0.0) {
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max)) {
        throw DomainError("grid requires finite x_min < x_max");
    }
    if (n_points < 8) {
        throw SizeError("grid requires at least 8 points, got " + std::to_string(n_points));
    }
    h_ = (x_max - x_min) / static_cast<double>(n_points - 1);
}

std::vector<double> Grid::nodes() const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = x(i);
    return out;
}

std::size_t Grid::cell_index(double x) const noexcept {
    const double s = (x - x_min_) / h_;
    if (!(s > 0.0)) return 0;
    const auto i = static_cast<std::size_t>(s);
    return std::min(i, n_ - 2);
}

GridField::GridField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw SizeError("field size does not match grid");
}

GridField::GridField(const Grid& g, std::vector<double> v, std::vector<bool> m)
    : grid(g), values(std::move(v)), masked(std::move(m)) {
    if (values.size() != grid.size()) throw SizeError("field size does not match grid");
    if (!masked.empty() && masked.size() != grid.size()) throw SizeError("mask size does not match grid");
}

GridField GridField::from_function(const Grid& g, const std::function<double(double)>& f) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = f(g.x(i));
    return GridField(g, std::move(v));
}

std::size_t GridField::masked_count() const noexcept {
    return static_cast<std::size_t>(std::count(masked.begin(), masked.end(), true));
}

double GridField::max_abs(std::size_t first, std::size_t last) const {
    last = std::min(last, values.size());
    double m = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        if (!is_masked(i)) m = std::max(m, std::abs(values[i]));
    }
    return m;
}

GridPdf::GridPdf(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw SizeError("density size does not match grid");
    for (double v : values_) {
        if (!std::isfinite(v) || v < 0.0) throw DomainError("density values must be finite and nonnegative");
    }
}

GridPdf GridPdf::from_function(const Grid& g, const std::function<double(double)>& f) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = std::max(0.0, f(g.x(i)));
    return GridPdf(g, std::move(v));
}

GridPdf GridPdf::gaussian(const Grid& g, double mean, double sigma) {
    if (!(sigma > 0.0)) throw DomainError("gaussian width must be positive");
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
    return from_function(g, [&](double x) {
        const double z = (x - mean) / sigma;
        return norm * std::exp(-0.5 * z * z);
    });
}

double GridPdf::mass() const { return quadrature(grid_, values_); }

double GridPdf::max_value() const noexcept {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

GridPdf GridPdf::normalized() const {
    const double m = mass();
    if (!(m > 0.0)) throw DegenerateDensityError("density has zero mass");
    std::vector<double> v(values_);
    for (double& x : v) x /= m;
    return GridPdf(grid_, std::move(v));
}

void GridPdf::require_normalized(double tolerance) const {
    const double m = mass();
    if (!(std::abs(m - 1.0) <= tolerance)) {
        throw NormalizationError("density is not normalized (mass " + std::to_string(m) + ")");
    }
}

std::vector<bool> GridPdf::mask() const {
    const double peak = max_value();
    if (!(peak > 0.0)) throw DegenerateDensityError("density vanishes identically");
    std::vector<bool> m(values_.size());
    const double cut = kMaskThreshold * peak;
    for (std::size_t i = 0; i < values_.size(); ++i) m[i] = values_[i] < cut;
    return m;
}

double GridPdf::mean() const {
    std::vector<double> xr(values_.size());
    for (std::size_t i = 0; i < xr.size(); ++i) xr[i] = grid_.x(i) * values_[i];
    return quadrature(grid_, xr) / mass();
}

double GridPdf::variance() const {
    const double mu = mean();
    std::vector<double> f(values_.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = grid_.x(i) - mu;
        f[i] = d * d * values_[i];
    }
    return quadrature(grid_, f) / mass();
}

GridField GridPdf::as_field() const { return GridField(grid_, values_); }

std::vector<double> gradient(const Grid& g, std::span<const double> f) {
    const std::size_t n = f.size();
    if (n < 3) throw SizeError("gradient requires at least 3 nodes");
    if (n != g.size()) throw SizeError("field size does not match grid");
    const double h = g.spacing();
    std::vector<double> out(n);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    return out;
}

GridField gradient(const GridField& f) {
    return GridField(f.grid, gradient(f.grid, f.values), f.masked);
}

std::vector<double> laplacian(const Grid& g, std::span<const double> f) {
    const std::size_t n = f.size();
    if (n < 3) throw SizeError("laplacian requires at least 3 nodes");
    if (n != g.size()) throw SizeError("field size does not match grid");
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    std::vector<double> out(n);
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * inv_h2;
    out[0] = out[1];
    out[n - 1] = out[n - 2];
    return out;
}

GridField laplacian(const GridField& f) {
    return GridField(f.grid, laplacian(f.grid, f.values), f.masked);
}

double quadrature(const Grid& g, std::span<const double> f) {
    if (f.size() != g.size()) throw SizeError("field size does not match grid");
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * g.spacing();
}

double quadrature(const GridField& f) {
    if (!f.has_mask()) return quadrature(f.grid, f.values);
    const std::size_t n = f.size();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (f.is_masked(i)) continue;
        const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        s += w * f.values[i];
    }
    return s * f.grid.spacing();
}

std::vector<double> cumulative_quadrature(const Grid& g, std::span<const double> f, std::size_t anchor) {
    const std::size_t n = f.size();
    if (n != g.size()) throw SizeError("field size does not match grid");
    if (anchor >= n) throw DomainError("anchor outside grid");
    const double h = g.spacing();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = anchor + 1; i < n; ++i) out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    for (std::size_t i = anchor; i-- > 0;) out[i] = out[i + 1] - 0.5 * h * (f[i] + f[i + 1]);
    return out;
}

double interpolate(const Grid& g, std::span<const double> f, double x) {
    if (x <= g.x_min()) return f.front();
    if (x >= g.x_max()) return f.back();
    const std::size_t i = g.cell_index(x);
    const double s = (x - g.x(i)) / g.spacing();
    return (1.0 - s) * f[i] + s * f[i + 1];
}

double integrate_interval(const Grid& g, std::span<const double> f, double a, double b) {
    if (f.size() != g.size()) throw SizeError("field size does not match grid");
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    a = std::clamp(a, g.x_min(), g.x_max());
    b = std::clamp(b, g.x_min(), g.x_max());
    if (a == b) return 0.0;
    const std::size_t ia = g.cell_index(a);
    const std::size_t ib = g.cell_index(b);
    const double fa = interpolate(g, f, a);
    const double fb = interpolate(g, f, b);
    if (ia == ib) return sign * 0.5 * (fa + fb) * (b - a);
    double s = 0.5 * (fa + f[ia + 1]) * (g.x(ia + 1) - a);
    for (std::size_t i = ia + 1; i < ib; ++i) s += 0.5 * (f[i] + f[i + 1]) * g.spacing();
    s += 0.5 * (f[ib] + fb) * (b - g.x(ib));
    return sign * s;
}

GridField log_density_gradient(const GridPdf& rho) {
    const auto mask = rho.mask();
    // differences of ln rho rather than grad(rho)/rho: same O(h^2) order, but
    // exact for gaussians and free of the x^3 h^2 growth in the tails
    std::vector<double> logs(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) logs[i] = std::log(std::max(rho[i], kDensityFloor));
    auto out = gradient(rho.grid(), logs);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (mask[i]) out[i] = 0.0;
    }
    return GridField(rho.grid(), std::move(out), mask);
}

GridField log_density_laplacian(const GridPdf& rho) {
    const auto mask = rho.mask();
    std::vector<double> logs(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) logs[i] = std::log(std::max(rho[i], kDensityFloor));
    auto lap = laplacian(rho.grid(), logs);
    for (std::size_t i = 0; i < lap.size(); ++i) {
        if (mask[i]) lap[i] = 0.0;
    }
    return GridField(rho.grid(), std::move(lap), mask);
}

double boundary_band_mass(const GridPdf& rho) {
    const std::size_t n = rho.size();
    const std::size_t band = std::min(std::max<std::size_t>(10, n / 100), n / 2);
    double s = 0.0;
    for (std::size_t i = 0; i < band; ++i) s += rho[i] + rho[n - 1 - i];
    return s * rho.grid().spacing();
}

std::vector<bool> merge_masks(const std::vector<bool>& a, const std::vector<bool>& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    if (a.size() != b.size()) throw SizeError("mask sizes differ");
    std::vector<bool> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] || b[i];
    return out;
}

std::vector<bool> density_core_mask(const GridPdf& rho, double relative) {
    const double peak = rho.max_value();
    if (!(peak > 0.0)) throw DegenerateDensityError("density vanishes identically");
    std::vector<bool> m(rho.size());
    for (std::size_t i = 0; i < rho.size(); ++i) m[i] = rho[i] < relative * peak;
    return m;
}

}  // namespace qplab
