#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qplab/errors.hpp"

namespace qplab {

// Densities below this value are clamped before division or logarithm.
inline constexpr double kDensityFloor = 1e-30;
// Nodes with rho < kMaskThreshold * max(rho) carry no log-derivative data.
inline constexpr double kMaskThreshold = 1e-12;

// Uniform grid on [x_min, x_max]; node i sits at x_min + i*h.
class Grid {
public:
    Grid(double x_min, double x_max, std::size_t n_points);

    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    std::size_t size() const noexcept { return n_; }
    double spacing() const noexcept { return h_; }
    double length() const noexcept { return x_max_ - x_min_; }
    double x(std::size_t i) const noexcept { return x_min_ + static_cast<double>(i) * h_; }
    std::vector<double> nodes() const;

    // Index of the cell [x_i, x_{i+1}] containing x, clamped to the grid.
    std::size_t cell_index(double x) const noexcept;

    bool operator==(const Grid&) const = default;

private:
    double x_min_;
    double x_max_;
    std::size_t n_;
    double h_;
};

// Real samples on a grid. `masked` is either empty (every node valid) or
// holds one flag per node; masked nodes carry no meaningful value and are
// skipped by quadrature.
struct GridField {
    Grid grid;
    std::vector<double> values;
    std::vector<bool> masked;

    explicit GridField(const Grid& g) : grid(g), values(g.size(), 0.0) {}
    GridField(const Grid& g, std::vector<double> v);
    GridField(const Grid& g, std::vector<double> v, std::vector<bool> m);

    static GridField from_function(const Grid& g, const std::function<double(double)>& f);

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const noexcept { return values[i]; }
    double& operator[](std::size_t i) noexcept { return values[i]; }
    bool is_masked(std::size_t i) const noexcept { return !masked.empty() && masked[i]; }
    bool has_mask() const noexcept { return !masked.empty(); }
    std::size_t masked_count() const noexcept;

    // Max |value| over unmasked nodes in [first, last).
    double max_abs(std::size_t first = 0, std::size_t last = static_cast<std::size_t>(-1)) const;
};

// Nonnegative density on a grid.
class GridPdf {
public:
    GridPdf(const Grid& grid, std::vector<double> values);

    static GridPdf from_function(const Grid& g, const std::function<double(double)>& f);
    static GridPdf gaussian(const Grid& g, double mean, double sigma);

    const Grid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    double mass() const;
    double max_value() const noexcept;
    // Rescaled to unit trapezoid mass; throws DegenerateDensityError on zero mass.
    GridPdf normalized() const;
    // Throws NormalizationError when |mass - 1| exceeds `tolerance`.
    void require_normalized(double tolerance = 1e-3) const;

    // rho < kMaskThreshold * max(rho); throws DegenerateDensityError for rho == 0.
    std::vector<bool> mask() const;

    double mean() const;
    double variance() const;
    GridField as_field() const;

private:
    Grid grid_;
    std::vector<double> values_;
};

// Second-order central differences, one-sided second order at both ends.
GridField gradient(const GridField& f);
std::vector<double> gradient(const Grid& g, std::span<const double> f);

// Three-point second difference; the boundary rows copy their inner neighbour.
GridField laplacian(const GridField& f);
std::vector<double> laplacian(const Grid& g, std::span<const double> f);

// Trapezoid rule over all unmasked nodes.
double quadrature(const GridField& f);
double quadrature(const Grid& g, std::span<const double> f);

// Running trapezoid integral from node `anchor` (zero there) in both directions.
std::vector<double> cumulative_quadrature(const Grid& g, std::span<const double> f,
                                          std::size_t anchor = 0);

// Trapezoid integral over [a, b] with linear interpolation in partial cells.
double integrate_interval(const Grid& g, std::span<const double> f, double a, double b);

// Piecewise-linear interpolation, clamped outside the grid.
double interpolate(const Grid& g, std::span<const double> f, double x);

// grad ln max(rho, floor) with tail nodes masked; all-zero rho throws.
GridField log_density_gradient(const GridPdf& rho);

// laplacian(ln max(rho, floor)) with the same mask.
GridField log_density_laplacian(const GridPdf& rho);

// Mass within the outermost max(10, n/100) nodes on either side; the
// evolvers treat more than 1e-6 there as the box being too small.
double boundary_band_mass(const GridPdf& rho);

// Union of masks (empty masks count as all-valid).
std::vector<bool> merge_masks(const std::vector<bool>& a, const std::vector<bool>& b);

// Mask flagging nodes of `rho` below `relative * max(rho)`.
std::vector<bool> density_core_mask(const GridPdf& rho, double relative);

}  // namespace qplab
