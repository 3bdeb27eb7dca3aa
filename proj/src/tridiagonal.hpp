#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qplab/errors.hpp"

namespace qplab::detail {

// Thomas algorithm for a tridiagonal system; lower[0] and upper[n-1] unused.
template <class T>
std::vector<T> solve_tridiagonal(std::span<const T> lower, std::span<const T> diag, std::span<const T> upper,
                                 std::span<const T> rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n) {
        throw SizeError("tridiagonal system has inconsistent sizes");
    }
    std::vector<T> c(n), d(n), x(n);
    T beta = diag[0];
    if (beta == T{}) throw NumericalError("singular tridiagonal system");
    c[0] = upper[0] / beta;
    d[0] = rhs[0] / beta;
    for (std::size_t i = 1; i < n; ++i) {
        beta = diag[i] - lower[i] * c[i - 1];
        if (beta == T{}) throw NumericalError("singular tridiagonal system");
        c[i] = upper[i] / beta;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / beta;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

// Constant-coefficient tridiagonal operator factored once and reused every step.
template <class T>
class TridiagonalSolver {
public:
    TridiagonalSolver(std::vector<T> lower, std::vector<T> diag, std::vector<T> upper)
        : lower_(std::move(lower)), c_(diag.size()), inv_beta_(diag.size()) {
        const std::size_t n = diag.size();
        if (lower_.size() != n || upper.size() != n) throw SizeError("tridiagonal system has inconsistent sizes");
        T beta = diag[0];
        if (beta == T{}) throw NumericalError("singular tridiagonal system");
        inv_beta_[0] = T(1) / beta;
        c_[0] = upper[0] * inv_beta_[0];
        for (std::size_t i = 1; i < n; ++i) {
            beta = diag[i] - lower_[i] * c_[i - 1];
            if (beta == T{}) throw NumericalError("singular tridiagonal system");
            inv_beta_[i] = T(1) / beta;
            c_[i] = upper[i] * inv_beta_[i];
        }
    }

    std::size_t size() const noexcept { return c_.size(); }

    void solve_in_place(std::span<T> x) const {
        const std::size_t n = c_.size();
        x[0] = x[0] * inv_beta_[0];
        for (std::size_t i = 1; i < n; ++i) x[i] = (x[i] - lower_[i] * x[i - 1]) * inv_beta_[i];
        for (std::size_t i = n - 1; i-- > 0;) x[i] = x[i] - c_[i] * x[i + 1];
    }

private:
    std::vector<T> lower_;
    std::vector<T> c_;
    std::vector<T> inv_beta_;
};

}  // namespace qplab::detail
