#pragma once

#include <span>
#include <vector>

#include "tridiagonal.hpp"

namespace qplab::detail {

// Steps dy/dt = A y for a tridiagonal A. Crank-Nicolson and the backward-Euler
// half steps of the Rannacher start share the left-hand matrix I - (dt/2) A,
// so one factorization serves both.
class LinearStepper {
public:
    LinearStepper(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper, double dt)
        : lower_(std::move(lower)), diag_(std::move(diag)), upper_(std::move(upper)),
          solver_(scaled(lower_, -0.5 * dt), shifted(diag_, -0.5 * dt), scaled(upper_, -0.5 * dt)), dt_(dt) {}

    void crank_nicolson(std::span<double> y) const {
        const std::size_t n = y.size();
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            double ay = diag_[i] * y[i];
            if (i > 0) ay += lower_[i] * y[i - 1];
            if (i + 1 < n) ay += upper_[i] * y[i + 1];
            rhs[i] = y[i] + 0.5 * dt_ * ay;
        }
        solver_.solve_in_place(rhs);
        std::copy(rhs.begin(), rhs.end(), y.begin());
    }

    // one full step made of two backward-Euler half steps
    void damped(std::span<double> y) const {
        solver_.solve_in_place(y);
        solver_.solve_in_place(y);
    }

    // Rannacher start: the first `kStartup` steps are damped
    void step(std::span<double> y, std::size_t index) const {
        if (index < kStartup) {
            damped(y);
        } else {
            crank_nicolson(y);
        }
    }

    static constexpr std::size_t kStartup = 2;

private:
    static std::vector<double> scaled(const std::vector<double>& a, double s) {
        std::vector<double> out(a);
        for (double& v : out) v *= s;
        return out;
    }
    static std::vector<double> shifted(const std::vector<double>& a, double s) {
        std::vector<double> out(a);
        for (double& v : out) v = 1.0 + s * v;
        return out;
    }

    std::vector<double> lower_, diag_, upper_;
    TridiagonalSolver<double> solver_;
    double dt_;
};

}  // namespace qplab::detail
