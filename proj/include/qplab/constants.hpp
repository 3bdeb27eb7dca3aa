#pragma once

#include "qplab/errors.hpp"

namespace qplab {

// Mass, diffusion coefficient and friction. The action unit is not an
// independent parameter: hbar = 2 m D, and k_B T = m D beta.
class PhysicalConstants {
public:
    PhysicalConstants() = default;
    PhysicalConstants(double mass, double diffusion, double friction = 1.0)
        : mass_(mass), diffusion_(diffusion), friction_(friction) {
        if (!(mass > 0.0)) throw DomainError("mass must be positive");
        if (!(diffusion > 0.0)) throw DomainError("diffusion constant must be positive");
        if (!(friction > 0.0)) throw DomainError("friction must be positive");
    }

    // Constants for a given hbar at fixed mass, D = hbar / 2m.
    static PhysicalConstants from_hbar(double mass, double hbar, double friction = 1.0) {
        return PhysicalConstants(mass, hbar / (2.0 * mass), friction);
    }

    double mass() const noexcept { return mass_; }
    double diffusion() const noexcept { return diffusion_; }
    double friction() const noexcept { return friction_; }
    double hbar() const noexcept { return 2.0 * mass_ * diffusion_; }
    double kbt() const noexcept { return mass_ * diffusion_ * friction_; }

    // Coefficient hbar^2 / 2m = 2 m D^2 in front of the quantum potential.
    double quantum_coefficient() const noexcept { return 2.0 * mass_ * diffusion_ * diffusion_; }

    bool operator==(const PhysicalConstants&) const = default;

private:
    double mass_ = 1.0;
    double diffusion_ = 0.5;
    double friction_ = 1.0;
};

}  // namespace qplab
