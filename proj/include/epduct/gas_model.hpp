#pragma once

#include "epduct/common.hpp"

namespace epduct {

/// Polytropic (gamma > 1) or isothermal (gamma = 1) gas with momentum
/// constant J0. Houses the sonic reference state and all algebraic closures
/// of the potential-flow reduction.
struct GasLaw {
    double gamma = 1.0;
    double j0 = 1.0;

    GasLaw() = default;
    GasLaw(double gamma_, double j0_);

    bool isothermal() const { return gamma == 1.0; }
    double sonic_density() const;  // (J0^2/gamma)^(1/(gamma+1))
    double sonic_speed() const;    // J0 / sonic_density
};

enum class Regime { Supersonic, Subsonic, Sonic };

/// i(rho): gamma (rho^{gamma-1}-1)/(gamma-1), or ln(rho) for gamma = 1.
double enthalpy(const GasLaw& gas, double rho);

/// rho~(z, q) from the Bernoulli relation; throws VacuumError if the
/// argument of the power is non-positive (gamma > 1).
double density(const GasLaw& gas, double z, const Vec3& q);

/// c~^2 = gamma rho~^{gamma-1}. Identically 1 for gamma = 1.
double sound_speed_sq(const GasLaw& gas, double z, const Vec3& q);

/// A_ij = (c^2 delta_ij - q_i q_j) / (c^2 - q1^2). Symmetric, A_11 == 1.
Mat3 coeff_A(const GasLaw& gas, double z, const Vec3& q);

/// B = (p . q) / (c^2 - q1^2).
double coeff_B(const GasLaw& gas, double z, const Vec3& p, const Vec3& q);

/// Supersonic iff |q|^2 > c~^2, with a relative tolerance band around the
/// sonic threshold.
Regime regime(const GasLaw& gas, double z, const Vec3& q, double sonic_band = 1e-12);

struct DensityPartials {
    double d_z;   // d rho~ / d z      = rho~^{2-gamma} / gamma
    double d_q1;  // d rho~ / d q1     = -q1 rho~^{2-gamma} / gamma
};
DensityPartials density_partials(const GasLaw& gas, double z, const Vec3& q);

/// Partial derivatives of B used to freeze the linearized coefficients:
/// (d_q1, d_p1, d_z) B.
struct BPartials {
    double d_q1;
    double d_p1;
    double d_z;
};
BPartials b_partials(const GasLaw& gas, double z, const Vec3& p, const Vec3& q);

namespace detail {
/// Denominator c~^2 - q1^2; throws SonicError when within threshold of zero.
double sonic_denominator(const GasLaw& gas, double z, const Vec3& q);
}  // namespace detail

}  // namespace epduct
