#include "epduct/gas_model.hpp"

#include <sstream>

namespace epduct {

GasLaw::GasLaw(double gamma_, double j0_) : gamma(gamma_), j0(j0_) {
    if (gamma < 1.0) throw ConfigError("GasLaw: gamma must be >= 1");
    if (j0 <= 0.0) throw ConfigError("GasLaw: j0 must be > 0");
}

double GasLaw::sonic_density() const {
    return std::pow(j0 * j0 / gamma, 1.0 / (gamma + 1.0));
}

double GasLaw::sonic_speed() const { return j0 / sonic_density(); }

double enthalpy(const GasLaw& gas, double rho) {
    if (rho <= 0.0) throw std::domain_error("enthalpy: rho must be > 0");
    if (gas.isothermal()) return std::log(rho);
    return gas.gamma * (std::pow(rho, gas.gamma - 1.0) - 1.0) / (gas.gamma - 1.0);
}

double density(const GasLaw& gas, double z, const Vec3& q) {
    const double s = z - 0.5 * norm_sq(q);
    if (gas.isothermal()) return std::exp(s);
    const double arg = 1.0 + (gas.gamma - 1.0) / gas.gamma * s;
    if (arg <= 0.0) {
        std::ostringstream os;
        os << "density: vacuum state, 1 + (gamma-1)/gamma (z - |q|^2/2) = " << arg;
        throw VacuumError(os.str());
    }
    return std::pow(arg, 1.0 / (gas.gamma - 1.0));
}

double sound_speed_sq(const GasLaw& gas, double z, const Vec3& q) {
    if (gas.isothermal()) {
        density(gas, z, q);  // propagate vacuum diagnostics for consistency
        return 1.0;
    }
    // gamma rho^{gamma-1} = gamma + (gamma-1)(z - |q|^2/2), linear in the
    // Bernoulli argument.
    const double c2 = gas.gamma + (gas.gamma - 1.0) * (z - 0.5 * norm_sq(q));
    if (c2 <= 0.0) throw VacuumError("sound_speed_sq: non-positive c^2");
    return c2;
}

namespace detail {
double sonic_denominator(const GasLaw& gas, double z, const Vec3& q) {
    const double c2 = sound_speed_sq(gas, z, q);
    const double den = c2 - q[0] * q[0];
    if (std::abs(den) < 1e-10 * std::max(1.0, c2)) {
        std::ostringstream os;
        os << "sonic degeneracy: |c^2 - q1^2| = " << std::abs(den) << " with c^2 = " << c2;
        throw SonicError(os.str());
    }
    return den;
}
}  // namespace detail

Mat3 coeff_A(const GasLaw& gas, double z, const Vec3& q) {
    const double c2 = sound_speed_sq(gas, z, q);
    const double den = detail::sonic_denominator(gas, z, q);
    Mat3 a{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            a[i][j] = ((i == j ? c2 : 0.0) - q[i] * q[j]) / den;
    // a[0][0] = (c2 - q1^2)/(c2 - q1^2) is exactly 1 in floating point too
    return a;
}

double coeff_B(const GasLaw& gas, double z, const Vec3& p, const Vec3& q) {
    return dot(p, q) / detail::sonic_denominator(gas, z, q);
}

Regime regime(const GasLaw& gas, double z, const Vec3& q, double sonic_band) {
    const double c2 = sound_speed_sq(gas, z, q);
    const double excess = norm_sq(q) - c2;
    if (std::abs(excess) <= sonic_band * std::max(1.0, c2)) return Regime::Sonic;
    return excess > 0.0 ? Regime::Supersonic : Regime::Subsonic;
}

DensityPartials density_partials(const GasLaw& gas, double z, const Vec3& q) {
    const double rho = density(gas, z, q);
    const double d_z = std::pow(rho, 2.0 - gas.gamma) / gas.gamma;
    return {d_z, -q[0] * d_z};
}

BPartials b_partials(const GasLaw& gas, double z, const Vec3& p, const Vec3& q) {
    const double den = detail::sonic_denominator(gas, z, q);
    const double pq = dot(p, q);
    // d c^2 / dz = gamma - 1 and d c^2 / dq1 = -(gamma-1) q1, both exact
    // consequences of c^2 being affine in the Bernoulli argument.
    const double dc2_dz = gas.gamma - 1.0;
    const double dden_dq1 = -dc2_dz * q[0] - 2.0 * q[0];
    BPartials out;
    out.d_p1 = q[0] / den;
    out.d_z = -pq * dc2_dz / (den * den);
    out.d_q1 = p[0] / den - pq * dden_dq1 / (den * den);
    return out;
}

}  // namespace epduct
