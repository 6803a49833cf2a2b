#pragma once

#include <span>
#include <utility>
#include <vector>

#include "epduct/gas_model.hpp"

namespace epduct {

struct BackgroundParams {
    GasLaw gas;
    double b0 = 0.5;   // fixed background ion density
    double u0 = 2.0;   // entrance velocity, must exceed sonic speed
    double e0 = 0.0;   // entrance field strength
    double delta = -1.0;  // supersonic margin; < 0 selects 0.05 * u_s
    double length_request = 1.0;
    double step = 1e-3;  // RK4 step

    double resolved_delta() const {
        return delta >= 0.0 ? delta : 0.05 * gas.sonic_speed();
    }
    void validate() const;
};

enum class OrbitClass { Periodic, FiniteL1 };

/// Sampled 1D profiles of the supersonic background flow, plus the lifted
/// potentials phi0 and Phi0 and the conserved-quantity drift.
struct BackgroundSolution {
    GasLaw gas;
    double b0 = 0.0;
    std::vector<double> x1;
    std::vector<double> u, e, rho;      // u(x1), E(x1), J0/u
    std::vector<double> du, de;         // ODE right-hand sides at the nodes
    std::vector<double> phi0, cap_phi0; // phi-bar, Phi-bar
    double l1_detected = 0.0;   // min(length_request, sonic-stop location)
    bool truncated = false;     // hit the sonic margin before length_request
    double invariant_drift = 0.0;
    double energy0 = 0.0;       // E0^2/2 - H(u0)

    int n() const { return int(x1.size()); }
    double length() const { return x1.empty() ? 0.0 : x1.back(); }
};

/// Right-hand side of the 1D system: du = u^g E / (u^{g+1} - g J0^{g-1}),
/// de = J0/u - b0. Throws SonicError at the sonic denominator.
std::pair<double, double> ode_rhs(const BackgroundParams& p, double u, double e);

/// H(u) = int_{u_s}^{u} (b0/t^{g+1}) (t^{g+1} - u_s^{g+1}) (J0/b0 - t) dt,
/// adaptive Simpson. H(u_s) = 0.
double h_potential(const BackgroundParams& p, double u, double abs_tol = 1e-13);

/// Periodic iff E0^2/2 - H(u0) < 0.
OrbitClass classify_orbit(const BackgroundParams& p);

/// RK4 march from (u0, E0) with per-step sonic-margin event detection
/// (bisection-refined stop). Also integrates phi-bar' = u and Phi-bar' = E
/// with the anchor Phi-bar(0) = u0^2/2 + i(J0/u0).
BackgroundSolution integrate(const BackgroundParams& p);

/// Same march, but sampled exactly at the given ascending x1 nodes
/// (sub-steps of at most p.step inside each interval). The last node must
/// not exceed the admissible length.
BackgroundSolution integrate_at(const BackgroundParams& p, std::span<const double> nodes);

}  // namespace epduct
