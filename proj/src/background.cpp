#include "epduct/background.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace epduct {

void BackgroundParams::validate() const {
    if (length_request <= 0.0) throw ConfigError("background: length_request must be > 0");
    if (step <= 0.0) throw ConfigError("background: step must be > 0");
    if (b0 <= 0.0) throw ConfigError("background: b0 must be > 0");
    const double us = gas.sonic_speed();
    if (u0 <= us + resolved_delta()) {
        std::ostringstream os;
        os << "background: entrance velocity " << u0 << " is not supersonic with margin (u_s + delta = "
           << us + resolved_delta() << ")";
        throw ConfigError(os.str());
    }
}

std::pair<double, double> ode_rhs(const BackgroundParams& p, double u, double e) {
    const double g = p.gas.gamma, j0 = p.gas.j0;
    const double den = std::pow(u, g + 1.0) - g * std::pow(j0, g - 1.0);
    if (std::abs(den) < 1e-14 * std::max(1.0, std::pow(u, g + 1.0)))
        throw SonicError("ode_rhs: sonic denominator u^{gamma+1} - gamma J0^{gamma-1} vanished");
    return {std::pow(u, g) * e / den, j0 / u - p.b0};
}

double h_potential(const BackgroundParams& p, double u, double abs_tol) {
    if (u <= 0.0) throw std::domain_error("h_potential: u must be > 0");
    const double g = p.gas.gamma, j0 = p.gas.j0, b0 = p.b0;
    const double us = p.gas.sonic_speed();
    const double us_pow = std::pow(us, g + 1.0);
    auto integrand = [&](double t) {
        return b0 / std::pow(t, g + 1.0) * (std::pow(t, g + 1.0) - us_pow) * (j0 / b0 - t);
    };
    return adaptive_simpson(integrand, us, u, abs_tol);
}

OrbitClass classify_orbit(const BackgroundParams& p) {
    return 0.5 * p.e0 * p.e0 - h_potential(p, p.u0) < 0.0 ? OrbitClass::Periodic
                                                          : OrbitClass::FiniteL1;
}

namespace {

struct State {
    double u, e, phi, cphi;
};

State rk4_step(const BackgroundParams& p, const State& s, double h) {
    auto f = [&](const State& y) -> State {
        auto [du, de] = ode_rhs(p, y.u, y.e);
        return {du, de, y.u, y.e};
    };
    auto axpy = [](const State& y, double a, const State& k) -> State {
        return {y.u + a * k.u, y.e + a * k.e, y.phi + a * k.phi, y.cphi + a * k.cphi};
    };
    const State k1 = f(s);
    const State k2 = f(axpy(s, 0.5 * h, k1));
    const State k3 = f(axpy(s, 0.5 * h, k2));
    const State k4 = f(axpy(s, h, k3));
    return {s.u + h / 6.0 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u),
            s.e + h / 6.0 * (k1.e + 2 * k2.e + 2 * k3.e + k4.e),
            s.phi + h / 6.0 * (k1.phi + 2 * k2.phi + 2 * k3.phi + k4.phi),
            s.cphi + h / 6.0 * (k1.cphi + 2 * k2.cphi + 2 * k3.cphi + k4.cphi)};
}

// Margin function whose first zero defines the admissible length L1.
double margin(const BackgroundParams& p, double u) {
    return u - (p.gas.sonic_speed() + p.resolved_delta());
}

// Largest lambda in (0, 1] such that the sub-step of size lambda*h keeps the
// margin positive; assumes the full step violates it. Bisection on lambda.
double bisect_event(const BackgroundParams& p, const State& s, double h) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        bool ok = true;
        try {
            ok = margin(p, rk4_step(p, s, mid * h).u) > 0.0;
        } catch (const SonicError&) {
            ok = false;
        }
        (ok ? lo : hi) = mid;
    }
    return lo;
}

void push_node(BackgroundSolution& out, const BackgroundParams& p, double x, const State& s) {
    out.x1.push_back(x);
    out.u.push_back(s.u);
    out.e.push_back(s.e);
    out.rho.push_back(p.gas.j0 / s.u);
    auto [du, de] = ode_rhs(p, s.u, s.e);
    out.du.push_back(du);
    out.de.push_back(de);
    out.phi0.push_back(s.phi);
    out.cap_phi0.push_back(s.cphi);
}

BackgroundSolution march(const BackgroundParams& p, const std::vector<double>& nodes,
                         bool stop_at_event) {
    p.validate();
    BackgroundSolution out;
    out.gas = p.gas;
    out.b0 = p.b0;
    out.energy0 = 0.5 * p.e0 * p.e0 - h_potential(p, p.u0);

    State s{p.u0, p.e0, 0.0, 0.5 * p.u0 * p.u0 + enthalpy(p.gas, p.gas.j0 / p.u0)};
    double x = 0.0;
    push_node(out, p, x, s);
    out.l1_detected = 0.0;

    for (std::size_t ni = 1; ni < nodes.size(); ++ni) {
        const double target = nodes[ni];
        const int nsub = std::max(1, int(std::ceil((target - x) / p.step - 1e-12)));
        const double h = (target - x) / nsub;
        bool stopped = false;
        for (int k = 0; k < nsub; ++k) {
            State next;
            bool violated = false;
            try {
                next = rk4_step(p, s, h);
                violated = margin(p, next.u) <= 0.0;
            } catch (const SonicError&) {
                violated = true;
            }
            if (violated) {
                if (!stop_at_event) {
                    std::ostringstream os;
                    os << "background: sonic margin reached near x1 = " << x + h
                       << "; requested nodes extend past the admissible length";
                    throw SolverError(os.str());
                }
                const double lam = bisect_event(p, s, h);
                if (lam > 0.0) {
                    s = rk4_step(p, s, lam * h);
                    x += lam * h;
                    push_node(out, p, x, s);
                }
                stopped = true;
                break;
            }
            s = next;
            x += h;
        }
        if (stopped) {
            out.truncated = true;
            break;
        }
        x = target;  // kill accumulated roundoff
        push_node(out, p, x, s);
    }
    out.l1_detected = out.x1.back();

    double drift = 0.0;
    for (int i = 0; i < out.n(); ++i) {
        const double inv = 0.5 * out.e[i] * out.e[i] - h_potential(p, out.u[i]);
        drift = std::max(drift, std::abs(inv - out.energy0));
    }
    out.invariant_drift = drift;
    return out;
}

}  // namespace

BackgroundSolution integrate(const BackgroundParams& p) {
    const int n = std::max(2, int(std::ceil(p.length_request / p.step - 1e-12)) + 1);
    std::vector<double> nodes(n);
    for (int i = 0; i < n; ++i) nodes[i] = p.length_request * i / (n - 1);
    return march(p, nodes, /*stop_at_event=*/true);
}

BackgroundSolution integrate_at(const BackgroundParams& p, std::span<const double> nodes) {
    if (nodes.size() < 2 || nodes.front() != 0.0)
        throw ConfigError("integrate_at: nodes must start at 0 and contain at least 2 points");
    return march(p, std::vector<double>(nodes.begin(), nodes.end()), /*stop_at_event=*/false);
}

}  // namespace epduct
