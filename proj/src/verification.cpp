#include "epduct/verification.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

namespace epduct {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

double n1d(int k) { return k == 0 ? 1.0 / std::numbers::sqrt2 : 1.0; }

// analytic eta and its cross-section derivatives
struct ModeEval {
    int k, l;
    double nn, a2, a3;
    ModeEval(int k_, int l_) : k(k_), l(l_), nn(n1d(k_) * n1d(l_)), a2(k_ * kHalfPi), a3(l_ * kHalfPi) {}
    double eta(double x2, double x3) const {
        return nn * std::cos(a2 * (x2 + 1.0)) * std::cos(a3 * (x3 + 1.0));
    }
    double d2(double x2, double x3) const {
        return -nn * a2 * std::sin(a2 * (x2 + 1.0)) * std::cos(a3 * (x3 + 1.0));
    }
    double d3(double x2, double x3) const {
        return -nn * a3 * std::cos(a2 * (x2 + 1.0)) * std::sin(a3 * (x3 + 1.0));
    }
    double d23(double x2, double x3) const {
        return nn * a2 * a3 * std::sin(a2 * (x2 + 1.0)) * std::sin(a3 * (x3 + 1.0));
    }
    double d22(double x2, double x3) const { return -a2 * a2 * eta(x2, x3); }
    double d33(double x2, double x3) const { return -a3 * a3 * eta(x2, x3); }
    double omega() const { return a2 * a2 + a3 * a3; }
};

// theta = amp sin(pi x / (2L)): theta(0) = 0, gentle fourth derivative
struct PsiProfile {
    double amp, freq;
    double v(double x) const { return amp * std::sin(freq * x); }
    double d(double x) const { return amp * freq * std::cos(freq * x); }
    double dd(double x) const { return -amp * freq * freq * std::sin(freq * x); }
};

// Theta = amp cos(pi x / (2L)): Theta'(0) = 0, Theta(L) = 0
struct CapProfile {
    double amp, freq;
    double v(double x) const { return amp * std::cos(freq * x); }
    double d(double x) const { return -amp * freq * std::sin(freq * x); }
    double dd(double x) const { return -amp * freq * freq * std::cos(freq * x); }
};

struct MmsModes {
    std::vector<std::pair<ModeEval, PsiProfile>> psi;
    std::vector<std::pair<ModeEval, CapProfile>> cap;
};

MmsModes make_modes(double L, double amplitude) {
    const double f = kHalfPi / L;  // pi/(2L)
    MmsModes m;
    m.psi.push_back({ModeEval(0, 0), {0.30 * amplitude, f}});
    m.psi.push_back({ModeEval(1, 0), {0.25 * amplitude, f}});
    m.psi.push_back({ModeEval(2, 1), {0.20 * amplitude, f}});
    m.psi.push_back({ModeEval(3, 3), {0.15 * amplitude, f}});
    m.cap.push_back({ModeEval(0, 0), {0.30 * amplitude, f}});
    m.cap.push_back({ModeEval(1, 1), {0.20 * amplitude, f}});
    m.cap.push_back({ModeEval(3, 2), {0.10 * amplitude, f}});
    return m;
}

}  // namespace

MmsCase build_mms(const BackgroundSolution& bg, const BaseCoefficients& base,
                  const DuctGrid& grid, int m_max, double amplitude, double coeff_eps,
                  int threads) {
    if (m_max < 3) throw ConfigError("build_mms: the manufactured fields need m_max >= 3");
    const double L = grid.length;
    auto modes = std::make_shared<MmsModes>(make_modes(L, amplitude));

    // iterate pair perturbing the coefficients (slip-compatible)
    Field3 phi_p(grid), w_p(grid);
    if (coeff_eps > 0.0) {
        phi_p = Field3::from_fn(grid, [&](double x1, double x2, double x3) {
            return coeff_eps * std::sin(std::numbers::pi * x1 / L) *
                   std::cos(kHalfPi * (x2 + 1.0)) * std::cos(kHalfPi * (x3 + 1.0));
        });
        w_p = Field3::from_fn(grid, [&](double x1, double x2, double x3) {
            (void)x3;
            return coeff_eps * std::cos(kHalfPi * x1 / L) *
                   std::cos(2.0 * kHalfPi * (x2 + 1.0));
        });
    }
    CoefficientSet set = assemble_set(bg, base, w_p, phi_p, Field3(grid, bg.b0), "mms");

    // manufactured sources from the analytic fields and the set's own a_ij
    for (int i = 0; i < grid.n1; ++i) {
        const double x1 = grid.x1(i);
        for (int j = 0; j < grid.n2; ++j)
            for (int k = 0; k < grid.n3; ++k) {
                const double x2 = grid.x2(j), x3 = grid.x3(k);
                double p11 = 0, p22 = 0, p33 = 0, p12 = 0, p13 = 0, p23 = 0, p1 = 0;
                for (const auto& [me, pr] : modes->psi) {
                    p11 += pr.dd(x1) * me.eta(x2, x3);
                    p22 += pr.v(x1) * me.d22(x2, x3);
                    p33 += pr.v(x1) * me.d33(x2, x3);
                    p12 += pr.d(x1) * me.d2(x2, x3);
                    p13 += pr.d(x1) * me.d3(x2, x3);
                    p23 += pr.v(x1) * me.d23(x2, x3);
                    p1 += pr.d(x1) * me.eta(x2, x3);
                }
                double cv = 0, c1 = 0, clap = 0;
                for (const auto& [me, pr] : modes->cap) {
                    cv += pr.v(x1) * me.eta(x2, x3);
                    c1 += pr.d(x1) * me.eta(x2, x3);
                    clap += pr.dd(x1) * me.eta(x2, x3) - me.omega() * pr.v(x1) * me.eta(x2, x3);
                }
                const auto& a = set.a;
                set.f1(i, j, k) = p11 + a(1, 1)(i, j, k) * p22 + a(2, 2)(i, j, k) * p33 +
                                  (a(0, 1)(i, j, k) + a(1, 0)(i, j, k)) * p12 +
                                  (a(0, 2)(i, j, k) + a(2, 0)(i, j, k)) * p13 +
                                  (a(1, 2)(i, j, k) + a(2, 1)(i, j, k)) * p23 +
                                  base.a1[i] * p1 + base.b1[i] * c1 + base.b2[i] * cv;
                set.f2(i, j, k) = clap - base.h1[i] * cv - base.h2[i] * p1;
            }
    }

    MmsCase out;
    out.amplitude = amplitude;
    out.problem = LinearProblem{std::move(set),
                                Field2::from_fn(grid.n2, grid.n3,
                                                [&](double x2, double x3) {
                                                    double g = 0.0;
                                                    for (const auto& [me, pr] : modes->psi)
                                                        g += pr.d(0.0) * me.eta(x2, x3);
                                                    return g;
                                                }),
                                m_max, threads, true};
    out.psi_exact = [modes](double x1, double x2, double x3) {
        double v = 0.0;
        for (const auto& [me, pr] : modes->psi) v += pr.v(x1) * me.eta(x2, x3);
        return v;
    };
    out.cap_exact = [modes](double x1, double x2, double x3) {
        double v = 0.0;
        for (const auto& [me, pr] : modes->cap) v += pr.v(x1) * me.eta(x2, x3);
        return v;
    };
    return out;
}

MmsErrors mms_errors(const MmsCase& mms, const ModalSolution& sol) {
    const DuctGrid& g = mms.problem.coeffs.grid;
    Field3 epsi = sol.psi, ecap = sol.cap_psi;
    epsi -= Field3::from_fn(g, mms.psi_exact);
    ecap -= Field3::from_fn(g, mms.cap_exact);
    return {l2_norm(epsi), l2_norm(ecap)};
}

std::vector<ConvergenceRow> mms_convergence(const BackgroundParams& params, double L, int n2,
                                            int n3, int m_max, const std::vector<int>& n1_list,
                                            bool with_energy, int threads) {
    std::vector<ConvergenceRow> rows;
    for (const int n1 : n1_list) {
        const auto t0 = std::chrono::steady_clock::now();
        const DuctGrid grid(n1, n2, n3, L);
        const BackgroundSolution bg = integrate_at(params, grid.x1_nodes());
        const BaseCoefficients base = base_coefficients(bg);
        MmsCase mms = build_mms(bg, base, grid, m_max, 1.0, 0.0, threads);
        const ModalSolution sol = solve(mms.problem);
        ConvergenceRow row;
        row.n1 = n1;
        const MmsErrors err = mms_errors(mms, sol);
        row.err_psi = err.err_psi;
        row.err_cap = err.err_cap;
        if (with_energy) {
            const EnergyWeight w = synthesize_weight(base, L);
            if (!w.feasible)
                throw WeightInfeasibleError("mms_convergence: weight infeasible at L");
            const EnergyReport er = energy_identity(sol, mms.problem, w);
            row.energy_gap = er.identity_gap;
            row.lambda0 = er.lambda0;
            row.ih_dual_gap = std::abs(er.i_h - ih_volume_form(sol, mms.problem, w));
        }
        row.runtime_sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rows.push_back(row);
    }
    return rows;
}

std::vector<double> observed_orders(const std::vector<double>& errors) {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i)
        out.push_back(std::log2(errors[i] / errors[i + 1]));
    return out;
}

}  // namespace epduct
