// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are fixed here, not configurable.

#include <Eigen/Sparse>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "epduct/pipeline.hpp"
#include "epduct/verification.hpp"

using namespace epduct;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void criterion(int id, const char* title, const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    const auto t0 = Clock::now();
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double sec = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", id, title, sec,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// canonical 1D test case: gamma=1, J0=1, b0=1/2, u0=2, E0=1/10
BackgroundParams canonical_ivp() {
    BackgroundParams p;
    p.gas = GasLaw(1.0, 1.0);
    p.b0 = 0.5;
    p.u0 = 2.0;
    p.e0 = 0.1;
    p.length_request = 2.0;
    p.step = 1e-3;
    return p;
}

// the same constant background scaled (J0 = 1/10) so the coupling terms in
// q0 are moderate; used by the weight, energy and nonlinear criteria
BackgroundParams scaled_constant() {
    BackgroundParams p;
    p.gas = GasLaw(1.0, 0.1);
    p.b0 = 0.05;
    p.u0 = 2.0;
    p.e0 = 0.0;
    p.length_request = 2.0;
    p.step = 1e-3;
    return p;
}

}  // namespace

int main() {
    criterion(1, "extension weights solve exactly", [](std::string& detail) {
        const auto w = solve_weights().c;
        const std::array<double, 5> expect{15.0, -640.0, 3645.0, -6144.0, 3125.0};
        bool exact = true;
        for (int k = 0; k < 5; ++k) exact = exact && w[k] == expect[k];
        double resid = 0.0;
        for (int m = 0; m <= 4; ++m) {
            double s = -1.0;
            for (int k = 1; k <= 5; ++k) s += w[k - 1] * std::pow(-1.0 / k, m);
            resid = std::max(resid, std::abs(s));
        }
        double best = 1e300;
        for (int rep = 0; rep < 5; ++rep) {
            const auto t0 = Clock::now();
            volatile double sink = solve_weights().c[0];
            (void)sink;
            best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
        }
        detail = fmt("residual %.2e, %.0f us", resid, best * 1e6);
        return exact && resid <= 1e-9 && best < 1e-3;
    });

    criterion(2, "1D conservation under RK4", [](std::string& detail) {
        const auto t0 = Clock::now();
        BackgroundParams p = canonical_ivp();
        const BackgroundSolution bg = integrate(p);
        const double scale = std::max(1.0, std::abs(bg.energy0));
        const double rel_drift = bg.invariant_drift / scale;
        const double sec = std::chrono::duration<double>(Clock::now() - t0).count();
        // the drift at h = 1e-3 sits at roundoff, so the factor-8 decay per
        // halving is demonstrated at the coarsest steps where the truncation
        // error is above the noise floor
        BackgroundParams pc = p;
        pc.step = 0.05;
        const double d1 = integrate(pc).invariant_drift;
        pc.step = 0.025;
        const double d2 = integrate(pc).invariant_drift;
        detail = fmt("drift %.2e (rel), halving ratio %.1f, %.2fs", rel_drift, d1 / d2, sec);
        return rel_drift <= 1e-8 && d1 / d2 >= 8.0 && sec < 1.0;
    });

    criterion(3, "closure identities", [](std::string& detail) {
        std::mt19937 rng(2024);
        std::uniform_real_distribution<double> dg(1.0, 3.0), dq(-2.5, 2.5), dz(-1.0, 4.0);
        double worst = 0.0;
        int accepted = 0;
        while (accepted < 100000) {
            const GasLaw gas(dg(rng), 1.0);
            const Vec3 q{dq(rng), dq(rng), dq(rng)};
            const double z = dz(rng) + 0.5 * norm_sq(q);
            try {
                const Mat3 a = coeff_A(gas, z, q);
                worst = std::max(worst, std::abs(a[0][0] - 1.0));
                ++accepted;
            } catch (const std::domain_error&) {
                continue;  // vacuum or sonic draw
            }
        }
        // density_partials against central differences: order 2 with a
        // stable asymptotic constant over three refinement levels
        const GasLaw gas(2.0, 1.0);
        const double z = 1.0;
        const Vec3 q{0.3, 0.1, -0.2};
        const auto exact = density_partials(gas, z, q);
        std::vector<double> consts;
        for (int lev = 0; lev < 3; ++lev) {
            const double h = 1e-2 / (1 << lev);
            Vec3 qp = q, qm = q;
            qp[0] += h;
            qm[0] -= h;
            const double fd_z = (density(gas, z + h, q) - density(gas, z - h, q)) / (2 * h);
            const double fd_q = (density(gas, z, qp) - density(gas, z, qm)) / (2 * h);
            const double err = std::abs(fd_z - exact.d_z) + std::abs(fd_q - exact.d_q1);
            consts.push_back(err / (h * h));
        }
        double cmin = 1e300, cmax = 0.0;
        for (double c : consts) {
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
        }
        detail = fmt("max|A11-1| = %.1e, FD-constant spread %.3f", worst, cmax / cmin);
        return worst <= 1e-14 && cmax / cmin <= 1.2;
    });

    criterion(4, "extension order", [](std::string& detail) {
        // exact reproduction of (x2-1)^m, m = 0..4
        const DuctGrid g(5, 33, 5, 0.5);
        double poly_err = 0.0;
        for (int m = 0; m <= 4; ++m) {
            const Field3 f = Field3::from_fn(
                g, [m](double, double x2, double) { return std::pow(x2 - 1.0, m); });
            const ExtendedField ext = extend(f, 1);
            for (int i = 0; i < ext.n[0]; ++i)
                for (int j = 0; j < ext.n[1]; ++j)
                    for (int k = 0; k < ext.n[2]; ++k)
                        poly_err = std::max(poly_err,
                                            std::abs(ext.v[ext.idx(i, j, k)] -
                                                     std::pow(ext.coord(1, j) - 1.0, m)));
        }
        // 4th-derivative jump of the first cosine mode across x2 = 1
        std::vector<double> jumps;
        for (const int n2 : {17, 33, 65, 129}) {
            const DuctGrid gg(5, n2, 5, 0.5);
            const Field3 f = Field3::from_fn(gg, [](double, double x2, double) {
                return std::cos(std::numbers::pi * (x2 + 1.0) / 2.0);
            });
            const ExtendedField ext = extend(f, 1);
            const double h = gg.h2();
            const int jw = n2 - 1 + (ext.n[1] - n2) / 2;
            auto at = [&](int off) { return ext.v[ext.idx(2, jw + off, 2)]; };
            const double h4 = h * h * h * h;
            const double dp = (at(0) - 4 * at(1) + 6 * at(2) - 4 * at(3) + at(4)) / h4;
            const double dm = (at(0) - 4 * at(-1) + 6 * at(-2) - 4 * at(-3) + at(-4)) / h4;
            jumps.push_back(std::abs(dp - dm));
        }
        double min_order = 1e300;
        for (std::size_t i = 0; i + 1 < jumps.size(); ++i)
            min_order = std::min(min_order, std::log2(jumps[i] / jumps[i + 1]));
        detail = fmt("poly error %.1e, min jump order %.2f", poly_err, min_order);
        return poly_err <= 1e-9 && min_order >= 0.9;
    });

    criterion(5, "spectral basis", [](std::string& detail) {
        const CrossSectionBasis basis(6, 33, 33);
        const Eigen::MatrixXd gram = basis.gram(25);
        double gdev = 0.0;
        for (int i = 0; i < 25; ++i)
            for (int j = 0; j < 25; ++j)
                gdev = std::max(gdev, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));

        // FD oracle: 5-point Neumann Laplacian on a 101^2 grid, inverse
        // iteration with a shift near pi^2/4
        const int n = 101;
        const double h = 2.0 / (n - 1);
        using T = Eigen::Triplet<double>;
        std::vector<T> trip;
        auto id = [n](int i, int j) { return i * n + j; };
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double diag = 4.0;
                auto nb = [&](int ii, int jj) {
                    // mirror ghost nodes across the Neumann walls
                    if (ii < 0) ii = 1;
                    if (ii >= n) ii = n - 2;
                    if (jj < 0) jj = 1;
                    if (jj >= n) jj = n - 2;
                    trip.emplace_back(id(i, j), id(ii, jj), -1.0 / (h * h));
                };
                nb(i - 1, j);
                nb(i + 1, j);
                nb(i, j - 1);
                nb(i, j + 1);
                trip.emplace_back(id(i, j), id(i, j), diag / (h * h));
            }
        Eigen::SparseMatrix<double> A(n * n, n * n);
        A.setFromTriplets(trip.begin(), trip.end());
        const double shift = 2.4;
        Eigen::SparseMatrix<double> S = A;
        for (int i = 0; i < n * n; ++i) S.coeffRef(i, i) -= shift;
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(S);
        Eigen::VectorXd v = Eigen::VectorXd::Ones(n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                v[id(i, j)] = std::cos(std::numbers::pi * i / (n - 1.0)) + 1e-3 * (i + j);
        v.normalize();
        for (int it = 0; it < 60; ++it) v = lu.solve(v).normalized();
        const double mu = v.dot(A * v) / v.dot(v);

        const double omega = basis.omega(1);  // first nonzero eigenvalue
        const double target = std::numbers::pi * std::numbers::pi / 4.0;
        detail = fmt("gram dev %.1e, omega %.6f, fd %.6f, |diff| %.2e vs h^2 %.2e", gdev,
                     omega, mu, std::abs(omega - mu), h * h);
        return gdev <= 1e-10 && std::abs(omega - target) <= 1e-12 &&
               std::abs(omega - mu) <= 1.0 * h * h && std::abs(omega - mu) > 0.01 * h * h;
    });

    criterion(6, "linear solver MMS convergence", [](std::string& detail) {
        const auto rows =
            mms_convergence(scaled_constant(), 0.5, 33, 33, 8, {101, 201, 401}, false);
        const double r01 = rows[0].err_psi / rows[1].err_psi;
        const double r12 = rows[1].err_psi / rows[2].err_psi;
        const double c01 = rows[0].err_cap / rows[1].err_cap;
        const double c12 = rows[1].err_cap / rows[2].err_cap;
        detail = fmt("ratios psi %.2f/%.2f Psi %.2f/%.2f, finest %.2e/%.2e, %.0fs at n1=401",
                     r01, r12, c01, c12, rows[2].err_psi, rows[2].err_cap,
                     rows[2].runtime_sec);
        auto in_band = [](double r) { return r >= 3.5 && r <= 4.5; };
        return in_band(r01) && in_band(r12) && in_band(c01) && in_band(c12) &&
               rows[2].err_psi <= 1e-5 && rows[2].err_cap <= 1e-5 &&
               rows[2].runtime_sec <= 60.0;
    });

    criterion(7, "energy identity", [](std::string& detail) {
        const auto rows =
            mms_convergence(scaled_constant(), 0.5, 33, 33, 8, {101, 201, 401}, true);
        const double o01 = std::log2(rows[0].energy_gap / rows[1].energy_gap);
        const double o12 = std::log2(rows[1].energy_gap / rows[2].energy_gap);
        bool lambda_ok = true;
        for (const auto& r : rows) lambda_ok = lambda_ok && r.lambda0 > 0.0;
        detail = fmt("gap orders %.2f/%.2f, lambda0 %.4f", o01, o12, rows[2].lambda0);
        return o01 >= 1.8 && o12 >= 1.8 && lambda_ok;
    });

    criterion(8, "energy weight synthesis", [](std::string& detail) {
        const BackgroundParams p = scaled_constant();
        const BackgroundSolution bg = integrate(p);  // L1 = 2 (constant solution)
        const BaseCoefficients base = base_coefficients(bg);
        const double L = 0.25 * bg.l1_detected;
        const EnergyWeight w = synthesize_weight(base, L);
        if (!w.feasible) {
            detail = "infeasible at L = 0.25 L1";
            return false;
        }
        const double margin = w.min_margin();
        const double reaudit = reaudit_weight(w, base, L, 4);
        const EnergyWeight wfull = synthesize_weight(base, bg.l1_detected);
        const bool finite_l1star = w.feasible_length < bg.l1_detected - 1e-6;
        detail = fmt("min margin %.3e, 4x re-audit %.3e, L1* %.3f", margin, reaudit,
                     w.feasible_length);
        return margin >= 1e-3 && reaudit > 0.0 && finite_l1star && !wfull.feasible;
    });

    criterion(9, "nonlinear sigma scaling", [](std::string& detail) {
        const auto t0 = Clock::now();
        RunConfig cfg;  // defaults are the scaled constant background
        cfg.n1 = 201;
        cfg.n2 = 33;
        cfg.n3 = 33;
        cfg.m_max = 8;
        cfg.length = 0.5;
        const Workspace ws = make_workspace(cfg);
        std::vector<double> ratios;
        bool ok = true;
        std::string parts;
        for (const double f : {1e-2, 1e-3, 1e-4}) {
            RunConfig c = cfg;
            c.sigma_target = f * cfg.sigma_bar;
            const BoundaryData data = build_data(c, ws);
            const NonlinearResult res =
                solve_nonlinear(data, ws.bg, ws.base, c.iteration_config(), {});
            const auto& r = res.report;
            ok = ok && r.converged && r.iterations <= 30 && r.q_fit < 0.9 &&
                 r.res_div_form <= 1e-6 && r.res_poisson <= 1e-6 &&
                 r.supersonic_margin > 0.0;
            ratios.push_back(r.ratio);
            parts += fmt(" [s=%.0e it=%d q=%.2e res=%.1e ratio=%.4f]", r.sigma,
                         r.iterations, r.q_fit, std::max(r.res_div_form, r.res_poisson),
                         r.ratio);
        }
        double rmin = 1e300, rmax = 0.0;
        for (double r : ratios) {
            rmin = std::min(rmin, r);
            rmax = std::max(rmax, r);
        }
        const double sec = std::chrono::duration<double>(Clock::now() - t0).count();
        detail = fmt("spread %.3f, %.0fs,%s", rmax / rmin - 1.0, sec, parts.c_str());
        return ok && rmax / rmin <= 1.2 && sec <= 600.0;
    });

    criterion(10, "zero-data fixed point", [](std::string& detail) {
        RunConfig cfg;
        cfg.n1 = 101;
        cfg.n2 = 17;
        cfg.n3 = 17;
        cfg.m_max = 4;
        cfg.length = 0.5;
        const Workspace ws = make_workspace(cfg);
        const BoundaryData data = build_data(cfg, ws);  // no modes: sigma = 0
        const IterationConfig icfg = cfg.iteration_config();
        const NonlinearResult res = solve_nonlinear(data, ws.bg, ws.base, icfg, {});

        // background lift discretization error: residual norms of the pure
        // background on the same grid
        const NonlinearResiduals lift =
            nonlinear_residuals(Field3(ws.grid), Field3(ws.grid), ws.bg, data.b);
        const double lift_err =
            std::max({lift.div_form, lift.poisson, 1e-13});
        const double sol_norm = res.report.norm_psi + res.report.norm_cap;

        IterationState st = zero_state(ws.grid);
        st.phi = res.psi;
        st.cap_w = res.cap_psi;
        StepInfo info;
        picard_step(st, data, ws.bg, ws.base, icfg, &info);
        detail = fmt("|psi|+|Psi| = %.2e vs 10x lift %.2e, extra step %.2e", sol_norm,
                     10.0 * lift_err, info.step_diff);
        return sol_norm <= 10.0 * lift_err && info.step_diff <= icfg.contraction_tol;
    });

    std::printf("%s: %d/10 criteria passed\n", g_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                10 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
