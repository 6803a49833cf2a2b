#include <doctest.h>

#include <cmath>
#include <numbers>

#include "epduct/coefficients.hpp"
#include "epduct/common.hpp"

using namespace epduct;

namespace {

struct Fixture {
    BackgroundParams params;
    DuctGrid grid{21, 17, 17, 0.5};
    BackgroundSolution bg;
    BaseCoefficients base;
    explicit Fixture(double e0 = 0.0, double j0 = 1.0, double b0 = 0.5) {
        params.gas = GasLaw(1.0, j0);
        params.b0 = b0;
        params.u0 = 2.0;
        params.e0 = e0;
        params.length_request = 2.0;
        bg = integrate_at(params, grid.x1_nodes());
        base = base_coefficients(bg);
    }
    Field3 slip_mode(double amp, double x1_scale = 1.0) const {
        return Field3::from_fn(grid, [=](double x1, double x2, double x3) {
            return amp * std::sin(x1_scale * x1) *
                   std::cos(std::numbers::pi * (x2 + 1.0) / 2.0) *
                   std::cos(std::numbers::pi * (x3 + 1.0) / 2.0);
        });
    }
};

}  // namespace

TEST_CASE("base coefficients of the constant isothermal background") {
    Fixture fx;  // gamma=1, J0=1, b0=J0/u0, E0=0 -> constant solution
    for (int i = 0; i < fx.base.n(); ++i) {
        CHECK(fx.base.a22[i] == doctest::Approx(-1.0 / 3.0));
        CHECK(fx.base.b1[i] == doctest::Approx(-2.0 / 3.0));
        CHECK(fx.base.b2[i] == doctest::Approx(0.0));
        CHECK(fx.base.a1[i] == doctest::Approx(0.0));
        CHECK(fx.base.h1[i] == doctest::Approx(0.5));
        CHECK(fx.base.h2[i] == doctest::Approx(-1.0));
        CHECK(fx.base.da22[i] == doctest::Approx(0.0));
    }
    CHECK(fx.base.mu1 > 0.0);
    CHECK(fx.base.mu1 < 1.0);
}

TEST_CASE("analytic partials agree with finite differences of B and rho") {
    const GasLaw gas(2.0, 1.0);
    const double z = 2.2;
    const Vec3 p{0.3, 0.0, 0.0}, q{1.9, 0.0, 0.0};
    const BPartials bp = b_partials(gas, z, p, q);
    double prev = 0.0;
    for (int lev = 0; lev < 3; ++lev) {
        const double h = 1e-2 / (1 << lev);
        Vec3 qp = q, qm = q, pp = p, pm = p;
        qp[0] += h;
        qm[0] -= h;
        pp[0] += h;
        pm[0] -= h;
        const double fd_q1 = (coeff_B(gas, z, p, qp) - coeff_B(gas, z, p, qm)) / (2 * h);
        const double fd_p1 = (coeff_B(gas, z, pp, q) - coeff_B(gas, z, pm, q)) / (2 * h);
        const double fd_z = (coeff_B(gas, z + h, p, q) - coeff_B(gas, z - h, p, q)) / (2 * h);
        const double err = std::abs(fd_q1 - bp.d_q1) + std::abs(fd_p1 - bp.d_p1) +
                           std::abs(fd_z - bp.d_z);
        if (lev > 0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
        prev = err;
    }
}

TEST_CASE("da22 matches finite differences along a varying background") {
    Fixture fx(0.1);  // periodic orbit, coefficients vary in x1
    const double h = fx.grid.h1();
    double worst = 0.0;
    for (int i = 1; i < fx.base.n() - 1; ++i) {
        const double fd = (fx.base.a22[i + 1] - fx.base.a22[i - 1]) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - fx.base.da22[i]));
    }
    CHECK(worst <= 5.0 * h * h);
}

TEST_CASE("perturbed coefficients") {
    Fixture fx;

    SUBCASE("zero perturbation reproduces the base") {
        const SymTensorField a = perturbed(fx.bg, Field3(fx.grid), Field3(fx.grid));
        double worst = 0.0;
        for (int i = 0; i < fx.grid.n1; ++i)
            for (int j = 0; j < fx.grid.n2; ++j)
                for (int k = 0; k < fx.grid.n3; ++k) {
                    worst = std::max(worst, std::abs(a(0, 0)(i, j, k) - 1.0));
                    worst = std::max(worst, std::abs(a(1, 1)(i, j, k) - fx.base.a22[i]));
                    worst = std::max(worst, std::abs(a(0, 1)(i, j, k)));
                }
        CHECK(worst <= 1e-13);
    }

    SUBCASE("deviation from the base scales linearly in the amplitude") {
        std::vector<double> amps{1e-2, 1e-3, 1e-4}, devs;
        for (const double amp : amps) {
            const SymTensorField a = perturbed(fx.bg, fx.slip_mode(amp), fx.slip_mode(amp, 2.0));
            double dev = 0.0;
            for (int i = 0; i < fx.grid.n1; ++i)
                for (int j = 0; j < fx.grid.n2; ++j)
                    for (int k = 0; k < fx.grid.n3; ++k)
                        dev = std::max(dev, std::abs(a(1, 1)(i, j, k) - fx.base.a22[i]));
            devs.push_back(dev);
        }
        const double slope = fit_loglog_slope(amps, devs);
        CHECK(slope == doctest::Approx(1.0).epsilon(0.1));
    }

    SUBCASE("row-1 wall flux vanishes and rows 2,3 follow the prediction") {
        const Field3 phi = fx.slip_mode(1e-2, 1.5);
        const Field3 w = fx.slip_mode(5e-3);
        const SymTensorField a = perturbed(fx.bg, w, phi);
        const Field3 d1 = phi.deriv(0), d2 = phi.deriv(1), d3 = phi.deriv(2);
        const double tol = 10.0 * fx.grid.h2() * fx.grid.h2();
        for (int i = 0; i < fx.grid.n1; ++i)
            for (int k = 0; k < fx.grid.n3; ++k)
                for (int jw : {0, fx.grid.n2 - 1}) {
                    CHECK(std::abs(a(0, 1)(i, jw, k)) <= tol);
                    // prediction c^2 n_2 / (c^2 - q1^2) for the row-2 flux
                    const Vec3 q{fx.bg.u[i] + d1(i, jw, k), d2(i, jw, k), d3(i, jw, k)};
                    const double z = fx.bg.cap_phi0[i] + w(i, jw, k);
                    const double c2 = sound_speed_sq(fx.bg.gas, z, q);
                    const double pred = c2 / (c2 - q[0] * q[0]);
                    CHECK(std::abs(a(1, 1)(i, jw, k) - pred) <= tol);
                }
    }
}

TEST_CASE("nonlinear source terms") {
    Fixture fx;
    const Field3 zero(fx.grid);
    const Field3 b0(fx.grid, fx.params.b0);

    SUBCASE("zero perturbation gives zero sources") {
        CHECK(max_abs(source_f1(fx.bg, fx.base, zero, zero)) == 0.0);
        CHECK(max_abs(source_f2(fx.bg, fx.base, zero, zero, b0)) == 0.0);
    }

    SUBCASE("only the ion term survives at zero fields") {
        Field3 b = b0;
        for (auto& x : b.data()) x += 1e-3;
        const Field3 f2 = source_f2(fx.bg, fx.base, zero, zero, b);
        for (double v : f2.data()) CHECK(v == doctest::Approx(-1e-3).epsilon(1e-10));
    }

    SUBCASE("quadratic smallness of f1 and f2") {
        std::vector<double> amps{1e-2, 1e-3, 1e-4}, n1s, n2s;
        for (const double amp : amps) {
            const Field3 w = fx.slip_mode(amp), phi = fx.slip_mode(amp, 2.0);
            n1s.push_back(max_abs(source_f1(fx.bg, fx.base, w, phi)));
            n2s.push_back(max_abs(source_f2(fx.bg, fx.base, w, phi, b0)));
        }
        CHECK(fit_loglog_slope(amps, n1s) == doctest::Approx(2.0).epsilon(0.05));
        CHECK(fit_loglog_slope(amps, n2s) == doctest::Approx(2.0).epsilon(0.05));
    }

    SUBCASE("B is linear in p, so a pure grad-W perturbation cancels exactly") {
        const double eps = 1e-4;
        const Field3 w = Field3::from_fn(
            fx.grid, [eps](double x1, double, double) { return eps * (x1 - 0.25); });
        // the zeta and xi slots stay zero only if W itself is ignored; use a
        // field with zero value at mid-duct to bound the xi contribution
        const Field3 f1 = source_f1(fx.bg, fx.base, w, zero);
        const int i = fx.grid.n1 / 2, j = fx.grid.n2 / 2, k = fx.grid.n3 / 2;
        CHECK(std::abs(f1(i, j, k)) <= 1e-3 * eps + 1e-14);
    }

    SUBCASE("Taylor remainder from a pure d1 phi perturbation") {
        Fixture fv(0.1);  // E != 0, so B has genuine q1 curvature
        const double eps = 1e-4;
        const Field3 phi = Field3::from_fn(
            fv.grid, [eps](double x1, double, double) { return eps * x1; });
        const Field3 f1 = source_f1(fv.bg, fv.base, Field3(fv.grid), phi);
        const int i = fv.grid.n1 / 2, j = fv.grid.n2 / 2, k = fv.grid.n3 / 2;
        // oracle: second q1-derivative of B by central differences
        const GasLaw gas = fv.params.gas;
        const double z = fv.bg.cap_phi0[i];
        const Vec3 p{fv.bg.e[i], 0, 0};
        const double u = fv.bg.u[i], h = 1e-3;
        const double d2b = (coeff_B(gas, z, p, {u + h, 0, 0}) -
                            2.0 * coeff_B(gas, z, p, {u, 0, 0}) +
                            coeff_B(gas, z, p, {u - h, 0, 0})) /
                           (h * h);
        REQUIRE(std::abs(d2b) > 1e-6);
        CHECK(f1(i, j, k) == doctest::Approx(-0.5 * eps * eps * d2b).epsilon(0.05));
    }
}

TEST_CASE("structural audit") {
    Fixture fx;
    const Field3 b0(fx.grid, fx.params.b0);

    SUBCASE("the base set passes") {
        const CoefficientSet set =
            assemble_set(fx.bg, fx.base, Field3(fx.grid), Field3(fx.grid), b0);
        const AuditReport rep = audit(set);
        CHECK(rep.pass);
    }

    SUBCASE("corrupted symmetry is flagged") {
        CoefficientSet set =
            assemble_set(fx.bg, fx.base, Field3(fx.grid), Field3(fx.grid), b0);
        set.a(1, 2)(3, 4, 5) += 1e-6;
        const AuditReport rep = audit(set);
        CHECK(!rep.pass);
        CHECK(!rep.items[0].pass);  // symmetry item
    }

    SUBCASE("eigenvalues stay within the hyperbolicity band at epsilon-bar") {
        const double eps_bar = 1e-2;
        const CoefficientSet set = assemble_set(fx.bg, fx.base, fx.slip_mode(eps_bar),
                                                fx.slip_mode(eps_bar, 2.0), b0);
        const AuditReport rep = audit(set);
        CHECK(rep.pass);
        CHECK(rep.eig_lo >= fx.base.mu1 / 4.0);
        CHECK(rep.eig_hi <= 4.0 / fx.base.mu1);
    }
}
