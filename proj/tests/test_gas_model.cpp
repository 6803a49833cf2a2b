#include <doctest.h>

#include <cmath>
#include <random>

#include "epduct/gas_model.hpp"

using namespace epduct;

TEST_CASE("enthalpy closure") {
    CHECK(enthalpy(GasLaw(1.0, 1.0), 1.0) == doctest::Approx(0.0));
    CHECK(enthalpy(GasLaw(2.0, 1.0), 1.0) == doctest::Approx(0.0));
    CHECK(enthalpy(GasLaw(2.0, 1.0), 2.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(enthalpy(GasLaw(2.0, 1.0), -1.0), std::domain_error);
}

TEST_CASE("density closure") {
    CHECK(density(GasLaw(1.0, 1.0), 0.0, {0, 0, 0}) == doctest::Approx(1.0));
    CHECK(density(GasLaw(2.0, 1.0), 0.5, {1, 0, 0}) == doctest::Approx(1.0));
    CHECK(density(GasLaw(2.0, 1.0), 1.0, {0, 0, 0}) == doctest::Approx(1.5));
    CHECK_THROWS_AS(density(GasLaw(2.0, 1.0), -10.0, {0, 0, 0}), VacuumError);
}

TEST_CASE("sound speed") {
    CHECK(sound_speed_sq(GasLaw(1.0, 1.0), 0.0, {0, 0, 0}) == doctest::Approx(1.0));
    CHECK(sound_speed_sq(GasLaw(2.0, 1.0), 1.0, {0, 0, 0}) == doctest::Approx(3.0));
    CHECK(sound_speed_sq(GasLaw(3.0, 1.0), 0.0, {0, 0, 0}) == doctest::Approx(3.0));
}

TEST_CASE("isothermal sound speed is exactly 1") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    const GasLaw gas(1.0, 0.7);
    for (int t = 0; t < 1000; ++t) {
        const double c2 = sound_speed_sq(gas, d(rng), {d(rng), d(rng), d(rng)});
        CHECK(c2 == 1.0);
    }
}

TEST_CASE("coefficient matrix A") {
    const Mat3 a = coeff_A(GasLaw(1.0, 1.0), 0.0, {2, 0, 0});
    CHECK(a[0][0] == doctest::Approx(1.0));
    CHECK(a[1][1] == doctest::Approx(-1.0 / 3.0));
    CHECK(a[2][2] == doctest::Approx(-1.0 / 3.0));
    CHECK(a[0][1] == doctest::Approx(0.0));
    CHECK(a[1][2] == doctest::Approx(0.0));

    SUBCASE("symmetry on random admissible states") {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> d(-0.8, 0.8);
        const GasLaw gas(2.0, 1.0);
        for (int t = 0; t < 500; ++t) {
            const Vec3 q{2.0 + d(rng), d(rng), d(rng)};
            const double z = 2.0 + d(rng) + 0.5 * norm_sq(q) - 0.5 * 4.0;
            Mat3 m;
            try {
                m = coeff_A(gas, z, q);
            } catch (const std::domain_error&) {
                continue;
            }
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) CHECK(m[i][j] == doctest::Approx(m[j][i]));
        }
    }

    SUBCASE("sonic degeneracy is rejected") {
        // gamma = 1: c^2 = 1, q1 = 1 makes the denominator vanish
        CHECK_THROWS_AS(coeff_A(GasLaw(1.0, 1.0), 0.0, {1.0, 0, 0}), SonicError);
    }
}

TEST_CASE("coefficient B") {
    const GasLaw gas(1.0, 1.0);
    CHECK(coeff_B(gas, 0.0, {0, 0, 0}, {2, 0, 0}) == doctest::Approx(0.0));
    CHECK(coeff_B(gas, 0.0, {1, 0, 0}, {2, 0, 0}) == doctest::Approx(-2.0 / 3.0));
    CHECK(coeff_B(gas, 0.0, {0, 1, 0}, {2, 0, 0}) == doctest::Approx(0.0));  // p orthogonal to q
}

TEST_CASE("regime classification") {
    const GasLaw gas(1.0, 1.0);
    CHECK(regime(gas, 0.0, {0, 0, 0}) == Regime::Subsonic);
    CHECK(regime(gas, 0.0, {2, 0, 0}) == Regime::Supersonic);
    // exactly sonic 1D state: rho = rho_s, u = u_s
    const GasLaw g2(2.0, 1.0);
    const double rho_s = g2.sonic_density(), u_s = g2.sonic_speed();
    const double z = enthalpy(g2, rho_s) + 0.5 * u_s * u_s;
    CHECK(regime(g2, z, {u_s, 0, 0}, 1e-9) == Regime::Sonic);
}

TEST_CASE("density partials") {
    const GasLaw g1(1.0, 1.0);
    auto d0 = density_partials(g1, 0.0, {0, 0, 0});
    CHECK(d0.d_z == doctest::Approx(1.0));
    CHECK(d0.d_q1 == doctest::Approx(0.0));

    const GasLaw g2(2.0, 1.0);
    auto d1 = density_partials(g2, 1.0, {0, 0, 0});
    CHECK(d1.d_z == doctest::Approx(0.5));
    CHECK(d1.d_q1 == doctest::Approx(0.0));

    SUBCASE("identity d_q1 = -q1 d_z") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> d(-0.5, 0.5);
        for (int t = 0; t < 200; ++t) {
            const Vec3 q{1.5 + d(rng), d(rng), d(rng)};
            const double z = 1.0 + d(rng) + 0.5 * norm_sq(q);
            const auto p = density_partials(g2, z, q);
            CHECK(p.d_q1 == doctest::Approx(-q[0] * p.d_z).epsilon(1e-12));
        }
    }

    SUBCASE("order-2 agreement with central differences") {
        const double z = 1.0;
        const Vec3 q{0.3, 0.1, -0.2};
        const auto exact = density_partials(g2, z, q);
        double prev_err = 0.0;
        for (int lev = 0; lev < 3; ++lev) {
            const double h = 1e-2 / (1 << lev);
            const double fd_z =
                (density(g2, z + h, q) - density(g2, z - h, q)) / (2.0 * h);
            Vec3 qp = q, qm = q;
            qp[0] += h;
            qm[0] -= h;
            const double fd_q1 = (density(g2, z, qp) - density(g2, z, qm)) / (2.0 * h);
            const double err =
                std::abs(fd_z - exact.d_z) + std::abs(fd_q1 - exact.d_q1);
            if (lev > 0) CHECK(prev_err / err == doctest::Approx(4.0).epsilon(0.05));
            prev_err = err;
        }
    }
}
