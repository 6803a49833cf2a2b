#include "epduct/coefficients.hpp"

#include <cmath>
#include <sstream>

namespace epduct {

namespace {
void require_match(const BackgroundSolution& bg, const DuctGrid& grid) {
    if (bg.n() != grid.n1)
        throw ConfigError("coefficients: background must be sampled on the duct x1 nodes");
    for (int i = 0; i < grid.n1; ++i)
        if (std::abs(bg.x1[i] - grid.x1(i)) > 1e-9 * std::max(1.0, grid.length))
            throw ConfigError("coefficients: background x1 nodes do not match the grid");
}
}  // namespace

BaseCoefficients base_coefficients(const BackgroundSolution& bg) {
    BaseCoefficients out;
    out.gas = bg.gas;
    out.x1 = bg.x1;
    const int n = bg.n();
    out.a22.resize(n);
    out.da22.resize(n);
    out.a1.resize(n);
    out.b1.resize(n);
    out.b2.resize(n);
    out.h1.resize(n);
    out.h2.resize(n);

    for (int i = 0; i < n; ++i) {
        const double z = bg.cap_phi0[i];
        const Vec3 q{bg.u[i], 0.0, 0.0};
        const Vec3 p{bg.e[i], 0.0, 0.0};
        const Mat3 A = coeff_A(bg.gas, z, q);
        out.a22[i] = A[1][1];
        const BPartials bp = b_partials(bg.gas, z, p, q);
        out.a1[i] = bp.d_q1;
        out.b1[i] = bp.d_p1;
        out.b2[i] = bp.d_z;
        const DensityPartials dp = density_partials(bg.gas, z, q);
        out.h1[i] = dp.d_z;
        out.h2[i] = dp.d_q1;

        // d a22/dx1 with c^2 affine in the Bernoulli argument:
        // (c^2)' = (gamma-1)(E - u u') and a22 = c^2 / (c^2 - u^2).
        const double c2 = sound_speed_sq(bg.gas, z, q);
        const double dc2 = (bg.gas.gamma - 1.0) * (bg.e[i] - bg.u[i] * bg.du[i]);
        const double den = c2 - bg.u[i] * bg.u[i];
        out.da22[i] = (-dc2 * bg.u[i] * bg.u[i] + 2.0 * c2 * bg.u[i] * bg.du[i]) / (den * den);
    }

    // mu1 <= a11 = 1 and mu1 <= -a22 <= 1/mu1 on the whole sample; measured
    // rather than derived, then pulled strictly inside (0,1).
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i < n; ++i) {
        const double na = -out.a22[i];
        if (na <= 0.0) throw SonicError("base_coefficients: -a22 not positive (not supersonic?)");
        lo = std::min(lo, na);
        hi = std::max(hi, na);
    }
    out.mu1 = std::min({1.0, lo, 1.0 / hi}) * (1.0 - 1e-9);
    return out;
}

namespace {

struct LocalState {
    double z0, e0, u0;  // background at the x1 node
};

// Gradient fields of a grid function; centered stencils, one-sided at faces.
struct GradFields {
    Field3 d1, d2, d3;
    explicit GradFields(const Field3& f) : d1(f.deriv(0)), d2(f.deriv(1)), d3(f.deriv(2)) {}
};

}  // namespace

SymTensorField perturbed(const BackgroundSolution& bg, const Field3& w_field,
                         const Field3& phi_field) {
    const DuctGrid& grid = phi_field.grid();
    require_match(bg, grid);
    GradFields gphi(phi_field);
    SymTensorField out;
    out.grid = grid;
    for (int i = 0; i < 9; ++i) out.comp[i] = Field3(grid);

    for (int i = 0; i < grid.n1; ++i)
        for (int j = 0; j < grid.n2; ++j)
            for (int k = 0; k < grid.n3; ++k) {
                const double z = bg.cap_phi0[i] + w_field(i, j, k);
                const Vec3 q{bg.u[i] + gphi.d1(i, j, k), gphi.d2(i, j, k), gphi.d3(i, j, k)};
                Mat3 A;
                try {
                    A = coeff_A(bg.gas, z, q);
                } catch (const std::domain_error& err) {
                    std::ostringstream os;
                    os << err.what() << " at node (" << i << "," << j << "," << k << ")";
                    throw SolverError(os.str());
                }
                for (int r = 0; r < 3; ++r)
                    for (int c = 0; c < 3; ++c) out(r, c)(i, j, k) = A[r][c];
            }
    return out;
}

Field3 source_f1(const BackgroundSolution& bg, const BaseCoefficients& base,
                 const Field3& w_field, const Field3& phi_field) {
    const DuctGrid& grid = phi_field.grid();
    require_match(bg, grid);
    GradFields gw(w_field), gphi(phi_field);
    Field3 out(grid);
    for (int i = 0; i < grid.n1; ++i) {
        const double z0 = bg.cap_phi0[i], e0 = bg.e[i], u0 = bg.u[i];
        const Vec3 p0{e0, 0.0, 0.0}, q0{u0, 0.0, 0.0};
        const double b_at0 = coeff_B(bg.gas, z0, p0, q0);
        for (int j = 0; j < grid.n2; ++j)
            for (int k = 0; k < grid.n3; ++k) {
                const double xi = w_field(i, j, k);
                const Vec3 eta{gw.d1(i, j, k), gw.d2(i, j, k), gw.d3(i, j, k)};
                const Vec3 zeta{gphi.d1(i, j, k), gphi.d2(i, j, k), gphi.d3(i, j, k)};
                const double b_at1 = coeff_B(bg.gas, z0 + xi,
                                             {e0 + eta[0], eta[1], eta[2]},
                                             {u0 + zeta[0], zeta[1], zeta[2]});
                out(i, j, k) = -(b_at1 - b_at0) + base.a1[i] * zeta[0] +
                               base.b1[i] * eta[0] + base.b2[i] * xi;
            }
    }
    return out;
}

Field3 source_f2(const BackgroundSolution& bg, const BaseCoefficients& base,
                 const Field3& w_field, const Field3& phi_field, const Field3& b) {
    const DuctGrid& grid = phi_field.grid();
    require_match(bg, grid);
    GradFields gphi(phi_field);
    Field3 out(grid);
    for (int i = 0; i < grid.n1; ++i) {
        const double z0 = bg.cap_phi0[i], u0 = bg.u[i];
        const double rho_at0 = density(bg.gas, z0, {u0, 0.0, 0.0});
        for (int j = 0; j < grid.n2; ++j)
            for (int k = 0; k < grid.n3; ++k) {
                const double xi = w_field(i, j, k);
                const Vec3 zeta{gphi.d1(i, j, k), gphi.d2(i, j, k), gphi.d3(i, j, k)};
                const double rho_at1 =
                    density(bg.gas, z0 + xi, {u0 + zeta[0], zeta[1], zeta[2]});
                out(i, j, k) = (rho_at1 - rho_at0) - (b(i, j, k) - bg.b0) -
                               base.h1[i] * xi - base.h2[i] * zeta[0];
            }
    }
    return out;
}

CoefficientSet assemble_set(const BackgroundSolution& bg, const BaseCoefficients& base,
                            const Field3& w_field, const Field3& phi_field, const Field3& b,
                            std::string provenance) {
    CoefficientSet set;
    set.grid = phi_field.grid();
    set.base = base;
    set.a = perturbed(bg, w_field, phi_field);
    set.f1 = source_f1(bg, base, w_field, phi_field);
    set.f2 = source_f2(bg, base, w_field, phi_field, b);
    set.provenance = std::move(provenance);
    return set;
}

AuditReport audit(const CoefficientSet& set, double flux_tol) {
    const DuctGrid& g = set.grid;
    AuditReport rep;
    const double mu1 = set.base.mu1;
    if (flux_tol < 0.0) {
        const double h = std::min(g.h2(), g.h3());
        flux_tol = 10.0 * h * h;
    }

    AuditItem sym{"symmetry max |a_ij - a_ji|", 0.0, {}, false};
    AuditItem unit{"max |a_11 - 1|", 0.0, {}, false};
    AuditItem eig{"cross block spectrum within [mu1/4, 4/mu1]", 0.0, {}, false};
    AuditItem flux{"row-1 wall flux max |(a_1j) . n|", 0.0, {}, false};

    double eig_lo = 1e300, eig_hi = 0.0;
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j)
            for (int k = 0; k < g.n3; ++k) {
                for (int r = 0; r < 3; ++r)
                    for (int c = r + 1; c < 3; ++c) {
                        const double d = std::abs(set.a(r, c)(i, j, k) - set.a(c, r)(i, j, k));
                        if (d > sym.worst) sym = {sym.name, d, {i, j, k}, false};
                    }
                const double ud = std::abs(set.a(0, 0)(i, j, k) - 1.0);
                if (ud > unit.worst) unit = {unit.name, ud, {i, j, k}, false};

                const double m22 = -set.a(1, 1)(i, j, k), m33 = -set.a(2, 2)(i, j, k);
                const double m23 = -0.5 * (set.a(1, 2)(i, j, k) + set.a(2, 1)(i, j, k));
                const double mean = 0.5 * (m22 + m33);
                const double rad = std::sqrt(0.25 * (m22 - m33) * (m22 - m33) + m23 * m23);
                eig_lo = std::min(eig_lo, mean - rad);
                eig_hi = std::max(eig_hi, mean + rad);
            }

    // row-1 flux on the four wall faces (inward normal)
    for (int i = 0; i < g.n1; ++i) {
        for (int k = 0; k < g.n3; ++k)
            for (int jw : {0, g.n2 - 1}) {
                const double v = std::abs(set.a(0, 1)(i, jw, k));
                if (v > flux.worst) flux = {flux.name, v, {i, jw, k}, false};
            }
        for (int j = 0; j < g.n2; ++j)
            for (int kw : {0, g.n3 - 1}) {
                const double v = std::abs(set.a(0, 2)(i, j, kw));
                if (v > flux.worst) flux = {flux.name, v, {i, j, kw}, false};
            }
    }

    sym.pass = sym.worst <= 1e-12;
    unit.pass = unit.worst <= 1e-12;
    eig.worst = std::max(mu1 / 4.0 - eig_lo, eig_hi - 4.0 / mu1);
    eig.pass = eig_lo >= mu1 / 4.0 && eig_hi <= 4.0 / mu1;
    flux.pass = flux.worst <= flux_tol;

    rep.eig_lo = eig_lo;
    rep.eig_hi = eig_hi;
    rep.items = {sym, unit, eig, flux};
    rep.pass = sym.pass && unit.pass && eig.pass && flux.pass;
    return rep;
}

}  // namespace epduct
