#include "epduct/energy.hpp"

#include <algorithm>
#include <cmath>

namespace epduct {

namespace {
// index of the sample interval containing x
int locate(const std::vector<double>& xs, double x) {
    if (x <= xs.front()) return 0;
    if (x >= xs.back()) return int(xs.size()) - 2;
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    return int(it - xs.begin()) - 1;
}
}  // namespace

double EnergyWeight::eval(double x) const {
    const int i = locate(x1, x);
    const double h = x1[i + 1] - x1[i];
    const double t = (x - x1[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * w[i] + (t3 - 2 * t2 + t) * h * wp[i] +
           (-2 * t3 + 3 * t2) * w[i + 1] + (t3 - t2) * h * wp[i + 1];
}

double EnergyWeight::eval_deriv(double x) const {
    const int i = locate(x1, x);
    const double h = x1[i + 1] - x1[i];
    const double t = (x - x1[i]) / h;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * w[i] + (3 * t2 - 4 * t + 1) * h * wp[i] +
            (-6 * t2 + 6 * t) * w[i + 1] + (3 * t2 - 2 * t) * h * wp[i + 1]) /
           h;
}

double EnergyWeight::min_margin() const {
    double m = 1e300;
    for (std::size_t i = 0; i < x1.size(); ++i)
        m = std::min({m, m_i[i], m_ii[i], m_iii[i]});
    return m;
}

double kappa0(const BaseCoefficients& base) {
    double k = 1e300;
    for (double v : base.h1) k = std::min(k, v);
    if (!(k > 0.0)) throw SolverError("kappa0: inf h1_bar is not positive");
    return k;
}

double q0_at(const BaseCoefficients& base, double kap, int node, double w) {
    const double b1 = base.b1[node], b2 = base.b2[node], h2 = base.h2[node];
    return 4.0 * ((b1 * b1 + b2 * b2 / kap) * w * w + h2 * h2 / kap);
}

namespace {

struct BaseInterp {
    const BaseCoefficients& base;
    double kap;

    // linear interpolation of the sampled coefficient arrays
    double at(const std::vector<double>& v, double x) const {
        const int i = locate(base.x1, x);
        const double t = (x - base.x1[i]) / (base.x1[i + 1] - base.x1[i]);
        return (1.0 - t) * v[i] + t * v[i + 1];
    }

    double q0(double x, double w) const {
        const double b1 = at(base.b1, x), b2 = at(base.b2, x), h2 = at(base.h2, x);
        return 4.0 * ((b1 * b1 + b2 * b2 / kap) * w * w + h2 * h2 / kap);
    }

    // Upper bound on w' from (ii) and (iii), and the policy slope below it.
    double bound(double x, double w) const {
        const double u1 = 2.0 * at(base.a1, x) * w - q0(x, w);
        const double a22 = at(base.a22, x), da22 = at(base.da22, x);
        const double u2 = -da22 / a22 * w;  // a22 < 0 flips the inequality
        return std::min(u1, u2);
    }
};

}  // namespace

EnergyWeight synthesize_weight(const BaseCoefficients& base, double L,
                               const WeightPolicy& policy) {
    if (base.n() < 2) throw ConfigError("synthesize_weight: base coefficients too short");
    if (L > base.x1.back() + 1e-12)
        throw ConfigError("synthesize_weight: L exceeds the sampled coefficient range");
    const double kap = kappa0(base);
    BaseInterp itp{base, kap};

    auto slope = [&](double x, double w) {
        const double b = itp.bound(x, w);
        return b - policy.margin_fraction * std::max(1.0, std::abs(b));
    };

    EnergyWeight out;
    const int nseg = (base.n() - 1) * std::max(1, policy.substeps);
    const double x_end = base.x1.back();
    const double h = x_end / nseg;

    double x = 0.0, w = policy.w0;
    bool dead = false;
    out.feasible_length = x_end;
    for (int s = 0; s <= nseg; ++s) {
        const double wp = slope(x, w);
        const double m2 = itp.at(base.a1, x) * w - 0.5 * wp - 0.5 * itp.q0(x, w);
        const double m3 = 0.5 * (itp.at(base.da22, x) * w + itp.at(base.a22, x) * wp);
        if (!dead && (w <= 1e-10 || m2 <= 0.0 || m3 <= 0.0)) {
            dead = true;
            out.feasible_length = x;
        }
        if (!dead && x <= L + 1e-12) {
            out.x1.push_back(x);
            out.w.push_back(w);
            out.wp.push_back(wp);
            out.m_i.push_back(w);
            out.m_ii.push_back(m2);
            out.m_iii.push_back(m3);
        }
        if (s == nseg || (dead && x > L)) break;
        // RK4 on w' = slope(x, w)
        const double k1 = slope(x, w);
        const double k2 = slope(x + 0.5 * h, w + 0.5 * h * k1);
        const double k3 = slope(x + 0.5 * h, w + 0.5 * h * k2);
        const double k4 = slope(x + h, w + h * k3);
        w += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        x += h;
        if (w <= 0.0 && !dead) {
            dead = true;
            out.feasible_length = x;
        }
        if (dead && x > L) break;
        if (w <= 0.0) w = 0.0;
    }
    out.feasible = !dead || out.feasible_length > L;
    if (!out.feasible) {
        out.x1.clear();
        out.w.clear();
        out.wp.clear();
        out.m_i.clear();
        out.m_ii.clear();
        out.m_iii.clear();
    }
    return out;
}

double reaudit_weight(const EnergyWeight& w, const BaseCoefficients& base, double L,
                      int refine) {
    if (!w.feasible) throw SolverError("reaudit_weight: weight is not feasible");
    const double kap = kappa0(base);
    BaseInterp itp{base, kap};
    const int n = (int(w.x1.size()) - 1) * refine;
    double worst = 1e300;
    for (int i = 0; i <= n; ++i) {
        const double x = std::min(L, w.x1.back()) * i / n;
        const double wv = w.eval(x), wd = w.eval_deriv(x);
        const double m2 = itp.at(base.a1, x) * wv - 0.5 * wd - 0.5 * itp.q0(x, wv);
        const double m3 = 0.5 * (itp.at(base.da22, x) * wv + itp.at(base.a22, x) * wd);
        worst = std::min({worst, wv, m2, m3});
    }
    return worst;
}

namespace {

struct Quad {
    std::vector<double> w1, w2, w3;
    explicit Quad(const DuctGrid& g)
        : w1(trapezoid_weights(g.n1, g.h1())),
          w2(trapezoid_weights(g.n2, g.h2())),
          w3(trapezoid_weights(g.n3, g.h3())) {}
};

}  // namespace

EnergyReport energy_identity(const ModalSolution& sol, const LinearProblem& pb,
                             const EnergyWeight& weight) {
    const DuctGrid& g = pb.coeffs.grid;
    const auto& base = pb.coeffs.base;
    const auto& a = pb.coeffs.a;
    const int n1 = g.n1;
    Quad q(g);

    const Field3 p1 = sol.psi_deriv(0), p2 = sol.psi_deriv(1), p3 = sol.psi_deriv(2);
    const Field3 c1 = sol.cap_deriv(0), c2 = sol.cap_deriv(1), c3 = sol.cap_deriv(2);

    std::vector<double> wv(n1), wd(n1);
    for (int i = 0; i < n1; ++i) {
        wv[i] = weight.eval(g.x1(i));
        wd[i] = weight.eval_deriv(g.x1(i));
    }

    // x1 derivatives of the weighted cross-block coefficients a_ij W
    Field3 aW[2][2], daW[2][2];
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            aW[r][c] = a(r + 1, c + 1);
            for (int i = 0; i < n1; ++i)
                for (int j = 0; j < g.n2; ++j)
                    for (int k = 0; k < g.n3; ++k) aW[r][c](i, j, k) *= wv[i];
            daW[r][c] = aW[r][c].deriv(0);
        }
    // cross-section derivatives of a_i1 and a_ij
    const Field3 d2_a21 = a(1, 0).deriv(1), d3_a31 = a(2, 0).deriv(2);
    const Field3 dj_a2j = a(1, 1).deriv(1), dj_a23 = a(1, 2).deriv(2);
    const Field3 dj_a32 = a(2, 1).deriv(1), dj_a3j = a(2, 2).deriv(2);

    EnergyReport rep;
    double t_gamL = 0.0, t_gam0 = 0.0;
    double t_bulk1 = 0.0;  // (a1 W - W'/2) psi_1^2
    double t_bulk2 = 0.0;  // 1/2 d1(a_ij W) psi_i psi_j
    double t_je_quad = 0.0;   // |grad Psi|^2 + h1 Psi^2
    double t_couple_b = 0.0;  // (b1 Psi_1 + b2 Psi) W psi_1
    double t_couple_h2 = 0.0; // h2 psi_1 Psi
    double t_di_ai1 = 0.0;   // - d_i a_i1 W psi_1^2
    double t_dj_aij = 0.0;   // - d_j a_ij W psi_1 psi_i
    double t_rhs_vol = 0.0;  // f1 W psi_1 - f2 Psi
    double h1_quant = 0.0;

    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < g.n2; ++j)
            for (int k = 0; k < g.n3; ++k) {
                const double wq = q.w1[i] * q.w2[j] * q.w3[k];
                const double s1 = p1(i, j, k), s2 = p2(i, j, k), s3 = p3(i, j, k);
                const double cv = sol.cap_psi(i, j, k);
                t_bulk1 += wq * (base.a1[i] * wv[i] - 0.5 * wd[i]) * s1 * s1;
                const double sjk[2] = {s2, s3};
                for (int r = 0; r < 2; ++r)
                    for (int c = 0; c < 2; ++c)
                        t_bulk2 += wq * 0.5 * daW[r][c](i, j, k) * sjk[r] * sjk[c];
                t_je_quad += wq * (c1(i, j, k) * c1(i, j, k) + c2(i, j, k) * c2(i, j, k) +
                                   c3(i, j, k) * c3(i, j, k) + base.h1[i] * cv * cv);
                t_couple_b += wq * (base.b1[i] * c1(i, j, k) + base.b2[i] * cv) * wv[i] * s1;
                t_couple_h2 += wq * base.h2[i] * s1 * cv;
                t_di_ai1 -= wq * (d2_a21(i, j, k) + d3_a31(i, j, k)) * wv[i] * s1 * s1;
                t_dj_aij -= wq * ((dj_a2j(i, j, k) + dj_a23(i, j, k)) * s2 +
                                  (dj_a32(i, j, k) + dj_a3j(i, j, k)) * s3) *
                            wv[i] * s1;
                t_rhs_vol += wq * (pb.coeffs.f1(i, j, k) * wv[i] * s1 -
                                   pb.coeffs.f2(i, j, k) * cv);
                h1_quant += wq * (s1 * s1 + s2 * s2 + s3 * s3 + c1(i, j, k) * c1(i, j, k) +
                                  c2(i, j, k) * c2(i, j, k) + c3(i, j, k) * c3(i, j, k) +
                                  cv * cv);
            }

    for (int j = 0; j < g.n2; ++j)
        for (int k = 0; k < g.n3; ++k) {
            const double wq = q.w2[j] * q.w3[k];
            const int e = n1 - 1;
            double quad = p1(e, j, k) * p1(e, j, k);
            const double sjk[2] = {p2(e, j, k), p3(e, j, k)};
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    quad -= a(r + 1, c + 1)(e, j, k) * sjk[r] * sjk[c];
            t_gamL += wq * quad * wv[e] / 2.0;
            const double gv = pb.g(j, k);
            t_gam0 += wq * wv[0] * gv * gv / 2.0;
        }

    rep.gamma_l_flux = t_gamL;
    rep.gamma_0_datum = t_gam0;
    rep.i_h = t_gamL - t_gam0 + t_bulk1 + t_bulk2 + t_couple_b + t_di_ai1 + t_dj_aij;
    rep.j_e = t_je_quad + t_couple_h2;
    rep.lhs = t_gamL + t_bulk1 + t_bulk2 + t_je_quad + t_couple_b + t_couple_h2 +
              t_di_ai1 + t_dj_aij;
    rep.rhs = t_gam0 + t_rhs_vol;
    rep.identity_gap = std::abs(rep.lhs - rep.rhs);
    const double scale = std::abs(t_gamL) + std::abs(t_bulk1) + std::abs(t_bulk2) +
                         std::abs(t_je_quad) + std::abs(t_couple_b) + std::abs(t_couple_h2) +
                         std::abs(t_di_ai1) + std::abs(t_dj_aij) + std::abs(rep.rhs);
    rep.identity_gap_rel = scale > 0.0 ? rep.identity_gap / scale : 0.0;
    rep.h1_quantity = h1_quant;
    rep.lambda0 = h1_quant > 0.0 ? rep.lhs / h1_quant : 0.0;
    return rep;
}

double ih_volume_form(const ModalSolution& sol, const LinearProblem& pb,
                      const EnergyWeight& weight) {
    const DuctGrid& g = pb.coeffs.grid;
    const auto& base = pb.coeffs.base;
    const auto& a = pb.coeffs.a;
    Quad q(g);

    const Field3 p1 = sol.psi_deriv(0);
    const Field3 c1 = sol.cap_deriv(0);

    // second derivatives: modal in the cross section, FD in x1
    const auto& basis = *sol.basis;
    const int M = basis.num_modes(), n1 = g.n1;
    const double h = g.h1();

    double acc = 0.0;
    for (int i = 0; i < n1; ++i) {
        const double wv = weight.eval(g.x1(i));
        Eigen::VectorXd th = sol.theta.col(i);
        Eigen::VectorXd thpp(M);
        if (i == 0)
            thpp = (2.0 * sol.theta.col(0) - 5.0 * sol.theta.col(1) + 4.0 * sol.theta.col(2) -
                    sol.theta.col(3)) /
                   (h * h);
        else if (i == n1 - 1)
            thpp = (2.0 * sol.theta.col(n1 - 1) - 5.0 * sol.theta.col(n1 - 2) +
                    4.0 * sol.theta.col(n1 - 3) - sol.theta.col(n1 - 4)) /
                   (h * h);
        else
            thpp = (sol.theta.col(i - 1) - 2.0 * sol.theta.col(i) + sol.theta.col(i + 1)) /
                   (h * h);
        Eigen::VectorXd thp(M);
        if (i == 0)
            thp = (-3.0 * sol.theta.col(0) + 4.0 * sol.theta.col(1) - sol.theta.col(2)) /
                  (2.0 * h);
        else if (i == n1 - 1)
            thp = (3.0 * sol.theta.col(n1 - 1) - 4.0 * sol.theta.col(n1 - 2) +
                   sol.theta.col(n1 - 3)) /
                  (2.0 * h);
        else
            thp = (sol.theta.col(i + 1) - sol.theta.col(i - 1)) / (2.0 * h);

        Eigen::VectorXd t2 = th, t3 = th;
        for (int m = 0; m < M; ++m) {
            t2[m] *= -basis.lam2(m);
            t3[m] *= -basis.lam3(m);
        }
        const Eigen::VectorXd psi11 = basis.eta().transpose() * thpp;
        const Eigen::VectorXd psi22 = basis.eta().transpose() * t2;
        const Eigen::VectorXd psi33 = basis.eta().transpose() * t3;
        const Eigen::VectorXd psi23 = basis.deta23().transpose() * th;
        const Eigen::VectorXd psi12 = basis.deta2().transpose() * thp;
        const Eigen::VectorXd psi13 = basis.deta3().transpose() * thp;

        for (int j = 0; j < g.n2; ++j)
            for (int k = 0; k < g.n3; ++k) {
                const std::size_t p = std::size_t(j) * g.n3 + k;
                const double wq = q.w1[i] * q.w2[j] * q.w3[k];
                const double l1 =
                    psi11[p] + a(1, 1)(i, j, k) * psi22[p] + a(2, 2)(i, j, k) * psi33[p] +
                    (a(1, 2)(i, j, k) + a(2, 1)(i, j, k)) * psi23[p] +
                    (a(0, 1)(i, j, k) + a(1, 0)(i, j, k)) * psi12[p] +
                    (a(0, 2)(i, j, k) + a(2, 0)(i, j, k)) * psi13[p] +
                    base.a1[i] * p1(i, j, k) + base.b1[i] * c1(i, j, k) +
                    base.b2[i] * sol.cap_psi(i, j, k);
                acc += wq * wv * p1(i, j, k) * l1;
            }
    }
    return acc;
}

AprioriReport apriori_check(const ModalSolution& sol, const LinearProblem& pb) {
    AprioriReport rep;
    rep.num = h1_norm(sol.psi) + h1_norm(sol.cap_psi);
    rep.den = l2_norm(pb.g) + l2_norm(pb.coeffs.f1) + l2_norm(pb.coeffs.f2);
    if (rep.den == 0.0) {
        rep.vacuous = rep.num <= 1e-10;
        rep.solver_failure = !rep.vacuous;
        rep.ratio = 0.0;
        return rep;
    }
    rep.ratio = rep.num / rep.den;
    return rep;
}

}  // namespace epduct
