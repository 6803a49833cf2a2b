#include "epduct/nonlinear.hpp"

#include <cmath>
#include <sstream>

#include "epduct/extension.hpp"

namespace epduct {

Membership membership(const Field3& phi, const Field3& w, double epsilon, double slip_tol) {
    const auto& g = phi.grid();
    if (slip_tol < 0.0) {
        const double h = std::min(g.h2(), g.h3());
        slip_tol = 10.0 * h * h;
    }
    Membership m;
    m.norm_phi = sobolev4_proxy(phi);
    m.norm_w = sobolev4_proxy(w);
    m.slip_phi = wall_normal_residual(phi);
    m.slip_w = wall_normal_residual(w);
    m.member = m.norm_phi <= epsilon && m.norm_w <= epsilon && m.slip_phi <= slip_tol &&
               m.slip_w <= slip_tol;
    return m;
}

IterationState zero_state(const DuctGrid& grid) {
    IterationState s;
    s.phi = Field3(grid);
    s.cap_w = Field3(grid);
    return s;
}

namespace {

// Cross-section Laplacian of a Field2 (one-sided closures at the edges).
Field2 lap2d(const Field2& f) {
    Field2 out(f.n2(), f.n3());
    auto second = [](const Field2& q, int axis) {
        // reuse two first-derivative passes; adequate at O(h^2) in the interior
        return q.deriv(axis).deriv(axis);
    };
    const Field2 d22 = second(f, 0), d33 = second(f, 1);
    for (int j = 0; j < f.n2(); ++j)
        for (int k = 0; k < f.n3(); ++k) out(j, k) = d22(j, k) + d33(j, k);
    return out;
}

double regime_margin_of(const Field3& psi, const Field3& cap_psi,
                        const BackgroundSolution& bg) {
    const auto& g = psi.grid();
    const Field3 p1 = psi.deriv(0), p2 = psi.deriv(1), p3 = psi.deriv(2);
    double m = 1e300;
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j)
            for (int k = 0; k < g.n3; ++k) {
                const double q1 = bg.u[i] + p1(i, j, k);
                const Vec3 q{q1, p2(i, j, k), p3(i, j, k)};
                const double c2 =
                    sound_speed_sq(bg.gas, bg.cap_phi0[i] + cap_psi(i, j, k), q);
                m = std::min(m, q1 * q1 - c2);
            }
    return m;
}

}  // namespace

LinearProblem build_linear_problem(const IterationState& state, const BoundaryData& data,
                                   const BackgroundSolution& bg, const BaseCoefficients& base,
                                   const IterationConfig& cfg, Field3* shift_out) {
    const DuctGrid& grid = data.grid;

    // smooth approximation of the iterate pair (kept at fixed radius r)
    Field3 phi_r = state.phi, w_r = state.cap_w;
    if (cfg.r_factor > 0.0) {
        const double r = std::min(cfg.r_factor * grid.h2(), 0.2499);
        phi_r = smooth_field(state.phi, r);
        w_r = smooth_field(state.cap_w, r);
    }

    CoefficientSet set = assemble_set(bg, base, w_r, phi_r, data.b, "picard");

    // homogenize the Psi boundary data: Psi~ = Psi - S absorbs (g2, Psi_ex)
    const PsiShift shift = homogenize_psi(data);
    const Field2 lap_g2 = lap2d(shift.g2), lap_pex = lap2d(shift.psi_ex);
    for (int i = 0; i < grid.n1; ++i) {
        const double x1mL = grid.x1(i) - grid.length;
        for (int j = 0; j < grid.n2; ++j)
            for (int k = 0; k < grid.n3; ++k) {
                const double s = shift.s(i, j, k);
                set.f1(i, j, k) -= base.b1[i] * shift.g2(j, k) + base.b2[i] * s;
                const double lap_s = x1mL * lap_g2(j, k) + lap_pex(j, k);
                set.f2(i, j, k) -= lap_s - base.h1[i] * s;
            }
    }
    if (shift_out) *shift_out = shift.s;
    return LinearProblem{std::move(set), data.g1(), cfg.m_max, cfg.threads, true};
}

IterationState picard_step(const IterationState& state, const BoundaryData& data,
                           const BackgroundSolution& bg, const BaseCoefficients& base,
                           const IterationConfig& cfg, StepInfo* info,
                           std::shared_ptr<LinearProblem>* out_problem,
                           std::shared_ptr<ModalSolution>* out_solution) {
    Field3 shift;
    auto pb = std::make_shared<LinearProblem>(
        build_linear_problem(state, data, bg, base, cfg, &shift));
    auto sol = std::make_shared<ModalSolution>(solve(*pb));

    IterationState next;
    next.phi = sol->psi;
    next.cap_w = sol->cap_psi;
    next.cap_w += shift;
    if (cfg.under_relaxation != 1.0) {
        const double ur = cfg.under_relaxation;
        for (std::size_t t = 0; t < next.phi.data().size(); ++t) {
            next.phi.data()[t] = (1.0 - ur) * state.phi.data()[t] + ur * next.phi.data()[t];
            next.cap_w.data()[t] =
                (1.0 - ur) * state.cap_w.data()[t] + ur * next.cap_w.data()[t];
        }
    }

    Field3 dphi = next.phi, dw = next.cap_w;
    dphi -= state.phi;
    dw -= state.cap_w;
    const double step_diff = l2_norm(dphi) + l2_norm(dw);

    next.norm_phi = sobolev4_proxy(next.phi);
    next.norm_w = sobolev4_proxy(next.cap_w);
    next.step_diffs = state.step_diffs;
    next.step_diffs.push_back(step_diff);
    next.lin_residuals = state.lin_residuals;
    next.lin_residuals.push_back(sol->residual.l2_eq1 + sol->residual.l2_eq2);
    next.iter = state.iter + 1;
    if (out_problem) *out_problem = pb;
    if (out_solution) *out_solution = sol;

    if (std::max(next.norm_phi, next.norm_w) > cfg.epsilon) {
        std::ostringstream os;
        os << "picard_step: iterate left the iteration set (norms " << next.norm_phi << ", "
           << next.norm_w << " vs epsilon " << cfg.epsilon
           << "); shrink the data smallness sigma";
        throw SolverError(os.str());
    }

    if (info) {
        info->step_diff = step_diff;
        info->lin_residual = next.lin_residuals.back();
        info->norm_phi = next.norm_phi;
        info->norm_w = next.norm_w;
        info->regime_margin = regime_margin_of(next.phi, next.cap_w, bg);
    }
    return next;
}

NonlinearResiduals nonlinear_residuals(const Field3& psi, const Field3& cap_psi,
                                       const BackgroundSolution& bg, const Field3& b) {
    const auto& g = psi.grid();
    const Field3 p1 = psi.deriv(0), p2 = psi.deriv(1), p3 = psi.deriv(2);
    const Field3 c1 = cap_psi.deriv(0), c2 = cap_psi.deriv(1), c3 = cap_psi.deriv(2);
    const Field3 p11 = psi.deriv2(0), p22 = psi.deriv2(1), p33 = psi.deriv2(2);
    const Field3 p12 = p1.deriv(1), p13 = p1.deriv(2), p23 = p2.deriv(2);
    const Field3 cap_lap1 = cap_psi.deriv2(0), cap_lap2 = cap_psi.deriv2(1),
                 cap_lap3 = cap_psi.deriv2(2);

    // conservative flux rho * grad(phi0 + psi)
    Field3 flux1(g), flux2(g), flux3(g);
    double margin = 1e300;
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j)
            for (int k = 0; k < g.n3; ++k) {
                const double z = bg.cap_phi0[i] + cap_psi(i, j, k);
                const Vec3 q{bg.u[i] + p1(i, j, k), p2(i, j, k), p3(i, j, k)};
                const double rho = density(bg.gas, z, q);
                flux1(i, j, k) = rho * q[0];
                flux2(i, j, k) = rho * q[1];
                flux3(i, j, k) = rho * q[2];
                const double c2s = sound_speed_sq(bg.gas, z, q);
                margin = std::min(margin, q[0] * q[0] - c2s);
            }
    const Field3 df1 = flux1.deriv(0), df2 = flux2.deriv(1), df3 = flux3.deriv(2);

    const auto w1 = trapezoid_weights(g.n1, g.h1());
    const auto w2 = trapezoid_weights(g.n2, g.h2());
    const auto w3 = trapezoid_weights(g.n3, g.h3());

    double sq_div = 0.0, sq_poi = 0.0, sq_nod = 0.0;
    for (int i = 1; i < g.n1 - 1; ++i)
        for (int j = 1; j < g.n2 - 1; ++j)
            for (int k = 1; k < g.n3 - 1; ++k) {
                const double wq = w1[i] * w2[j] * w3[k];
                const double z = bg.cap_phi0[i] + cap_psi(i, j, k);
                const Vec3 q{bg.u[i] + p1(i, j, k), p2(i, j, k), p3(i, j, k)};
                const double rho = density(bg.gas, z, q);

                const double rdiv = df1(i, j, k) + df2(i, j, k) + df3(i, j, k);
                sq_div += wq * rdiv * rdiv;

                // Delta Phi = E'(x1) + Delta Psi, with E' from the ODE
                const double rpoi = bg.de[i] + cap_lap1(i, j, k) + cap_lap2(i, j, k) +
                                    cap_lap3(i, j, k) - rho + b(i, j, k);
                sq_poi += wq * rpoi * rpoi;

                // nondivergence form: sum A_ij d_ij phi + B, d11 phi0 = u'
                const Vec3 p{bg.e[i] + c1(i, j, k), c2(i, j, k), c3(i, j, k)};
                const Mat3 A = coeff_A(bg.gas, z, q);
                const double d2phi[3][3] = {
                    {bg.du[i] + p11(i, j, k), p12(i, j, k), p13(i, j, k)},
                    {p12(i, j, k), p22(i, j, k), p23(i, j, k)},
                    {p13(i, j, k), p23(i, j, k), p33(i, j, k)}};
                double rnod = coeff_B(bg.gas, z, p, q);
                for (int r = 0; r < 3; ++r)
                    for (int c = 0; c < 3; ++c) rnod += A[r][c] * d2phi[r][c];
                sq_nod += wq * rnod * rnod;
            }

    NonlinearResiduals out;
    out.div_form = std::sqrt(sq_div);
    out.poisson = std::sqrt(sq_poi);
    out.nondiv_form = std::sqrt(sq_nod);
    out.supersonic_margin = margin;
    return out;
}

NonlinearResult solve_nonlinear(const BoundaryData& data, const BackgroundSolution& bg,
                                const BaseCoefficients& base, const IterationConfig& cfg,
                                const IterLogger& log) {
    const SigmaReport sig = sigma(data);
    if (sig.sigma > cfg.sigma_bar) {
        std::ostringstream os;
        os << "solve_nonlinear: sigma(data) = " << sig.sigma << " exceeds sigma_bar = "
           << cfg.sigma_bar;
        throw ConfigError(os.str());
    }

    double weight_len = 0.0;
    if (cfg.check_weight) {
        const EnergyWeight wgt = synthesize_weight(base, data.grid.length);
        weight_len = wgt.feasible_length;
        if (!wgt.feasible) {
            std::ostringstream os;
            os << "solve_nonlinear: no feasible energy weight for L = " << data.grid.length
               << " (empirical L1* = " << wgt.feasible_length
               << "); shorten the duct or rerun the weight command";
            throw WeightInfeasibleError(os.str());
        }
    }

    IterationState state = zero_state(data.grid);
    bool converged = false;
    StepInfo info;
    std::shared_ptr<LinearProblem> last_pb;
    std::shared_ptr<ModalSolution> last_sol;
    while (state.iter < cfg.max_iter) {
        state = picard_step(state, data, bg, base, cfg, &info, &last_pb, &last_sol);
        if (log) log(state.iter, info);
        if (info.step_diff < cfg.contraction_tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "solve_nonlinear: no contraction within " << cfg.max_iter
           << " iterations (last step " << info.step_diff << ")";
        throw NonContractionError(os.str());
    }

    NonlinearResult out;
    out.psi = state.phi;
    out.cap_psi = state.cap_w;
    out.last_problem = last_pb;
    out.last_solution = last_sol;
    auto& rep = out.report;
    rep.converged = true;
    rep.iterations = state.iter;
    rep.sigma = sig.sigma;
    rep.final_step = state.step_diffs.back();
    rep.weight_feasible_length = weight_len;
    if (cfg.check_weight && last_pb && last_sol) {
        const EnergyWeight wgt = synthesize_weight(base, data.grid.length);
        rep.lambda0 = energy_identity(*last_sol, *last_pb, wgt).lambda0;
    }

    // geometric decay ratio over the recorded steps
    double q = 0.0;
    for (std::size_t i = 1; i < state.step_diffs.size(); ++i) {
        if (state.step_diffs[i - 1] > 0.0)
            q = std::max(q, state.step_diffs[i] / state.step_diffs[i - 1]);
    }
    rep.q_fit = q;

    const NonlinearResiduals res = nonlinear_residuals(out.psi, out.cap_psi, bg, data.b);
    rep.res_div_form = res.div_form;
    rep.res_poisson = res.poisson;
    rep.res_nondiv_form = res.nondiv_form;
    rep.supersonic_margin = res.supersonic_margin;

    rep.norm_psi = h1_norm(out.psi);
    rep.norm_cap = h1_norm(out.cap_psi);
    rep.ratio = sig.sigma > 0.0 ? (rep.norm_psi + rep.norm_cap) / sig.sigma : 0.0;
    return out;
}

}  // namespace epduct
