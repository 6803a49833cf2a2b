#pragma once

#include "epduct/linear_solver.hpp"

namespace epduct {

/// Positive x1-dependent multiplier making the weighted H1 energy form
/// coercive, together with the per-sample margins of the three feasibility
/// conditions:
///   (i)   w > 0
///   (ii)  a1_bar w - w'/2 - q0(w)/2 > 0
///   (iii) d/dx1 (a22_bar w) / 2 > 0.
struct EnergyWeight {
    std::vector<double> x1, w, wp;
    std::vector<double> m_i, m_ii, m_iii;
    bool feasible = false;
    double feasible_length = 0.0;  // empirical L1*: where the policy dies

    double eval(double x) const;        // cubic Hermite between samples
    double eval_deriv(double x) const;
    double min_margin() const;
};

/// kappa0 = inf over the sampled interval of h1_bar; must be positive.
double kappa0(const BaseCoefficients& base);

/// q0(W) = 4 ((b1_bar^2 + b2_bar^2/kappa0) W^2 + h2_bar^2/kappa0) at node i.
double q0_at(const BaseCoefficients& base, double kap, int node, double w);

struct WeightPolicy {
    double w0 = 1.0;              // start value
    double margin_fraction = 0.1;  // backed off from the feasible slope bound
    int substeps = 4;              // refinement of the base sampling for the march
};

/// Forward integration of w' = (feasible slope bound) - margin. Conditions
/// (ii) and (iii) both rewrite as upper bounds on w' (dividing (iii) by
/// a22_bar < 0 flips it), so the policy tracks their minimum with a relative
/// safety margin. The march continues past L to locate the empirical L1*.
EnergyWeight synthesize_weight(const BaseCoefficients& base, double L,
                               const WeightPolicy& policy = {});

/// Re-evaluate the margins on a `refine`-times finer grid via the Hermite
/// interpolant; returns the minimum margin over [0, L].
double reaudit_weight(const EnergyWeight& w, const BaseCoefficients& base, double L,
                      int refine);

struct EnergyReport {
    double i_h = 0.0;       // boundary+bulk form of int W psi_1 L1(psi, Psi)
    double j_e = 0.0;       // int |grad Psi|^2 + h1 Psi^2 + h2 psi_1 Psi
    double lhs = 0.0, rhs = 0.0;
    double gamma_l_flux = 0.0;  // exit boundary term
    double gamma_0_datum = 0.0;
    double identity_gap = 0.0;
    double identity_gap_rel = 0.0;
    double lambda0 = 0.0;   // LHS / int |grad psi|^2 + |grad Psi|^2 + Psi^2
    double h1_quantity = 0.0;
};

/// Evaluates every term of the weighted energy identity for a computed
/// solution: LHS = Gamma_L flux + interior terms + J_E pieces, RHS =
/// Gamma_0 datum + int f1 W psi_1 - f2 Psi. identity_gap is a pure
/// discretization artifact and must vanish under refinement.
EnergyReport energy_identity(const ModalSolution& sol, const LinearProblem& pb,
                             const EnergyWeight& weight);

/// The same weighted hyperbolic integral assembled the other way:
/// int W psi_1 L1(psi, Psi) evaluated directly. Agreement with
/// EnergyReport::i_h is the module's core integration-by-parts check.
double ih_volume_form(const ModalSolution& sol, const LinearProblem& pb,
                      const EnergyWeight& weight);

struct AprioriReport {
    double ratio = 0.0;  // (||psi||_H1 + ||Psi||_H1) / (||g|| + ||f1|| + ||f2||)
    double num = 0.0, den = 0.0;
    bool vacuous = false;         // zero data, zero solution
    bool solver_failure = false;  // zero data but a nonzero solution
};
AprioriReport apriori_check(const ModalSolution& sol, const LinearProblem& pb);

}  // namespace epduct
