#pragma once

#include <functional>
#include <optional>

#include "epduct/energy.hpp"

namespace epduct {

struct WeightInfeasibleError : SolverError {
    using SolverError::SolverError;
};

struct NonContractionError : SolverError {
    using SolverError::SolverError;
};

struct IterationConfig {
    double epsilon = 1e-2;          // iteration-set radius
    double sigma_bar = 1e-3;        // admissible data smallness
    int max_iter = 30;
    double contraction_tol = 1e-12; // successive-difference stopping norm
    double residual_tol = 1e-6;     // nonlinear residual acceptance
    double under_relaxation = 1.0;  // 1 = plain Picard
    double r_factor = 2.0;          // mollification radius in cross-grid units (0 disables)
    int m_max = 8;
    int threads = 0;
    bool check_weight = true;       // require a feasible energy weight for L
};

struct Membership {
    bool member = false;
    double norm_phi = 0.0, norm_w = 0.0;  // Sobolev-4 proxies
    double slip_phi = 0.0, slip_w = 0.0;  // wall-normal residuals
};

/// Membership in the iteration set J_{eps,L}: Sobolev-4 proxy of each field
/// below eps and wall slip below tolerance.
Membership membership(const Field3& phi, const Field3& w, double epsilon,
                      double slip_tol = -1.0);

/// Current iterate (phi, W) with its norms and convergence history.
struct IterationState {
    Field3 phi, cap_w;
    double norm_phi = 0.0, norm_w = 0.0;
    std::vector<double> step_diffs;
    std::vector<double> lin_residuals;
    int iter = 0;
};

IterationState zero_state(const DuctGrid& grid);

struct StepInfo {
    double step_diff = 0.0;
    double lin_residual = 0.0;    // interior residual of the linear solve
    double regime_margin = 0.0;   // min (d1 phi)^2 - c^2 over the grid
    double norm_phi = 0.0, norm_w = 0.0;
};

/// The linear problem associated with an iterate: smooth the pair (radius
/// r_factor * h2), freeze a_ij(W, grad phi) and the sources f1, f2, then
/// absorb the homogenization shift into them. shift_out receives S.
LinearProblem build_linear_problem(const IterationState& state, const BoundaryData& data,
                                   const BackgroundSolution& bg, const BaseCoefficients& base,
                                   const IterationConfig& cfg, Field3* shift_out = nullptr);

/// One Picard step: solve the associated linear problem, add the shift back,
/// under-relax. When out_problem/out_solution are given they receive the
/// step's linear problem and modal solution.
IterationState picard_step(const IterationState& state, const BoundaryData& data,
                           const BackgroundSolution& bg, const BaseCoefficients& base,
                           const IterationConfig& cfg, StepInfo* info = nullptr,
                           std::shared_ptr<LinearProblem>* out_problem = nullptr,
                           std::shared_ptr<ModalSolution>* out_solution = nullptr);

struct NonlinearReport {
    bool converged = false;
    int iterations = 0;
    double sigma = 0.0;
    double q_fit = 0.0;            // geometric step-decay ratio
    double final_step = 0.0;
    double lambda0 = 0.0;          // coercivity of the final linear solve
    double res_div_form = 0.0;     // L2 of div(rho grad phi)
    double res_poisson = 0.0;      // L2 of Delta Phi - rho + b
    double res_nondiv_form = 0.0;  // L2 of sum A_ij d_ij phi + B
    double supersonic_margin = 0.0;
    double ratio = 0.0;            // (||psi||_H1 + ||Psi||_H1) / sigma
    double norm_psi = 0.0, norm_cap = 0.0;
    double weight_feasible_length = 0.0;
};

struct NonlinearResult {
    Field3 psi, cap_psi;  // perturbations of (phi0, Phi0)
    NonlinearReport report;
    std::shared_ptr<LinearProblem> last_problem;   // final step's frozen problem
    std::shared_ptr<ModalSolution> last_solution;  // and its modal solution
};

using IterLogger = std::function<void(int iter, const StepInfo&)>;

/// Picard iteration for the full problem, starting from the zero iterate.
/// Verifies the converged pair against both forms of the nonlinear system
/// and the supersonic regime condition.
NonlinearResult solve_nonlinear(const BoundaryData& data, const BackgroundSolution& bg,
                                const BaseCoefficients& base, const IterationConfig& cfg,
                                const IterLogger& log = {});

/// Pointwise nonlinear residuals of (phi0 + psi, Phi0 + Psi): conservative
/// divergence form, Poisson equation, and the nondivergence (A_ij, B) form.
/// Background x1-derivatives come from the stored ODE right-hand sides;
/// perturbation derivatives from FD. L2 norms over the interior.
struct NonlinearResiduals {
    double div_form = 0.0, poisson = 0.0, nondiv_form = 0.0;
    double supersonic_margin = 0.0;
};
NonlinearResiduals nonlinear_residuals(const Field3& psi, const Field3& cap_psi,
                                       const BackgroundSolution& bg, const Field3& b);

}  // namespace epduct
