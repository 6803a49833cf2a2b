#pragma once

#include "epduct/energy.hpp"
#include "epduct/nonlinear.hpp"

namespace epduct {

/// A manufactured linear problem together with the exact fields it was
/// generated from: band-limited modal fields satisfying the homogeneous
/// boundary conditions, sources produced by applying the operators.
struct MmsCase {
    LinearProblem problem;
    std::function<double(double, double, double)> psi_exact;
    std::function<double(double, double, double)> cap_exact;
    double amplitude = 1.0;
};

/// Build the manufactured case on the given grid. Modes go up to (3,3).
/// coeff_eps > 0 additionally perturbs a_ij with a slip-compatible
/// (phi, W) pair of that size (sources are then assembled pointwise from
/// the perturbed coefficients).
MmsCase build_mms(const BackgroundSolution& bg, const BaseCoefficients& base,
                  const DuctGrid& grid, int m_max, double amplitude = 1.0,
                  double coeff_eps = 0.0, int threads = 0);

struct MmsErrors {
    double err_psi = 0.0, err_cap = 0.0;  // L2 against the exact fields
};
MmsErrors mms_errors(const MmsCase& mms, const ModalSolution& sol);

struct ConvergenceRow {
    int n1 = 0;
    double err_psi = 0.0, err_cap = 0.0;
    double energy_gap = 0.0;
    double lambda0 = 0.0;
    double ih_dual_gap = 0.0;  // |boundary+bulk form - volume form| of I_H
    double runtime_sec = 0.0;
};

/// Solve the manufactured problem over a sweep of x1 resolutions; when
/// with_energy is set, also evaluate the weighted energy identity per level.
std::vector<ConvergenceRow> mms_convergence(const BackgroundParams& params, double L,
                                            int n2, int n3, int m_max,
                                            const std::vector<int>& n1_list,
                                            bool with_energy, int threads = 0);

/// Observed order between consecutive refinement levels (h halves when n1-1
/// doubles): log2(e_coarse / e_fine).
std::vector<double> observed_orders(const std::vector<double>& errors);

}  // namespace epduct
