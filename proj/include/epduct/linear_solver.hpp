#pragma once

#include <memory>

#include "epduct/coefficients.hpp"
#include "epduct/spectral.hpp"

namespace epduct {

/// One linear boundary value problem: frozen coefficients + sources on the
/// grid, entrance slope datum g, and the Galerkin truncation m_max (all
/// cross-section mode pairs with k, l <= m_max are retained).
struct LinearProblem {
    CoefficientSet coeffs;
    Field2 g;
    int m_max = 8;
    int threads = 0;
    bool check_coefficients = true;  // run the structural audit before solving
};

struct BoundaryResiduals {
    double psi_gamma0 = 0.0;        // max |theta_m(0)|
    double dpsi_gamma0 = 0.0;       // max |theta_m'(0) - g_m| (one-sided stencil)
    double dcap_gamma0 = 0.0;       // max |Theta_m'(0)|
    double cap_gammaL = 0.0;        // max |Theta_m(L)|
    double slip_psi = 0.0;          // FD wall-normal residual of psi
    double slip_cap = 0.0;
};

struct ResidualReport {
    double l2_eq1 = 0.0, max_eq1 = 0.0;
    double l2_eq2 = 0.0, max_eq2 = 0.0;
    BoundaryResiduals bc;
    double data_norm = 0.0;   // ||f1|| + ||f2|| + ||g||
    double ratio = 0.0;       // ||psi||_H1 / data_norm (0 when data vanish)
    double g_compat = 0.0;    // d_n g residual on the edge of Gamma_0
};

/// Mode-coefficient functions of the Galerkin expansion plus the
/// reconstructed fields.
struct ModalSolution {
    std::shared_ptr<const CrossSectionBasis> basis;
    std::vector<double> x1;
    Eigen::MatrixXd theta;      // (modes x n1)
    Eigen::MatrixXd cap_theta;  // (modes x n1)
    Field3 psi, cap_psi;
    ResidualReport residual;

    int n1() const { return int(x1.size()); }
    double h1() const { return x1[1] - x1[0]; }

    /// Derivative fields: cross-section derivatives evaluated from the modal
    /// representation (exact), x1 derivatives by 2nd-order stencils on the
    /// mode coefficients.
    Field3 psi_deriv(int axis) const;
    Field3 cap_deriv(int axis) const;
};

/// Assemble and solve the coupled block system for {theta_j, Theta_j}:
/// interior rows are the Galerkin projections of L1 and L2 (pseudospectral
/// in the cross section, centered 2nd-order in x1), boundary rows encode
/// theta(0) = 0, theta'(0) = <g, eta>, Theta'(0) = 0, Theta(L) = 0.
ModalSolution solve(const LinearProblem& problem);

/// Interior and boundary residuals of the discrete solution, evaluated
/// pointwise (modal cross-section derivatives, FD in x1).
ResidualReport residual(const ModalSolution& sol, const LinearProblem& problem);

}  // namespace epduct
