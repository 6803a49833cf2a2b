#pragma once

#include <string>

#include "epduct/background.hpp"
#include "epduct/boundary_data.hpp"
#include "epduct/grid.hpp"

namespace epduct {

/// Coefficients of the linearization frozen at the background: all are
/// functions of x1 alone. a22 == a33 and a11 == 1.
struct BaseCoefficients {
    GasLaw gas;
    std::vector<double> x1;
    std::vector<double> a22;          // = a33; a11 is identically 1
    std::vector<double> da22;         // d a22 / d x1, via the ODE chain rule
    std::vector<double> a1, b1, b2;   // (d_q1, d_p1, d_z) B at the background
    std::vector<double> h1, h2;       // (d_z, d_q1) rho~ at the background
    double mu1 = 0.0;                 // hyperbolicity bound, in (0, 1)

    int n() const { return int(x1.size()); }
};

BaseCoefficients base_coefficients(const BackgroundSolution& bg);

/// Full symmetric coefficient matrix field a_ij(W, grad phi). All nine
/// components are stored so the audit can detect corrupted symmetry.
struct SymTensorField {
    DuctGrid grid;
    std::array<Field3, 9> comp;

    Field3& operator()(int i, int j) { return comp[i * 3 + j]; }
    const Field3& operator()(int i, int j) const { return comp[i * 3 + j]; }
};

/// Pointwise A_ij(W + Phi0, grad phi + grad phi0); gradients of the grid
/// fields by centered differences. Reports the offending node on vacuum or
/// sonic degeneracy.
SymTensorField perturbed(const BackgroundSolution& bg, const Field3& w_field,
                         const Field3& phi_field);

/// f1 = -[B(Phi0 + t xi, grad Phi0 + t eta, grad phi0 + t zeta)]_{t=0}^{1}
///      + a1_bar zeta_1 + b1_bar eta_1 + b2_bar xi,
/// with (xi, eta, zeta) = (W, grad W, grad phi).
Field3 source_f1(const BackgroundSolution& bg, const BaseCoefficients& base,
                 const Field3& w_field, const Field3& phi_field);

/// f2 = [rho~(Phi0 + t xi, grad phi0 + t zeta)]_{t=0}^{1} - (b - b0)
///      - h1_bar xi - h2_bar zeta_1.
Field3 source_f2(const BackgroundSolution& bg, const BaseCoefficients& base,
                 const Field3& w_field, const Field3& phi_field, const Field3& b);

/// Frozen coefficients plus sources for one linear solve.
struct CoefficientSet {
    DuctGrid grid;
    BaseCoefficients base;
    SymTensorField a;
    Field3 f1, f2;
    std::string provenance;
};

CoefficientSet assemble_set(const BackgroundSolution& bg, const BaseCoefficients& base,
                            const Field3& w_field, const Field3& phi_field, const Field3& b,
                            std::string provenance = {});

struct AuditItem {
    std::string name;
    double worst = 0.0;
    std::array<int, 3> node{0, 0, 0};
    bool pass = false;
};

struct AuditReport {
    bool pass = false;
    double eig_lo = 0.0, eig_hi = 0.0;  // spectrum range of -[a_ij]_{2..3}
    std::vector<AuditItem> items;
};

/// Structural checks: exact symmetry, a11 == 1, eigenvalues of the negative
/// cross-section block within [mu1/4, 4/mu1], and vanishing row-1 wall flux.
AuditReport audit(const CoefficientSet& set, double flux_tol = -1.0);

}  // namespace epduct
