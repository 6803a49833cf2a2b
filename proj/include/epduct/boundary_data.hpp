#pragma once

#include <string>
#include <vector>

#include "epduct/background.hpp"
#include "epduct/grid.hpp"

namespace epduct {

/// The prescribed data of Problem 1: ion density b on Omega_L, entrance
/// velocity/field traces on Gamma_0, exit potential on Gamma_L. Background
/// reference values are frozen at construction so the perturbation traces
/// g1, g2, Psi_ex are well defined.
struct BoundaryData {
    DuctGrid grid;
    Field3 b;
    Field2 u_en, e_en, phi_ex;
    double b0 = 0.0;
    double u0_ref = 0.0;       // background u(0)
    double e0_ref = 0.0;       // background E(0)
    double phi0_exit = 0.0;    // background Phi(L)

    Field2 g1() const;       // u_en - u0
    Field2 g2() const;       // E_en - E0
    Field2 psi_ex() const;   // Phi_ex - Phi0(L)
};

struct SigmaReport {
    double sigma = 0.0;
    double b_c2 = 0.0, u_en_c3 = 0.0, e_en_c4 = 0.0, phi_ex_c4 = 0.0;
};

/// Smallness gauge sigma(b, u_en, E_en, Phi_ex): discrete C^k proxies of the
/// four perturbations, summed.
SigmaReport sigma(const BoundaryData& data);

struct CompatItem {
    std::string name;
    double residual = 0.0;
};

struct CompatReport {
    bool pass = false;
    double tol = 0.0;
    double worst = 0.0;
    std::vector<CompatItem> items;
};

/// One-sided normal-derivative checks of the compatibility conditions:
/// d_n b on Gamma_w; d_n u_en and d_n^k E_en (k = 1,3) on the edges of
/// Gamma_0; d_n^k Phi_ex (k = 1,3) on the edges of Gamma_L. tol < 0 selects
/// 10 h^2 with h the cross-section spacing.
CompatReport validate_compatibility(const BoundaryData& data, double tol = -1.0);

/// One cosine-mode perturbation of a boundary datum. For the volumetric b
/// field, j1 modulates along the duct as cos(j1 pi x1 / L).
struct SyntheticMode {
    enum class Target { B, UEn, EEn, PhiEx };
    Target target = Target::UEn;
    int k = 0, l = 0;
    double amplitude = 0.0;
    int j1 = 0;
    bool sine = false;  // rejected: sine modes violate the wall conditions
};

/// Background traces plus Neumann cosine modes; compatibility holds by
/// construction.
BoundaryData generate_synthetic(const std::vector<SyntheticMode>& modes,
                                const BackgroundSolution& bg, const DuctGrid& grid);

/// Load the four data files named by a JSON manifest (CSV, one per datum).
BoundaryData load_boundary_data(const std::string& manifest_path,
                                const BackgroundSolution& bg, const DuctGrid& grid);

/// Homogenization shift for the electric-potential perturbation:
/// S(x) = (x1 - L) g2(x2,x3) + Psi_ex(x2,x3), so that Psi~ = Psi - S has
/// homogeneous conditions on Gamma_0, Gamma_L and Gamma_w.
struct PsiShift {
    Field3 s;
    Field2 g2, psi_ex;
};
PsiShift homogenize_psi(const BoundaryData& data);

}  // namespace epduct
