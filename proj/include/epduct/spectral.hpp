#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "epduct/grid.hpp"

namespace epduct {

/// Neumann Laplacian eigenbasis on the square cross section D = (-1,1)^2:
/// eta_{k,l} = n_k n_l cos(k pi (x2+1)/2) cos(l pi (x3+1)/2), omega =
/// (pi/2)^2 (k^2 + l^2). Truncation keeps all pairs with k, l <= m_max,
/// ordered by omega then lexicographically.
///
/// Inner products use composite trapezoid weights on the uniform collocation
/// grid; for the retained cosine pairs those sums are exact (discrete cosine
/// orthogonality), which is what the Gram-matrix invariant checks.
class CrossSectionBasis {
  public:
    CrossSectionBasis() = default;
    CrossSectionBasis(int m_max, int n2, int n3);

    int m_max() const { return m_max_; }
    int n2() const { return n2_; }
    int n3() const { return n3_; }
    int num_modes() const { return int(modes_.size()); }
    int num_points() const { return n2_ * n3_; }
    const std::vector<std::pair<int, int>>& modes() const { return modes_; }
    double omega(int m) const { return omega_[m]; }
    const std::vector<double>& omegas() const { return omega_; }

    /// Mode-value tables, (modes x points), point index j*n3 + k.
    const Eigen::MatrixXd& eta() const { return eta_; }      // eta
    const Eigen::MatrixXd& deta2() const { return deta2_; }  // d eta / d x2
    const Eigen::MatrixXd& deta3() const { return deta3_; }  // d eta / d x3
    const Eigen::MatrixXd& deta23() const { return deta23_; }
    double lam2(int m) const { return lam2_[m]; }  // (k pi/2)^2, so d22 eta = -lam2 eta
    double lam3(int m) const { return lam3_[m]; }

    /// Quadrature weight per collocation point.
    const Eigen::VectorXd& weights() const { return wq_; }

    Eigen::VectorXd project(const Field2& f) const;
    Eigen::VectorXd project(const Eigen::VectorXd& point_values) const;
    Field2 reconstruct(const Eigen::VectorXd& coeffs) const;

    /// Gram matrix of the first `count` modes under the stored quadrature.
    Eigen::MatrixXd gram(int count) const;

  private:
    int m_max_ = 0, n2_ = 0, n3_ = 0;
    std::vector<std::pair<int, int>> modes_;
    std::vector<double> omega_, lam2_, lam3_;
    Eigen::MatrixXd eta_, deta2_, deta3_, deta23_;
    Eigen::VectorXd wq_;
};

/// Closed-form eigenpair: omega and a callable eta(x2, x3), unit L2(D) norm.
std::pair<double, std::function<double(double, double)>> eigenpair(int k, int l);

}  // namespace epduct
