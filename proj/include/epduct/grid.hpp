#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "epduct/common.hpp"

namespace epduct {

/// Tensor-product grid over Omega_L = (0,L) x (-1,1) x (-1,1), node-based
/// with uniform spacing per axis. Storage order is x3-fastest.
struct DuctGrid {
    int n1 = 0, n2 = 0, n3 = 0;
    double length = 0.0;

    DuctGrid() = default;
    DuctGrid(int n1_, int n2_, int n3_, double length_);

    double h1() const { return length / (n1 - 1); }
    double h2() const { return 2.0 / (n2 - 1); }
    double h3() const { return 2.0 / (n3 - 1); }
    double h(int axis) const { return axis == 0 ? h1() : (axis == 1 ? h2() : h3()); }
    double x1(int i) const { return length * i / (n1 - 1); }
    double x2(int j) const { return -1.0 + 2.0 * j / (n2 - 1); }
    double x3(int k) const { return -1.0 + 2.0 * k / (n3 - 1); }
    std::size_t size() const { return std::size_t(n1) * n2 * n3; }
    std::size_t idx(int i, int j, int k) const {
        return (std::size_t(i) * n2 + j) * n3 + k;
    }
    std::vector<double> x1_nodes() const;

    bool operator==(const DuctGrid&) const = default;
};

/// Scalar samples on a DuctGrid. Carrier for psi, Psi, phi, W, b, f1, f2.
class Field3 {
  public:
    Field3() = default;
    explicit Field3(const DuctGrid& g, double fill = 0.0) : grid_(g), v_(g.size(), fill) {}

    const DuctGrid& grid() const { return grid_; }
    double& operator()(int i, int j, int k) { return v_[grid_.idx(i, j, k)]; }
    double operator()(int i, int j, int k) const { return v_[grid_.idx(i, j, k)]; }
    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }
    bool empty() const { return v_.empty(); }

    /// Centered 2nd-order derivative along axis (0,1,2), one-sided 2nd-order
    /// closures at the boundary nodes.
    Field3 deriv(int axis) const;

    /// Second derivative along one axis (3-point centered, 4-point one-sided
    /// closures).
    Field3 deriv2(int axis) const;

    static Field3 from_fn(const DuctGrid& g,
                          const std::function<double(double, double, double)>& f);

    Field3& operator+=(const Field3& o);
    Field3& operator-=(const Field3& o);
    Field3& operator*=(double s);

  private:
    DuctGrid grid_;
    std::vector<double> v_;
};

/// Scalar samples on the cross section D = (-1,1)^2, x3-fastest.
class Field2 {
  public:
    Field2() = default;
    Field2(int n2, int n3, double fill = 0.0) : n2_(n2), n3_(n3), v_(std::size_t(n2) * n3, fill) {}

    int n2() const { return n2_; }
    int n3() const { return n3_; }
    double h2() const { return 2.0 / (n2_ - 1); }
    double h3() const { return 2.0 / (n3_ - 1); }
    double x2(int j) const { return -1.0 + 2.0 * j / (n2_ - 1); }
    double x3(int k) const { return -1.0 + 2.0 * k / (n3_ - 1); }
    double& operator()(int j, int k) { return v_[std::size_t(j) * n3_ + k]; }
    double operator()(int j, int k) const { return v_[std::size_t(j) * n3_ + k]; }
    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }
    bool empty() const { return v_.empty(); }

    Field2 deriv(int axis) const;  // axis 0 -> x2, 1 -> x3

    static Field2 from_fn(int n2, int n3, const std::function<double(double, double)>& f);

    Field2& operator+=(const Field2& o);
    Field2& operator-=(const Field2& o);
    Field2& operator*=(double s);

  private:
    int n2_ = 0, n3_ = 0;
    std::vector<double> v_;
};

/// Trapezoid weights h*[1/2, 1, ..., 1, 1/2] for n nodes of spacing h.
std::vector<double> trapezoid_weights(int n, double h);

double integrate(const Field3& f);                    // over Omega_L
double integrate_cross(const Field2& f);              // over D
double l2_norm(const Field3& f);
double l2_norm(const Field2& f);
double max_abs(const Field3& f);
double max_abs(const Field2& f);

/// Discrete H1 proxy: sqrt(||f||^2 + sum_i ||d_i f||^2).
double h1_norm(const Field3& f);

/// Discrete Sobolev-4 proxy: L2 norms of all FD partials up to total order 4.
double sobolev4_proxy(const Field3& f);

/// Discrete C^k proxy: sum over |alpha| <= k of max |D^alpha f|.
double ck_norm(const Field3& f, int k);
double ck_norm(const Field2& f, int k);

/// Extract the cross-section slice at x1 node i.
Field2 slice_at(const Field3& f, int i);

/// Max |d_n f| over the wall faces Gamma_w (one-sided 2nd-order stencils).
double wall_normal_residual(const Field3& f);
double boundary_normal_residual(const Field2& f, int order);  // on dD, derivative order 1 or 3

}  // namespace epduct
