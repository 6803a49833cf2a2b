#pragma once

#include <array>

#include "epduct/grid.hpp"

namespace epduct {

/// Weights of the five-point reflection rule; the unique solution of
/// sum_k c_k (-1/k)^m = 1 for m = 0..4.
struct ExtensionWeights {
    std::array<double, 5> c;
};

/// Solves the 5x5 Vandermonde system in exact integer arithmetic (Cramer on
/// the column-scaled integer form). Returns (15, -640, 3645, -6144, 3125).
ExtensionWeights solve_weights();

/// Scalar samples on a uniform box grid with arbitrary origin; the carrier
/// for wall-extended slabs.
struct ExtendedField {
    std::array<int, 3> n{0, 0, 0};
    std::array<double, 3> x0{0.0, 0.0, 0.0};
    std::array<double, 3> h{0.0, 0.0, 0.0};
    std::vector<double> v;

    std::size_t idx(int i, int j, int k) const {
        return (std::size_t(i) * n[1] + j) * n[2] + k;
    }
    double coord(int axis, int i) const { return x0[axis] + h[axis] * i; }
};

ExtendedField to_extended(const Field3& f);

enum class ExtensionKind {
    Quintic,  // five-point reflection, derivative matching through order 4
    Even      // plain even reflection (used for the source terms)
};

/// Extend across both ends of `axis` by `margin_nodes` nodes. Off-grid
/// reflection samples are evaluated by 6-point (quintic) Lagrange
/// interpolation along the axis; the even variant lands on grid nodes.
ExtendedField extend(const ExtendedField& f, int axis, int margin_nodes,
                     ExtensionKind kind = ExtensionKind::Quintic);

/// Spec'd single-axis form: enlarge the cross-section slab to |x_axis| < 3/2.
/// axis is 1 (x2) or 2 (x3).
ExtendedField extend(const Field3& f, int axis, ExtensionKind kind = ExtensionKind::Quintic);

/// Radially symmetric bump exp(-1/(1-|x/r|^2)), unit discrete mass, support
/// radius r in (0, 1/4).
struct MollifierSpec {
    double r = 0.0;
    void validate() const;
};

/// Discrete convolution with the mollifier, restricted to the target grid.
/// The extended field must cover the target plus the kernel support.
Field3 mollify(const ExtendedField& f, const MollifierSpec& spec, const DuctGrid& target);

/// extend (x2, x3 across the walls, then x1 across both ends) + mollify.
Field3 smooth_field(const Field3& f, double r, ExtensionKind kind = ExtensionKind::Quintic);

/// Even extension + mollification of the source pair, preserving the wall
/// Neumann condition.
std::pair<Field3, Field3> smooth_sources(const Field3& f1, const Field3& f2,
                                         const MollifierSpec& spec);

}  // namespace epduct
