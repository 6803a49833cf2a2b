#include "epduct/grid.hpp"

#include <algorithm>
#include <cmath>

namespace epduct {

DuctGrid::DuctGrid(int n1_, int n2_, int n3_, double length_)
    : n1(n1_), n2(n2_), n3(n3_), length(length_) {
    if (n1 < 3 || n2 < 5 || n3 < 5)
        throw ConfigError("DuctGrid: need n1 >= 3 and n2, n3 >= 5");
    if (length <= 0.0) throw ConfigError("DuctGrid: length must be > 0");
}

std::vector<double> DuctGrid::x1_nodes() const {
    std::vector<double> xs(n1);
    for (int i = 0; i < n1; ++i) xs[i] = x1(i);
    return xs;
}

namespace {

// d/dx along a line of n samples with spacing h, 2nd order everywhere.
inline void line_deriv(const double* f, double* out, int n, double h, std::ptrdiff_t stride) {
    const double inv2h = 1.0 / (2.0 * h);
    out[0] = (-3.0 * f[0] + 4.0 * f[stride] - f[2 * stride]) * inv2h;
    for (int i = 1; i < n - 1; ++i)
        out[std::ptrdiff_t(i) * stride] =
            (f[(i + 1) * stride] - f[(i - 1) * stride]) * inv2h;
    out[std::ptrdiff_t(n - 1) * stride] =
        (3.0 * f[(n - 1) * stride] - 4.0 * f[(n - 2) * stride] + f[(n - 3) * stride]) * inv2h;
}

inline void line_deriv2(const double* f, double* out, int n, double h, std::ptrdiff_t stride) {
    const double invh2 = 1.0 / (h * h);
    out[0] = (2.0 * f[0] - 5.0 * f[stride] + 4.0 * f[2 * stride] - f[3 * stride]) * invh2;
    for (int i = 1; i < n - 1; ++i)
        out[std::ptrdiff_t(i) * stride] =
            (f[(i - 1) * stride] - 2.0 * f[std::ptrdiff_t(i) * stride] + f[(i + 1) * stride]) *
            invh2;
    out[std::ptrdiff_t(n - 1) * stride] =
        (2.0 * f[(n - 1) * stride] - 5.0 * f[(n - 2) * stride] + 4.0 * f[(n - 3) * stride] -
         f[(n - 4) * stride]) *
        invh2;
}

}  // namespace

Field3 Field3::deriv2(int axis) const {
    Field3 out(grid_);
    const int n1 = grid_.n1, n2 = grid_.n2, n3 = grid_.n3;
    const double h = grid_.h(axis);
    if (axis == 0) {
        const std::ptrdiff_t stride = std::ptrdiff_t(n2) * n3;
        for (int j = 0; j < n2; ++j)
            for (int k = 0; k < n3; ++k)
                line_deriv2(&v_[grid_.idx(0, j, k)], &out.v_[grid_.idx(0, j, k)], n1, h, stride);
    } else if (axis == 1) {
        for (int i = 0; i < n1; ++i)
            for (int k = 0; k < n3; ++k)
                line_deriv2(&v_[grid_.idx(i, 0, k)], &out.v_[grid_.idx(i, 0, k)], n2, h, n3);
    } else {
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j)
                line_deriv2(&v_[grid_.idx(i, j, 0)], &out.v_[grid_.idx(i, j, 0)], n3, h, 1);
    }
    return out;
}

Field3 Field3::deriv(int axis) const {
    Field3 out(grid_);
    const int n1 = grid_.n1, n2 = grid_.n2, n3 = grid_.n3;
    const double h = grid_.h(axis);
    if (axis == 0) {
        const std::ptrdiff_t stride = std::ptrdiff_t(n2) * n3;
        for (int j = 0; j < n2; ++j)
            for (int k = 0; k < n3; ++k)
                line_deriv(&v_[grid_.idx(0, j, k)], &out.v_[grid_.idx(0, j, k)], n1, h, stride);
    } else if (axis == 1) {
        for (int i = 0; i < n1; ++i)
            for (int k = 0; k < n3; ++k)
                line_deriv(&v_[grid_.idx(i, 0, k)], &out.v_[grid_.idx(i, 0, k)], n2, h, n3);
    } else {
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j)
                line_deriv(&v_[grid_.idx(i, j, 0)], &out.v_[grid_.idx(i, j, 0)], n3, h, 1);
    }
    return out;
}

Field3 Field3::from_fn(const DuctGrid& g,
                       const std::function<double(double, double, double)>& f) {
    Field3 out(g);
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j)
            for (int k = 0; k < g.n3; ++k) out(i, j, k) = f(g.x1(i), g.x2(j), g.x3(k));
    return out;
}

Field3& Field3::operator+=(const Field3& o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
}
Field3& Field3::operator-=(const Field3& o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
}
Field3& Field3::operator*=(double s) {
    for (auto& x : v_) x *= s;
    return *this;
}

Field2 Field2::deriv(int axis) const {
    Field2 out(n2_, n3_);
    if (axis == 0) {
        for (int k = 0; k < n3_; ++k)
            line_deriv(&v_[k], &out.v_[k], n2_, h2(), n3_);
    } else {
        for (int j = 0; j < n2_; ++j)
            line_deriv(&v_[std::size_t(j) * n3_], &out.v_[std::size_t(j) * n3_], n3_, h3(), 1);
    }
    return out;
}

Field2 Field2::from_fn(int n2, int n3, const std::function<double(double, double)>& f) {
    Field2 out(n2, n3);
    for (int j = 0; j < n2; ++j)
        for (int k = 0; k < n3; ++k) out(j, k) = f(out.x2(j), out.x3(k));
    return out;
}

Field2& Field2::operator+=(const Field2& o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
}
Field2& Field2::operator-=(const Field2& o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
}
Field2& Field2::operator*=(double s) {
    for (auto& x : v_) x *= s;
    return *this;
}

std::vector<double> trapezoid_weights(int n, double h) {
    std::vector<double> w(n, h);
    w.front() = w.back() = 0.5 * h;
    return w;
}

double integrate(const Field3& f) {
    const auto& g = f.grid();
    const auto w1 = trapezoid_weights(g.n1, g.h1());
    const auto w2 = trapezoid_weights(g.n2, g.h2());
    const auto w3 = trapezoid_weights(g.n3, g.h3());
    double s = 0.0;
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) {
            double sk = 0.0;
            for (int k = 0; k < g.n3; ++k) sk += w3[k] * f(i, j, k);
            s += w1[i] * w2[j] * sk;
        }
    return s;
}

double integrate_cross(const Field2& f) {
    const auto w2 = trapezoid_weights(f.n2(), f.h2());
    const auto w3 = trapezoid_weights(f.n3(), f.h3());
    double s = 0.0;
    for (int j = 0; j < f.n2(); ++j) {
        double sk = 0.0;
        for (int k = 0; k < f.n3(); ++k) sk += w3[k] * f(j, k);
        s += w2[j] * sk;
    }
    return s;
}

namespace {
template <class F>
double l2_of(const F& f, double (*sq_int)(const F&)) {
    return std::sqrt(std::max(0.0, sq_int(f)));
}
double sq_int3(const Field3& f) {
    const auto& g = f.grid();
    const auto w1 = trapezoid_weights(g.n1, g.h1());
    const auto w2 = trapezoid_weights(g.n2, g.h2());
    const auto w3 = trapezoid_weights(g.n3, g.h3());
    double s = 0.0;
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) {
            double sk = 0.0;
            for (int k = 0; k < g.n3; ++k) sk += w3[k] * f(i, j, k) * f(i, j, k);
            s += w1[i] * w2[j] * sk;
        }
    return s;
}
double sq_int2(const Field2& f) {
    const auto w2 = trapezoid_weights(f.n2(), f.h2());
    const auto w3 = trapezoid_weights(f.n3(), f.h3());
    double s = 0.0;
    for (int j = 0; j < f.n2(); ++j)
        for (int k = 0; k < f.n3(); ++k) s += w2[j] * w3[k] * f(j, k) * f(j, k);
    return s;
}
}  // namespace

double l2_norm(const Field3& f) { return l2_of(f, sq_int3); }
double l2_norm(const Field2& f) { return l2_of(f, sq_int2); }

double max_abs(const Field3& f) {
    double m = 0.0;
    for (double x : f.data()) m = std::max(m, std::abs(x));
    return m;
}
double max_abs(const Field2& f) {
    double m = 0.0;
    for (double x : f.data()) m = std::max(m, std::abs(x));
    return m;
}

double h1_norm(const Field3& f) {
    double s = sq_int3(f);
    for (int axis = 0; axis < 3; ++axis) s += sq_int3(f.deriv(axis));
    return std::sqrt(std::max(0.0, s));
}

namespace {
// Walk all multi-indices with |alpha| <= k, applying FD derivatives.
template <class FieldT, class Acc>
void for_each_derivative(const FieldT& f, int k, int naxes, Acc&& acc) {
    struct Item {
        FieldT field;
        int order;
        int min_axis;  // apply axes in non-decreasing order to avoid duplicates
    };
    std::vector<Item> stack;
    stack.push_back({f, 0, 0});
    while (!stack.empty()) {
        Item it = std::move(stack.back());
        stack.pop_back();
        acc(it.field, it.order);
        if (it.order == k) continue;
        for (int a = it.min_axis; a < naxes; ++a)
            stack.push_back({it.field.deriv(a), it.order + 1, a});
    }
}
}  // namespace

double sobolev4_proxy(const Field3& f) {
    double s = 0.0;
    for_each_derivative(f, 4, 3, [&](const Field3& d, int) { s += sq_int3(d); });
    return std::sqrt(std::max(0.0, s));
}

double ck_norm(const Field3& f, int k) {
    double s = 0.0;
    for_each_derivative(f, k, 3, [&](const Field3& d, int) { s += max_abs(d); });
    return s;
}

double ck_norm(const Field2& f, int k) {
    double s = 0.0;
    for_each_derivative(f, k, 2, [&](const Field2& d, int) { s += max_abs(d); });
    return s;
}

Field2 slice_at(const Field3& f, int i) {
    const auto& g = f.grid();
    Field2 out(g.n2, g.n3);
    for (int j = 0; j < g.n2; ++j)
        for (int k = 0; k < g.n3; ++k) out(j, k) = f(i, j, k);
    return out;
}

namespace {
// One-sided first derivative into the domain from boundary index 0 (sign +1)
// or n-1 (sign -1), 2nd order.
inline double oneside_d1(const double* f, std::ptrdiff_t stride, double h) {
    return (-3.0 * f[0] + 4.0 * f[stride] - f[2 * stride]) / (2.0 * h);
}
// One-sided third derivative, 2nd order (5-point).
inline double oneside_d3(const double* f, std::ptrdiff_t stride, double h) {
    return (-5.0 * f[0] + 18.0 * f[stride] - 24.0 * f[2 * stride] + 14.0 * f[3 * stride] -
            3.0 * f[4 * stride]) /
           (2.0 * h * h * h);
}
}  // namespace

double wall_normal_residual(const Field3& f) {
    const auto& g = f.grid();
    double worst = 0.0;
    for (int i = 0; i < g.n1; ++i) {
        for (int k = 0; k < g.n3; ++k) {
            worst = std::max(worst, std::abs(oneside_d1(&f.data()[g.idx(i, 0, k)],
                                                        std::ptrdiff_t(g.n3), g.h2())));
            worst = std::max(worst, std::abs(oneside_d1(&f.data()[g.idx(i, g.n2 - 1, k)],
                                                        -std::ptrdiff_t(g.n3), g.h2())));
        }
        for (int j = 0; j < g.n2; ++j) {
            worst = std::max(worst,
                             std::abs(oneside_d1(&f.data()[g.idx(i, j, 0)], 1, g.h3())));
            worst = std::max(worst, std::abs(oneside_d1(&f.data()[g.idx(i, j, g.n3 - 1)],
                                                        -1, g.h3())));
        }
    }
    return worst;
}

double boundary_normal_residual(const Field2& f, int order) {
    const int n2 = f.n2(), n3 = f.n3();
    double worst = 0.0;
    auto probe = [&](const double* p, std::ptrdiff_t stride, double h) {
        worst = std::max(worst, std::abs(order == 1 ? oneside_d1(p, stride, h)
                                                    : oneside_d3(p, stride, h)));
    };
    for (int k = 0; k < n3; ++k) {
        probe(&f.data()[k], n3, f.h2());
        probe(&f.data()[std::size_t(n2 - 1) * n3 + k], -std::ptrdiff_t(n3), f.h2());
    }
    for (int j = 0; j < n2; ++j) {
        probe(&f.data()[std::size_t(j) * n3], 1, f.h3());
        probe(&f.data()[std::size_t(j) * n3 + n3 - 1], -1, f.h3());
    }
    return worst;
}

}  // namespace epduct
