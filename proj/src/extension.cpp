#include "epduct/extension.hpp"

#include <cmath>
#include <cstdint>

namespace epduct {

namespace {

// n x n integer determinant (n <= 5) by first-row cofactor expansion.
__int128 idet(const std::array<std::array<std::int64_t, 5>, 5>& a, int row,
              std::array<int, 5> cols, int n) {
    if (n == 1) return a[row][cols[0]];
    __int128 s = 0;
    int sign = 1;
    for (int c = 0; c < n; ++c) {
        std::array<int, 5> sub{};
        for (int i = 0, k = 0; i < n; ++i)
            if (i != c) sub[k++] = cols[i];
        s += sign * __int128(a[row][cols[c]]) * idet(a, row + 1, sub, n - 1);
        sign = -sign;
    }
    return s;
}

__int128 det5(const std::array<std::array<std::int64_t, 5>, 5>& m) {
    return idet(m, 0, {0, 1, 2, 3, 4}, 5);
}

}  // namespace

ExtensionWeights solve_weights() {
    // Column-scale c_k = k^4 e_k so the Vandermonde rows become integers:
    // sum_k e_k (-1)^m k^{4-m} = 1, m = 0..4. Cramer with exact arithmetic.
    std::array<std::array<std::int64_t, 5>, 5> m{};
    for (int row = 0; row < 5; ++row) {
        const std::int64_t sgn = (row % 2 == 0) ? 1 : -1;
        for (int col = 0; col < 5; ++col) {
            std::int64_t p = 1;
            for (int t = 0; t < 4 - row; ++t) p *= (col + 1);
            m[row][col] = sgn * p;
        }
    }
    const __int128 d = det5(m);
    ExtensionWeights out{};
    for (int col = 0; col < 5; ++col) {
        auto mk = m;
        for (int row = 0; row < 5; ++row) mk[row][col] = 1;
        std::int64_t k4 = 1;
        for (int t = 0; t < 4; ++t) k4 *= (col + 1);
        const __int128 num = det5(mk) * k4;
        if (num % d != 0) throw SolverError("solve_weights: non-integer solution");
        out.c[col] = double(std::int64_t(num / d));
    }
    return out;
}

void MollifierSpec::validate() const {
    if (!(r > 0.0 && r < 0.25))
        throw ConfigError("MollifierSpec: radius must lie in (0, 1/4)");
}

ExtendedField to_extended(const Field3& f) {
    const auto& g = f.grid();
    ExtendedField out;
    out.n = {g.n1, g.n2, g.n3};
    out.x0 = {0.0, -1.0, -1.0};
    out.h = {g.h1(), g.h2(), g.h3()};
    out.v = f.data();
    return out;
}

namespace {

struct Interp {
    int base;                   // first node of the stencil
    std::array<double, 6> w{};  // Lagrange weights
};

// 6-point Lagrange stencil for evaluating at fractional index `pos`.
Interp make_interp(double pos, int n) {
    Interp out;
    int lo = int(std::floor(pos)) - 2;
    lo = std::max(0, std::min(lo, n - 6));
    out.base = lo;
    for (int a = 0; a < 6; ++a) {
        double w = 1.0;
        for (int b = 0; b < 6; ++b)
            if (a != b) w *= (pos - (lo + b)) / double(a - b);
        out.w[a] = w;
    }
    return out;
}

}  // namespace

ExtendedField extend(const ExtendedField& f, int axis, int margin_nodes, ExtensionKind kind) {
    const int n = f.n[axis];
    if (n < 6) throw ConfigError("extend: insufficient resolution along the extension axis");
    if (margin_nodes < 1) throw ConfigError("extend: margin_nodes must be >= 1");
    // The k = 1 reflection sample sits margin_nodes deep; it must stay inside.
    if (margin_nodes > n - 1)
        throw ConfigError("extend: margin exceeds the available interior depth");

    const auto weights = solve_weights().c;
    std::vector<std::array<Interp, 5>> plan(margin_nodes);
    for (int m = 1; m <= margin_nodes; ++m)
        for (int k = 1; k <= 5; ++k)
            plan[m - 1][k - 1] = make_interp(double(n - 1) - double(m) / k, n);

    ExtendedField out;
    out.n = f.n;
    out.n[axis] = n + 2 * margin_nodes;
    out.x0 = f.x0;
    out.x0[axis] -= margin_nodes * f.h[axis];
    out.h = f.h;
    out.v.assign(std::size_t(out.n[0]) * out.n[1] * out.n[2], 0.0);

    for (int i = 0; i < out.n[0]; ++i)
        for (int j = 0; j < out.n[1]; ++j)
            for (int k = 0; k < out.n[2]; ++k) {
                const int oc[3] = {i, j, k};
                const int a = oc[axis] - margin_nodes;
                auto sample = [&](int s) {
                    const int si = (axis == 0) ? s : i;
                    const int sj = (axis == 1) ? s : j;
                    const int sk = (axis == 2) ? s : k;
                    return f.v[f.idx(si, sj, sk)];
                };
                double val;
                if (a >= 0 && a < n) {
                    val = sample(a);
                } else {
                    const bool high = a >= n;
                    const int m = high ? a - (n - 1) : -a;
                    if (kind == ExtensionKind::Even) {
                        val = sample(high ? (n - 1) - m : m);
                    } else {
                        val = 0.0;
                        for (int kk = 1; kk <= 5; ++kk) {
                            const auto& st = plan[m - 1][kk - 1];
                            double s = 0.0;
                            for (int t = 0; t < 6; ++t) {
                                const int si = st.base + t;
                                s += st.w[t] * sample(high ? si : (n - 1) - si);
                            }
                            val += weights[kk - 1] * s;
                        }
                    }
                }
                out.v[out.idx(i, j, k)] = val;
            }
    return out;
}

ExtendedField extend(const Field3& f, int axis, ExtensionKind kind) {
    if (axis != 1 && axis != 2) throw ConfigError("extend: axis must be x2 or x3");
    const double h = f.grid().h(axis);
    const int margin = int(std::ceil(0.5 / h - 1e-9));
    return extend(to_extended(f), axis, margin, kind);
}

Field3 mollify(const ExtendedField& f, const MollifierSpec& spec, const DuctGrid& target) {
    spec.validate();
    const double r = spec.r;

    // Target nodes must land on the extended grid.
    std::array<int, 3> off{};
    const double tx0[3] = {0.0, -1.0, -1.0};
    for (int a = 0; a < 3; ++a) {
        if (std::abs(f.h[a] - target.h(a)) > 1e-12 * std::max(1.0, target.h(a)))
            throw ConfigError("mollify: grid spacing mismatch");
        const double o = (tx0[a] - f.x0[a]) / f.h[a];
        off[a] = int(std::lround(o));
        if (std::abs(o - off[a]) > 1e-9) throw ConfigError("mollify: grid offset mismatch");
    }

    std::array<int, 3> R{};
    for (int a = 0; a < 3; ++a) {
        R[a] = int(std::floor(r / f.h[a] + 1e-12));
        const int tn = a == 0 ? target.n1 : (a == 1 ? target.n2 : target.n3);
        if (off[a] < R[a] || f.n[a] - (off[a] + tn) < R[a])
            throw ConfigError("mollify: extension margin smaller than the kernel radius");
    }
    std::vector<double> kw;
    std::vector<std::array<int, 3>> ko;
    double wsum = 0.0;
    for (int o1 = -R[0]; o1 <= R[0]; ++o1)
        for (int o2 = -R[1]; o2 <= R[1]; ++o2)
            for (int o3 = -R[2]; o3 <= R[2]; ++o3) {
                const double d2 = o1 * f.h[0] * o1 * f.h[0] + o2 * f.h[1] * o2 * f.h[1] +
                                  o3 * f.h[2] * o3 * f.h[2];
                const double s2 = d2 / (r * r);
                if (s2 >= 1.0) continue;
                kw.push_back(std::exp(-1.0 / (1.0 - s2)));
                ko.push_back({o1, o2, o3});
                wsum += kw.back();
            }
    for (auto& w : kw) w /= wsum;  // midpoint-rule normalization, exact unit mass

    Field3 out(target);
    parallel_for(std::size_t(target.n1), [&](std::size_t ii) {
        const int i = int(ii);
        for (int j = 0; j < target.n2; ++j)
            for (int k = 0; k < target.n3; ++k) {
                double s = 0.0;
                for (std::size_t q = 0; q < kw.size(); ++q)
                    s += kw[q] * f.v[f.idx(off[0] + i + ko[q][0], off[1] + j + ko[q][1],
                                           off[2] + k + ko[q][2])];
                out(i, j, k) = s;
            }
    });
    return out;
}

namespace {
Field3 smooth_impl(const Field3& f, const MollifierSpec& spec, ExtensionKind kind) {
    spec.validate();
    const auto& g = f.grid();
    const int m1 = int(std::floor(spec.r / g.h1() + 1e-12)) + 1;
    const int m2 = int(std::floor(spec.r / g.h2() + 1e-12)) + 1;
    const int m3 = int(std::floor(spec.r / g.h3() + 1e-12)) + 1;
    ExtendedField ext = extend(to_extended(f), 1, m2, kind);
    ext = extend(ext, 2, m3, kind);
    ext = extend(ext, 0, m1, kind);
    return mollify(ext, spec, g);
}
}  // namespace

Field3 smooth_field(const Field3& f, double r, ExtensionKind kind) {
    return smooth_impl(f, MollifierSpec{r}, kind);
}

std::pair<Field3, Field3> smooth_sources(const Field3& f1, const Field3& f2,
                                         const MollifierSpec& spec) {
    return {smooth_impl(f1, spec, ExtensionKind::Even),
            smooth_impl(f2, spec, ExtensionKind::Even)};
}

}  // namespace epduct
