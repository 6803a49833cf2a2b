#include "epduct/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace epduct {

namespace {
constexpr double kHalfPi = std::numbers::pi / 2.0;

double norm1d(int k) { return k == 0 ? 1.0 / std::numbers::sqrt2 : 1.0; }
}  // namespace

std::pair<double, std::function<double(double, double)>> eigenpair(int k, int l) {
    if (k < 0 || l < 0) throw ConfigError("eigenpair: indices must be >= 0");
    const double om = kHalfPi * kHalfPi * (k * k + l * l);
    const double nk = norm1d(k), nl = norm1d(l);
    auto eta = [k, l, nk, nl](double x2, double x3) {
        return nk * nl * std::cos(k * kHalfPi * (x2 + 1.0)) * std::cos(l * kHalfPi * (x3 + 1.0));
    };
    return {om, eta};
}

CrossSectionBasis::CrossSectionBasis(int m_max, int n2, int n3)
    : m_max_(m_max), n2_(n2), n3_(n3) {
    if (m_max < 0) throw ConfigError("CrossSectionBasis: m_max must be >= 0");
    if (n2 < 5 || n3 < 5) throw ConfigError("CrossSectionBasis: need n2, n3 >= 5");
    // Discrete cosine orthogonality needs k + l < 2(n-1) for the retained pairs.
    if (2 * m_max >= 2 * std::min(n2 - 1, n3 - 1))
        throw ConfigError("CrossSectionBasis: grid too coarse for the requested truncation");

    for (int k = 0; k <= m_max; ++k)
        for (int l = 0; l <= m_max; ++l) modes_.emplace_back(k, l);
    std::stable_sort(modes_.begin(), modes_.end(), [](auto a, auto b) {
        const int wa = a.first * a.first + a.second * a.second;
        const int wb = b.first * b.first + b.second * b.second;
        if (wa != wb) return wa < wb;
        return a < b;
    });

    const int M = num_modes(), P = num_points();
    omega_.resize(M);
    lam2_.resize(M);
    lam3_.resize(M);
    eta_.resize(M, P);
    deta2_.resize(M, P);
    deta3_.resize(M, P);
    deta23_.resize(M, P);

    Field2 ref(n2, n3);
    for (int m = 0; m < M; ++m) {
        const auto [k, l] = modes_[m];
        omega_[m] = kHalfPi * kHalfPi * (k * k + l * l);
        const double ak = k * kHalfPi, al = l * kHalfPi;
        lam2_[m] = ak * ak;
        lam3_[m] = al * al;
        const double nn = norm1d(k) * norm1d(l);
        for (int j = 0; j < n2; ++j) {
            const double t2 = ak * (ref.x2(j) + 1.0);
            const double c2 = std::cos(t2), s2 = std::sin(t2);
            for (int kk = 0; kk < n3; ++kk) {
                const double t3 = al * (ref.x3(kk) + 1.0);
                const double c3 = std::cos(t3), s3 = std::sin(t3);
                const int p = j * n3 + kk;
                eta_(m, p) = nn * c2 * c3;
                deta2_(m, p) = -nn * ak * s2 * c3;
                deta3_(m, p) = -nn * al * c2 * s3;
                deta23_(m, p) = nn * ak * al * s2 * s3;
            }
        }
    }

    const auto w2 = trapezoid_weights(n2, ref.h2());
    const auto w3 = trapezoid_weights(n3, ref.h3());
    wq_.resize(P);
    for (int j = 0; j < n2; ++j)
        for (int k = 0; k < n3; ++k) wq_[j * n3 + k] = w2[j] * w3[k];
}

Eigen::VectorXd CrossSectionBasis::project(const Eigen::VectorXd& point_values) const {
    return eta_ * wq_.cwiseProduct(point_values);
}

Eigen::VectorXd CrossSectionBasis::project(const Field2& f) const {
    Eigen::Map<const Eigen::VectorXd> pv(f.data().data(), f.data().size());
    return eta_ * wq_.cwiseProduct(pv);
}

Field2 CrossSectionBasis::reconstruct(const Eigen::VectorXd& coeffs) const {
    Field2 out(n2_, n3_);
    Eigen::Map<Eigen::VectorXd> pv(out.data().data(), out.data().size());
    pv = eta_.transpose() * coeffs;
    return out;
}

Eigen::MatrixXd CrossSectionBasis::gram(int count) const {
    count = std::min(count, num_modes());
    const auto block = eta_.topRows(count);
    return block * wq_.asDiagonal() * block.transpose();
}

}  // namespace epduct
