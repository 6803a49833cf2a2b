#include "epduct/linear_solver.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <sstream>

namespace epduct {

namespace {

using Triplet = Eigen::Triplet<double>;

struct SliceInfo {
    bool constant = false;
    double value = 0.0;
};

SliceInfo probe_slice(const Field3& f, int i) {
    const auto& g = f.grid();
    double lo = f(i, 0, 0), hi = lo;
    for (int j = 0; j < g.n2; ++j)
        for (int k = 0; k < g.n3; ++k) {
            const double v = f(i, j, k);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    if (hi - lo <= 1e-13 * scale) return {true, 0.5 * (lo + hi)};
    return {false, 0.0};
}

Eigen::VectorXd slice_vector(const Field3& f, int i) {
    const auto& g = f.grid();
    Eigen::VectorXd out(std::ptrdiff_t(g.n2) * g.n3);
    const double* src = f.data().data() + g.idx(i, 0, 0);
    for (std::ptrdiff_t p = 0; p < out.size(); ++p) out[p] = src[p];
    return out;
}

// Coupling matrices of one x1 slice for the theta rows:
//   M2[m][j] multiplies theta_j      (cross-section second derivatives)
//   M1[m][j] multiplies theta_j'     (mixed x1/cross derivatives)
struct SliceCoupling {
    Eigen::MatrixXd m2, m1;
    bool m2_diag = false;   // m2 is diagonal (slice-constant, no cross term)
    Eigen::VectorXd m2d;    // its diagonal in that case
    bool m1_zero = false;
};

class Assembler {
  public:
    Assembler(const LinearProblem& pb, const CrossSectionBasis& basis)
        : pb_(pb), basis_(basis) {
        const auto& g = pb.coeffs.grid;
        // constant-slice Gram matrices, built once
        gram23_ = basis.eta() * basis.weights().asDiagonal() * basis.deta23().transpose();
        gram2_ = basis.eta() * basis.weights().asDiagonal() * basis.deta2().transpose();
        gram3_ = basis.eta() * basis.weights().asDiagonal() * basis.deta3().transpose();
        (void)g;
    }

    SliceCoupling couple(int i) const {
        const int M = basis_.num_modes();
        const auto& a = pb_.coeffs.a;
        SliceCoupling out;

        const SliceInfo s22 = probe_slice(a(1, 1), i);
        const SliceInfo s33 = probe_slice(a(2, 2), i);
        SliceInfo s23 = probe_slice(a(1, 2), i), s32 = probe_slice(a(2, 1), i);
        SliceInfo s12 = probe_slice(a(0, 1), i), s21 = probe_slice(a(1, 0), i);
        SliceInfo s13 = probe_slice(a(0, 2), i), s31 = probe_slice(a(2, 0), i);

        const bool cross_const = s23.constant && s32.constant;
        const bool mixed_const = s12.constant && s21.constant && s13.constant && s31.constant;

        if (s22.constant && s33.constant && cross_const &&
            s23.value + s32.value == 0.0) {
            out.m2_diag = true;
            out.m2d.resize(M);
            for (int m = 0; m < M; ++m)
                out.m2d[m] = -s22.value * basis_.lam2(m) - s33.value * basis_.lam3(m);
        } else if (s22.constant && s33.constant && cross_const) {
            out.m2 = (s23.value + s32.value) * gram23_;
            for (int m = 0; m < M; ++m)
                out.m2(m, m) += -s22.value * basis_.lam2(m) - s33.value * basis_.lam3(m);
        } else {
            const Eigen::VectorXd w = basis_.weights();
            const Eigen::VectorXd v22 = slice_vector(a(1, 1), i).cwiseProduct(w);
            const Eigen::VectorXd v33 = slice_vector(a(2, 2), i).cwiseProduct(w);
            const Eigen::VectorXd v23 =
                (slice_vector(a(1, 2), i) + slice_vector(a(2, 1), i)).cwiseProduct(w);
            Eigen::MatrixXd t22 = basis_.eta() * v22.asDiagonal() * basis_.eta().transpose();
            Eigen::MatrixXd t33 = basis_.eta() * v33.asDiagonal() * basis_.eta().transpose();
            out.m2 = basis_.eta() * v23.asDiagonal() * basis_.deta23().transpose();
            for (int j = 0; j < M; ++j) {
                out.m2.col(j) += -basis_.lam2(j) * t22.col(j) - basis_.lam3(j) * t33.col(j);
            }
        }

        if (mixed_const && s12.value + s21.value == 0.0 && s13.value + s31.value == 0.0) {
            out.m1_zero = true;
        } else if (mixed_const) {
            out.m1 = (s12.value + s21.value) * gram2_ + (s13.value + s31.value) * gram3_;
        } else {
            const Eigen::VectorXd w = basis_.weights();
            const Eigen::VectorXd v12 =
                (slice_vector(a(0, 1), i) + slice_vector(a(1, 0), i)).cwiseProduct(w);
            const Eigen::VectorXd v13 =
                (slice_vector(a(0, 2), i) + slice_vector(a(2, 0), i)).cwiseProduct(w);
            out.m1 = basis_.eta() * v12.asDiagonal() * basis_.deta2().transpose() +
                     basis_.eta() * v13.asDiagonal() * basis_.deta3().transpose();
        }
        return out;
    }

  private:
    const LinearProblem& pb_;
    const CrossSectionBasis& basis_;
    Eigen::MatrixXd gram23_, gram2_, gram3_;
};

}  // namespace

ModalSolution solve(const LinearProblem& pb) {
    const DuctGrid& grid = pb.coeffs.grid;
    const int n1 = grid.n1;
    if (pb.g.n2() != grid.n2 || pb.g.n3() != grid.n3)
        throw ConfigError("linear solver: datum g does not match the cross-section grid");
    if (pb.coeffs.base.n() != n1)
        throw ConfigError("linear solver: base coefficients not sampled on the grid");

    if (pb.check_coefficients) {
        const AuditReport rep = audit(pb.coeffs);
        // Hyperbolicity and symmetry are what the scheme relies on; wall flux
        // is diagnostic here.
        if (!rep.items[0].pass || !rep.items[1].pass || !rep.items[2].pass) {
            std::ostringstream os;
            os << "linear solver: coefficient audit failed:";
            for (const auto& it : rep.items)
                if (!it.pass) os << " [" << it.name << " worst " << it.worst << "]";
            throw SolverError(os.str());
        }
    }

    auto basis = std::make_shared<CrossSectionBasis>(pb.m_max, grid.n2, grid.n3);
    const int M = basis->num_modes();
    const double h = grid.h1();
    const auto& base = pb.coeffs.base;

    // modal sources and datum
    Eigen::MatrixXd f1m(M, n1), f2m(M, n1);
    parallel_for(std::size_t(n1), [&](std::size_t i) {
        f1m.col(i) = basis->project(slice_vector(pb.coeffs.f1, int(i)));
        f2m.col(i) = basis->project(slice_vector(pb.coeffs.f2, int(i)));
    }, pb.threads);
    const Eigen::VectorXd gm = basis->project(pb.g);

    // per-node coupling matrices
    Assembler assembler(pb, *basis);
    std::vector<SliceCoupling> cpl(n1);
    parallel_for(std::size_t(n1), [&](std::size_t i) { cpl[i] = assembler.couple(int(i)); },
                 pb.threads);

    const auto uth = [M](int i, int m) { return std::size_t(i) * 2 * M + m; };
    const auto uca = [M](int i, int m) { return std::size_t(i) * 2 * M + M + m; };

    std::vector<Triplet> trip;
    trip.reserve(std::size_t(n1) * M * 16);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(std::size_t(n1) * 2 * M);

    const double inv2h = 1.0 / (2.0 * h), invh2 = 1.0 / (h * h);

    for (int m = 0; m < M; ++m) {
        // theta_m(0) = 0  (row slot: node 0)
        trip.emplace_back(int(uth(0, m)), int(uth(0, m)), 1.0);
        // theta_m'(0) = g_m, one-sided 2nd order  (row slot: node 1)
        trip.emplace_back(int(uth(1, m)), int(uth(0, m)), -3.0 * inv2h);
        trip.emplace_back(int(uth(1, m)), int(uth(1, m)), 4.0 * inv2h);
        trip.emplace_back(int(uth(1, m)), int(uth(2, m)), -1.0 * inv2h);
        rhs[uth(1, m)] = gm[m];
        // Theta_m'(0) = 0  (row slot: node 0)
        trip.emplace_back(int(uca(0, m)), int(uca(0, m)), -3.0 * inv2h);
        trip.emplace_back(int(uca(0, m)), int(uca(1, m)), 4.0 * inv2h);
        trip.emplace_back(int(uca(0, m)), int(uca(2, m)), -1.0 * inv2h);
        // Theta_m(L) = 0  (row slot: node n1-1)
        trip.emplace_back(int(uca(n1 - 1, m)), int(uca(n1 - 1, m)), 1.0);
    }

    for (int p = 1; p <= n1 - 2; ++p) {
        const int rth = p + 1;  // theta PDE at node p lives in row slot p+1
        const auto& c = cpl[p];
        for (int m = 0; m < M; ++m) {
            const std::size_t row = uth(rth, m);
            // a11 == 1: unit-weight second difference
            trip.emplace_back(int(row), int(uth(p - 1, m)), invh2 - base.a1[p] * inv2h);
            trip.emplace_back(int(row), int(uth(p, m)), -2.0 * invh2);
            trip.emplace_back(int(row), int(uth(p + 1, m)), invh2 + base.a1[p] * inv2h);
            // coupling to Theta
            trip.emplace_back(int(row), int(uca(p - 1, m)), -base.b1[p] * inv2h);
            trip.emplace_back(int(row), int(uca(p + 1, m)), base.b1[p] * inv2h);
            trip.emplace_back(int(row), int(uca(p, m)), base.b2[p]);
            // cross-section couplings
            if (c.m2_diag) {
                trip.emplace_back(int(row), int(uth(p, m)), c.m2d[m]);
            } else {
                for (int j = 0; j < M; ++j) {
                    const double v = c.m2(m, j);
                    if (v != 0.0) trip.emplace_back(int(row), int(uth(p, j)), v);
                }
            }
            if (!c.m1_zero) {
                for (int j = 0; j < M; ++j) {
                    const double v = c.m1(m, j);
                    if (v != 0.0) {
                        trip.emplace_back(int(row), int(uth(p - 1, j)), -v * inv2h);
                        trip.emplace_back(int(row), int(uth(p + 1, j)), v * inv2h);
                    }
                }
            }
            rhs[row] = f1m(m, p);

            // Theta PDE at node p (row slot p)
            const std::size_t rowc = uca(p, m);
            trip.emplace_back(int(rowc), int(uca(p - 1, m)), invh2);
            trip.emplace_back(int(rowc), int(uca(p, m)),
                              -2.0 * invh2 - basis->omega(m) - base.h1[p]);
            trip.emplace_back(int(rowc), int(uca(p + 1, m)), invh2);
            trip.emplace_back(int(rowc), int(uth(p - 1, m)), base.h2[p] * inv2h);
            trip.emplace_back(int(rowc), int(uth(p + 1, m)), -base.h2[p] * inv2h);
            rhs[rowc] = f2m(m, p);
        }
    }

    const std::ptrdiff_t N = std::ptrdiff_t(n1) * 2 * M;
    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) {
        std::ostringstream os;
        os << "linear solver: sparse factorization failed (" << lu.lastErrorMessage()
           << "); unknowns " << N;
        throw SolverError(os.str());
    }
    const Eigen::VectorXd sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw SolverError("linear solver: back substitution failed");

    ModalSolution out;
    out.basis = basis;
    out.x1 = grid.x1_nodes();
    out.theta.resize(M, n1);
    out.cap_theta.resize(M, n1);
    for (int i = 0; i < n1; ++i)
        for (int m = 0; m < M; ++m) {
            out.theta(m, i) = sol[uth(i, m)];
            out.cap_theta(m, i) = sol[uca(i, m)];
        }

    out.psi = Field3(grid);
    out.cap_psi = Field3(grid);
    parallel_for(std::size_t(n1), [&](std::size_t i) {
        Eigen::VectorXd row = basis->eta().transpose() * out.theta.col(i);
        Eigen::VectorXd rowc = basis->eta().transpose() * out.cap_theta.col(i);
        double* p = out.psi.data().data() + grid.idx(int(i), 0, 0);
        double* q = out.cap_psi.data().data() + grid.idx(int(i), 0, 0);
        for (std::ptrdiff_t t = 0; t < row.size(); ++t) {
            p[t] = row[t];
            q[t] = rowc[t];
        }
    }, pb.threads);

    out.residual = residual(out, pb);
    return out;
}

namespace {

// x1-derivative of a (modes x n1) coefficient matrix, 2nd order.
Eigen::MatrixXd d1_modal(const Eigen::MatrixXd& c, double h) {
    const int M = int(c.rows()), n = int(c.cols());
    Eigen::MatrixXd out(M, n);
    out.col(0) = (-3.0 * c.col(0) + 4.0 * c.col(1) - c.col(2)) / (2.0 * h);
    for (int i = 1; i < n - 1; ++i) out.col(i) = (c.col(i + 1) - c.col(i - 1)) / (2.0 * h);
    out.col(n - 1) = (3.0 * c.col(n - 1) - 4.0 * c.col(n - 2) + c.col(n - 3)) / (2.0 * h);
    return out;
}

Field3 modal_field(const Eigen::MatrixXd& c, const Eigen::MatrixXd& table,
                   const DuctGrid& grid) {
    Field3 out(grid);
    for (int i = 0; i < grid.n1; ++i) {
        Eigen::VectorXd row = table.transpose() * c.col(i);
        double* p = out.data().data() + grid.idx(i, 0, 0);
        for (std::ptrdiff_t t = 0; t < row.size(); ++t) p[t] = row[t];
    }
    return out;
}

DuctGrid grid_of(const ModalSolution& sol) {
    return DuctGrid(int(sol.x1.size()), sol.basis->n2(), sol.basis->n3(), sol.x1.back());
}

}  // namespace

Field3 ModalSolution::psi_deriv(int axis) const {
    const DuctGrid g = grid_of(*this);
    if (axis == 0) return modal_field(d1_modal(theta, h1()), basis->eta(), g);
    return modal_field(theta, axis == 1 ? basis->deta2() : basis->deta3(), g);
}

Field3 ModalSolution::cap_deriv(int axis) const {
    const DuctGrid g = grid_of(*this);
    if (axis == 0) return modal_field(d1_modal(cap_theta, h1()), basis->eta(), g);
    return modal_field(cap_theta, axis == 1 ? basis->deta2() : basis->deta3(), g);
}

ResidualReport residual(const ModalSolution& sol, const LinearProblem& pb) {
    const DuctGrid& grid = pb.coeffs.grid;
    const auto& basis = *sol.basis;
    const int M = basis.num_modes(), n1 = grid.n1;
    const double h = grid.h1();
    const auto& base = pb.coeffs.base;

    ResidualReport rep;

    // second x1 differences of the mode coefficients (interior only)
    const Eigen::MatrixXd dth = d1_modal(sol.theta, h);
    const Eigen::MatrixXd dca = d1_modal(sol.cap_theta, h);

    const auto w2 = trapezoid_weights(grid.n2, grid.h2());
    const auto w3 = trapezoid_weights(grid.n3, grid.h3());

    double sq1 = 0.0, sq2 = 0.0;
    double vol = 0.0;
    for (int p = 1; p <= n1 - 2; ++p) {
        // modal coefficient columns of the needed derivatives at node p
        const Eigen::VectorXd th = sol.theta.col(p);
        const Eigen::VectorXd thpp =
            (sol.theta.col(p - 1) - 2.0 * sol.theta.col(p) + sol.theta.col(p + 1)) / (h * h);
        const Eigen::VectorXd capp =
            (sol.cap_theta.col(p - 1) - 2.0 * sol.cap_theta.col(p) + sol.cap_theta.col(p + 1)) /
            (h * h);
        const Eigen::VectorXd thp = dth.col(p);
        const Eigen::VectorXd cap = sol.cap_theta.col(p);
        const Eigen::VectorXd capd = dca.col(p);

        // point values on the slice
        Eigen::VectorXd psi11 = basis.eta().transpose() * thpp;
        Eigen::VectorXd psi1 = basis.eta().transpose() * thp;
        Eigen::VectorXd psi12 = basis.deta2().transpose() * thp;
        Eigen::VectorXd psi13 = basis.deta3().transpose() * thp;
        Eigen::VectorXd psi23 = basis.deta23().transpose() * th;
        Eigen::VectorXd cap1 = basis.eta().transpose() * capd;
        Eigen::VectorXd capv = basis.eta().transpose() * cap;
        Eigen::VectorXd cap11 = basis.eta().transpose() * capp;

        Eigen::VectorXd psi22(basis.num_points()), psi33(basis.num_points());
        Eigen::VectorXd caplap(basis.num_points());
        {
            Eigen::VectorXd t2 = th, t3 = th, tc = cap;
            for (int m = 0; m < M; ++m) {
                t2[m] *= -basis.lam2(m);
                t3[m] *= -basis.lam3(m);
                tc[m] *= -(basis.lam2(m) + basis.lam3(m));
            }
            psi22 = basis.eta().transpose() * t2;
            psi33 = basis.eta().transpose() * t3;
            caplap = basis.eta().transpose() * tc;
        }

        const auto& a = pb.coeffs.a;
        for (int j = 0; j < grid.n2; ++j)
            for (int k = 0; k < grid.n3; ++k) {
                const std::size_t q = std::size_t(j) * grid.n3 + k;
                const double r1 =
                    psi11[q] + a(1, 1)(p, j, k) * psi22[q] + a(2, 2)(p, j, k) * psi33[q] +
                    (a(1, 2)(p, j, k) + a(2, 1)(p, j, k)) * psi23[q] +
                    (a(0, 1)(p, j, k) + a(1, 0)(p, j, k)) * psi12[q] +
                    (a(0, 2)(p, j, k) + a(2, 0)(p, j, k)) * psi13[q] + base.a1[p] * psi1[q] +
                    base.b1[p] * cap1[q] + base.b2[p] * capv[q] - pb.coeffs.f1(p, j, k);
                const double r2 = cap11[q] + caplap[q] - base.h1[p] * capv[q] -
                                  base.h2[p] * psi1[q] - pb.coeffs.f2(p, j, k);
                const double wq = w2[j] * w3[k] * h;
                sq1 += wq * r1 * r1;
                sq2 += wq * r2 * r2;
                vol += wq;
                rep.max_eq1 = std::max(rep.max_eq1, std::abs(r1));
                rep.max_eq2 = std::max(rep.max_eq2, std::abs(r2));
            }
    }
    (void)vol;
    rep.l2_eq1 = std::sqrt(sq1);
    rep.l2_eq2 = std::sqrt(sq2);

    // boundary rows
    const Eigen::VectorXd gm = basis.project(pb.g);
    for (int m = 0; m < M; ++m) {
        rep.bc.psi_gamma0 = std::max(rep.bc.psi_gamma0, std::abs(sol.theta(m, 0)));
        const double dth0 =
            (-3.0 * sol.theta(m, 0) + 4.0 * sol.theta(m, 1) - sol.theta(m, 2)) / (2.0 * h);
        rep.bc.dpsi_gamma0 = std::max(rep.bc.dpsi_gamma0, std::abs(dth0 - gm[m]));
        const double dca0 = (-3.0 * sol.cap_theta(m, 0) + 4.0 * sol.cap_theta(m, 1) -
                             sol.cap_theta(m, 2)) /
                            (2.0 * h);
        rep.bc.dcap_gamma0 = std::max(rep.bc.dcap_gamma0, std::abs(dca0));
        rep.bc.cap_gammaL = std::max(rep.bc.cap_gammaL, std::abs(sol.cap_theta(m, n1 - 1)));
    }
    rep.bc.slip_psi = wall_normal_residual(sol.psi);
    rep.bc.slip_cap = wall_normal_residual(sol.cap_psi);

    const double gl2 = l2_norm(pb.g);
    rep.data_norm = l2_norm(pb.coeffs.f1) + l2_norm(pb.coeffs.f2) + gl2;
    rep.g_compat = boundary_normal_residual(pb.g, 1);
    const double num = h1_norm(sol.psi);
    rep.ratio = rep.data_norm > 0.0 ? num / rep.data_norm : 0.0;
    return rep;
}

}  // namespace epduct
