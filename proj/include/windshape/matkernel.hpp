#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "windshape/statespace.hpp"

namespace windshape {

inline std::vector<std::complex<double>> eigenvalues(const Matrix& a) {
    if (a.rows() == 0) return {};
    Eigen::EigenSolver<Matrix> es(a, false);
    if (es.info() != Eigen::Success) throw NumericError("eigenvalues: QR iteration failed");
    std::vector<std::complex<double>> out(a.rows());
    for (int i = 0; i < a.rows(); ++i) out[i] = es.eigenvalues()(i);
    return out;
}

inline double spectral_abscissa(const Matrix& a) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& l : eigenvalues(a)) m = std::max(m, l.real());
    return m;
}

inline bool is_hurwitz(const Matrix& a, double tol = 1e-9) {
    if (a.rows() == 0) return true;
    return spectral_abscissa(a) < -tol * std::max(1.0, a.norm());
}

// Parlett-Reinsch balancing with powers of two. Returns d such that
// diag(d)^-1 * A * diag(d) is the balanced matrix (modified in place).
inline Vector balance_in_place(Matrix& a) {
    const int n = static_cast<int>(a.rows());
    Vector d = Vector::Ones(n);
    bool converged = false;
    while (!converged) {
        converged = true;
        for (int i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0;
            const double s = c + r;
            while (c < r / 2.0) { c *= 2.0; r /= 2.0; f *= 2.0; }
            while (c >= r * 2.0) { c /= 2.0; r *= 2.0; f /= 2.0; }
            if (c + r < 0.95 * s) {
                converged = false;
                d(i) *= f;
                a.col(i) *= f;
                a.row(i) /= f;
            }
        }
    }
    return d;
}

struct SchurDecomposition {
    Matrix Q;  // orthogonal
    Matrix T;  // quasi upper triangular, A = Q T Q^T
};

inline SchurDecomposition real_schur(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("real_schur: non-square input");
    Eigen::RealSchur<Matrix> schur(a);
    if (schur.info() != Eigen::Success)
        throw NumericError("real_schur: QR iteration did not converge");
    return {schur.matrixU(), schur.matrixT()};
}

namespace detail {

// Eigenvalues of the diagonal block starting at (i, i) with size 1 or 2.
inline std::complex<double> block_eig(const Matrix& t, int i, int size) {
    if (size == 1) return {t(i, i), 0.0};
    const double tr = 0.5 * (t(i, i) + t(i + 1, i + 1));
    const double det = t(i, i) * t(i + 1, i + 1) - t(i, i + 1) * t(i + 1, i);
    const double disc = tr * tr - det;
    if (disc >= 0.0) return {tr + std::sqrt(disc), 0.0};  // should not happen in standardized form
    return {tr, std::sqrt(-disc)};
}

// Swap adjacent diagonal blocks T11 (p x p, at index i) and T22 (q x q)
// using the direct-swap construction: solve T11 X - X T22 = T12, then
// orthogonalize [-X; I].
inline void swap_adjacent_blocks(Matrix& t, Matrix& q, int i, int p, int qsz) {
    const int m = p + qsz;
    const Matrix T11 = t.block(i, i, p, p);
    const Matrix T22 = t.block(i + p, i + p, qsz, qsz);
    const Matrix T12 = t.block(i, i + p, p, qsz);
    // Kronecker solve of the tiny Sylvester equation (at most 4 unknowns).
    Matrix K = Matrix::Zero(p * qsz, p * qsz);
    Vector rhs(p * qsz);
    for (int c = 0; c < qsz; ++c)
        for (int r = 0; r < p; ++r) {
            const int row = c * p + r;
            rhs(row) = T12(r, c);
            for (int k = 0; k < p; ++k) K(row, c * p + k) += T11(r, k);
            for (int k = 0; k < qsz; ++k) K(row, k * p + r) -= T22(k, c);
        }
    Eigen::FullPivLU<Matrix> lu(K);
    if (!lu.isInvertible())
        throw NumericError("ordered_schur: ill-separated eigenvalues in block swap");
    Vector xv = lu.solve(rhs);
    Matrix X(p, qsz);
    for (int c = 0; c < qsz; ++c)
        for (int r = 0; r < p; ++r) X(r, c) = xv(c * p + r);

    Matrix W(m, qsz);
    W.topRows(p) = -X;
    W.bottomRows(qsz) = Matrix::Identity(qsz, qsz);
    Eigen::HouseholderQR<Matrix> qr(W);
    const Matrix U = qr.householderQ() * Matrix::Identity(m, m);

    t.middleRows(i, m) = U.transpose() * t.middleRows(i, m);
    t.middleCols(i, m) = t.middleCols(i, m) * U;
    q.middleCols(i, m) = q.middleCols(i, m) * U;
    // clean the decoupled sub-block
    t.block(i + qsz, i, p, qsz).setZero();
    if (qsz == 2 && std::abs(t(i + 1, i)) < 1e-14 * t.norm()) t(i + 1, i) = 0.0;
    if (p == 2 && std::abs(t(i + qsz + 1, i + qsz)) < 1e-14 * t.norm()) t(i + qsz + 1, i + qsz) = 0.0;
}

}  // namespace detail

struct OrderedSchur {
    Matrix Q, T;
    int n_selected;  // dimension of the leading (selected) invariant subspace
};

// Real Schur form reordered so eigenvalues accepted by `select` occupy the
// leading block. Blocks are moved by orthogonal adjacent swaps.
template <typename Selector>
inline OrderedSchur ordered_real_schur(const Matrix& a, Selector select) {
    auto [q, t] = real_schur(a);
    const int n = static_cast<int>(a.rows());
    const double subtol = 1e-13 * std::max(1.0, t.norm());

    auto block_size = [&](int i) {
        return (i + 1 < n && std::abs(t(i + 1, i)) > subtol) ? 2 : 1;
    };

    int front = 0;  // first index not yet part of the selected leading block
    int i = 0;
    while (i < n) {
        const int sz = block_size(i);
        if (select(detail::block_eig(t, i, sz))) {
            // bubble this block up to `front`
            int pos = i;
            while (pos > front) {
                // find the block immediately above
                int above = pos - 1;
                int asz = 1;
                if (above - 1 >= 0 && std::abs(t(above, above - 1)) > subtol) {
                    above -= 1;
                    asz = 2;
                }
                detail::swap_adjacent_blocks(t, q, above, asz, sz);
                pos = above;
            }
            front += sz;
            i = std::max(i + sz, front);
        } else {
            i += sz;
        }
    }
    return {q, t, front};
}

inline OrderedSchur ordered_real_schur_stable(const Matrix& a) {
    return ordered_real_schur(a, [](std::complex<double> l) { return l.real() < 0.0; });
}

// Solves A^T X + X A + Q = 0 for Hurwitz A via the Kronecker form.
// Intended for the modest state dimensions used here.
inline Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
    const int n = static_cast<int>(a.rows());
    if (a.cols() != n || q.rows() != n || q.cols() != n)
        throw std::invalid_argument("solve_lyapunov: dimension mismatch");
    if (!is_hurwitz(a, 0.0)) throw std::domain_error("solve_lyapunov: A not Hurwitz");
    Matrix K = Matrix::Zero(n * n, n * n);
    const Matrix at = a.transpose();
    // vec(A^T X) = (I kron A^T) vec X, vec(X A) = (A^T kron I) vec X
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) {
            const int row = c * n + r;
            for (int k = 0; k < n; ++k) {
                K(row, c * n + k) += at(r, k);
                K(row, k * n + r) += at(c, k);
            }
        }
    Vector rhs(n * n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) rhs(c * n + r) = -q(r, c);
    Vector xv = Eigen::PartialPivLU<Matrix>(K).solve(rhs);
    Matrix X(n, n);
    for (int c = 0; c < n; ++c)
        for (int r = 0; r < n; ++r) X(r, c) = xv(c * n + r);
    return 0.5 * (X + X.transpose());
}

struct CareSolution {
    Matrix X;
    double residual_norm = 0.0;  // relative to the equation's term norms
    std::vector<std::complex<double>> closed_loop_spectrum;
};

namespace detail {

inline double care_residual(const Matrix& a, const Matrix& g, const Matrix& q,
                            const Matrix& x) {
    const Matrix res = a.transpose() * x + x * a - x * g * x + q;
    const double scale = (a.transpose() * x).norm() + (x * a).norm() +
                         (x * g * x).norm() + q.norm();
    return res.norm() / std::max(1.0, scale);
}

}  // namespace detail

// Stabilizing solution of A^T X + X A - X B R^-1 B^T X + Q = 0 via the
// ordered Schur form of the balanced Hamiltonian, with a Newton-Kleinman
// polish when the direct residual is above 1e-8.
inline CareSolution solve_care(const Matrix& a, const Matrix& b, const Matrix& q,
                               const Matrix& r) {
    const int n = static_cast<int>(a.rows());
    if (b.rows() != n || q.rows() != n || q.cols() != n || r.rows() != r.cols() ||
        r.rows() != b.cols())
        throw std::invalid_argument("solve_care: dimension mismatch");
    Eigen::LLT<Matrix> rllt(r);
    if (rllt.info() != Eigen::Success)
        throw std::domain_error("solve_care: R not positive definite");
    const Matrix g = b * rllt.solve(b.transpose());

    Matrix ham(2 * n, 2 * n);
    ham.topLeftCorner(n, n) = a;
    ham.topRightCorner(n, n) = -g;
    ham.bottomLeftCorner(n, n) = -q;
    ham.bottomRightCorner(n, n) = -a.transpose();

    Matrix hb = ham;
    const Vector d = balance_in_place(hb);
    const auto ordered = ordered_real_schur_stable(hb);
    if (ordered.n_selected != n)
        throw NumericError(
            "solve_care: Hamiltonian has eigenvalues on the imaginary axis "
            "(no stabilizing solution)");
    Matrix u = d.asDiagonal() * ordered.Q.leftCols(n);
    const Matrix u1 = u.topRows(n);
    const Matrix u2 = u.bottomRows(n);
    Eigen::FullPivLU<Matrix> lu(u1.transpose());
    if (!lu.isInvertible())
        throw NumericError("solve_care: singular invariant-subspace basis");
    Matrix x = lu.solve(u2.transpose());
    x = 0.5 * (x + x.transpose()).eval();

    double res = detail::care_residual(a, g, q, x);
    for (int it = 0; it < 8 && res > 1e-9; ++it) {
        // Newton step: (A - G X)^T X+ + X+ (A - G X) + X G X + Q = 0
        const Matrix acl = a - g * x;
        if (!is_hurwitz(acl, 0.0)) break;
        Matrix xn = solve_lyapunov(acl, x * g * x + q);
        const double rn = detail::care_residual(a, g, q, xn);
        if (rn >= res) break;
        x = xn;
        res = rn;
    }

    CareSolution sol;
    sol.X = x;
    sol.residual_norm = res;
    sol.closed_loop_spectrum = eigenvalues(a - g * x);
    for (const auto& l : sol.closed_loop_spectrum)
        if (l.real() >= 0.0)
            throw NumericError("solve_care: closed loop not Hurwitz after solve");
    return sol;
}

namespace detail {

// True iff the gamma-test Hamiltonian for ||G||inf >= gamma has an eigenvalue
// on the imaginary axis. Valid for gamma > sigma_max(D).
inline bool hinf_gamma_exceeded(const StateSpaceModel& g, double gamma) {
    const int n = g.order();
    const int m = g.inputs();
    const Matrix s = gamma * gamma * Matrix::Identity(m, m) - g.D.transpose() * g.D;
    Eigen::LLT<Matrix> sllt(s);
    if (sllt.info() != Eigen::Success) return true;  // gamma <= sigma_max(D)
    const Matrix sinv_dt_c = sllt.solve(g.D.transpose() * g.C);
    const Matrix af = g.A + g.B * sinv_dt_c;
    Matrix ham(2 * n, 2 * n);
    ham.topLeftCorner(n, n) = af;
    ham.topRightCorner(n, n) = g.B * sllt.solve(g.B.transpose());
    ham.bottomLeftCorner(n, n) =
        -g.C.transpose() * (Matrix::Identity(g.outputs(), g.outputs()) +
                            g.D * sllt.solve(g.D.transpose())) * g.C;
    ham.bottomRightCorner(n, n) = -af.transpose();
    Matrix hb = ham;
    balance_in_place(hb);
    const double scale = std::max(1.0, hb.norm());
    for (const auto& l : eigenvalues(hb))
        if (std::abs(l.real()) < 1e-9 * std::max(1.0, std::abs(l)) &&
            std::abs(l.real()) < 1e-7 * scale)
            return true;
    return false;
}

}  // namespace detail

inline double max_singular_value(const ComplexMatrix& m) {
    return m.jacobiSvd().singularValues()(0);
}

// H-infinity norm of a stable continuous-time system by bisection on the
// Hamiltonian imaginary-axis eigenvalue test.
inline double hinf_norm(const StateSpaceModel& g, double tol = 1e-6) {
    if (!g.is_continuous()) throw std::invalid_argument("hinf_norm: continuous systems only");
    if (g.order() == 0) return max_singular_value(g.D.cast<std::complex<double>>());
    if (!is_hurwitz(g.A, 0.0))
        throw std::domain_error("hinf_norm: unstable system has unbounded norm");

    // frequency probes from the plant's eigenvalue structure plus a log sweep
    std::vector<double> probes{0.0};
    double wmin = std::numeric_limits<double>::infinity(), wmax = 0.0;
    for (const auto& l : eigenvalues(g.A)) {
        const double m = std::abs(l);
        if (m > 0.0) {
            probes.push_back(m);
            if (std::abs(l.imag()) > 0.0) probes.push_back(std::abs(l.imag()));
            wmin = std::min(wmin, m);
            wmax = std::max(wmax, m);
        }
    }
    if (!std::isfinite(wmin)) { wmin = 1e-3; wmax = 1e3; }
    for (int i = 0; i <= 40; ++i)
        probes.push_back(wmin * 0.01 * std::pow(wmax * 10000.0 / (wmin * 0.01), i / 40.0));

    double lo = max_singular_value(g.D.cast<std::complex<double>>());
    for (double w : probes)
        lo = std::max(lo, max_singular_value(freq_response(g, w)));
    if (lo == 0.0) lo = 1e-300;

    double hi = 2.0 * lo;
    int guard = 0;
    while (detail::hinf_gamma_exceeded(g, hi)) {
        hi *= 2.0;
        if (++guard > 200) throw NumericError("hinf_norm: upper bound search failed");
    }
    while (hi - lo > tol * lo) {
        const double mid = 0.5 * (lo + hi);
        if (detail::hinf_gamma_exceeded(g, mid)) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace windshape
