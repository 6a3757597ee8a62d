#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "windshape/common.hpp"

namespace windshape {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

// Dense (A, B, C, D) realization. `dt` empty means continuous time.
struct StateSpaceModel {
    Matrix A, B, C, D;
    std::optional<double> dt;

    int order() const { return static_cast<int>(A.rows()); }
    int inputs() const { return static_cast<int>(B.cols()); }
    int outputs() const { return static_cast<int>(C.rows()); }
    bool is_continuous() const { return !dt.has_value(); }

    static StateSpaceModel continuous(Matrix a, Matrix b, Matrix c, Matrix d) {
        StateSpaceModel g{std::move(a), std::move(b), std::move(c), std::move(d), std::nullopt};
        g.check();
        return g;
    }

    static StateSpaceModel discrete(Matrix a, Matrix b, Matrix c, Matrix d, double ts) {
        StateSpaceModel g{std::move(a), std::move(b), std::move(c), std::move(d), ts};
        g.check();
        return g;
    }

    // Static (memoryless) system y = D u.
    static StateSpaceModel gain(const Matrix& d) {
        return {Matrix::Zero(0, 0), Matrix::Zero(0, d.cols()),
                Matrix::Zero(d.rows(), 0), d, std::nullopt};
    }

    static StateSpaceModel identity(int n) { return gain(Matrix::Identity(n, n)); }

    void check() const {
        if (A.rows() != A.cols()) throw std::invalid_argument("statespace: A not square");
        if (B.rows() != A.rows()) throw std::invalid_argument("statespace: B row mismatch");
        if (C.cols() != A.rows()) throw std::invalid_argument("statespace: C col mismatch");
        if (D.rows() != C.rows() || D.cols() != B.cols())
            throw std::invalid_argument("statespace: D shape mismatch");
    }
};

// Scalar transfer function num(s)/den(s) realized in controllable canonical
// form. Coefficients in descending powers; deg num <= deg den required.
inline StateSpaceModel tf_to_ss(std::vector<double> num, std::vector<double> den) {
    while (den.size() > 1 && den.front() == 0.0) den.erase(den.begin());
    while (num.size() > 1 && num.front() == 0.0) num.erase(num.begin());
    if (den.empty() || den.front() == 0.0)
        throw std::invalid_argument("tf_to_ss: zero leading denominator");
    if (num.size() > den.size())
        throw std::invalid_argument("tf_to_ss: improper transfer function");

    const double a0 = den.front();
    for (auto& d : den) d /= a0;
    for (auto& c : num) c /= a0;
    // pad numerator to denominator length
    std::vector<double> b(den.size(), 0.0);
    std::copy(num.rbegin(), num.rend(), b.rbegin());

    const int n = static_cast<int>(den.size()) - 1;
    if (n == 0) return StateSpaceModel::gain(Matrix::Constant(1, 1, b[0]));

    Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, 1);
    Matrix C = Matrix::Zero(1, n), D = Matrix::Constant(1, 1, b[0]);
    for (int i = 0; i < n; ++i) A(0, i) = -den[i + 1];
    for (int i = 0; i + 1 < n; ++i) A(i + 1, i) = 1.0;
    B(0, 0) = 1.0;
    // y = sum (b_i - b_0 a_i) over the phase-variable states
    for (int i = 0; i < n; ++i) C(0, i) = b[i + 1] - b[0] * den[i + 1];
    return StateSpaceModel::continuous(A, B, C, D);
}

// G(jw) for continuous systems, G(e^{jw dt}) for discrete ones.
inline ComplexMatrix freq_response(const StateSpaceModel& g, double omega) {
    const std::complex<double> j(0.0, 1.0);
    const std::complex<double> s =
        g.is_continuous() ? j * omega : std::exp(j * omega * (*g.dt));
    if (g.order() == 0) return g.D.cast<std::complex<double>>();
    ComplexMatrix M = s * ComplexMatrix::Identity(g.order(), g.order()) -
                      g.A.cast<std::complex<double>>();
    Eigen::PartialPivLU<ComplexMatrix> lu(M);
    ComplexMatrix sol = lu.solve(g.B.cast<std::complex<double>>());
    if (!sol.allFinite())
        throw NumericError("freq_response: (sI - A) singular at requested frequency");
    return g.C.cast<std::complex<double>>() * sol + g.D.cast<std::complex<double>>();
}

inline std::vector<std::complex<double>> poles(const StateSpaceModel& g) {
    if (g.order() == 0) return {};
    Eigen::EigenSolver<Matrix> es(g.A, false);
    std::vector<std::complex<double>> p(g.order());
    for (int i = 0; i < g.order(); ++i) p[i] = es.eigenvalues()(i);
    return p;
}

namespace detail {
inline void require_same_domain(const StateSpaceModel& a, const StateSpaceModel& b) {
    const bool both_cont = a.is_continuous() && b.is_continuous();
    const bool both_disc = !a.is_continuous() && !b.is_continuous() && *a.dt == *b.dt;
    if (!both_cont && !both_disc)
        throw std::invalid_argument("statespace: mixed continuous/discrete composition");
}
inline std::optional<double> joint_dt(const StateSpaceModel& a, const StateSpaceModel& b) {
    require_same_domain(a, b);
    return a.dt;
}
}  // namespace detail

// second * first: signal passes through `first`, then `second`.
inline StateSpaceModel series(const StateSpaceModel& first, const StateSpaceModel& second) {
    if (second.inputs() != first.outputs())
        throw std::invalid_argument("series: dimension mismatch");
    auto dt = detail::joint_dt(first, second);
    const int n1 = first.order(), n2 = second.order();
    Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = first.A;
    A.bottomLeftCorner(n2, n1) = second.B * first.C;
    A.bottomRightCorner(n2, n2) = second.A;
    Matrix B(n1 + n2, first.inputs());
    B.topRows(n1) = first.B;
    B.bottomRows(n2) = second.B * first.D;
    Matrix C(second.outputs(), n1 + n2);
    C.leftCols(n1) = second.D * first.C;
    C.rightCols(n2) = second.C;
    Matrix D = second.D * first.D;
    return {A, B, C, D, dt};
}

// G1 + G2 (shared input, summed output).
inline StateSpaceModel parallel(const StateSpaceModel& g1, const StateSpaceModel& g2) {
    if (g1.inputs() != g2.inputs() || g1.outputs() != g2.outputs())
        throw std::invalid_argument("parallel: dimension mismatch");
    auto dt = detail::joint_dt(g1, g2);
    const int n1 = g1.order(), n2 = g2.order();
    Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = g1.A;
    A.bottomRightCorner(n2, n2) = g2.A;
    Matrix B(n1 + n2, g1.inputs());
    B.topRows(n1) = g1.B;
    B.bottomRows(n2) = g2.B;
    Matrix C(g1.outputs(), n1 + n2);
    C.leftCols(n1) = g1.C;
    C.rightCols(n2) = g2.C;
    return {A, B, C, g1.D + g2.D, dt};
}

inline StateSpaceModel negate(const StateSpaceModel& g) {
    return {g.A, g.B, -g.C, -g.D, g.dt};
}

// Block-diagonal append: diag(g1, g2).
inline StateSpaceModel append(const StateSpaceModel& g1, const StateSpaceModel& g2) {
    auto dt = detail::joint_dt(g1, g2);
    const int n1 = g1.order(), n2 = g2.order();
    Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = g1.A;
    A.bottomRightCorner(n2, n2) = g2.A;
    Matrix B = Matrix::Zero(n1 + n2, g1.inputs() + g2.inputs());
    B.topLeftCorner(n1, g1.inputs()) = g1.B;
    B.bottomRightCorner(n2, g2.inputs()) = g2.B;
    Matrix C = Matrix::Zero(g1.outputs() + g2.outputs(), n1 + n2);
    C.topLeftCorner(g1.outputs(), n1) = g1.C;
    C.bottomRightCorner(g2.outputs(), n2) = g2.C;
    Matrix D = Matrix::Zero(g1.outputs() + g2.outputs(), g1.inputs() + g2.inputs());
    D.topLeftCorner(g1.outputs(), g1.inputs()) = g1.D;
    D.bottomRightCorner(g2.outputs(), g2.inputs()) = g2.D;
    return {A, B, C, D, dt};
}

// [g1; g2]: shared input, stacked outputs.
inline StateSpaceModel vcat(const StateSpaceModel& g1, const StateSpaceModel& g2) {
    if (g1.inputs() != g2.inputs()) throw std::invalid_argument("vcat: input mismatch");
    auto dt = detail::joint_dt(g1, g2);
    const int n1 = g1.order(), n2 = g2.order();
    Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = g1.A;
    A.bottomRightCorner(n2, n2) = g2.A;
    Matrix B(n1 + n2, g1.inputs());
    B.topRows(n1) = g1.B;
    B.bottomRows(n2) = g2.B;
    Matrix C = Matrix::Zero(g1.outputs() + g2.outputs(), n1 + n2);
    C.topLeftCorner(g1.outputs(), n1) = g1.C;
    C.bottomRightCorner(g2.outputs(), n2) = g2.C;
    Matrix D(g1.outputs() + g2.outputs(), g1.inputs());
    D.topRows(g1.outputs()) = g1.D;
    D.bottomRows(g2.outputs()) = g2.D;
    return {A, B, C, D, dt};
}

// [g1, g2]: concatenated inputs, shared output rows.
inline StateSpaceModel hcat(const StateSpaceModel& g1, const StateSpaceModel& g2) {
    if (g1.outputs() != g2.outputs()) throw std::invalid_argument("hcat: output mismatch");
    auto dt = detail::joint_dt(g1, g2);
    const int n1 = g1.order(), n2 = g2.order();
    Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = g1.A;
    A.bottomRightCorner(n2, n2) = g2.A;
    Matrix B = Matrix::Zero(n1 + n2, g1.inputs() + g2.inputs());
    B.topLeftCorner(n1, g1.inputs()) = g1.B;
    B.bottomRightCorner(n2, g2.inputs()) = g2.B;
    Matrix C(g1.outputs(), n1 + n2);
    C.leftCols(n1) = g1.C;
    C.rightCols(n2) = g2.C;
    Matrix D(g1.outputs(), g1.inputs() + g2.inputs());
    D.leftCols(g1.inputs()) = g1.D;
    D.rightCols(g2.inputs()) = g2.D;
    return {A, B, C, D, dt};
}

// Inverse of a square system with invertible D.
inline StateSpaceModel inverse(const StateSpaceModel& g) {
    if (g.inputs() != g.outputs()) throw std::invalid_argument("inverse: non-square system");
    Eigen::FullPivLU<Matrix> lu(g.D);
    if (!lu.isInvertible()) throw NumericError("inverse: singular feedthrough");
    Matrix Dinv = lu.inverse();
    return {g.A - g.B * Dinv * g.C, g.B * Dinv, -Dinv * g.C, Dinv, g.dt};
}

// Closed-loop state matrix of the positive-feedback loop u = K y + w around G.
inline Matrix closed_loop_state_matrix(const StateSpaceModel& g, const StateSpaceModel& k) {
    if (k.inputs() != g.outputs() || g.inputs() != k.outputs())
        throw std::invalid_argument("feedback: dimension mismatch");
    detail::require_same_domain(g, k);
    const int ng = g.order(), nk = k.order();
    const Matrix E = Matrix::Identity(g.outputs(), g.outputs()) - g.D * k.D;
    Eigen::FullPivLU<Matrix> lu(E);
    if (!lu.isInvertible()) throw NumericError("feedback: algebraic loop (I - Dg Dk singular)");
    const Matrix Einv = lu.inverse();
    // y = Einv (Cg xg + Dg Ck xk), u = Ck xk + Dk y
    Matrix Acl = Matrix::Zero(ng + nk, ng + nk);
    const Matrix Cy_g = Einv * g.C;
    const Matrix Cy_k = Einv * g.D * k.C;
    Acl.topLeftCorner(ng, ng) = g.A + g.B * k.D * Cy_g;
    Acl.topRightCorner(ng, nk) = g.B * (k.C + k.D * Cy_k);
    Acl.bottomLeftCorner(nk, ng) = k.B * Cy_g;
    Acl.bottomRightCorner(nk, nk) = k.A + k.B * Cy_k;
    return Acl;
}

// Closed loop w -> y with u = K y + w, i.e. G (I - K G)^{-1}.
inline StateSpaceModel feedback(const StateSpaceModel& g, const StateSpaceModel& k) {
    if (k.inputs() != g.outputs() || g.inputs() != k.outputs())
        throw std::invalid_argument("feedback: dimension mismatch");
    auto dt = detail::joint_dt(g, k);
    const int ng = g.order(), nk = k.order();
    const Matrix E = Matrix::Identity(g.outputs(), g.outputs()) - g.D * k.D;
    Eigen::FullPivLU<Matrix> lu(E);
    if (!lu.isInvertible()) throw NumericError("feedback: algebraic loop (I - Dg Dk singular)");
    const Matrix Einv = lu.inverse();
    const Matrix Cy_g = Einv * g.C;
    const Matrix Cy_k = Einv * g.D * k.C;
    const Matrix Dy = Einv * g.D;
    Matrix A = Matrix::Zero(ng + nk, ng + nk);
    A.topLeftCorner(ng, ng) = g.A + g.B * k.D * Cy_g;
    A.topRightCorner(ng, nk) = g.B * (k.C + k.D * Cy_k);
    A.bottomLeftCorner(nk, ng) = k.B * Cy_g;
    A.bottomRightCorner(nk, nk) = k.A + k.B * Cy_k;
    Matrix B(ng + nk, g.inputs());
    B.topRows(ng) = g.B + g.B * k.D * Dy;
    B.bottomRows(nk) = k.B * Dy;
    Matrix C(g.outputs(), ng + nk);
    C.leftCols(ng) = Cy_g;
    C.rightCols(nk) = Cy_k;
    return {A, B, C, Dy, dt};
}

}  // namespace windshape
