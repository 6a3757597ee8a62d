#pragma once

// Test-only oracles, kept independent of the implementation paths they check.

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <vector>

#include "windshape/statespace.hpp"

namespace oracle {

using windshape::ComplexMatrix;
using windshape::Matrix;
using windshape::StateSpaceModel;
using windshape::Vector;

inline Matrix random_matrix(std::mt19937& rng, int rows, int cols, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = n(rng);
    return m;
}

// Random strictly stable system: eigenvalues shifted left of -margin.
inline StateSpaceModel random_stable_system(std::mt19937& rng, int n, int m, int p,
                                            double margin = 0.3, bool strictly_proper = false) {
    Matrix a = random_matrix(rng, n, n);
    const double abscissa = Eigen::EigenSolver<Matrix>(a, false).eigenvalues().real().maxCoeff();
    a -= (abscissa + margin) * Matrix::Identity(n, n);
    Matrix d = strictly_proper ? Matrix::Zero(p, m) : random_matrix(rng, p, m, 0.3);
    return StateSpaceModel::continuous(a, random_matrix(rng, n, m), random_matrix(rng, p, n), d);
}

// Direct complex-arithmetic frequency response, independent of
// windshape::freq_response's solve path (uses full-pivot inverse).
inline ComplexMatrix freq_oracle(const StateSpaceModel& g, double w) {
    const std::complex<double> j(0.0, 1.0);
    if (g.order() == 0) return g.D.cast<std::complex<double>>();
    ComplexMatrix m = j * w * ComplexMatrix::Identity(g.order(), g.order()) -
                      g.A.cast<std::complex<double>>();
    return g.C.cast<std::complex<double>>() * m.fullPivLu().inverse() *
               g.B.cast<std::complex<double>>() +
           g.D.cast<std::complex<double>>();
}

// Characteristic polynomial coefficients by Faddeev-LeVerrier (monic, descending).
inline std::vector<double> char_poly(const Matrix& a) {
    const int n = static_cast<int>(a.rows());
    std::vector<double> c(n + 1, 0.0);
    c[0] = 1.0;
    Matrix m = Matrix::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
        m = a * m + c[k - 1] * Matrix::Identity(n, n);
        c[k] = -(a * m).trace() / k;
    }
    return c;
}

// Durand-Kerner simultaneous root iteration on a monic polynomial.
inline std::vector<std::complex<double>> poly_roots(const std::vector<double>& coeffs) {
    const int n = static_cast<int>(coeffs.size()) - 1;
    std::vector<std::complex<double>> r(n);
    const std::complex<double> seed(0.4, 0.9);
    std::complex<double> p(1.0, 0.0);
    for (int i = 0; i < n; ++i) {
        r[i] = p;
        p *= seed;
    }
    auto eval = [&](std::complex<double> x) {
        std::complex<double> v = coeffs[0];
        for (int i = 1; i <= n; ++i) v = v * x + coeffs[i];
        return v;
    };
    for (int it = 0; it < 500; ++it) {
        double move = 0.0;
        for (int i = 0; i < n; ++i) {
            std::complex<double> denom(1.0, 0.0);
            for (int k = 0; k < n; ++k)
                if (k != i) denom *= (r[i] - r[k]);
            const std::complex<double> delta = eval(r[i]) / denom;
            r[i] -= delta;
            move = std::max(move, std::abs(delta));
        }
        if (move < 1e-13) break;
    }
    return r;
}

}  // namespace oracle
