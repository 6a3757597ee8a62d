#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracle_helpers.hpp"
#include "windshape/statespace.hpp"

using namespace windshape;
using Catch::Approx;

namespace {
std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
    return w;
}
}  // namespace

TEST_CASE("freq_response matches hand formulas") {
    auto g = StateSpaceModel::continuous(Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 1.0),
                                         Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1));
    // |1/(1+j)| = 1/sqrt(2)
    CHECK(std::abs(freq_response(g, 1.0)(0, 0)) == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    // strictly proper rolloff: response at 1e9 rad/s is D up to 1e-6
    CHECK(std::abs(freq_response(g, 1e9)(0, 0)) < 1e-6);

    // DC gain equals -C A^-1 B + D for a random stable system
    std::mt19937 rng(42);
    auto h = oracle::random_stable_system(rng, 5, 2, 3);
    Matrix dc = -h.C * h.A.fullPivLu().inverse() * h.B + h.D;
    CHECK((freq_response(h, 0.0).real() - dc).norm() < 1e-10 * (1.0 + dc.norm()));
    CHECK(freq_response(h, 0.0).imag().norm() < 1e-10);
}

TEST_CASE("series with identity is a no-op in frequency response") {
    std::mt19937 rng(7);
    auto g = oracle::random_stable_system(rng, 4, 2, 3);
    auto gi = series(StateSpaceModel::identity(2), g);
    auto ig = series(g, StateSpaceModel::identity(3));
    for (double w : log_grid(1e-3, 1e3, 20)) {
        CHECK((freq_response(gi, w) - freq_response(g, w)).norm() < 1e-10);
        CHECK((freq_response(ig, w) - freq_response(g, w)).norm() < 1e-10);
    }
}

TEST_CASE("series of stable scalars keeps the union of poles") {
    auto g1 = tf_to_ss({1.0}, {1.0, 2.0});  // pole -2
    auto g2 = tf_to_ss({3.0}, {1.0, 5.0});  // pole -5
    auto gs = series(g1, g2);
    auto p = poles(gs);
    REQUIRE(p.size() == 2);
    std::sort(p.begin(), p.end(), [](auto a, auto b) { return a.real() < b.real(); });
    CHECK(p[0].real() == Approx(-5.0).margin(1e-12));
    CHECK(p[1].real() == Approx(-2.0).margin(1e-12));
}

TEST_CASE("composition algebra matches pointwise complex products") {
    std::mt19937 rng(11);
    auto g1 = oracle::random_stable_system(rng, 4, 2, 3);
    auto g2 = oracle::random_stable_system(rng, 3, 3, 2);
    auto cascade = series(g1, g2);
    auto sum = parallel(g1, oracle::random_stable_system(rng, 2, 2, 3));
    auto sum_b = parallel(oracle::random_stable_system(rng, 2, 2, 3), g1);
    (void)sum_b;
    for (double w : log_grid(1e-3, 1e3, 50)) {
        ComplexMatrix ref = oracle::freq_oracle(g2, w) * oracle::freq_oracle(g1, w);
        CHECK((freq_response(cascade, w) - ref).norm() < 1e-8 * (1.0 + ref.norm()));
    }
}

TEST_CASE("feedback realization equals G(I-KG)^-1 pointwise") {
    std::mt19937 rng(13);
    auto g = oracle::random_stable_system(rng, 4, 2, 3);
    auto k = oracle::random_stable_system(rng, 3, 3, 2, 0.3, true);
    // scale the loop down so it stays well posed
    k.C *= 0.1;
    auto cl = feedback(g, k);
    for (double w : log_grid(1e-2, 1e2, 25)) {
        ComplexMatrix gw = oracle::freq_oracle(g, w);
        ComplexMatrix kw = oracle::freq_oracle(k, w);
        ComplexMatrix ref =
            gw * (ComplexMatrix::Identity(2, 2) - kw * gw).fullPivLu().inverse();
        CHECK((freq_response(cl, w) - ref).norm() < 1e-8 * (1.0 + ref.norm()));
    }
}

TEST_CASE("feedback rejects algebraic loops") {
    auto g = StateSpaceModel::gain(Matrix::Identity(2, 2));
    auto k = StateSpaceModel::gain(Matrix::Identity(2, 2));
    CHECK_THROWS_AS(feedback(g, k), NumericError);
}

TEST_CASE("inverse realization inverts the frequency response") {
    std::mt19937 rng(17);
    auto g = oracle::random_stable_system(rng, 3, 2, 2);
    g.D += 2.0 * Matrix::Identity(2, 2);  // keep D invertible
    auto gi = inverse(g);
    for (double w : log_grid(1e-2, 1e2, 15)) {
        ComplexMatrix prod = oracle::freq_oracle(g, w) * freq_response(gi, w);
        CHECK((prod - ComplexMatrix::Identity(2, 2)).norm() < 1e-8);
    }
}

TEST_CASE("tf_to_ss realizes the rational function it was given") {
    // PI element (0.5 s + 0.25)/(0.01 s^2 + s): poles at 0 and -100
    auto pi = tf_to_ss({0.5, 0.25}, {0.01, 1.0, 0.0});
    auto p = poles(pi);
    REQUIRE(p.size() == 2);
    std::sort(p.begin(), p.end(), [](auto a, auto b) { return a.real() < b.real(); });
    CHECK(p[0].real() == Approx(-100.0).margin(1e-9));
    CHECK(std::abs(p[1]) < 1e-12);

    auto eval = [](const std::vector<double>& c, std::complex<double> s) {
        std::complex<double> v = 0.0;
        for (double ci : c) v = v * s + ci;
        return v;
    };
    for (double w : log_grid(1e-2, 1e4, 30)) {
        std::complex<double> s(0.0, w);
        auto ref = eval({0.5, 0.25}, s) / eval({0.01, 1.0, 0.0}, s);
        CHECK(std::abs(freq_response(pi, w)(0, 0) - ref) < 1e-9 * (1.0 + std::abs(ref)));
    }

    CHECK_THROWS(tf_to_ss({1.0, 2.0, 3.0}, {1.0, 1.0}));  // improper
}
