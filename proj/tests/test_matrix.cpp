#include <catch2/catch_amalgamated.hpp>

#include "ncpoly/matrix.hpp"
#include "ncpoly/random.hpp"
#include "ncpoly/rng.hpp"

using namespace ncpoly;

TEST_CASE("is_psd: identity and negative definite") {
    CHECK(is_psd(ComplexMatrix::Identity(3, 3)));
    CHECK_FALSE(is_psd(-ComplexMatrix::Identity(2, 2)));
}

TEST_CASE("is_psd: Gram matrices are PSD by construction") {
    Prng rng(11);
    for (int t = 0; t < 20; ++t) {
        ComplexMatrix w = random_matrix(rng, 4, 2);
        CHECK(is_psd(w.adjoint() * w));
    }
}

TEST_CASE("is_psd: rejects non-Hermitian and non-square") {
    ComplexMatrix m(2, 2);
    m << 1.0, Complex(0.0, 1.0), Complex(0.0, 1.0), 1.0;  // symmetric, not Hermitian
    CHECK_FALSE(is_psd(m));
    CHECK_THROWS_AS(is_psd(ComplexMatrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("psd_factor: identity") {
    ComplexMatrix w = psd_factor(ComplexMatrix::Identity(2, 2));
    REQUIRE(w.rows() == 2);
    CHECK(max_abs(ComplexMatrix(w.adjoint() * w) - ComplexMatrix::Identity(2, 2)) < 1e-12);
}

TEST_CASE("psd_factor: zero matrix gives empty factor") {
    ComplexMatrix w = psd_factor(ComplexMatrix::Zero(3, 3));
    CHECK(w.rows() == 0);
    CHECK(w.cols() == 3);
}

TEST_CASE("psd_factor: round-trip on random Gram matrices") {
    Prng rng(12);
    ComplexMatrix a = random_matrix(rng, 3, 3);
    ComplexMatrix g = a.adjoint() * a;
    ComplexMatrix w = psd_factor(g);
    CHECK(max_abs(g - ComplexMatrix(w.adjoint() * w)) <= 1e-8);
}

TEST_CASE("psd_factor: round-trip up to 12x12") {
    Prng rng(13);
    for (int t = 0; t < 15; ++t) {
        Eigen::Index n = rng.uniform_int(1, 12);
        Eigen::Index r = rng.uniform_int(0, static_cast<int>(n));
        ComplexMatrix g = random_psd(rng, n, r);
        ComplexMatrix w = psd_factor(g);
        CHECK(max_abs(g - ComplexMatrix(w.adjoint() * w)) <= 1e-8 * std::max(1.0, max_abs(g)));
    }
}

TEST_CASE("psd_factor: indefinite input throws with the offending eigenvalue") {
    ComplexMatrix m(2, 2);
    m << 1.0, 0.0, 0.0, -0.5;
    try {
        psd_factor(m);
        FAIL("expected NotPsdError");
    } catch (const NotPsdError& e) {
        CHECK(e.min_eigenvalue == Catch::Approx(-0.5).margin(1e-12));
    }
}

TEST_CASE("psd_factor exposes exact pseudo-inverse of the factor") {
    Prng rng(14);
    ComplexMatrix g = random_psd(rng, 6, 4);
    PsdFactorization f = psd_factor_full(g);
    REQUIRE(f.w.rows() == 4);
    CHECK(max_abs(ComplexMatrix(f.w * f.w_pinv) - ComplexMatrix::Identity(4, 4)) < 1e-10);
    CHECK(max_abs(ComplexMatrix(f.w_pinv * f.w) -
                  ComplexMatrix(f.w_pinv * ComplexMatrix(f.w * f.w_pinv * f.w))) < 1e-10);
}

TEST_CASE("pinv: diagonal and identity") {
    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = 2.0;
    ComplexMatrix p = pinv(d);
    CHECK(p(0, 0) == Complex(0.5, 0.0));
    CHECK(std::abs(p(1, 1)) == 0.0);
    CHECK(max_abs(pinv(ComplexMatrix::Identity(3, 3)) - ComplexMatrix::Identity(3, 3)) < 1e-12);
}

TEST_CASE("pinv: inverse of random full-rank matrices") {
    Prng rng(15);
    ComplexMatrix m = random_matrix(rng, 3, 3);
    CHECK(max_abs(ComplexMatrix(pinv(m) * m) - ComplexMatrix::Identity(3, 3)) <= 1e-8);
}

TEST_CASE("pinv: Penrose identities on conditioned random inputs") {
    Prng rng(16);
    for (int t = 0; t < 10; ++t) {
        Eigen::Index rows = rng.uniform_int(2, 6);
        Eigen::Index cols = rng.uniform_int(2, 6);
        Eigen::Index k = std::min(rows, cols);
        // Controlled spectrum keeps the condition number within the tested class.
        ComplexMatrix u = random_unitary(rng, rows);
        ComplexMatrix v = random_unitary(rng, cols);
        RealVector sv(k);
        for (Eigen::Index i = 0; i < k; ++i) sv(i) = std::pow(10.0, rng.uniform(-4.0, 0.0));
        ComplexMatrix m = ComplexMatrix::Zero(rows, cols);
        for (Eigen::Index i = 0; i < k; ++i) m += sv(i) * u.col(i) * v.col(i).adjoint();

        ComplexMatrix p = pinv(m);
        double scale = std::max(1.0, max_abs(m));
        CHECK(max_abs(ComplexMatrix(m * p * m) - m) <= 1e-8 * scale);
        CHECK(max_abs(ComplexMatrix(p * m * p) - p) <= 1e-8 * std::max(1.0, max_abs(p)));
        ComplexMatrix mp = m * p;
        ComplexMatrix pm = p * m;
        CHECK(max_abs(mp - ComplexMatrix(mp.adjoint())) <= 1e-8);
        CHECK(max_abs(pm - ComplexMatrix(pm.adjoint())) <= 1e-8);
    }
}

TEST_CASE("kron: identities and zero") {
    CHECK(max_abs(kron(ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(3, 3)) -
                  ComplexMatrix::Identity(6, 6)) == 0.0);
    Prng rng(17);
    ComplexMatrix a = random_matrix(rng, 3, 2);
    CHECK(max_abs(kron(a, ComplexMatrix::Zero(2, 2))) == 0.0);
}

TEST_CASE("kron: trace multiplicativity and associativity") {
    Prng rng(18);
    ComplexMatrix a = random_matrix(rng, 3, 3);
    ComplexMatrix b = random_matrix(rng, 3, 3);
    ComplexMatrix c = random_matrix(rng, 2, 2);
    CHECK(std::abs(kron(a, b).trace() - a.trace() * b.trace()) < 1e-12);
    CHECK(max_abs(kron(kron(a, b), c) - kron(a, kron(b, c))) < 1e-14);
}

TEST_CASE("kron: index convention") {
    ComplexMatrix a(2, 2), b(2, 2);
    a << 1.0, 2.0, 3.0, 4.0;
    b << 5.0, 6.0, 7.0, 8.0;
    ComplexMatrix k = kron(a, b);
    CHECK(k(0 * 2 + 1, 1 * 2 + 0) == a(0, 1) * b(1, 0));
    CHECK(k(1 * 2 + 0, 0 * 2 + 1) == a(1, 0) * b(0, 1));
}

TEST_CASE("partial_trace: product case") {
    Prng rng(19);
    ComplexMatrix r1 = random_psd(rng, 2);
    ComplexMatrix r2 = random_psd(rng, 3);
    ComplexMatrix m = kron(r1, r2);
    CHECK(max_abs(partial_trace(m, 2, 3, TraceSide::second) - ComplexMatrix(r1 * r2.trace())) <
          1e-12);
    CHECK(max_abs(partial_trace(m, 2, 3, TraceSide::first) - ComplexMatrix(r2 * r1.trace())) <
          1e-12);
}

TEST_CASE("partial_trace: maximally entangled 2-qubit projector") {
    ComplexVector bell = ComplexVector::Zero(4);
    bell(0) = 1.0 / std::sqrt(2.0);
    bell(3) = 1.0 / std::sqrt(2.0);
    ComplexMatrix rho = bell * bell.adjoint();
    ComplexMatrix half = 0.5 * ComplexMatrix::Identity(2, 2);
    CHECK(max_abs(partial_trace(rho, 2, 2, TraceSide::second) - half) < 1e-14);
    CHECK(max_abs(partial_trace(rho, 2, 2, TraceSide::first) - half) < 1e-14);
}

TEST_CASE("partial_trace: preserves trace and linearity") {
    Prng rng(20);
    ComplexMatrix m = random_matrix(rng, 6, 6);
    ComplexMatrix n = random_matrix(rng, 6, 6);
    CHECK(std::abs(partial_trace(m, 2, 3, TraceSide::second).trace() - m.trace()) < 1e-12);
    CHECK(std::abs(partial_trace(m, 2, 3, TraceSide::first).trace() - m.trace()) < 1e-12);
    Complex alpha(0.3, -1.2);
    CHECK(max_abs(partial_trace(ComplexMatrix(alpha * m + n), 2, 3, TraceSide::second) -
                  ComplexMatrix(alpha * partial_trace(m, 2, 3, TraceSide::second) +
                                partial_trace(n, 2, 3, TraceSide::second))) < 1e-12);
    CHECK_THROWS_AS(partial_trace(m, 2, 2, TraceSide::second), DimensionError);
}
