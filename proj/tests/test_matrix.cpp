#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "potentia/matrix.hpp"
#include "test_support.hpp"

using namespace potentia;
using test_support::random_density;
using test_support::random_hermitian;
using test_support::random_unit_vector;

namespace {

CMatrix diag2(double a, double b) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

}  // namespace

TEST_CASE("make_density accepts the rank-one matrix of a superposition") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        UnitVector v = random_unit_vector(2, rng);
        Complex a = v.coeffs()[0], b = v.coeffs()[1];
        CMatrix m(2, 2);
        m << std::norm(a), a * std::conj(b), std::conj(a) * b, std::norm(b);
        DensityMatrix rho = make_density(m);
        CHECK(rho.dim() == 2);
    }
}

TEST_CASE("make_density accepts the maximally mixed qubit") {
    DensityMatrix rho = make_density(diag2(0.5, 0.5));
    CHECK(rho.matrix()(0, 0).real() == 0.5);
}

TEST_CASE("make_density rejects trace-two input") {
    CHECK_THROWS_AS(make_density(diag2(1.0, 1.0)), TraceNotOne);
}

TEST_CASE("make_density rejects indefinite and non-Hermitian input") {
    CHECK_THROWS_AS(make_density(diag2(2.0, -1.0)), NotPositive);
    CMatrix skew(2, 2);
    skew << 0.5, Complex(0.0, 0.3), Complex(0.0, 0.3), 0.5;
    CHECK_THROWS_AS(make_density(skew), NotHermitian);
}

TEST_CASE("vector_to_projector on standard and real vectors") {
    CVector e0(2);
    e0 << 1.0, 0.0;
    Projector p = vector_to_projector(UnitVector(e0));
    CHECK(p.rank() == 1);
    CHECK(p.matrix()(0, 0) == Complex(1.0, 0.0));
    CHECK(p.matrix()(1, 1) == Complex(0.0, 0.0));

    // (a, b) real gives [[a^2, ab], [ab, b^2]]
    CVector v(2);
    v << 0.6, 0.8;
    Projector q = vector_to_projector(UnitVector(v));
    CHECK_THAT(q.matrix()(0, 0).real(), Catch::Matchers::WithinAbs(0.36, 1e-15));
    CHECK_THAT(q.matrix()(0, 1).real(), Catch::Matchers::WithinAbs(0.48, 1e-15));
    CHECK_THAT(q.matrix()(1, 0).real(), Catch::Matchers::WithinAbs(0.48, 1e-15));
    CHECK_THAT(q.matrix()(1, 1).real(), Catch::Matchers::WithinAbs(0.64, 1e-15));
}

TEST_CASE("vector_to_projector of the balanced superposition") {
    double s = 1.0 / std::sqrt(2.0);
    CVector v(2);
    v << s, s;
    Projector p = vector_to_projector(UnitVector(v));
    for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j)
            CHECK_THAT(p.matrix()(i, j).real(), Catch::Matchers::WithinAbs(0.5, 1e-15));
}

TEST_CASE("vector_to_projector output is rank one and projector-valid") {
    std::mt19937_64 rng(22);
    for (Index dim = 2; dim <= 8; ++dim) {
        for (int trial = 0; trial < 20; ++trial) {
            Projector p = vector_to_projector(random_unit_vector(dim, rng));
            CHECK(p.rank() == 1);
        }
    }
}

TEST_CASE("vector_to_projector is phase invariant") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    Tolerances tol;
    for (int trial = 0; trial < 100; ++trial) {
        UnitVector v = random_unit_vector(4, rng);
        Complex phase = std::polar(1.0, angle(rng));
        UnitVector w(phase * v.coeffs());
        Projector pv = vector_to_projector(v);
        Projector pw = vector_to_projector(w);
        CHECK((pv.matrix() - pw.matrix()).cwiseAbs().maxCoeff() <= tol.eig);
    }
}

TEST_CASE("vector_to_projector rejects unnormalized input") {
    CVector v(2);
    v << 1.0, 1.0;
    CHECK_THROWS_AS(UnitVector(v), NotNormalized);
}

TEST_CASE("eigen_hermitian of a diagonal matrix") {
    EigenSystem es = eigen_hermitian(diag2(0.5, 0.5));
    CHECK_THAT(es.values[0], Catch::Matchers::WithinAbs(0.5, 1e-15));
    CHECK_THAT(es.values[1], Catch::Matchers::WithinAbs(0.5, 1e-15));
}

TEST_CASE("eigen_hermitian rejects non-Hermitian input") {
    CMatrix m(2, 2);
    m << 1.0, 2.0, 3.0, 4.0;
    CHECK_THROWS_AS(eigen_hermitian(m), NotHermitian);
}

TEST_CASE("projector eigenvalues sit on {0, 1}") {
    std::mt19937_64 rng(44);
    Tolerances tol;
    for (int trial = 0; trial < 50; ++trial) {
        // random rank-2 projector in dim 4 from an orthonormal pair
        auto basis = test_support::random_orthonormal_basis(4, rng);
        CMatrix m = basis[0].coeffs() * basis[0].coeffs().adjoint() +
                    basis[1].coeffs() * basis[1].coeffs().adjoint();
        Projector p(m);
        CHECK(p.rank() == 2);
        EigenSystem es = eigen_hermitian(p.matrix());
        for (Index i = 0; i < es.values.size(); ++i) {
            double d = std::min(std::abs(es.values[i]), std::abs(es.values[i] - 1.0));
            CHECK(d <= tol.eig);
        }
    }
}

TEST_CASE("eigen_hermitian round trip on 1000 random Hermitian matrices") {
    std::mt19937_64 rng(55);
    std::uniform_int_distribution<int> dims(2, 8);
    Tolerances tol;
    for (int trial = 0; trial < 1000; ++trial) {
        Index dim = dims(rng);
        CMatrix h = random_hermitian(dim, rng);
        EigenSystem es = eigen_hermitian(h);
        CMatrix recon = es.vectors * es.values.asDiagonal() * es.vectors.adjoint();
        CHECK((recon - h).norm() < 1e-9);
        CHECK((es.vectors.adjoint() * es.vectors - CMatrix::Identity(dim, dim)).norm() <=
              tol.orth);
        for (Index i = 0; i + 1 < es.values.size(); ++i)
            CHECK(es.values[i] <= es.values[i + 1]);
    }
}

TEST_CASE("eigen_hermitian is deterministic for fixed input") {
    std::mt19937_64 rng(66);
    CMatrix h = random_hermitian(5, rng);
    EigenSystem a = eigen_hermitian(h);
    EigenSystem b = eigen_hermitian(h);
    CHECK(a.values == b.values);
    CHECK(a.vectors == b.vectors);
}

TEST_CASE("density matrix eigenvalues lie in [0, 1] and sum to one") {
    std::mt19937_64 rng(77);
    Tolerances tol;
    for (int trial = 0; trial < 200; ++trial) {
        DensityMatrix rho = random_density(3, rng);
        EigenSystem es = eigen_hermitian(rho.matrix());
        double sum = 0.0;
        for (Index i = 0; i < es.values.size(); ++i) {
            CHECK(es.values[i] >= -tol.eig);
            CHECK(es.values[i] <= 1.0 + tol.eig);
            sum += es.values[i];
        }
        CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, tol.trace));
    }
}

TEST_CASE("complete_to_basis canonical completions") {
    CVector e0(2);
    e0 << 1.0, 0.0;
    auto basis = complete_to_basis({UnitVector(e0)}, 2);
    REQUIRE(basis.size() == 2);
    CHECK(basis[0].coeffs()[0] == Complex(1.0, 0.0));
    CHECK(basis[1].coeffs()[0] == Complex(0.0, 0.0));
    CHECK(basis[1].coeffs()[1] == Complex(1.0, 0.0));

    auto full = complete_to_basis({}, 3);
    REQUIRE(full.size() == 3);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j)
            CHECK(full[i].coeffs()[j] == (i == j ? Complex(1.0, 0.0) : Complex(0.0, 0.0)));
}

TEST_CASE("complete_to_basis extends the balanced superposition") {
    double s = 1.0 / std::sqrt(2.0);
    CVector v(2);
    v << s, s;
    auto basis = complete_to_basis({UnitVector(v)}, 2);
    REQUIRE(basis.size() == 2);
    CHECK_THAT(std::abs(basis[0].coeffs().dot(basis[1].coeffs())),
               Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(basis[1].coeffs().norm(), Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("complete_to_basis output is orthonormal with inputs in front") {
    std::mt19937_64 rng(88);
    Tolerances tol;
    for (int trial = 0; trial < 50; ++trial) {
        auto seed_basis = test_support::random_orthonormal_basis(5, rng);
        std::vector<UnitVector> partial(seed_basis.begin(), seed_basis.begin() + 2);
        auto basis = complete_to_basis(partial, 5);
        REQUIRE(basis.size() == 5);
        CHECK(basis[0].coeffs() == partial[0].coeffs());
        CHECK(basis[1].coeffs() == partial[1].coeffs());
        for (std::size_t i = 0; i < basis.size(); ++i)
            for (std::size_t j = i + 1; j < basis.size(); ++j)
                CHECK(std::abs(basis[i].coeffs().dot(basis[j].coeffs())) <= 10 * tol.orth);
    }
}

TEST_CASE("complete_to_basis rejects bad input families") {
    CVector e0(2), nearly(2);
    e0 << 1.0, 0.0;
    nearly << 0.9999, std::sqrt(1.0 - 0.9999 * 0.9999);
    CHECK_THROWS_AS(complete_to_basis({UnitVector(e0), UnitVector(nearly)}, 2),
                    NotOrthonormal);
    CVector e1(2);
    e1 << 0.0, 1.0;
    CHECK_THROWS_AS(
        complete_to_basis({UnitVector(e0), UnitVector(e1), UnitVector(e0)}, 2),
        TooManyVectors);
}
