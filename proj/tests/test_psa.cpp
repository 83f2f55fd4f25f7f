#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "potentia/psa.hpp"
#include "test_support.hpp"

using namespace potentia;
using Catch::Matchers::WithinAbs;
using test_support::random_density;
using test_support::random_orthonormal_basis;
using test_support::random_pure_density;
using test_support::random_unit_vector;

namespace {

Projector diag_projector(std::initializer_list<double> d) {
    CMatrix m = CMatrix::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
    Index i = 0;
    for (double x : d) m(i, i) = x, ++i;
    return Projector(m);
}

RankOneContext computational_context(Index dim) {
    std::vector<std::pair<std::string, UnitVector>> members;
    for (Index i = 0; i < dim; ++i) {
        CVector e = CVector::Zero(dim);
        e[i] = 1.0;
        members.emplace_back("P" + std::to_string(i), UnitVector(e));
    }
    return RankOneContext::from_vectors(std::move(members));
}

RankOneContext basis_context(const std::vector<UnitVector>& basis, const std::string& prefix) {
    std::vector<std::pair<std::string, UnitVector>> members;
    for (std::size_t i = 0; i < basis.size(); ++i)
        members.emplace_back(prefix + std::to_string(i), basis[i]);
    return RankOneContext::from_vectors(std::move(members));
}

DensityMatrix pure_state(const CVector& v) {
    return DensityMatrix(v * v.adjoint() / v.squaredNorm());
}

// Gram-matrix rank of a projector family under <A,B> = Tr(AB); independent
// of the design-matrix path used by reconstruct_density.
Index gram_rank(const std::vector<std::pair<std::string, Projector>>& family) {
    const Index m = static_cast<Index>(family.size());
    Eigen::MatrixXd gram(m, m);
    for (Index a = 0; a < m; ++a)
        for (Index b = 0; b < m; ++b)
            gram(a, b) = (family[a].second.matrix() * family[b].second.matrix())
                             .trace()
                             .real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    Index rank = 0;
    for (Index i = 0; i < m; ++i)
        if (es.eigenvalues()[i] > 1e-10 * scale) ++rank;
    return rank;
}

}  // namespace

TEST_CASE("evaluate_psa reproduces the Born values of a qubit superposition") {
    std::mt19937_64 rng(404);
    PowerGraph g = build_commutation_graph(
        {{"P0", diag_projector({1, 0})}, {"P1", diag_projector({0, 1})}});
    for (int trial = 0; trial < 50; ++trial) {
        UnitVector v = random_unit_vector(2, rng);
        PSA psa = evaluate_psa(pure_state(v.coeffs()), g);
        CHECK_THAT(psa.potentia("P0"), WithinAbs(std::norm(v.coeffs()[0]), 1e-12));
        CHECK_THAT(psa.potentia("P1"), WithinAbs(std::norm(v.coeffs()[1]), 1e-12));
    }
}

TEST_CASE("evaluate_psa of the maximally mixed qubit") {
    PowerGraph g = build_commutation_graph(
        {{"P0", diag_projector({1, 0})}, {"P1", diag_projector({0, 1})}});
    PSA psa = evaluate_psa(make_density(0.5 * CMatrix::Identity(2, 2)), g);
    CHECK_THAT(psa.potentia("P0"), WithinAbs(0.5, 1e-15));
    CHECK_THAT(psa.potentia("P1"), WithinAbs(0.5, 1e-15));
}

TEST_CASE("evaluate_psa in the state's own eigenbasis gives (1, 0)") {
    // a pure state seen from a context containing it: potentia 1 with
    // certainty on its own power, 0 on the orthogonal one
    double a = 0.6, b = 0.8;
    CVector v(2), w(2);
    v << a, b;
    w << -b, a;
    PowerGraph g = build_commutation_graph(
        {{"Pv", vector_to_projector(UnitVector(v))}, {"Pw", vector_to_projector(UnitVector(w))}});
    PSA psa = evaluate_psa(pure_state(v), g);
    CHECK_THAT(psa.potentia("Pv"), WithinAbs(1.0, 1e-12));
    CHECK_THAT(psa.potentia("Pw"), WithinAbs(0.0, 1e-12));
}

TEST_CASE("evaluate_psa rejects dimension mismatch and missing ids error") {
    PowerGraph g = build_commutation_graph({{"P0", diag_projector({1, 0})}});
    CHECK_THROWS_AS(evaluate_psa(make_density(CMatrix::Identity(3, 3) / 3.0), g),
                    DimensionMismatch);
    PSA psa = evaluate_psa(make_density(0.5 * CMatrix::Identity(2, 2)), g);
    CHECK_THROWS_AS(psa.potentia("absent"), MissingNode);
}

TEST_CASE("per-context normalization of the Born valuation") {
    std::mt19937_64 rng(505);
    Tolerances tol;
    for (Index dim = 2; dim <= 5; ++dim) {
        for (int trial = 0; trial < 30; ++trial) {
            DensityMatrix rho = random_density(dim, rng);
            auto basis = random_orthonormal_basis(dim, rng);
            std::vector<std::pair<std::string, Projector>> nodes;
            for (Index i = 0; i < dim; ++i)
                nodes.emplace_back("P" + std::to_string(i), vector_to_projector(basis[i]));
            PSA psa = evaluate_psa(rho, build_commutation_graph(std::move(nodes)));
            double sum = 0.0;
            for (const auto& [id, p] : psa.table) sum += p;
            CHECK_THAT(sum, WithinAbs(1.0, tol.born));
        }
    }
}

TEST_CASE("quantum_perspective in the computational basis") {
    double a = 0.6, b = 0.8;
    CVector v(2);
    v << a, b;
    QuantumPerspective qp =
        quantum_perspective(pure_state(v), computational_context(2));
    REQUIRE(qp.coefficients.has_value());
    CHECK_THAT((*qp.coefficients)[0].real(), WithinAbs(a, 1e-12));
    CHECK_THAT((*qp.coefficients)[1].real(), WithinAbs(b, 1e-12));
    CHECK_THAT(qp.potentia[0], WithinAbs(a * a, 1e-12));
    CHECK_THAT(qp.potentia[1], WithinAbs(b * b, 1e-12));
}

TEST_CASE("quantum_perspective in the state's own context") {
    double a = 0.6, b = 0.8;
    CVector v(2), w(2);
    v << a, b;
    w << -b, a;
    RankOneContext own = RankOneContext::from_vectors(
        {{"v", UnitVector(v)}, {"w", UnitVector(w)}});
    QuantumPerspective qp = quantum_perspective(pure_state(v), own);
    REQUIRE(qp.coefficients.has_value());
    CHECK_THAT(std::abs((*qp.coefficients)[0]), WithinAbs(1.0, 1e-12));
    CHECK_THAT(std::abs((*qp.coefficients)[1]), WithinAbs(0.0, 1e-12));
    CHECK_THAT(qp.potentia[0], WithinAbs(1.0, 1e-12));
    CHECK_THAT(qp.potentia[1], WithinAbs(0.0, 1e-12));
}

TEST_CASE("quantum_perspective of a mixture has potentia but no coefficients") {
    std::mt19937_64 rng(606);
    DensityMatrix mixed = make_density(0.5 * CMatrix::Identity(2, 2));
    for (int trial = 0; trial < 10; ++trial) {
        RankOneContext ctx = basis_context(random_orthonormal_basis(2, rng), "q");
        QuantumPerspective qp = quantum_perspective(mixed, ctx);
        CHECK_FALSE(qp.coefficients.has_value());
        CHECK_THAT(qp.potentia[0], WithinAbs(0.5, 1e-12));
        CHECK_THAT(qp.potentia[1], WithinAbs(0.5, 1e-12));
    }
}

TEST_CASE("quantum_perspective coefficients square to potentia") {
    std::mt19937_64 rng(707);
    Tolerances tol;
    for (Index dim = 2; dim <= 4; ++dim)
        for (int trial = 0; trial < 25; ++trial) {
            DensityMatrix rho = random_pure_density(dim, rng);
            RankOneContext ctx = basis_context(random_orthonormal_basis(dim, rng), "q");
            QuantumPerspective qp = quantum_perspective(rho, ctx);
            REQUIRE(qp.coefficients.has_value());
            double total = 0.0;
            for (std::size_t i = 0; i < ctx.size(); ++i) {
                CHECK_THAT(std::norm((*qp.coefficients)[i]),
                           WithinAbs(qp.potentia[i], tol.born));
                total += std::norm((*qp.coefficients)[i]);
            }
            CHECK_THAT(total, WithinAbs(1.0, tol.born));
        }
}

TEST_CASE("change_perspective from computational to plus-minus basis") {
    CVector e0(2);
    e0 << 1.0, 0.0;
    QuantumPerspective qp =
        quantum_perspective(pure_state(e0), computational_context(2));
    double s = 1.0 / std::sqrt(2.0);
    CVector plus(2), minus(2);
    plus << s, s;
    minus << s, -s;
    RankOneContext pm = RankOneContext::from_vectors(
        {{"plus", UnitVector(plus)}, {"minus", UnitVector(minus)}});
    QuantumPerspective moved = change_perspective(qp, pm);
    REQUIRE(moved.coefficients.has_value());
    CHECK_THAT((*moved.coefficients)[0].real(), WithinAbs(s, 1e-12));
    CHECK_THAT((*moved.coefficients)[1].real(), WithinAbs(s, 1e-12));
}

TEST_CASE("change_perspective to the same context is the identity") {
    std::mt19937_64 rng(808);
    RankOneContext ctx = computational_context(3);
    QuantumPerspective qp = quantum_perspective(random_pure_density(3, rng), ctx);
    QuantumPerspective same = change_perspective(qp, ctx);
    REQUIRE(same.coefficients.has_value());
    CHECK(((*same.coefficients) - (*qp.coefficients)).norm() < 1e-12);
}

TEST_CASE("change_perspective round trip reproduces coefficients up to phase") {
    std::mt19937_64 rng(909);
    for (int trial = 0; trial < 30; ++trial) {
        Index dim = 2 + (trial % 3);
        RankOneContext a = basis_context(random_orthonormal_basis(dim, rng), "a");
        RankOneContext b = basis_context(random_orthonormal_basis(dim, rng), "b");
        QuantumPerspective original = quantum_perspective(random_pure_density(dim, rng), a);
        QuantumPerspective back = change_perspective(change_perspective(original, b), a);
        REQUIRE(back.coefficients.has_value());
        // phase-align on the largest coefficient, then compare
        Index pivot;
        original.coefficients->cwiseAbs().maxCoeff(&pivot);
        Complex phase = (*original.coefficients)[pivot] / (*back.coefficients)[pivot];
        CHECK_THAT(std::abs(phase), WithinAbs(1.0, 1e-9));
        CHECK((phase * (*back.coefficients) - *original.coefficients).norm() < 1e-9);
    }
}

TEST_CASE("perspectives of one state assemble the same ray in every context") {
    std::mt19937_64 rng(1010);
    for (int trial = 0; trial < 30; ++trial) {
        Index dim = 2 + (trial % 3);
        DensityMatrix rho = random_pure_density(dim, rng);
        RankOneContext c1 = basis_context(random_orthonormal_basis(dim, rng), "a");
        RankOneContext c2 = basis_context(random_orthonormal_basis(dim, rng), "b");
        QuantumPerspective q1 = quantum_perspective(rho, c1);
        QuantumPerspective q2 = quantum_perspective(rho, c2);
        REQUIRE(q1.coefficients.has_value());
        REQUIRE(q2.coefficients.has_value());
        CVector u1 = CVector::Zero(dim), u2 = CVector::Zero(dim);
        for (std::size_t i = 0; i < c1.size(); ++i)
            u1 += (*q1.coefficients)[i] * c1.vector(i).coeffs();
        for (std::size_t i = 0; i < c2.size(); ++i)
            u2 += (*q2.coefficients)[i] * c2.vector(i).coeffs();
        CHECK_THAT(std::abs(u1.dot(u2)), WithinAbs(1.0, 1e-9));
    }
}

TEST_CASE("change_perspective requires coefficients") {
    QuantumPerspective qp =
        quantum_perspective(make_density(0.5 * CMatrix::Identity(2, 2)),
                            computational_context(2));
    CHECK_THROWS_AS(change_perspective(qp, computational_context(2)), NoCoefficients);
}

TEST_CASE("context constructors reject invalid resolutions") {
    CVector e0(2), e1(2);
    e0 << 1.0, 0.0;
    e1 << 0.0, 1.0;
    CHECK_THROWS_AS(RankOneContext::from_vectors({{"a", UnitVector(e0)}}),
                    NotAResolution);
    CHECK_THROWS_AS(
        RankOneContext::from_vectors({{"a", UnitVector(e0)}, {"b", UnitVector(e0)}}),
        NotAResolution);
    CHECK_THROWS_AS(RankOneContext::from_projectors(
                        {{"a", Projector::identity(2)}, {"b", Projector::zero(2)}}),
                    NotRankOneContext);
}

TEST_CASE("informationally complete family sizes and ranks") {
    CHECK(informationally_complete_family(2).size() == 4);
    CHECK(informationally_complete_family(3).size() == 9);
    CHECK(informationally_complete_family(4).size() == 16);
    CHECK(gram_rank(informationally_complete_family(2)) == 4);
    CHECK(gram_rank(informationally_complete_family(4)) == 16);
}

TEST_CASE("reconstruct_density recovers the maximally mixed qubit") {
    auto family = informationally_complete_family(2);
    DensityMatrix rho = make_density(0.5 * CMatrix::Identity(2, 2));
    PSA psa;
    for (const auto& [id, p] : family)
        psa.table[id] = (rho.matrix() * p.matrix()).trace().real();
    ReconstructionResult result = reconstruct_density(psa, family, 2);
    CHECK((result.rho.matrix() - rho.matrix()).norm() < 1e-8);
    CHECK(result.clipped_weight < 1e-12);
}

TEST_CASE("reconstruct_density round trip through evaluate_psa") {
    auto family = informationally_complete_family(2);
    CVector e0(2);
    e0 << 1.0, 0.0;
    DensityMatrix rho = pure_state(e0);
    PSA psa = evaluate_psa(rho, build_commutation_graph(family));
    ReconstructionResult result = reconstruct_density(psa, family, 2);
    CHECK((result.rho.matrix() - rho.matrix()).norm() < 1e-8);
}

TEST_CASE("reconstruct_density round trips random states") {
    std::mt19937_64 rng(1111);
    for (Index dim = 2; dim <= 4; ++dim) {
        auto family = informationally_complete_family(dim);
        PowerGraph g = build_commutation_graph(family);
        for (int trial = 0; trial < 40; ++trial) {
            DensityMatrix rho = random_density(dim, rng);
            ReconstructionResult result =
                reconstruct_density(evaluate_psa(rho, g), family, dim);
            CHECK((result.rho.matrix() - rho.matrix()).norm() < 1e-8);
        }
    }
}

TEST_CASE("reconstruct_density rejects a three-member family in dim 2") {
    auto family = informationally_complete_family(2);
    family.pop_back();
    PSA psa;
    for (const auto& [id, p] : family) psa.table[id] = 0.5;
    CHECK_THROWS_AS(reconstruct_density(psa, family, 2), NotInformationallyComplete);
}

TEST_CASE("reconstruct_density flags inconsistent tables") {
    auto family = informationally_complete_family(2);
    DensityMatrix rho = make_density(0.5 * CMatrix::Identity(2, 2));
    PSA psa;
    for (const auto& [id, p] : family)
        psa.table[id] = (rho.matrix() * p.matrix()).trace().real();
    // same projector listed twice with contradictory values
    family.emplace_back("X01again", family[2].second);
    psa.table["X01again"] = psa.table["X01"] + 0.2;
    CHECK_THROWS_AS(reconstruct_density(psa, family, 2), Inconsistent);
}

TEST_CASE("reconstruct_density repairs indefinite solutions onto the PSD cone") {
    // a consistent linear system whose Hermitian solution has a negative
    // eigenvalue; frequencies like these arise from finite sampling
    auto family = informationally_complete_family(2);
    PSA psa;
    psa.table["E0"] = 1.0;
    psa.table["E1"] = 0.0;
    psa.table["X01"] = 0.55;
    psa.table["Y01"] = 0.5;
    ReconstructionResult result = reconstruct_density(psa, family, 2);
    CHECK(result.clipped_weight > 1e-4);
    CHECK(result.residual < 1e-12);
    EigenSystem es = eigen_hermitian(result.rho.matrix());
    CHECK(es.values.minCoeff() >= -1e-12);
    CHECK_THAT(result.rho.matrix().trace().real(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("mix of the basis states is the maximally mixed qubit") {
    CVector e0(2), e1(2);
    e0 << 1.0, 0.0;
    e1 << 0.0, 1.0;
    DensityMatrix rho = mix({pure_state(e0), pure_state(e1)}, {0.5, 0.5});
    CHECK(rho.matrix()(0, 0) == Complex(0.5, 0.0));
    CHECK(rho.matrix()(1, 1) == Complex(0.5, 0.0));
    CHECK(rho.matrix()(0, 1) == Complex(0.0, 0.0));

    DensityMatrix biased = mix({pure_state(e0), pure_state(e1)}, {0.7, 0.3});
    CHECK_THAT(biased.matrix()(0, 0).real(), WithinAbs(0.7, 1e-15));
    CHECK_THAT(biased.matrix()(1, 1).real(), WithinAbs(0.3, 1e-15));
}

TEST_CASE("mix with a unit weight returns the first state") {
    std::mt19937_64 rng(1212);
    DensityMatrix a = random_density(3, rng);
    DensityMatrix b = random_density(3, rng);
    DensityMatrix m = mix({a, b}, {1.0, 0.0});
    CHECK((m.matrix() - a.matrix()).norm() < 1e-15);
}

TEST_CASE("mix rejects bad weights and mismatched dimensions") {
    std::mt19937_64 rng(1313);
    DensityMatrix a = random_density(2, rng);
    DensityMatrix b = random_density(2, rng);
    CHECK_THROWS_AS(mix({a, b}, {0.5, 0.6}), BadWeights);
    CHECK_THROWS_AS(mix({a, b}, {1.5, -0.5}), BadWeights);
    CHECK_THROWS_AS(mix({a, b}, {1.0}), BadWeights);
    CHECK_THROWS_AS(mix({}, {}), BadWeights);
    DensityMatrix c = random_density(3, rng);
    CHECK_THROWS_AS(mix({a, c}, {0.5, 0.5}), DimensionMismatch);
}

TEST_CASE("purity_report on the canonical fixtures") {
    PurityReport pure = purity_report(make_density(CMatrix(diag_projector({1, 0}).matrix())));
    CHECK_THAT(pure.trace_purity, WithinAbs(1.0, 1e-15));
    CHECK(pure.rank == 1);
    CHECK(pure.idempotency_defect == 0.0);
    CHECK(pure.is_pure);

    PurityReport mixed = purity_report(make_density(0.5 * CMatrix::Identity(2, 2)));
    CHECK_THAT(mixed.trace_purity, WithinAbs(0.5, 1e-15));
    CHECK(mixed.rank == 2);
    CHECK_FALSE(mixed.is_pure);

    CMatrix biased = CMatrix::Zero(2, 2);
    biased(0, 0) = 0.7;
    biased(1, 1) = 0.3;
    PurityReport b = purity_report(make_density(biased));
    CHECK_THAT(b.trace_purity, WithinAbs(0.58, 1e-15));
    CHECK_FALSE(b.is_pure);
}

TEST_CASE("the three purity tests agree on random states") {
    std::mt19937_64 rng(1414);
    for (int trial = 0; trial < 1000; ++trial) {
        Index dim = 2 + (trial % 3);
        PurityReport mixed = purity_report(random_density(dim, rng));
        CHECK_FALSE(mixed.is_pure);  // Ginibre states are full rank
        PurityReport pure = purity_report(random_pure_density(dim, rng));
        CHECK(pure.is_pure);
        CHECK(pure.rank == 1);
    }
}
