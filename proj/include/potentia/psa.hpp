#ifndef POTENTIA_PSA_HPP
#define POTENTIA_PSA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "potentia/graph.hpp"
#include "potentia/matrix.hpp"

namespace potentia {

/// A rank-one resolution of identity: an orthonormal basis with node ids.
/// Member vectors are stored in canonical phase so coefficients computed
/// against them are reproducible across runs. Member order is preserved.
class RankOneContext {
public:
    static RankOneContext from_vectors(std::vector<std::pair<std::string, UnitVector>> members,
                                       const Tolerances& tol = {}) {
        if (members.empty()) throw NotAResolution("context has no members");
        RankOneContext ctx;
        const Index dim = members.front().second.dim();
        if (static_cast<Index>(members.size()) != dim)
            throw NotAResolution(std::to_string(members.size()) +
                                 " rank-one projectors cannot resolve identity in "
                                 "dimension " +
                                 std::to_string(dim));
        for (auto& [id, v] : members) {
            if (v.dim() != dim)
                throw DimensionMismatch("context member '" + id +
                                        "' has mismatched dimension");
            for (const auto& [seen, u] : ctx.members_)
                if (seen == id) throw DuplicateId("context member '" + id + "' repeats");
            ctx.members_.emplace_back(std::move(id),
                                      UnitVector(detail::canonical_phase(v.coeffs()), tol));
        }
        for (std::size_t i = 0; i < ctx.members_.size(); ++i)
            for (std::size_t j = i + 1; j < ctx.members_.size(); ++j) {
                double overlap = std::abs(
                    ctx.members_[i].second.coeffs().dot(ctx.members_[j].second.coeffs()));
                if (overlap > tol.orth)
                    throw NotAResolution("members '" + ctx.members_[i].first + "' and '" +
                                         ctx.members_[j].first + "' overlap by " +
                                         std::to_string(overlap));
            }
        return ctx;
    }

    static RankOneContext from_projectors(const std::vector<std::pair<std::string, Projector>>& members,
                                          const Tolerances& tol = {}) {
        std::vector<std::pair<std::string, UnitVector>> vectors;
        vectors.reserve(members.size());
        for (const auto& [id, p] : members) {
            if (p.rank() != 1)
                throw NotRankOneContext("projector '" + id + "' has rank " +
                                        std::to_string(p.rank()));
            EigenSystem es = eigen_hermitian(p.matrix(), tol);
            vectors.emplace_back(
                id, UnitVector::normalized(es.vectors.col(es.values.size() - 1), tol));
        }
        return from_vectors(std::move(vectors), tol);
    }

    std::size_t size() const noexcept { return members_.size(); }
    Index dim() const noexcept { return members_.front().second.dim(); }
    const std::string& id(std::size_t i) const { return members_.at(i).first; }
    const UnitVector& vector(std::size_t i) const { return members_.at(i).second; }

    CMatrix projector_matrix(std::size_t i) const {
        const CVector& v = members_.at(i).second.coeffs();
        return v * v.adjoint();
    }

private:
    RankOneContext() = default;
    std::vector<std::pair<std::string, UnitVector>> members_;
};

/// The Potential State of Affairs: the table P -> potentia in [0,1]. When
/// produced by evaluate_psa the generating state rides along; empirical
/// tables from sampling carry shot counts instead.
struct PSA {
    std::map<std::string, double> table;
    std::optional<DensityMatrix> source;
    std::optional<std::uint64_t> shots;
    bool low_statistics = false;

    double potentia(const std::string& id) const {
        auto it = table.find(id);
        if (it == table.end()) throw MissingNode("PSA has no entry for '" + id + "'");
        return it->second;
    }
};

namespace detail {

inline double clamp_potentia(double p, const std::string& id, const Tolerances& tol) {
    if (p < 0.0) {
        if (p < -tol.eig)
            throw PotentiaOutOfRange("potentia of '" + id + "' is " + std::to_string(p));
        return 0.0;
    }
    if (p > 1.0) {
        if (p > 1.0 + tol.eig)
            throw PotentiaOutOfRange("potentia of '" + id + "' is " + std::to_string(p));
        return 1.0;
    }
    return p;
}

inline double born_value(const DensityMatrix& rho, const CMatrix& projector,
                         const std::string& id, const Tolerances& tol) {
    Complex tr = (rho.matrix() * projector).trace();
    if (std::abs(tr.imag()) > tol.born)
        throw ImaginaryTrace("Tr(rho P) for '" + id + "' has imaginary part " +
                             std::to_string(tr.imag()));
    return clamp_potentia(tr.real(), id, tol);
}

}  // namespace detail

/// Born-rule valuation of every power in the graph: table[id] = Tr(rho P).
inline PSA evaluate_psa(const DensityMatrix& rho, const PowerGraph& g,
                        const Tolerances& tol = {}) {
    if (!g.has_projectors() && g.size() > 0)
        throw InvalidProjector("graph carries no projector payload");
    PSA psa;
    psa.source = rho;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Projector& p = g.projector(i);
        if (p.dim() != rho.dim())
            throw DimensionMismatch("node '" + g.id(i) + "' has dimension " +
                                    std::to_string(p.dim()) + ", state has " +
                                    std::to_string(rho.dim()));
        psa.table[g.id(i)] = detail::born_value(rho, p.matrix(), g.id(i), tol);
    }
    return psa;
}

/// The view of a state from one context: potentia per member, plus the
/// superposition coefficients when the state is rank one.
struct QuantumPerspective {
    RankOneContext context;
    std::optional<CVector> coefficients;
    RVector potentia;
};

inline QuantumPerspective quantum_perspective(const DensityMatrix& rho,
                                              const RankOneContext& ctx,
                                              const Tolerances& tol = {}) {
    if (rho.dim() != ctx.dim())
        throw DimensionMismatch("state and context dimensions differ");

    QuantumPerspective qp{ctx, std::nullopt, RVector(ctx.size())};
    double sum = 0.0;
    for (std::size_t i = 0; i < ctx.size(); ++i) {
        const CVector& w = ctx.vector(i).coeffs();
        Complex val = w.dot(rho.matrix() * w);
        if (std::abs(val.imag()) > tol.born)
            throw ImaginaryTrace("<w|rho|w> for '" + ctx.id(i) + "' has imaginary part " +
                                 std::to_string(val.imag()));
        qp.potentia[i] = detail::clamp_potentia(val.real(), ctx.id(i), tol);
        sum += qp.potentia[i];
    }
    if (std::abs(sum - 1.0) > tol.born)
        throw NotAResolution("context potentia sum to " + std::to_string(sum));

    // Coefficients only when the state is rank one well inside the Born
    // tolerance, so |c_i|^2 = p_i holds at tol.born.
    EigenSystem es = eigen_hermitian(rho.matrix(), tol);
    if (1.0 - es.values[es.values.size() - 1] <= 0.1 * tol.born) {
        CVector v = es.vectors.col(es.values.size() - 1);
        CVector c(ctx.size());
        for (std::size_t i = 0; i < ctx.size(); ++i)
            c[i] = ctx.vector(i).coeffs().dot(v);
        qp.coefficients = std::move(c);
    }
    return qp;
}

/// Rewrites a rank-one perspective in another basis. The underlying vector
/// is reassembled from the coefficients, so a round trip reproduces the
/// original coefficients up to a global phase.
inline QuantumPerspective change_perspective(const QuantumPerspective& qp,
                                             const RankOneContext& new_ctx,
                                             const Tolerances& tol = {}) {
    if (!qp.coefficients)
        throw NoCoefficients("perspective has no superposition coefficients; "
                             "the source state is not rank one");
    if (qp.context.dim() != new_ctx.dim())
        throw DimensionMismatch("context dimensions differ");

    CVector v = CVector::Zero(qp.context.dim());
    for (std::size_t i = 0; i < qp.context.size(); ++i)
        v += (*qp.coefficients)[i] * qp.context.vector(i).coeffs();
    double n = v.norm();
    if (std::abs(n - 1.0) > 1e-6)
        throw NotNormalized("coefficients assemble to norm " + std::to_string(n));
    v /= n;

    QuantumPerspective out{new_ctx, CVector(new_ctx.size()), RVector(new_ctx.size())};
    for (std::size_t j = 0; j < new_ctx.size(); ++j) {
        Complex c = new_ctx.vector(j).coeffs().dot(v);
        (*out.coefficients)[j] = c;
        out.potentia[j] = detail::clamp_potentia(std::norm(c), new_ctx.id(j), tol);
    }
    return out;
}

/// The standard informationally complete family: the dim diagonal powers
/// plus, per pair j < k, projectors onto (e_j + e_k)/sqrt(2) and
/// (e_j + i e_k)/sqrt(2). dim^2 linearly independent projectors.
inline std::vector<std::pair<std::string, Projector>> informationally_complete_family(
    Index dim, const Tolerances& tol = {}) {
    if (dim < 2) throw DimensionMismatch("informationally complete family needs dim >= 2");
    std::vector<std::pair<std::string, Projector>> family;
    family.reserve(static_cast<std::size_t>(dim * dim));
    const double s = 1.0 / std::sqrt(2.0);
    for (Index j = 0; j < dim; ++j) {
        CVector e = CVector::Zero(dim);
        e[j] = 1.0;
        family.emplace_back("E" + std::to_string(j),
                            vector_to_projector(UnitVector(e, tol), tol));
    }
    for (Index j = 0; j < dim; ++j)
        for (Index k = j + 1; k < dim; ++k) {
            std::string suffix = std::to_string(j) + std::to_string(k);
            CVector x = CVector::Zero(dim), y = CVector::Zero(dim);
            x[j] = s;
            x[k] = s;
            y[j] = s;
            y[k] = Complex(0.0, s);
            family.emplace_back("X" + suffix, vector_to_projector(UnitVector(x, tol), tol));
            family.emplace_back("Y" + suffix, vector_to_projector(UnitVector(y, tol), tol));
        }
    return family;
}

/// Linear-inversion reconstruction output. `clipped_weight` is the total
/// negative eigenvalue mass removed by the PSD repair; zero for consistent
/// exact tables.
struct ReconstructionResult {
    DensityMatrix rho;
    double residual;
    double clipped_weight;
};

/// Solves Tr(rho P_i) = table[i] for the unique Hermitian rho on the real
/// parametrization (diagonal, then Re/Im of each upper off-diagonal), then
/// repairs to the PSD cone by eigenvalue clipping and trace renormalization.
inline ReconstructionResult reconstruct_density(const PSA& psa,
                                                const std::vector<std::pair<std::string, Projector>>& family,
                                                Index dim, const Tolerances& tol = {}) {
    const Index unknowns = dim * dim;
    const Index rows = static_cast<Index>(family.size());
    Eigen::MatrixXd a(rows, unknowns);
    Eigen::VectorXd b(rows);
    for (Index r = 0; r < rows; ++r) {
        const auto& [id, proj] = family[static_cast<std::size_t>(r)];
        if (proj.dim() != dim)
            throw DimensionMismatch("family member '" + id + "' has wrong dimension");
        b[r] = psa.potentia(id);
        const CMatrix& p = proj.matrix();
        Index col = 0;
        for (Index i = 0; i < dim; ++i) a(r, col++) = p(i, i).real();
        for (Index i = 0; i < dim; ++i)
            for (Index j = i + 1; j < dim; ++j) {
                a(r, col++) = 2.0 * p(j, i).real();
                a(r, col++) = -2.0 * p(j, i).imag();
            }
    }

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    if (cod.rank() < unknowns)
        throw NotInformationallyComplete(
            "family spans only " + std::to_string(cod.rank()) + " of " +
            std::to_string(unknowns) + " Hermitian dimensions");
    Eigen::VectorXd theta = cod.solve(b);
    double residual = (a * theta - b).cwiseAbs().maxCoeff();
    if (residual > tol.recon)
        throw Inconsistent("linear system residual " + std::to_string(residual) +
                           " exceeds " + std::to_string(tol.recon));

    CMatrix h(dim, dim);
    Index col = 0;
    for (Index i = 0; i < dim; ++i) h(i, i) = theta[col++];
    for (Index i = 0; i < dim; ++i)
        for (Index j = i + 1; j < dim; ++j) {
            double re = theta[col++];
            double im = theta[col++];
            h(i, j) = Complex(re, im);
            h(j, i) = Complex(re, -im);
        }

    EigenSystem es = eigen_hermitian(h, tol);
    double clipped = 0.0, total = 0.0;
    RVector lambda = es.values;
    for (Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i] < 0.0) {
            clipped -= lambda[i];
            lambda[i] = 0.0;
        }
        total += lambda[i];
    }
    if (total < 0.5)
        throw Inconsistent("reconstructed state has trace " + std::to_string(total) +
                           " after PSD repair");
    lambda /= total;
    CMatrix m = es.vectors * lambda.asDiagonal() * es.vectors.adjoint();
    m = 0.5 * (m + m.adjoint());
    return ReconstructionResult{DensityMatrix(std::move(m), tol), residual, clipped};
}

/// Convex combination of states.
inline DensityMatrix mix(const std::vector<DensityMatrix>& states,
                         const std::vector<double>& weights, const Tolerances& tol = {}) {
    if (states.empty() || states.size() != weights.size())
        throw BadWeights("need matching non-empty state and weight lists, got " +
                         std::to_string(states.size()) + " states and " +
                         std::to_string(weights.size()) + " weights");
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw BadWeights("negative weight " + std::to_string(w));
        sum += w;
    }
    if (std::abs(sum - 1.0) > tol.trace)
        throw BadWeights("weights sum to " + std::to_string(sum));
    const Index dim = states.front().dim();
    CMatrix m = CMatrix::Zero(dim, dim);
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i].dim() != dim)
            throw DimensionMismatch("mixture component " + std::to_string(i) +
                                    " has mismatched dimension");
        m += weights[i] * states[i].matrix();
    }
    return DensityMatrix(std::move(m), tol);
}

/// Purity diagnostics. The three classical tests (trace purity, rank one,
/// idempotency) must agree; disagreement means the tolerance regime is
/// misconfigured for the input and is reported as an error rather than a
/// silent pick of one test.
struct PurityReport {
    double trace_purity;
    Index rank;
    double idempotency_defect;
    bool is_pure;
};

inline PurityReport purity_report(const DensityMatrix& rho, const Tolerances& tol = {}) {
    const CMatrix& m = rho.matrix();
    CMatrix m2 = m * m;
    PurityReport report{};
    report.trace_purity = m2.trace().real();
    report.idempotency_defect = (m2 - m).norm();
    EigenSystem es = eigen_hermitian(m, tol);
    report.rank = 0;
    for (Index i = 0; i < es.values.size(); ++i)
        if (es.values[i] > tol.eig) ++report.rank;

    bool by_trace = std::abs(report.trace_purity - 1.0) <= tol.eig;
    bool by_rank = report.rank == 1;
    bool by_idem = report.idempotency_defect <= tol.idem;
    if (by_trace != by_rank || by_rank != by_idem)
        throw InconsistentPurityTests(
            "trace test " + std::to_string(by_trace) + ", rank test " +
            std::to_string(by_rank) + ", idempotency test " + std::to_string(by_idem) +
            " disagree (Tr(rho^2) = " + std::to_string(report.trace_purity) +
            ", rank = " + std::to_string(report.rank) + ", defect = " +
            std::to_string(report.idempotency_defect) + ")");
    report.is_pure = by_trace;
    return report;
}

}  // namespace potentia

#endif
