#ifndef POTENTIA_MATRIX_HPP
#define POTENTIA_MATRIX_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "potentia/core.hpp"

namespace potentia {

/// Ascending eigenvalues of a Hermitian matrix together with orthonormal
/// eigenvectors (as columns), each column in canonical phase.
struct EigenSystem {
    RVector values;
    CMatrix vectors;
};

inline EigenSystem eigen_hermitian(const CMatrix& h, const Tolerances& tol = {}) {
    detail::require_square(h, "matrix");
    detail::require_finite(h, "matrix");
    double defect = detail::hermiticity_defect(h);
    if (defect > tol.herm)
        throw NotHermitian("Hermiticity defect " + std::to_string(defect) +
                           " exceeds " + std::to_string(tol.herm));

    // Symmetrize first so the <= tol.herm skew part cannot leak into the result.
    CMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
    if (solver.info() != Eigen::Success)
        throw NoConvergence("Hermitian eigensolver did not converge at dim " +
                            std::to_string(h.rows()));

    EigenSystem out;
    out.values = solver.eigenvalues();
    out.vectors = solver.eigenvectors();
    for (Index c = 0; c < out.vectors.cols(); ++c)
        out.vectors.col(c) = detail::canonical_phase(out.vectors.col(c));
    return out;
}

/// A normalized vector of C^dim. Construction enforces ||v|| = 1 within
/// tol.norm; use `normalized` to rescale arbitrary non-null input.
class UnitVector {
public:
    explicit UnitVector(CVector v, const Tolerances& tol = {}) : v_(std::move(v)) {
        if (v_.size() < 1)
            throw DimensionMismatch("unit vector must have dimension >= 1");
        if (!v_.allFinite())
            throw BadDocument("unit vector contains NaN or Inf entries");
        double defect = std::abs(v_.norm() - 1.0);
        if (defect > tol.norm)
            throw NotNormalized("norm defect " + std::to_string(defect) +
                                " exceeds " + std::to_string(tol.norm));
    }

    static UnitVector normalized(const CVector& v, const Tolerances& tol = {}) {
        double n = v.norm();
        if (!(n > 0.0) || !v.allFinite())
            throw NotNormalized("cannot normalize a null or non-finite vector");
        return UnitVector(v / n, tol);
    }

    const CVector& coeffs() const noexcept { return v_; }
    Index dim() const noexcept { return v_.size(); }

private:
    CVector v_;
};

/// A Hermitian idempotent: a power of the graph. Rank is cached as the
/// number of eigenvalues within tol.eig of 1.
class Projector {
public:
    explicit Projector(CMatrix m, const Tolerances& tol = {}) : m_(std::move(m)) {
        detail::require_square(m_, "projector");
        detail::require_finite(m_, "projector");
        double herm = detail::hermiticity_defect(m_);
        if (herm > tol.herm)
            throw NotHermitian("projector Hermiticity defect " +
                               std::to_string(herm) + " exceeds " +
                               std::to_string(tol.herm));
        double idem = (m_ * m_ - m_).norm();
        if (idem > tol.idem)
            throw NotIdempotent("idempotency defect " + std::to_string(idem) +
                                " exceeds " + std::to_string(tol.idem));
        EigenSystem es = eigen_hermitian(m_, tol);
        rank_ = 0;
        for (Index i = 0; i < es.values.size(); ++i)
            if (std::abs(es.values[i] - 1.0) <= tol.eig) ++rank_;
    }

    static Projector identity(Index dim, const Tolerances& tol = {}) {
        return Projector(CMatrix::Identity(dim, dim), tol);
    }

    static Projector zero(Index dim, const Tolerances& tol = {}) {
        return Projector(CMatrix::Zero(dim, dim), tol);
    }

    const CMatrix& matrix() const noexcept { return m_; }
    Index dim() const noexcept { return m_.rows(); }
    Index rank() const noexcept { return rank_; }

private:
    CMatrix m_;
    Index rank_;
};

/// A state: positive Hermitian matrix of unit trace, any rank.
class DensityMatrix {
public:
    explicit DensityMatrix(CMatrix m, const Tolerances& tol = {}) : m_(std::move(m)) {
        detail::require_square(m_, "density matrix");
        detail::require_finite(m_, "density matrix");
        double herm = detail::hermiticity_defect(m_);
        if (herm > tol.herm)
            throw NotHermitian("density Hermiticity defect " +
                               std::to_string(herm) + " exceeds " +
                               std::to_string(tol.herm));
        double tr = m_.trace().real();
        if (std::abs(tr - 1.0) > tol.trace)
            throw TraceNotOne("trace is " + std::to_string(tr) +
                              ", defect exceeds " + std::to_string(tol.trace));
        EigenSystem es = eigen_hermitian(m_, tol);
        double lambda_min = es.values.minCoeff();
        if (lambda_min < -tol.eig)
            throw NotPositive("smallest eigenvalue " +
                              std::to_string(lambda_min) + " is below -" +
                              std::to_string(tol.eig));
    }

    const CMatrix& matrix() const noexcept { return m_; }
    Index dim() const noexcept { return m_.rows(); }

private:
    CMatrix m_;
};

inline DensityMatrix make_density(const CMatrix& m, const Tolerances& tol = {}) {
    return DensityMatrix(m, tol);
}

/// The map v |-> |v><v| from rays to rank-one projectors.
inline Projector vector_to_projector(const UnitVector& v, const Tolerances& tol = {}) {
    CMatrix outer = v.coeffs() * v.coeffs().adjoint();
    return Projector(std::move(outer), tol);
}

/// Extends a pairwise-orthonormal family to a full orthonormal basis of
/// C^dim. Input vectors are returned unchanged in front; the completion
/// appends Gram-Schmidt residuals of the standard basis vectors, taken in
/// index order, each put into canonical phase.
inline std::vector<UnitVector> complete_to_basis(const std::vector<UnitVector>& partial,
                                                 Index dim,
                                                 const Tolerances& tol = {}) {
    if (static_cast<Index>(partial.size()) > dim)
        throw TooManyVectors(std::to_string(partial.size()) +
                             " vectors cannot be orthonormal in dimension " +
                             std::to_string(dim));
    for (const UnitVector& v : partial)
        if (v.dim() != dim)
            throw DimensionMismatch("partial basis vector has dimension " +
                                    std::to_string(v.dim()) + ", expected " +
                                    std::to_string(dim));
    for (std::size_t i = 0; i < partial.size(); ++i)
        for (std::size_t j = i + 1; j < partial.size(); ++j) {
            double overlap = std::abs(partial[i].coeffs().dot(partial[j].coeffs()));
            if (overlap > tol.orth)
                throw NotOrthonormal("inner product modulus " +
                                     std::to_string(overlap) +
                                     " between inputs " + std::to_string(i) +
                                     " and " + std::to_string(j) + " exceeds " +
                                     std::to_string(tol.orth));
        }

    // Residuals below this are treated as "already in the span"; with at
    // most dim orthonormal vectors in play the surviving candidates always
    // have residual norm >= 1/sqrt(dim).
    constexpr double residual_floor = 1e-6;

    std::vector<UnitVector> basis = partial;
    std::vector<CVector> span;
    span.reserve(dim);
    for (const UnitVector& v : partial) span.push_back(v.coeffs());

    for (Index j = 0; j < dim && static_cast<Index>(basis.size()) < dim; ++j) {
        CVector r = CVector::Zero(dim);
        r[j] = Complex(1.0, 0.0);
        for (const CVector& u : span) r -= u.dot(r) * u;
        if (r.norm() <= residual_floor) continue;
        for (const CVector& u : span) r -= u.dot(r) * u;  // second pass
        r /= r.norm();
        r = detail::canonical_phase(std::move(r));
        basis.emplace_back(r, tol);
        span.push_back(std::move(r));
    }
    if (static_cast<Index>(basis.size()) != dim)
        throw NotOrthonormal("could not complete the family to a basis; "
                             "inputs are too far from orthonormal");
    return basis;
}

}  // namespace potentia

#endif
