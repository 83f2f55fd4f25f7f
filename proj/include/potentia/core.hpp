#ifndef POTENTIA_CORE_HPP
#define POTENTIA_CORE_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace potentia {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numerical tolerances shared by every operation. All thresholds are on
/// Frobenius norms or absolute values of double-precision quantities at
/// dimensions <= ~8; each field can be overridden per call.
struct Tolerances {
    double herm = 1e-9;     // Hermiticity defect ||M - M*||_F
    double idem = 1e-9;     // idempotency defect ||P^2 - P||_F, atom sums
    double orth = 1e-9;     // orthonormality defect |<u,v>|, ||U*U - I||_F
    double trace = 1e-9;    // |Tr(rho) - 1|, weight sums
    double eig = 1e-8;      // eigenvalue classification (0/1 bands, rank)
    double norm = 1e-12;    // unit-vector norm defect
    double comm = 1e-9;     // commutator norm ||PQ - QP||_F
    double born = 1e-9;     // Born-value consistency (imaginary part, sums to 1)
    double recon = 1e-8;    // linear-inversion residual / reconstruction defect
    double overlap = 1e-9;  // atom overlap ||P a||_F in daseinisation
};

/// Base of every failure the library reports. `kind()` separates bad input
/// (Validation) from a computation that could not produce its contract
/// (Computation); the CLI maps these onto distinct exit codes.
class Error : public std::runtime_error {
public:
    enum class Kind { Validation, Computation };

    Error(Kind kind, std::string name, const std::string& message)
        : std::runtime_error(name + ": " + message),
          kind_(kind),
          name_(std::move(name)) {}

    Kind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }

private:
    Kind kind_;
    std::string name_;
};

#define POTENTIA_ERROR(NAME, KIND)                                   \
    struct NAME : Error {                                            \
        explicit NAME(const std::string& message)                    \
            : Error(Error::Kind::KIND, #NAME, message) {}            \
    }

POTENTIA_ERROR(NotHermitian, Validation);
POTENTIA_ERROR(NotPositive, Validation);
POTENTIA_ERROR(TraceNotOne, Validation);
POTENTIA_ERROR(NotNormalized, Validation);
POTENTIA_ERROR(NotIdempotent, Validation);
POTENTIA_ERROR(NotOrthonormal, Validation);
POTENTIA_ERROR(TooManyVectors, Validation);
POTENTIA_ERROR(DimensionMismatch, Validation);
POTENTIA_ERROR(DuplicateId, Validation);
POTENTIA_ERROR(UnknownId, Validation);
POTENTIA_ERROR(InvalidProjector, Validation);
POTENTIA_ERROR(NotAResolution, Validation);
POTENTIA_ERROR(NotRankOneContext, Validation);
POTENTIA_ERROR(NoCoefficients, Validation);
POTENTIA_ERROR(BadWeights, Validation);
POTENTIA_ERROR(MissingNode, Validation);
POTENTIA_ERROR(InvalidContext, Validation);
POTENTIA_ERROR(NotCommuting, Validation);
POTENTIA_ERROR(InvalidSubobject, Validation);
POTENTIA_ERROR(InvalidShots, Validation);
POTENTIA_ERROR(ParseError, Validation);
POTENTIA_ERROR(BadDocument, Validation);

POTENTIA_ERROR(NoConvergence, Computation);
POTENTIA_ERROR(ImaginaryTrace, Computation);
POTENTIA_ERROR(PotentiaOutOfRange, Computation);
POTENTIA_ERROR(NotInformationallyComplete, Computation);
POTENTIA_ERROR(Inconsistent, Computation);
POTENTIA_ERROR(InconsistentPurityTests, Computation);
POTENTIA_ERROR(PNotInPoset, Computation);
POTENTIA_ERROR(TooManyNodes, Computation);

#undef POTENTIA_ERROR

namespace detail {

inline void require_finite(const CMatrix& m, const std::string& what) {
    if (!m.allFinite())
        throw BadDocument(what + " contains NaN or Inf entries");
}

inline void require_square(const CMatrix& m, const std::string& what) {
    if (m.rows() != m.cols() || m.rows() < 1)
        throw DimensionMismatch(what + " must be square and non-empty, got " +
                                std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
}

inline double hermiticity_defect(const CMatrix& m) {
    return (m - m.adjoint()).norm();
}

/// Multiplies `v` by a global phase so the first component of largest
/// modulus becomes real and non-negative. Canonical ray representative;
/// the identity on vectors already in that form.
inline CVector canonical_phase(CVector v) {
    Index best = 0;
    double best_mod = 0.0;
    for (Index i = 0; i < v.size(); ++i) {
        double m = std::abs(v[i]);
        if (m > best_mod) {
            best_mod = m;
            best = i;
        }
    }
    if (best_mod > 0.0) {
        Complex pivot = v[best];
        v *= std::conj(pivot) / std::abs(pivot);
        v[best] = Complex(std::abs(pivot), 0.0);  // kill rounding residue
    }
    return v;
}

}  // namespace detail

}  // namespace potentia

#endif
