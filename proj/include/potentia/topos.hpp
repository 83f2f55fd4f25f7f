#ifndef POTENTIA_TOPOS_HPP
#define POTENTIA_TOPOS_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "potentia/matrix.hpp"

namespace potentia {

/// A commutative subalgebra with identity, represented finitely by its
/// partition of identity: pairwise-orthogonal nonzero projectors (atoms)
/// summing to I. The Gelfand spectrum of such an algebra is the atom set,
/// one character per atom.
class AbelianContext {
public:
    explicit AbelianContext(std::vector<Projector> atoms, const Tolerances& tol = {})
        : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw InvalidContext("context needs at least one atom");
        const Index dim = atoms_.front().dim();
        CMatrix sum = CMatrix::Zero(dim, dim);
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (atoms_[i].dim() != dim)
                throw DimensionMismatch("atom " + std::to_string(i) +
                                        " has mismatched dimension");
            if (atoms_[i].rank() < 1)
                throw InvalidContext("atom " + std::to_string(i) + " is zero");
            sum += atoms_[i].matrix();
            for (std::size_t j = 0; j < i; ++j) {
                double overlap = (atoms_[i].matrix() * atoms_[j].matrix()).norm();
                if (overlap > tol.idem)
                    throw InvalidContext("atoms " + std::to_string(j) + " and " +
                                         std::to_string(i) + " overlap by " +
                                         std::to_string(overlap));
            }
        }
        double defect = (sum - CMatrix::Identity(dim, dim)).norm();
        if (defect > tol.idem)
            throw InvalidContext("atoms sum to identity with defect " +
                                 std::to_string(defect));
    }

    static AbelianContext trivial(Index dim, const Tolerances& tol = {}) {
        std::vector<Projector> atoms;
        atoms.push_back(Projector::identity(dim, tol));
        return AbelianContext(std::move(atoms), tol);
    }

    const std::vector<Projector>& atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    Index dim() const noexcept { return atoms_.front().dim(); }

    /// Indices of the atoms with nonzero overlap against P; their sum is
    /// the outer daseinisation of P in this context.
    std::set<std::size_t> overlapping_atoms(const Projector& p,
                                            const Tolerances& tol = {}) const {
        if (p.dim() != dim())
            throw DimensionMismatch("projector dimension does not match context");
        std::set<std::size_t> selected;
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            if ((p.matrix() * atoms_[i].matrix()).norm() > tol.overlap)
                selected.insert(i);
        return selected;
    }

    /// True when P lies in the algebra, i.e. equals a sum of atoms.
    bool contains(const Projector& p, const Tolerances& tol = {}) const {
        CMatrix sum = CMatrix::Zero(dim(), dim());
        for (std::size_t i : overlapping_atoms(p, tol)) sum += atoms_[i].matrix();
        return (sum - p.matrix()).norm() <= tol.idem;
    }

    /// Partition equality up to tolerance; atom order is irrelevant.
    bool same_partition(const AbelianContext& other, const Tolerances& tol = {}) const {
        if (dim() != other.dim() || size() != other.size()) return false;
        for (const Projector& a : atoms_) {
            bool matched = false;
            for (const Projector& b : other.atoms_)
                if ((a.matrix() - b.matrix()).norm() <= tol.idem) {
                    matched = true;
                    break;
                }
            if (!matched) return false;
        }
        return true;
    }

private:
    std::vector<Projector> atoms_;
};

/// The atoms of the commutative algebra generated by a commuting family:
/// the common eigenspaces, computed by simultaneously diagonalizing the
/// integer-weighted sum of the projectors. Atoms are ordered by descending
/// eigenvalue pattern, so for a single projector P the result is {P, I-P}.
inline AbelianContext abelian_context_from(const std::vector<Projector>& commuting,
                                           const Tolerances& tol = {}) {
    if (commuting.empty())
        throw InvalidContext("cannot infer the dimension of an empty family; "
                             "use AbelianContext::trivial");
    const Index dim = commuting.front().dim();
    if (commuting.size() > 40)
        throw TooManyNodes("simultaneous refinement supports at most 40 projectors");
    for (std::size_t i = 0; i < commuting.size(); ++i) {
        if (commuting[i].dim() != dim)
            throw DimensionMismatch("family member " + std::to_string(i) +
                                    " has mismatched dimension");
        for (std::size_t j = i + 1; j < commuting.size(); ++j) {
            double defect = (commuting[i].matrix() * commuting[j].matrix() -
                             commuting[j].matrix() * commuting[i].matrix())
                                .norm();
            if (defect > tol.comm)
                throw NotCommuting("members " + std::to_string(i) + " and " +
                                   std::to_string(j) + " have commutator norm " +
                                   std::to_string(defect));
        }
    }

    // Distinct eigenvalues of sum(2^k P_k) are exactly the distinct joint
    // 0/1 patterns, so grouping eigenvectors by the rounded eigenvalue
    // yields the common eigenspaces.
    CMatrix weighted = CMatrix::Zero(dim, dim);
    double weight = 1.0;
    for (const Projector& p : commuting) {
        weighted += weight * p.matrix();
        weight *= 2.0;
    }
    EigenSystem es = eigen_hermitian(weighted, tol);
    std::map<std::int64_t, CMatrix, std::greater<>> groups;
    for (Index c = 0; c < dim; ++c) {
        auto label = static_cast<std::int64_t>(std::llround(es.values[c]));
        CVector u = es.vectors.col(c);
        auto it = groups.try_emplace(label, CMatrix::Zero(dim, dim)).first;
        it->second += u * u.adjoint();
    }
    std::vector<Projector> atoms;
    atoms.reserve(groups.size());
    for (auto& [label, m] : groups) {
        m = 0.5 * (m + m.adjoint());
        atoms.emplace_back(std::move(m), tol);
    }
    return AbelianContext(std::move(atoms), tol);
}

/// The Gelfand spectrum of a finite-dimensional abelian context: its atom
/// set, one point per character.
inline std::vector<Projector> spectrum(const AbelianContext& v) { return v.atoms(); }

/// Outer daseinisation: the smallest projector of the context dominating
/// P, namely the sum of the atoms P overlaps.
inline Projector daseinise(const Projector& p, const AbelianContext& v,
                           const Tolerances& tol = {}) {
    CMatrix sum = CMatrix::Zero(v.dim(), v.dim());
    for (std::size_t i : v.overlapping_atoms(p, tol)) sum += v.atoms()[i].matrix();
    return Projector(std::move(sum), tol);
}

/// A finite piece of the context category: abelian contexts ordered by
/// algebra inclusion, V' <= V iff every atom of V' is a sum of atoms of V.
/// Always contains the trivial context; duplicate partitions collapse onto
/// the first occurrence so the order stays antisymmetric.
class ContextPoset {
public:
    ContextPoset(std::vector<std::pair<std::string, AbelianContext>> contexts,
                 bool close_under_meets = false, const Tolerances& tol = {})
        : tol_(tol) {
        for (auto& [id, ctx] : contexts) insert(std::move(id), std::move(ctx));
        if (!entries_.empty()) {
            Index dim = entries_.front().second.dim();
            insert("trivial", AbelianContext::trivial(dim, tol_));
        }
        if (close_under_meets) close();
        rebuild_order();
        verify_partial_order();
    }

    std::size_t size() const noexcept { return entries_.size(); }
    const std::string& id(std::size_t i) const { return entries_.at(i).first; }
    const AbelianContext& context(std::size_t i) const { return entries_.at(i).second; }

    std::size_t index(const std::string& id) const {
        for (std::size_t i = 0; i < entries_.size(); ++i)
            if (entries_[i].first == id) return i;
        throw UnknownId("no context with id '" + id + "'");
    }

    /// V_i <= V_j: V_i is a subalgebra of V_j (its partition is coarser).
    bool leq(std::size_t i, std::size_t j) const { return leq_.at(i).at(j); }

    Index dim() const {
        if (entries_.empty()) throw InvalidContext("poset is empty");
        return entries_.front().second.dim();
    }

private:
    void insert(std::string id, AbelianContext ctx) {
        for (const auto& [eid, existing] : entries_) {
            if (existing.same_partition(ctx, tol_)) return;  // collapse duplicates
            if (eid == id) throw DuplicateId("context id '" + id + "' appears twice");
        }
        if (!entries_.empty() && entries_.front().second.dim() != ctx.dim())
            throw DimensionMismatch("context '" + id + "' has mismatched dimension");
        entries_.emplace_back(std::move(id), std::move(ctx));
    }

    // finest common coarsening of two partitions: connected components of
    // the atom overlap graph
    AbelianContext meet(const AbelianContext& a, const AbelianContext& b) const {
        const std::size_t na = a.size(), nb = b.size();
        std::vector<std::size_t> parent(na + nb);
        for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        auto unite = [&](std::size_t x, std::size_t y) { parent[find(x)] = find(y); };
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t j = 0; j < nb; ++j)
                if ((a.atoms()[i].matrix() * b.atoms()[j].matrix()).norm() > tol_.overlap)
                    unite(i, na + j);
        std::map<std::size_t, CMatrix> components;
        for (std::size_t i = 0; i < na; ++i) {
            auto it = components.try_emplace(find(i), CMatrix::Zero(a.dim(), a.dim())).first;
            it->second += a.atoms()[i].matrix();
        }
        std::vector<Projector> atoms;
        for (auto& [root, m] : components) atoms.emplace_back(std::move(m), tol_);
        return AbelianContext(std::move(atoms), tol_);
    }

    void close() {
        for (std::size_t i = 0; i < entries_.size(); ++i)
            for (std::size_t j = i + 1; j < entries_.size(); ++j) {
                AbelianContext m = meet(entries_[i].second, entries_[j].second);
                insert("(" + entries_[i].first + "^" + entries_[j].first + ")",
                       std::move(m));
            }
    }

    bool coarsens(const AbelianContext& coarse, const AbelianContext& fine) const {
        for (const Projector& big : coarse.atoms()) {
            CMatrix sum = CMatrix::Zero(coarse.dim(), coarse.dim());
            for (const Projector& small : fine.atoms())
                if ((big.matrix() * small.matrix() - small.matrix()).norm() <= tol_.idem)
                    sum += small.matrix();
            if ((sum - big.matrix()).norm() > tol_.idem) return false;
        }
        return true;
    }

    void rebuild_order() {
        const std::size_t n = entries_.size();
        leq_.assign(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                leq_[i][j] = coarsens(entries_[i].second, entries_[j].second);
    }

    void verify_partial_order() const {
        const std::size_t n = entries_.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (!leq_[i][i]) throw Inconsistent("order relation is not reflexive");
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && leq_[i][j] && leq_[j][i])
                    throw Inconsistent("order relation is not antisymmetric between '" +
                                       entries_[i].first + "' and '" + entries_[j].first +
                                       "'");
                for (std::size_t k = 0; k < n; ++k)
                    if (leq_[i][j] && leq_[j][k] && !leq_[i][k])
                        throw Inconsistent("order relation is not transitive");
            }
        }
    }

    Tolerances tol_;
    std::vector<std::pair<std::string, AbelianContext>> entries_;
    std::vector<std::vector<bool>> leq_;
};

/// A clopen subobject of the spectral presheaf over a finite poset: per
/// context, a subset of its atoms (a clopen subset of the spectrum), with
/// selections closed under coarsening.
struct ClopenSubobject {
    std::map<std::string, std::set<std::size_t>> selection;
};

namespace detail {

inline void validate_subobject(const ClopenSubobject& s, const ContextPoset& poset,
                               const Tolerances& tol) {
    for (std::size_t i = 0; i < poset.size(); ++i) {
        auto it = s.selection.find(poset.id(i));
        if (it == s.selection.end())
            throw InvalidSubobject("no selection at context '" + poset.id(i) + "'");
        for (std::size_t t : it->second)
            if (t >= poset.context(i).size())
                throw InvalidSubobject("atom index " + std::to_string(t) +
                                       " out of range at '" + poset.id(i) + "'");
    }
    // closed under coarsening: an atom selected at the finer context forces
    // its enclosing atom at every coarser one
    for (std::size_t coarse = 0; coarse < poset.size(); ++coarse)
        for (std::size_t fine = 0; fine < poset.size(); ++fine) {
            if (coarse == fine || !poset.leq(coarse, fine)) continue;
            const auto& fine_sel = s.selection.at(poset.id(fine));
            const auto& coarse_sel = s.selection.at(poset.id(coarse));
            for (std::size_t t : fine_sel) {
                const CMatrix& small = poset.context(fine).atoms()[t].matrix();
                for (std::size_t u = 0; u < poset.context(coarse).size(); ++u) {
                    const CMatrix& big = poset.context(coarse).atoms()[u].matrix();
                    if ((big * small - small).norm() <= tol.idem && !coarse_sel.count(u))
                        throw InvalidSubobject(
                            "selection at '" + poset.id(fine) +
                            "' is not closed under coarsening to '" + poset.id(coarse) +
                            "'");
                }
            }
        }
}

}  // namespace detail

/// The daseinisation subobject of P: at each context, the atoms making up
/// the outer daseinisation of P there.
inline ClopenSubobject daseinisation_subobject(const Projector& p,
                                               const ContextPoset& poset,
                                               const Tolerances& tol = {}) {
    if (poset.size() > 0 && p.dim() != poset.dim())
        throw DimensionMismatch("projector dimension does not match the poset");
    ClopenSubobject s;
    for (std::size_t i = 0; i < poset.size(); ++i)
        s.selection[poset.id(i)] = poset.context(i).overlapping_atoms(p, tol);
    return s;
}

/// A [0,1]-valued function on the poset that never increases along the
/// inclusion order (coarser contexts see at least as much measure).
struct AntitoneFunction {
    std::map<std::string, double> values;
};

/// The measure of a clopen subobject at each context: the Born weight of
/// the selected atoms. Antitone along every poset edge.
inline AntitoneFunction measure(const DensityMatrix& rho, const ClopenSubobject& s,
                                const ContextPoset& poset, const Tolerances& tol = {}) {
    if (poset.size() > 0 && rho.dim() != poset.dim())
        throw DimensionMismatch("state dimension does not match the poset");
    detail::validate_subobject(s, poset, tol);
    AntitoneFunction f;
    for (std::size_t i = 0; i < poset.size(); ++i) {
        double total = 0.0;
        for (std::size_t t : s.selection.at(poset.id(i))) {
            Complex tr = (rho.matrix() * poset.context(i).atoms()[t].matrix()).trace();
            if (std::abs(tr.imag()) > tol.born)
                throw ImaginaryTrace("atom measure at '" + poset.id(i) +
                                     "' has imaginary part " +
                                     std::to_string(tr.imag()));
            total += tr.real();
        }
        f.values[poset.id(i)] = std::min(1.0, std::max(0.0, total));
    }
    for (std::size_t i = 0; i < poset.size(); ++i)
        for (std::size_t j = 0; j < poset.size(); ++j)
            if (i != j && poset.leq(i, j) &&
                f.values.at(poset.id(i)) < f.values.at(poset.id(j)) - tol.born)
                throw Inconsistent("measure increases from '" + poset.id(i) + "' to '" +
                                   poset.id(j) + "'");
    return f;
}

/// min over the poset of the measure of the daseinisation subobject. With
/// a context containing P present, the minimum is Tr(rho P), attained
/// there; without one the minimum can only overshoot, so the precondition
/// is checked and reported rather than silently returning.
struct BornRecovery {
    double minimum;
    std::string attained_at;
};

inline BornRecovery born_recovery(const DensityMatrix& rho, const Projector& p,
                                  const ContextPoset& poset, const Tolerances& tol = {}) {
    if (poset.size() == 0) throw PNotInPoset("poset is empty");
    bool represented = false;
    for (std::size_t i = 0; i < poset.size() && !represented; ++i)
        represented = poset.context(i).contains(p, tol);
    if (!represented)
        throw PNotInPoset("no context of the poset contains the projector; "
                          "the minimum would exceed Tr(rho P)");

    AntitoneFunction f = measure(rho, daseinisation_subobject(p, poset, tol), poset, tol);
    BornRecovery out{2.0, ""};
    for (std::size_t i = 0; i < poset.size(); ++i) {
        double v = f.values.at(poset.id(i));
        if (v < out.minimum) {
            out.minimum = v;
            out.attained_at = poset.id(i);
        }
    }
    return out;
}

}  // namespace potentia

#endif
