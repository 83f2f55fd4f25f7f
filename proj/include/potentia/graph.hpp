#ifndef POTENTIA_GRAPH_HPP
#define POTENTIA_GRAPH_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "potentia/matrix.hpp"

namespace potentia {

/// A set of node ids forming a complete subgraph of the commutation graph.
/// Ids are kept sorted so contexts compare and print deterministically.
struct Context {
    std::vector<std::string> ids;
    bool maximal = false;
};

/// The graph of powers: projectors as nodes, commutation as edges. The
/// relation is reflexive and symmetric but not transitive, so the graph is
/// generally not complete. Immutable once built.
class PowerGraph {
public:
    static PowerGraph from_projectors(std::vector<std::pair<std::string, Projector>> nodes,
                                      double tol_comm = Tolerances{}.comm) {
        PowerGraph g;
        g.tol_comm_ = tol_comm;
        for (auto& [id, p] : nodes) {
            if (g.index_.count(id))
                throw DuplicateId("node id '" + id + "' appears twice");
            g.index_.emplace(id, g.ids_.size());
            g.ids_.push_back(id);
            g.projectors_.push_back(std::move(p));
        }
        const std::size_t n = g.ids_.size();
        for (std::size_t i = 1; i < n; ++i)
            if (g.projectors_[i].dim() != g.projectors_[0].dim())
                throw DimensionMismatch("projector '" + g.ids_[i] + "' has dimension " +
                                        std::to_string(g.projectors_[i].dim()) +
                                        ", expected " +
                                        std::to_string(g.projectors_[0].dim()));
        g.adj_.assign(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i) {
            g.adj_[i][i] = true;  // reflexive: P ~ P
            for (std::size_t j = i + 1; j < n; ++j) {
                const CMatrix& a = g.projectors_[i].matrix();
                const CMatrix& b = g.projectors_[j].matrix();
                bool edge = (a * b - b * a).norm() <= tol_comm;
                g.adj_[i][j] = edge;
                g.adj_[j][i] = edge;
            }
        }
        return g;
    }

    /// Graph with explicit adjacency and no projector payload; used for
    /// purely combinatorial work (and for exercising the clique machinery
    /// on graphs that need not arise from commutation).
    static PowerGraph from_adjacency(std::vector<std::string> ids,
                                     std::vector<std::vector<bool>> adjacency) {
        PowerGraph g;
        g.tol_comm_ = 0.0;
        const std::size_t n = ids.size();
        if (adjacency.size() != n)
            throw DimensionMismatch("adjacency size does not match id count");
        for (std::size_t i = 0; i < n; ++i) {
            if (adjacency[i].size() != n)
                throw DimensionMismatch("adjacency row " + std::to_string(i) +
                                        " has wrong length");
            if (!adjacency[i][i])
                throw InvalidContext("adjacency must be reflexive");
            for (std::size_t j = 0; j < n; ++j)
                if (adjacency[i][j] != adjacency[j][i])
                    throw InvalidContext("adjacency must be symmetric");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (g.index_.count(ids[i]))
                throw DuplicateId("node id '" + ids[i] + "' appears twice");
            g.index_.emplace(ids[i], i);
        }
        g.ids_ = std::move(ids);
        g.adj_ = std::move(adjacency);
        return g;
    }

    std::size_t size() const noexcept { return ids_.size(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::string& id(std::size_t i) const { return ids_.at(i); }
    double tol_comm() const noexcept { return tol_comm_; }

    bool has_projectors() const noexcept { return !projectors_.empty(); }
    const Projector& projector(std::size_t i) const { return projectors_.at(i); }

    const Projector& projector(const std::string& id) const {
        return projectors_.at(index(id));
    }

    std::size_t index(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw UnknownId("no node with id '" + id + "'");
        return it->second;
    }

    bool adjacent(std::size_t i, std::size_t j) const { return adj_.at(i).at(j); }

private:
    PowerGraph() = default;

    std::vector<std::string> ids_;
    std::vector<Projector> projectors_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::vector<bool>> adj_;
    double tol_comm_ = 0.0;
};

inline PowerGraph build_commutation_graph(std::vector<std::pair<std::string, Projector>> nodes,
                                          double tol_comm = Tolerances{}.comm) {
    return PowerGraph::from_projectors(std::move(nodes), tol_comm);
}

/// True iff the induced subgraph on `ids` is complete (vacuously true for
/// the empty set; a Context proper is always non-empty).
template <typename IdRange>
bool is_context(const PowerGraph& g, const IdRange& ids) {
    std::vector<std::size_t> idx;
    for (const std::string& id : ids) idx.push_back(g.index(id));
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size(); ++b)
            if (!g.adjacent(idx[a], idx[b])) return false;
    return true;
}

inline bool is_context(const PowerGraph& g, std::initializer_list<std::string> ids) {
    return is_context<std::initializer_list<std::string>>(g, ids);
}

namespace detail {

// Bron-Kerbosch with pivoting on bitmask node sets. Graphs here stay small
// (node count <= 64 by contract; the brute-force oracle covers <= 12).
inline void bron_kerbosch(std::uint64_t r, std::uint64_t p, std::uint64_t x,
                          const std::vector<std::uint64_t>& nbr,
                          std::vector<std::uint64_t>& out) {
    if (p == 0 && x == 0) {
        out.push_back(r);
        return;
    }
    std::uint64_t px = p | x;
    int pivot = -1, best = -1;
    for (std::uint64_t s = px; s;) {
        int u = std::countr_zero(s);
        s &= s - 1;
        int deg = std::popcount(p & nbr[u]);
        if (deg > best) {
            best = deg;
            pivot = u;
        }
    }
    std::uint64_t candidates = p & ~nbr[pivot];
    for (std::uint64_t s = candidates; s;) {
        int v = std::countr_zero(s);
        s &= s - 1;
        std::uint64_t bit = std::uint64_t{1} << v;
        bron_kerbosch(r | bit, p & nbr[v], x & nbr[v], nbr, out);
        p &= ~bit;
        x |= bit;
    }
}

}  // namespace detail

/// All maximal cliques of the commutation graph, as Contexts with sorted id
/// lists, the list itself ordered lexicographically on the id tuples.
inline std::vector<Context> maximal_contexts(const PowerGraph& g) {
    const std::size_t n = g.size();
    if (n == 0) return {};
    if (n > 64)
        throw TooManyNodes("clique enumeration supports at most 64 nodes, got " +
                           std::to_string(n));

    std::vector<std::uint64_t> nbr(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && g.adjacent(i, j)) nbr[i] |= std::uint64_t{1} << j;

    std::uint64_t all = (n == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
    std::vector<std::uint64_t> cliques;
    detail::bron_kerbosch(0, all, 0, nbr, cliques);

    std::vector<Context> out;
    out.reserve(cliques.size());
    for (std::uint64_t mask : cliques) {
        Context c;
        c.maximal = true;
        for (std::uint64_t s = mask; s;) {
            int v = std::countr_zero(s);
            s &= s - 1;
            c.ids.push_back(g.id(static_cast<std::size_t>(v)));
        }
        std::sort(c.ids.begin(), c.ids.end());
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(),
              [](const Context& a, const Context& b) { return a.ids < b.ids; });
    return out;
}

/// A maximal orthogonal family of rank-one projectors summing to identity,
/// with the target power recoverable as the sum of the leading `rank`
/// members. Constructive form of "each context generates the whole graph":
/// any power is reached from a reference context by rotating into its
/// eigenbasis and completing.
struct GeneratedContext {
    Context context;  // ids w0..w{dim-1}
    std::vector<std::pair<std::string, Projector>> projectors;
    std::size_t rank = 0;
};

inline GeneratedContext generate_context_containing(const Projector& p, Index dim,
                                                    const Tolerances& tol = {}) {
    if (p.dim() != dim)
        throw DimensionMismatch("projector has dimension " + std::to_string(p.dim()) +
                                ", expected " + std::to_string(dim));
    if (p.rank() < 1)
        throw InvalidProjector("target power must have rank >= 1");

    EigenSystem es = eigen_hermitian(p.matrix(), tol);
    std::vector<UnitVector> range;
    for (Index i = 0; i < es.values.size(); ++i)
        if (std::abs(es.values[i] - 1.0) <= tol.eig)
            range.emplace_back(UnitVector::normalized(es.vectors.col(i), tol));

    std::vector<UnitVector> basis = complete_to_basis(range, dim, tol);

    GeneratedContext out;
    out.rank = range.size();
    out.context.maximal = true;
    for (Index i = 0; i < dim; ++i) {
        std::string id = "w" + std::to_string(i);
        out.context.ids.push_back(id);
        out.projectors.emplace_back(std::move(id), vector_to_projector(basis[i], tol));
    }
    return out;
}

}  // namespace potentia

#endif
