#ifndef POTENTIA_VALUATIONS_HPP
#define POTENTIA_VALUATIONS_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "potentia/psa.hpp"

namespace potentia {

/// A family of powers together with the measurement contexts (each a
/// rank-one resolution of identity) over which global valuations are
/// sought.
struct ValuationProblem {
    std::vector<std::pair<std::string, Projector>> nodes;
    std::vector<std::vector<std::string>> contexts;

    const Projector& projector(const std::string& id) const {
        for (const auto& [nid, p] : nodes)
            if (nid == id) return p;
        throw UnknownId("no node with id '" + id + "'");
    }
};

/// A classical {0,1} assignment with exactly one 1 in every context.
struct BinaryValuation {
    std::map<std::string, int> assignment;
};

/// Outcome of the exhaustive search. An empty valuation is a certificate
/// that no assignment satisfies the one-per-context rule; `explored`
/// counts the branch decisions taken.
struct ValuationSearchResult {
    std::optional<BinaryValuation> valuation;
    std::uint64_t explored = 0;
};

namespace detail {

inline void validate_problem(const ValuationProblem& problem, const Tolerances& tol) {
    if (problem.nodes.empty()) return;
    const Index dim = problem.nodes.front().second.dim();
    std::map<std::string, const Projector*> byid;
    for (const auto& [id, p] : problem.nodes) {
        if (p.dim() != dim)
            throw InvalidContext("node '" + id + "' has mismatched dimension");
        if (!byid.emplace(id, &p).second)
            throw DuplicateId("node id '" + id + "' appears twice");
    }
    for (const auto& ctx : problem.contexts) {
        CMatrix sum = CMatrix::Zero(dim, dim);
        for (const std::string& id : ctx) {
            auto it = byid.find(id);
            if (it == byid.end())
                throw InvalidContext("context references unknown node '" + id + "'");
            if (it->second->rank() != 1)
                throw InvalidContext("context member '" + id + "' is not rank one");
            sum += it->second->matrix();
        }
        double defect = (sum - CMatrix::Identity(dim, dim)).norm();
        if (defect > tol.idem)
            throw InvalidContext("context does not resolve identity, defect " +
                                 std::to_string(defect));
    }
}

}  // namespace detail

/// Exhaustive backtracking for a global binary valuation. Contexts are
/// processed in ascending size (ties broken lexicographically); inside a
/// context the node receiving the 1 is tried in lexicographic order, so
/// the first solution found is the lexicographically canonical one.
inline ValuationSearchResult find_binary_valuation(const ValuationProblem& problem,
                                                   const Tolerances& tol = {}) {
    detail::validate_problem(problem, tol);

    std::vector<std::vector<std::string>> contexts = problem.contexts;
    for (auto& c : contexts) std::sort(c.begin(), c.end());
    std::sort(contexts.begin(), contexts.end(),
              [](const auto& a, const auto& b) {
                  return a.size() != b.size() ? a.size() < b.size() : a < b;
              });

    // node id -> contexts containing it, for unit propagation of the zeros
    std::map<std::string, std::vector<std::size_t>> containing;
    for (std::size_t k = 0; k < contexts.size(); ++k)
        for (const std::string& id : contexts[k]) containing[id].push_back(k);

    enum : int { unset = -1 };
    std::map<std::string, int> value;
    for (const auto& [id, p] : problem.nodes) value[id] = unset;
    for (const auto& [id, ctxs] : containing)
        if (!value.count(id)) value[id] = unset;

    ValuationSearchResult result;
    std::vector<std::string> trail;

    auto assign = [&](const std::string& id, int v) -> bool {
        int& slot = value[id];
        if (slot != unset) return slot == v;
        slot = v;
        trail.push_back(id);
        return true;
    };

    auto undo_to = [&](std::size_t mark) {
        while (trail.size() > mark) {
            value[trail.back()] = unset;
            trail.pop_back();
        }
    };

    // Assign 1 to `one` and 0 to every other member of every context
    // containing it. Returns false on contradiction.
    auto place_one = [&](const std::string& one) -> bool {
        if (!assign(one, 1)) return false;
        for (std::size_t k : containing[one])
            for (const std::string& other : contexts[k])
                if (other != one && !assign(other, 0)) return false;
        return true;
    };

    auto solve = [&](auto&& self, std::size_t k) -> bool {
        if (k == contexts.size()) return true;
        const auto& ctx = contexts[k];
        for (const std::string& id : ctx)
            if (value[id] == 1) return self(self, k + 1);  // already satisfied
        for (const std::string& id : ctx) {
            if (value[id] == 0) continue;
            ++result.explored;
            std::size_t mark = trail.size();
            if (place_one(id) && self(self, k + 1)) return true;
            undo_to(mark);
        }
        return false;
    };

    if (solve(solve, 0)) {
        BinaryValuation valuation;
        for (const auto& [id, v] : value) valuation.assignment[id] = (v == 1) ? 1 : 0;
        result.valuation = std::move(valuation);
    }
    return result;
}

/// Per-context sums of an intensive valuation. The Born valuation passes
/// on every resolution of identity regardless of the state, which is the
/// contrast with the binary search above.
struct IntensiveReport {
    struct Row {
        std::vector<std::string> context;
        double sum;
        bool pass;
    };
    std::vector<Row> rows;
    bool pass = true;
};

inline IntensiveReport check_intensive_valuation(const PSA& psa,
                                                 const ValuationProblem& problem,
                                                 double tol_sum = Tolerances{}.born) {
    for (const auto& [id, p] : problem.nodes)
        if (!psa.table.count(id))
            throw MissingNode("PSA lacks a value for node '" + id + "'");
    IntensiveReport report;
    for (const auto& ctx : problem.contexts) {
        IntensiveReport::Row row{ctx, 0.0, false};
        for (const std::string& id : ctx) row.sum += psa.potentia(id);
        row.pass = std::abs(row.sum - 1.0) <= tol_sum;
        report.pass = report.pass && row.pass;
        report.rows.push_back(std::move(row));
    }
    return report;
}

/// Diagnostic only: the member of each context with the largest potentia
/// (lexicographic tie-break). Invariant under positive rescaling of the
/// whole table; makes no claim of satisfying the one-per-context rule.
inline std::vector<std::string> argmax_selection(const PSA& psa,
                                                 const ValuationProblem& problem) {
    std::vector<std::string> picks;
    picks.reserve(problem.contexts.size());
    for (const auto& ctx : problem.contexts) {
        if (ctx.empty()) throw InvalidContext("empty context");
        std::vector<std::string> sorted = ctx;
        std::sort(sorted.begin(), sorted.end());
        std::string best = sorted.front();
        double best_value = psa.potentia(best);
        for (const std::string& id : sorted) {
            double v = psa.potentia(id);
            if (v > best_value) {
                best_value = v;
                best = id;
            }
        }
        picks.push_back(std::move(best));
    }
    return picks;
}

/// The 18-vector, 9-basis Kochen-Specker set in dimension 4 (vectors with
/// entries in {0, +1, -1}, normalized; each vector appears in exactly two
/// bases). No binary valuation exists for it; the parity of the double
/// cover already forbids one, and the exhaustive search certifies it.
inline ValuationProblem kochen_specker_18(const Tolerances& tol = {}) {
    static constexpr std::array<std::array<int, 4>, 18> vectors{{
        {0, 0, 0, 1},    // u01
        {0, 0, 1, 0},    // u02
        {1, 1, 0, 0},    // u03
        {1, -1, 0, 0},   // u04
        {0, 1, 0, 0},    // u05
        {1, 0, 1, 0},    // u06
        {1, 0, -1, 0},   // u07
        {1, -1, 1, -1},  // u08
        {1, -1, -1, 1},  // u09
        {0, 0, 1, 1},    // u10
        {1, 1, 1, 1},    // u11
        {0, 1, 0, -1},   // u12
        {1, 0, 0, 1},    // u13
        {1, 0, 0, -1},   // u14
        {0, 1, -1, 0},   // u15
        {1, 1, -1, 1},   // u16
        {1, 1, 1, -1},   // u17
        {-1, 1, 1, 1},   // u18
    }};
    static constexpr std::array<std::array<int, 4>, 9> bases{{
        {1, 2, 3, 4},
        {1, 5, 6, 7},
        {8, 9, 3, 10},
        {8, 11, 7, 12},
        {2, 5, 13, 14},
        {9, 11, 14, 15},
        {16, 17, 4, 10},
        {16, 18, 6, 12},
        {17, 18, 13, 15},
    }};

    auto id_of = [](int n) {
        return "u" + std::string(n < 10 ? "0" : "") + std::to_string(n);
    };

    ValuationProblem problem;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        CVector v(4);
        for (Index j = 0; j < 4; ++j) v[j] = static_cast<double>(vectors[i][j]);
        problem.nodes.emplace_back(
            id_of(static_cast<int>(i) + 1),
            vector_to_projector(UnitVector::normalized(v, tol), tol));
    }
    for (const auto& basis : bases) {
        std::vector<std::string> ctx;
        for (int n : basis) ctx.push_back(id_of(n));
        std::sort(ctx.begin(), ctx.end());
        problem.contexts.push_back(std::move(ctx));
    }
    detail::validate_problem(problem, tol);
    return problem;
}

}  // namespace potentia

#endif
