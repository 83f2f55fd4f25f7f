#ifndef POTENTIA_DOCUMENT_HPP
#define POTENTIA_DOCUMENT_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "potentia/psa.hpp"
#include "potentia/topos.hpp"
#include "potentia/valuations.hpp"

namespace potentia {

/// The workbench interchange document. Complex numbers are [re, im] pairs;
/// matrices are flat row-major arrays of such pairs. Matrices are kept raw
/// here: structural invariants (shapes, unique ids, known context ids) are
/// enforced at parse time, semantic ones (Hermiticity, idempotency, ...)
/// by the loaders below.
struct WorkbenchDocument {
    Index dim = 0;
    std::optional<CMatrix> rho;
    std::vector<std::pair<std::string, CMatrix>> projectors;
    std::vector<std::vector<std::string>> contexts;
    std::map<std::string, std::string> metadata;
};

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline ordered_json complex_to_json(Complex z) {
    return ordered_json::array({z.real() + 0.0, z.imag() + 0.0});
}

inline ordered_json matrix_to_json(const CMatrix& m) {
    ordered_json rows = ordered_json::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) rows.push_back(complex_to_json(m(i, j)));
    return rows;
}

inline CMatrix matrix_from_json(const ordered_json& j, Index dim,
                                const std::string& what) {
    if (!j.is_array() || static_cast<Index>(j.size()) != dim * dim)
        throw BadDocument(what + " must be a row-major array of " +
                          std::to_string(dim * dim) + " complex entries");
    CMatrix m(dim, dim);
    Index k = 0;
    for (const auto& entry : j) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
            !entry[1].is_number())
            throw BadDocument(what + " entry " + std::to_string(k) +
                              " is not an [re, im] pair");
        m(k / dim, k % dim) = Complex(entry[0].get<double>(), entry[1].get<double>());
        ++k;
    }
    return m;
}

}  // namespace detail

inline WorkbenchDocument parse_document(const std::string& text) {
    detail::ordered_json j;
    try {
        j = detail::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!j.is_object()) throw BadDocument("top level must be a JSON object");
    if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<int>() < 1)
        throw BadDocument("'dim' must be a positive integer");

    WorkbenchDocument doc;
    doc.dim = j["dim"].get<Index>();

    if (j.contains("rho"))
        doc.rho = detail::matrix_from_json(j["rho"], doc.dim, "'rho'");

    std::set<std::string> ids;
    if (j.contains("projectors")) {
        if (!j["projectors"].is_array())
            throw BadDocument("'projectors' must be an array");
        for (const auto& p : j["projectors"]) {
            if (!p.is_object() || !p.contains("id") || !p["id"].is_string() ||
                !p.contains("matrix"))
                throw BadDocument("each projector needs an 'id' and a 'matrix'");
            std::string id = p["id"].get<std::string>();
            if (!ids.insert(id).second)
                throw BadDocument("projector id '" + id + "' appears twice");
            doc.projectors.emplace_back(
                id, detail::matrix_from_json(p["matrix"], doc.dim,
                                             "projector '" + id + "'"));
        }
    }

    if (j.contains("contexts")) {
        if (!j["contexts"].is_array()) throw BadDocument("'contexts' must be an array");
        for (const auto& c : j["contexts"]) {
            if (!c.is_array()) throw BadDocument("each context must be an id array");
            std::vector<std::string> ctx;
            for (const auto& id : c) {
                if (!id.is_string()) throw BadDocument("context ids must be strings");
                if (!ids.count(id.get<std::string>()))
                    throw BadDocument("context references unknown id '" +
                                      id.get<std::string>() + "'");
                ctx.push_back(id.get<std::string>());
            }
            doc.contexts.push_back(std::move(ctx));
        }
    }

    if (j.contains("metadata")) {
        if (!j["metadata"].is_object()) throw BadDocument("'metadata' must be an object");
        for (const auto& [key, value] : j["metadata"].items()) {
            if (!value.is_string()) throw BadDocument("metadata values must be strings");
            doc.metadata[key] = value.get<std::string>();
        }
    }
    return doc;
}

namespace detail {

inline std::string json_scalar(double x) { return ordered_json(x + 0.0).dump(); }

inline std::string json_string(const std::string& s) { return ordered_json(s).dump(); }

// one matrix per line: [[re, im], [re, im], ...] row-major
inline std::string matrix_line(const CMatrix& m) {
    std::string out = "[";
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            if (i != 0 || j != 0) out += ", ";
            out += "[" + json_scalar(m(i, j).real()) + ", " +
                   json_scalar(m(i, j).imag()) + "]";
        }
    return out + "]";
}

}  // namespace detail

/// Canonical serialization: fixed key order (dim, rho, projectors,
/// contexts, metadata), one line per matrix and per context, absent
/// optionals omitted, shortest round-trip decimals. parse . serialize is
/// the identity on this form.
inline std::string serialize_document(const WorkbenchDocument& doc) {
    std::vector<std::string> fields;
    fields.push_back("  \"dim\": " + std::to_string(doc.dim));
    if (doc.rho) fields.push_back("  \"rho\": " + detail::matrix_line(*doc.rho));
    {
        std::string block = "  \"projectors\": [";
        if (!doc.projectors.empty()) {
            block += "\n";
            for (std::size_t i = 0; i < doc.projectors.size(); ++i) {
                block += "    {\"id\": " + detail::json_string(doc.projectors[i].first) +
                         ", \"matrix\": " + detail::matrix_line(doc.projectors[i].second) +
                         "}";
                block += (i + 1 < doc.projectors.size()) ? ",\n" : "\n  ";
            }
        }
        fields.push_back(block + "]");
    }
    if (!doc.contexts.empty()) {
        std::string block = "  \"contexts\": [\n";
        for (std::size_t i = 0; i < doc.contexts.size(); ++i) {
            block += "    [";
            for (std::size_t k = 0; k < doc.contexts[i].size(); ++k) {
                if (k) block += ", ";
                block += detail::json_string(doc.contexts[i][k]);
            }
            block += "]";
            block += (i + 1 < doc.contexts.size()) ? ",\n" : "\n  ";
        }
        fields.push_back(block + "]");
    }
    if (!doc.metadata.empty()) {
        std::string line = "  \"metadata\": {";
        bool first = true;
        for (const auto& [key, value] : doc.metadata) {
            if (!first) line += ", ";
            first = false;
            line += detail::json_string(key) + ": " + detail::json_string(value);
        }
        fields.push_back(line + "}");
    }
    std::string out = "{\n";
    for (std::size_t i = 0; i < fields.size(); ++i)
        out += fields[i] + (i + 1 < fields.size() ? ",\n" : "\n");
    return out + "}\n";
}

inline DensityMatrix load_density(const WorkbenchDocument& doc, const Tolerances& tol = {}) {
    if (!doc.rho) throw BadDocument("document carries no 'rho'");
    return DensityMatrix(*doc.rho, tol);
}

inline std::vector<std::pair<std::string, Projector>> load_projectors(
    const WorkbenchDocument& doc, const Tolerances& tol = {}) {
    std::vector<std::pair<std::string, Projector>> out;
    out.reserve(doc.projectors.size());
    for (const auto& [id, m] : doc.projectors) out.emplace_back(id, Projector(m, tol));
    return out;
}

inline RankOneContext load_rank_one_context(const WorkbenchDocument& doc,
                                            std::size_t context_index,
                                            const Tolerances& tol = {}) {
    if (context_index >= doc.contexts.size())
        throw UnknownId("document declares no context with index " +
                        std::to_string(context_index));
    std::map<std::string, const CMatrix*> byid;
    for (const auto& [id, m] : doc.projectors) byid[id] = &m;
    std::vector<std::pair<std::string, Projector>> members;
    for (const std::string& id : doc.contexts[context_index])
        members.emplace_back(id, Projector(*byid.at(id), tol));
    return RankOneContext::from_projectors(members, tol);
}

inline ValuationProblem load_valuation_problem(const WorkbenchDocument& doc,
                                               const Tolerances& tol = {}) {
    ValuationProblem problem;
    problem.nodes = load_projectors(doc, tol);
    problem.contexts = doc.contexts;
    return problem;
}

/// Builds the context poset declared by the document: one abelian context
/// per declared id-list (the algebra generated by those projectors), plus
/// the trivial context, optionally closed under meets.
inline ContextPoset load_context_poset(const WorkbenchDocument& doc,
                                       bool close_under_meets = false,
                                       const Tolerances& tol = {}) {
    std::map<std::string, const CMatrix*> byid;
    for (const auto& [id, m] : doc.projectors) byid[id] = &m;
    std::vector<std::pair<std::string, AbelianContext>> contexts;
    for (std::size_t k = 0; k < doc.contexts.size(); ++k) {
        std::vector<Projector> family;
        for (const std::string& id : doc.contexts[k])
            family.emplace_back(*byid.at(id), tol);
        contexts.emplace_back("C" + std::to_string(k),
                              abelian_context_from(family, tol));
    }
    if (contexts.empty()) {
        if (doc.dim < 1) throw BadDocument("cannot build a poset without a dimension");
        contexts.emplace_back("trivial", AbelianContext::trivial(doc.dim, tol));
    }
    return ContextPoset(std::move(contexts), close_under_meets, tol);
}

/// PSA tables travel as (id, potentia) rows.
inline detail::ordered_json psa_to_json(const PSA& psa) {
    detail::ordered_json j;
    j["table"] = detail::ordered_json::array();
    for (const auto& [id, p] : psa.table) {
        detail::ordered_json row;
        row["id"] = id;
        row["potentia"] = p + 0.0;
        j["table"].push_back(std::move(row));
    }
    if (psa.shots) {
        j["shots"] = *psa.shots;
        j["low_statistics"] = psa.low_statistics;
    }
    return j;
}

inline PSA psa_from_json(const detail::ordered_json& j) {
    if (!j.is_object() || !j.contains("table") || !j["table"].is_array())
        throw BadDocument("PSA document needs a 'table' array");
    PSA psa;
    for (const auto& row : j["table"]) {
        if (!row.is_object() || !row.contains("id") || !row["id"].is_string() ||
            !row.contains("potentia") || !row["potentia"].is_number())
            throw BadDocument("each PSA row needs 'id' and 'potentia'");
        std::string id = row["id"].get<std::string>();
        if (psa.table.count(id)) throw BadDocument("PSA row '" + id + "' appears twice");
        psa.table[id] = row["potentia"].get<double>();
    }
    if (j.contains("shots")) {
        psa.shots = j["shots"].get<std::uint64_t>();
        psa.low_statistics = j.value("low_statistics", false);
    }
    return psa;
}

inline PSA parse_psa(const std::string& text) {
    try {
        return psa_from_json(detail::ordered_json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what());
    }
}

}  // namespace potentia

#endif
