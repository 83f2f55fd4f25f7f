#ifndef POTENTIA_DOT_HPP
#define POTENTIA_DOT_HPP

#include <algorithm>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "potentia/graph.hpp"
#include "potentia/psa.hpp"

namespace potentia {

namespace detail {

inline std::string potentia_label(const std::string& id, const PSA* psa) {
    if (!psa) return id;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", psa->potentia(id));
    return id + " : " + buf;
}

}  // namespace detail

/// Renders the graph in DOT, in the style of the paper's figures: one node
/// per power (labeled with its potentia when a PSA is given), undirected
/// commutation edges with loops omitted, and highlighted contexts drawn as
/// clusters. Output is byte-identical for identical input: nodes sort by
/// id, clusters keep their given order, and a node belongs to the first
/// cluster that names it.
inline std::string export_dot(const PowerGraph& g, const PSA* psa = nullptr,
                              const std::vector<Context>* highlight = nullptr) {
    if (psa)
        for (const std::string& id : g.ids()) psa->potentia(id);  // MissingNode check

    std::string out = "graph powers {\n";
    if (g.size() == 0) return out + "}\n";
    out += "  node [shape=circle];\n";

    std::vector<std::string> sorted_ids = g.ids();
    std::sort(sorted_ids.begin(), sorted_ids.end());

    std::set<std::string> clustered;
    if (highlight) {
        for (std::size_t c = 0; c < highlight->size(); ++c) {
            std::vector<std::string> members;
            for (const std::string& id : (*highlight)[c].ids) {
                g.index(id);  // UnknownId check
                if (clustered.insert(id).second) members.push_back(id);
            }
            std::sort(members.begin(), members.end());
            out += "  subgraph cluster_" + std::to_string(c) + " {\n";
            out += "    label=\"C" + std::to_string(c) + "\";\n";
            for (const std::string& id : members)
                out += "    \"" + id + "\" [label=\"" + detail::potentia_label(id, psa) +
                       "\"];\n";
            out += "  }\n";
        }
    }
    for (const std::string& id : sorted_ids)
        if (!clustered.count(id))
            out += "  \"" + id + "\" [label=\"" + detail::potentia_label(id, psa) +
                   "\"];\n";

    std::vector<std::pair<std::string, std::string>> edges;
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = i + 1; j < g.size(); ++j)
            if (g.adjacent(i, j)) {
                std::string a = g.id(i), b = g.id(j);
                if (b < a) std::swap(a, b);
                edges.emplace_back(std::move(a), std::move(b));
            }
    std::sort(edges.begin(), edges.end());
    for (const auto& [a, b] : edges) out += "  \"" + a + "\" -- \"" + b + "\";\n";
    out += "}\n";
    return out;
}

}  // namespace potentia

#endif
