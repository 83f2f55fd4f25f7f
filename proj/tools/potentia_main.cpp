// potentia: workbench CLI over the library. One subcommand per run; exit
// codes: 0 success, 1 validation failure, 2 computation error, 3 usage.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "potentia/potentia.hpp"

namespace {

using namespace potentia;
using nlohmann::ordered_json;

struct Options {
    std::string input;
    std::string output;
    std::string format = "table";
    std::optional<double> tol_override;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw BadDocument("cannot read input file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void emit(const Options& opt, const std::string& text) {
    if (opt.output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(opt.output, std::ios::binary);
    if (!out.good()) throw BadDocument("cannot write output file '" + opt.output + "'");
    out << text;
}

WorkbenchDocument load_input(const Options& opt) {
    if (opt.input.empty()) throw CLI::ValidationError("--input FILE is required");
    return parse_document(slurp(opt.input));
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::string join_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += " ";
        out += ids[i];
    }
    return out;
}

ordered_json complex_json(Complex z) {
    return ordered_json::array({z.real() + 0.0, z.imag() + 0.0});
}

ordered_json matrix_json(const CMatrix& m) {
    ordered_json out = ordered_json::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) out.push_back(complex_json(m(i, j)));
    return out;
}

int run_validate(const Options& opt) {
    WorkbenchDocument doc = load_input(opt);
    Tolerances tol;
    if (opt.tol_override) tol.comm = *opt.tol_override;
    std::string report = "dim: " + std::to_string(doc.dim) + "\n";
    if (doc.rho) {
        DensityMatrix rho = load_density(doc, tol);
        report += "rho: valid density matrix\n";
    } else {
        report += "rho: absent\n";
    }
    for (const auto& [id, m] : doc.projectors) {
        Projector p(m, tol);
        report +=
            "projector " + id + ": valid, rank " + std::to_string(p.rank()) + "\n";
    }
    if (!doc.contexts.empty()) {
        auto projectors = load_projectors(doc, tol);
        PowerGraph g = build_commutation_graph(projectors, tol.comm);
        for (std::size_t k = 0; k < doc.contexts.size(); ++k) {
            if (!is_context(g, doc.contexts[k]))
                throw InvalidContext("declared context " + std::to_string(k) +
                                     " contains non-commuting members");
            report += "context " + std::to_string(k) + ": commuting (" +
                      join_ids(doc.contexts[k]) + ")\n";
        }
    }
    report += "document valid\n";
    emit(opt, report);
    return 0;
}

int run_psa(const Options& opt) {
    WorkbenchDocument doc = load_input(opt);
    Tolerances tol;
    if (opt.tol_override) tol.comm = *opt.tol_override;
    DensityMatrix rho = load_density(doc, tol);
    PowerGraph g = build_commutation_graph(load_projectors(doc, tol), tol.comm);
    PSA psa = evaluate_psa(rho, g, tol);
    if (opt.format == "json") {
        emit(opt, psa_to_json(psa).dump(2) + "\n");
    } else {
        std::string out = "id\tpotentia\n";
        for (const auto& [id, p] : psa.table) out += id + "\t" + format_double(p) + "\n";
        emit(opt, out);
    }
    return 0;
}

int run_perspectives(const Options& opt) {
    WorkbenchDocument doc = load_input(opt);
    Tolerances tol;
    DensityMatrix rho = load_density(doc, tol);
    if (doc.contexts.empty()) throw BadDocument("document declares no contexts");
    ordered_json jout = ordered_json::array();
    std::string tout;
    for (std::size_t k = 0; k < doc.contexts.size(); ++k) {
        RankOneContext ctx = load_rank_one_context(doc, k, tol);
        QuantumPerspective qp = quantum_perspective(rho, ctx, tol);
        if (opt.format == "json") {
            ordered_json entry;
            entry["context"] = doc.contexts[k];
            entry["rows"] = ordered_json::array();
            for (std::size_t i = 0; i < ctx.size(); ++i) {
                ordered_json row;
                row["id"] = ctx.id(i);
                row["potentia"] = qp.potentia[i] + 0.0;
                if (qp.coefficients)
                    row["coefficient"] = complex_json((*qp.coefficients)[i]);
                entry["rows"].push_back(std::move(row));
            }
            jout.push_back(std::move(entry));
        } else {
            tout += "context " + std::to_string(k) + ": " + join_ids(doc.contexts[k]) +
                    (qp.coefficients ? " (rank-one source)" : " (no coefficients)") +
                    "\n";
            for (std::size_t i = 0; i < ctx.size(); ++i) {
                tout += "  " + ctx.id(i) + "\t" + format_double(qp.potentia[i]);
                if (qp.coefficients) {
                    Complex c = (*qp.coefficients)[i];
                    tout += "\t[" + format_double(c.real()) + ", " +
                            format_double(c.imag()) + "]";
                }
                tout += "\n";
            }
        }
    }
    emit(opt, opt.format == "json" ? jout.dump(2) + "\n" : tout);
    return 0;
}

int run_purity(const Options& opt) {
    WorkbenchDocument doc = load_input(opt);
    Tolerances tol;
    PurityReport report = purity_report(load_density(doc, tol), tol);
    if (opt.format == "json") {
        ordered_json j;
        j["trace_purity"] = report.trace_purity;
        j["rank"] = report.rank;
        j["idempotency_defect"] = report.idempotency_defect;
        j["is_pure"] = report.is_pure;
        emit(opt, j.dump(2) + "\n");
    } else {
        emit(opt, "trace_purity\t" + format_double(report.trace_purity) + "\nrank\t" +
                      std::to_string(report.rank) + "\nidempotency_defect\t" +
                      format_double(report.idempotency_defect) + "\nis_pure\t" +
                      (report.is_pure ? "true" : "false") + "\n");
    }
    return 0;
}

int run_reconstruct(const Options& opt, const std::string& psa_path) {
    WorkbenchDocument doc = load_input(opt);
    Tolerances tol;
    if (opt.tol_override) tol.recon = *opt.tol_override;
    if (psa_path.empty()) throw CLI::ValidationError("--psa FILE is required");
    PSA psa = parse_psa(slurp(psa_path));
    auto family = load_projectors(doc, tol);
    ReconstructionResult result = reconstruct_density(psa, family, doc.dim, tol);
    if (opt.format == "json") {
        ordered_json j;
        j["dim"] = doc.dim;
        j["rho"] = matrix_json(result.rho.matrix());
        j["residual"] = result.residual;
        j["clipped_weight"] = result.clipped_weight;
        emit(opt, j.dump(2) + "\n");
    } else {
        std::string out = "residual\t" + format_double(result.residual) +
                          "\nclipped_weight\t" + format_double(result.clipped_weight) +
                          "\nrho:\n";
        const CMatrix& m = result.rho.matrix();
        for (Index i = 0; i < m.rows(); ++i) {
            out += " ";
            for (Index j = 0; j < m.cols(); ++j)
                out += " [" + format_double(m(i, j).real()) + ", " +
                       format_double(m(i, j).imag()) + "]";
            out += "\n";
        }
        emit(opt, out);
    }
    return 0;
}

int run_contexts(const Options& opt) {
    WorkbenchDocument doc = load_input(opt);
    Tolerances tol;
    if (opt.tol_override) tol.comm = *opt.tol_override;
    PowerGraph g = build_commutation_graph(load_projectors(doc, tol), tol.comm);
    std::vector<Context> contexts = maximal_contexts(g);
    if (opt.format == "json") {
        ordered_json j = ordered_json::array();
        for (const Context& c : contexts) j.push_back(c.ids);
        emit(opt, j.dump(2) + "\n");
    } else {
        std::string out;
        for (const Context& c : contexts) out += join_ids(c.ids) + "\n";
        emit(opt, out);
    }
    return 0;
}

int run_ks(const Options& opt) {
    WorkbenchDocument doc = load_input(opt);
    Tolerances tol;
    double sum_tol = opt.tol_override ? *opt.tol_override : tol.born;
    ValuationProblem problem = load_valuation_problem(doc, tol);
    if (problem.contexts.empty()) throw BadDocument("document declares no contexts");
    ValuationSearchResult result = find_binary_valuation(problem, tol);

    std::optional<IntensiveReport> intensive;
    if (doc.rho) {
        DensityMatrix rho = load_density(doc, tol);
        PowerGraph g = build_commutation_graph(problem.nodes, tol.comm);
        intensive = check_intensive_valuation(evaluate_psa(rho, g, tol), problem, sum_tol);
    }

    if (opt.format == "json") {
        ordered_json j;
        j["exists"] = result.valuation.has_value();
        j["explored"] = result.explored;
        if (result.valuation) {
            ordered_json assignment;
            for (const auto& [id, v] : result.valuation->assignment) assignment[id] = v;
            j["assignment"] = std::move(assignment);
        }
        if (intensive) {
            ordered_json rows = ordered_json::array();
            for (const auto& row : intensive->rows) {
                ordered_json r;
                r["context"] = row.context;
                r["sum"] = row.sum;
                r["pass"] = row.pass;
                rows.push_back(std::move(r));
            }
            j["intensive"] = std::move(rows);
            j["intensive_pass"] = intensive->pass;
        }
        emit(opt, j.dump(2) + "\n");
    } else {
        std::string out;
        if (result.valuation) {
            out += "binary valuation: exists\n";
            for (const auto& [id, v] : result.valuation->assignment)
                out += "  " + id + " -> " + std::to_string(v) + "\n";
        } else {
            out += "binary valuation: none exists (exhaustive)\n";
        }
        out += "explored: " + std::to_string(result.explored) + "\n";
        if (intensive) {
            out += "intensive valuation (Born rule):\n";
            for (const auto& row : intensive->rows)
                out += "  " + join_ids(row.context) + ": sum " + format_double(row.sum) +
                       (row.pass ? " pass" : " FAIL") + "\n";
            out += intensive->pass ? "intensive: pass\n" : "intensive: FAIL\n";
        }
        emit(opt, out);
    }
    return 0;
}

int run_dasein(const Options& opt, const std::string& target, bool close_meets) {
    WorkbenchDocument doc = load_input(opt);
    Tolerances tol;
    double match_tol = opt.tol_override ? *opt.tol_override : tol.born;
    DensityMatrix rho = load_density(doc, tol);
    if (target.empty()) throw CLI::ValidationError("--target ID is required");
    std::optional<Projector> p;
    for (const auto& [id, m] : doc.projectors)
        if (id == target) p.emplace(m, tol);
    if (!p) throw UnknownId("no projector with id '" + target + "'");

    ContextPoset poset = load_context_poset(doc, close_meets, tol);
    ClopenSubobject delta = daseinisation_subobject(*p, poset, tol);
    AntitoneFunction mu = measure(rho, delta, poset, tol);
    BornRecovery recovery = born_recovery(rho, *p, poset, tol);
    double born = (rho.matrix() * p->matrix()).trace().real();

    if (opt.format == "json") {
        ordered_json j;
        j["target"] = target;
        j["born_value"] = born;
        ordered_json contexts = ordered_json::array();
        for (std::size_t i = 0; i < poset.size(); ++i) {
            ordered_json c;
            c["id"] = poset.id(i);
            c["atoms"] = poset.context(i).size();
            c["selected"] = delta.selection.at(poset.id(i));
            c["measure"] = mu.values.at(poset.id(i));
            contexts.push_back(std::move(c));
        }
        j["contexts"] = std::move(contexts);
        j["minimum"] = recovery.minimum;
        j["attained_at"] = recovery.attained_at;
        j["recovers_born"] = std::abs(recovery.minimum - born) <= match_tol;
        emit(opt, j.dump(2) + "\n");
    } else {
        std::string out = "target: " + target + "\nborn value: " + format_double(born) +
                          "\ncontexts:\n";
        for (std::size_t i = 0; i < poset.size(); ++i) {
            out += "  " + poset.id(i) + ": " +
                   std::to_string(poset.context(i).size()) + " atoms, selected {";
            bool first = true;
            for (std::size_t t : delta.selection.at(poset.id(i))) {
                if (!first) out += ", ";
                first = false;
                out += std::to_string(t);
            }
            out += "}, measure " + format_double(mu.values.at(poset.id(i))) + "\n";
        }
        out += "minimum: " + format_double(recovery.minimum) + " at " +
               recovery.attained_at + "\n";
        out += std::abs(recovery.minimum - born) <= match_tol
                   ? "recovers the Born value\n"
                   : "DOES NOT recover the Born value\n";
        emit(opt, out);
    }
    return 0;
}

int run_sample(const Options& opt, std::uint64_t shots, std::uint64_t seed,
               std::size_t context_index) {
    WorkbenchDocument doc = load_input(opt);
    Tolerances tol;
    DensityMatrix rho = load_density(doc, tol);
    RankOneContext ctx = load_rank_one_context(doc, context_index, tol);
    SampleRun run = sample_context(rho, ctx, shots, seed, tol);
    PSA estimate = estimate_psa(run);
    if (opt.format == "json") {
        ordered_json j;
        j["context"] = run.member_ids;
        j["shots"] = run.shots;
        j["seed"] = run.seed;
        ordered_json counts;
        for (const auto& [id, c] : run.counts) counts[id] = c;
        j["counts"] = std::move(counts);
        j["estimate"] = psa_to_json(estimate);
        emit(opt, j.dump(2) + "\n");
    } else {
        std::string out = "shots\t" + std::to_string(run.shots) + "\nseed\t" +
                          std::to_string(run.seed) + "\n";
        out += "id\tcount\tfrequency\n";
        for (const std::string& id : run.member_ids)
            out += id + "\t" + std::to_string(run.counts.at(id)) + "\t" +
                   format_double(estimate.table.at(id)) + "\n";
        if (estimate.low_statistics) out += "warning: too few shots for estimation\n";
        emit(opt, out);
    }
    return 0;
}

int run_dot(const Options& opt, const std::vector<std::size_t>& highlight) {
    WorkbenchDocument doc = load_input(opt);
    Tolerances tol;
    if (opt.tol_override) tol.comm = *opt.tol_override;
    PowerGraph g = build_commutation_graph(load_projectors(doc, tol), tol.comm);
    std::optional<PSA> psa;
    if (doc.rho) psa = evaluate_psa(load_density(doc, tol), g, tol);
    std::vector<Context> clusters;
    for (std::size_t k : highlight) {
        if (k >= doc.contexts.size())
            throw UnknownId("document declares no context with index " +
                            std::to_string(k));
        Context c;
        c.ids = doc.contexts[k];
        std::sort(c.ids.begin(), c.ids.end());
        c.maximal = is_context(g, c.ids);
        clusters.push_back(std::move(c));
    }
    emit(opt, export_dot(g, psa ? &*psa : nullptr, clusters.empty() ? nullptr : &clusters));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"workbench for intensive (Born-rule) valuations of projector "
                 "commutation graphs, with the topos-style constructions for "
                 "comparison"};
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    app.add_option("--input", opt.input, "workbench document (JSON)");
    app.add_option("--output", opt.output, "write output here instead of stdout");
    app.add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"table", "json"}))
        ->capture_default_str();
    double tol_value = 0.0;
    auto* tol_flag =
        app.add_option("--tol", tol_value,
                       "override the subcommand's decision tolerance (see README)");

    app.add_subcommand("validate", "check every invariant the document claims");
    app.add_subcommand("psa", "evaluate the Born-rule table of the document");
    app.add_subcommand("perspectives", "per-context views of the document state");
    app.add_subcommand("purity", "purity diagnostics of the document state");

    auto* reconstruct =
        app.add_subcommand("reconstruct", "solve a PSA table back into a state");
    std::string psa_path;
    reconstruct->add_option("--psa", psa_path, "PSA table file (JSON)");

    app.add_subcommand("contexts", "enumerate maximal contexts of the graph");
    app.add_subcommand("ks", "search for a global binary valuation");

    auto* dasein = app.add_subcommand(
        "dasein", "daseinisation and its measure over the declared poset");
    std::string target;
    bool close_meets = false;
    dasein->add_option("--target", target, "projector id to daseinise");
    dasein->add_flag("--close-meets", close_meets,
                     "close the poset under pairwise common coarsenings");

    auto* sample = app.add_subcommand("sample", "seeded measurement run of a context");
    std::uint64_t shots = 10000, seed = 0;
    std::size_t context_index = 0;
    sample->add_option("--shots", shots, "number of draws")->capture_default_str();
    sample->add_option("--seed", seed, "RNG seed")->capture_default_str();
    sample->add_option("--context", context_index, "declared context index")
        ->capture_default_str();

    auto* dot = app.add_subcommand("dot", "export the graph in DOT");
    std::vector<std::size_t> highlight;
    dot->add_option("--highlight", highlight, "context indices to draw as clusters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }
    if (*tol_flag) opt.tol_override = tol_value;

    try {
        if (app.got_subcommand("validate")) return run_validate(opt);
        if (app.got_subcommand("psa")) return run_psa(opt);
        if (app.got_subcommand("perspectives")) return run_perspectives(opt);
        if (app.got_subcommand("purity")) return run_purity(opt);
        if (app.got_subcommand("reconstruct")) return run_reconstruct(opt, psa_path);
        if (app.got_subcommand("contexts")) return run_contexts(opt);
        if (app.got_subcommand("ks")) return run_ks(opt);
        if (app.got_subcommand("dasein")) return run_dasein(opt, target, close_meets);
        if (app.got_subcommand("sample")) return run_sample(opt, shots, seed, context_index);
        if (app.got_subcommand("dot")) return run_dot(opt, highlight);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 3;
    } catch (const potentia::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == potentia::Error::Kind::Validation ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 3;
}
