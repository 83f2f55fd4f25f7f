// Walks one qubit state through the main constructions: the commutation
// graph of two bases, its Born-rule table, purity, a perspective change,
// a seeded measurement run, and the daseinisation measure.

#include <iostream>

#include "potentia/potentia.hpp"

using namespace potentia;

int main() {
    double a = 0.6, b = 0.8;
    CVector v(2), w(2);
    v << a, b;
    w << -b, a;
    DensityMatrix rho = make_density(v * v.adjoint());

    CVector e0(2), e1(2);
    e0 << 1.0, 0.0;
    e1 << 0.0, 1.0;
    PowerGraph graph = build_commutation_graph({
        {"P0", vector_to_projector(UnitVector(e0))},
        {"P1", vector_to_projector(UnitVector(e1))},
        {"Pv", vector_to_projector(UnitVector(v))},
        {"Pw", vector_to_projector(UnitVector(w))},
    });

    std::cout << "potentia table of the state (a, b) = (0.6, 0.8):\n";
    PSA psa = evaluate_psa(rho, graph);
    for (const auto& [id, p] : psa.table) std::cout << "  " << id << " -> " << p << "\n";

    PurityReport purity = purity_report(rho);
    std::cout << "Tr(rho^2) = " << purity.trace_purity << ", rank " << purity.rank
              << (purity.is_pure ? " (pure)\n" : " (mixed)\n");

    std::cout << "\nmaximal contexts:\n";
    for (const Context& c : maximal_contexts(graph)) {
        std::cout << " ";
        for (const std::string& id : c.ids) std::cout << " " << id;
        std::cout << "\n";
    }

    RankOneContext computational = RankOneContext::from_vectors(
        {{"P0", UnitVector(e0)}, {"P1", UnitVector(e1)}});
    RankOneContext own = RankOneContext::from_vectors(
        {{"Pv", UnitVector(v)}, {"Pw", UnitVector(w)}});
    QuantumPerspective qp = quantum_perspective(rho, computational);
    QuantumPerspective moved = change_perspective(qp, own);
    std::cout << "\ncoefficients in the state's own context: ["
              << (*moved.coefficients)[0] << ", " << (*moved.coefficients)[1] << "]\n";

    SampleRun run = sample_context(rho, computational, 100000, 42);
    std::cout << "\n100000 shots, seed 42:\n";
    for (const auto& [id, count] : run.counts)
        std::cout << "  " << id << ": " << count << "\n";

    ContextPoset poset({{"diag", abelian_context_from({vector_to_projector(UnitVector(e0))})}});
    Projector p0 = vector_to_projector(UnitVector(e0));
    BornRecovery recovery = born_recovery(rho, p0, poset);
    std::cout << "\nmin over contexts of the daseinisation measure: " << recovery.minimum
              << " at '" << recovery.attained_at << "' (Born value "
              << (rho.matrix() * p0.matrix()).trace().real() << ")\n";

    std::cout << "\nDOT of the graph:\n" << export_dot(graph, &psa);
    return 0;
}
