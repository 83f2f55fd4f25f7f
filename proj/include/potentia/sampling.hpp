#ifndef POTENTIA_SAMPLING_HPP
#define POTENTIA_SAMPLING_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "potentia/psa.hpp"

namespace potentia {

/// One seeded measurement run of a context: i.i.d. categorical draws with
/// outcome probabilities Tr(rho P_i). Identical (seed, inputs) give
/// identical counts on every platform: the generator is std::mt19937_64
/// (fully specified by the standard) and uniforms are built from the top
/// 53 bits of each raw draw.
struct SampleRun {
    std::vector<std::string> member_ids;  // context members, sorted
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    std::map<std::string, std::uint64_t> counts;
};

inline SampleRun sample_context(const DensityMatrix& rho, const RankOneContext& ctx,
                                std::uint64_t shots, std::uint64_t seed,
                                const Tolerances& tol = {}) {
    if (shots < 1) throw InvalidShots("shots must be >= 1");
    if (rho.dim() != ctx.dim())
        throw DimensionMismatch("state and context dimensions differ");

    // inverse CDF over the probability vector in node-id order
    std::vector<std::size_t> order(ctx.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ctx.id(a) < ctx.id(b);
    });

    SampleRun run;
    run.shots = shots;
    run.seed = seed;
    std::vector<double> cdf;
    double acc = 0.0;
    for (std::size_t i : order) {
        const CVector& w = ctx.vector(i).coeffs();
        Complex val = w.dot(rho.matrix() * w);
        if (std::abs(val.imag()) > tol.born)
            throw ImaginaryTrace("outcome probability for '" + ctx.id(i) +
                                 "' has imaginary part " + std::to_string(val.imag()));
        acc += detail::clamp_potentia(val.real(), ctx.id(i), tol);
        cdf.push_back(acc);
        run.member_ids.push_back(ctx.id(i));
        run.counts[ctx.id(i)] = 0;
    }
    if (std::abs(acc - 1.0) > tol.born)
        throw NotAResolution("outcome probabilities sum to " + std::to_string(acc));
    cdf.back() = 1.0;  // absorb rounding so every draw lands

    std::mt19937_64 rng(seed);
    constexpr double two_pow_53 = 9007199254740992.0;
    for (std::uint64_t t = 0; t < shots; ++t) {
        double u = static_cast<double>(rng() >> 11) / two_pow_53;  // [0, 1)
        std::size_t bucket =
            static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) -
                                     cdf.begin());
        if (bucket >= run.member_ids.size()) bucket = run.member_ids.size() - 1;
        ++run.counts[run.member_ids[bucket]];
    }
    return run;
}

/// Empirical potentia: relative frequencies of a run. Carries the shot
/// count for error bars; runs below `min_shots` are flagged as
/// statistically meaningless rather than rejected.
inline PSA estimate_psa(const SampleRun& run, std::uint64_t min_shots = 100) {
    if (run.shots < 1) throw InvalidShots("run has no shots");
    PSA psa;
    psa.shots = run.shots;
    psa.low_statistics = run.shots < min_shots;
    for (const auto& [id, count] : run.counts)
        psa.table[id] = static_cast<double>(count) / static_cast<double>(run.shots);
    return psa;
}

}  // namespace potentia

#endif
