#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "unifl/instance.hpp"
#include "unifl/rng.hpp"
#include "unifl/sampling.hpp"

namespace testutil {

// Geometric instance in the paper's density regime (mean degree around 7-11).
inline unifl::UniflInstance random_instance(int n, std::uint64_t seed) {
    unifl::GeneratorConfig cfg;
    cfg.n = n;
    cfg.dim = 2;
    cfg.components = std::max(1, n / 10);
    cfg.component_std = 0.3;
    cfg.domain_scale = 0.63 * std::sqrt(static_cast<double>(n));
    cfg.seed = seed;
    return unifl::generate_geometric(cfg);
}

inline unifl::OpeningProbabilities random_probs(int n, std::uint64_t seed, double lo = 0.05,
                                                double hi = 0.95) {
    unifl::OpeningProbabilities probs;
    probs.p.resize(n);
    for (int i = 0; i < n; ++i)
        probs.p[i] = lo + (hi - lo) * unifl::uniform01(unifl::derive(seed, i));
    return probs;
}

// Clique with all pairwise distances eps.
inline unifl::UniflInstance eps_clique(int k, double eps) {
    std::vector<unifl::Edge> edges;
    for (int u = 0; u < k; ++u)
        for (int v = u + 1; v < k; ++v) edges.push_back({u, v, eps});
    return unifl::build_instance(k, edges);
}

inline unifl::UniflInstance pair_at(double d) {
    return unifl::build_instance(2, {{0, 1, d}});
}

}  // namespace testutil
