#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "unifl/errors.hpp"

namespace unifl {

struct Neighbor {
    int id;
    double dist;
    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// A UniFL instance encoded as an edge-weighted graph. Every adjacency list
// is sorted ascending by (distance, neighbor id) and contains exactly one
// self-loop at distance 0; all stored distances lie in [0, 1].
struct UniflInstance {
    int n = 0;
    std::vector<std::vector<Neighbor>> adj;
    std::vector<std::vector<double>> coords;  // empty when not generated geometrically
    int dim = 0;
    std::string id;

    bool has_coords() const { return !coords.empty(); }

    // Mean number of non-self neighbors.
    double mean_degree() const;

    friend bool operator==(const UniflInstance& a, const UniflInstance& b) {
        return a.n == b.n && a.adj == b.adj && a.coords == b.coords && a.dim == b.dim;
    }
};

struct GeneratorConfig {
    int n = 1;
    int dim = 2;
    int components = 1;
    double component_std = 1.0;
    double domain_scale = 1.0;
    std::uint64_t seed = 0;
};

struct Edge {
    int u;
    int v;
    double w;
};

UniflInstance build_instance(int n, const std::vector<Edge>& edges);

// Points from a Gaussian mixture with uniformly placed centroids; edges for
// pairs within unit Euclidean distance. Deterministic per cfg.seed.
UniflInstance generate_geometric(const GeneratorConfig& cfg);

UniflInstance load_instance(const std::string& path);
void save_instance(const UniflInstance& instance, const std::string& path);

// Throws InvariantViolation if any structural invariant fails.
void check_invariants(const UniflInstance& instance);

}  // namespace unifl
