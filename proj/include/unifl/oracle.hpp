#pragma once

#include <string>
#include <vector>

#include "unifl/instance.hpp"
#include "unifl/sampling.hpp"

namespace unifl {

inline constexpr int kExhaustiveLimit = 18;

struct ExactResult {
    double opt_value = 0.0;
    std::vector<int> opt_facilities;  // lexicographically smallest optimal set
    std::uint64_t explored = 0;
};

// Enumerates all nonempty facility sets (popcount pruning against the best
// bound); vertices with no open neighbor are force-opened.
ExactResult exact_opt(const UniflInstance& instance, int limit = kExhaustiveLimit);

// Independent monotone bisection on phi_x(r) - 1 over (0, 1].
double bisect_radius(const UniflInstance& instance, int x, double tol);

// Writes the integer program in CPLEX-LP text format: binary y_i and e_ij
// per stored directed edge (self-loops included), e_ij <= y_j, sum_j e_ij = 1.
void export_ilp(const UniflInstance& instance, const std::string& path);

// Iteratively opens the facility with the best marginal cost decrease.
Solution greedy_upper_bound(const UniflInstance& instance);

}  // namespace unifl
