#pragma once

#include <cstdint>
#include <vector>

#include "unifl/instance.hpp"
#include "unifl/radius.hpp"

namespace unifl {

enum class ProbSource { FixedC, Mpnn, Manual };

struct OpeningProbabilities {
    std::vector<double> p;  // each in [0,1]
    ProbSource source = ProbSource::Manual;
};

struct Solution {
    std::vector<int> facilities;  // sorted vertex ids
    std::vector<int> assignment;  // per-vertex facility id; facilities map to themselves
    double open_cost = 0.0;
    double connection_cost = 0.0;
    double total = 0.0;
    int rounds = 0;        // recursion iterations used (0 for non-recursive)
    int forced_opens = 0;  // fallback openings
};

struct CostBreakdown {
    double open_cost;
    double connection_cost;
    double total;
};

// p_x = min(1, c * ln(n) * r_x).
OpeningProbabilities probs_simple(const UniflInstance& instance, const RadiusTable& radii,
                                  double c);

// One run of the simple randomized algorithm: Bernoulli openings, forced
// openings for uncovered vertices, nearest-open-facility assignment.
Solution sample_simple(const UniflInstance& instance, const OpeningProbabilities& probs,
                       std::uint64_t seed);

// p_x = min{1, c*d(x,F), c*r_x}; the d(x,F) term is dropped when open_set is
// empty or x has no open facility within graph distance.
OpeningProbabilities probs_recursive(const UniflInstance& instance, const RadiusTable& radii,
                                     const std::vector<int>& open_set, double c);

struct RecursionOptions {
    int max_rounds = 100;
    bool recompute_radii = false;  // per-round radii on the shrinking active set
};

Solution run_recursion(const UniflInstance& instance, const RadiusTable& radii, double c,
                       std::uint64_t seed, const RecursionOptions& opts = {});

// Recomputes costs from scratch; throws InfeasibleSolution on a bad assignment.
CostBreakdown eval_solution(const UniflInstance& instance, const Solution& solution);

struct MonteCarloResult {
    double mean;
    double std_error;
};

MonteCarloResult monte_carlo_expected_cost(const UniflInstance& instance,
                                           const OpeningProbabilities& probs, int samples,
                                           std::uint64_t seed);

enum class Algo { Simple, Recursive };

std::vector<double> log_spaced_grid(double lo, double hi, int count);

double grid_search_c(const std::vector<UniflInstance>& instances, Algo algo,
                     const std::vector<double>& grid, int samples, std::uint64_t seed);

}  // namespace unifl
