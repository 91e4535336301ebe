#pragma once

#include <vector>

#include "unifl/instance.hpp"
#include "unifl/sampling.hpp"

namespace unifl {

enum class ConnectionMetric { Linear, Squared };

// Closed-form expected cost of the probabilistic solution: direct openings,
// forced openings, and the expected connection to the nearest open facility.
struct ExpectedCostBreakdown {
    double open_direct;
    double open_forced;
    double connection;
    double total;
};

ExpectedCostBreakdown expected_cost(const UniflInstance& instance,
                                    const OpeningProbabilities& probs,
                                    ConnectionMetric metric = ConnectionMetric::Linear);

// dE/dp_v for all v, by analytic differentiation of the product terms
// (leave-one-out products with explicit zero handling, no division).
std::vector<double> expected_cost_grad(const UniflInstance& instance,
                                       const OpeningProbabilities& probs,
                                       ConnectionMetric metric = ConnectionMetric::Linear);

// Expected cost of the all-distance-eps->0 clique with a uniform probability:
// q*n + (1-q)^n * n. Test fixture.
double expected_cost_of_constant_p(int n, double q);

}  // namespace unifl
