#pragma once

#include <vector>

#include "unifl/instance.hpp"

namespace unifl {

// Per-vertex radii r_x in (0, 1]: the unique r with
//   sum_{y : d(x,y) <= r} (r - d(x,y)) = 1,
// the sum running over graph neighbors including the self-loop.
struct RadiusTable {
    std::vector<double> r;
};

RadiusTable compute_radii(const UniflInstance& instance);

// Radius of a single vertex from its sorted neighbor distances.
double radius_from_sorted_dists(const std::vector<double>& dists);

// Sum of all radii; a Theta(Opt) quantity used for sanity checks.
double radii_sum_lower_bound(const RadiusTable& table);

}  // namespace unifl
