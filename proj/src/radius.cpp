#include "unifl/radius.hpp"

#include <limits>
#include <numeric>

namespace unifl {

double radius_from_sorted_dists(const std::vector<double>& dists) {
    // With d_1 = 0 <= d_2 <= ... the prefix-k candidate solves k*r - sum = 1.
    // The valid candidate is the one bracketed by d_k and d_{k+1}.
    double prefix = 0.0;
    const int m = static_cast<int>(dists.size());
    for (int k = 1; k <= m; ++k) {
        prefix += dists[k - 1];
        double r = (1.0 + prefix) / k;
        double next = (k < m) ? dists[k] : std::numeric_limits<double>::infinity();
        if (r >= dists[k - 1] && r <= next) return r;
    }
    // Unreachable on valid instances: the self-loop makes k=1 give r=1 <= d_2
    // whenever no larger prefix qualifies.
    return 1.0;
}

RadiusTable compute_radii(const UniflInstance& inst) {
    RadiusTable table;
    table.r.resize(inst.n);
    std::vector<double> dists;
    for (int v = 0; v < inst.n; ++v) {
        dists.clear();
        for (const auto& nb : inst.adj[v]) dists.push_back(nb.dist);
        table.r[v] = radius_from_sorted_dists(dists);
    }
    return table;
}

double radii_sum_lower_bound(const RadiusTable& table) {
    return std::accumulate(table.r.begin(), table.r.end(), 0.0);
}

}  // namespace unifl
