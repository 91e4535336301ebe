#include "unifl/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "unifl/errors.hpp"
#include "unifl/rng.hpp"

namespace unifl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_probs(const UniflInstance& inst, const OpeningProbabilities& probs) {
    if (static_cast<int>(probs.p.size()) != inst.n)
        throw InvariantViolation("probability vector size mismatch");
    for (int v = 0; v < inst.n; ++v)
        if (!(probs.p[v] >= 0.0 && probs.p[v] <= 1.0)) throw ProbOutOfRange(v);
}

void finalize_costs(Solution& sol, const UniflInstance& inst) {
    sol.open_cost = static_cast<double>(sol.facilities.size());
    sol.connection_cost = 0.0;
    std::vector<char> open(inst.n, 0);
    for (int f : sol.facilities) open[f] = 1;
    for (int v = 0; v < inst.n; ++v) {
        if (open[v]) continue;
        for (const auto& nb : inst.adj[v])
            if (nb.id == sol.assignment[v]) {
                sol.connection_cost += nb.dist;
                break;
            }
    }
    sol.total = sol.open_cost + sol.connection_cost;
}

}  // namespace

OpeningProbabilities probs_simple(const UniflInstance& inst, const RadiusTable& radii, double c) {
    if (c <= 0.0) throw NonPositiveC();
    OpeningProbabilities probs;
    probs.source = ProbSource::FixedC;
    probs.p.resize(inst.n);
    const double scale = c * std::log(static_cast<double>(inst.n));
    for (int v = 0; v < inst.n; ++v) probs.p[v] = std::min(1.0, scale * radii.r[v]);
    return probs;
}

Solution sample_simple(const UniflInstance& inst, const OpeningProbabilities& probs,
                       std::uint64_t seed) {
    check_probs(inst, probs);
    std::vector<char> open1(inst.n, 0);
    for (int v = 0; v < inst.n; ++v)
        if (uniform01(derive(seed, static_cast<std::uint64_t>(v))) < probs.p[v]) open1[v] = 1;

    Solution sol;
    sol.assignment.assign(inst.n, -1);
    // Clients connect to F1 only; uncovered vertices open themselves (F2).
    for (int v = 0; v < inst.n; ++v) {
        int best = -1;
        for (const auto& nb : inst.adj[v])  // (dist, id) sorted: first open wins
            if (open1[nb.id]) {
                best = nb.id;
                break;
            }
        if (best >= 0) {
            sol.assignment[v] = best;
        } else {
            sol.assignment[v] = v;
            ++sol.forced_opens;
        }
    }
    for (int v = 0; v < inst.n; ++v)
        if (open1[v] || sol.assignment[v] == v) sol.facilities.push_back(v);
    // A vertex opened in F1 serves itself.
    for (int f : sol.facilities)
        if (open1[f]) sol.assignment[f] = f;
    finalize_costs(sol, inst);
    return sol;
}

OpeningProbabilities probs_recursive(const UniflInstance& inst, const RadiusTable& radii,
                                     const std::vector<int>& open_set, double c) {
    if (c <= 0.0) throw NonPositiveC();
    std::vector<char> open(inst.n, 0);
    for (int f : open_set) open[f] = 1;
    OpeningProbabilities probs;
    probs.source = ProbSource::FixedC;
    probs.p.resize(inst.n);
    for (int v = 0; v < inst.n; ++v) {
        double d_to_f = kInf;
        for (const auto& nb : inst.adj[v])
            if (open[nb.id]) {
                d_to_f = nb.dist;
                break;
            }
        double p = std::min(1.0, c * radii.r[v]);
        if (d_to_f < kInf) p = std::min(p, c * d_to_f);
        probs.p[v] = p;
    }
    return probs;
}

namespace {

// Radii over the subgraph induced by the active set.
RadiusTable radii_on_subset(const UniflInstance& inst, const std::vector<char>& active) {
    RadiusTable table;
    table.r.assign(inst.n, 0.0);
    std::vector<double> dists;
    for (int v = 0; v < inst.n; ++v) {
        if (!active[v]) continue;
        dists.clear();
        for (const auto& nb : inst.adj[v])
            if (active[nb.id]) dists.push_back(nb.dist);
        table.r[v] = radius_from_sorted_dists(dists);
    }
    return table;
}

}  // namespace

Solution run_recursion(const UniflInstance& inst, const RadiusTable& radii, double c,
                       std::uint64_t seed, const RecursionOptions& opts) {
    if (c <= 0.0) throw NonPositiveC();
    if (opts.max_rounds < 1) throw InvariantViolation("max_rounds must be at least 1");

    Solution sol;
    sol.assignment.assign(inst.n, -1);
    std::vector<char> active(inst.n, 1);
    std::vector<char> open(inst.n, 0);
    int remaining = inst.n;
    int round = 0;

    while (remaining > 0 && round < opts.max_rounds) {
        ++round;
        const RadiusTable& round_radii =
            opts.recompute_radii ? radii_on_subset(inst, active) : radii;
        std::uint64_t round_seed = derive(seed, static_cast<std::uint64_t>(round));

        // Opening probabilities min{1, c*d(x,F), c*r_x} over the active set.
        for (int v = 0; v < inst.n; ++v) {
            if (!active[v]) continue;
            double d_to_f = kInf;
            for (const auto& nb : inst.adj[v])
                if (open[nb.id]) {
                    d_to_f = nb.dist;
                    break;
                }
            double p = std::min(1.0, c * round_radii.r[v]);
            if (d_to_f < kInf) p = std::min(p, c * d_to_f);
            if (uniform01(derive(round_seed, static_cast<std::uint64_t>(v))) < p) open[v] = 1;
        }

        // Assign active vertices with an open facility within 6*r_x.
        for (int v = 0; v < inst.n; ++v) {
            if (!active[v]) continue;
            int best = -1;
            double best_d = kInf;
            for (const auto& nb : inst.adj[v])
                if (open[nb.id]) {
                    best = nb.id;
                    best_d = nb.dist;
                    break;
                }
            if (best >= 0 && best_d <= 6.0 * round_radii.r[v]) {
                sol.assignment[v] = best;
                active[v] = 0;
                --remaining;
            }
        }
    }

    // Round cap reached: force-open everything still unassigned.
    for (int v = 0; v < inst.n; ++v)
        if (active[v]) {
            open[v] = 1;
            sol.assignment[v] = v;
            ++sol.forced_opens;
        }
    for (int v = 0; v < inst.n; ++v)
        if (open[v]) {
            sol.facilities.push_back(v);
            sol.assignment[v] = v;
        }
    sol.rounds = round;
    finalize_costs(sol, inst);
    return sol;
}

CostBreakdown eval_solution(const UniflInstance& inst, const Solution& sol) {
    if (static_cast<int>(sol.assignment.size()) != inst.n)
        throw InvariantViolation("assignment size mismatch");
    std::vector<char> open(inst.n, 0);
    for (int f : sol.facilities) {
        if (f < 0 || f >= inst.n) throw VertexOutOfRange(f);
        open[f] = 1;
    }
    double connection = 0.0;
    for (int v = 0; v < inst.n; ++v) {
        int f = sol.assignment[v];
        if (open[v]) {
            if (f != v) throw InfeasibleSolution(v);
            continue;
        }
        if (f < 0 || f >= inst.n || !open[f]) throw InfeasibleSolution(v);
        bool found = false;
        for (const auto& nb : inst.adj[v])
            if (nb.id == f) {
                connection += nb.dist;
                found = true;
                break;
            }
        if (!found) throw InfeasibleSolution(v);
    }
    CostBreakdown costs;
    costs.open_cost = static_cast<double>(sol.facilities.size());
    costs.connection_cost = connection;
    costs.total = costs.open_cost + costs.connection_cost;
    return costs;
}

MonteCarloResult monte_carlo_expected_cost(const UniflInstance& inst,
                                           const OpeningProbabilities& probs, int samples,
                                           std::uint64_t seed) {
    if (samples < 1) throw InvariantViolation("samples must be at least 1");
    double sum = 0.0, sumsq = 0.0;
    for (int s = 0; s < samples; ++s) {
        Solution sol = sample_simple(inst, probs, derive(seed, static_cast<std::uint64_t>(s)));
        sum += sol.total;
        sumsq += sol.total * sol.total;
    }
    double mean = sum / samples;
    double se = 0.0;
    if (samples > 1) {
        double var = (sumsq - samples * mean * mean) / (samples - 1);
        se = std::sqrt(std::max(0.0, var) / samples);
    }
    return {mean, se};
}

std::vector<double> log_spaced_grid(double lo, double hi, int count) {
    std::vector<double> grid;
    if (count == 1) {
        grid.push_back(lo);
        return grid;
    }
    for (int i = 0; i < count; ++i)
        grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    return grid;
}

double grid_search_c(const std::vector<UniflInstance>& instances, Algo algo,
                     const std::vector<double>& grid, int samples, std::uint64_t seed) {
    if (instances.empty() || grid.empty())
        throw InvariantViolation("grid search needs instances and a nonempty grid");
    double best_c = 0.0;
    double best_mean = kInf;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        double c = grid[gi];
        double total = 0.0;
        for (std::size_t ii = 0; ii < instances.size(); ++ii) {
            const auto& inst = instances[ii];
            RadiusTable radii = compute_radii(inst);
            std::uint64_t inst_seed = derive(seed, static_cast<std::uint64_t>(ii));
            if (algo == Algo::Simple) {
                OpeningProbabilities probs = probs_simple(inst, radii, c);
                total += monte_carlo_expected_cost(inst, probs, samples, inst_seed).mean;
            } else {
                double acc = 0.0;
                for (int s = 0; s < samples; ++s)
                    acc += run_recursion(inst, radii, c,
                                         derive(inst_seed, static_cast<std::uint64_t>(s)))
                               .total;
                total += acc / samples;
            }
        }
        double mean = total / instances.size();
        if (mean < best_mean) {  // exact ties keep the smaller c
            best_mean = mean;
            best_c = c;
        }
    }
    return best_c;
}

}  // namespace unifl
