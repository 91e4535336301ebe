#include "unifl/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "unifl/errors.hpp"
#include "unifl/radius.hpp"

namespace unifl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cost of opening exactly the facilities in mask, with uncovered vertices
// force-opened at unit cost. Returns the effective facility list.
double subset_cost(const UniflInstance& inst, std::uint32_t mask, std::vector<int>* facilities) {
    double cost = static_cast<double>(std::popcount(mask));
    if (facilities) {
        facilities->clear();
        for (int v = 0; v < inst.n; ++v)
            if (mask >> v & 1u) facilities->push_back(v);
    }
    for (int v = 0; v < inst.n; ++v) {
        if (mask >> v & 1u) continue;
        double best = kInf;
        for (const auto& nb : inst.adj[v])
            if (mask >> nb.id & 1u) {
                best = nb.dist;
                break;
            }
        if (best == kInf) {
            cost += 1.0;  // forced opening
            if (facilities) facilities->push_back(v);
        } else {
            cost += best;
        }
    }
    if (facilities) std::sort(facilities->begin(), facilities->end());
    return cost;
}

}  // namespace

ExactResult exact_opt(const UniflInstance& inst, int limit) {
    if (inst.n > limit) throw TooLarge(inst.n);
    ExactResult result;
    result.opt_value = kInf;
    std::uint32_t best_mask = 0;
    const std::uint32_t end = 1u << inst.n;
    for (std::uint32_t mask = 1; mask < end; ++mask) {
        if (static_cast<double>(std::popcount(mask)) >= result.opt_value) continue;
        ++result.explored;
        double cost = subset_cost(inst, mask, nullptr);
        if (cost < result.opt_value) {
            result.opt_value = cost;
            best_mask = mask;
        } else if (cost == result.opt_value) {
            // Lexicographically smallest facility list wins.
            std::vector<int> cur, best;
            subset_cost(inst, mask, &cur);
            subset_cost(inst, best_mask, &best);
            if (cur < best) best_mask = mask;
        }
    }
    subset_cost(inst, best_mask, &result.opt_facilities);
    // Distinct masks can induce the same effective set via forced openings;
    // recompute the value from the chosen mask for exactness.
    result.opt_value = subset_cost(inst, best_mask, nullptr);
    return result;
}

double bisect_radius(const UniflInstance& inst, int x, double tol) {
    if (x < 0 || x >= inst.n) throw VertexOutOfRange(x);
    if (tol <= 0.0) throw InvariantViolation("tolerance must be positive");
    auto phi = [&](double r) {
        double s = 0.0;
        for (const auto& nb : inst.adj[x])
            if (nb.dist <= r) s += r - nb.dist;
        return s;
    };
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (phi(mid) < 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

void export_ilp(const UniflInstance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    char buf[64];

    out << "Minimize\n obj:";
    int terms = 0;
    for (int i = 0; i < inst.n; ++i) {
        out << (terms ? " +" : " ") << "y" << i;
        if (++terms % 8 == 0) out << "\n     ";
    }
    for (int i = 0; i < inst.n; ++i)
        for (const auto& nb : inst.adj[i]) {
            if (nb.dist == 0.0) continue;  // zero coefficient, keep the file tidy
            std::snprintf(buf, sizeof buf, "%.17g", nb.dist);
            out << " + " << buf << " e" << i << "_" << nb.id;
            if (++terms % 8 == 0) out << "\n     ";
        }
    out << "\nSubject To\n";
    int cid = 0;
    for (int i = 0; i < inst.n; ++i)
        for (const auto& nb : inst.adj[i])
            out << " link" << cid++ << ": e" << i << "_" << nb.id << " - y" << nb.id << " <= 0\n";
    for (int i = 0; i < inst.n; ++i) {
        out << " assign" << i << ":";
        bool first = true;
        for (const auto& nb : inst.adj[i]) {
            out << (first ? " " : " + ") << "e" << i << "_" << nb.id;
            first = false;
        }
        out << " = 1\n";
    }
    out << "Binary\n";
    for (int i = 0; i < inst.n; ++i) out << " y" << i << "\n";
    for (int i = 0; i < inst.n; ++i)
        for (const auto& nb : inst.adj[i]) out << " e" << i << "_" << nb.id << "\n";
    out << "End\n";
    if (!out) throw IoError("write failure on " + path);
}

Solution greedy_upper_bound(const UniflInstance& inst) {
    std::vector<char> open(inst.n, 0);
    // nearest[v]: best open-facility distance, or +inf (forced, pays 1).
    std::vector<double> nearest(inst.n, kInf);
    auto vertex_cost = [&](int v) { return nearest[v] == kInf ? 1.0 : nearest[v]; };

    double current = static_cast<double>(inst.n);  // all forced
    int opened = 0;
    while (true) {
        int best_v = -1;
        double best_gain = 0.0;
        for (int f = 0; f < inst.n; ++f) {
            if (open[f]) continue;
            double gain = -1.0;  // opening cost
            for (const auto& nb : inst.adj[f]) {
                double now = vertex_cost(nb.id);
                if (open[nb.id]) now = 0.0;  // facility serves itself already
                double then = std::min(now, nb.dist);
                gain += now - then;
            }
            if (gain > best_gain + 1e-15 || (best_v < 0 && gain > 1e-15)) {
                best_gain = gain;
                best_v = f;
            }
        }
        if (best_v < 0) break;
        open[best_v] = 1;
        ++opened;
        for (const auto& nb : inst.adj[best_v])
            nearest[nb.id] = std::min(nearest[nb.id], nb.dist);
        current -= best_gain;
    }
    (void)current;
    (void)opened;

    Solution sol;
    sol.assignment.assign(inst.n, -1);
    for (int v = 0; v < inst.n; ++v) {
        if (open[v]) {
            sol.assignment[v] = v;
            continue;
        }
        int best = -1;
        for (const auto& nb : inst.adj[v])
            if (open[nb.id]) {
                best = nb.id;
                break;
            }
        if (best < 0) {
            sol.assignment[v] = v;  // forced opening
            ++sol.forced_opens;
        } else {
            sol.assignment[v] = best;
        }
    }
    for (int v = 0; v < inst.n; ++v)
        if (open[v] || sol.assignment[v] == v) sol.facilities.push_back(v);
    std::vector<char> open_all(inst.n, 0);
    for (int f : sol.facilities) open_all[f] = 1;
    sol.open_cost = static_cast<double>(sol.facilities.size());
    sol.connection_cost = 0.0;
    for (int v = 0; v < inst.n; ++v) {
        if (open_all[v]) continue;
        for (const auto& nb : inst.adj[v])
            if (nb.id == sol.assignment[v]) {
                sol.connection_cost += nb.dist;
                break;
            }
    }
    sol.total = sol.open_cost + sol.connection_cost;
    return sol;
}

}  // namespace unifl
