#include "unifl/expectation.hpp"

#include <cmath>

#include "unifl/errors.hpp"

namespace unifl {

namespace {

void check_probs(const UniflInstance& inst, const OpeningProbabilities& probs) {
    if (static_cast<int>(probs.p.size()) != inst.n)
        throw InvariantViolation("probability vector size mismatch");
    for (int v = 0; v < inst.n; ++v)
        if (!(probs.p[v] >= 0.0 && probs.p[v] <= 1.0)) throw ProbOutOfRange(v);
}

double metric_value(double dist, ConnectionMetric metric) {
    return metric == ConnectionMetric::Linear ? dist : dist * dist;
}

// Running product of (1-p) factors that tracks exact zeros separately, so
// leave-one-out values never require dividing by zero.
struct ZeroAwareProduct {
    double nonzero = 1.0;
    int zeros = 0;

    void multiply(double factor) {
        if (factor == 0.0)
            ++zeros;
        else
            nonzero *= factor;
    }
    double value() const { return zeros > 0 ? 0.0 : nonzero; }
};

}  // namespace

ExpectedCostBreakdown expected_cost(const UniflInstance& inst, const OpeningProbabilities& probs,
                                    ConnectionMetric metric) {
    check_probs(inst, probs);
    const auto& p = probs.p;

    double open_direct = 0.0;
    double open_forced = 0.0;
    double connection = 0.0;
    for (int f = 0; f < inst.n; ++f) {
        open_direct += p[f];
        ZeroAwareProduct prod;  // over N(f) incl. f itself (self-loop)
        for (const auto& nb : inst.adj[f]) prod.multiply(1.0 - p[nb.id]);
        open_forced += prod.value();
    }
    for (int x = 0; x < inst.n; ++x) {
        ZeroAwareProduct prefix;  // all strictly earlier in (dist, id) order stay closed
        for (const auto& nb : inst.adj[x]) {
            connection += metric_value(nb.dist, metric) * p[nb.id] * prefix.value();
            prefix.multiply(1.0 - p[nb.id]);
        }
    }
    return {open_direct, open_forced, connection, open_direct + open_forced + connection};
}

std::vector<double> expected_cost_grad(const UniflInstance& inst,
                                       const OpeningProbabilities& probs,
                                       ConnectionMetric metric) {
    check_probs(inst, probs);
    const auto& p = probs.p;
    std::vector<double> grad(inst.n, 0.0);

    // Direct opening term.
    for (int v = 0; v < inst.n; ++v) grad[v] += 1.0;

    // Forced-opening products: d/dp_v prod(1-p) = -prod_{x != v}(1-p_x),
    // via prefix/suffix products of the neighbor list.
    std::vector<double> prefix, suffix;
    for (int f = 0; f < inst.n; ++f) {
        const auto& list = inst.adj[f];
        const int m = static_cast<int>(list.size());
        prefix.assign(m + 1, 1.0);
        suffix.assign(m + 1, 1.0);
        for (int i = 0; i < m; ++i) prefix[i + 1] = prefix[i] * (1.0 - p[list[i].id]);
        for (int i = m - 1; i >= 0; --i) suffix[i] = suffix[i + 1] * (1.0 - p[list[i].id]);
        for (int i = 0; i < m; ++i) grad[list[i].id] -= prefix[i] * suffix[i + 1];
    }

    // Connection term: T_l = m(d_l) * p_{f_l} * prod_{i<l}(1-p_{f_i}).
    // dT_l/dp_{f_l} = m(d_l) * prod_{i<l}, dT_l/dp_{f_j} = -T_l with the
    // (1-p_{f_j}) factor left out, for j < l.
    for (int x = 0; x < inst.n; ++x) {
        const auto& list = inst.adj[x];
        const int m = static_cast<int>(list.size());
        ZeroAwareProduct pre;
        for (int j = 0; j < m; ++j) {
            grad[list[j].id] += metric_value(list[j].dist, metric) * pre.value();
            // Walk l > j with the j-th factor excluded.
            ZeroAwareProduct loo = pre;
            for (int l = j + 1; l < m; ++l) {
                grad[list[j].id] -=
                    metric_value(list[l].dist, metric) * p[list[l].id] * loo.value();
                loo.multiply(1.0 - p[list[l].id]);
            }
            pre.multiply(1.0 - p[list[j].id]);
        }
    }
    return grad;
}

double expected_cost_of_constant_p(int n, double q) {
    if (n < 1) throw InvariantViolation("n must be at least 1");
    if (!(q >= 0.0 && q <= 1.0)) throw ProbOutOfRange(0);
    return q * n + std::pow(1.0 - q, n) * n;
}

}  // namespace unifl
