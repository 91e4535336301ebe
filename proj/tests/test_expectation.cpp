#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "unifl/expectation.hpp"

using namespace unifl;

namespace {

// Central finite differences on total expected cost, with one-sided fallback
// at the probability box boundary.
std::vector<double> fd_grad(const UniflInstance& inst, OpeningProbabilities p,
                            ConnectionMetric metric, double h = 1e-6) {
    std::vector<double> g(inst.n);
    for (int v = 0; v < inst.n; ++v) {
        double orig = p.p[v];
        double hi = std::min(1.0, orig + h), lo = std::max(0.0, orig - h);
        p.p[v] = hi;
        double fhi = expected_cost(inst, p, metric).total;
        p.p[v] = lo;
        double flo = expected_cost(inst, p, metric).total;
        p.p[v] = orig;
        g[v] = (fhi - flo) / (hi - lo);
    }
    return g;
}

void check_grad(const UniflInstance& inst, const OpeningProbabilities& p,
                ConnectionMetric metric, double tol) {
    std::vector<double> analytic = expected_cost_grad(inst, p, metric);
    std::vector<double> numeric = fd_grad(inst, p, metric);
    for (int v = 0; v < inst.n; ++v) {
        double scale = std::max({1.0, std::abs(analytic[v]), std::abs(numeric[v])});
        CHECK(std::abs(analytic[v] - numeric[v]) / scale <= tol);
    }
}

}  // namespace

TEST_CASE("degenerate probabilities") {
    UniflInstance inst = testutil::random_instance(20, 1);
    OpeningProbabilities ones, zeros;
    ones.p.assign(inst.n, 1.0);
    zeros.p.assign(inst.n, 0.0);
    ExpectedCostBreakdown all = expected_cost(inst, ones);
    CHECK(all.open_direct == doctest::Approx(inst.n));
    CHECK(all.open_forced == doctest::Approx(0.0));
    CHECK(all.connection == doctest::Approx(0.0));
    ExpectedCostBreakdown none = expected_cost(inst, zeros);
    CHECK(none.open_direct == doctest::Approx(0.0));
    CHECK(none.open_forced == doctest::Approx(inst.n));
    CHECK(none.connection == doctest::Approx(0.0));
}

TEST_CASE("two-point hand evaluation") {
    UniflInstance pair = testutil::pair_at(0.5);
    OpeningProbabilities p;
    p.p = {1.0, 0.0};
    ExpectedCostBreakdown b = expected_cost(pair, p);
    CHECK(b.open_direct == doctest::Approx(1.0));
    CHECK(b.open_forced == doctest::Approx(0.0));
    CHECK(b.connection == doctest::Approx(0.5));
    CHECK(b.total == doctest::Approx(1.5));
    // Squared metric: 0.5^2.
    CHECK(expected_cost(pair, p, ConnectionMetric::Squared).connection ==
          doctest::Approx(0.25));
}

TEST_CASE("breakdown components sum to total and stay bounded") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        UniflInstance inst = testutil::random_instance(40, seed);
        OpeningProbabilities p = testutil::random_probs(inst.n, seed, 0.0, 1.0);
        ExpectedCostBreakdown b = expected_cost(inst, p);
        CHECK(b.open_direct >= 0.0);
        CHECK(b.open_forced >= 0.0);
        CHECK(b.connection >= 0.0);
        CHECK(b.total == doctest::Approx(b.open_direct + b.open_forced + b.connection));
        CHECK(b.total > 0.0);
        CHECK(b.total <= b.open_direct + b.open_forced + inst.n);
    }
}

TEST_CASE("probability validation") {
    UniflInstance pair = testutil::pair_at(0.5);
    OpeningProbabilities bad;
    bad.p = {1.2, 0.0};
    CHECK_THROWS_AS(expected_cost(pair, bad), ProbOutOfRange);
    bad.p = {-0.1, 0.0};
    CHECK_THROWS_AS(expected_cost_grad(pair, bad), ProbOutOfRange);
}

TEST_CASE("single vertex has zero gradient") {
    UniflInstance one = build_instance(1, {});
    OpeningProbabilities p;
    p.p = {0.37};
    CHECK(expected_cost(one, p).total == doctest::Approx(1.0));
    CHECK(expected_cost_grad(one, p)[0] == doctest::Approx(0.0));
}

TEST_CASE("gradient matches finite differences on interior probabilities") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        UniflInstance inst = testutil::random_instance(30, seed);
        OpeningProbabilities p = testutil::random_probs(inst.n, seed);
        check_grad(inst, p, ConnectionMetric::Linear, 1e-4);
        check_grad(inst, p, ConnectionMetric::Squared, 1e-4);
    }
}

TEST_CASE("gradient is finite and correct at the p=1 boundary") {
    UniflInstance inst = testutil::random_instance(25, 5);
    OpeningProbabilities p = testutil::random_probs(inst.n, 5);
    p.p[3] = 1.0;
    p.p[10] = 1.0;
    std::vector<double> g = expected_cost_grad(inst, p);
    for (double gv : g) CHECK(std::isfinite(gv));
    check_grad(inst, p, ConnectionMetric::Linear, 1e-4);
}

TEST_CASE("uniform p on a vertex-transitive clique gives equal gradients") {
    UniflInstance clique = testutil::eps_clique(6, 0.2);
    OpeningProbabilities p;
    p.p.assign(6, 0.4);
    std::vector<double> g = expected_cost_grad(clique, p);
    for (int v = 1; v < 6; ++v) CHECK(g[v] == doctest::Approx(g[0]).epsilon(1e-12));
}

TEST_CASE("constant-p clique closed form") {
    CHECK(expected_cost_of_constant_p(10, 1.0) == doctest::Approx(10.0));
    CHECK(expected_cost_of_constant_p(10, 0.0) == doctest::Approx(10.0));
    CHECK(expected_cost_of_constant_p(10, 0.2) ==
          doctest::Approx(2.0 + 10.0 * std::pow(0.8, 10)));
    // Cross-check against Eq. 5 on a near-zero clique.
    UniflInstance clique = testutil::eps_clique(10, 1e-9);
    OpeningProbabilities p;
    p.p.assign(10, 0.2);
    CHECK(expected_cost(clique, p).total ==
          doctest::Approx(expected_cost_of_constant_p(10, 0.2)).epsilon(1e-6));
}
