#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "helpers.hpp"
#include "unifl/instance.hpp"

using namespace unifl;

TEST_CASE("single vertex gets its self-loop") {
    UniflInstance inst = build_instance(1, {});
    CHECK(inst.n == 1);
    REQUIRE(inst.adj.size() == 1);
    REQUIRE(inst.adj[0].size() == 1);
    CHECK(inst.adj[0][0].id == 0);
    CHECK(inst.adj[0][0].dist == 0.0);
}

TEST_CASE("edges are stored symmetrically") {
    UniflInstance inst = testutil::pair_at(0.5);
    REQUIRE(inst.adj[0].size() == 2);
    REQUIRE(inst.adj[1].size() == 2);
    CHECK(inst.adj[0][1].id == 1);
    CHECK(inst.adj[0][1].dist == 0.5);
    CHECK(inst.adj[1][1].id == 0);
    CHECK(inst.adj[1][1].dist == 0.5);
}

TEST_CASE("edges longer than 1 are pruned") {
    UniflInstance inst = build_instance(2, {{0, 1, 1.5}});
    CHECK(inst.adj[0].size() == 1);
    CHECK(inst.adj[1].size() == 1);
}

TEST_CASE("boundary distance 1 is kept") {
    UniflInstance inst = build_instance(2, {{0, 1, 1.0}});
    CHECK(inst.adj[0].size() == 2);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(build_instance(2, {{0, 1, 0.5}, {1, 0, 0.5}}), DuplicateEdge);
    CHECK_THROWS_AS(build_instance(2, {{0, 1, -0.1}}), NegativeDistance);
    CHECK_THROWS_AS(build_instance(2, {{0, 5, 0.3}}), VertexOutOfRange);
}

TEST_CASE("generator is deterministic and satisfies the invariants") {
    GeneratorConfig cfg;
    cfg.n = 60;
    cfg.components = 5;
    cfg.component_std = 0.3;
    cfg.domain_scale = 4.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        cfg.seed = seed;
        UniflInstance a = generate_geometric(cfg);
        UniflInstance b = generate_geometric(cfg);
        CHECK(a == b);
        CHECK_NOTHROW(check_invariants(a));
        for (const auto& nbrs : a.adj)
            for (const auto& nb : nbrs) CHECK(nb.dist <= 1.0);
    }
}

TEST_CASE("generator handles n=1") {
    GeneratorConfig cfg;
    cfg.n = 1;
    UniflInstance inst = generate_geometric(cfg);
    CHECK(inst.n == 1);
    CHECK(inst.has_coords());
}

TEST_CASE("serialization round trip") {
    UniflInstance inst = testutil::pair_at(0.5);
    std::string path = "roundtrip_pair.unifl";
    save_instance(inst, path);
    UniflInstance back = load_instance(path);
    CHECK(back == inst);
    std::remove(path.c_str());
}

TEST_CASE("round trip preserves coordinates and exact weights") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        UniflInstance inst = testutil::random_instance(40, seed);
        std::string path = "roundtrip_geo.unifl";
        save_instance(inst, path);
        UniflInstance back = load_instance(path);
        CHECK(back == inst);
        std::remove(path.c_str());
    }
}

TEST_CASE("parse errors carry line numbers") {
    {
        std::ofstream out("bad1.unifl");
        out << "unifl v1 2\n0 1\n";
    }
    CHECK_THROWS_AS(load_instance("bad1.unifl"), ParseError);
    std::remove("bad1.unifl");

    {
        std::ofstream out("bad2.unifl");
        out << "unifl v1 2\n0 5 0.3\n";
    }
    CHECK_THROWS_AS(load_instance("bad2.unifl"), VertexOutOfRange);
    std::remove("bad2.unifl");
}

TEST_CASE("mean degree excludes self-loops") {
    UniflInstance inst = testutil::pair_at(0.5);
    CHECK(inst.mean_degree() == doctest::Approx(1.0));
    CHECK(build_instance(1, {}).mean_degree() == doctest::Approx(0.0));
}
