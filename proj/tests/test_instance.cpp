#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "udgp/instance.hpp"

using namespace udgp;

TEST_CASE("distance list sorts and validates") {
    DistanceList d(3, 2, {2.0, 1.0, 3.0});
    REQUIRE(d.m() == 3);
    REQUIRE(d.pair_count() == 3);
    REQUIRE(d.complete());
    REQUIRE(d.values == std::vector<double>{1.0, 2.0, 3.0});

    REQUIRE_THROWS_AS(DistanceList(1, 2, {1.0}), Error);
    REQUIRE_THROWS_AS(DistanceList(3, 0, {1.0}), Error);
    REQUIRE_THROWS_AS(DistanceList(3, 2, {}), Error);
    REQUIRE_THROWS_AS(DistanceList(3, 2, {1.0, 2.0, 3.0, 4.0}), Error);
    REQUIRE_THROWS_AS(DistanceList(3, 2, {1.0, -2.0}), Error);
    REQUIRE_THROWS_AS(DistanceList(3, 2, {0.0}), Error);
}

TEST_CASE("incomplete list density") {
    DistanceList d(5, 3, {1.0, 2.0, 3.0, 4.0, 5.0});
    REQUIRE(d.pair_count() == 10);
    REQUIRE_FALSE(d.complete());
    REQUIRE(d.density() == Catch::Approx(0.5));
}

TEST_CASE("weighted graph validates and sorts edges") {
    WeightedGraph g(4, {{2, 3, 1.0}, {0, 1, 2.0}, {0, 2, 0.5}});
    REQUIRE(g.edge_count() == 3);
    REQUIRE(g.edges[0].i == 0);
    REQUIRE(g.edges[0].j == 1);
    REQUIRE(g.edges[2].i == 2);
    REQUIRE(g.max_weight() == Catch::Approx(2.0));

    REQUIRE_THROWS_AS(WeightedGraph(3, {{0, 0, 1.0}}), Error);
    REQUIRE_THROWS_AS(WeightedGraph(3, {{1, 0, 1.0}}), Error);
    REQUIRE_THROWS_AS(WeightedGraph(3, {{0, 3, 1.0}}), Error);
    REQUIRE_THROWS_AS(WeightedGraph(3, {{0, 1, -1.0}}), Error);
    REQUIRE_THROWS_AS(WeightedGraph(3, {{0, 1, 1.0}, {0, 1, 2.0}}), Error);

    Matrix adj = g.adjacency();
    REQUIRE(adj(0, 1) == Catch::Approx(2.0));
    REQUIRE(adj(1, 0) == Catch::Approx(2.0));
    REQUIRE(adj(1, 2) == 0.0);
    REQUIRE(adj(2, 2) == 0.0);
}

TEST_CASE("buckminsterfullerene geometry") {
    Realization x = build_c60();
    REQUIRE(x.n == 60);
    REQUIRE(x.k == 3);

    // Centered at the origin.
    for (int d = 0; d < 3; ++d) {
        double sum = 0.0;
        for (int i = 0; i < 60; ++i) sum += x.at(i, d);
        REQUIRE(std::abs(sum) < 1e-9);
    }

    // All vertices on a common sphere.
    double r0 = 0.0;
    for (int d = 0; d < 3; ++d) r0 += x.at(0, d) * x.at(0, d);
    for (int i = 1; i < 60; ++i) {
        double r = 0.0;
        for (int d = 0; d < 3; ++d) r += x.at(i, d) * x.at(i, d);
        REQUIRE(r == Catch::Approx(r0).epsilon(1e-9));
    }

    // Unit bonds: shortest distance is 1 and every vertex has exactly
    // three neighbours at that distance (90 edges in total).
    int bonds = 0;
    std::vector<int> degree(60, 0);
    double shortest = 1e30;
    for (int i = 0; i < 60; ++i)
        for (int j = i + 1; j < 60; ++j) {
            const double d = x.distance(i, j);
            shortest = std::min(shortest, d);
            if (std::abs(d - 1.0) < 1e-6) {
                ++bonds;
                ++degree[i];
                ++degree[j];
            }
        }
    REQUIRE(shortest == Catch::Approx(1.0).epsilon(1e-9));
    REQUIRE(bonds == 90);
    for (int i = 0; i < 60; ++i) REQUIRE(degree[i] == 3);
}

TEST_CASE("buckminsterfullerene scales with the edge length") {
    Realization unit = build_c60(1.0);
    Realization big = build_c60(2.5);
    for (int i = 0; i < 8; ++i)
        for (int j = i + 1; j < 8; ++j)
            REQUIRE(big.distance(i, j) == Catch::Approx(2.5 * unit.distance(i, j)));
    REQUIRE_THROWS_AS(build_c60(0.0), Error);
}

TEST_CASE("distance extraction from a realization") {
    Realization x(3, 2);
    x.at(0, 0) = 0.0;
    x.at(1, 0) = 3.0;
    x.at(2, 1) = 4.0;
    DistanceList d = distances_from_realization(x);
    REQUIRE(d.n == 3);
    REQUIRE(d.k == 2);
    REQUIRE(d.values[0] == Catch::Approx(3.0));
    REQUIRE(d.values[1] == Catch::Approx(4.0));
    REQUIRE(d.values[2] == Catch::Approx(5.0));

    Realization dup(2, 2);
    REQUIRE_THROWS_AS(distances_from_realization(dup), Error);
}

TEST_CASE("full fullerene distance list") {
    DistanceList d = distances_from_realization(build_c60());
    REQUIRE(d.n == 60);
    REQUIRE(d.m() == 1770);
    REQUIRE(d.complete());
    REQUIRE(d.values.front() == Catch::Approx(1.0));

    // The truncated icosahedron with unit edges has exactly 21 distinct
    // pairwise distances; the smallest are 1, phi, sqrt(3), 2 and the
    // diameter is sqrt(9*phi + 10).
    std::vector<double> distinct;
    for (double v : d.values)
        if (distinct.empty() || v - distinct.back() > 1e-6) distinct.push_back(v);
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    REQUIRE(distinct.size() == 21);
    REQUIRE(distinct[1] == Catch::Approx(phi).epsilon(1e-9));
    REQUIRE(distinct[2] == Catch::Approx(std::sqrt(3.0)).epsilon(1e-9));
    REQUIRE(distinct[3] == Catch::Approx(2.0).epsilon(1e-9));
    REQUIRE(d.values.back() == Catch::Approx(std::sqrt(9.0 * phi + 10.0)).epsilon(1e-9));
}

TEST_CASE("thinning keeps a density-sized subset") {
    DistanceList full = distances_from_realization(build_c60());
    DistanceList half = thin(full, 0.5, 1);
    REQUIRE(half.n == 60);
    REQUIRE_FALSE(half.complete());
    REQUIRE(half.m() > 700);
    REQUIRE(half.m() < 1070);

    // Deterministic in the seed.
    DistanceList again = thin(full, 0.5, 1);
    REQUIRE(again.values == half.values);
    DistanceList other = thin(full, 0.5, 2);
    REQUIRE(other.values != half.values);

    REQUIRE_THROWS_AS(thin(half, 0.5, 1), Error);
    REQUIRE_THROWS_AS(thin(full, 0.0, 1), Error);
    REQUIRE_THROWS_AS(thin(full, 1.5, 1), Error);
}

TEST_CASE("thinning at tiny density still returns something") {
    Realization tiny(3, 2);
    tiny.at(1, 0) = 1.0;
    tiny.at(2, 1) = 1.0;
    DistanceList d = distances_from_realization(tiny);
    DistanceList kept = thin(d, 1e-3, 7);
    REQUIRE(kept.m() >= 1);
}

TEST_CASE("random instances are deterministic and separated") {
    auto [x1, d1] = random_instance(5, 3, 42);
    auto [x2, d2] = random_instance(5, 3, 42);
    auto [x3, d3] = random_instance(5, 3, 43);
    REQUIRE(d1.values == d2.values);
    REQUIRE(d1.values != d3.values);
    REQUIRE(d1.m() == 10);
    REQUIRE(d1.complete());
    for (int i = 0; i < 5; ++i)
        for (int d = 0; d < 3; ++d) REQUIRE(std::abs(x1.at(i, d)) <= 1.0);
    for (double v : d1.values) REQUIRE(v >= 1e-6);
}
