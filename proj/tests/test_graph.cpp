#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gsrcpd/graph.hpp"
#include "gsrcpd/random.hpp"

using namespace gsrcpd;

namespace {

std::vector<Observation> line(std::initializer_list<double> xs) {
    std::vector<Observation> out;
    for (double x : xs) out.push_back(Observation{x});
    return out;
}

std::vector<Observation> gaussian_block(std::size_t m, std::size_t d, Rng& rng, double offset = 0.0) {
    std::vector<Observation> out;
    std::vector<double> v(d);
    for (std::size_t i = 0; i < m; ++i) {
        for (auto& x : v) x = offset + rng.normal();
        out.emplace_back(v);
    }
    return out;
}

// Independent reference: Kruskal with union-find over all pairs.
double kruskal_weight(Block block) {
    const std::size_t m = block.size();
    std::vector<std::tuple<double, std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            double s = 0;
            for (std::size_t k = 0; k < block[i].dimension(); ++k) {
                const double diff = block[i][k] - block[j][k];
                s += diff * diff;
            }
            edges.emplace_back(s, i, j);
        }
    }
    std::sort(edges.begin(), edges.end());
    std::vector<std::size_t> parent(m);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    double total = 0;
    for (const auto& [w, i, j] : edges) {
        const auto a = find(i), b = find(j);
        if (a != b) {
            parent[a] = b;
            total += w;
        }
    }
    return total;
}

bool is_spanning_tree(std::size_t m, const std::vector<Edge>& edges) {
    if (edges.size() != m - 1) return false;
    std::vector<std::size_t> parent(m);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x];
        return x;
    };
    for (const auto& e : edges) {
        const auto a = find(e.i), b = find(e.j);
        if (a == b) return false;
        parent[a] = b;
    }
    return true;
}

}  // namespace

TEST_CASE("squared distance") {
    CHECK(squared_distance(Observation{0.0, 0.0}, Observation{3.0, 4.0}) == 25.0);
    CHECK_THROWS_AS(squared_distance(Observation{0.0}, Observation{0.0, 1.0}), DimensionMismatch);
}

TEST_CASE("complete spanning distance of a unit-spaced line") {
    // Pairs of {0,1,2,3}: three at distance 1, two at 4, one at 9.
    const auto b = line({0, 1, 2, 3});
    CHECK(complete_spanning_distance_pairwise(b) == doctest::Approx(20.0));
    CHECK(complete_spanning_distance(b) == doctest::Approx(20.0));
    CHECK_THROWS_AS(complete_spanning_distance(Block(b.data(), 1)), InvalidArgument);
}

TEST_CASE("complete spanning identity on random blocks") {
    for (std::uint64_t t = 0; t < 200; ++t) {
        Rng rng(11, t);
        const std::size_t m = 2 + rng.below(40);
        const std::size_t d = 1 + rng.below(30);
        const auto block = gaussian_block(m, d, rng, t % 3 == 0 ? 1e6 : 0.0);
        const double fast = complete_spanning_distance(block);
        const double slow = complete_spanning_distance_pairwise(block);
        CHECK(std::abs(fast - slow) <= 1e-9 * slow);
    }
}

TEST_CASE("complete spanning distance of a constant block is zero") {
    const std::vector<Observation> b(7, Observation{5.0, -1.0, 2.0});
    CHECK(complete_spanning_distance(b) == 0.0);
    CHECK(complete_spanning_distance_pairwise(b) == 0.0);
}

TEST_CASE("mst of three collinear points") {
    const auto b = line({0, 1, 3});
    const auto mst = mst_spanning_distance(b);
    CHECK(mst.weight == 5.0);
    REQUIRE(mst.edges.size() == 2);
    CHECK(mst.edges[0] == Edge{0, 1, 1.0});
    CHECK(mst.edges[1] == Edge{1, 2, 4.0});
}

TEST_CASE("mst of the unit square against exhaustive enumeration") {
    const std::vector<Observation> sq{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    std::vector<Edge> all;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) all.push_back({i, j, squared_distance(sq[i], sq[j])});
    }
    double best = std::numeric_limits<double>::infinity();
    int trees = 0;
    for (unsigned mask = 0; mask < (1u << all.size()); ++mask) {
        std::vector<Edge> pick;
        for (std::size_t e = 0; e < all.size(); ++e) {
            if (mask & (1u << e)) pick.push_back(all[e]);
        }
        if (!is_spanning_tree(4, pick)) continue;
        ++trees;
        double w = 0;
        for (const auto& e : pick) w += e.weight;
        best = std::min(best, w);
    }
    CHECK(trees == 16);  // Cayley: 4^(4-2)
    const auto mst = mst_spanning_distance(sq);
    CHECK(best == 3.0);
    CHECK(mst.weight == 3.0);
    CHECK(is_spanning_tree(4, mst.edges));
}

TEST_CASE("prim agrees with kruskal on random blocks") {
    for (std::uint64_t t = 0; t < 100; ++t) {
        Rng rng(12, t);
        const std::size_t m = 2 + rng.below(40);
        const std::size_t d = 1 + rng.below(10);
        const auto block = gaussian_block(m, d, rng);
        const auto mst = mst_spanning_distance(block);
        CHECK(mst.weight == doctest::Approx(kruskal_weight(block)).epsilon(1e-12));
        CHECK(is_spanning_tree(m, mst.edges));
        for (const auto& e : mst.edges) CHECK(e.i < e.j);
    }
}

TEST_CASE("mst ties break deterministically") {
    // Equally spaced points: every consecutive edge ties.
    const auto b = line({0, 1, 2, 3, 4});
    const auto first = mst_spanning_distance(b);
    const auto second = mst_spanning_distance(b);
    CHECK(first.edges == second.edges);
    CHECK(first.weight == 4.0);
}

TEST_CASE("mst weight never exceeds the complete graph weight") {
    for (std::uint64_t t = 0; t < 50; ++t) {
        Rng rng(13, t);
        const auto block = gaussian_block(2 + rng.below(30), 1 + rng.below(8), rng);
        CHECK(mst_spanning_distance(block).weight <= complete_spanning_distance(block) * (1 + 1e-12));
    }
}

TEST_CASE("window graphs split the block") {
    const auto b = line({0, 1, 2, 3});
    const auto cg = build_window_graphs(b, 2, GraphKind::Complete);
    CHECK(cg.whole == doctest::Approx(20.0));
    CHECK(cg.first == doctest::Approx(1.0));
    CHECK(cg.second == doctest::Approx(1.0));
    const auto mst = build_window_graphs(b, 2, GraphKind::Mst);
    CHECK(mst.whole == 3.0);
    CHECK(mst.first == 1.0);
    CHECK(mst.second == 1.0);
    CHECK_THROWS_AS(build_window_graphs(b, 1, GraphKind::Complete), InvalidArgument);
    CHECK_THROWS_AS(build_window_graphs(b, 3, GraphKind::Complete), InvalidArgument);
}

TEST_CASE("graph builders list every edge") {
    Rng rng(14, 0);
    const auto block = gaussian_block(9, 3, rng);
    const auto cg = build_complete_graph(block);
    CHECK(cg.edges.size() == 36);
    double sum = 0;
    for (const auto& e : cg.edges) sum += e.weight;
    CHECK(sum == doctest::Approx(cg.spanning_distance));
    const auto mst = build_mst_graph(block);
    CHECK(mst.edges.size() == 8);
    CHECK(mst.spanning_distance == doctest::Approx(kruskal_weight(block)));
}

TEST_CASE("distance matrix is symmetric with zero diagonal") {
    Rng rng(15, 0);
    const auto block = gaussian_block(6, 4, rng);
    const DistanceMatrix dm(block);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(dm(i, i) == 0.0);
        for (std::size_t j = 0; j < 6; ++j) {
            CHECK(dm(i, j) == dm(j, i));
            CHECK(dm(i, j) == doctest::Approx(squared_distance(block[i], block[j])));
        }
    }
}
