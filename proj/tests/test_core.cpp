#include "doctest.h"

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "gsrcpd/core.hpp"
#include "gsrcpd/parallel.hpp"
#include "gsrcpd/random.hpp"

using namespace gsrcpd;

TEST_CASE("observation rejects empty and non-finite input") {
    CHECK_THROWS_AS(Observation(std::vector<double>{}), InvalidArgument);
    CHECK_THROWS_AS(Observation({1.0, std::numeric_limits<double>::quiet_NaN()}), InvalidArgument);
    CHECK_THROWS_AS(Observation({std::numeric_limits<double>::infinity()}), InvalidArgument);
    const Observation y{1.5, -2.0};
    CHECK(y.dimension() == 2);
    CHECK(y[1] == -2.0);
    CHECK(y == Observation(std::vector<double>{1.5, -2.0}));
}

TEST_CASE("require_dimension names the offending observation") {
    const std::vector<Observation> block{{1.0, 2.0}, {3.0}};
    CHECK_NOTHROW(require_dimension(Block(block.data(), 1), 2));
    CHECK_THROWS_AS(require_dimension(block, 2), DimensionMismatch);
}

TEST_CASE("enum names round-trip") {
    for (auto k : {GraphKind::Complete, GraphKind::Mst}) CHECK(parse_graph_kind(to_string(k)) == k);
    for (auto s : {Statistic::Mu, Statistic::Sigma}) CHECK(parse_statistic(to_string(s)) == s);
    for (auto r : {AlphaStarRule::FamilyWise, AlphaStarRule::Literal}) {
        CHECK(parse_alpha_star_rule(to_string(r)) == r);
    }
    CHECK(parse_graph_kind("cg") == GraphKind::Complete);
    CHECK_THROWS_AS(parse_graph_kind("nng"), ConfigError);
}

TEST_CASE("window config validation") {
    WindowConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.max_length() == 100);
    CHECK(c.min_length() == 40);

    auto bad = c;
    bad.lengths = {41};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.lengths = {2};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.lengths = {70, 40};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.lengths = {};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.alpha = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = c;
    bad.permutations = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("rng matches a seed_seq-seeded mt19937_64") {
    constexpr std::array<std::uint64_t, 8> golden{
        0x653a35039c27c154ULL, 0xe0bd4985c1ef48b9ULL, 0xd4ce50c32fd804b2ULL, 0xa1106957e01f86aaULL,
        0x651c687a2793eb24ULL, 0x333baf096f839a17ULL, 0xc87bf86b10e77d58ULL, 0x199beac252a332deULL};
    Rng rng(42, 7);
    for (const auto g : golden) CHECK(rng() == g);

    std::seed_seq seq{0x89abcdefu, 0x01234567u, 3u, 1u};
    std::mt19937_64 reference(seq);
    Rng other(0x0123456789abcdefULL, 0x100000003ULL);
    for (int i = 0; i < 100; ++i) CHECK(other() == reference());
}

TEST_CASE("sub-streams differ and repeat") {
    Rng a(1, 0), b(1, 1), c(1, 0);
    const auto xa = a();
    CHECK(xa != b());
    CHECK(xa == c());
    CHECK(stream_key({1, 2}) != stream_key({2, 1}));
    CHECK(stream_key({1, 2}) == stream_key({1, 2}));
    std::set<std::uint64_t> keys;
    for (std::uint64_t i = 0; i < 1000; ++i) keys.insert(stream_key({7, i}));
    CHECK(keys.size() == 1000);
}

TEST_CASE("uniform and normal moments") {
    Rng rng(9, 0);
    constexpr int count = 200000;
    double su = 0, sn = 0, sn2 = 0, sn4 = 0;
    for (int i = 0; i < count; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
        sn4 += z * z * z * z;
    }
    CHECK(std::abs(su / count - 0.5) < 4 * std::sqrt(1.0 / 12 / count));
    CHECK(std::abs(sn / count) < 4 / std::sqrt(count));
    CHECK(std::abs(sn2 / count - 1.0) < 4 * std::sqrt(2.0 / count));
    CHECK(std::abs(sn4 / count - 3.0) < 4 * std::sqrt(96.0 / count));
}

TEST_CASE("below is uniform over its range") {
    Rng rng(5, 5);
    std::array<int, 7> counts{};
    constexpr int draws = 70000;
    for (int i = 0; i < draws; ++i) counts[rng.below(7)]++;
    double chi2 = 0;
    for (int c : counts) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
    // 0.999 quantile of chi-square with 6 degrees of freedom.
    CHECK(chi2 < 22.46);
}

TEST_CASE("shuffle visits every permutation equally often") {
    Rng rng(3, 0);
    std::map<std::array<int, 3>, int> freq;
    constexpr int draws = 60000;
    for (int i = 0; i < draws; ++i) {
        std::array<int, 3> a{0, 1, 2};
        shuffle(std::span<int>(a), rng);
        freq[a]++;
    }
    REQUIRE(freq.size() == 6);
    double chi2 = 0;
    for (const auto& [perm, c] : freq) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
    // 0.999 quantile of chi-square with 5 degrees of freedom.
    CHECK(chi2 < 20.52);
}

TEST_CASE("parallel_for fills every slot and rethrows") {
    std::vector<int> out(1000, 0);
    parallel_for(out.size(), [&](std::size_t i) { out[i] = static_cast<int>(i) * 2; });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i) * 2);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                        if (i == 3) throw InvalidArgument("boom");
                    }),
                    InvalidArgument);
}
