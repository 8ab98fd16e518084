#include "doctest.h"

#include <cmath>

#include "gsrcpd/gsr.hpp"
#include "gsrcpd/random.hpp"

using namespace gsrcpd;

namespace {

std::vector<Observation> random_window(Rng& rng, std::size_t n, std::size_t d, double scale = 1.0) {
    std::vector<Observation> out;
    std::vector<double> v(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& x : v) x = scale * rng.normal();
        out.emplace_back(v);
    }
    return out;
}

std::vector<Observation> scaled(const std::vector<Observation>& block, double c) {
    std::vector<Observation> out;
    for (const auto& y : block) {
        std::vector<double> v(y.values().begin(), y.values().end());
        for (auto& x : v) x *= c;
        out.emplace_back(v);
    }
    return out;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("ratio formulas") {
    CHECK(t_mu(20, 1, 1) == 10.0);
    CHECK(t_sigma(1, 1) == 2.0);
    CHECK(t_sigma(1, 4) == doctest::Approx(4.25));
    CHECK_THROWS_AS(t_mu(1, 0, 0), DegenerateWindow);
    CHECK_THROWS_AS(t_sigma(0, 1), DegenerateWindow);
    CHECK_THROWS_AS(t_sigma(1, 0), DegenerateWindow);
}

TEST_CASE("statistics of a unit-spaced line") {
    const std::vector<Observation> b{Observation{0.0}, Observation{1.0}, Observation{2.0}, Observation{3.0}};
    const auto cg = scan_statistics(b, GraphKind::Complete);
    CHECK(cg.t_mu == doctest::Approx(10.0));
    CHECK(cg.t_sigma == doctest::Approx(2.0));
    CHECK(cg.split_index == 2);
    const auto mst = scan_statistics(b, GraphKind::Mst);
    CHECK(mst.t_mu == doctest::Approx(1.5));
    CHECK(mst.t_sigma == doctest::Approx(2.0));
}

TEST_CASE("scan requires an even window of at least four points") {
    const std::vector<Observation> b(5, Observation{1.0});
    CHECK_THROWS_AS(scan_statistics(b, GraphKind::Complete), InvalidArgument);
    CHECK_THROWS_AS(scan_statistics(Block(b.data(), 2), GraphKind::Complete), InvalidArgument);
    CHECK_THROWS_AS(scan_statistics(Block(b.data(), 4), GraphKind::Complete), DegenerateWindow);
}

TEST_CASE("one constant half is degenerate for the variance ratio") {
    const std::vector<Observation> b{Observation{1.0}, Observation{1.0}, Observation{2.0}, Observation{5.0}};
    CHECK_THROWS_AS(scan_statistics(b, GraphKind::Complete), DegenerateWindow);
}

TEST_CASE("property: bounds and scale invariance on random windows") {
    for (std::uint64_t t = 0; t < 500; ++t) {
        Rng rng(21, t);
        const std::size_t n = 2 * (2 + rng.below(30));
        const std::size_t d = 1 + rng.below(20);
        const double scale = std::exp(rng.normal() * 3);
        const auto block = random_window(rng, n, d, scale);
        for (const auto kind : {GraphKind::Complete, GraphKind::Mst}) {
            const auto s = scan_statistics(block, kind);
            CHECK(s.t_sigma >= 2.0);
            if (kind == GraphKind::Complete) CHECK(s.t_mu >= 1.0);
            for (const double c : {0.001, 1000.0}) {
                const auto sc = scan_statistics(scaled(block, c), kind);
                CHECK(rel(s.t_mu, sc.t_mu) <= 1e-9);
                CHECK(rel(s.t_sigma, sc.t_sigma) <= 1e-9);
            }
        }
    }
}

TEST_CASE("property: swapping the halves leaves both statistics unchanged") {
    for (std::uint64_t t = 0; t < 100; ++t) {
        Rng rng(22, t);
        const std::size_t n = 2 * (2 + rng.below(20));
        const auto block = random_window(rng, n, 1 + rng.below(5));
        std::vector<Observation> swapped(block.begin() + n / 2, block.end());
        swapped.insert(swapped.end(), block.begin(), block.begin() + n / 2);
        for (const auto kind : {GraphKind::Complete, GraphKind::Mst}) {
            const auto a = scan_statistics(block, kind);
            const auto b = scan_statistics(swapped, kind);
            CHECK(a.t_mu == doctest::Approx(b.t_mu).epsilon(1e-12));
            CHECK(a.t_sigma == doctest::Approx(b.t_sigma).epsilon(1e-12));
        }
    }
}

TEST_CASE("a mean shift raises the mean ratio") {
    Rng rng(23, 0);
    auto block = random_window(rng, 40, 5);
    const double before = scan_statistics(block, GraphKind::Complete).t_mu;
    for (std::size_t i = 20; i < 40; ++i) {
        std::vector<double> v(block[i].values().begin(), block[i].values().end());
        for (auto& x : v) x += 5.0;
        block[i] = Observation(v);
    }
    CHECK(scan_statistics(block, GraphKind::Complete).t_mu > before + 1.0);
}
