#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <utility>

namespace gsrcpd {

// Deterministic generator keyed by (seed, sub_stream).
//
// The engine is std::mt19937_64 seeded through std::seed_seq; both are fully
// specified by the standard, so raw draws are identical on every conforming
// platform. Uniform, bounded and Gaussian draws are derived here rather than
// through <random> distributions, whose algorithms are implementation-defined.
class Rng {
public:
    using result_type = std::uint64_t;

    Rng(std::uint64_t seed, std::uint64_t sub_stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform();

    // Standard normal via the Box-Muller transform.
    double normal();

    // Uniform integer on [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

Rng seeded_rng(std::uint64_t seed, std::uint64_t sub_stream);

// Mixes a tuple of integers into one sub-stream key (SplitMix64 finalizer chain).
std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts);

// Fisher-Yates shuffle driven by Rng::below, so the result is portable.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace gsrcpd
