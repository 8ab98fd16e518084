#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gsrcpd/core.hpp"
#include "gsrcpd/random.hpp"

namespace gsrcpd {

enum class CalibrationMode { Static, Online };

std::string_view to_string(CalibrationMode mode);
CalibrationMode parse_calibration_mode(std::string_view text);

// Permutation statistics with one row per permutation and one column per
// (window, statistic) pair: column 2w holds T_mu of window w, 2w+1 T_sigma.
// All columns of a row come from the same shuffled training sample, so
// row-wise maxima over pairs are coherent.
struct PermutationDraws {
    std::vector<std::size_t> lengths;
    std::size_t permutations = 0;
    std::vector<double> values;
    std::size_t degenerate_draws = 0;

    std::size_t pair_count() const { return 2 * lengths.size(); }
    double at(std::size_t row, std::size_t pair) const { return values[row * pair_count() + pair]; }
    std::vector<double> sorted_column(std::size_t pair) const;
};

std::vector<Observation> permute(Block block, Rng& rng);

// Each permutation shuffles the training sample and scores the first n points
// of the shuffled order at their midpoint, for every n in `lengths`.
// Permutation b draws from sub-stream b of `seed`.
PermutationDraws static_null(Block training, std::span<const std::size_t> lengths,
                             std::size_t permutations, GraphKind kind, std::uint64_t seed);

// Each permutation shuffles the N training points and records, per window n,
// the maximum of each statistic over every split t with a full window
// y[t-n/2+1 .. t+n/2] inside the sample (N - n + 1 positions).
PermutationDraws online_null(Block training, std::span<const std::size_t> lengths,
                             std::size_t permutations, GraphKind kind, std::uint64_t seed);

// The ceil((1 - z)(k + 1))-th order statistic of `sorted`, clamped to [1, k].
double quantile_threshold(std::span<const double> sorted, double z);

// Fraction of permutations in which at least one pair reaches its own
// quantile_threshold(column, z). `sorted` holds each column sorted ascending.
double family_exceedance(const PermutationDraws& draws,
                         const std::vector<std::vector<double>>& sorted, double z);

struct AlphaStar {
    double value = 0.0;
    bool bonferroni_fallback = false;
};

// Largest level z on the grid alpha, alpha/2, ..., alpha/64, refined by bisection
// to a resolution of alpha/64, that keeps the rule's exceedance within alpha.
// With a single pair there is no multiplicity and the result is alpha.
AlphaStar calibrate_alpha_star(const PermutationDraws& draws, double alpha,
                               AlphaStarRule rule = AlphaStarRule::FamilyWise);

struct WindowThresholds {
    std::size_t length = 0;
    std::vector<double> mu_values;     // k sorted permutation values
    std::vector<double> sigma_values;  // k sorted permutation values
    double rho_mu = 0.0;
    double rho_sigma = 0.0;
};

struct CalibrationTable {
    CalibrationMode mode = CalibrationMode::Online;
    WindowConfig config;
    std::string config_hash;
    double alpha_star = 0.0;
    bool bonferroni_fallback = false;
    std::size_t training_length = 0;
    std::size_t dimension = 0;
    std::size_t degenerate_draws = 0;
    std::vector<WindowThresholds> windows;

    bool has_window(std::size_t length) const;
    const WindowThresholds& window(std::size_t length) const;
    double threshold(std::size_t length, Statistic statistic) const;
};

// Full calibration: permutation null for every configured window, the level
// alpha*, and per-pair thresholds at alpha*.
CalibrationTable calibrate(Block training, const WindowConfig& config, CalibrationMode mode);

// Stable digest of the configuration fields that determine thresholds
// (windows, alpha, permutations, graph kind, alpha* rule). The seed is excluded.
std::string config_hash(const WindowConfig& config);

nlohmann::json window_config_to_json(const WindowConfig& config);
WindowConfig window_config_from_json(const nlohmann::json& j);

inline constexpr int kCalibrationFormatVersion = 1;

nlohmann::json calibration_to_json(const CalibrationTable& table);
// Validates format, version, the embedded hash, and every sorted vector.
CalibrationTable calibration_from_json(const nlohmann::json& j);

}  // namespace gsrcpd
