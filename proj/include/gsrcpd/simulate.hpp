#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gsrcpd/core.hpp"
#include "gsrcpd/random.hpp"

namespace gsrcpd {

enum class ChangeKind { None, Mean, Variance };

std::string_view to_string(ChangeKind kind);
ChangeKind parse_change_kind(std::string_view text);

// Observations before `change_location` are N(0, I_d); from it onwards they are
// N(magnitude * 1, I_d) for Mean or N(0, magnitude * I_d) for Variance.
struct Scenario {
    std::size_t dimension = 1;
    ChangeKind change = ChangeKind::None;
    double magnitude = 0.0;
    std::size_t length = 0;
    std::size_t change_location = 0;

    static Scenario none(std::size_t dimension, std::size_t length);
    // Default shift is 1 / cbrt(d).
    static Scenario mean_shift(std::size_t dimension, std::size_t length, std::size_t location,
                               std::optional<double> delta = std::nullopt);
    // Default post-change covariance is 2 I_d.
    static Scenario variance_change(std::size_t dimension, std::size_t length, std::size_t location,
                                    double scale = 2.0);

    void validate() const;
};

double default_magnitude(ChangeKind kind, std::size_t dimension);

std::vector<Observation> generate(const Scenario& scenario, Rng& rng);

// Number of MST edges that join the two halves of the block.
std::size_t ibgec_statistic(Block block);

// Permutation counts for IBGEC: shuffles the training sample and scores the
// first n points, sub-stream b for permutation b.
std::vector<std::size_t> ibgec_null(Block training, std::size_t n, std::size_t permutations,
                                    std::uint64_t seed);

// Lower-tail permutation test: p = (1 + #{null <= count}) / (k + 1), reject when p <= alpha.
bool ibgec_reject(std::size_t count, std::span<const std::size_t> null_counts, double alpha);

struct PowerReport {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;
    // Empty when the denominator is zero.
    std::optional<double> accuracy;
    std::optional<double> sensitivity;
    std::optional<double> fpr;
    std::optional<double> p_mean;

    static PowerReport from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);
};

enum class Method { StaticComplete, StaticMst, Ibgec, OnlineComplete, OnlineMst };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

struct PowerCell {
    ChangeKind change = ChangeKind::None;
    std::size_t dimension = 0;
    std::vector<std::size_t> windows;
    Method method = Method::StaticComplete;
    PowerReport report;
};

struct StaticPowerSpec {
    std::vector<std::size_t> dimensions;
    std::vector<std::size_t> windows;
    ChangeKind change = ChangeKind::Mean;
    std::optional<double> magnitude;  // defaults per default_magnitude
    std::size_t trials = 200;
    std::vector<Method> methods{Method::StaticComplete, Method::StaticMst, Method::Ibgec};
    double alpha = 0.05;
    std::size_t permutations = 500;
    std::uint64_t seed = 42;
};

// Per grid cell (d, n) and trial: a fair coin decides whether the n-point
// sample changes at n/2; every method calibrates on a fresh n-point H0
// training sample and decides. Methods share samples and training data.
std::vector<PowerCell> run_static_power(const StaticPowerSpec& spec);

struct OnlinePowerSpec {
    std::vector<std::size_t> dimensions;
    std::vector<std::size_t> windows{40, 70, 100};
    // true: one cell per single window length; false: all windows jointly.
    bool per_window = false;
    ChangeKind change = ChangeKind::Mean;
    std::optional<double> magnitude;
    std::size_t samples = 200;
    std::size_t sample_length = 100;
    std::vector<Method> methods{Method::OnlineComplete, Method::OnlineMst};
    double alpha = 0.10;
    std::size_t permutations = 500;
    std::uint64_t seed = 42;
};

// Per cell: calibrate once on a fresh H0 training sample of `sample_length`
// points, then for each sample (first half N(0, I_d), second half changed with
// probability 1/2) replay the first half as history and monitor the second.
std::vector<PowerCell> run_online_power(const OnlinePowerSpec& spec);

// Long-format CSV: change, d, n, method, tp, fp, tn, fn, accuracy, sensitivity,
// fpr, p_mean. `header` lines are written first, each prefixed with "# ".
void write_power_csv(std::ostream& out, std::span<const PowerCell> cells,
                     std::span<const std::string> header = {});
nlohmann::json power_to_json(std::span<const PowerCell> cells);

}  // namespace gsrcpd
