#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gsrcpd/calibrate.hpp"
#include "gsrcpd/core.hpp"

namespace gsrcpd {

struct CheckReport {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

// Compares the O(m d) complete-graph spanning distance with the pairwise sum
// on random blocks (m in [4, 60], d in [1, 50]), plus a block offset by 1e6
// and an all-zero block. `measured` is the worst relative error.
CheckReport check_spanning_identity(std::size_t trials, std::uint64_t seed);

// Monte Carlo mean of the complete-graph spanning distance for m i.i.d.
// N(0, sigma^2 I_d) points against C(m, 2) * 2 d sigma^2, within 3 standard errors.
CheckReport check_dg_moments(std::size_t m, std::size_t d, double sigma, std::size_t trials,
                             std::uint64_t seed);

struct NullRateSpec {
    CalibrationMode mode = CalibrationMode::Static;
    WindowConfig window{.lengths = {40}};
    std::size_t dimension = 10;
    std::size_t trials = 1000;
    // Online only. Zero picks 2 * longest window for training and the longest
    // window for the monitored H0 stretch.
    std::size_t training_length = 0;
    std::size_t monitor_length = 0;
};

// Calibrate-then-detect under H0, one fresh training sample per trial.
// Static: an H0 block of the longest window is tested on its trailing n points
// for every n; any rejection counts. Online: a detector trains on the sample
// and monitors an H0 stretch; any event counts.
// Passes when the rejection rate is at most alpha + 2 sqrt(alpha (1 - alpha) / trials).
CheckReport check_null_rates(const NullRateSpec& spec, std::uint64_t seed);

// Rejection rate behind check_null_rates.
double null_rejection_rate(const NullRateSpec& spec, std::uint64_t seed);

nlohmann::json report_to_json(const CheckReport& report);

struct SelfCheckSummary {
    bool passed = false;
    std::vector<CheckReport> reports;
    nlohmann::json to_json() const;
};

SelfCheckSummary run_self_check(std::uint64_t seed);

}  // namespace gsrcpd
