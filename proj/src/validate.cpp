#include "gsrcpd/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gsrcpd/detect.hpp"
#include "gsrcpd/graph.hpp"
#include "gsrcpd/parallel.hpp"
#include "gsrcpd/random.hpp"
#include "gsrcpd/simulate.hpp"

namespace gsrcpd {

namespace {

constexpr double kIdentityTolerance = 1e-9;

std::vector<Observation> random_block(std::size_t m, std::size_t d, double scale, double offset, Rng& rng) {
    std::vector<Observation> block;
    block.reserve(m);
    std::vector<double> values(d);
    for (std::size_t i = 0; i < m; ++i) {
        for (auto& v : values) v = offset + scale * rng.normal();
        block.emplace_back(values);
    }
    return block;
}

double relative_error(double a, double b) {
    const double diff = std::abs(a - b);
    if (diff == 0.0) return 0.0;
    return diff / std::max(std::abs(a), std::abs(b));
}

std::string format(const char* fmt, double a, double b, double c) {
    char buf[160];
    std::snprintf(buf, sizeof buf, fmt, a, b, c);
    return buf;
}

}  // namespace

CheckReport check_spanning_identity(std::size_t trials, std::uint64_t seed) {
    std::vector<double> errors(trials + 2, 0.0);
    parallel_for(trials, [&](std::size_t t) {
        Rng rng = seeded_rng(seed, t);
        const std::size_t m = 4 + static_cast<std::size_t>(rng.below(57));
        const std::size_t d = 1 + static_cast<std::size_t>(rng.below(50));
        const double scale = std::exp2(static_cast<double>(rng.below(21)) - 10.0);
        const auto block = random_block(m, d, scale, 0.0, rng);
        errors[t] = relative_error(complete_spanning_distance(block), complete_spanning_distance_pairwise(block));
    });

    Rng rng = seeded_rng(seed, trials);
    const auto shifted = random_block(30, 20, 1.0, 1e6, rng);
    errors[trials] = relative_error(complete_spanning_distance(shifted), complete_spanning_distance_pairwise(shifted));

    const std::vector<Observation> zeros(12, Observation(std::vector<double>(5, 0.0)));
    const double zero_fast = complete_spanning_distance(zeros);
    const double zero_pairwise = complete_spanning_distance_pairwise(zeros);
    errors[trials + 1] = (zero_fast == 0.0 && zero_pairwise == 0.0) ? 0.0 : 1.0;

    CheckReport report;
    report.name = "spanning_identity";
    report.measured = *std::max_element(errors.begin(), errors.end());
    report.target = 0.0;
    report.tolerance = kIdentityTolerance;
    report.passed = report.measured <= kIdentityTolerance;
    report.detail = std::to_string(trials) + " random blocks, offset 1e6 block, zero block";
    return report;
}

CheckReport check_dg_moments(std::size_t m, std::size_t d, double sigma, std::size_t trials,
                             std::uint64_t seed) {
    if (trials < 2000) throw InvalidArgument("check_dg_moments needs at least 2000 trials");
    if (m < 2 || d < 1 || !(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw InvalidArgument("check_dg_moments: need m >= 2, d >= 1 and finite sigma >= 0");
    }
    std::vector<double> values(trials);
    parallel_for(trials, [&](std::size_t t) {
        Rng rng = seeded_rng(seed, t);
        values[t] = complete_spanning_distance(random_block(m, d, sigma, 0.0, rng));
    });

    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= static_cast<double>(trials);
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / static_cast<double>(trials - 1) / static_cast<double>(trials));

    const double pairs = static_cast<double>(m * (m - 1) / 2);
    CheckReport report;
    report.name = "dg_moments";
    report.measured = mean;
    report.target = pairs * 2.0 * static_cast<double>(d) * sigma * sigma;
    report.tolerance = 3.0 * se;
    report.passed = std::abs(mean - report.target) <= report.tolerance;
    report.detail = "m=" + std::to_string(m) + " d=" + std::to_string(d) +
                    format(" sigma=%g trials=%.0f se=%g", sigma, static_cast<double>(trials), se);
    return report;
}

double null_rejection_rate(const NullRateSpec& spec, std::uint64_t seed) {
    spec.window.validate();
    if (spec.dimension < 1) throw ConfigError("dimension must be >= 1");
    if (spec.trials < 1) throw ConfigError("trials must be >= 1");
    const std::size_t longest = spec.window.max_length();
    const std::size_t d = spec.dimension;

    std::vector<char> rejected(spec.trials, 0);
    if (spec.mode == CalibrationMode::Static) {
        parallel_for(spec.trials, [&](std::size_t t) {
            Rng rng = seeded_rng(seed, stream_key({t, 1}));
            const auto training = generate(Scenario::none(d, longest), rng);
            const auto block = generate(Scenario::none(d, longest), rng);
            WindowConfig config = spec.window;
            config.seed = stream_key({seed, t, 2});
            const auto table = calibrate(training, config, CalibrationMode::Static);
            bool any = false;
            for (const auto n : config.lengths) {
                const Block tail(block.data() + (longest - n), n);
                any = any || static_detect(tail, table).outcome == Outcome::Reject;
            }
            rejected[t] = any;
        });
    } else {
        const std::size_t training_length = spec.training_length ? spec.training_length : 2 * longest;
        const std::size_t monitor_length = spec.monitor_length ? spec.monitor_length : longest;
        parallel_for(spec.trials, [&](std::size_t t) {
            Rng rng = seeded_rng(seed, stream_key({t, 3}));
            DetectorConfig config;
            config.window = spec.window;
            config.window.seed = stream_key({seed, t, 4});
            config.training_length = training_length;
            OnlineDetector detector(config);
            for (const auto& y : generate(Scenario::none(d, training_length), rng)) detector.train(y);
            bool hit = false;
            for (const auto& y : generate(Scenario::none(d, monitor_length), rng)) {
                if (detector.step(y)) {
                    hit = true;
                    break;
                }
            }
            rejected[t] = hit;
        });
    }
    const auto hits = std::count(rejected.begin(), rejected.end(), 1);
    return static_cast<double>(hits) / static_cast<double>(spec.trials);
}

CheckReport check_null_rates(const NullRateSpec& spec, std::uint64_t seed) {
    if (spec.trials < 500) throw InvalidArgument("check_null_rates needs at least 500 trials");
    const double alpha = spec.window.alpha;
    CheckReport report;
    report.name = std::string("null_rate_") + std::string(to_string(spec.mode));
    report.measured = null_rejection_rate(spec, seed);
    report.target = alpha;
    report.tolerance = 2.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(spec.trials));
    report.passed = report.measured <= alpha + report.tolerance;
    std::string windows;
    for (const auto n : spec.window.lengths) windows += (windows.empty() ? "" : ",") + std::to_string(n);
    report.detail = "windows=" + windows + " d=" + std::to_string(spec.dimension) +
                    " trials=" + std::to_string(spec.trials) + " graph=" + std::string(to_string(spec.window.graph));
    return report;
}

nlohmann::json report_to_json(const CheckReport& report) {
    return {{"name", report.name},     {"passed", report.passed},       {"measured", report.measured},
            {"target", report.target}, {"tolerance", report.tolerance}, {"detail", report.detail}};
}

nlohmann::json SelfCheckSummary::to_json() const {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& r : reports) checks.push_back(report_to_json(r));
    return {{"tool_version", kVersion}, {"passed", passed}, {"checks", checks}};
}

SelfCheckSummary run_self_check(std::uint64_t seed) {
    SelfCheckSummary summary;
    summary.reports.push_back(check_spanning_identity(1000, seed));
    summary.reports.push_back(check_dg_moments(10, 5, 1.0, 2000, seed));

    NullRateSpec fixed;
    fixed.window.lengths = {40};
    fixed.window.alpha = 0.05;
    fixed.window.permutations = 200;
    fixed.dimension = 10;
    fixed.trials = 500;
    summary.reports.push_back(check_null_rates(fixed, seed));

    NullRateSpec streaming;
    streaming.mode = CalibrationMode::Online;
    streaming.window.lengths = {40, 70, 100};
    streaming.window.alpha = 0.10;
    streaming.window.permutations = 200;
    streaming.dimension = 10;
    streaming.trials = 500;
    summary.reports.push_back(check_null_rates(streaming, seed));

    summary.passed = std::all_of(summary.reports.begin(), summary.reports.end(),
                                 [](const CheckReport& r) { return r.passed; });
    return summary;
}

}  // namespace gsrcpd
