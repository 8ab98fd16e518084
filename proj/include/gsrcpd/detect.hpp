#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gsrcpd/calibrate.hpp"
#include "gsrcpd/core.hpp"

namespace gsrcpd {

enum class Outcome { Accept, Reject, NoDecision };

std::string_view to_string(Outcome outcome);

struct StaticDecision {
    Outcome outcome = Outcome::NoDecision;
    std::size_t window_length = 0;
    std::optional<SplitStatistics> statistics;  // empty for NoDecision
    double rho_mu = 0.0;
    double rho_sigma = 0.0;
};

// Tests one block of length n against a static calibration: reject when
// t_mu >= rho_mu or t_sigma >= rho_sigma. Degenerate blocks yield NoDecision.
StaticDecision static_detect(Block test_block, const CalibrationTable& calibration);

enum class DetectorStatus { Training, Monitoring, Triggered };

std::string_view to_string(DetectorStatus status);

struct DetectorConfig {
    WindowConfig window;
    std::size_t training_length = 200;
    std::size_t stride = 1;  // evaluate every `stride`-th monitored observation

    void validate() const;
};

struct Exceedance {
    std::size_t window_length = 0;
    Statistic statistic = Statistic::Mu;
    double value = 0.0;
    double threshold = 0.0;
};

// Streaming multi-window detector.
//
// Training: the first `training_length` observations are buffered, then
// calibrated with the online permutation null. Monitoring: each new
// observation closes a trailing window of every length n that has n
// post-training observations available; the window is split at its midpoint
// and both statistics are compared with the calibrated thresholds. The first
// step with an exceedance emits one event (smallest triggering window, mu
// before sigma) and the detector stays Triggered until reset().
//
// Stream indices are zero-based and count every observation, training included.
class OnlineDetector {
public:
    using EventSink = std::function<void(const DetectionEvent&)>;
    using LogSink = std::function<void(std::string_view)>;

    explicit OnlineDetector(DetectorConfig config);
    // Starts in Monitoring with an existing online calibration.
    explicit OnlineDetector(CalibrationTable calibration, std::size_t stride = 1);

    // Routes to train() or step() by status; throws StateError when Triggered.
    std::optional<DetectionEvent> push(const Observation& observation);

    void train(const Observation& observation);
    std::optional<DetectionEvent> step(const Observation& observation);

    // Appends history while Monitoring without evaluating any window.
    void prefill(const Observation& observation);

    // Triggered -> Monitoring: clears the window buffer, keeps the calibration.
    void reset();

    void set_event_sink(EventSink sink) { sink_ = std::move(sink); }
    void set_log_sink(LogSink sink) { log_ = std::move(sink); }

    DetectorStatus status() const noexcept { return status_; }
    const DetectorConfig& config() const noexcept { return config_; }
    const CalibrationTable& calibration() const;
    std::size_t observations_seen() const noexcept { return consumed_; }
    std::size_t observations_since_training() const noexcept { return since_training_; }
    std::size_t buffered() const noexcept { return buffer_.size(); }
    std::size_t degenerate_skips() const noexcept { return degenerate_skips_; }
    const std::vector<Exceedance>& last_exceedances() const noexcept { return exceedances_; }

    nlohmann::json checkpoint() const;
    static OnlineDetector restore(const nlohmann::json& state);

private:
    void require_dimension_of(const Observation& observation);
    void append(const Observation& observation);
    double window_distance(std::size_t window, std::size_t a, std::size_t b) const;
    SplitStatistics window_statistics(std::size_t n) const;
    void log(const std::string& message) const;

    DetectorConfig config_;
    DetectorStatus status_ = DetectorStatus::Training;
    std::optional<CalibrationTable> calibration_;
    std::vector<Observation> training_;
    std::vector<Observation> buffer_;
    // MST only: squared distances between ring slots (absolute index % capacity).
    std::vector<double> ring_distances_;
    std::size_t capacity_ = 0;
    std::size_t dimension_ = 0;
    std::size_t consumed_ = 0;
    std::size_t since_training_ = 0;
    std::size_t degenerate_skips_ = 0;
    std::vector<Exceedance> exceedances_;
    EventSink sink_;
    LogSink log_;
};

inline constexpr int kDetectorStateVersion = 1;

nlohmann::json event_to_json(const DetectionEvent& event);
DetectionEvent event_from_json(const nlohmann::json& j);

}  // namespace gsrcpd
