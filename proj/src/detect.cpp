#include "gsrcpd/detect.hpp"

#include <algorithm>

#include "gsrcpd/graph.hpp"
#include "gsrcpd/gsr.hpp"

namespace gsrcpd {

namespace {

nlohmann::json observations_to_json(const std::vector<Observation>& observations) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& y : observations) {
        out.push_back(std::vector<double>(y.values().begin(), y.values().end()));
    }
    return out;
}

std::vector<Observation> observations_from_json(const nlohmann::json& j) {
    std::vector<Observation> out;
    out.reserve(j.size());
    for (const auto& row : j) out.emplace_back(row.get<std::vector<double>>());
    return out;
}

DetectorStatus parse_status(std::string_view text) {
    if (text == "training") return DetectorStatus::Training;
    if (text == "monitoring") return DetectorStatus::Monitoring;
    if (text == "triggered") return DetectorStatus::Triggered;
    throw StateError("unknown detector status '" + std::string(text) + "'");
}

}  // namespace

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::Accept: return "accept";
        case Outcome::Reject: return "reject";
        case Outcome::NoDecision: return "no_decision";
    }
    return "unknown";
}

std::string_view to_string(DetectorStatus status) {
    switch (status) {
        case DetectorStatus::Training: return "training";
        case DetectorStatus::Monitoring: return "monitoring";
        case DetectorStatus::Triggered: return "triggered";
    }
    return "unknown";
}

StaticDecision static_detect(Block test_block, const CalibrationTable& calibration) {
    if (calibration.mode != CalibrationMode::Static) {
        throw InvalidArgument("static_detect requires a static calibration");
    }
    const std::size_t n = test_block.size();
    const auto& window = calibration.window(n);
    if (calibration.dimension != 0 && !test_block.empty()) {
        require_dimension(test_block, calibration.dimension);
    }

    StaticDecision decision;
    decision.window_length = n;
    decision.rho_mu = window.rho_mu;
    decision.rho_sigma = window.rho_sigma;
    try {
        const auto stats = scan_statistics(test_block, calibration.config.graph);
        decision.statistics = stats;
        decision.outcome = (stats.t_mu >= window.rho_mu || stats.t_sigma >= window.rho_sigma)
                               ? Outcome::Reject
                               : Outcome::Accept;
    } catch (const DegenerateWindow&) {
        decision.outcome = Outcome::NoDecision;
    }
    return decision;
}

void DetectorConfig::validate() const {
    window.validate();
    if (training_length < window.max_length()) {
        throw ConfigError("training length " + std::to_string(training_length) +
                          " is shorter than the longest window " + std::to_string(window.max_length()));
    }
    if (stride < 1) throw ConfigError("stride must be >= 1");
}

OnlineDetector::OnlineDetector(DetectorConfig config) : config_(std::move(config)) {
    config_.validate();
    capacity_ = config_.window.max_length();
    if (config_.window.graph == GraphKind::Mst) ring_distances_.assign(capacity_ * capacity_, 0.0);
}

OnlineDetector::OnlineDetector(CalibrationTable calibration, std::size_t stride) {
    if (calibration.mode != CalibrationMode::Online) {
        throw InvalidArgument("OnlineDetector requires an online calibration");
    }
    config_.window = calibration.config;
    config_.training_length = calibration.training_length;
    config_.stride = stride;
    config_.validate();
    capacity_ = config_.window.max_length();
    if (config_.window.graph == GraphKind::Mst) ring_distances_.assign(capacity_ * capacity_, 0.0);
    dimension_ = calibration.dimension;
    calibration_ = std::move(calibration);
    status_ = DetectorStatus::Monitoring;
}

const CalibrationTable& OnlineDetector::calibration() const {
    if (!calibration_) throw StateError("detector has not been calibrated yet");
    return *calibration_;
}

void OnlineDetector::require_dimension_of(const Observation& observation) {
    if (dimension_ == 0) {
        dimension_ = observation.dimension();
    } else if (observation.dimension() != dimension_) {
        throw DimensionMismatch("observation " + std::to_string(consumed_) + " has dimension " +
                                std::to_string(observation.dimension()) + ", stream dimension is " +
                                std::to_string(dimension_));
    }
}

std::optional<DetectionEvent> OnlineDetector::push(const Observation& observation) {
    switch (status_) {
        case DetectorStatus::Training:
            train(observation);
            return std::nullopt;
        case DetectorStatus::Monitoring:
            return step(observation);
        case DetectorStatus::Triggered:
            break;
    }
    throw StateError("detector is triggered; call reset() before pushing more observations");
}

void OnlineDetector::train(const Observation& observation) {
    if (status_ != DetectorStatus::Training) throw StateError("train() called outside Training");
    require_dimension_of(observation);
    training_.push_back(observation);
    ++consumed_;
    if (training_.size() < config_.training_length) return;

    calibration_ = calibrate(training_, config_.window, CalibrationMode::Online);
    if (calibration_->bonferroni_fallback) {
        log("alpha* search failed; using the Bonferroni level");
    }
    training_.clear();
    training_.shrink_to_fit();
    status_ = DetectorStatus::Monitoring;
    since_training_ = 0;
}

void OnlineDetector::append(const Observation& observation) {
    require_dimension_of(observation);
    const std::size_t index = consumed_;
    if (!ring_distances_.empty()) {
        const std::size_t slot = index % capacity_;
        const std::size_t first = index - buffer_.size();
        // The entry about to be evicted shares this slot and is excluded.
        const std::size_t skip = buffer_.size() == capacity_ ? 1 : 0;
        for (std::size_t i = skip; i < buffer_.size(); ++i) {
            const std::size_t other = (first + i) % capacity_;
            const double w = squared_distance(observation, buffer_[i]);
            ring_distances_[slot * capacity_ + other] = w;
            ring_distances_[other * capacity_ + slot] = w;
        }
        ring_distances_[slot * capacity_ + slot] = 0.0;
    }
    if (buffer_.size() == capacity_) buffer_.erase(buffer_.begin());
    buffer_.push_back(observation);
    ++consumed_;
    ++since_training_;
}

double OnlineDetector::window_distance(std::size_t window, std::size_t a, std::size_t b) const {
    const std::size_t first = consumed_ - window;
    const std::size_t sa = (first + a) % capacity_;
    const std::size_t sb = (first + b) % capacity_;
    return ring_distances_[sa * capacity_ + sb];
}

SplitStatistics OnlineDetector::window_statistics(std::size_t n) const {
    const std::size_t split = n / 2;
    if (config_.window.graph == GraphKind::Complete) {
        const Block window = Block(buffer_).last(n);
        return split_statistics(build_window_graphs(window, split, GraphKind::Complete), split);
    }
    const auto spans = mst_window_distances(
        n, split, [&](std::size_t a, std::size_t b) { return window_distance(n, a, b); });
    return split_statistics(spans, split);
}

std::optional<DetectionEvent> OnlineDetector::step(const Observation& observation) {
    if (status_ != DetectorStatus::Monitoring) throw StateError("step() called outside Monitoring");
    append(observation);
    exceedances_.clear();
    if (since_training_ % config_.stride != 0) return std::nullopt;

    const auto& table = *calibration_;
    for (const auto n : config_.window.lengths) {
        if (since_training_ < n) break;
        SplitStatistics stats;
        try {
            stats = window_statistics(n);
        } catch (const DegenerateWindow& e) {
            ++degenerate_skips_;
            log("window " + std::to_string(n) + " at stream index " + std::to_string(consumed_ - 1) +
                " skipped: " + e.what());
            continue;
        }
        const auto& thresholds = table.window(n);
        if (stats.t_mu >= thresholds.rho_mu) {
            exceedances_.push_back({n, Statistic::Mu, stats.t_mu, thresholds.rho_mu});
        }
        if (stats.t_sigma >= thresholds.rho_sigma) {
            exceedances_.push_back({n, Statistic::Sigma, stats.t_sigma, thresholds.rho_sigma});
        }
    }
    if (exceedances_.empty()) return std::nullopt;

    // Lengths are ascending, so the first exceedance has the smallest window.
    const auto& hit = exceedances_.front();
    DetectionEvent event;
    event.stream_index = consumed_ - 1;
    event.window_length = hit.window_length;
    event.statistic = hit.statistic;
    event.value = hit.value;
    event.threshold = hit.threshold;
    event.estimated_change_point = event.stream_index - hit.window_length / 2;
    for (const auto& e : exceedances_) {
        log("exceedance: window " + std::to_string(e.window_length) + " " +
            std::string(to_string(e.statistic)) + " " + std::to_string(e.value) +
            " >= " + std::to_string(e.threshold));
    }
    status_ = DetectorStatus::Triggered;
    if (sink_) sink_(event);
    return event;
}

void OnlineDetector::prefill(const Observation& observation) {
    if (status_ != DetectorStatus::Monitoring) throw StateError("prefill() called outside Monitoring");
    append(observation);
}

void OnlineDetector::reset() {
    if (status_ != DetectorStatus::Triggered) throw StateError("reset() requires a triggered detector");
    buffer_.clear();
    since_training_ = 0;
    exceedances_.clear();
    status_ = DetectorStatus::Monitoring;
}

void OnlineDetector::log(const std::string& message) const {
    if (log_) log_(message);
}

nlohmann::json OnlineDetector::checkpoint() const {
    return nlohmann::json{
        {"format", "gsrcpd.detector"},
        {"version", kDetectorStateVersion},
        {"tool_version", kVersion},
        {"config",
         {{"window", window_config_to_json(config_.window)},
          {"training_length", config_.training_length},
          {"stride", config_.stride}}},
        {"status", to_string(status_)},
        {"dimension", dimension_},
        {"observations_seen", consumed_},
        {"observations_since_training", since_training_},
        {"degenerate_skips", degenerate_skips_},
        {"training", observations_to_json(training_)},
        {"buffer", observations_to_json(buffer_)},
        {"calibration", calibration_ ? calibration_to_json(*calibration_) : nlohmann::json(nullptr)}};
}

OnlineDetector OnlineDetector::restore(const nlohmann::json& state) {
    try {
        if (state.at("format").get<std::string>() != "gsrcpd.detector") {
            throw StateError("not a detector checkpoint");
        }
        if (state.at("version").get<int>() != kDetectorStateVersion) {
            throw StateError("unsupported detector checkpoint version");
        }
        DetectorConfig config;
        const auto& c = state.at("config");
        config.window = window_config_from_json(c.at("window"));
        config.training_length = c.at("training_length").get<std::size_t>();
        config.stride = c.at("stride").get<std::size_t>();

        OnlineDetector detector(config);
        detector.status_ = parse_status(state.at("status").get<std::string>());
        detector.dimension_ = state.at("dimension").get<std::size_t>();
        detector.degenerate_skips_ = state.at("degenerate_skips").get<std::size_t>();
        detector.training_ = observations_from_json(state.at("training"));
        if (!state.at("calibration").is_null()) {
            detector.calibration_ = calibration_from_json(state.at("calibration"));
        }
        if (detector.status_ != DetectorStatus::Training && !detector.calibration_) {
            throw StateError("checkpoint is past training but carries no calibration");
        }

        // Replay the buffer so the MST distance ring is rebuilt.
        const auto buffer = observations_from_json(state.at("buffer"));
        const std::size_t seen = state.at("observations_seen").get<std::size_t>();
        const std::size_t since = state.at("observations_since_training").get<std::size_t>();
        if (buffer.size() > detector.capacity_ || buffer.size() > seen || buffer.size() > since) {
            throw StateError("checkpoint buffer is inconsistent with its counters");
        }
        detector.consumed_ = seen - buffer.size();
        detector.since_training_ = since - buffer.size();
        for (const auto& y : buffer) detector.append(y);
        return detector;
    } catch (const nlohmann::json::exception& e) {
        throw StateError(std::string("malformed detector checkpoint: ") + e.what());
    }
}

nlohmann::json event_to_json(const DetectionEvent& event) {
    return nlohmann::json{{"stream_index", event.stream_index},
                          {"window_length", event.window_length},
                          {"statistic", to_string(event.statistic)},
                          {"value", event.value},
                          {"threshold", event.threshold},
                          {"estimated_change_point", event.estimated_change_point}};
}

DetectionEvent event_from_json(const nlohmann::json& j) {
    DetectionEvent event;
    event.stream_index = j.at("stream_index").get<std::size_t>();
    event.window_length = j.at("window_length").get<std::size_t>();
    event.statistic = parse_statistic(j.at("statistic").get<std::string>());
    event.value = j.at("value").get<double>();
    event.threshold = j.at("threshold").get<double>();
    event.estimated_change_point = j.at("estimated_change_point").get<std::size_t>();
    return event;
}

}  // namespace gsrcpd
