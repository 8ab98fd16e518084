#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gsrcpd {

inline constexpr std::string_view kVersion = "1.0.0";

// Error hierarchy. Everything thrown by the library derives from Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// A window whose halves span zero distance; the GSR ratios are undefined there.
class DegenerateWindow : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class StateError : public Error {
public:
    using Error::Error;
};

/// One d-dimensional sample from the stream. Always non-empty and finite.
class Observation {
public:
    explicit Observation(std::vector<double> values);
    Observation(std::initializer_list<double> values);

    std::size_t dimension() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    friend bool operator==(const Observation&, const Observation&) = default;

private:
    std::vector<double> values_;
};

using Block = std::span<const Observation>;

// Throws DimensionMismatch unless every observation has dimension `d`.
void require_dimension(Block block, std::size_t d);

enum class GraphKind { Complete, Mst };
enum class Statistic { Mu, Sigma };

// FamilyWise: simultaneous control over every (window, statistic) pair.
// Literal: the existential reading, which in practice yields the per-test level.
enum class AlphaStarRule { FamilyWise, Literal };

std::string_view to_string(GraphKind kind);
std::string_view to_string(Statistic statistic);
std::string_view to_string(AlphaStarRule rule);
GraphKind parse_graph_kind(std::string_view text);
Statistic parse_statistic(std::string_view text);
AlphaStarRule parse_alpha_star_rule(std::string_view text);

struct WindowConfig {
    std::vector<std::size_t> lengths{40, 70, 100};
    double alpha = 0.05;
    std::size_t permutations = 500;
    GraphKind graph = GraphKind::Complete;
    std::uint64_t seed = 42;
    AlphaStarRule alpha_star_rule = AlphaStarRule::FamilyWise;

    // Lengths must be even, >= 4 and strictly increasing; 0 < alpha < 1; k >= 1.
    void validate() const;
    std::size_t max_length() const;
    std::size_t min_length() const;
};

struct SplitStatistics {
    double t_mu = 0.0;
    double t_sigma = 0.0;
    std::size_t split_index = 0;
};

struct DetectionEvent {
    std::size_t stream_index = 0;
    std::size_t window_length = 0;
    Statistic statistic = Statistic::Mu;
    double value = 0.0;
    double threshold = 0.0;
    std::size_t estimated_change_point = 0;

    friend bool operator==(const DetectionEvent&, const DetectionEvent&) = default;
};

}  // namespace gsrcpd
