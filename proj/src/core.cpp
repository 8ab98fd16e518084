#include "gsrcpd/core.hpp"

#include <algorithm>
#include <cmath>

namespace gsrcpd {

Observation::Observation(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw InvalidArgument("observation must have dimension >= 1");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw InvalidArgument("observation coordinate " + std::to_string(i) + " is not finite");
        }
    }
}

Observation::Observation(std::initializer_list<double> values)
    : Observation(std::vector<double>(values)) {}

void require_dimension(Block block, std::size_t d) {
    for (std::size_t i = 0; i < block.size(); ++i) {
        if (block[i].dimension() != d) {
            throw DimensionMismatch("observation " + std::to_string(i) + " has dimension " +
                                    std::to_string(block[i].dimension()) + ", expected " +
                                    std::to_string(d));
        }
    }
}

std::string_view to_string(GraphKind kind) {
    return kind == GraphKind::Complete ? "complete" : "mst";
}

std::string_view to_string(Statistic statistic) {
    return statistic == Statistic::Mu ? "mu" : "sigma";
}

std::string_view to_string(AlphaStarRule rule) {
    return rule == AlphaStarRule::FamilyWise ? "familywise" : "literal";
}

GraphKind parse_graph_kind(std::string_view text) {
    if (text == "complete" || text == "cg") return GraphKind::Complete;
    if (text == "mst") return GraphKind::Mst;
    throw ConfigError("unknown graph kind '" + std::string(text) + "' (expected complete|mst)");
}

Statistic parse_statistic(std::string_view text) {
    if (text == "mu") return Statistic::Mu;
    if (text == "sigma") return Statistic::Sigma;
    throw ConfigError("unknown statistic '" + std::string(text) + "'");
}

AlphaStarRule parse_alpha_star_rule(std::string_view text) {
    if (text == "familywise") return AlphaStarRule::FamilyWise;
    if (text == "literal") return AlphaStarRule::Literal;
    throw ConfigError("unknown alpha* rule '" + std::string(text) + "'");
}

void WindowConfig::validate() const {
    if (lengths.empty()) {
        throw ConfigError("at least one window length is required");
    }
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        const auto n = lengths[i];
        if (n % 2 != 0) {
            throw ConfigError("window length " + std::to_string(n) + " is odd; lengths must be even");
        }
        if (n < 4) {
            throw ConfigError("window length " + std::to_string(n) + " is below the minimum of 4");
        }
        if (i > 0 && lengths[i - 1] >= n) {
            throw ConfigError("window lengths must be strictly increasing");
        }
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError("alpha must lie in (0, 1)");
    }
    if (permutations < 1) {
        throw ConfigError("permutation count must be >= 1");
    }
}

std::size_t WindowConfig::max_length() const {
    return lengths.empty() ? 0 : *std::max_element(lengths.begin(), lengths.end());
}

std::size_t WindowConfig::min_length() const {
    return lengths.empty() ? 0 : *std::min_element(lengths.begin(), lengths.end());
}

}  // namespace gsrcpd
