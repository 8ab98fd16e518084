#include "gsrcpd/calibrate.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>

#include "gsrcpd/graph.hpp"
#include "gsrcpd/gsr.hpp"
#include "gsrcpd/parallel.hpp"

namespace gsrcpd {

namespace {

constexpr std::size_t kMaxAttemptsPerPermutation = 32;

// Training sample prepared once and shared by every permutation: centered
// coordinates for the complete-graph identity, or a distance matrix for MST.
class TrainingSpans {
public:
    TrainingSpans(Block training, GraphKind kind) : kind_(kind), size_(training.size()) {
        dimension_ = training.front().dimension();
        require_dimension(training, dimension_);
        if (kind_ == GraphKind::Complete) {
            std::vector<double> mean(dimension_, 0.0);
            for (const auto& y : training) {
                for (std::size_t k = 0; k < dimension_; ++k) mean[k] += y[k];
            }
            for (auto& v : mean) v /= static_cast<double>(size_);
            centered_.resize(size_ * dimension_);
            for (std::size_t i = 0; i < size_; ++i) {
                for (std::size_t k = 0; k < dimension_; ++k) {
                    centered_[i * dimension_ + k] = training[i][k] - mean[k];
                }
            }
        } else {
            matrix_.emplace(training);
        }
    }

    std::size_t size() const { return size_; }

    // Per-permutation view over the first `len` entries of a shuffled order.
    class Ordered {
    public:
        Ordered(const TrainingSpans& owner, std::span<const std::size_t> order, std::size_t len)
            : owner_(owner), order_(order.first(len)) {
            if (owner_.kind_ != GraphKind::Complete) return;
            const std::size_t d = owner_.dimension_;
            norms_.assign(len + 1, 0.0);
            sums_.assign((len + 1) * d, 0.0);
            for (std::size_t i = 0; i < len; ++i) {
                const double* y = &owner_.centered_[order_[i] * d];
                double norm = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    norm += y[k] * y[k];
                    sums_[(i + 1) * d + k] = sums_[i * d + k] + y[k];
                }
                norms_[i + 1] = norms_[i] + norm;
            }
        }

        // Spanning distance of positions [begin, end) of the order.
        double span(std::size_t begin, std::size_t end) const {
            const std::size_t m = end - begin;
            if (owner_.kind_ == GraphKind::Complete) {
                const std::size_t d = owner_.dimension_;
                double sum_norm = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    const double s = sums_[end * d + k] - sums_[begin * d + k];
                    sum_norm += s * s;
                }
                const double value = static_cast<double>(m) * (norms_[end] - norms_[begin]) - sum_norm;
                return value > 0.0 ? value : 0.0;
            }
            const auto& matrix = *owner_.matrix_;
            return prim_mst(m, [&](std::size_t a, std::size_t b) {
                return matrix(order_[begin + a], order_[begin + b]);
            });
        }

        SplitStatistics window(std::size_t start, std::size_t n) const {
            const std::size_t half = n / 2;
            const SpanningDistances spans{span(start, start + n), span(start, start + half),
                                          span(start + half, start + n)};
            return split_statistics(spans, start + half);
        }

    private:
        const TrainingSpans& owner_;
        std::span<const std::size_t> order_;
        std::vector<double> norms_;
        std::vector<double> sums_;
    };

private:
    GraphKind kind_;
    std::size_t size_ = 0;
    std::size_t dimension_ = 0;
    std::vector<double> centered_;
    std::optional<DistanceMatrix> matrix_;
};

void check_lengths(std::span<const std::size_t> lengths, std::size_t training_size, const char* what) {
    if (lengths.empty()) throw InvalidArgument(std::string(what) + ": no window lengths");
    for (const auto n : lengths) {
        if (n % 2 != 0 || n < 4) {
            throw InvalidArgument(std::string(what) + ": window length " + std::to_string(n) +
                                  " must be even and >= 4");
        }
        if (n > training_size) {
            throw InvalidArgument(std::string(what) + ": training sample of " +
                                  std::to_string(training_size) + " is shorter than window " +
                                  std::to_string(n));
        }
    }
}

// Shared driver: shuffles per permutation with redraws on degenerate samples.
// `score(ordered, row)` fills one row of statistics or throws DegenerateWindow.
template <typename Score>
PermutationDraws run_permutations(Block training, std::span<const std::size_t> lengths,
                                  std::size_t permutations, GraphKind kind, std::uint64_t seed,
                                  std::size_t prefix_len, Score&& score) {
    if (permutations < 1) throw InvalidArgument("permutation count must be >= 1");
    const TrainingSpans spans(training, kind);

    PermutationDraws draws;
    draws.lengths.assign(lengths.begin(), lengths.end());
    draws.permutations = permutations;
    draws.values.assign(permutations * draws.pair_count(), 0.0);

    std::vector<std::size_t> degenerate(permutations, 0);
    std::vector<char> exhausted(permutations, 0);

    parallel_for(permutations, [&](std::size_t b) {
        Rng rng = seeded_rng(seed, b);
        std::vector<std::size_t> order(spans.size());
        std::span<double> row(&draws.values[b * draws.pair_count()], draws.pair_count());
        for (std::size_t attempt = 0; attempt < kMaxAttemptsPerPermutation; ++attempt) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            shuffle(std::span<std::size_t>(order), rng);
            const TrainingSpans::Ordered ordered(spans, order, prefix_len);
            try {
                score(ordered, row);
                return;
            } catch (const DegenerateWindow&) {
                ++degenerate[b];
            }
        }
        exhausted[b] = 1;
    });

    draws.degenerate_draws = std::accumulate(degenerate.begin(), degenerate.end(), std::size_t{0});
    const std::size_t attempts = draws.degenerate_draws + permutations;
    const bool any_exhausted = std::find(exhausted.begin(), exhausted.end(), 1) != exhausted.end();
    if (any_exhausted || 2 * draws.degenerate_draws > attempts) {
        throw CalibrationError("permutation null is degenerate: " +
                               std::to_string(draws.degenerate_draws) + " of " +
                               std::to_string(attempts) +
                               " draws had a window half spanning zero distance");
    }
    return draws;
}

}  // namespace

std::string_view to_string(CalibrationMode mode) {
    return mode == CalibrationMode::Static ? "static" : "online";
}

CalibrationMode parse_calibration_mode(std::string_view text) {
    if (text == "static") return CalibrationMode::Static;
    if (text == "online") return CalibrationMode::Online;
    throw ConfigError("unknown calibration mode '" + std::string(text) + "'");
}

std::vector<double> PermutationDraws::sorted_column(std::size_t pair) const {
    std::vector<double> column(permutations);
    for (std::size_t b = 0; b < permutations; ++b) column[b] = at(b, pair);
    std::sort(column.begin(), column.end());
    return column;
}

std::vector<Observation> permute(Block block, Rng& rng) {
    std::vector<Observation> out(block.begin(), block.end());
    shuffle(std::span<Observation>(out), rng);
    return out;
}

PermutationDraws static_null(Block training, std::span<const std::size_t> lengths,
                             std::size_t permutations, GraphKind kind, std::uint64_t seed) {
    check_lengths(lengths, training.size(), "static_null");
    const std::size_t longest = *std::max_element(lengths.begin(), lengths.end());
    return run_permutations(training, lengths, permutations, kind, seed, longest,
                            [&](const TrainingSpans::Ordered& ordered, std::span<double> row) {
                                for (std::size_t w = 0; w < lengths.size(); ++w) {
                                    const auto stats = ordered.window(0, lengths[w]);
                                    row[2 * w] = stats.t_mu;
                                    row[2 * w + 1] = stats.t_sigma;
                                }
                            });
}

PermutationDraws online_null(Block training, std::span<const std::size_t> lengths,
                             std::size_t permutations, GraphKind kind, std::uint64_t seed) {
    check_lengths(lengths, training.size(), "online_null");
    const std::size_t total = training.size();
    return run_permutations(training, lengths, permutations, kind, seed, total,
                            [&](const TrainingSpans::Ordered& ordered, std::span<double> row) {
                                for (std::size_t w = 0; w < lengths.size(); ++w) {
                                    const std::size_t n = lengths[w];
                                    double max_mu = -std::numeric_limits<double>::infinity();
                                    double max_sigma = max_mu;
                                    for (std::size_t start = 0; start + n <= total; ++start) {
                                        const auto stats = ordered.window(start, n);
                                        max_mu = std::max(max_mu, stats.t_mu);
                                        max_sigma = std::max(max_sigma, stats.t_sigma);
                                    }
                                    row[2 * w] = max_mu;
                                    row[2 * w + 1] = max_sigma;
                                }
                            });
}

double quantile_threshold(std::span<const double> sorted, double z) {
    if (sorted.empty()) throw InvalidArgument("quantile_threshold: empty vector");
    if (!(z > 0.0 && z < 1.0)) throw InvalidArgument("quantile_threshold: level must lie in (0, 1)");
    const auto k = static_cast<double>(sorted.size());
    // The small offset keeps exact products such as 0.96 * 100 from rounding up.
    const double rank = std::ceil((1.0 - z) * (k + 1.0) - 1e-9);
    const auto r = static_cast<std::size_t>(std::clamp(rank, 1.0, k));
    return sorted[r - 1];
}

double family_exceedance(const PermutationDraws& draws,
                         const std::vector<std::vector<double>>& sorted, double z) {
    std::vector<double> thresholds(sorted.size());
    for (std::size_t p = 0; p < sorted.size(); ++p) thresholds[p] = quantile_threshold(sorted[p], z);
    std::size_t exceed = 0;
    for (std::size_t b = 0; b < draws.permutations; ++b) {
        for (std::size_t p = 0; p < thresholds.size(); ++p) {
            if (draws.at(b, p) >= thresholds[p]) {
                ++exceed;
                break;
            }
        }
    }
    return static_cast<double>(exceed) / static_cast<double>(draws.permutations);
}

AlphaStar calibrate_alpha_star(const PermutationDraws& draws, double alpha, AlphaStarRule rule) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
    if (draws.permutations == 0) throw InvalidArgument("calibrate_alpha_star: no permutations");
    const std::size_t pairs = draws.pair_count();
    if (pairs <= 1) return AlphaStar{alpha, false};

    std::vector<std::vector<double>> sorted(pairs);
    for (std::size_t p = 0; p < pairs; ++p) sorted[p] = draws.sorted_column(p);
    const auto k = static_cast<double>(draws.permutations);

    auto acceptable = [&](double z) {
        if (rule == AlphaStarRule::FamilyWise) {
            return family_exceedance(draws, sorted, z) <= alpha;
        }
        for (std::size_t p = 0; p < pairs; ++p) {
            const double threshold = quantile_threshold(sorted[p], z);
            std::size_t above = 0;
            for (std::size_t b = 0; b < draws.permutations; ++b) {
                if (draws.at(b, p) > threshold) ++above;
            }
            if (static_cast<double>(above) / k < alpha) return true;
        }
        return false;
    };

    if (acceptable(alpha)) return AlphaStar{alpha, false};

    const double resolution = alpha / 64.0;
    double high = alpha;
    double low = 0.0;
    bool found = false;
    for (double z = alpha / 2.0; z >= resolution * (1.0 - 1e-12); z /= 2.0) {
        if (acceptable(z)) {
            low = z;
            found = true;
            break;
        }
        high = z;
    }
    if (!found) {
        return AlphaStar{alpha / (2.0 * static_cast<double>(draws.lengths.size())), true};
    }
    while (high - low > resolution) {
        const double mid = 0.5 * (low + high);
        (acceptable(mid) ? low : high) = mid;
    }
    return AlphaStar{low, false};
}

bool CalibrationTable::has_window(std::size_t length) const {
    return std::any_of(windows.begin(), windows.end(),
                       [&](const WindowThresholds& w) { return w.length == length; });
}

const WindowThresholds& CalibrationTable::window(std::size_t length) const {
    for (const auto& w : windows) {
        if (w.length == length) return w;
    }
    throw InvalidArgument("calibration has no window of length " + std::to_string(length));
}

double CalibrationTable::threshold(std::size_t length, Statistic statistic) const {
    const auto& w = window(length);
    return statistic == Statistic::Mu ? w.rho_mu : w.rho_sigma;
}

CalibrationTable calibrate(Block training, const WindowConfig& config, CalibrationMode mode) {
    config.validate();
    if (training.empty()) throw InvalidArgument("calibrate: empty training sample");
    const std::size_t d = training.front().dimension();
    require_dimension(training, d);

    const PermutationDraws draws =
        mode == CalibrationMode::Static
            ? static_null(training, config.lengths, config.permutations, config.graph, config.seed)
            : online_null(training, config.lengths, config.permutations, config.graph, config.seed);
    const AlphaStar alpha_star = calibrate_alpha_star(draws, config.alpha, config.alpha_star_rule);

    CalibrationTable table;
    table.mode = mode;
    table.config = config;
    table.config_hash = config_hash(config);
    table.alpha_star = alpha_star.value;
    table.bonferroni_fallback = alpha_star.bonferroni_fallback;
    table.training_length = training.size();
    table.dimension = d;
    table.degenerate_draws = draws.degenerate_draws;
    for (std::size_t w = 0; w < config.lengths.size(); ++w) {
        WindowThresholds entry;
        entry.length = config.lengths[w];
        entry.mu_values = draws.sorted_column(2 * w);
        entry.sigma_values = draws.sorted_column(2 * w + 1);
        entry.rho_mu = quantile_threshold(entry.mu_values, alpha_star.value);
        entry.rho_sigma = quantile_threshold(entry.sigma_values, alpha_star.value);
        table.windows.push_back(std::move(entry));
    }
    return table;
}

std::string config_hash(const WindowConfig& config) {
    std::string canonical = "lengths=";
    for (std::size_t i = 0; i < config.lengths.size(); ++i) {
        if (i) canonical += ',';
        canonical += std::to_string(config.lengths[i]);
    }
    char alpha[64];
    std::snprintf(alpha, sizeof alpha, "%.17g", config.alpha);
    canonical += ";alpha=";
    canonical += alpha;
    canonical += ";permutations=" + std::to_string(config.permutations);
    canonical += ";graph=" + std::string(to_string(config.graph));
    canonical += ";rule=" + std::string(to_string(config.alpha_star_rule));

    // FNV-1a, 64 bit.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016" PRIx64, h);
    return hex;
}

nlohmann::json window_config_to_json(const WindowConfig& config) {
    return nlohmann::json{{"windows", config.lengths},
                          {"alpha", config.alpha},
                          {"permutations", config.permutations},
                          {"graph", to_string(config.graph)},
                          {"seed", config.seed},
                          {"alpha_star_rule", to_string(config.alpha_star_rule)}};
}

WindowConfig window_config_from_json(const nlohmann::json& j) {
    WindowConfig config;
    try {
        if (j.contains("windows")) config.lengths = j.at("windows").get<std::vector<std::size_t>>();
        if (j.contains("alpha")) config.alpha = j.at("alpha").get<double>();
        if (j.contains("permutations")) config.permutations = j.at("permutations").get<std::size_t>();
        if (j.contains("graph")) config.graph = parse_graph_kind(j.at("graph").get<std::string>());
        if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("alpha_star_rule")) {
            config.alpha_star_rule = parse_alpha_star_rule(j.at("alpha_star_rule").get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed window configuration: ") + e.what());
    }
    return config;
}

nlohmann::json calibration_to_json(const CalibrationTable& table) {
    nlohmann::json windows = nlohmann::json::array();
    for (const auto& w : table.windows) {
        windows.push_back({{"length", w.length},
                           {"rho_mu", w.rho_mu},
                           {"rho_sigma", w.rho_sigma},
                           {"mu_values", w.mu_values},
                           {"sigma_values", w.sigma_values}});
    }
    return nlohmann::json{{"format", "gsrcpd.calibration"},
                          {"version", kCalibrationFormatVersion},
                          {"tool_version", kVersion},
                          {"config_hash", table.config_hash},
                          {"mode", to_string(table.mode)},
                          {"config", window_config_to_json(table.config)},
                          {"seed", table.config.seed},
                          {"training_length", table.training_length},
                          {"dimension", table.dimension},
                          {"alpha_star", table.alpha_star},
                          {"bonferroni_fallback", table.bonferroni_fallback},
                          {"degenerate_draws", table.degenerate_draws},
                          {"windows", windows}};
}

CalibrationTable calibration_from_json(const nlohmann::json& j) {
    CalibrationTable table;
    try {
        if (j.at("format").get<std::string>() != "gsrcpd.calibration") {
            throw CalibrationError("not a calibration document");
        }
        const int version = j.at("version").get<int>();
        if (version != kCalibrationFormatVersion) {
            throw CalibrationError("unsupported calibration format version " + std::to_string(version));
        }
        table.mode = parse_calibration_mode(j.at("mode").get<std::string>());
        table.config = window_config_from_json(j.at("config"));
        table.config.validate();
        table.config_hash = j.at("config_hash").get<std::string>();
        table.alpha_star = j.at("alpha_star").get<double>();
        table.bonferroni_fallback = j.at("bonferroni_fallback").get<bool>();
        table.training_length = j.at("training_length").get<std::size_t>();
        table.dimension = j.at("dimension").get<std::size_t>();
        table.degenerate_draws = j.at("degenerate_draws").get<std::size_t>();
        for (const auto& w : j.at("windows")) {
            WindowThresholds entry;
            entry.length = w.at("length").get<std::size_t>();
            entry.rho_mu = w.at("rho_mu").get<double>();
            entry.rho_sigma = w.at("rho_sigma").get<double>();
            entry.mu_values = w.at("mu_values").get<std::vector<double>>();
            entry.sigma_values = w.at("sigma_values").get<std::vector<double>>();
            table.windows.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw CalibrationError(std::string("malformed calibration document: ") + e.what());
    } catch (const ConfigError& e) {
        throw CalibrationError(std::string("calibration carries an invalid configuration: ") + e.what());
    }

    if (config_hash(table.config) != table.config_hash) {
        throw CalibrationError("calibration hash does not match its embedded configuration");
    }
    if (!(table.alpha_star > 0.0 && table.alpha_star <= table.config.alpha)) {
        throw CalibrationError("calibration alpha* outside (0, alpha]");
    }
    if (table.windows.size() != table.config.lengths.size()) {
        throw CalibrationError("calibration window count does not match its configuration");
    }
    for (std::size_t w = 0; w < table.windows.size(); ++w) {
        const auto& entry = table.windows[w];
        if (entry.length != table.config.lengths[w]) {
            throw CalibrationError("calibration window lengths do not match its configuration");
        }
        for (const auto* values : {&entry.mu_values, &entry.sigma_values}) {
            if (values->size() != table.config.permutations ||
                !std::is_sorted(values->begin(), values->end())) {
                throw CalibrationError("calibration window " + std::to_string(entry.length) +
                                       " has a malformed permutation vector");
            }
        }
    }
    return table;
}

}  // namespace gsrcpd
