#include "gsrcpd/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "gsrcpd/calibrate.hpp"
#include "gsrcpd/detect.hpp"
#include "gsrcpd/graph.hpp"
#include "gsrcpd/parallel.hpp"

namespace gsrcpd {

namespace {

// Sub-stream tags keep the static and online protocols on disjoint streams.
constexpr std::uint64_t kStaticTag = 0x57a71c;
constexpr std::uint64_t kOnlineTag = 0x0471e;
constexpr std::uint64_t kTrainingTag = 1;
constexpr std::uint64_t kSampleTag = 2;
constexpr std::uint64_t kPermutationTag = 3;

bool is_static(Method m) {
    return m == Method::StaticComplete || m == Method::StaticMst || m == Method::Ibgec;
}

GraphKind graph_of(Method m) {
    return (m == Method::StaticMst || m == Method::OnlineMst) ? GraphKind::Mst : GraphKind::Complete;
}

Scenario changed_or_not(ChangeKind change, bool has_change, std::size_t d, std::size_t length,
                        std::optional<double> magnitude) {
    if (!has_change || change == ChangeKind::None) return Scenario::none(d, length);
    Scenario s;
    s.dimension = d;
    s.change = change;
    s.magnitude = magnitude.value_or(default_magnitude(change, d));
    s.length = length;
    s.change_location = length / 2;
    s.validate();
    return s;
}

struct Tally {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    void add(bool truth, bool detected) {
        if (truth) {
            (detected ? tp : fn) += 1;
        } else {
            (detected ? fp : tn) += 1;
        }
    }
};

std::string format_rate(const std::optional<double>& v) {
    if (!v) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return buf;
}

std::string join_windows(const std::vector<std::size_t>& windows) {
    std::string out;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (i) out += ';';
        out += std::to_string(windows[i]);
    }
    return out;
}

nlohmann::json optional_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string_view to_string(ChangeKind kind) {
    switch (kind) {
        case ChangeKind::None: return "none";
        case ChangeKind::Mean: return "mean";
        case ChangeKind::Variance: return "variance";
    }
    return "unknown";
}

ChangeKind parse_change_kind(std::string_view text) {
    if (text == "none") return ChangeKind::None;
    if (text == "mean") return ChangeKind::Mean;
    if (text == "variance") return ChangeKind::Variance;
    throw ConfigError("unknown change kind '" + std::string(text) + "'");
}

double default_magnitude(ChangeKind kind, std::size_t dimension) {
    switch (kind) {
        case ChangeKind::Mean: return 1.0 / std::cbrt(static_cast<double>(dimension));
        case ChangeKind::Variance: return 2.0;
        case ChangeKind::None: return 0.0;
    }
    return 0.0;
}

Scenario Scenario::none(std::size_t dimension, std::size_t length) {
    Scenario s;
    s.dimension = dimension;
    s.length = length;
    s.change_location = length;
    s.validate();
    return s;
}

Scenario Scenario::mean_shift(std::size_t dimension, std::size_t length, std::size_t location,
                              std::optional<double> delta) {
    Scenario s;
    s.dimension = dimension;
    s.change = ChangeKind::Mean;
    s.magnitude = delta.value_or(default_magnitude(ChangeKind::Mean, dimension));
    s.length = length;
    s.change_location = location;
    s.validate();
    return s;
}

Scenario Scenario::variance_change(std::size_t dimension, std::size_t length, std::size_t location,
                                   double scale) {
    Scenario s;
    s.dimension = dimension;
    s.change = ChangeKind::Variance;
    s.magnitude = scale;
    s.length = length;
    s.change_location = location;
    s.validate();
    return s;
}

void Scenario::validate() const {
    if (dimension < 1) throw ConfigError("scenario dimension must be >= 1");
    if (change_location > length) throw ConfigError("change location lies beyond the sample");
    if (!std::isfinite(magnitude)) throw ConfigError("scenario magnitude must be finite");
    if (change == ChangeKind::Variance && !(magnitude > 0.0)) {
        throw ConfigError("variance scale must be positive");
    }
}

std::vector<Observation> generate(const Scenario& scenario, Rng& rng) {
    scenario.validate();
    const double scale = scenario.change == ChangeKind::Variance ? std::sqrt(scenario.magnitude) : 1.0;
    std::vector<Observation> out;
    out.reserve(scenario.length);
    std::vector<double> values(scenario.dimension);
    for (std::size_t i = 0; i < scenario.length; ++i) {
        const bool after = i >= scenario.change_location;
        for (auto& v : values) {
            v = rng.normal();
            if (after && scenario.change == ChangeKind::Mean) v += scenario.magnitude;
            if (after && scenario.change == ChangeKind::Variance) v *= scale;
        }
        out.emplace_back(values);
    }
    return out;
}

std::size_t ibgec_statistic(Block block) {
    if (block.size() % 2 != 0 || block.size() < 4) {
        throw InvalidArgument("ibgec_statistic: block length must be even and >= 4");
    }
    const std::size_t half = block.size() / 2;
    const auto mst = mst_spanning_distance(block);
    std::size_t count = 0;
    for (const auto& e : mst.edges) {
        if (e.i < half && e.j >= half) ++count;
    }
    return count;
}

std::vector<std::size_t> ibgec_null(Block training, std::size_t n, std::size_t permutations,
                                    std::uint64_t seed) {
    if (n % 2 != 0 || n < 4 || training.size() < n) {
        throw InvalidArgument("ibgec_null: need an even window >= 4 within the training sample");
    }
    require_dimension(training, training.front().dimension());
    const DistanceMatrix matrix(training);
    const std::size_t half = n / 2;
    std::vector<std::size_t> counts(permutations, 0);
    parallel_for(permutations, [&](std::size_t b) {
        Rng rng = seeded_rng(seed, b);
        std::vector<std::size_t> order(training.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle(std::span<std::size_t>(order), rng);
        std::vector<Edge> edges;
        edges.reserve(n - 1);
        prim_mst(n, [&](std::size_t a, std::size_t c) { return matrix(order[a], order[c]); }, &edges);
        std::size_t count = 0;
        for (const auto& e : edges) {
            if (e.i < half && e.j >= half) ++count;
        }
        counts[b] = count;
    });
    return counts;
}

bool ibgec_reject(std::size_t count, std::span<const std::size_t> null_counts, double alpha) {
    std::size_t at_or_below = 0;
    for (const auto c : null_counts) {
        if (c <= count) ++at_or_below;
    }
    const double p = static_cast<double>(1 + at_or_below) / static_cast<double>(null_counts.size() + 1);
    return p <= alpha;
}

PowerReport PowerReport::from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
    PowerReport r;
    r.tp = tp;
    r.fp = fp;
    r.tn = tn;
    r.fn = fn;
    const std::size_t total = tp + fp + tn + fn;
    if (total > 0) r.accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
    if (tp + fn > 0) r.sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (fp + tn > 0) r.fpr = static_cast<double>(fp) / static_cast<double>(fp + tn);
    if (r.accuracy && r.sensitivity) r.p_mean = std::sqrt(*r.accuracy * *r.sensitivity);
    return r;
}

std::string_view to_string(Method method) {
    switch (method) {
        case Method::StaticComplete: return "sGSR_CG";
        case Method::StaticMst: return "sGSR_MST";
        case Method::Ibgec: return "IBGEC";
        case Method::OnlineComplete: return "oGSR_CG";
        case Method::OnlineMst: return "oGSR_MST";
    }
    return "unknown";
}

Method parse_method(std::string_view text) {
    for (const auto m : {Method::StaticComplete, Method::StaticMst, Method::Ibgec,
                         Method::OnlineComplete, Method::OnlineMst}) {
        if (to_string(m) == text) return m;
    }
    throw ConfigError("unknown method '" + std::string(text) + "'");
}

std::vector<PowerCell> run_static_power(const StaticPowerSpec& spec) {
    if (spec.dimensions.empty() || spec.windows.empty()) throw ConfigError("empty simulation grid");
    if (spec.methods.empty()) throw ConfigError("no methods selected");
    if (spec.trials < 1) throw ConfigError("trials must be >= 1");
    for (const auto m : spec.methods) {
        if (!is_static(m)) throw ConfigError("method " + std::string(to_string(m)) + " is not static");
    }
    for (const auto n : spec.windows) {
        WindowConfig{.lengths = {n}, .alpha = spec.alpha, .permutations = spec.permutations}.validate();
    }

    std::vector<PowerCell> cells;
    for (const auto d : spec.dimensions) {
        if (d < 1) throw ConfigError("dimension must be >= 1");
        for (const auto n : spec.windows) {
            const std::size_t methods = spec.methods.size();
            std::vector<char> truth(spec.trials, 0);
            std::vector<char> detected(spec.trials * methods, 0);

            parallel_for(spec.trials, [&](std::size_t trial) {
                Rng rng = seeded_rng(spec.seed, stream_key({kStaticTag, d, n, trial, kSampleTag}));
                const bool has_change = rng.uniform() < 0.5;
                const auto sample = generate(changed_or_not(spec.change, has_change, d, n, spec.magnitude), rng);
                Rng training_rng = seeded_rng(spec.seed, stream_key({kStaticTag, d, n, trial, kTrainingTag}));
                const auto training = generate(Scenario::none(d, n), training_rng);
                const std::uint64_t permutation_seed =
                    stream_key({spec.seed, kStaticTag, d, n, trial, kPermutationTag});

                truth[trial] = has_change && spec.change != ChangeKind::None;
                for (std::size_t m = 0; m < methods; ++m) {
                    bool reject = false;
                    if (spec.methods[m] == Method::Ibgec) {
                        const auto null = ibgec_null(training, n, spec.permutations, permutation_seed);
                        reject = ibgec_reject(ibgec_statistic(sample), null, spec.alpha);
                    } else {
                        WindowConfig config;
                        config.lengths = {n};
                        config.alpha = spec.alpha;
                        config.permutations = spec.permutations;
                        config.graph = graph_of(spec.methods[m]);
                        config.seed = permutation_seed;
                        const auto table = calibrate(training, config, CalibrationMode::Static);
                        reject = static_detect(sample, table).outcome == Outcome::Reject;
                    }
                    detected[trial * methods + m] = reject;
                }
            });

            for (std::size_t m = 0; m < methods; ++m) {
                Tally tally;
                for (std::size_t t = 0; t < spec.trials; ++t) tally.add(truth[t], detected[t * methods + m]);
                cells.push_back(PowerCell{spec.change, d, {n}, spec.methods[m],
                                          PowerReport::from_counts(tally.tp, tally.fp, tally.tn, tally.fn)});
            }
        }
    }
    return cells;
}

std::vector<PowerCell> run_online_power(const OnlinePowerSpec& spec) {
    if (spec.dimensions.empty() || spec.windows.empty()) throw ConfigError("empty simulation grid");
    if (spec.methods.empty()) throw ConfigError("no methods selected");
    if (spec.samples < 1) throw ConfigError("samples must be >= 1");
    for (const auto m : spec.methods) {
        if (is_static(m)) throw ConfigError("method " + std::string(to_string(m)) + " is not online");
    }
    WindowConfig{.lengths = spec.windows, .alpha = spec.alpha, .permutations = spec.permutations}.validate();
    if (spec.sample_length % 2 != 0 || spec.sample_length < *std::max_element(spec.windows.begin(), spec.windows.end())) {
        throw ConfigError("sample length must be even and cover the longest window");
    }

    std::vector<std::vector<std::size_t>> groups;
    if (spec.per_window) {
        for (const auto n : spec.windows) groups.push_back({n});
    } else {
        groups.push_back(spec.windows);
    }

    const std::size_t length = spec.sample_length;
    const std::size_t history = length / 2;
    std::vector<PowerCell> cells;
    for (const auto d : spec.dimensions) {
        if (d < 1) throw ConfigError("dimension must be >= 1");
        for (const auto& windows : groups) {
            const std::uint64_t group_tag = spec.per_window ? windows.front() : 0;
            Rng training_rng = seeded_rng(spec.seed, stream_key({kOnlineTag, d, group_tag, kTrainingTag}));
            const auto training = generate(Scenario::none(d, length), training_rng);
            const std::uint64_t permutation_seed = stream_key({spec.seed, kOnlineTag, d, group_tag, kPermutationTag});

            std::vector<CalibrationTable> tables;
            for (const auto m : spec.methods) {
                WindowConfig config;
                config.lengths = windows;
                config.alpha = spec.alpha;
                config.permutations = spec.permutations;
                config.graph = graph_of(m);
                config.seed = permutation_seed;
                tables.push_back(calibrate(training, config, CalibrationMode::Online));
            }

            const std::size_t methods = spec.methods.size();
            std::vector<char> truth(spec.samples, 0);
            std::vector<char> detected(spec.samples * methods, 0);
            parallel_for(spec.samples, [&](std::size_t s) {
                Rng rng = seeded_rng(spec.seed, stream_key({kOnlineTag, d, group_tag, kSampleTag, s}));
                const bool has_change = rng.uniform() < 0.5;
                const auto sample = generate(changed_or_not(spec.change, has_change, d, length, spec.magnitude), rng);
                truth[s] = has_change && spec.change != ChangeKind::None;
                for (std::size_t m = 0; m < methods; ++m) {
                    OnlineDetector detector(tables[m]);
                    for (std::size_t i = 0; i < history; ++i) detector.prefill(sample[i]);
                    bool hit = false;
                    for (std::size_t i = history; i < length && !hit; ++i) {
                        hit = detector.step(sample[i]).has_value();
                    }
                    detected[s * methods + m] = hit;
                }
            });

            for (std::size_t m = 0; m < methods; ++m) {
                Tally tally;
                for (std::size_t s = 0; s < spec.samples; ++s) tally.add(truth[s], detected[s * methods + m]);
                cells.push_back(PowerCell{spec.change, d, windows, spec.methods[m],
                                          PowerReport::from_counts(tally.tp, tally.fp, tally.tn, tally.fn)});
            }
        }
    }
    return cells;
}

void write_power_csv(std::ostream& out, std::span<const PowerCell> cells, std::span<const std::string> header) {
    for (const auto& line : header) out << "# " << line << '\n';
    out << "change,d,n,method,tp,fp,tn,fn,accuracy,sensitivity,fpr,p_mean\n";
    for (const auto& c : cells) {
        const auto& r = c.report;
        out << to_string(c.change) << ',' << c.dimension << ',' << join_windows(c.windows) << ','
            << to_string(c.method) << ',' << r.tp << ',' << r.fp << ',' << r.tn << ',' << r.fn << ','
            << format_rate(r.accuracy) << ',' << format_rate(r.sensitivity) << ','
            << format_rate(r.fpr) << ',' << format_rate(r.p_mean) << '\n';
    }
}

nlohmann::json power_to_json(std::span<const PowerCell> cells) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : cells) {
        const auto& r = c.report;
        out.push_back({{"change", to_string(c.change)},
                       {"d", c.dimension},
                       {"n", c.windows},
                       {"method", to_string(c.method)},
                       {"tp", r.tp},
                       {"fp", r.fp},
                       {"tn", r.tn},
                       {"fn", r.fn},
                       {"accuracy", optional_json(r.accuracy)},
                       {"sensitivity", optional_json(r.sensitivity)},
                       {"fpr", optional_json(r.fpr)},
                       {"p_mean", optional_json(r.p_mean)}});
    }
    return out;
}

}  // namespace gsrcpd
