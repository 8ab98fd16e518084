#include "gsrcpd/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "gsrcpd/calibrate.hpp"
#include "gsrcpd/detect.hpp"
#include "gsrcpd/ingest.hpp"
#include "gsrcpd/simulate.hpp"
#include "gsrcpd/validate.hpp"

namespace gsrcpd::cli {

namespace {

template <typename T>
void take(std::optional<T>& into, const std::optional<T>& from) {
    if (from) into = from;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::vector<Observation> read_input(const std::string& path, std::istream& in) {
    if (path == "-") return read_observations(in);
    std::ifstream file(path);
    if (!file) throw IngestError(0, "cannot open input '" + path + "'");
    return read_observations(file);
}

nlohmann::json read_json_file(const std::string& path, const char* what) {
    std::ifstream file(path);
    if (!file) throw ConfigError(std::string("cannot open ") + what + " '" + path + "'");
    try {
        return nlohmann::json::parse(file);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON in ") + what + " '" + path + "': " + e.what());
    }
}

// Writes to the configured output file, or to `out` when there is none.
class Sink {
public:
    Sink(const std::optional<std::string>& path, std::ostream& fallback) : stream_(&fallback) {
        if (path && *path != "-") {
            file_.open(*path, std::ios::binary);
            if (!file_) throw ConfigError("cannot open output '" + *path + "'");
            stream_ = &file_;
        }
    }
    std::ostream& stream() { return *stream_; }
    bool to_file() const { return file_.is_open(); }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

CalibrationTable load_calibration(const std::string& path, const RunConfig& config) {
    std::ifstream file(path);
    if (!file) throw CalibrationError("cannot open calibration '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(file);
    } catch (const nlohmann::json::parse_error& e) {
        throw CalibrationError(std::string("calibration is not valid JSON: ") + e.what());
    }
    auto table = calibration_from_json(j);
    const auto expected = config_hash(config.window);
    if (table.config_hash != expected) {
        throw ConfigMismatch("calibration '" + path + "' was built for configuration " + table.config_hash +
                             ", this run resolves to " + expected);
    }
    return table;
}

void print_thresholds(const CalibrationTable& table, std::ostream& os) {
    os << "alpha_star " << format_double(table.alpha_star)
       << (table.bonferroni_fallback ? " (bonferroni fallback)" : "") << '\n';
    for (const auto& w : table.windows) {
        os << "window " << w.length << " rho_mu " << format_double(w.rho_mu) << " rho_sigma "
           << format_double(w.rho_sigma) << '\n';
    }
}

struct Preset {
    bool online = true;
    std::vector<ChangeKind> changes;
    bool per_window = false;
    std::vector<std::size_t> dimensions{1, 10, 50, 100, 300, 500};
    std::vector<std::size_t> windows;
    double alpha = 0.10;
};

Preset find_preset(const std::string& name) {
    Preset p;
    if (name == "table2" || name == "table3") {
        p.changes = {name == "table2" ? ChangeKind::Mean : ChangeKind::Variance};
        p.windows = {40, 70, 100};
    } else if (name == "figure2" || name == "figure3") {
        p.online = false;
        p.changes = {name == "figure2" ? ChangeKind::Mean : ChangeKind::Variance};
        p.windows = {10, 20, 40, 70, 100};
        p.alpha = 0.05;
    } else if (name == "figure4") {
        p.changes = {ChangeKind::Mean, ChangeKind::Variance};
        p.per_window = true;
        p.windows = {40, 70, 100};
    } else {
        throw ConfigError("unknown preset '" + name + "' (table2, table3, figure2, figure3, figure4)");
    }
    return p;
}

std::string json_path_for(const std::string& csv_path) {
    const auto dot = csv_path.rfind('.');
    const auto slash = csv_path.rfind('/');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
        return csv_path.substr(0, dot) + ".json";
    }
    return csv_path + ".json";
}

std::uint64_t parse_seed(const std::string& text, const char* source) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &used, 10);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size() || text.front() == '-') {
        throw ConfigError(std::string("invalid seed '") + text + "' from " + source);
    }
    return v;
}

}  // namespace

ConfigOverrides ConfigOverrides::merged_with(const ConfigOverrides& top) const {
    ConfigOverrides out = *this;
    take(out.windows, top.windows);
    take(out.alpha, top.alpha);
    take(out.permutations, top.permutations);
    take(out.graph, top.graph);
    take(out.seed, top.seed);
    take(out.alpha_star_rule, top.alpha_star_rule);
    take(out.training_length, top.training_length);
    take(out.stride, top.stride);
    take(out.trials, top.trials);
    take(out.dimensions, top.dimensions);
    return out;
}

ConfigOverrides overrides_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    ConfigOverrides o;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "windows") {
                o.windows = value.get<std::vector<std::size_t>>();
            } else if (key == "alpha") {
                o.alpha = value.get<double>();
            } else if (key == "permutations") {
                o.permutations = value.get<std::size_t>();
            } else if (key == "graph") {
                o.graph = parse_graph_kind(value.get<std::string>());
            } else if (key == "seed") {
                o.seed = value.get<std::uint64_t>();
            } else if (key == "alpha_star_rule") {
                o.alpha_star_rule = parse_alpha_star_rule(value.get<std::string>());
            } else if (key == "training_length") {
                o.training_length = value.get<std::size_t>();
            } else if (key == "stride") {
                o.stride = value.get<std::size_t>();
            } else if (key == "trials") {
                o.trials = value.get<std::size_t>();
            } else if (key == "dimensions") {
                o.dimensions = value.get<std::vector<std::size_t>>();
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config value: ") + e.what());
    }
    return o;
}

RunConfig resolve_config(RunConfig base, const ConfigOverrides& file, const ConfigOverrides& flags,
                         const char* env_seed) {
    ConfigOverrides layers;
    if (env_seed && *env_seed) layers.seed = parse_seed(env_seed, kSeedEnv);
    layers = layers.merged_with(file).merged_with(flags);

    auto& w = base.window;
    if (layers.windows) w.lengths = *layers.windows;
    if (layers.alpha) w.alpha = *layers.alpha;
    if (layers.permutations) w.permutations = *layers.permutations;
    if (layers.graph) w.graph = *layers.graph;
    if (layers.seed) w.seed = *layers.seed;
    if (layers.alpha_star_rule) w.alpha_star_rule = *layers.alpha_star_rule;
    if (layers.training_length) base.training_length = *layers.training_length;
    if (layers.stride) base.stride = *layers.stride;
    base.explicit_settings = layers;
    return base;
}

nlohmann::json run_header(const RunConfig& config) {
    return {{"type", "header"},
            {"tool_version", kVersion},
            {"config", window_config_to_json(config.window)},
            {"config_hash", config_hash(config.window)},
            {"seed", config.window.seed}};
}

int cmd_calibrate(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
    config.window.validate();
    const auto training = read_input(config.input, in);
    const std::size_t longest = config.window.max_length();
    const auto mode = config.static_mode ? CalibrationMode::Static : CalibrationMode::Online;
    const std::size_t needed = mode == CalibrationMode::Online ? longest + 2 : longest;
    if (training.size() < needed) {
        throw InvalidArgument("calibration needs at least " + std::to_string(needed) + " observations, input has " +
                              std::to_string(training.size()));
    }
    const auto table = calibrate(training, config.window, mode);
    Sink sink(config.output, out);
    sink.stream() << calibration_to_json(table).dump(2) << '\n';
    print_thresholds(table, sink.to_file() ? out : err);
    return kExitNoChange;
}

int cmd_detect(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
    config.window.validate();
    CalibrationTable table;
    if (config.calibration_path) {
        table = load_calibration(*config.calibration_path, config);
    } else if (config.training_path) {
        std::istream dummy(nullptr);
        table = calibrate(read_input(*config.training_path, dummy), config.window, CalibrationMode::Static);
    } else {
        throw ConfigError("detect needs --calibration or --training");
    }
    if (table.mode != CalibrationMode::Static) throw ConfigMismatch("detect needs a static calibration");

    const auto data = read_input(config.input, in);
    Sink sink(config.output, out);
    sink.stream() << run_header(config).dump() << '\n';
    bool rejected = false;
    std::size_t tested = 0;
    for (const auto& w : table.windows) {
        if (data.size() < w.length) continue;
        ++tested;
        const Block tail(data.data() + (data.size() - w.length), w.length);
        const auto decision = static_detect(tail, table);
        nlohmann::json line{{"type", "decision"},
                            {"window_length", w.length},
                            {"outcome", to_string(decision.outcome)},
                            {"rho_mu", decision.rho_mu},
                            {"rho_sigma", decision.rho_sigma}};
        if (decision.statistics) {
            line["t_mu"] = decision.statistics->t_mu;
            line["t_sigma"] = decision.statistics->t_sigma;
            line["split_index"] = data.size() - w.length + decision.statistics->split_index;
        }
        sink.stream() << line.dump() << '\n';
        rejected = rejected || decision.outcome == Outcome::Reject;
    }
    if (tested == 0) {
        throw InvalidArgument("input has " + std::to_string(data.size()) + " observations, shorter than every window");
    }
    err << (rejected ? "change detected\n" : "no change detected\n");
    return rejected ? kExitChange : kExitNoChange;
}

int cmd_stream(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
    config.window.validate();
    std::optional<OnlineDetector> detector;
    if (config.calibration_path) {
        auto table = load_calibration(*config.calibration_path, config);
        if (table.mode != CalibrationMode::Online) throw ConfigMismatch("stream needs an online calibration");
        detector.emplace(std::move(table), config.stride);
    } else {
        DetectorConfig dc{config.window, config.training_length, config.stride};
        dc.validate();
        detector.emplace(dc);
    }

    std::ifstream file;
    std::istream* source = &in;
    if (config.input != "-") {
        file.open(config.input);
        if (!file) throw IngestError(0, "cannot open input '" + config.input + "'");
        source = &file;
    }

    Sink sink(config.output, out);
    auto header = run_header(config);
    header["calibration"] = config.calibration_path ? nlohmann::json(*config.calibration_path) : nlohmann::json();
    header["training_length"] = config.calibration_path ? 0 : config.training_length;
    sink.stream() << header.dump() << '\n';

    std::size_t events = 0;
    detector->set_event_sink([&](const DetectionEvent& e) {
        auto line = event_to_json(e);
        line["type"] = "event";
        sink.stream() << line.dump() << '\n';
        sink.stream().flush();
        ++events;
    });
    detector->set_log_sink([&](std::string_view message) { err << message << '\n'; });

    ObservationReader reader(*source);
    std::size_t count = 0;
    while (auto y = reader.next()) {
        ++count;
        if (detector->status() == DetectorStatus::Triggered) {
            if (!config.continue_after_change) break;
            detector->reset();
        }
        detector->push(*y);
    }
    if (detector->status() == DetectorStatus::Training) {
        throw InvalidArgument("stream ended after " + std::to_string(count) + " observations, before training (" +
                              std::to_string(config.training_length) + ") completed");
    }
    sink.stream() << nlohmann::json{{"type", "summary"},
                                    {"observations", count},
                                    {"events", events},
                                    {"degenerate_skips", detector->degenerate_skips()}}
                         .dump()
                  << '\n';
    err << (events ? "change detected\n" : "no change detected\n");
    return events ? kExitChange : kExitNoChange;
}

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    if (config.preset.empty()) throw ConfigError("simulate needs --preset");
    const auto preset = find_preset(config.preset);
    const auto& s = config.explicit_settings;
    const auto dims = s.dimensions.value_or(preset.dimensions);
    const auto windows = s.windows.value_or(preset.windows);
    const double alpha = s.alpha.value_or(preset.alpha);
    const std::size_t permutations = s.permutations.value_or(500);
    const std::size_t trials = s.trials.value_or(200);
    const std::uint64_t seed = config.window.seed;
    if (dims.empty() || windows.empty()) throw ConfigError("empty simulation grid");

    std::vector<PowerCell> cells;
    for (const auto change : preset.changes) {
        std::vector<PowerCell> part;
        if (preset.online) {
            OnlinePowerSpec spec;
            spec.dimensions = dims;
            spec.windows = windows;
            spec.per_window = preset.per_window;
            spec.change = change;
            spec.samples = trials;
            spec.alpha = alpha;
            spec.permutations = permutations;
            spec.seed = seed;
            part = run_online_power(spec);
        } else {
            StaticPowerSpec spec;
            spec.dimensions = dims;
            spec.windows = windows;
            spec.change = change;
            spec.trials = trials;
            spec.alpha = alpha;
            spec.permutations = permutations;
            spec.seed = seed;
            part = run_static_power(spec);
        }
        cells.insert(cells.end(), part.begin(), part.end());
    }

    const nlohmann::json settings{{"preset", config.preset}, {"dimensions", dims}, {"windows", windows},
                                  {"alpha", alpha},          {"permutations", permutations},
                                  {"trials", trials},        {"seed", seed}};
    const std::vector<std::string> header{"gsrcpd simulate", "tool_version=" + std::string(kVersion),
                                          "preset=" + config.preset, "seed=" + std::to_string(seed),
                                          "config=" + settings.dump()};
    Sink sink(config.output, out);
    write_power_csv(sink.stream(), cells, header);
    if (sink.to_file()) {
        const auto json_path = json_path_for(*config.output);
        std::ofstream json_file(json_path, std::ios::binary);
        if (!json_file) throw ConfigError("cannot open output '" + json_path + "'");
        json_file << nlohmann::json{{"format", "gsrcpd.power"},
                                    {"version", 1},
                                    {"tool_version", kVersion},
                                    {"config", settings},
                                    {"cells", power_to_json(cells)}}
                         .dump(2)
                  << '\n';
        err << "wrote " << *config.output << " and " << json_path << '\n';
    }
    return kExitNoChange;
}

int cmd_self_check(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const auto summary = run_self_check(config.window.seed);
    out << summary.to_json().dump(2) << '\n';
    for (const auto& r : summary.reports) {
        if (!r.passed) {
            err << "FAILED " << r.name << ": measured " << r.measured << ", target " << r.target
                << ", tolerance " << r.tolerance << " (" << r.detail << ")\n";
        }
    }
    return summary.passed ? kExitNoChange : kExitFailure;
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Graph spanning ratio change-point detection", "gsrcpd"};
    app.set_version_flag("--version", std::string(kVersion));
    bool self_check = false;
    app.add_flag("--self-check", self_check, "Run the statistical self-tests and print a JSON summary");

    RunConfig base;
    std::vector<std::size_t> windows, dims;
    double alpha = 0.0;
    std::size_t permutations = 0, training = 0, stride = 0, trials = 0;
    std::string graph, rule;
    std::uint64_t seed = 0;
    std::string config_path, output, calibration, training_path;

    struct Flags {
        CLI::Option *windows, *alpha, *permutations, *graph, *seed, *rule, *training, *stride, *trials, *dims,
            *config, *output, *calibration, *training_path;
    };
    std::vector<std::pair<CLI::App*, Flags>> registered;

    auto common = [&](CLI::App* sub) {
        Flags f{};
        f.config = sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--input", base.input, "Input CSV or JSON-lines file, '-' for stdin");
        f.output = sub->add_option("--output", output, "Output file (default stdout)");
        f.windows = sub->add_option("--windows", windows, "Window lengths, comma separated")->delimiter(',');
        f.alpha = sub->add_option("--alpha", alpha, "Significance level");
        f.permutations = sub->add_option("--permutations", permutations, "Permutations per calibration");
        f.graph = sub->add_option("--graph", graph, "complete or mst");
        f.seed = sub->add_option("--seed", seed, "Random seed (default from GSRCPD_SEED or 42)");
        f.rule = sub->add_option("--alpha-star-rule", rule, "familywise or literal");
        f.training = sub->add_option("--training-length", training, "Observations used for online training");
        f.stride = sub->add_option("--stride", stride, "Evaluate every stride-th observation");
        f.trials = sub->add_option("--trials", trials, "Trials or samples per simulation cell");
        f.dims = sub->add_option("--dims", dims, "Dimensions for simulation grids")->delimiter(',');
        f.calibration = sub->add_option("--calibration", calibration, "Calibration JSON file");
        f.training_path = sub->add_option("--training", training_path, "H0 training data for detect");
        registered.emplace_back(sub, f);
        return sub;
    };

    auto* calibrate_cmd = common(app.add_subcommand("calibrate", "Calibrate thresholds on H0 training data"));
    calibrate_cmd->add_flag("--static", base.static_mode, "Static (single block) calibration");
    auto* detect_cmd = common(app.add_subcommand("detect", "Static test of the trailing window(s) of the input"));
    auto* stream_cmd = common(app.add_subcommand("stream", "Online monitoring, JSON-lines events"));
    stream_cmd->add_flag("--continue", base.continue_after_change, "Keep monitoring after a detection");
    auto* simulate_cmd = common(app.add_subcommand("simulate", "Monte Carlo power studies"));
    simulate_cmd->add_option("--preset", base.preset, "table2, table3, figure2, figure3 or figure4");
    auto* check_cmd = common(app.add_subcommand("self-check", "Statistical self-tests"));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        if (!reversed.empty()) reversed.pop_back();
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitNoChange : kExitUsage;
    }

    try {
        if (self_check || check_cmd->parsed()) {
            base.command = Command::SelfCheck;
        } else if (calibrate_cmd->parsed()) {
            base.command = Command::Calibrate;
        } else if (detect_cmd->parsed()) {
            base.command = Command::Detect;
        } else if (stream_cmd->parsed()) {
            base.command = Command::Stream;
        } else if (simulate_cmd->parsed()) {
            base.command = Command::Simulate;
        } else {
            err << app.help();
            return kExitUsage;
        }

        ConfigOverrides flags;
        for (const auto& [sub, f] : registered) {
            if (!sub->parsed()) continue;
            if (f.windows->count()) flags.windows = windows;
            if (f.alpha->count()) flags.alpha = alpha;
            if (f.permutations->count()) flags.permutations = permutations;
            if (f.graph->count()) flags.graph = parse_graph_kind(graph);
            if (f.seed->count()) flags.seed = seed;
            if (f.rule->count()) flags.alpha_star_rule = parse_alpha_star_rule(rule);
            if (f.training->count()) flags.training_length = training;
            if (f.stride->count()) flags.stride = stride;
            if (f.trials->count()) flags.trials = trials;
            if (f.dims->count()) flags.dimensions = dims;
            if (f.config->count()) base.config_path = config_path;
            if (f.output->count()) base.output = output;
            if (f.calibration->count()) base.calibration_path = calibration;
            if (f.training_path->count()) base.training_path = training_path;
        }
        ConfigOverrides file;
        if (base.config_path) file = overrides_from_json(read_json_file(*base.config_path, "config file"));
        const auto config = resolve_config(base, file, flags, std::getenv(kSeedEnv));

        switch (config.command) {
            case Command::Calibrate: return cmd_calibrate(config, in, out, err);
            case Command::Detect: return cmd_detect(config, in, out, err);
            case Command::Stream: return cmd_stream(config, in, out, err);
            case Command::Simulate: return cmd_simulate(config, out, err);
            case Command::SelfCheck: return cmd_self_check(config, out, err);
        }
        return kExitFailure;
    } catch (const ConfigMismatch& e) {
        err << "error: " << e.what() << '\n';
        return kExitMismatch;
    } catch (const CalibrationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitMismatch;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IngestError& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const DimensionMismatch& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace gsrcpd::cli
