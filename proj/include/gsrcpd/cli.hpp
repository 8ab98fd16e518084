#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gsrcpd/core.hpp"

namespace gsrcpd::cli {

inline constexpr int kExitNoChange = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitMismatch = 4;
inline constexpr int kExitChange = 10;

inline constexpr const char* kSeedEnv = "GSRCPD_SEED";

// A calibration file built for a different configuration.
class ConfigMismatch : public Error {
public:
    using Error::Error;
};

enum class Command { Calibrate, Detect, Stream, Simulate, SelfCheck };

// Every field is optional so that layers can be merged.
struct ConfigOverrides {
    std::optional<std::vector<std::size_t>> windows;
    std::optional<double> alpha;
    std::optional<std::size_t> permutations;
    std::optional<GraphKind> graph;
    std::optional<std::uint64_t> seed;
    std::optional<AlphaStarRule> alpha_star_rule;
    std::optional<std::size_t> training_length;
    std::optional<std::size_t> stride;
    std::optional<std::size_t> trials;
    std::optional<std::vector<std::size_t>> dimensions;

    // Fields set in `top` win over ours.
    ConfigOverrides merged_with(const ConfigOverrides& top) const;
};

// Reads a JSON config object; unknown keys are rejected.
ConfigOverrides overrides_from_json(const nlohmann::json& j);

struct RunConfig {
    Command command = Command::Stream;
    std::string input = "-";  // "-" reads stdin
    std::optional<std::string> config_path;
    std::optional<std::string> output;
    std::optional<std::string> calibration_path;
    std::optional<std::string> training_path;
    std::string preset;
    bool static_mode = false;
    bool continue_after_change = false;

    WindowConfig window;
    std::size_t training_length = 200;
    std::size_t stride = 1;
    // File and flag layers combined, kept so presets can apply their own defaults.
    ConfigOverrides explicit_settings;
};

// Defaults < GSRCPD_SEED (`env_seed`) < config file < command-line flags.
RunConfig resolve_config(RunConfig base, const ConfigOverrides& file, const ConfigOverrides& flags,
                         const char* env_seed);

nlohmann::json run_header(const RunConfig& config);

int cmd_calibrate(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);
int cmd_detect(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);
int cmd_stream(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_self_check(const RunConfig& config, std::ostream& out, std::ostream& err);

// Full command line (argv[0] included). Never throws; errors map to exit codes.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace gsrcpd::cli
