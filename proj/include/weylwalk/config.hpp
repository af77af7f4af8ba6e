#ifndef WEYLWALK_CONFIG_HPP
#define WEYLWALK_CONFIG_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "weylwalk/experiments.hpp"

namespace weylwalk::config {

/// Parse/validation failure with file position context.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Config {
    uint64_t seed = 1;
    std::string out_dir = "runs";
    double eps = 1e-9;
    double mc_sigma = 3.0;
    experiments::Registry registry;
    std::vector<experiments::Scenario> scenarios;
};

/// Loads a TOML config file. Strict: unknown keys and unresolved references
/// are errors; syntax errors report line and column.
Config load(const std::string& path);

Config parse_string(const std::string& text, const std::string& origin = "<string>");

/// `key=value` override. `tolerances.X`, `seed`, `out_dir` hit the config;
/// `<scenario>.key` hits one scenario; `anything_else.key` (or a bare `key`)
/// is applied to every scenario's params.
void apply_override(Config& cfg, const std::string& assignment);

/// The bundled configuration that reproduces every scenario with its
/// canonical parameters.
Config default_config();

} // namespace weylwalk::config

#endif
