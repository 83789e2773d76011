/// @file run_config.hpp
/// @brief Resolved run configuration shared by the command-line tool.
///
/// A configuration file is a JSON object with the top-level keys
///
///     { "params":     { "rho": -1, "eta": -4, "theta": 1 },
///       "integrator": { "rel_tol": 1e-10, ... },
///       "command":    { "name": "scan", "kind": "i-poly", ... },
///       "output":     { "path": "scan.json", "format": "json", "stamp": false } }
///
/// Unknown keys at any level are errors. Values are resolved as defaults,
/// then the file, then command-line flags.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pinchlab/integrator.hpp"
#include "pinchlab/report_io.hpp"

namespace pinchlab {

enum class ValueType { Number, Integer, Seed, Bool, String, State, NumberList };

/// One command option. `key` is the JSON name; the flag is "--" followed by
/// the key with underscores turned into dashes. A null default means unset.
struct OptionSpec {
    std::string key;
    ValueType type = ValueType::Number;
    Json default_value;
    std::string help;
};

const std::vector<std::string>& command_names();
/// Throws ConfigError for an unknown command.
const std::vector<OptionSpec>& command_options(std::string_view command);

std::string flag_name(std::string_view key);

/// Converts flag text to the JSON value of an option. States and number
/// lists are comma separated.
Json value_from_text(const OptionSpec& spec, std::string_view text);

struct OutputConfig {
    /// Main output; "-" is standard output.
    std::string path = "-";
    /// "json" or "text" for reports; ignored for CSV and SVG outputs.
    std::string format = "json";
    /// Add a timestamp to the metadata.
    bool stamp = false;
    /// Optional extra report path (simulate writes a run summary there).
    std::string report;
};

struct RunConfig {
    std::string command;
    FlowParams params;
    /// True when any of rho, eta, theta came from a file or flag.
    bool params_given = false;
    IntegratorConfig integrator;
    /// Resolved command options, one key per OptionSpec.
    Json options = Json::object();
    OutputConfig output;

    bool has(std::string_view key) const;
    double number(std::string_view key) const;
    std::int64_t integer(std::string_view key) const;
    std::uint64_t seed(std::string_view key) const;
    bool flag(std::string_view key) const;
    std::string text(std::string_view key) const;
    std::optional<EigenTriple> state(std::string_view key) const;
    std::vector<double> numbers(std::string_view key) const;
};

/// Defaults for a command (deriv-check tightens the integrator tolerances).
RunConfig default_config(std::string_view command);

/// Merges a parsed configuration file into `cfg`. The file's command name,
/// when present, must match cfg.command. Throws ConfigError on unknown keys
/// or ill-typed values.
void apply_config_file(RunConfig& cfg, const Json& file);

/// Sets one command option from JSON, checking its type.
void set_option(RunConfig& cfg, std::string_view key, const Json& value);

/// The fully resolved configuration in the file schema.
Json to_json(const RunConfig& cfg);

}  // namespace pinchlab
