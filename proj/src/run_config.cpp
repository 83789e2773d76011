#include "pinchlab/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "pinchlab/errors.hpp"

namespace pinchlab {

namespace {

const Json kUnset = nullptr;

std::vector<OptionSpec> simulate_options() {
    return {
        {"state", ValueType::State, kUnset, "initial eigenvalues lambda,mu,nu"},
        {"t0", ValueType::Number, 0.0, "initial time"},
        {"t_end", ValueType::Number, kUnset, "final time"},
        {"checkpoints_per_step", ValueType::Integer, 3, "dense rows inside each step"},
        {"seed", ValueType::Seed, 0, "recorded in the metadata"},
    };
}

std::vector<OptionSpec> scan_options() {
    return {
        {"kind", ValueType::String, kUnset,
         "j-neg-trace, j-nonneg-trace, i-poly, xi-prime or trace-bound"},
        {"resolution", ValueType::Integer, 200, "grid points per axis"},
        {"tol", ValueType::Number, 1e-12, "violation tolerance"},
        {"times", ValueType::NumberList, Json::array({0.0}), "times for xi-prime"},
        {"random", ValueType::Integer, 0, "random states instead of a grid (0 = grid)"},
        {"seed", ValueType::Seed, 0, "seed of the random scan"},
        {"isotropic_every", ValueType::Integer, 1000, "isotropic injection period"},
        {"equality_tol", ValueType::Number, 1e-12, "equality tolerance at isotropic states"},
    };
}

std::vector<OptionSpec> verify_set_options() {
    return {
        {"set", ValueType::String, kUnset, "X, K, Y or W"},
        {"samples", ValueType::Integer, 1000, "near-boundary samples"},
        {"horizon", ValueType::Number, 0.05, "integration horizon"},
        {"seed", ValueType::Seed, 42, "sampler seed"},
        {"tol", ValueType::Number, 1e-8, "drift tolerance"},
        {"checkpoints_per_step", ValueType::Integer, 3, "dense checkpoints inside each step"},
        {"band_factor", ValueType::Number, 100.0, "sampling band in units of tol"},
        {"box_factor", ValueType::Number, 10.0, "sampling box in units of the binding scale"},
        {"attempts", ValueType::Integer, 20000, "sampler attempts per point"},
        {"recheck", ValueType::String, kUnset, "re-check against another set (observation only)"},
    };
}

std::vector<OptionSpec> verify_estimate_options() {
    return {
        {"variant", ValueType::String, kUnset, "neg-rho-scalar, neg-rho-sectional or nonneg-rho"},
        {"samples", ValueType::Integer, 100, "seeded initial states"},
        {"state", ValueType::State, kUnset, "single initial state instead of samples"},
        {"seed", ValueType::Seed, 42, "sampler seed"},
        {"t_end", ValueType::Number, 10.0, "integration end (runs stop earlier at blow-up)"},
        {"tol", ValueType::Number, 1e-8, "slack tolerance"},
    };
}

std::vector<OptionSpec> deriv_check_options() {
    return {
        {"quantity", ValueType::String, "both", "lambda, xi or both"},
        {"trajectories", ValueType::Integer, 20, "seeded trajectories"},
        {"seed", ValueType::Seed, 42, "sampler seed"},
        {"h", ValueType::Number, 1e-4, "central-difference step"},
        {"horizon", ValueType::Number, 0.05, "trajectory length"},
        {"points", ValueType::Integer, 50, "comparison times per trajectory"},
        {"tol", ValueType::Number, 1e-6, "discrepancy bound at step h"},
        {"min_decay", ValueType::Number, 3.5, "required d(h)/d(h/2)"},
        {"floor", ValueType::Number, 1e-9, "discrepancies below this skip the decay check"},
    };
}

std::vector<OptionSpec> plot_options() {
    return {
        {"input", ValueType::String, kUnset, "trajectory CSV"},
        {"x", ValueType::String, "t", "x column"},
        {"columns", ValueType::String, "lambda,mu,nu", "comma-separated y columns"},
        {"width", ValueType::Integer, 800, "SVG width"},
        {"height", ValueType::Integer, 500, "SVG height"},
        {"title", ValueType::String, "", "plot title"},
    };
}

const std::map<std::string, std::vector<OptionSpec>, std::less<>>& option_table() {
    static const std::map<std::string, std::vector<OptionSpec>, std::less<>> table{
        {"simulate", simulate_options()},
        {"scan", scan_options()},
        {"verify-set", verify_set_options()},
        {"verify-estimate", verify_estimate_options()},
        {"deriv-check", deriv_check_options()},
        {"plot", plot_options()},
    };
    return table;
}

const OptionSpec& find_option(std::string_view command, std::string_view key) {
    for (const auto& o : command_options(command))
        if (o.key == key) return o;
    throw ConfigError("unknown option '" + std::string(key) + "' for command '" +
                      std::string(command) + "'");
}

std::vector<double> split_numbers(std::string_view text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find(',', start), text.size());
        std::string_view piece = text.substr(start, end - start);
        while (!piece.empty() && piece.front() == ' ') piece.remove_prefix(1);
        while (!piece.empty() && piece.back() == ' ') piece.remove_suffix(1);
        out.push_back(parse_double(piece));
        start = end + 1;
    }
    return out;
}

Json checked(const OptionSpec& spec, const Json& v) {
    if (v.is_null()) return v;
    auto fail = [&](const char* what) -> Json {
        throw ConfigError("option '" + spec.key + "' expects " + what + ", got " + v.dump());
    };
    switch (spec.type) {
        case ValueType::Number:
            if (v.is_number()) return v.get<double>();
            if (v.is_string()) return number_to_json(parse_double(v.get<std::string>()));
            return fail("a number");
        case ValueType::Integer:
            if (v.is_number_integer()) return v;
            if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>())
                return static_cast<std::int64_t>(v.get<double>());
            return fail("an integer");
        case ValueType::Seed:
            if (v.is_number_unsigned()) return v;
            if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
            return fail("a non-negative integer");
        case ValueType::Bool:
            if (v.is_boolean()) return v;
            return fail("a boolean");
        case ValueType::String:
            if (v.is_string()) return v;
            return fail("a string");
        case ValueType::State: {
            if (!v.is_array() || v.size() != 3) return fail("three numbers");
            Json out = Json::array();
            for (const auto& e : v) out.push_back(number_to_json(number_from_json(e)));
            return out;
        }
        case ValueType::NumberList: {
            if (!v.is_array()) return fail("a list of numbers");
            Json out = Json::array();
            for (const auto& e : v) out.push_back(number_to_json(number_from_json(e)));
            return out;
        }
    }
    return v;
}

const Json& option_value(const RunConfig& cfg, std::string_view key) {
    const auto it = cfg.options.find(std::string(key));
    if (it == cfg.options.end() || it->is_null())
        throw ConfigError("missing required option --" + flag_name(key));
    return *it;
}

void require_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                  std::string_view where) {
    if (!obj.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
    for (const auto& [k, v] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw ConfigError("unknown key '" + k + "' in " + std::string(where));
    }
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"simulate",        "scan",        "verify-set",
                                                "verify-estimate", "deriv-check", "plot"};
    return names;
}

const std::vector<OptionSpec>& command_options(std::string_view command) {
    const auto& table = option_table();
    const auto it = table.find(command);
    if (it == table.end()) throw ConfigError("unknown command '" + std::string(command) + "'");
    return it->second;
}

std::string flag_name(std::string_view key) {
    std::string s(key);
    std::replace(s.begin(), s.end(), '_', '-');
    return s;
}

Json value_from_text(const OptionSpec& spec, std::string_view text) {
    switch (spec.type) {
        case ValueType::Number: return number_to_json(parse_double(text));
        case ValueType::Integer:
        case ValueType::Seed: {
            const std::string s(text);
            std::size_t used = 0;
            try {
                if (spec.type == ValueType::Seed) {
                    if (!s.empty() && s.front() == '-') throw std::invalid_argument("negative");
                    const auto v = std::stoull(s, &used);
                    if (used == s.size()) return v;
                } else {
                    const auto v = std::stoll(s, &used);
                    if (used == s.size()) return v;
                }
            } catch (const std::exception&) {
            }
            throw ConfigError("option --" + flag_name(spec.key) + " expects an integer, got '" +
                              s + "'");
        }
        case ValueType::Bool:
            if (text == "true" || text == "1") return true;
            if (text == "false" || text == "0") return false;
            throw ConfigError("option --" + flag_name(spec.key) + " expects true or false");
        case ValueType::String: return std::string(text);
        case ValueType::State:
        case ValueType::NumberList: {
            Json out = Json::array();
            for (double x : split_numbers(text)) out.push_back(number_to_json(x));
            return checked(spec, out);
        }
    }
    return nullptr;
}

bool RunConfig::has(std::string_view key) const {
    const auto it = options.find(std::string(key));
    return it != options.end() && !it->is_null();
}

double RunConfig::number(std::string_view key) const {
    return number_from_json(option_value(*this, key));
}

std::int64_t RunConfig::integer(std::string_view key) const {
    return option_value(*this, key).get<std::int64_t>();
}

std::uint64_t RunConfig::seed(std::string_view key) const {
    return option_value(*this, key).get<std::uint64_t>();
}

bool RunConfig::flag(std::string_view key) const { return option_value(*this, key).get<bool>(); }

std::string RunConfig::text(std::string_view key) const {
    return option_value(*this, key).get<std::string>();
}

std::optional<EigenTriple> RunConfig::state(std::string_view key) const {
    if (!has(key)) return std::nullopt;
    const Json& v = option_value(*this, key);
    try {
        return EigenTriple::ordered(number_from_json(v[0]), number_from_json(v[1]),
                                    number_from_json(v[2]));
    } catch (const PinchError& e) {
        throw ConfigError("option --" + flag_name(key) + ": " + e.what());
    }
}

std::vector<double> RunConfig::numbers(std::string_view key) const {
    std::vector<double> out;
    for (const auto& e : option_value(*this, key)) out.push_back(number_from_json(e));
    return out;
}

RunConfig default_config(std::string_view command) {
    RunConfig cfg;
    cfg.command = std::string(command);
    for (const auto& o : command_options(command)) cfg.options[o.key] = o.default_value;
    if (command == "deriv-check") {
        cfg.integrator.rel_tol = 1e-13;
        cfg.integrator.abs_tol = 1e-15;
    }
    return cfg;
}

void set_option(RunConfig& cfg, std::string_view key, const Json& value) {
    const OptionSpec& spec = find_option(cfg.command, key);
    cfg.options[spec.key] = checked(spec, value);
}

void apply_config_file(RunConfig& cfg, const Json& file) {
    require_keys(file, {"params", "integrator", "command", "output"}, "config file");
    if (file.contains("params")) {
        const Json& p = file.at("params");
        require_keys(p, {"rho", "eta", "theta"}, "params");
        if (p.contains("rho")) cfg.params.rho = number_from_json(p.at("rho"));
        if (p.contains("eta")) cfg.params.eta = number_from_json(p.at("eta"));
        if (p.contains("theta")) cfg.params.theta = number_from_json(p.at("theta"));
        if (!p.empty()) cfg.params_given = true;
    }
    if (file.contains("integrator")) {
        const Json& c = file.at("integrator");
        require_keys(c,
                     {"rel_tol", "abs_tol", "max_step", "blowup_norm", "max_steps",
                      "detect_events"},
                     "integrator");
        auto& ic = cfg.integrator;
        if (c.contains("rel_tol")) ic.rel_tol = number_from_json(c.at("rel_tol"));
        if (c.contains("abs_tol")) ic.abs_tol = number_from_json(c.at("abs_tol"));
        if (c.contains("max_step")) ic.max_step = number_from_json(c.at("max_step"));
        if (c.contains("blowup_norm")) ic.blowup_norm = number_from_json(c.at("blowup_norm"));
        if (c.contains("max_steps")) {
            if (!c.at("max_steps").is_number_integer())
                throw ConfigError("integrator.max_steps must be an integer");
            ic.max_steps = c.at("max_steps").get<std::int64_t>();
        }
        if (c.contains("detect_events")) {
            if (!c.at("detect_events").is_boolean())
                throw ConfigError("integrator.detect_events must be a boolean");
            ic.detect_events = c.at("detect_events").get<bool>();
        }
    }
    if (file.contains("command")) {
        const Json& c = file.at("command");
        if (!c.is_object()) throw ConfigError("command must be a JSON object");
        for (const auto& [k, v] : c.items()) {
            if (k == "name") {
                if (!v.is_string() || v.get<std::string>() != cfg.command)
                    throw ConfigError("config file is for command " + v.dump() + ", not '" +
                                      cfg.command + "'");
                continue;
            }
            set_option(cfg, k, v);
        }
    }
    if (file.contains("output")) {
        const Json& o = file.at("output");
        require_keys(o, {"path", "format", "stamp", "report"}, "output");
        try {
            if (o.contains("path")) cfg.output.path = o.at("path").get<std::string>();
            if (o.contains("format")) cfg.output.format = o.at("format").get<std::string>();
            if (o.contains("stamp")) cfg.output.stamp = o.at("stamp").get<bool>();
            if (o.contains("report")) cfg.output.report = o.at("report").get<std::string>();
        } catch (const Json::exception& e) {
            throw ConfigError(std::string("bad output section: ") + e.what());
        }
    }
}

Json to_json(const RunConfig& cfg) {
    Json command{{"name", cfg.command}};
    for (const auto& o : command_options(cfg.command)) command[o.key] = cfg.options.at(o.key);
    // deriv-check draws rho per trajectory unless parameters were given.
    const bool drawn = cfg.command == "deriv-check" && !cfg.params_given;
    return Json{{"params", drawn ? Json::object() : to_json(cfg.params)},
                {"integrator", to_json(cfg.integrator)},
                {"command", command},
                {"output", Json{{"path", cfg.output.path},
                                {"format", cfg.output.format},
                                {"stamp", cfg.output.stamp},
                                {"report", cfg.output.report}}}};
}

}  // namespace pinchlab
