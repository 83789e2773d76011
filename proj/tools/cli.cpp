#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pinchlab/cone_sets.hpp"
#include "pinchlab/errors.hpp"
#include "pinchlab/integrator.hpp"
#include "pinchlab/report_io.hpp"
#include "pinchlab/run_config.hpp"
#include "pinchlab/verifier.hpp"

namespace pinchlab::cli {

namespace {

/// Records flag values during parsing and replays those that were actually
/// given on top of a configuration.
class FlagBinder {
public:
    void text(CLI::App& app, const std::string& flag, const std::string& help,
              std::function<void(RunConfig&, const std::string&)> apply) {
        auto store = std::make_shared<std::string>();
        CLI::Option* opt = app.add_option("--" + flag, *store, help);
        bindings_.push_back({opt, [store, apply](RunConfig& cfg) { apply(cfg, *store); }});
    }

    void flag(CLI::App& app, const std::string& flag, const std::string& help,
              std::function<void(RunConfig&)> apply) {
        CLI::Option* opt = app.add_flag("--" + flag, help);
        bindings_.push_back({opt, std::move(apply)});
    }

    void apply(RunConfig& cfg) const {
        for (const auto& b : bindings_)
            if (b.option->count() > 0) b.apply(cfg);
    }

private:
    struct Binding {
        CLI::Option* option;
        std::function<void(RunConfig&)> apply;
    };
    std::vector<Binding> bindings_;
};

struct Subcommand {
    CLI::App* app = nullptr;
    std::string config_path;
    FlagBinder binder;
};

void bind_common(Subcommand& sc) {
    CLI::App& app = *sc.app;
    app.add_option("--config", sc.config_path, "JSON configuration file");
    sc.binder.text(app, "rho", "flow parameter rho (< 1/4)", [](RunConfig& c, const std::string& s) {
        c.params.rho = parse_double(s);
        c.params_given = true;
    });
    sc.binder.text(app, "eta", "set parameter eta", [](RunConfig& c, const std::string& s) {
        c.params.eta = parse_double(s);
        c.params_given = true;
    });
    sc.binder.text(app, "theta", "set parameter theta (> 0)",
                   [](RunConfig& c, const std::string& s) {
                       c.params.theta = parse_double(s);
                       c.params_given = true;
                   });
    sc.binder.text(app, "rel-tol", "integrator relative tolerance",
                   [](RunConfig& c, const std::string& s) { c.integrator.rel_tol = parse_double(s); });
    sc.binder.text(app, "abs-tol", "integrator absolute tolerance",
                   [](RunConfig& c, const std::string& s) { c.integrator.abs_tol = parse_double(s); });
    sc.binder.text(app, "max-step", "largest integrator step",
                   [](RunConfig& c, const std::string& s) { c.integrator.max_step = parse_double(s); });
    sc.binder.text(app, "blowup-norm", "sup-norm that counts as blow-up",
                   [](RunConfig& c, const std::string& s) {
                       c.integrator.blowup_norm = parse_double(s);
                   });
    sc.binder.text(app, "max-steps", "accepted step limit", [](RunConfig& c, const std::string& s) {
        c.integrator.max_steps =
            value_from_text(OptionSpec{"max_steps", ValueType::Integer, nullptr, ""}, s)
                .get<std::int64_t>();
    });
    sc.binder.flag(app, "no-events", "skip trigger-curve event detection",
                   [](RunConfig& c) { c.integrator.detect_events = false; });
    sc.binder.text(app, "out", "output path ('-' for stdout)",
                   [](RunConfig& c, const std::string& s) { c.output.path = s; });
    sc.binder.text(app, "format", "report format: json or text",
                   [](RunConfig& c, const std::string& s) { c.output.format = s; });
    sc.binder.text(app, "report", "extra report path",
                   [](RunConfig& c, const std::string& s) { c.output.report = s; });
    sc.binder.flag(app, "stamp", "add a timestamp to the metadata",
                   [](RunConfig& c) { c.output.stamp = true; });

    const std::string command = app.get_name();
    for (const auto& spec : command_options(command)) {
        std::string help = spec.help;
        if (!spec.default_value.is_null()) {
            help += " [default: ";
            help += spec.default_value.is_string() ? spec.default_value.get<std::string>()
                                                   : spec.default_value.dump();
            help += "]";
        }
        if (spec.type == ValueType::Bool) {
            const std::string key = spec.key;
            sc.binder.flag(app, flag_name(key), help,
                           [key](RunConfig& c) { set_option(c, key, true); });
        } else {
            const OptionSpec copy = spec;
            sc.binder.text(app, flag_name(spec.key), help,
                           [copy](RunConfig& c, const std::string& s) {
                               c.options[copy.key] = value_from_text(copy, s);
                           });
        }
    }
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Json document(const RunConfig& cfg, std::string_view type, const Json& report) {
    Json doc = make_document(type, to_json(cfg), report);
    if (cfg.output.stamp) doc["tool"]["timestamp"] = utc_timestamp();
    return doc;
}

int emit(const RunConfig& cfg, std::string_view type, const Json& report, bool passed) {
    write_report(document(cfg, type, report), cfg.output.path,
                 report_format_from_string(cfg.output.format));
    return passed ? kExitOk : kExitFailed;
}

int run_simulate(const RunConfig& cfg) {
    const auto state = cfg.state("state");
    if (!state) throw ConfigError("simulate needs --state lambda,mu,nu");
    validate(cfg.params);
    const double t0 = cfg.number("t0");
    const double t_end = cfg.number("t_end");
    if (!(t_end >= t0)) throw ConfigError("--t-end must not be smaller than --t0");
    const int per_step = static_cast<int>(cfg.integer("checkpoints_per_step"));
    if (per_step < 0) throw ConfigError("--checkpoints-per-step must be >= 0");

    const Trajectory traj =
        t_end > t0 ? integrate(*state, cfg.params, t0, t_end, cfg.integrator) : Trajectory{};

    Json meta = document(cfg, "trajectory", Json::object());
    meta.erase("report");
    meta.erase("report_type");
    meta["seed"] = cfg.seed("seed");
    export_trajectory(traj, cfg.params, cfg.output.path, meta, per_step);

    if (!cfg.output.report.empty()) {
        write_report(document(cfg, "simulation", trajectory_summary(traj)), cfg.output.report,
                     report_format_from_string(cfg.output.format));
    }
    return kExitOk;
}

int run_scan(const RunConfig& cfg) {
    const InequalityKind kind = inequality_kind_from_string(cfg.text("kind"));
    const double tol = cfg.number("tol");
    const std::int64_t random = cfg.integer("random");
    ScanReport rep;
    if (random > 0) {
        rep = random_scan(kind, cfg.params, random, cfg.seed("seed"), tol,
                          cfg.integer("isotropic_every"), cfg.number("equality_tol"));
    } else {
        rep = scan_inequality(kind, cfg.params, static_cast<int>(cfg.integer("resolution")), tol,
                              cfg.numbers("times"));
    }
    return emit(cfg, "scan", to_json(rep), rep.passed());
}

int run_verify_set(const RunConfig& cfg) {
    const SetSpec spec{set_kind_from_string(cfg.text("set")), cfg.params};
    InvarianceOptions opts;
    opts.checkpoints_per_step = static_cast<int>(cfg.integer("checkpoints_per_step"));
    opts.band_factor = cfg.number("band_factor");
    opts.sampler.box_factor = cfg.number("box_factor");
    opts.sampler.attempts_per_point = static_cast<int>(cfg.integer("attempts"));
    if (cfg.has("recheck")) opts.recheck = SetSpec{set_kind_from_string(cfg.text("recheck")), cfg.params};
    const auto rep = check_invariance(spec, static_cast<int>(cfg.integer("samples")),
                                      cfg.number("horizon"), cfg.seed("seed"), cfg.integrator,
                                      cfg.number("tol"), opts);
    return emit(cfg, "invariance", to_json(rep), rep.passed());
}

int run_verify_estimate(const RunConfig& cfg) {
    const EstimateVariant variant = estimate_variant_from_string(cfg.text("variant"));
    require_variant_params(variant, cfg.params);
    const double t_end = cfg.number("t_end");
    if (!(t_end > 0.0)) throw ConfigError("--t-end must be positive");
    if (const auto state = cfg.state("state")) {
        if (!satisfies_hypothesis(variant, *state))
            throw HypothesisViolated("initial state fails the hypothesis of " +
                                     std::string(to_string(variant)));
        const Trajectory traj = integrate(*state, cfg.params, 0.0, t_end, cfg.integrator);
        const auto rep = check_estimate(traj, variant, cfg.params, cfg.number("tol"), "state");
        return emit(cfg, "estimate", to_json(rep), rep.passed());
    }
    const auto batch =
        check_estimates_seeded(variant, cfg.params, static_cast<int>(cfg.integer("samples")),
                               cfg.seed("seed"), t_end, cfg.integrator, cfg.number("tol"));
    return emit(cfg, "estimate-batch", to_json(batch), batch.passed());
}

int run_deriv_check(const RunConfig& cfg) {
    const std::string which = cfg.text("quantity");
    std::vector<DerivQuantity> quantities;
    if (which == "both") {
        quantities = {DerivQuantity::Lambda, DerivQuantity::Xi};
    } else {
        quantities = {deriv_quantity_from_string(which)};
    }
    DerivBatchOptions opts;
    opts.h = cfg.number("h");
    opts.horizon = cfg.number("horizon");
    opts.points = static_cast<int>(cfg.integer("points"));
    opts.tol = cfg.number("tol");
    opts.min_decay = cfg.number("min_decay");
    opts.floor = cfg.number("floor");
    if (cfg.params_given) opts.params = cfg.params;

    Json batches = Json::array();
    bool passed = true;
    for (DerivQuantity q : quantities) {
        const auto rep = check_derivatives_seeded(q, static_cast<int>(cfg.integer("trajectories")),
                                                  cfg.seed("seed"), cfg.integrator, opts);
        passed = passed && rep.passed();
        batches.push_back(to_json(rep));
    }
    return emit(cfg, "deriv-check", Json{{"passed", passed}, {"batches", batches}}, passed);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

int run_plot(const RunConfig& cfg) {
    const std::string csv = read_file(cfg.text("input"));
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::istringstream is(csv);
    for (std::string line; std::getline(is, line);) {
        if (line.empty() || line[0] == '#') continue;
        if (header.empty()) {
            header = split(line, ',');
            continue;
        }
        std::vector<double> row;
        for (const auto& cell : split(line, ',')) row.push_back(parse_double(cell));
        if (row.size() != header.size())
            throw IoError("row with " + std::to_string(row.size()) + " cells in '" +
                          cfg.text("input") + "'");
        rows.push_back(std::move(row));
    }
    if (header.empty()) throw IoError("no header in '" + cfg.text("input") + "'");
    auto column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ConfigError("no column '" + name + "' in the input");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t xc = column(cfg.text("x"));
    std::vector<std::size_t> ycs;
    for (const auto& name : split(cfg.text("columns"), ',')) ycs.push_back(column(name));

    const double width = static_cast<double>(cfg.integer("width"));
    const double height = static_cast<double>(cfg.integer("height"));
    if (!(width >= 100 && height >= 100)) throw ConfigError("plot size must be at least 100x100");
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& r : rows) {
        if (!std::isfinite(r[xc])) continue;
        x0 = std::min(x0, r[xc]);
        x1 = std::max(x1, r[xc]);
        for (auto yc : ycs) {
            if (!std::isfinite(r[yc])) continue;
            y0 = std::min(y0, r[yc]);
            y1 = std::max(y1, r[yc]);
        }
    }
    if (!(x1 >= x0)) x0 = 0.0, x1 = 1.0;
    if (!(y1 >= y0)) y0 = 0.0, y1 = 1.0;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;

    const double left = 70, right = 20, top = 40, bottom = 50;
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
        svg << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18
            << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt_tick(xv) << "</text>\n";
        svg << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << fmt_tick(yv) << "</text>\n";
    }
    svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10
        << "\" font-size=\"12\" text-anchor=\"middle\">" << escape_xml(header[xc]) << "</text>\n";
    if (!cfg.text("title").empty())
        svg << "<text x=\"" << left + pw / 2 << "\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">"
            << escape_xml(cfg.text("title")) << "</text>\n";
    for (std::size_t k = 0; k < ycs.size(); ++k) {
        const char* color = colors[k % 8];
        std::string points;
        auto flush = [&] {
            if (!points.empty())
                svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
                    << points << "\"/>\n";
            points.clear();
        };
        for (const auto& r : rows) {
            if (!std::isfinite(r[xc]) || !std::isfinite(r[ycs[k]])) {
                flush();
                continue;
            }
            points += fmt_tick(px(r[xc])) + "," + fmt_tick(py(r[ycs[k]])) + " ";
        }
        flush();
        svg << "<text x=\"" << left + 8 << "\" y=\"" << top + 16 + 14 * static_cast<double>(k)
            << "\" font-size=\"12\" fill=\"" << color << "\">" << escape_xml(header[ycs[k]])
            << "</text>\n";
    }
    svg << "</svg>\n";
    write_file(cfg.output.path, svg.str());
    return kExitOk;
}

int dispatch(const RunConfig& cfg) {
    report_format_from_string(cfg.output.format);
    cfg.integrator.validate();
    if (cfg.command == "simulate") return run_simulate(cfg);
    if (cfg.command == "scan") return run_scan(cfg);
    if (cfg.command == "verify-set") return run_verify_set(cfg);
    if (cfg.command == "verify-estimate") return run_verify_estimate(cfg);
    if (cfg.command == "deriv-check") return run_deriv_check(cfg);
    if (cfg.command == "plot") return run_plot(cfg);
    throw ConfigError("unknown command '" + cfg.command + "'");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& err) {
    CLI::App app{"pinchlab: curvature-eigenvalue ODE simulation and pinching-estimate checks"};
    app.require_subcommand(1);
    app.set_version_flag("--version", PINCHLAB_VERSION);

    static const std::map<std::string, std::string> descriptions{
        {"simulate", "integrate the reaction ODE and export a trajectory CSV"},
        {"scan", "grid or random sign scan of a pinching inequality"},
        {"verify-set", "check invariance of X, K, Y or W from near-boundary samples"},
        {"verify-estimate", "check a scalar-curvature estimate along trajectories"},
        {"deriv-check", "compare finite-difference and closed-form derivatives of Lambda, xi"},
        {"plot", "render columns of a trajectory CSV as SVG"},
    };
    std::vector<std::unique_ptr<Subcommand>> subs;
    for (const auto& name : command_names()) {
        auto sc = std::make_unique<Subcommand>();
        sc->app = app.add_subcommand(name, descriptions.at(name));
        // deriv-check has its own --h option.
        if (name == "deriv-check") sc->app->set_help_flag("--help", "Print this help message and exit");
        bind_common(*sc);
        subs.push_back(std::move(sc));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream out, diag;
        const int code = app.exit(e, out, diag);
        std::fputs(out.str().c_str(), stdout);
        err << diag.str();
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        for (const auto& sc : subs) {
            if (!sc->app->parsed()) continue;
            RunConfig cfg = default_config(sc->app->get_name());
            if (!sc->config_path.empty()) {
                Json file;
                try {
                    file = Json::parse(read_file(sc->config_path));
                } catch (const Json::parse_error& e) {
                    throw ConfigError("cannot parse '" + sc->config_path + "': " + e.what());
                }
                apply_config_file(cfg, file);
            }
            sc->binder.apply(cfg);
            return dispatch(cfg);
        }
    } catch (const PinchError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    err << "error: no command given\n";
    return kExitUsage;
}

}  // namespace pinchlab::cli
