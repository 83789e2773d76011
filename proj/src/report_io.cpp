#include "pinchlab/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "pinchlab/errors.hpp"
#include "pinchlab/pinch_functions.hpp"

#ifndef PINCHLAB_VERSION
#define PINCHLAB_VERSION "0.0.0"
#endif

namespace pinchlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class Enum>
Enum parse_enum_name(const Json& j, Enum (*from)(std::string_view)) {
    return from(j.get<std::string>());
}

InequalityKind kind_from(std::string_view s) { return inequality_kind_from_string(s); }

Json optional_to_json(const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); }
Json optional_to_json(const std::optional<std::uint64_t>& v) {
    return v ? Json(*v) : Json(nullptr);
}

void flatten(const Json& j, const std::string& prefix, std::string& out) {
    auto line = [&](const std::string& value) {
        out += prefix;
        out += ": ";
        out += value;
        out += '\n';
    };
    if (j.is_object()) {
        if (j.empty()) line("{}");
        for (const auto& [k, v] : j.items())
            flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    } else if (j.is_array()) {
        const bool scalars = std::all_of(j.begin(), j.end(), [](const Json& e) {
            return !e.is_object() && !e.is_array();
        });
        if (scalars) {
            std::string joined;
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) joined += ", ";
                joined += j[i].is_string() ? j[i].get<std::string>()
                          : j[i].is_number_float() ? format_double(j[i].get<double>())
                                                   : j[i].dump();
            }
            line("[" + joined + "]");
        } else {
            for (std::size_t i = 0; i < j.size(); ++i)
                flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
        }
    } else if (j.is_string()) {
        line(j.get<std::string>());
    } else if (j.is_number_float()) {
        line(format_double(j.get<double>()));
    } else {
        line(j.dump());
    }
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res =
        std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    if (text == "nan") return kNaN;
    const std::string s(text);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw ConfigError("not a number: '" + s + "'");
    return v;
}

Json number_to_json(double x) {
    if (std::isfinite(x)) return x;
    return format_double(x);
}

double number_from_json(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return parse_double(j.get<std::string>());
    if (j.is_null()) return kNaN;
    throw ConfigError("expected a number, got " + j.dump());
}

Json to_json(const EigenTriple& s) {
    return Json::array({number_to_json(s.lambda()), number_to_json(s.mu()),
                        number_to_json(s.nu())});
}

Json to_json(const FlowParams& p) {
    return Json{{"rho", number_to_json(p.rho)},
                {"eta", number_to_json(p.eta)},
                {"theta", number_to_json(p.theta)}};
}

Json to_json(const IntegratorConfig& c) {
    return Json{{"rel_tol", number_to_json(c.rel_tol)},
                {"abs_tol", number_to_json(c.abs_tol)},
                {"max_step", number_to_json(c.max_step)},
                {"blowup_norm", number_to_json(c.blowup_norm)},
                {"max_steps", c.max_steps},
                {"detect_events", c.detect_events}};
}

Json to_json(const SetSpec& s) {
    Json j = to_json(s.params);
    j["set"] = std::string(to_string(s.kind));
    return j;
}

Json to_json(const ScanReport& r) {
    Json times = Json::array();
    for (double t : r.times) times.push_back(number_to_json(t));
    return Json{{"kind", std::string(to_string(r.kind))},
                {"params", to_json(r.params)},
                {"sampling", r.sampling},
                {"resolution", r.resolution},
                {"seed", r.seed},
                {"points_checked", r.points_checked},
                {"min_margin", number_to_json(r.min_margin)},
                {"argmin_state", to_json(r.argmin_state)},
                {"argmin_time", number_to_json(r.argmin_time)},
                {"violations", r.violations},
                {"near_boundary_violations", r.near_boundary_violations},
                {"tol", number_to_json(r.tol)},
                {"times", times},
                {"isotropic_injected", r.isotropic_injected},
                {"isotropic_equalities", r.isotropic_equalities},
                {"equality_tol", number_to_json(r.equality_tol)},
                {"passed", r.passed()}};
}

Json to_json(const InvarianceReport& r) {
    return Json{{"set", to_json(r.spec)},
                {"recheck_set", to_json(r.recheck_spec)},
                {"observation_only", r.observation_only},
                {"samples", r.samples},
                {"horizon", number_to_json(r.horizon)},
                {"seed", r.seed},
                {"tol", number_to_json(r.tol)},
                {"band", number_to_json(r.band)},
                {"worst_drift", number_to_json(r.worst_drift)},
                {"worst_time", number_to_json(r.worst_time)},
                {"worst_sample", r.worst_sample},
                {"worst_initial_state", to_json(r.worst_initial_state)},
                {"violating_sample", optional_to_json(r.violating_sample)},
                {"violating_seed", optional_to_json(r.violating_seed)},
                {"blowups", r.blowups},
                {"step_limits", r.step_limits},
                {"checkpoints", r.checkpoints},
                {"passed", r.passed()}};
}

Json to_json(const EstimateReport& r) {
    Json intervals = Json::array();
    for (const auto& [a, b] : r.trigger_times)
        intervals.push_back(Json::array({number_to_json(a), number_to_json(b)}));
    return Json{{"variant", std::string(to_string(r.variant))},
                {"params", to_json(r.params)},
                {"trajectory_id", r.trajectory_id},
                {"initial_state", to_json(r.initial_state)},
                {"worst_slack", number_to_json(r.worst_slack)},
                {"worst_time", number_to_json(r.worst_time)},
                {"trigger_times", intervals},
                {"checkpoints", r.checkpoints},
                {"triggered_checkpoints", r.triggered_checkpoints},
                {"violations", r.violations},
                {"tol", number_to_json(r.tol)},
                {"terminal", std::string(to_string(r.terminal))},
                {"t_last", number_to_json(r.t_last)},
                {"passed", r.passed()}};
}

Json to_json(const EstimateBatchReport& r) {
    Json runs = Json::array();
    for (const auto& run : r.runs) runs.push_back(to_json(run));
    return Json{{"variant", std::string(to_string(r.variant))},
                {"params", to_json(r.params)},
                {"seed", r.seed},
                {"t_end", number_to_json(r.t_end)},
                {"tol", number_to_json(r.tol)},
                {"samples", r.runs.size()},
                {"worst_slack", number_to_json(r.worst_slack)},
                {"worst_run", r.worst_run},
                {"blowups", r.blowups},
                {"reached_end", r.reached_end},
                {"step_limits", r.step_limits},
                {"passed", r.passed()},
                {"runs", runs}};
}

Json to_json(const DerivativeReport& r) {
    return Json{{"quantity", std::string(to_string(r.quantity))},
                {"params", to_json(r.params)},
                {"h", number_to_json(r.h)},
                {"points", r.points},
                {"window", Json::array({number_to_json(r.window_begin),
                                        number_to_json(r.window_end)})},
                {"max_abs_discrepancy", number_to_json(r.max_abs_discrepancy)},
                {"max_rel_discrepancy", number_to_json(r.max_rel_discrepancy)},
                {"worst_time", number_to_json(r.worst_time)}};
}

Json to_json(const DerivBatchReport& r) {
    Json runs = Json::array();
    for (const auto& e : r.runs) {
        runs.push_back(Json{{"trajectory_id", e.trajectory_id},
                            {"initial_state", to_json(e.initial_state)},
                            {"params", to_json(e.params)},
                            {"discrepancy", number_to_json(e.discrepancy)},
                            {"discrepancy_half_h", number_to_json(e.discrepancy_half)},
                            {"decay", number_to_json(e.discrepancy / e.discrepancy_half)},
                            {"worst_time", number_to_json(e.worst_time)}});
    }
    return Json{{"quantity", std::string(to_string(r.quantity))},
                {"seed", r.seed},
                {"h", number_to_json(r.h)},
                {"horizon", number_to_json(r.horizon)},
                {"points", r.points},
                {"tol", number_to_json(r.tol)},
                {"min_decay", number_to_json(r.min_decay)},
                {"floor", number_to_json(r.floor)},
                {"trajectories", r.runs.size()},
                {"max_discrepancy", number_to_json(r.max_discrepancy)},
                {"worst_run", r.worst_run},
                {"observed_min_decay", number_to_json(r.observed_min_decay)},
                {"passed", r.passed()},
                {"runs", runs}};
}

Json trajectory_summary(const Trajectory& traj) {
    Json events = Json::array();
    for (const auto& e : traj.events())
        events.push_back(Json{{"kind", std::string(to_string(e.kind))},
                              {"t", number_to_json(e.t)},
                              {"direction", e.direction}});
    Json j{{"accepted_steps", traj.empty() ? 0 : traj.size() - 1},
           {"rejected_steps", traj.rejected_steps()},
           {"terminal", std::string(to_string(traj.terminal()))},
           {"blowup_cause", std::string(to_string(traj.blowup_cause()))},
           {"blowup_time", number_to_json(traj.blowup_time())},
           {"min_ordering_gap", number_to_json(traj.min_ordering_gap())},
           {"reorder_count", traj.reorder_count()},
           {"events", events}};
    if (!traj.empty()) {
        j["t_begin"] = number_to_json(traj.t_begin());
        j["t_last"] = number_to_json(traj.t_last());
        j["final_state"] = to_json(traj.states().back());
    }
    return j;
}

EigenTriple eigen_triple_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("state must be an array of 3 numbers");
    return EigenTriple::ordered(number_from_json(j[0]), number_from_json(j[1]),
                                number_from_json(j[2]));
}

FlowParams flow_params_from_json(const Json& j) {
    FlowParams p;
    p.rho = number_from_json(j.at("rho"));
    p.eta = number_from_json(j.at("eta"));
    p.theta = number_from_json(j.at("theta"));
    return p;
}

ScanReport scan_report_from_json(const Json& j) {
    try {
        ScanReport r;
        r.kind = parse_enum_name(j.at("kind"), &kind_from);
        r.params = flow_params_from_json(j.at("params"));
        r.sampling = j.at("sampling").get<std::string>();
        r.resolution = j.at("resolution").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.points_checked = j.at("points_checked").get<std::int64_t>();
        r.min_margin = number_from_json(j.at("min_margin"));
        r.argmin_state = eigen_triple_from_json(j.at("argmin_state"));
        r.argmin_time = number_from_json(j.at("argmin_time"));
        r.violations = j.at("violations").get<std::int64_t>();
        r.near_boundary_violations = j.at("near_boundary_violations").get<std::int64_t>();
        r.tol = number_from_json(j.at("tol"));
        r.times.clear();
        for (const auto& t : j.at("times")) r.times.push_back(number_from_json(t));
        r.isotropic_injected = j.at("isotropic_injected").get<std::int64_t>();
        r.isotropic_equalities = j.at("isotropic_equalities").get<std::int64_t>();
        r.equality_tol = number_from_json(j.at("equality_tol"));
        return r;
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed scan report: ") + e.what());
    }
}

ReportFormat report_format_from_string(std::string_view name) {
    if (name == "json") return ReportFormat::Json;
    if (name == "text") return ReportFormat::Text;
    throw ConfigError("unknown report format '" + std::string(name) + "' (json or text)");
}

Json make_document(std::string_view report_type, const Json& config, const Json& report) {
    return Json{{"tool", Json{{"name", "pinchlab"}, {"version", PINCHLAB_VERSION}}},
                {"config", config},
                {"report_type", std::string(report_type)},
                {"report", report}};
}

std::string render_json(const Json& doc) { return doc.dump(2) + "\n"; }

std::string render_text(const Json& doc) {
    std::string out;
    if (doc.contains("report_type")) {
        out += "report_type: " + doc.at("report_type").get<std::string>() + "\n";
        if (doc.contains("report")) flatten(doc.at("report"), "", out);
        for (const auto& [k, v] : doc.items())
            if (k != "report" && k != "report_type") flatten(v, k, out);
    } else {
        flatten(doc, "", out);
    }
    return out;
}

void write_file(const std::string& path, std::string_view content) {
    if (path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.close();
    if (!os) throw IoError("failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << is.rdbuf();
    if (is.bad()) throw IoError("failed reading '" + path + "'");
    return ss.str();
}

void write_report(const Json& doc, const std::string& path, ReportFormat format) {
    write_file(path, format == ReportFormat::Json ? render_json(doc) : render_text(doc));
}

std::string trajectory_csv(const Trajectory& traj, const FlowParams& params, const Json& metadata,
                           int checkpoints_per_step) {
    std::string meta;
    flatten(metadata, "", meta);
    std::string out;
    std::istringstream lines(meta);
    for (std::string line; std::getline(lines, line);) out += "# " + line + "\n";
    out += kTrajectoryHeader;
    out += '\n';
    if (traj.empty()) return out;

    const SetSpec sets[3] = {{SetKind::X, params}, {SetKind::W, params}, {SetKind::K, params}};
    bool admissible[3];
    for (int i = 0; i < 3; ++i) admissible[i] = sets[i].admissible();

    for (double t : traj.checkpoints(checkpoints_per_step)) {
        const EigenTriple s = traj.eval_at(t);
        const DerivedCurvatures dc = derived_curvatures(s);
        out += format_double(t);
        for (double v : {s.lambda(), s.mu(), s.nu(), dc.scalar, s.ricci_min()}) {
            out += ',';
            out += format_double(v);
        }
        for (int i = 0; i < 3; ++i) {
            double m = kNaN;
            if (admissible[i]) {
                try {
                    m = membership(sets[i], s, t).margin;
                } catch (const DomainError&) {
                    m = kNaN;
                }
            }
            out += ',';
            out += format_double(m);
        }
        out += '\n';
    }
    return out;
}

void export_trajectory(const Trajectory& traj, const FlowParams& params, const std::string& path,
                       const Json& metadata, int checkpoints_per_step) {
    write_file(path, trajectory_csv(traj, params, metadata, checkpoints_per_step));
}

}  // namespace pinchlab
