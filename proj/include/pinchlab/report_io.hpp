/// @file report_io.hpp
/// @brief CSV trajectory export and JSON / text report serialization.
///
/// CSV and text output print doubles with 17 significant digits. In JSON the
/// non-finite values are the strings "inf", "-inf" and "nan".
#pragma once

#include <string>
#include <string_view>

#include "json.hpp"
#include "pinchlab/cone_sets.hpp"
#include "pinchlab/eigen_ode.hpp"
#include "pinchlab/integrator.hpp"
#include "pinchlab/verifier.hpp"

namespace pinchlab {

using Json = nlohmann::ordered_json;

/// 17 significant digits, "inf", "-inf" or "nan".
std::string format_double(double x);
/// Inverse of format_double (also accepts any strtod syntax).
double parse_double(std::string_view text);

Json number_to_json(double x);
/// Accepts a JSON number or one of the strings "inf", "-inf", "nan".
double number_from_json(const Json& j);

Json to_json(const EigenTriple& s);
Json to_json(const FlowParams& p);
Json to_json(const IntegratorConfig& c);
Json to_json(const SetSpec& s);
Json to_json(const ScanReport& r);
Json to_json(const InvarianceReport& r);
Json to_json(const EstimateReport& r);
Json to_json(const EstimateBatchReport& r);
Json to_json(const DerivativeReport& r);
Json to_json(const DerivBatchReport& r);
/// Summary of a trajectory run: terminal state, blow-up, events, counters.
Json trajectory_summary(const Trajectory& traj);

EigenTriple eigen_triple_from_json(const Json& j);
FlowParams flow_params_from_json(const Json& j);
ScanReport scan_report_from_json(const Json& j);

enum class ReportFormat { Json, Text };
ReportFormat report_format_from_string(std::string_view name);

/// Output document {tool, config, report_type, report}.
Json make_document(std::string_view report_type, const Json& config, const Json& report);

/// Pretty JSON (two-space indent, trailing newline).
std::string render_json(const Json& doc);
/// One "key: value" line per leaf. Report fields appear under their own
/// names, everything else under a dotted prefix, e.g. "config.params.rho".
std::string render_text(const Json& doc);

/// Writes `content` to `path`; "-" means standard output. Throws IoError
/// with the path on failure.
void write_file(const std::string& path, std::string_view content);
std::string read_file(const std::string& path);

void write_report(const Json& doc, const std::string& path, ReportFormat format);

inline constexpr std::string_view kTrajectoryHeader =
    "t,lambda,mu,nu,R,ric_min,margin_X,margin_W,margin_K";

/// CSV text of a trajectory: `#` metadata lines (one per leaf of
/// `metadata`), the header, then one row per dense checkpoint. Margins use
/// the set's time argument t and are NaN where the set is inadmissible for
/// `params`.
std::string trajectory_csv(const Trajectory& traj, const FlowParams& params, const Json& metadata,
                           int checkpoints_per_step = 3);

void export_trajectory(const Trajectory& traj, const FlowParams& params, const std::string& path,
                       const Json& metadata = Json::object(), int checkpoints_per_step = 3);

}  // namespace pinchlab
