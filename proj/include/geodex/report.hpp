#pragma once

#include <string>
#include <vector>

#include "geodex/grasp_sim.hpp"

namespace geodex {

inline constexpr const char* kReportFormat = "geodex-report/1";

/// JSON document for one run:
///
///   format        "geodex-report/1"
///   scenario, kind, feedback, seed
///   controller    { gain: K rows, period_s }
///   contacts      contact names, intrinsic first
///   summary       { aborted, abort_reason, events, final_error_n, converged,
///                   max_orientation_change_deg, rms_angle_error_deg,
///                   final_angle_error_deg, success, step_count, wall_seconds }
///   config_echo   the scenario file, byte for byte
///   steps         [{ t_s, settled, residual, error_n, angle_deg, target_angle_deg,
///                    position_m, orientation_wxyz,
///                    desired_n, raw_n, estimated_n, true_n }]
///
/// Force arrays hold one [x, y, z] per contact, world frame, on the object.
std::string report_to_json(const RunReport& report);

/// One row per step: time, pose, angle, error, then desired/raw/estimated/true
/// force components per contact. Contains no timing, so identical runs give
/// identical files.
std::string report_to_csv(const RunReport& report);

/// Schema problems of a serialized report; empty when it is valid.
std::vector<std::string> validate_report(const std::string& json_text);

}  // namespace geodex
