#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "cav/simulation.hpp"

namespace cav {

inline constexpr std::string_view kTrajectoryCsvHeader =
    "t,vehicle_id,lane,position_m,speed_mps,accel_mps2,rear_margin_m";

/// One row per vehicle per log sample; rear_margin_m is empty without a
/// leader on the lane.
std::string trajectory_csv(const std::vector<LogSample>& log);

std::string metrics_json(const MetricsReport& metrics, const std::vector<Violation>& violations);

/// One JSON object per registered vehicle, in registration order.
std::string protocol_jsonl(const CrossingProtocol& protocol);

/// Wide per-quantity tables keyed by file name: plot_position.csv,
/// plot_speed.csv, plot_accel.csv, plot_safety_distance.csv. Columns are t
/// then one per vehicle id; cells are empty while a vehicle is outside the
/// control zone.
std::map<std::string, std::string> plot_tables(const std::vector<LogSample>& log);

std::string plan_debug_json(const PlanResult& result, const ProtocolEntry& entry);

std::string comparison_table(const PolicyComparison& comparison);

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// trajectory.csv, metrics.json, protocol.jsonl and the plot tables.
void write_run_outputs(const std::filesystem::path& dir, const RunResult& result);

}  // namespace cav
