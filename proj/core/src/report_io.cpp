#include "cav/report_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <system_error>

#include <fmt/core.h>
#include <json.hpp>

#include "cav/scenario_io.hpp"

namespace cav {
namespace {

using nlohmann::ordered_json;

// Fixed-point text without a "-0.000" artefact.
std::string fixed(double x, int digits) {
  if (std::abs(x) < 0.5 * std::pow(10.0, -digits)) x = 0.0;
  return fmt::format("{:.{}f}", x, digits);
}

ordered_json optional_number(const std::optional<double>& x) {
  return x ? ordered_json(*x) : ordered_json(nullptr);
}

ordered_json movement_json(const Movement& m) {
  return {{"origin", std::string(to_string(m.origin()))},
          {"exit", std::string(to_string(m.exit()))},
          {"turn", std::string(to_string(m.turn_kind()))}};
}

ordered_json phi_json(const CubicTrajectory& t) {
  return ordered_json::array({t.phi3, t.phi2, t.phi1, t.phi0});
}

ordered_json omega_json(const InverseFit& f) {
  return ordered_json::array({f.omega3, f.omega2, f.omega1, f.omega0});
}

ordered_json lanes_json(const LaneFunction& lanes) {
  auto out = ordered_json::array();
  for (const auto& s : lanes.segments()) {
    out.push_back({{"begin", s.begin}, {"end", s.end}, {"lane", s.lane.value}});
  }
  return out;
}

}  // namespace

std::string trajectory_csv(const std::vector<LogSample>& log) {
  std::string out(kTrajectoryCsvHeader);
  out += '\n';
  for (const auto& s : log) {
    out += fmt::format("{},{},{},{},{},{},{}\n", fixed(s.t, 6), s.vehicle, s.lane.value,
                       fixed(s.position, 9), fixed(s.speed, 9), fixed(s.accel, 9),
                       s.rear_margin ? fixed(*s.rear_margin, 9) : std::string());
  }
  return out;
}

std::string metrics_json(const MetricsReport& m, const std::vector<Violation>& violations) {
  ordered_json doc;
  doc["policy"] = std::string(to_string(m.policy));
  doc["vehicle_count"] = m.vehicles.size();
  doc["throughput_vpm"] = m.throughput_vpm;
  doc["total_travel_time_s"] = m.total_travel_time;
  doc["total_energy"] = m.total_energy;
  doc["max_abs_accel_mps2"] = m.max_abs_accel;
  doc["max_speed_mps"] = m.max_speed;
  doc["min_speed_mps"] = m.min_speed;
  doc["violation_count"] = m.violation_count;

  auto vehicles = ordered_json::array();
  for (const auto& v : m.vehicles) {
    vehicles.push_back({{"id", v.id},
                        {"lane", v.lane.value},
                        {"movement", movement_json(v.movement)},
                        {"t0", v.t0},
                        {"tf", v.tf},
                        {"travel_time_s", v.travel_time},
                        {"energy", v.energy},
                        {"min_rear_margin_m", optional_number(v.min_rear_margin)},
                        {"min_lateral_margin_s", optional_number(v.min_lateral_margin)},
                        {"binding_constraint", std::string(to_string(v.binding))},
                        {"rk4_max_position_error_m", v.dynamics.max_position_error},
                        {"rk4_max_speed_error_mps", v.dynamics.max_speed_error},
                        {"rk4_max_gap_error_m", v.dynamics.max_gap_error}});
  }
  doc["vehicles"] = std::move(vehicles);

  auto viol = ordered_json::array();
  for (const auto& v : violations) {
    viol.push_back({{"kind", std::string(to_string(v.kind))},
                    {"t", v.t},
                    {"vehicle", v.vehicle},
                    {"other", v.other ? ordered_json(*v.other) : ordered_json(nullptr)},
                    {"amount", v.amount}});
  }
  doc["violations"] = std::move(viol);
  return doc.dump(2) + "\n";
}

std::string protocol_jsonl(const CrossingProtocol& protocol) {
  std::string out;
  for (const auto& e : protocol.entries()) {
    ordered_json j;
    j["vehicle_id"] = e.vehicle_id;
    j["movement"] = movement_json(e.movement);
    j["t0"] = e.t0;
    j["tf"] = e.tf;
    j["s_total"] = e.trajectory.s_total;
    j["phi"] = phi_json(e.trajectory);
    j["omega"] = omega_json(e.inverse_fit);
    j["omega_max_residual_s"] = e.inverse_fit.max_residual;
    j["lanes"] = lanes_json(e.lane_function);
    j["merging_occupancy"] = ordered_json::array({e.merging_occupancy.begin,
                                                  e.merging_occupancy.end});
    out += j.dump() + "\n";
  }
  return out;
}

std::map<std::string, std::string> plot_tables(const std::vector<LogSample>& log) {
  std::set<VehicleId> ids;
  for (const auto& s : log) ids.insert(s.vehicle);
  std::map<VehicleId, std::size_t> column;
  std::string header = "t";
  for (auto id : ids) {
    column.emplace(id, column.size());
    header += fmt::format(",vehicle_{}", id);
  }
  header += '\n';

  struct Table {
    const char* name;
    std::string text;
  };
  Table tables[4] = {{"plot_position.csv", header},
                     {"plot_speed.csv", header},
                     {"plot_accel.csv", header},
                     {"plot_safety_distance.csv", header}};
  std::vector<std::string> cells[4];
  for (auto& c : cells) c.assign(ids.size(), std::string());

  auto flush = [&](double t) {
    for (int k = 0; k < 4; ++k) {
      tables[k].text += fixed(t, 6);
      for (auto& c : cells[k]) {
        tables[k].text += ',';
        tables[k].text += c;
        c.clear();
      }
      tables[k].text += '\n';
    }
  };

  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& s = log[i];
    const std::size_t c = column.at(s.vehicle);
    cells[0][c] = fixed(s.position, 6);
    cells[1][c] = fixed(s.speed, 6);
    cells[2][c] = fixed(s.accel, 6);
    if (s.rear_margin) cells[3][c] = fixed(*s.rear_margin, 6);
    if (i + 1 == log.size() || log[i + 1].t != s.t) flush(s.t);
  }

  std::map<std::string, std::string> out;
  for (auto& t : tables) out.emplace(t.name, std::move(t.text));
  return out;
}

std::string plan_debug_json(const PlanResult& result, const ProtocolEntry& entry) {
  ordered_json doc;
  doc["vehicle_id"] = result.vehicle_id;
  doc["movement"] = movement_json(entry.movement);
  doc["t0"] = entry.t0;
  doc["chosen_lane"] = result.lane.value;
  doc["tf"] = result.tf;
  doc["travel_time_s"] = result.tf - entry.t0;
  doc["binding_constraint"] = std::string(to_string(result.binding_constraint));
  doc["phi"] = phi_json(result.trajectory);
  doc["omega"] = omega_json(entry.inverse_fit);
  doc["omega_max_residual_s"] = entry.inverse_fit.max_residual;
  doc["merging_occupancy"] = ordered_json::array({entry.merging_occupancy.begin,
                                                  entry.merging_occupancy.end});
  doc["energy"] = energy_cost(result.trajectory);
  auto candidates = ordered_json::array();
  for (const auto& c : result.candidates) {
    auto rejected = ordered_json::array();
    for (const auto& r : c.rejected) {
      rejected.push_back({{"tf_begin", r.tf_begin},
                          {"tf_end", r.tf_end},
                          {"reason", std::string(to_string(r.reason))}});
    }
    candidates.push_back({{"lane", c.lane.value},
                          {"tf", optional_number(c.tf)},
                          {"binding_constraint", std::string(to_string(c.binding))},
                          {"rejected", std::move(rejected)}});
  }
  doc["candidates"] = std::move(candidates);
  return doc.dump(2) + "\n";
}

std::string comparison_table(const PolicyComparison& c) {
  std::string out;
  if (!c.optimal_error.empty()) out += fmt::format("optimal run failed: {}\n", c.optimal_error);
  if (!c.fifo_error.empty()) out += fmt::format("fifo run failed: {}\n", c.fifo_error);
  if (!c.both_ok()) return out;
  out += fmt::format("{:>8}  {:>14}  {:>14}  {:>10}\n", "vehicle", "optimal_tt_s", "fifo_tt_s",
                     "saving_s");
  for (const auto& d : c.deltas) {
    out += fmt::format("{:>8}  {:>14.6f}  {:>14.6f}  {:>10}\n", d.id, d.optimal_travel_time,
                       d.fifo_travel_time, fixed(d.saving, 6));
  }
  out += fmt::format("{:>8}  {:>14.6f}  {:>14.6f}  {:>10}\n", "total",
                     c.optimal_total_travel_time, c.fifo_total_travel_time,
                     fixed(c.fifo_total_travel_time - c.optimal_total_travel_time, 6));
  out += fmt::format("{:>8}  {:>14.6f}  {:>14.6f}  {:>10}\n", "energy", c.optimal_total_energy,
                     c.fifo_total_energy,
                     fixed(c.fifo_total_energy - c.optimal_total_energy, 6));
  return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

void write_run_outputs(const std::filesystem::path& dir, const RunResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
  write_atomic(dir / "trajectory.csv", trajectory_csv(result.log));
  write_atomic(dir / "metrics.json", metrics_json(result.metrics, result.violations));
  write_atomic(dir / "protocol.jsonl", protocol_jsonl(result.protocol));
  for (const auto& [name, text] : plot_tables(result.log)) write_atomic(dir / name, text);
}

}  // namespace cav
