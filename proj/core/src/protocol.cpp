#include "cav/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cav {

LaneFunction::LaneFunction(std::vector<LaneSegment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("lane function: no segments");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (!(segments_[i].end > segments_[i].begin)) {
      throw std::invalid_argument("lane function: segment " + std::to_string(i) + " is empty");
    }
    if (i > 0 && segments_[i].begin != segments_[i - 1].end) {
      throw std::invalid_argument("lane function: gap or overlap before segment " +
                                  std::to_string(i));
    }
  }
}

LaneFunction LaneFunction::constant(LaneId lane, double t0, double tf) {
  return LaneFunction({LaneSegment{t0, tf, lane}});
}

LaneId LaneFunction::lane_at(double t) const {
  if (t < segments_.front().begin || t > segments_.back().end) {
    throw std::out_of_range("lane function: t = " + std::to_string(t) + " outside window");
  }
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
    if (t >= it->begin) return it->lane;
  }
  return segments_.front().lane;
}

bool LaneFunction::occupies(LaneId lane, double t) const {
  if (t < segments_.front().begin || t > segments_.back().end) return false;
  return lane_at(t) == lane;
}

TimeInterval merging_occupancy(const IntersectionLayout& layout, const Movement& movement,
                               const CubicTrajectory& traj) {
  const auto window = merging_window(layout, movement);
  return {invert(traj, window.entry_position), invert(traj, window.exit_position)};
}

ProtocolEntry make_entry(VehicleId id, const Movement& movement, const CubicTrajectory& traj,
                         const LaneFunction& lanes, const VehicleParams& params) {
  ProtocolEntry e;
  e.vehicle_id = id;
  e.movement = movement;
  e.trajectory = traj;
  e.inverse_fit = fit_inverse_cubic(traj);
  e.lane_function = lanes;
  e.params = params;
  e.t0 = traj.t0;
  e.tf = traj.tf;
  return e;
}

CrossingProtocol::CrossingProtocol(IntersectionLayout layout) : layout_(std::move(layout)) {}

void CrossingProtocol::register_entry(ProtocolEntry entry) {
  if (index_.contains(entry.vehicle_id)) {
    throw std::invalid_argument("protocol: vehicle " + std::to_string(entry.vehicle_id) +
                                " is already registered");
  }
  if (!(entry.tf > entry.t0) || entry.trajectory.t0 != entry.t0 ||
      entry.trajectory.tf != entry.tf) {
    throw std::invalid_argument("protocol: entry window must match its trajectory and be "
                                "non-empty");
  }
  const auto& segs = entry.lane_function.segments();
  if (segs.front().begin != entry.t0 || segs.back().end != entry.tf) {
    throw std::invalid_argument("protocol: lane function must cover [t0, tf]");
  }
  const auto lanes = allowed_lanes(entry.movement, layout_);
  if (std::find(lanes.begin(), lanes.end(), entry.lane_function.terminal_lane()) ==
      lanes.end()) {
    throw std::invalid_argument("protocol: terminal lane not allowed for movement " +
                                to_string(entry.movement));
  }
  entry.merging_occupancy = merging_occupancy(entry);
  index_.emplace(entry.vehicle_id, entries_.size());
  entries_.push_back(std::move(entry));
}

const ProtocolEntry* CrossingProtocol::find(VehicleId id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

std::vector<const ProtocolEntry*> CrossingProtocol::active_entries(double t) const {
  std::vector<const ProtocolEntry*> out;
  for (const auto& e : entries_) {
    if (e.t0 <= t && t <= e.tf) out.push_back(&e);
  }
  return out;
}

const ProtocolEntry* CrossingProtocol::predecessor_on_lane(LaneId lane, Cardinal approach,
                                                           double t0) const {
  if (approach_of(layout_, lane) != approach) return nullptr;
  const ProtocolEntry* best = nullptr;
  double best_gap = 0.0;
  for (const auto& e : entries_) {
    if (!(e.t0 <= t0 && t0 <= e.tf)) continue;
    if (e.movement.origin() != approach || !e.lane_function.occupies(lane, t0)) continue;
    const double gap = eval(e.trajectory, t0).position;
    if (gap < 0.0) continue;
    // Later registrations win ties.
    if (best == nullptr || gap <= best_gap) {
      best = &e;
      best_gap = gap;
    }
  }
  return best;
}

TimeInterval CrossingProtocol::merging_occupancy(const ProtocolEntry& entry) const {
  return cav::merging_occupancy(layout_, entry.movement, entry.trajectory);
}

}  // namespace cav
