#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "cav/geometry.hpp"
#include "cav/trajectory.hpp"

namespace cav {

using VehicleId = std::int64_t;

struct TimeInterval {
  double begin = 0.0;
  double end = 0.0;

  double length() const { return end - begin; }
  bool contains(double t) const { return begin <= t && t <= end; }
};

struct LaneSegment {
  double begin = 0.0;
  double end = 0.0;
  LaneId lane;
};

/// Piecewise-constant lane occupied over [t0, tf]. Segments are contiguous
/// and ordered; a shared boundary belongs to the later segment.
class LaneFunction {
 public:
  /// Throws std::invalid_argument unless the segments partition a window.
  explicit LaneFunction(std::vector<LaneSegment> segments);

  static LaneFunction constant(LaneId lane, double t0, double tf);

  LaneId lane_at(double t) const;
  LaneId terminal_lane() const { return segments_.back().lane; }
  const std::vector<LaneSegment>& segments() const { return segments_; }
  bool occupies(LaneId lane, double t) const;

 private:
  std::vector<LaneSegment> segments_;
};

/// One published path trajectory of the crossing protocol.
struct ProtocolEntry {
  VehicleId vehicle_id = 0;
  Movement movement{Cardinal::West, Cardinal::East};
  CubicTrajectory trajectory;
  InverseFit inverse_fit;
  LaneFunction lane_function = LaneFunction::constant(LaneId{1}, 0.0, 1.0);
  VehicleParams params;
  double t0 = 0.0;
  double tf = 0.0;
  // Filled in on registration.
  TimeInterval merging_occupancy;
};

/// Builds an entry from a planned trajectory; the inverse fit is computed
/// here.
ProtocolEntry make_entry(VehicleId id, const Movement& movement, const CubicTrajectory& traj,
                         const LaneFunction& lanes, const VehicleParams& params);

/// Append-only store of every registered vehicle's path trajectory. Exited
/// vehicles stay registered but drop out of active queries.
class CrossingProtocol {
 public:
  explicit CrossingProtocol(IntersectionLayout layout);

  const IntersectionLayout& layout() const { return layout_; }

  /// Throws std::invalid_argument on a duplicate id, an inconsistent
  /// window, or a terminal lane that the movement may not use.
  void register_entry(ProtocolEntry entry);

  const std::vector<ProtocolEntry>& entries() const { return entries_; }
  const ProtocolEntry* find(VehicleId id) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Entries with t in [t0, tf], in registration order.
  std::vector<const ProtocolEntry*> active_entries(double t) const;

  /// Nearest active vehicle ahead of a vehicle entering `lane` at `t0`.
  /// Registered vehicles at the entry point itself count as ahead.
  const ProtocolEntry* predecessor_on_lane(LaneId lane, Cardinal approach, double t0) const;

  /// Times at which the entry's trajectory crosses the merging-zone
  /// boundaries.
  TimeInterval merging_occupancy(const ProtocolEntry& entry) const;

 private:
  IntersectionLayout layout_;
  std::vector<ProtocolEntry> entries_;
  std::unordered_map<VehicleId, std::size_t> index_;
};

TimeInterval merging_occupancy(const IntersectionLayout& layout, const Movement& movement,
                               const CubicTrajectory& traj);

}  // namespace cav
