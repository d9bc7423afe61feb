#pragma once

#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "cav/geometry.hpp"
#include "cav/protocol.hpp"
#include "cav/trajectory.hpp"

namespace cav {

enum class Policy { Optimal, Fifo };

/// Constraint that kept the exit time from being any earlier. `Order` is
/// the FIFO merging-entry ordering and only appears under Policy::Fifo.
enum class BindingConstraint { None, Bounds, RearEnd, Lateral, Order };

std::string_view to_string(Policy p);
std::string_view to_string(BindingConstraint b);
Policy parse_policy(std::string_view s);

struct PlanRequest {
  VehicleId vehicle_id = 0;
  Movement movement{Cardinal::West, Cardinal::East};
  double t0 = 0.0;
  double v0 = 0.0;
  VehicleParams params;

  /// Params valid and v_min <= v0 <= v_max.
  void validate() const;
};

struct PlannerConfig {
  double lateral_buffer = 0.0;  // s, added on both sides of other occupancies
  double horizon_cap = 120.0;   // s, largest tf - t0 searched
  double bound_margin = 1e-6;   // bounds must hold with this much slack
  double resolution = 1e-3;     // s, scan step of the exit-time search
};

/// Outcome of testing one exit time against every constraint.
struct CandidateCheck {
  bool feasible = false;
  BindingConstraint binding = BindingConstraint::None;
  CubicTrajectory trajectory;
  TimeInterval occupancy;
  // For Lateral/Order failures: the earliest merging-entry time that could
  // clear the offending constraint.
  double required_entry_time = 0.0;
};

struct RejectedInterval {
  double tf_begin = 0.0;
  double tf_end = 0.0;
  BindingConstraint reason = BindingConstraint::None;
};

struct LaneCandidate {
  LaneId lane;
  std::optional<double> tf;
  BindingConstraint binding = BindingConstraint::None;
  std::vector<RejectedInterval> rejected;
};

struct PlanResult {
  VehicleId vehicle_id = 0;
  LaneId lane;
  double tf = 0.0;
  CubicTrajectory trajectory;
  LaneFunction lane_function = LaneFunction::constant(LaneId{1}, 0.0, 1.0);
  BindingConstraint binding_constraint = BindingConstraint::None;
  std::vector<LaneCandidate> candidates;
};

class PlanningFailure : public std::runtime_error {
 public:
  PlanningFailure(VehicleId id, BindingConstraint binding, const std::string& what)
      : std::runtime_error(what), vehicle_id_(id), binding_(binding) {}

  VehicleId vehicle_id() const { return vehicle_id_; }
  BindingConstraint binding() const { return binding_; }

 private:
  VehicleId vehicle_id_;
  BindingConstraint binding_;
};

struct RearEndMargin {
  bool overlap = false;
  double min_margin = 0.0;  // m, xi * (p_leader - p_follower) - gamma - rho * v_follower
  double at = 0.0;          // absolute time of the minimum
};

/// Exact minimum of the rear-end margin over the common time window, from
/// the stationary points of the cubic margin function.
RearEndMargin rear_end_min_margin(const CubicTrajectory& follower,
                                  const CubicTrajectory& leader,
                                  const VehicleParams& follower_params);

bool rear_end_ok(const CubicTrajectory& candidate, const ProtocolEntry& leader,
                 const VehicleParams& params);

/// Closed intervals may touch; any interior overlap of
/// [candidate.begin - buffer, candidate.end + buffer] with `other` fails.
bool lateral_ok(TimeInterval candidate, TimeInterval other, double buffer);
bool lateral_ok(TimeInterval candidate, const ProtocolEntry& other, double buffer);

/// Speed and acceleration strictly inside the bounds by `margin`. The
/// entry speed is given data and may sit on a bound.
bool bounds_strict(const CubicTrajectory& traj, const VehicleParams& params, double margin);

/// Horizons T = tf - t0 (within (0, cap]) for which the unconstrained
/// trajectory satisfies bounds_strict, as ascending closed intervals.
std::vector<TimeInterval> bounds_feasible_horizons(double v0, double s_total,
                                                   const VehicleParams& params, double margin,
                                                   double cap);

/// The feasibility predicate shared by the search and its tests.
CandidateCheck check_tf(const PlanRequest& request, LaneId lane,
                        const CrossingProtocol& protocol, const PlannerConfig& config,
                        Policy policy, double tf);

/// Smallest feasible exit time on `lane`, or nullopt if none within the
/// horizon cap. `trace`, when given, receives the search record.
std::optional<double> min_feasible_tf(const PlanRequest& request, LaneId lane,
                                      const CrossingProtocol& protocol,
                                      const PlannerConfig& config,
                                      Policy policy = Policy::Optimal,
                                      LaneCandidate* trace = nullptr);

/// Best lane and exit time; ties go to the lowest lane index. Throws
/// PlanningFailure when no lane is feasible.
PlanResult plan(const PlanRequest& request, const CrossingProtocol& protocol,
                const PlannerConfig& config = {});

/// Same as plan() with merging-zone entry order preserved.
PlanResult fifo_plan(const PlanRequest& request, const CrossingProtocol& protocol,
                     const PlannerConfig& config = {});

PlanResult plan_with_policy(const PlanRequest& request, const CrossingProtocol& protocol,
                            const PlannerConfig& config, Policy policy);

/// Protocol entry for a finished plan.
ProtocolEntry to_entry(const PlanRequest& request, const PlanResult& result);

}  // namespace cav
