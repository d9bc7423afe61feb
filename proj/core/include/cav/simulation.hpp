#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cav/geometry.hpp"
#include "cav/planner.hpp"
#include "cav/protocol.hpp"
#include "cav/trajectory.hpp"

namespace cav {

struct Arrival {
  VehicleId id = 0;
  double time = 0.0;  // s, control-zone entry
  Movement movement{Cardinal::West, Cardinal::East};
  double v0 = 0.0;  // m/s
  VehicleParams params;

  friend bool operator==(const Arrival&, const Arrival&) = default;
};

struct SimSettings {
  double dt = 0.01;             // s, sampling step of the log
  double lateral_buffer = 0.0;  // s
  double horizon_cap = 120.0;   // s
  std::uint64_t seed = 0;       // recorded for generated scenarios

  friend bool operator==(const SimSettings&, const SimSettings&) = default;
};

struct Scenario {
  IntersectionLayout layout = IntersectionLayout::with_default_radii(125.0, 25.0);
  VehicleParams defaults;
  std::vector<Arrival> arrivals;
  Policy policy = Policy::Optimal;
  SimSettings sim;

  /// Non-decreasing arrival times, unique ids, valid params and speeds.
  void validate() const;
  PlannerConfig planner_config() const;
};

bool operator==(const Scenario& a, const Scenario& b);

enum class Phase { Approach, MergingZone, Exit, Done };

std::string_view to_string(Phase p);

struct VehicleState {
  VehicleId id = 0;
  LaneId lane;
  Movement movement{Cardinal::West, Cardinal::East};
  VehicleParams params;
  double position = 0.0;
  double speed = 0.0;
  double accel = 0.0;
  // xi * (p_leader - p), when a vehicle is ahead on the same lane.
  std::optional<double> gap;
  Phase phase = Phase::Approach;
};

/// Every vehicle inside the control zone at one instant, in registration
/// order.
struct Snapshot {
  double t = 0.0;
  std::vector<VehicleState> vehicles;
};

Snapshot snapshot_at(const CrossingProtocol& protocol, double t);

enum class ViolationKind { RearEnd, Lateral, SpeedBound, AccelBound };

std::string_view to_string(ViolationKind k);

struct Violation {
  ViolationKind kind = ViolationKind::RearEnd;
  double t = 0.0;
  VehicleId vehicle = 0;
  std::optional<VehicleId> other;
  double amount = 0.0;  // size of the excursion, positive
};

/// Rear-end margin of each snapshot vehicle against the nearest vehicle
/// ahead on its lane (same order as snapshot.vehicles).
std::vector<std::optional<double>> rear_end_margins(const Snapshot& snapshot);

/// Rear-end margins, merging-zone co-occupancy of conflicting movements and
/// bound residuals at one instant. Empty when everything holds.
std::vector<Violation> monitor(const Snapshot& snapshot, const CrossingProtocol& protocol);

struct LogSample {
  double t = 0.0;
  VehicleId vehicle = 0;
  LaneId lane;
  double position = 0.0;
  double speed = 0.0;
  double accel = 0.0;
  std::optional<double> rear_margin;
};

/// Largest deviation between an RK4 integration of the vehicle dynamics,
/// driven by the trajectory's own control, and the closed form.
struct DynamicsCheck {
  double max_position_error = 0.0;
  double max_speed_error = 0.0;
  double max_gap_error = 0.0;  // only with a leader
};

DynamicsCheck integrate_rk4(const CubicTrajectory& traj, double dt,
                            const CubicTrajectory* leader = nullptr,
                            double reaction_constant = 1.0);

struct VehicleMetrics {
  VehicleId id = 0;
  LaneId lane;
  Movement movement{Cardinal::West, Cardinal::East};
  double t0 = 0.0;
  double tf = 0.0;
  double travel_time = 0.0;
  double energy = 0.0;
  std::optional<double> min_rear_margin;     // m
  std::optional<double> min_lateral_margin;  // s
  BindingConstraint binding = BindingConstraint::None;
  DynamicsCheck dynamics;
};

struct MetricsReport {
  Policy policy = Policy::Optimal;
  std::vector<VehicleMetrics> vehicles;
  double throughput_vpm = 0.0;  // vehicles per minute
  double total_energy = 0.0;
  double total_travel_time = 0.0;
  double max_abs_accel = 0.0;
  double max_speed = 0.0;
  double min_speed = 0.0;
  std::size_t violation_count = 0;
};

struct RunResult {
  CrossingProtocol protocol;
  std::vector<PlanResult> plans;
  std::vector<LogSample> log;
  std::vector<Violation> violations;
  MetricsReport metrics;
};

/// Plans every arrival in time order against the protocol, registers it,
/// then samples all trajectories on the global dt grid. Throws
/// PlanningFailure if a vehicle cannot be planned.
RunResult run(const Scenario& scenario);

/// Replans the arrivals preceding `id` and returns the protocol they leave
/// behind together with the request for `id`. Throws std::out_of_range for
/// an unknown id.
std::pair<CrossingProtocol, PlanRequest> protocol_before(const Scenario& scenario, VehicleId id);

PlanRequest request_for(const Arrival& arrival);

struct VehicleDelta {
  VehicleId id = 0;
  double optimal_travel_time = 0.0;
  double fifo_travel_time = 0.0;
  double saving = 0.0;  // fifo - optimal
};

struct PolicyComparison {
  std::optional<RunResult> optimal;
  std::optional<RunResult> fifo;
  std::string optimal_error;
  std::string fifo_error;
  std::vector<VehicleDelta> deltas;
  double optimal_total_travel_time = 0.0;
  double fifo_total_travel_time = 0.0;
  double optimal_total_energy = 0.0;
  double fifo_total_energy = 0.0;

  bool both_ok() const { return optimal.has_value() && fifo.has_value(); }
};

/// Runs the scenario under both policies; a failing run is reported in the
/// corresponding error string.
PolicyComparison compare_policies(const Scenario& scenario);

struct GeneratorOptions {
  std::uint64_t seed = 0;
  int vehicles = 6;
  int lanes_per_approach = 1;
  double min_gap = 0.5;            // s between consecutive arrivals
  double max_gap = 3.0;            // s
  double same_approach_gap = 4.0;  // s between arrivals on one approach
  double v0_min = 8.0;
  double v0_max = 16.0;
  std::vector<Cardinal> approaches{Cardinal::North, Cardinal::East, Cardinal::South,
                                   Cardinal::West};
};

Scenario generate_scenario(const GeneratorOptions& options);

}  // namespace cav
