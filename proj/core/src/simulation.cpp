#include "cav/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace cav {
namespace {

constexpr double kMonitorTolerance = 1e-9;

// Index of the nearest vehicle ahead on the same lane, or -1. Equal
// positions resolve to the earlier registration.
std::vector<int> leaders_of(const Snapshot& s) {
  const auto& v = s.vehicles;
  std::vector<int> out(v.size(), -1);
  for (std::size_t i = 0; i < v.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k == i || v[k].lane != v[i].lane) continue;
      const double gap = v[k].position - v[i].position;
      const bool ahead = gap > 0.0 || (gap == 0.0 && k < i);
      if (ahead && gap < best) {
        best = gap;
        out[i] = static_cast<int>(k);
      }
    }
  }
  return out;
}

Phase phase_of(const IntersectionLayout& layout, const Movement& m, double position) {
  const auto w = merging_window(layout, m);
  if (position < w.entry_position) return Phase::Approach;
  if (position < w.exit_position) return Phase::MergingZone;
  return Phase::Exit;
}

struct Rk4State {
  double p, v, s;
};

}  // namespace

void Scenario::validate() const {
  defaults.validate();
  std::set<VehicleId> ids;
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    const auto& a = arrivals[i];
    if (!ids.insert(a.id).second) {
      throw std::invalid_argument("scenario: duplicate vehicle id " + std::to_string(a.id));
    }
    if (i > 0 && a.time < arrivals[i - 1].time) {
      throw std::invalid_argument("scenario: arrival times must be non-decreasing (vehicle " +
                                  std::to_string(a.id) + ")");
    }
    request_for(a).validate();
  }
  if (!(sim.dt > 0.0)) throw std::invalid_argument("scenario: sim.dt must be positive");
  if (!(sim.lateral_buffer >= 0.0)) {
    throw std::invalid_argument("scenario: sim.lateral_buffer must be non-negative");
  }
  if (!(sim.horizon_cap > 0.0)) {
    throw std::invalid_argument("scenario: sim.horizon_cap must be positive");
  }
}

PlannerConfig Scenario::planner_config() const {
  PlannerConfig c;
  c.lateral_buffer = sim.lateral_buffer;
  c.horizon_cap = sim.horizon_cap;
  return c;
}

bool operator==(const Scenario& a, const Scenario& b) {
  const auto& da = a.layout.dimensions();
  const auto& db = b.layout.dimensions();
  return da.control_zone_length == db.control_zone_length &&
         da.merging_zone_side == db.merging_zone_side &&
         da.right_turn_radius == db.right_turn_radius &&
         da.left_turn_radius == db.left_turn_radius &&
         da.lanes_per_approach == db.lanes_per_approach && a.defaults == b.defaults &&
         a.arrivals == b.arrivals && a.policy == b.policy && a.sim == b.sim;
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Approach:
      return "approach";
    case Phase::MergingZone:
      return "merging_zone";
    case Phase::Exit:
      return "exit";
    case Phase::Done:
      return "done";
  }
  return "?";
}

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::RearEnd:
      return "rear_end";
    case ViolationKind::Lateral:
      return "lateral";
    case ViolationKind::SpeedBound:
      return "speed_bound";
    case ViolationKind::AccelBound:
      return "accel_bound";
  }
  return "?";
}

Snapshot snapshot_at(const CrossingProtocol& protocol, double t) {
  Snapshot s{t, {}};
  for (const ProtocolEntry* e : protocol.active_entries(t)) {
    const auto m = eval(e->trajectory, t);
    VehicleState st;
    st.id = e->vehicle_id;
    st.lane = e->lane_function.lane_at(t);
    st.movement = e->movement;
    st.params = e->params;
    st.position = m.position;
    st.speed = m.speed;
    st.accel = m.accel;
    st.phase = phase_of(protocol.layout(), e->movement, m.position);
    s.vehicles.push_back(st);
  }
  const auto leaders = leaders_of(s);
  for (std::size_t i = 0; i < s.vehicles.size(); ++i) {
    if (leaders[i] < 0) continue;
    auto& v = s.vehicles[i];
    v.gap = v.params.reaction_constant * (s.vehicles[leaders[i]].position - v.position);
  }
  return s;
}

std::vector<std::optional<double>> rear_end_margins(const Snapshot& snapshot) {
  const auto leaders = leaders_of(snapshot);
  std::vector<std::optional<double>> out(snapshot.vehicles.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (leaders[i] < 0) continue;
    const auto& f = snapshot.vehicles[i];
    const auto& l = snapshot.vehicles[leaders[i]];
    out[i] = f.params.reaction_constant * (l.position - f.position) -
             f.params.safe_distance(f.speed);
  }
  return out;
}

std::vector<Violation> monitor(const Snapshot& snapshot, const CrossingProtocol& protocol) {
  std::vector<Violation> out;
  const auto& vs = snapshot.vehicles;
  const auto leaders = leaders_of(snapshot);
  const auto margins = rear_end_margins(snapshot);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (margins[i] && *margins[i] < -kMonitorTolerance) {
      out.push_back({ViolationKind::RearEnd, snapshot.t, vs[i].id, vs[leaders[i]].id,
                     -*margins[i]});
    }
    const auto& p = vs[i].params;
    const double speed_excess = std::max(p.v_min - vs[i].speed, vs[i].speed - p.v_max);
    if (speed_excess > kMonitorTolerance) {
      out.push_back({ViolationKind::SpeedBound, snapshot.t, vs[i].id, std::nullopt, speed_excess});
    }
    const double accel_excess = std::max(p.u_min - vs[i].accel, vs[i].accel - p.u_max);
    if (accel_excess > kMonitorTolerance) {
      out.push_back({ViolationKind::AccelBound, snapshot.t, vs[i].id, std::nullopt, accel_excess});
    }
  }
  const auto& layout = protocol.layout();
  auto depth_inside = [&](const VehicleState& v) {
    const auto w = merging_window(layout, v.movement);
    return std::min(v.position - w.entry_position, w.exit_position - v.position);
  };
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const double di = depth_inside(vs[i]);
    if (di <= kMonitorTolerance) continue;
    for (std::size_t j = i + 1; j < vs.size(); ++j) {
      if (!layout.conflicts(vs[i].movement, vs[j].movement)) continue;
      const double dj = depth_inside(vs[j]);
      if (dj <= kMonitorTolerance) continue;
      out.push_back({ViolationKind::Lateral, snapshot.t, vs[i].id, vs[j].id, std::min(di, dj)});
    }
  }
  return out;
}

DynamicsCheck integrate_rk4(const CubicTrajectory& traj, double dt, const CubicTrajectory* leader,
                            double reaction_constant) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_rk4: dt must be positive");
  const Cubic p = traj.position_poly();
  auto control = [&](double t) { return p.second_derivative(t - traj.t0); };

  double start = traj.t0;
  double end = traj.tf;
  std::optional<Cubic> lead;
  if (leader != nullptr) {
    start = std::max(traj.t0, leader->t0);
    end = std::min(traj.tf, leader->tf);
    if (start > end) return {};
    lead = leader->position_poly();
  }
  auto leader_speed = [&](double t) { return lead ? lead->derivative(t - leader->t0) : 0.0; };
  auto rhs = [&](double t, const Rk4State& y) {
    return Rk4State{y.v, control(t), lead ? reaction_constant * (leader_speed(t) - y.v) : 0.0};
  };
  auto closed = [&](double t) {
    const double tau = t - traj.t0;
    Rk4State y{p(tau), p.derivative(tau), 0.0};
    if (lead) y.s = reaction_constant * ((*lead)(t - leader->t0) - y.p);
    return y;
  };

  DynamicsCheck out;
  Rk4State y = closed(start);
  const auto steps = static_cast<long>(std::ceil((end - start) / dt - 1e-9));
  for (long k = 0; k < steps; ++k) {
    const double t = start + static_cast<double>(k) * dt;
    const double t_next = std::min(end, start + static_cast<double>(k + 1) * dt);
    const double h = t_next - t;
    const Rk4State k1 = rhs(t, y);
    const Rk4State k2 = rhs(t + 0.5 * h, {y.p + 0.5 * h * k1.p, y.v + 0.5 * h * k1.v, y.s + 0.5 * h * k1.s});
    const Rk4State k3 = rhs(t + 0.5 * h, {y.p + 0.5 * h * k2.p, y.v + 0.5 * h * k2.v, y.s + 0.5 * h * k2.s});
    const Rk4State k4 = rhs(t + h, {y.p + h * k3.p, y.v + h * k3.v, y.s + h * k3.s});
    y.p += h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p);
    y.v += h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    y.s += h / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
    const Rk4State ref = closed(t_next);
    out.max_position_error = std::max(out.max_position_error, std::abs(y.p - ref.p));
    out.max_speed_error = std::max(out.max_speed_error, std::abs(y.v - ref.v));
    if (lead) out.max_gap_error = std::max(out.max_gap_error, std::abs(y.s - ref.s));
  }
  return out;
}

PlanRequest request_for(const Arrival& arrival) {
  return PlanRequest{arrival.id, arrival.movement, arrival.time, arrival.v0, arrival.params};
}

std::pair<CrossingProtocol, PlanRequest> protocol_before(const Scenario& scenario, VehicleId id) {
  scenario.validate();
  const auto config = scenario.planner_config();
  CrossingProtocol protocol(scenario.layout);
  for (const auto& a : scenario.arrivals) {
    const auto req = request_for(a);
    if (a.id == id) return {std::move(protocol), req};
    protocol.register_entry(to_entry(req, plan_with_policy(req, protocol, config, scenario.policy)));
  }
  throw std::out_of_range("vehicle " + std::to_string(id) + " is not in the scenario");
}

RunResult run(const Scenario& scenario) {
  scenario.validate();
  const auto config = scenario.planner_config();
  RunResult result{CrossingProtocol(scenario.layout), {}, {}, {}, {}};
  auto& protocol = result.protocol;

  std::unordered_map<VehicleId, const ProtocolEntry*> leader_at_entry;
  std::vector<std::optional<VehicleId>> leader_ids;
  for (const auto& a : scenario.arrivals) {
    const auto req = request_for(a);
    auto planned = plan_with_policy(req, protocol, config, scenario.policy);
    const ProtocolEntry* leader =
        protocol.predecessor_on_lane(planned.lane, a.movement.origin(), a.time);
    leader_ids.push_back(leader ? std::optional<VehicleId>(leader->vehicle_id) : std::nullopt);
    protocol.register_entry(to_entry(req, planned));
    result.plans.push_back(std::move(planned));
  }

  const auto& entries = protocol.entries();
  if (!entries.empty()) {
    double first = std::numeric_limits<double>::infinity();
    double last = -std::numeric_limits<double>::infinity();
    for (const auto& e : entries) {
      first = std::min(first, e.t0);
      last = std::max(last, e.tf);
    }
    const double dt = scenario.sim.dt;
    const auto k_begin = static_cast<long>(std::ceil(first / dt - 1e-9));
    const auto k_end = static_cast<long>(std::floor(last / dt + 1e-9));
    for (long k = k_begin; k <= k_end; ++k) {
      const double t = static_cast<double>(k) * dt;
      const auto snap = snapshot_at(protocol, t);
      const auto margins = rear_end_margins(snap);
      for (std::size_t i = 0; i < snap.vehicles.size(); ++i) {
        const auto& v = snap.vehicles[i];
        result.log.push_back({t, v.id, v.lane, v.position, v.speed, v.accel, margins[i]});
      }
      auto found = monitor(snap, protocol);
      result.violations.insert(result.violations.end(), found.begin(), found.end());
    }
  }

  auto& m = result.metrics;
  m.policy = scenario.policy;
  m.violation_count = result.violations.size();
  if (entries.empty()) return result;

  double first = std::numeric_limits<double>::infinity();
  double last = -std::numeric_limits<double>::infinity();
  m.min_speed = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    VehicleMetrics vm;
    vm.id = e.vehicle_id;
    vm.lane = e.lane_function.terminal_lane();
    vm.movement = e.movement;
    vm.t0 = e.t0;
    vm.tf = e.tf;
    vm.travel_time = e.tf - e.t0;
    vm.energy = energy_cost(e.trajectory);
    vm.binding = result.plans[i].binding_constraint;
    const ProtocolEntry* leader = leader_ids[i] ? protocol.find(*leader_ids[i]) : nullptr;
    if (leader != nullptr) {
      const auto rm = rear_end_min_margin(e.trajectory, leader->trajectory, e.params);
      if (rm.overlap) vm.min_rear_margin = rm.min_margin;
    }
    for (const auto& o : entries) {
      if (o.vehicle_id == e.vehicle_id || !protocol.layout().conflicts(e.movement, o.movement)) {
        continue;
      }
      const double sep = std::max(o.merging_occupancy.begin - e.merging_occupancy.end,
                                  e.merging_occupancy.begin - o.merging_occupancy.end);
      vm.min_lateral_margin = std::min(vm.min_lateral_margin.value_or(sep), sep);
    }
    vm.dynamics = integrate_rk4(e.trajectory, scenario.sim.dt,
                                leader ? &leader->trajectory : nullptr,
                                e.params.reaction_constant);

    const auto rep = feasibility(e.trajectory, e.params);
    m.max_abs_accel = std::max({m.max_abs_accel, std::abs(rep.min_accel), std::abs(rep.max_accel)});
    m.max_speed = std::max(m.max_speed, rep.max_speed);
    m.min_speed = std::min(m.min_speed, rep.min_speed);
    m.total_energy += vm.energy;
    m.total_travel_time += vm.travel_time;
    first = std::min(first, e.t0);
    last = std::max(last, e.tf);
    m.vehicles.push_back(vm);
  }
  m.throughput_vpm = static_cast<double>(entries.size()) * 60.0 / (last - first);
  return result;
}

PolicyComparison compare_policies(const Scenario& scenario) {
  PolicyComparison c;
  auto attempt = [&](Policy policy, std::optional<RunResult>& slot, std::string& error) {
    Scenario s = scenario;
    s.policy = policy;
    try {
      slot = run(s);
    } catch (const std::exception& ex) {
      error = ex.what();
    }
  };
  attempt(Policy::Optimal, c.optimal, c.optimal_error);
  attempt(Policy::Fifo, c.fifo, c.fifo_error);
  if (c.optimal) {
    c.optimal_total_travel_time = c.optimal->metrics.total_travel_time;
    c.optimal_total_energy = c.optimal->metrics.total_energy;
  }
  if (c.fifo) {
    c.fifo_total_travel_time = c.fifo->metrics.total_travel_time;
    c.fifo_total_energy = c.fifo->metrics.total_energy;
  }
  if (c.both_ok()) {
    for (const auto& o : c.optimal->metrics.vehicles) {
      for (const auto& f : c.fifo->metrics.vehicles) {
        if (f.id != o.id) continue;
        c.deltas.push_back({o.id, o.travel_time, f.travel_time, f.travel_time - o.travel_time});
      }
    }
  }
  return c;
}

Scenario generate_scenario(const GeneratorOptions& options) {
  if (options.vehicles < 0 || options.approaches.empty()) {
    throw std::invalid_argument("generator: need a non-negative vehicle count and approaches");
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> gap(options.min_gap, options.max_gap);
  std::uniform_real_distribution<double> speed(options.v0_min, options.v0_max);
  std::uniform_int_distribution<std::size_t> pick_approach(0, options.approaches.size() - 1);
  std::uniform_int_distribution<int> pick_turn(0, 2);
  auto round2 = [](double x) { return std::round(x * 100.0) / 100.0; };

  Scenario s;
  s.layout = IntersectionLayout::with_default_radii(125.0, 25.0, options.lanes_per_approach);
  s.sim.seed = options.seed;
  std::unordered_map<int, double> last_on_approach;
  double t = 0.0;
  for (int i = 0; i < options.vehicles; ++i) {
    if (i > 0) t = round2(t + gap(rng));
    const Cardinal origin = options.approaches[pick_approach(rng)];
    const int key = static_cast<int>(origin);
    if (auto it = last_on_approach.find(key); it != last_on_approach.end()) {
      t = std::max(t, round2(it->second + options.same_approach_gap));
    }
    last_on_approach[key] = t;
    const int o = static_cast<int>(origin);
    Cardinal exit = static_cast<Cardinal>((o + 2) % 4);
    switch (pick_turn(rng)) {
      case 1:
        exit = static_cast<Cardinal>((o + 3) % 4);
        break;
      case 2:
        exit = static_cast<Cardinal>((o + 1) % 4);
        break;
      default:
        break;
    }
    s.arrivals.push_back({i + 1, t, Movement(origin, exit), round2(speed(rng)), s.defaults});
  }
  return s;
}

}  // namespace cav
