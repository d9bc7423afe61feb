#include "cav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cav/cubic.hpp"
#include "cav/root_finding.hpp"

namespace cav {
namespace {

// Everything about one (request, lane) pair that does not depend on tf.
struct SearchContext {
  const PlanRequest& request;
  const CrossingProtocol& protocol;
  const PlannerConfig& config;
  LaneId lane;
  double s_total = 0.0;
  MergingWindow window;
  const ProtocolEntry* leader = nullptr;
  std::vector<TimeInterval> blocked;  // merged, already widened by the buffer
  std::optional<double> earliest_entry;
};

SearchContext make_context(const PlanRequest& request, LaneId lane,
                           const CrossingProtocol& protocol, const PlannerConfig& config,
                           Policy policy) {
  const auto& layout = protocol.layout();
  const auto lanes = allowed_lanes(request.movement, layout);
  if (std::find(lanes.begin(), lanes.end(), lane) == lanes.end()) {
    throw std::invalid_argument("lane " + std::to_string(lane.value) +
                                " is not allowed for movement " + to_string(request.movement));
  }
  SearchContext ctx{request, protocol, config, lane, 0.0, {}, nullptr, {}, std::nullopt};
  ctx.s_total = total_distance(layout, request.movement);
  ctx.window = merging_window(layout, request.movement);
  ctx.leader = protocol.predecessor_on_lane(lane, request.movement.origin(), request.t0);

  for (const auto& e : protocol.entries()) {
    if (e.vehicle_id == request.vehicle_id) continue;
    if (e.tf < request.t0) continue;
    if (!layout.conflicts(request.movement, e.movement)) continue;
    ctx.blocked.push_back({e.merging_occupancy.begin - config.lateral_buffer,
                           e.merging_occupancy.end + config.lateral_buffer});
  }
  std::sort(ctx.blocked.begin(), ctx.blocked.end(),
            [](const TimeInterval& a, const TimeInterval& b) { return a.begin < b.begin; });
  std::vector<TimeInterval> merged;
  for (const auto& w : ctx.blocked) {
    if (!merged.empty() && w.begin <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, w.end);
    } else {
      merged.push_back(w);
    }
  }
  ctx.blocked = std::move(merged);

  if (policy == Policy::Fifo) {
    for (const auto& e : protocol.entries()) {
      if (e.vehicle_id == request.vehicle_id) continue;
      ctx.earliest_entry = std::max(ctx.earliest_entry.value_or(e.merging_occupancy.begin),
                                    e.merging_occupancy.begin);
    }
  }
  return ctx;
}

CandidateCheck check_horizon(const SearchContext& ctx, double horizon) {
  const auto& req = ctx.request;
  CandidateCheck c;
  c.trajectory = solve_boundary(req.v0, ctx.s_total, req.t0, req.t0 + horizon);
  if (!c.trajectory.is_monotone() ||
      !bounds_strict(c.trajectory, req.params, ctx.config.bound_margin)) {
    c.binding = BindingConstraint::Bounds;
    return c;
  }
  c.occupancy = {invert(c.trajectory, ctx.window.entry_position),
                 invert(c.trajectory, ctx.window.exit_position)};
  for (const auto& w : ctx.blocked) {
    if (c.occupancy.begin < w.end && c.occupancy.end > w.begin) {
      c.binding = BindingConstraint::Lateral;
      c.required_entry_time = w.end;
      return c;
    }
  }
  if (ctx.earliest_entry && c.occupancy.begin < *ctx.earliest_entry) {
    c.binding = BindingConstraint::Order;
    c.required_entry_time = *ctx.earliest_entry;
    return c;
  }
  if (ctx.leader != nullptr &&
      !rear_end_ok(c.trajectory, *ctx.leader, req.params)) {
    c.binding = BindingConstraint::RearEnd;
    return c;
  }
  c.feasible = true;
  return c;
}

void record(LaneCandidate* trace, double t0, double from, double to, BindingConstraint why) {
  if (trace == nullptr) return;
  auto& r = trace->rejected;
  if (!r.empty() && r.back().reason == why && r.back().tf_end >= t0 + from - 1e-9) {
    r.back().tf_end = std::max(r.back().tf_end, t0 + to);
    return;
  }
  r.push_back({t0 + from, t0 + to, why});
}

}  // namespace

std::string_view to_string(Policy p) { return p == Policy::Optimal ? "optimal" : "fifo"; }

std::string_view to_string(BindingConstraint b) {
  switch (b) {
    case BindingConstraint::None:
      return "none";
    case BindingConstraint::Bounds:
      return "bounds";
    case BindingConstraint::RearEnd:
      return "rear_end";
    case BindingConstraint::Lateral:
      return "lateral";
    case BindingConstraint::Order:
      return "order";
  }
  return "?";
}

Policy parse_policy(std::string_view s) {
  if (s == "optimal") return Policy::Optimal;
  if (s == "fifo") return Policy::Fifo;
  throw std::invalid_argument("unknown policy '" + std::string(s) +
                              "' (expected optimal or fifo)");
}

void PlanRequest::validate() const {
  params.validate();
  if (!(params.v_min <= v0 && v0 <= params.v_max)) {
    throw std::invalid_argument("vehicle " + std::to_string(vehicle_id) + ": v0 = " +
                                std::to_string(v0) + " outside [v_min, v_max]");
  }
}

RearEndMargin rear_end_min_margin(const CubicTrajectory& follower, const CubicTrajectory& leader,
                                  const VehicleParams& follower_params) {
  const double begin = std::max(follower.t0, leader.t0);
  const double end = std::min(follower.tf, leader.tf);
  if (begin > end) return {};

  const Cubic lead = leader.position_poly().shifted(begin - leader.t0);
  const Cubic self = follower.position_poly().shifted(begin - follower.t0);
  const Cubic self_speed{0.0, 3.0 * self.c3, 2.0 * self.c2, self.c1};
  Cubic margin = (lead - self) * follower_params.reaction_constant -
                 self_speed * follower_params.headway_time;
  margin.c0 -= follower_params.standstill_gap;

  const auto m = minimize_on_interval(margin, 0.0, end - begin);
  return {true, m.value, begin + m.at};
}

bool rear_end_ok(const CubicTrajectory& candidate, const ProtocolEntry& leader,
                 const VehicleParams& params) {
  const auto m = rear_end_min_margin(candidate, leader.trajectory, params);
  return !m.overlap || m.min_margin >= 0.0;
}

bool lateral_ok(TimeInterval candidate, TimeInterval other, double buffer) {
  return candidate.begin - buffer >= other.end || candidate.end + buffer <= other.begin;
}

bool lateral_ok(TimeInterval candidate, const ProtocolEntry& other, double buffer) {
  return lateral_ok(candidate, other.merging_occupancy, buffer);
}

bool bounds_strict(const CubicTrajectory& traj, const VehicleParams& params, double margin) {
  const auto r = feasibility(traj, params);
  const bool max_speed_ok = r.max_speed < params.v_max - margin ||
                            (r.max_speed_time == traj.t0 && r.max_speed <= params.v_max);
  const bool min_speed_ok = r.min_speed > params.v_min + margin ||
                            (r.min_speed_time == traj.t0 && r.min_speed >= params.v_min);
  return max_speed_ok && min_speed_ok && r.min_accel > params.u_min + margin &&
         r.max_accel < params.u_max - margin;
}

std::vector<TimeInterval> bounds_feasible_horizons(double v0, double s_total,
                                                   const VehicleParams& params, double margin,
                                                   double cap) {
  // With x = 1/T the family has terminal speed 1.5 S x - 0.5 v0 and initial
  // acceleration 3 S x^2 - 3 v0 x; speed is monotone and acceleration linear
  // over the window, so these two endpoints carry all the extrema.
  const double S = s_total;
  const double x_speed_hi = (params.v_max - margin + 0.5 * v0) / (1.5 * S);
  const double x_speed_lo = (params.v_min + margin + 0.5 * v0) / (1.5 * S);
  double x_accel_hi = 0.0;
  for (double r : quadratic_roots(3.0 * S, -3.0 * v0, -(params.u_max - margin))) {
    x_accel_hi = std::max(x_accel_hi, r);
  }
  std::vector<TimeInterval> x_intervals;
  const double x_lo = std::max(x_speed_lo, 1.0 / cap);
  const double x_hi = std::min(x_speed_hi, x_accel_hi);
  if (x_lo < x_hi) {
    const auto decel = quadratic_roots(3.0 * S, -3.0 * v0, -(params.u_min + margin));
    if (decel.size() == 2) {
      // Initial deceleration too strong strictly between the roots.
      if (x_lo < std::min(x_hi, decel[0])) x_intervals.push_back({x_lo, std::min(x_hi, decel[0])});
      if (std::max(x_lo, decel[1]) < x_hi) x_intervals.push_back({std::max(x_lo, decel[1]), x_hi});
    } else {
      x_intervals.push_back({x_lo, x_hi});
    }
  }
  std::vector<TimeInterval> out;
  constexpr double kInward = 1e-12;
  for (auto it = x_intervals.rbegin(); it != x_intervals.rend(); ++it) {
    double lo = (1.0 / it->end) * (1.0 + kInward);
    double hi = std::min(cap, (1.0 / it->begin) * (1.0 - kInward));
    if (lo <= hi) out.push_back({lo, hi});
  }
  return out;
}

CandidateCheck check_tf(const PlanRequest& request, LaneId lane,
                        const CrossingProtocol& protocol, const PlannerConfig& config,
                        Policy policy, double tf) {
  const auto ctx = make_context(request, lane, protocol, config, policy);
  return check_horizon(ctx, tf - request.t0);
}

std::optional<double> min_feasible_tf(const PlanRequest& request, LaneId lane,
                                      const CrossingProtocol& protocol,
                                      const PlannerConfig& config, Policy policy,
                                      LaneCandidate* trace) {
  request.validate();
  const auto ctx = make_context(request, lane, protocol, config, policy);
  const double t0 = request.t0;
  const double step = config.resolution;
  const double refine_tol = config.resolution * 1e-3;
  // Below this horizon every position is reached later when the horizon
  // grows, so merging-entry constraints can be skipped over exactly.
  const double monotone_limit = 2.0 * ctx.s_total / request.v0 * (1.0 - 1e-9);

  if (trace != nullptr) *trace = LaneCandidate{lane, std::nullopt, BindingConstraint::None, {}};
  const auto intervals = bounds_feasible_horizons(request.v0, ctx.s_total, request.params,
                                                  config.bound_margin, config.horizon_cap);
  auto feasible = [&](double h) { return check_horizon(ctx, h).feasible; };
  auto entry_time = [&](double h) {
    return invert(solve_boundary(request.v0, ctx.s_total, t0, t0 + h),
                  ctx.window.entry_position);
  };

  bool rejected_any = false;
  BindingConstraint last = BindingConstraint::Bounds;
  double covered = 0.0;
  for (const auto& iv : intervals) {
    if (iv.begin > covered) {
      record(trace, t0, covered, iv.begin, BindingConstraint::Bounds);
      // Gaps between admissible intervals are passed over by the scan.
      if (covered > 0.0) {
        rejected_any = true;
        last = BindingConstraint::Bounds;
      }
    }
    std::optional<double> prev;
    double h = iv.begin;
    while (h <= iv.end) {
      const auto c = check_horizon(ctx, h);
      if (c.feasible) {
        if (prev && h - *prev <= step * (1.0 + 1e-9)) {
          h = bisect_transition(feasible, *prev, h, refine_tol);
        }
        if (trace != nullptr) {
          trace->tf = t0 + h;
          trace->binding = rejected_any ? last : BindingConstraint::Bounds;
        }
        return t0 + h;
      }
      rejected_any = true;
      last = c.binding;
      const bool skippable =
          c.binding == BindingConstraint::Lateral || c.binding == BindingConstraint::Order;
      if (skippable && h < monotone_limit) {
        const double limit = std::min(iv.end, monotone_limit);
        const double target = c.required_entry_time;
        if (entry_time(limit) < target) {
          record(trace, t0, h, limit, c.binding);
          prev = limit;
          h = limit + step;
          continue;
        }
        double lo = h, hi = limit;
        while (hi - lo > 1e-10 * std::max(1.0, hi)) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          if (entry_time(mid) >= target) {
            hi = mid;
          } else {
            lo = mid;
          }
        }
        record(trace, t0, h, lo, c.binding);
        prev = lo;
        h = hi;
        continue;
      }
      record(trace, t0, h, std::min(h + step, iv.end), c.binding);
      prev = h;
      h += step;
    }
    covered = iv.end;
  }
  if (trace != nullptr) {
    trace->tf.reset();
    trace->binding = last;
  }
  return std::nullopt;
}

PlanResult plan_with_policy(const PlanRequest& request, const CrossingProtocol& protocol,
                            const PlannerConfig& config, Policy policy) {
  request.validate();
  PlanResult result;
  result.vehicle_id = request.vehicle_id;
  std::optional<double> best;
  BindingConstraint last_binding = BindingConstraint::Bounds;
  for (LaneId lane : allowed_lanes(request.movement, protocol.layout())) {
    LaneCandidate cand;
    const auto tf = min_feasible_tf(request, lane, protocol, config, policy, &cand);
    last_binding = cand.binding;
    if (tf && (!best || *tf < *best - 1e-9)) {
      best = tf;
      result.lane = lane;
      result.binding_constraint = cand.binding;
    }
    result.candidates.push_back(std::move(cand));
  }
  if (!best) {
    throw PlanningFailure(request.vehicle_id, last_binding,
                          "vehicle " + std::to_string(request.vehicle_id) +
                              ": no feasible exit time within " +
                              std::to_string(config.horizon_cap) + " s (binding: " +
                              std::string(to_string(last_binding)) + ")");
  }
  result.tf = *best;
  result.trajectory = solve_boundary(request.v0, total_distance(protocol.layout(), request.movement),
                                     request.t0, *best);
  result.lane_function = LaneFunction::constant(result.lane, request.t0, *best);
  return result;
}

PlanResult plan(const PlanRequest& request, const CrossingProtocol& protocol,
                const PlannerConfig& config) {
  return plan_with_policy(request, protocol, config, Policy::Optimal);
}

PlanResult fifo_plan(const PlanRequest& request, const CrossingProtocol& protocol,
                     const PlannerConfig& config) {
  return plan_with_policy(request, protocol, config, Policy::Fifo);
}

ProtocolEntry to_entry(const PlanRequest& request, const PlanResult& result) {
  return make_entry(request.vehicle_id, request.movement, result.trajectory,
                    result.lane_function, request.params);
}

}  // namespace cav
