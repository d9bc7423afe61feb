// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "cav/planner.hpp"
#include "cav/report_io.hpp"
#include "cav/scenario_io.hpp"
#include "cav/simulation.hpp"
#include "oracles.hpp"

using namespace cav;

namespace {

const std::string kReference = CAVSIM_SOURCE_DIR "/scenarios/reference.json";

int failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
  std::printf("%s %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Movement random_movement(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dir(0, 3), turn(0, 2);
  const int o = dir(rng);
  const int offset[] = {2, 3, 1};
  return Movement(static_cast<Cardinal>(o), static_cast<Cardinal>((o + offset[turn(rng)]) % 4));
}

// Random bounds-feasible trajectory on the given layout distance.
CubicTrajectory random_feasible(std::mt19937_64& rng, double s, double t0) {
  std::uniform_real_distribution<double> v(3.0, 17.0), f(0.6, 1.6);
  const VehicleParams p;
  for (;;) {
    const double v0 = v(rng);
    const auto c = solve_boundary(v0, s, t0, t0 + f(rng) * s / v0);
    if (c.is_monotone() && feasibility(c, p).ok()) return c;
  }
}

void ac1() {
  const auto scenario = load_scenario(kReference);
  const auto start = std::chrono::steady_clock::now();
  const auto r = run(scenario);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  double min_margin = 1e300, min_speed = 1e300, max_speed = -1e300, max_abs_accel = 0.0;
  for (const auto& row : r.log) {
    if (row.rear_margin) min_margin = std::min(min_margin, *row.rear_margin);
    min_speed = std::min(min_speed, row.speed);
    max_speed = std::max(max_speed, row.speed);
    max_abs_accel = std::max(max_abs_accel, std::abs(row.accel));
  }
  // Between samples: analytic extrema of every executed trajectory.
  bool strict = true;
  for (const auto& e : r.protocol.entries()) {
    const auto f = feasibility(e.trajectory, e.params);
    strict = strict && f.min_speed > e.params.v_min && f.max_speed < e.params.v_max &&
             f.min_accel > e.params.u_min && f.max_accel < e.params.u_max;
    min_speed = std::min(min_speed, f.min_speed);
    max_speed = std::max(max_speed, f.max_speed);
    max_abs_accel = std::max({max_abs_accel, std::abs(f.min_accel), std::abs(f.max_accel)});
  }
  bool disjoint = true;
  const auto& es = r.protocol.entries();
  for (std::size_t a = 0; a < es.size(); ++a) {
    for (std::size_t b = a + 1; b < es.size(); ++b) {
      if (!r.protocol.layout().conflicts(es[a].movement, es[b].movement)) continue;
      disjoint = disjoint && lateral_ok(es[a].merging_occupancy, es[b].merging_occupancy, 0.0);
    }
  }
  for (const auto& v : r.metrics.vehicles) {
    if (v.min_rear_margin) min_margin = std::min(min_margin, *v.min_rear_margin);
  }
  const bool ok = es.size() == 6 && r.violations.empty() && min_margin >= 0.0 && disjoint &&
                  strict && min_speed > 2.0 && max_speed < 18.0 && max_abs_accel < 3.0 &&
                  secs < 5.0;
  report("AC1", ok,
         fmt("reference run: min rear margin %.6f m, speed in [%.6f, ", min_margin, min_speed) +
             fmt("%.9f] m/s, max |u| %.6f m/s^2, ", max_speed, max_abs_accel) +
             (disjoint ? "occupancies disjoint" : "OCCUPANCY OVERLAP") +
             fmt(", %g violations, run %.3f s", static_cast<double>(r.violations.size()), secs));
}

void ac2() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> v(0.1, 30.0), s(1.0, 1000.0), T(0.1, 120.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double v0 = v(rng), st = s(rng), h = T(rng);
    const auto c = solve_boundary(v0, st, 0.0, h);
    const oracle::Poly q = oracle::poly_of(c);
    worst = std::max({worst, std::abs(q.p(0.0)), std::abs(q.v(0.0) - v0),
                      std::abs(q.p(h) - st), std::abs(q.u(h))});
  }
  const auto w = solve_boundary(10.0, 275.0, 0.0, 25.0);
  const double ex = std::max({std::abs(w.phi3 + 0.0008), std::abs(w.phi2 - 0.06),
                              std::abs(eval(w, 25.0).speed - 11.5)});
  report("AC2", worst <= 1e-9 && ex <= 1e-12,
         fmt("10000 random solves: max boundary residual %.3e; worked example error %.3e", worst,
             ex));
}

void ac3() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> v(1.0, 25.0), s(20.0, 600.0), f(0.5, 2.5), t0(0.0, 50.0);
  double worst = 0.0;
  bool increasing = true;
  int count = 0;
  while (count < 100) {
    const double v0 = v(rng), st = s(rng), start = t0(rng);
    const auto c = solve_boundary(v0, st, start, start + f(rng) * st / v0);
    if (!c.is_monotone()) continue;
    ++count;
    for (int k = 0; k < 1000; ++k) {
      const double t = c.t0 + c.horizon() * k / 999.0;
      worst = std::max(worst, std::abs(invert(c, eval(c, t).position) - t));
    }
    double prev = -1e300;
    for (int k = 0; k < 1000; ++k) {
      const double x = invert(c, st * k / 999.0);
      increasing = increasing && x > prev;
      prev = x;
    }
  }
  report("AC3", worst <= 1e-8 && increasing,
         fmt("100 trajectories x 1000 samples: max |invert(eval(t)) - t| = %.3e s, ", worst) +
             (increasing ? "invert strictly increasing" : "invert NOT strictly increasing"));
}

void ac4() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> v(1.0, 25.0), s(20.0, 600.0), f(0.5, 2.5);
  double worst = 0.0, worst_vs_error_model = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double v0 = v(rng), st = s(rng);
    const auto c = solve_boundary(v0, st, 0.0, f(rng) * st / v0);
    const double j = energy_cost(c);
    const double trap = oracle::trapezoid_energy(c, 10000);
    worst = std::max(worst, std::abs(j - trap) / j);
    // u is linear and vanishes at T, so the composite trapezoid rule over
    // n panels overestimates J by exactly 3 phi3^2 T h^2.
    const double h = c.horizon() / 10000.0;
    const double model = j + 3.0 * c.phi3 * c.phi3 * c.horizon() * h * h;
    worst_vs_error_model = std::max(worst_vs_error_model, std::abs(model - trap) / j);
  }
  bool zero = true;
  std::uniform_real_distribution<double> T(1.0, 60.0);
  for (int i = 0; i < 1000; ++i) {
    const double v0 = v(rng), h = T(rng);
    zero = zero && energy_cost(solve_boundary(v0, v0 * h, 0.0, h)) == 0.0;
  }
  report("AC4", worst <= 1e-9 && zero,
         fmt("1000 trajectories: max |J - trapezoid_1e4| / J = %.3e (rule's own error 5e-9 by "
             "construction; closed form + trapezoid error term matches to %.3e); ",
             worst, worst_vs_error_model) +
             (zero ? "J == 0 for constant speed" : "J != 0 for some constant-speed case"));
}

void ac5() {
  const auto layout = IntersectionLayout::with_default_radii(125.0, 25.0);
  const PlannerConfig config;
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> v(2.5, 17.5), t0(0.0, 10.0), gap(0.0, 4.0);
  double worst = 0.0;
  int checked = 0, missing = 0, both_none = 0;
  for (int i = 0; i < 200; ++i) {
    CrossingProtocol p(layout);
    double t = t0(rng);
    if (i % 2 == 1) {
      const PlanRequest first{1000 + i, random_movement(rng), t, v(rng), VehicleParams{}};
      p.register_entry(to_entry(first, plan(first, p, config)));
      t += gap(rng);
    }
    const PlanRequest req{i, random_movement(rng), t, v(rng), VehicleParams{}};
    std::optional<PlanResult> res;
    try {
      res = plan(req, p, config);
    } catch (const PlanningFailure&) {
    }
    const auto lane = allowed_lanes(req.movement, layout).front();
    const auto grid = oracle::grid_min_tf(req, lane, p, config, Policy::Optimal,
                                          total_distance(layout, req.movement), 1e-3);
    if (res.has_value() != grid.has_value()) {
      ++missing;
      continue;
    }
    if (!res) {
      ++both_none;
      continue;
    }
    ++checked;
    worst = std::max(worst, std::abs(res->tf - *grid));
  }
  const CrossingProtocol empty(layout);
  const PlanRequest lone{1, Movement(Cardinal::West, Cardinal::East), 0.0, 18.0, VehicleParams{}};
  const double lone_err = std::abs(plan(lone, empty, config).tf - 275.0 / 18.0);
  report("AC5", missing == 0 && worst <= 1e-3 && lone_err <= 1e-3,
         fmt("200 instances vs grid (step 1e-3 s): %g feasible, max |tf - grid| = %.3e s, ",
             checked, worst) +
             fmt("%g agree nothing fits", both_none) +
             fmt(", %g disagreements on existence; v0 = v_max lone error %.3e s", missing,
                 lone_err));
}

void ac6() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> shift(-3.0, 6.0), p01(0.0, 1.0);
  const VehicleParams params;
  double worst = 0.0;
  int pairs = 0;
  while (pairs < 500) {
    const auto leader = random_feasible(rng, 275.0, 0.0);
    const auto follower = random_feasible(rng, 275.0, shift(rng));
    const auto analytic = rear_end_min_margin(follower, leader, params);
    const auto sampled = oracle::sampled_rear_margin(follower, leader, params, 1e-3);
    if (!analytic.overlap || !sampled) continue;
    ++pairs;
    worst = std::max(worst, std::abs(analytic.min_margin - *sampled));
  }
  // Constant speed: margin = v h - gamma - rho v, zero at h = (gamma + rho v) / v.
  std::uniform_real_distribution<double> speed(2.5, 17.5);
  bool threshold = true;
  for (int i = 0; i < 200; ++i) {
    const double vv = speed(rng);
    const double h_star = (params.standstill_gap + params.headway_time * vv) / vv;
    const auto lead = solve_boundary(vv, 275.0, 0.0, 275.0 / vv);
    for (double dh : {-1e-3, 1e-3}) {
      const double h = h_star + dh;
      const auto fol = solve_boundary(vv, 275.0, h, h + 275.0 / vv);
      const auto m = rear_end_min_margin(fol, lead, params);
      threshold = threshold && (m.min_margin >= 0.0) == (dh > 0.0) &&
                  std::abs(m.min_margin - vv * dh) < 1e-9;
    }
  }
  report("AC6", worst <= 1e-6 && threshold,
         fmt("500 pairs: max |analytic - sampled(1e-3 s)| = %.3e m; ", worst) +
             (threshold ? "constant-speed threshold (gamma + rho v)/v reproduced"
                        : "constant-speed threshold MISMATCH"));
}

void ac7() {
  int scenarios = 0, vehicles = 0, dominated = 0, whole_run_exceptions = 0;
  for (std::uint64_t seed = 1; scenarios < 100 && seed < 1000; ++seed) {
    GeneratorOptions g;
    g.seed = seed;
    g.vehicles = 8;
    const auto s = generate_scenario(g);
    const auto c = compare_policies(s);
    if (!c.both_ok()) continue;
    ++scenarios;
    // Per vehicle, on the protocol the FIFO run had built so far.
    CrossingProtocol p(s.layout);
    const auto config = s.planner_config();
    for (const auto& a : s.arrivals) {
      const auto req = request_for(a);
      const auto opt = plan(req, p, config);
      const auto fifo = fifo_plan(req, p, config);
      ++vehicles;
      if (opt.tf <= fifo.tf) ++dominated;
      p.register_entry(to_entry(req, fifo));
    }
    for (const auto& d : c.deltas) {
      if (d.saving < 0.0) ++whole_run_exceptions;
    }
  }
  Scenario constructed;
  // A slow vehicle ahead in arrival order holds back a fast one on a
  // non-conflicting movement.
  VehicleParams slow;
  slow.v_max = 10.0;
  constructed.arrivals.push_back({1, 0.0, Movement(Cardinal::West, Cardinal::East), 8.0, slow});
  constructed.arrivals.push_back(
      {2, 3.0, Movement(Cardinal::East, Cardinal::West), 12.0, VehicleParams{}});
  const auto cc = compare_policies(constructed);
  const double gain =
      cc.both_ok() ? cc.fifo_total_travel_time - cc.optimal_total_travel_time : -1.0;
  report("AC7", scenarios == 100 && dominated == vehicles && gain > 0.0,
         fmt("%g scenarios, optimal tf <= FIFO tf for %g of ", scenarios, dominated) +
             fmt("%g vehicles (whole-run per-vehicle reversals: %g); ", vehicles,
                 whole_run_exceptions) +
             fmt("constructed scenario saves %.3f s in total", gain));
}

void ac8() {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> v(3.0, 17.0), s(150.0, 500.0);
  double worst_p = 0.0, worst_v = 0.0;
  int n = 0;
  while (n < 100) {
    const double v0 = v(rng), st = s(rng);
    const auto c = solve_boundary(v0, st, 0.0, 30.0);
    if (!c.is_monotone()) continue;
    ++n;
    const auto d = integrate_rk4(c, 0.01);
    worst_p = std::max(worst_p, d.max_position_error);
    worst_v = std::max(worst_v, d.max_speed_error);
  }
  const auto r = run(load_scenario(kReference));
  for (const auto& vm : r.metrics.vehicles) {
    worst_p = std::max(worst_p, vm.dynamics.max_position_error);
    worst_v = std::max(worst_v, vm.dynamics.max_speed_error);
  }
  report("AC8", worst_p <= 1e-6 && worst_v <= 1e-6,
         fmt("RK4 dt=0.01 s over 30 s horizons and the reference run: max |dp| = %.3e m, "
             "max |dv| = %.3e m/s",
             worst_p, worst_v));
}

void ac9() {
  bool same = true;
  int runs = 0;
  auto check = [&](const Scenario& s) {
    const auto a = run(s);
    const auto b = run(s);
    same = same && trajectory_csv(a.log) == trajectory_csv(b.log) &&
           metrics_json(a.metrics, a.violations) == metrics_json(b.metrics, b.violations) &&
           protocol_jsonl(a.protocol) == protocol_jsonl(b.protocol);
    ++runs;
  };
  check(load_scenario(kReference));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GeneratorOptions g;
    g.seed = seed;
    try {
      check(generate_scenario(g));
    } catch (const PlanningFailure&) {
    }
  }
  report("AC9", same && runs >= 5,
         fmt("%g scenarios run twice: ", runs) +
             (same ? "logs, metrics and protocol dumps byte-identical" : "OUTPUTS DIFFER"));
}

}  // namespace

int main() {
  ac1();
  ac2();
  ac3();
  ac4();
  ac5();
  ac6();
  ac7();
  ac8();
  ac9();
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
