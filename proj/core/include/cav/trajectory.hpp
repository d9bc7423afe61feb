#pragma once

#include "cav/cubic.hpp"

namespace cav {

/// Per-vehicle limits and car-following constants.
struct VehicleParams {
  double u_min = -3.0;             // m/s^2
  double u_max = 3.0;              // m/s^2
  double v_min = 2.0;              // m/s
  double v_max = 18.0;             // m/s
  double headway_time = 1.0;       // rho, s
  double standstill_gap = 1.5;     // gamma, m
  double reaction_constant = 1.0;  // xi

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;

  /// Safe following distance gamma + rho * v.
  double safe_distance(double speed) const { return standstill_gap + headway_time * speed; }

  friend bool operator==(const VehicleParams&, const VehicleParams&) = default;
};

/// Unconstrained energy-optimal motion law. Coefficients are in shifted
/// time tau = t - t0, so position(0) = phi0 = 0 at control-zone entry.
struct CubicTrajectory {
  double phi3 = 0.0;  // m/s^3
  double phi2 = 0.0;  // m/s^2
  double phi1 = 0.0;  // m/s
  double phi0 = 0.0;  // m
  double t0 = 0.0;
  double tf = 0.0;
  double s_total = 0.0;

  double horizon() const { return tf - t0; }
  Cubic position_poly() const { return {phi3, phi2, phi1, phi0}; }

  /// Coefficients in absolute time t.
  Cubic absolute_position_poly() const { return position_poly().shifted(-t0); }

  /// Speed strictly positive over the whole window.
  bool is_monotone() const;
};

struct MotionSample {
  double position = 0.0;
  double speed = 0.0;
  double accel = 0.0;
};

/// Unique cubic with p(0)=0, v(0)=v0, p(T)=s_total and u(T)=0 where
/// T = tf - t0. Throws std::invalid_argument for T <= 0, v0 <= 0 or
/// s_total <= 0. The result may be non-monotone; check is_monotone().
CubicTrajectory solve_boundary(double v0, double s_total, double t0, double tf);

/// Throws std::out_of_range for t outside [t0, tf]. Times within 1e-9 s of
/// the window are clamped onto it.
MotionSample eval(const CubicTrajectory& traj, double t);

/// Absolute time at which the trajectory reaches `position`, to 1e-9 s or
/// better. Throws std::domain_error for non-monotone trajectories and
/// std::out_of_range for positions outside [0, s_total].
double invert(const CubicTrajectory& traj, double position);

/// Least-squares cubic t(p) = omega3 p^3 + omega2 p^2 + omega1 p + omega0
/// through the numerically inverted map. Only an approximation in general;
/// max_residual reports the worst deviation over the fit samples.
struct InverseFit {
  double omega3 = 0.0;
  double omega2 = 0.0;
  double omega1 = 0.0;
  double omega0 = 0.0;
  double max_residual = 0.0;  // s

  double operator()(double position) const {
    return ((omega3 * position + omega2) * position + omega1) * position + omega0;
  }
};

InverseFit fit_inverse_cubic(const CubicTrajectory& traj, int samples = 201);

struct FeasibilityReport {
  bool speed_ok = false;
  bool accel_ok = false;
  double min_speed = 0.0;
  double max_speed = 0.0;
  double min_accel = 0.0;
  double max_accel = 0.0;
  // Absolute times of the extrema. Ties resolve to the latest time.
  double min_speed_time = 0.0;
  double max_speed_time = 0.0;
  double min_accel_time = 0.0;
  double max_accel_time = 0.0;
  // Largest excursion beyond any bound (0 when feasible) and where.
  double worst_violation = 0.0;
  double worst_violation_time = 0.0;

  bool ok() const { return speed_ok && accel_ok; }
};

/// Exact speed and acceleration extrema over the window, compared with
/// the bounds (inclusive).
FeasibilityReport feasibility(const CubicTrajectory& traj, const VehicleParams& params);

/// J = 1/2 * integral of u^2 over the window, in closed form.
double energy_cost(const CubicTrajectory& traj);

}  // namespace cav
