#include "cav/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "cav/root_finding.hpp"

namespace cav {
namespace {

constexpr double kWindowTolerance = 1e-9;

// Solves min ||A x - y|| for a 4-column A by modified Gram-Schmidt QR.
std::array<double, 4> least_squares_4(const std::vector<std::array<double, 4>>& a,
                                      const std::vector<double>& y) {
  const std::size_t m = a.size();
  std::array<std::vector<double>, 4> q;
  for (int j = 0; j < 4; ++j) {
    q[j].resize(m);
    for (std::size_t i = 0; i < m; ++i) q[j][i] = a[i][j];
  }
  std::array<std::array<double, 4>, 4> r{};
  for (int j = 0; j < 4; ++j) {
    for (int k = 0; k < j; ++k) {
      double dot = 0.0;
      for (std::size_t i = 0; i < m; ++i) dot += q[k][i] * q[j][i];
      r[k][j] = dot;
      for (std::size_t i = 0; i < m; ++i) q[j][i] -= dot * q[k][i];
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < m; ++i) norm += q[j][i] * q[j][i];
    norm = std::sqrt(norm);
    r[j][j] = norm;
    if (norm > 0.0) {
      for (std::size_t i = 0; i < m; ++i) q[j][i] /= norm;
    }
  }
  std::array<double, 4> qty{};
  for (int j = 0; j < 4; ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < m; ++i) dot += q[j][i] * y[i];
    qty[j] = dot;
  }
  std::array<double, 4> x{};
  for (int j = 3; j >= 0; --j) {
    double s = qty[j];
    for (int k = j + 1; k < 4; ++k) s -= r[j][k] * x[k];
    x[j] = r[j][j] != 0.0 ? s / r[j][j] : 0.0;
  }
  return x;
}

}  // namespace

void VehicleParams::validate() const {
  if (!(u_min < 0.0 && 0.0 < u_max)) {
    throw std::invalid_argument("vehicle params: require u_min < 0 < u_max");
  }
  if (!(0.0 < v_min && v_min < v_max)) {
    throw std::invalid_argument("vehicle params: require 0 < v_min < v_max");
  }
  if (!(headway_time > 0.0 && standstill_gap > 0.0 && reaction_constant > 0.0)) {
    throw std::invalid_argument(
        "vehicle params: headway_time, standstill_gap and reaction_constant must be positive");
  }
}

bool CubicTrajectory::is_monotone() const {
  const double T = horizon();
  auto speed = [&](double tau) { return (3.0 * phi3 * tau + 2.0 * phi2) * tau + phi1; };
  double lowest = std::min(speed(0.0), speed(T));
  if (phi3 != 0.0) {
    const double vertex = -phi2 / (3.0 * phi3);
    if (vertex > 0.0 && vertex < T) lowest = std::min(lowest, speed(vertex));
  }
  return lowest > 0.0;
}

CubicTrajectory solve_boundary(double v0, double s_total, double t0, double tf) {
  const double T = tf - t0;
  if (!(T > 0.0)) {
    throw std::invalid_argument("solve_boundary: horizon tf - t0 must be positive, got " +
                                std::to_string(T));
  }
  if (!(v0 > 0.0)) throw std::invalid_argument("solve_boundary: v0 must be positive");
  if (!(s_total > 0.0)) throw std::invalid_argument("solve_boundary: s_total must be positive");

  const double excess = s_total - v0 * T;
  CubicTrajectory traj;
  traj.phi3 = -excess / (2.0 * T * T * T);
  traj.phi2 = 3.0 * excess / (2.0 * T * T);
  traj.phi1 = v0;
  traj.phi0 = 0.0;
  traj.t0 = t0;
  traj.tf = tf;
  traj.s_total = s_total;
  return traj;
}

MotionSample eval(const CubicTrajectory& traj, double t) {
  if (t < traj.t0 - kWindowTolerance || t > traj.tf + kWindowTolerance) {
    throw std::out_of_range("eval: t = " + std::to_string(t) + " outside [" +
                            std::to_string(traj.t0) + ", " + std::to_string(traj.tf) + "]");
  }
  const double tau = std::clamp(t, traj.t0, traj.tf) - traj.t0;
  const Cubic p = traj.position_poly();
  return {p(tau), p.derivative(tau), p.second_derivative(tau)};
}

double invert(const CubicTrajectory& traj, double position) {
  const double tol_p = kWindowTolerance * std::max(1.0, traj.s_total);
  if (position < -tol_p || position > traj.s_total + tol_p) {
    throw std::out_of_range("invert: position " + std::to_string(position) +
                            " outside [0, " + std::to_string(traj.s_total) + "]");
  }
  if (!traj.is_monotone()) throw std::domain_error("invert: trajectory is not monotone");
  if (position <= 0.0) return traj.t0;
  if (position >= traj.s_total) return traj.tf;

  const double T = traj.horizon();
  const Cubic p = traj.position_poly();
  auto fdf = [&](double tau, double& f, double& df) {
    f = p(tau) - position;
    df = p.derivative(tau);
  };
  const double guess = T * position / traj.s_total;
  const auto root = safeguarded_newton(fdf, 0.0, T, guess, 1e-13 * std::max(1.0, T));
  return traj.t0 + root.x;
}

InverseFit fit_inverse_cubic(const CubicTrajectory& traj, int samples) {
  samples = std::max(samples, 100);
  const double S = traj.s_total;
  std::vector<std::array<double, 4>> a(static_cast<std::size_t>(samples));
  std::vector<double> y(static_cast<std::size_t>(samples));
  // Positions are scaled to [0, 1] for conditioning.
  for (int k = 0; k < samples; ++k) {
    const double x = static_cast<double>(k) / (samples - 1);
    a[k] = {x * x * x, x * x, x, 1.0};
    y[k] = invert(traj, S * x) - traj.t0;
  }
  const auto c = least_squares_4(a, y);

  InverseFit fit;
  fit.omega3 = c[0] / (S * S * S);
  fit.omega2 = c[1] / (S * S);
  fit.omega1 = c[2] / S;
  fit.omega0 = c[3] + traj.t0;
  for (int k = 0; k < samples; ++k) {
    const double model = ((c[0] * a[k][2] + c[1]) * a[k][2] + c[2]) * a[k][2] + c[3];
    fit.max_residual = std::max(fit.max_residual, std::abs(model - y[k]));
  }
  return fit;
}

FeasibilityReport feasibility(const CubicTrajectory& traj, const VehicleParams& params) {
  const double T = traj.horizon();
  const Cubic p = traj.position_poly();

  std::vector<double> speed_points{0.0};
  if (traj.phi3 != 0.0) {
    const double vertex = -traj.phi2 / (3.0 * traj.phi3);
    if (vertex > 0.0 && vertex < T) speed_points.push_back(vertex);
  }
  speed_points.push_back(T);

  FeasibilityReport r;
  r.min_speed = r.max_speed = p.derivative(0.0);
  r.min_speed_time = r.max_speed_time = traj.t0;
  for (double tau : speed_points) {
    const double v = p.derivative(tau);
    if (v <= r.min_speed) {
      r.min_speed = v;
      r.min_speed_time = traj.t0 + tau;
    }
    if (v >= r.max_speed) {
      r.max_speed = v;
      r.max_speed_time = traj.t0 + tau;
    }
  }
  // Acceleration is linear in tau; its extremes are at the endpoints.
  const double u_start = p.second_derivative(0.0);
  const double u_end = p.second_derivative(T);
  if (u_start < u_end) {
    r.min_accel = u_start;
    r.min_accel_time = traj.t0;
    r.max_accel = u_end;
    r.max_accel_time = traj.tf;
  } else {
    r.max_accel = u_start;
    r.max_accel_time = u_start == u_end ? traj.tf : traj.t0;
    r.min_accel = u_end;
    r.min_accel_time = traj.tf;
  }

  r.speed_ok = params.v_min <= r.min_speed && r.max_speed <= params.v_max;
  r.accel_ok = params.u_min <= r.min_accel && r.max_accel <= params.u_max;

  auto note = [&](double excess, double when) {
    if (excess > r.worst_violation) {
      r.worst_violation = excess;
      r.worst_violation_time = when;
    }
  };
  note(params.v_min - r.min_speed, r.min_speed_time);
  note(r.max_speed - params.v_max, r.max_speed_time);
  note(params.u_min - r.min_accel, r.min_accel_time);
  note(r.max_accel - params.u_max, r.max_accel_time);
  return r;
}

double energy_cost(const CubicTrajectory& traj) {
  const double T = traj.horizon();
  const double a = traj.phi3;
  const double b = traj.phi2;
  return 0.5 * (12.0 * a * a * T * T * T + 12.0 * a * b * T * T + 4.0 * b * b * T);
}

}  // namespace cav
