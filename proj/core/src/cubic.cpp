#include "cav/cubic.hpp"

#include <algorithm>
#include <cmath>

namespace cav {

std::vector<double> quadratic_roots(double a, double b, double c) {
  const double scale = std::max(std::abs(b), std::abs(c));
  if (std::abs(a) <= 1e-14 * scale || a == 0.0) {
    if (b == 0.0) return {};
    return {-c / b};
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return {};
  if (disc == 0.0) return {-b / (2.0 * a)};
  // Avoids cancellation between -b and sqrt(disc).
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double r1 = q / a;
  double r2 = q != 0.0 ? c / q : -r1;
  if (r1 > r2) std::swap(r1, r2);
  return {r1, r2};
}

Extremum minimize_on_interval(const Cubic& p, double lo, double hi) {
  Extremum best{p(lo), lo};
  auto consider = [&](double x) {
    const double v = p(x);
    if (v < best.value) best = {v, x};
  };
  for (double r : quadratic_roots(3.0 * p.c3, 2.0 * p.c2, p.c1)) {
    if (r > lo && r < hi) consider(r);
  }
  consider(hi);
  return best;
}

}  // namespace cav
