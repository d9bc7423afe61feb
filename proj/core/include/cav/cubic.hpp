#pragma once

#include <vector>

namespace cav {

/// c3 x^3 + c2 x^2 + c1 x + c0.
struct Cubic {
  double c3 = 0.0;
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  double operator()(double x) const { return ((c3 * x + c2) * x + c1) * x + c0; }
  double derivative(double x) const { return (3.0 * c3 * x + 2.0 * c2) * x + c1; }
  double second_derivative(double x) const { return 6.0 * c3 * x + 2.0 * c2; }

  /// q(x) = p(x + offset).
  Cubic shifted(double offset) const {
    const double d = offset;
    return {c3, 3.0 * c3 * d + c2, 3.0 * c3 * d * d + 2.0 * c2 * d + c1, (*this)(d)};
  }

  Cubic operator+(const Cubic& o) const { return {c3 + o.c3, c2 + o.c2, c1 + o.c1, c0 + o.c0}; }
  Cubic operator-(const Cubic& o) const { return {c3 - o.c3, c2 - o.c2, c1 - o.c1, c0 - o.c0}; }
  Cubic operator*(double k) const { return {c3 * k, c2 * k, c1 * k, c0 * k}; }
};

/// Real roots of a x^2 + b x + c, ascending. Degenerates to the linear case
/// when a is negligible relative to b and c.
std::vector<double> quadratic_roots(double a, double b, double c);

struct Extremum {
  double value = 0.0;
  double at = 0.0;
};

/// Minimum of a cubic over [lo, hi], from the endpoints and the real
/// stationary points inside the interval. On ties the earliest point wins.
Extremum minimize_on_interval(const Cubic& p, double lo, double hi);

}  // namespace cav
