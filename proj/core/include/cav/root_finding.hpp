#pragma once

#include <cmath>
#include <stdexcept>

namespace cav {

struct RootResult {
  double x = 0.0;
  int iterations = 0;
};

/// Newton iteration safeguarded by bisection for an increasing function on
/// [lo, hi] with f(lo) <= 0 <= f(hi). `fdf(x, f, df)` writes the value and
/// the derivative. Steps that leave the bracket fall back to bisection.
/// Stops once a step or the bracket is below `tol`.
template <typename FDF>
RootResult safeguarded_newton(FDF&& fdf, double lo, double hi, double guess, double tol,
                              int max_iter = 200) {
  if (!(lo <= hi)) throw std::invalid_argument("safeguarded_newton: empty bracket");
  double x = (guess >= lo && guess <= hi) ? guess : 0.5 * (lo + hi);
  double f = 0.0, df = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    fdf(x, f, df);
    if (f == 0.0) return {x, it};
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    double next = df > 0.0 ? x - f / df : lo - 1.0;
    if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
    const double step = next - x;
    x = next;
    if (std::abs(step) < tol || hi - lo < tol) return {x, it};
  }
  return {x, max_iter};
}

/// Smallest x in [lo, hi] (to within tol) where a predicate flips from
/// false to true, assuming a single flip. pred(hi) must hold; the returned
/// point is on the true side.
template <typename Pred>
double bisect_transition(Pred&& pred, double lo, double hi, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace cav
