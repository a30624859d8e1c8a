#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qpmap/common.hpp"

// Unforced logistic map helpers. The continuation seeds live on the eps = 0
// axis, where the invariant curves collapse to periodic orbits of
// ell(x) = alpha*x*(1-x), so branch starts reduce to locating the parameter
// where a 2^(i-1)-cycle has multiplier -1.

namespace qpmap {

inline double logistic_fiber(double alpha, double x) { return alpha * x * (1.0 - x); }
inline double logistic_dx(double alpha, double x) { return alpha * (1.0 - 2.0 * x); }

struct LogisticCycle {
  double alpha = 0.0;
  std::vector<double> points;  // consecutive iterates, points[i+1] = ell(points[i])
  double multiplier = 0.0;     // product of ell'(points[i])
};

namespace detail {

// One Newton step for the cyclic system ell(x_i) - x_{i+1} = 0. The Jacobian
// is bidiagonal plus one corner entry, so the correction propagates in O(p):
// write delta_i = A_i*delta_0 + B_i and close the loop at i = p.
inline bool logistic_cycle_newton_step(double alpha, std::vector<double>& x, double& resid) {
  const std::size_t p = x.size();
  std::vector<double> r(p);
  resid = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    r[i] = logistic_fiber(alpha, x[i]) - x[(i + 1) % p];
    resid = std::max(resid, std::abs(r[i]));
  }
  // Solve J*delta = r for the bidiagonal-plus-corner Jacobian by propagating
  // delta_{i+1} = d_i*delta_i - r_i and closing the loop: delta_p = delta_0
  // forces delta_0 = (sum of suffix-product-weighted residuals) / (A - 1).
  double a = 1.0, b = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    const double d = logistic_dx(alpha, x[i]);
    b = d * b + r[i];
    a = d * a;
  }
  const double denom = a - 1.0;
  if (std::abs(denom) < 1e-14) return false;
  std::vector<double> delta(p);
  delta[0] = b / denom;
  for (std::size_t i = 0; i + 1 < p; ++i)
    delta[i + 1] = logistic_dx(alpha, x[i]) * delta[i] - r[i];
  for (std::size_t i = 0; i < p; ++i) x[i] -= delta[i];
  return true;
}

}  // namespace detail

// Polish a nearby guess into a genuine cycle. Works for unstable cycles too;
// the only failure mode is a multiplier pinned at +1 (cycle birth).
inline LogisticCycle solve_logistic_cycle(double alpha, std::vector<double> guess,
                                          double tol = 1e-13, int max_iter = 64) {
  double resid = kInf;
  for (int it = 0; it < max_iter; ++it) {
    if (!detail::logistic_cycle_newton_step(alpha, guess, resid))
      throw SingularJacobian("logistic cycle Jacobian singular (multiplier near +1)");
    if (resid < tol) {
      double m = 1.0;
      for (double x : guess) m *= logistic_dx(alpha, x);
      return LogisticCycle{alpha, std::move(guess), m};
    }
  }
  throw NoConvergence("logistic cycle Newton stalled at alpha=" + std::to_string(alpha));
}

// Forward-iterate the critical point until transients die, then read off one
// period of the attracting cycle. Only valid when the attractor at alpha is
// a p-cycle, which holds inside the doubling window the callers sweep.
inline std::vector<double> attracting_cycle_guess(double alpha, std::size_t p,
                                                  std::int64_t transient = 200000) {
  double x = 0.5;
  for (std::int64_t i = 0; i < transient; ++i) x = logistic_fiber(alpha, x);
  std::vector<double> pts(p);
  for (std::size_t i = 0; i < p; ++i) {
    pts[i] = x;
    x = logistic_fiber(alpha, x);
  }
  return pts;
}

namespace detail {

// Locate the multiplier -1 parameter of the p-cycle inside (lo, hi): seed the
// cycle by forward iteration early in the window, Newton-track it upward in
// alpha (tracking survives the loss of stability), bracket the sign change of
// m(alpha)+1 and bisect it down to parameter resolution.
inline LogisticCycle multiplier_minus_one(std::size_t p, double lo, double hi) {
  const double a_start = lo + 0.15 * (hi - lo);
  LogisticCycle cyc = solve_logistic_cycle(a_start, attracting_cycle_guess(a_start, p));

  auto track = [&cyc](double alpha) {
    cyc = solve_logistic_cycle(alpha, cyc.points);
    return cyc.multiplier + 1.0;
  };

  const int sweep = 48;
  double a_prev = a_start, f_prev = cyc.multiplier + 1.0;
  double a_lo = 0.0, a_hi = 0.0;
  bool bracketed = false;
  for (int s = 1; s <= sweep; ++s) {
    const double a = a_start + (hi - a_start) * (static_cast<double>(s) / sweep);
    const double f = track(a);
    if (f_prev > 0.0 && f <= 0.0) {
      a_lo = a_prev;
      a_hi = a;
      bracketed = true;
      break;
    }
    a_prev = a;
    f_prev = f;
  }
  if (!bracketed) throw NoConvergence("doubling multiplier -1 not bracketed");

  for (int it = 0; it < 80 && (a_hi - a_lo) > 1e-14; ++it) {
    const double mid = 0.5 * (a_lo + a_hi);
    if (track(mid) > 0.0)
      a_lo = mid;
    else
      a_hi = mid;
  }
  track(0.5 * (a_lo + a_hi));
  return cyc;
}

}  // namespace detail

// d_1 .. d_n of the doubling cascade, computed in one pass (each window is
// estimated from the two previous doublings via the asymptotic contraction of
// the cascade, with wide safety margins).
inline std::vector<LogisticCycle> doubling_cascade(int n) {
  if (n < 1 || n > 14) throw std::domain_error("doubling index out of supported range");
  std::vector<LogisticCycle> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    double lo, hi;
    if (i == 1) {
      lo = 2.2;
      hi = 3.3;
    } else {
      const double d_prev = out[static_cast<std::size_t>(i - 2)].alpha;
      const double spacing =
          (i == 2) ? 0.47 : (d_prev - out[static_cast<std::size_t>(i - 3)].alpha) / 4.0;
      lo = d_prev + 0.06 * spacing;
      hi = d_prev + 1.35 * spacing;
    }
    LogisticCycle cyc = detail::multiplier_minus_one(std::size_t{1} << (i - 1), lo, hi);
    // Canonical point order: start the cycle at its smallest point.
    auto it = std::min_element(cyc.points.begin(), cyc.points.end());
    std::rotate(cyc.points.begin(), it, cyc.points.end());
    out.push_back(std::move(cyc));
  }
  return out;
}

// Parameter of the i-th doubling: the 2^(i-1)-cycle has multiplier -1 there.
inline LogisticCycle doubling_parameter(int i) { return doubling_cascade(i).back(); }

}  // namespace qpmap
