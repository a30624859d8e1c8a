#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "qpmap/angle.hpp"
#include "qpmap/common.hpp"

namespace qpmap {

// Real trigonometric polynomial on T, stored as [a0, a1, b1, a2, b2, ...]:
//   u(theta) = a0 + sum_k a_k cos(2 pi k theta) + b_k sin(2 pi k theta).
// Degree N gives 2N+1 coefficients; the collocation grid always uses 2N+1
// equispaced nodes so evaluation <-> node values is a bijection.
struct FourierCurve {
  int order = 0;
  std::vector<double> coeffs;

  static FourierCurve constant(double a0, int order) {
    FourierCurve c;
    c.order = order;
    c.coeffs.assign(2 * static_cast<std::size_t>(order) + 1, 0.0);
    c.coeffs[0] = a0;
    return c;
  }

  std::size_t size() const { return coeffs.size(); }
};

namespace detail {

// One angle-addition step per harmonic: no trig calls past the first.
struct TrigRecurrence {
  double c1, s1, ck, sk;
  explicit TrigRecurrence(double theta)
      : c1(std::cos(kTwoPi * theta)), s1(std::sin(kTwoPi * theta)), ck(1.0), sk(0.0) {}
  void advance() {
    const double c = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = c;
  }
};

}  // namespace detail

inline double eval_curve(const FourierCurve& u, double theta) {
  detail::TrigRecurrence t(theta);
  double sum = u.coeffs[0];
  for (int k = 1; k <= u.order; ++k) {
    t.advance();
    sum += u.coeffs[2 * k - 1] * t.ck + u.coeffs[2 * k] * t.sk;
  }
  return sum;
}

inline double eval_curve_d1(const FourierCurve& u, double theta) {
  detail::TrigRecurrence t(theta);
  double sum = 0.0;
  for (int k = 1; k <= u.order; ++k) {
    t.advance();
    sum += kTwoPi * k * (-u.coeffs[2 * k - 1] * t.sk + u.coeffs[2 * k] * t.ck);
  }
  return sum;
}

inline double eval_curve_d2(const FourierCurve& u, double theta) {
  detail::TrigRecurrence t(theta);
  double sum = 0.0;
  for (int k = 1; k <= u.order; ++k) {
    t.advance();
    const double wk = kTwoPi * k;
    sum -= wk * wk * (u.coeffs[2 * k - 1] * t.ck + u.coeffs[2 * k] * t.sk);
  }
  return sum;
}

// row[m] = basis function m at theta, in coefficient order.
inline void fill_basis_row(double theta, int order, double* row) {
  detail::TrigRecurrence t(theta);
  row[0] = 1.0;
  for (int k = 1; k <= order; ++k) {
    t.advance();
    row[2 * k - 1] = t.ck;
    row[2 * k] = t.sk;
  }
}

inline std::vector<double> collocation_nodes(int order) {
  const std::size_t m = 2 * static_cast<std::size_t>(order) + 1;
  std::vector<double> nodes(m);
  for (std::size_t j = 0; j < m; ++j)
    nodes[j] = static_cast<double>(j) / static_cast<double>(m);
  return nodes;
}

// Exact discrete transform on the 2N+1 grid (odd length: no Nyquist mode,
// so the transform pair is an honest inverse for degree <= N polynomials).
inline FourierCurve values_to_curve(const std::vector<double>& values, int order) {
  const std::size_t m = values.size();
  FourierCurve u;
  u.order = order;
  u.coeffs.assign(2 * static_cast<std::size_t>(order) + 1, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const double theta = static_cast<double>(j) / static_cast<double>(m);
    detail::TrigRecurrence t(theta);
    u.coeffs[0] += values[j];
    for (int k = 1; k <= order; ++k) {
      t.advance();
      u.coeffs[2 * k - 1] += 2.0 * values[j] * t.ck;
      u.coeffs[2 * k] += 2.0 * values[j] * t.sk;
    }
  }
  for (double& c : u.coeffs) c /= static_cast<double>(m);
  return u;
}

// Zero-pad (or truncate) to a new degree; values on T are unchanged when
// growing.
inline FourierCurve resize_curve(const FourierCurve& u, int order) {
  FourierCurve out;
  out.order = order;
  out.coeffs.assign(2 * static_cast<std::size_t>(order) + 1, 0.0);
  const int keep = std::min(order, u.order);
  out.coeffs[0] = u.coeffs[0];
  for (int k = 1; k <= keep; ++k) {
    out.coeffs[2 * k - 1] = u.coeffs[2 * k - 1];
    out.coeffs[2 * k] = u.coeffs[2 * k];
  }
  return out;
}

struct CurveNorms {
  double sup_d1 = 0.0;
  double sup_d2 = 0.0;
};

inline CurveNorms curve_norms(const FourierCurve& u, std::size_t grid = 4096) {
  CurveNorms n;
  for (std::size_t j = 0; j < grid; ++j) {
    const double theta = static_cast<double>(j) / static_cast<double>(grid);
    n.sup_d1 = std::max(n.sup_d1, std::abs(eval_curve_d1(u, theta)));
    n.sup_d2 = std::max(n.sup_d2, std::abs(eval_curve_d2(u, theta)));
  }
  return n;
}

// Highest-harmonic magnitude relative to the largest coefficient; the
// continuation reads this as "is the truncation order still resolving the
// curve".
inline double tail_fraction(const FourierCurve& u) {
  if (u.order == 0) return 0.0;
  double peak = 0.0;
  for (double c : u.coeffs) peak = std::max(peak, std::abs(c));
  if (peak == 0.0) return 0.0;
  const double tail =
      std::max(std::abs(u.coeffs[2 * u.order - 1]), std::abs(u.coeffs[2 * u.order]));
  return tail / peak;
}

}  // namespace qpmap
