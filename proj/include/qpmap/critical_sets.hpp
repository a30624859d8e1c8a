#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qpmap/angle.hpp"
#include "qpmap/common.hpp"
#include "qpmap/map_family.hpp"

namespace qpmap {

// The fiber map folds [0,1] at x = 1/2, so every point below the fold image
// has two preimages, one per half. A symbol picks the half: Plus is the
// order-preserving branch into [0,1/2], Minus the order-reversing branch
// into [1/2,1].
enum class Sign { Plus, Minus };

using SymbolSeq = std::vector<Sign>;

inline SymbolSeq parse_symbols(const std::string& text) {
  SymbolSeq s;
  s.reserve(text.size());
  for (char ch : text) {
    if (ch == '+')
      s.push_back(Sign::Plus);
    else if (ch == '-')
      s.push_back(Sign::Minus);
    else
      throw std::invalid_argument("symbol string may contain only '+' and '-'");
  }
  return s;
}

inline std::string symbols_to_string(const SymbolSeq& s) {
  std::string text;
  text.reserve(s.size());
  for (Sign sg : s) text.push_back(sg == Sign::Plus ? '+' : '-');
  return text;
}

// Image of the critical line x = 1/2: the curve of fiber maxima, evaluated
// at the image angle theta.
inline double post_critical(const FlmParams& p, double theta) {
  return 0.25 * p.alpha * (1.0 + p.epsilon * std::cos(kTwoPi * (theta - p.omega)));
}

// One backward step onto the chosen half of the fold. Input is a point
// (theta, x) on the image side; output sits at angle theta - omega. Empty
// when x exceeds the local fiber maximum. A radicand within 1e-14 below
// zero is treated as an exact tangency and clamped.
inline std::optional<std::pair<double, double>> fold_preimage(const FlmParams& p, Sign half,
                                                              double theta, double x) {
  const double theta_up = wrap_unit(theta - p.omega);
  const double den = p.alpha * (1.0 + p.epsilon * std::cos(kTwoPi * theta_up));
  if (den <= 0.0) return std::nullopt;
  double rad = 0.25 - x / den;
  if (rad < 0.0) {
    if (rad < -1e-14) return std::nullopt;
    rad = 0.0;
  }
  const double off = std::sqrt(rad);
  return std::make_pair(theta_up, half == Sign::Plus ? 0.5 - off : 0.5 + off);
}

// A subset of the cylinder sampled on a circular angle grid, grouped into
// maximal arcs of consecutive surviving samples.
struct PiecewiseCurve {
  struct Segment {
    std::vector<double> thetas;
    std::vector<double> xs;
  };
  std::vector<Segment> segments;

  std::size_t sample_count() const {
    std::size_t n = 0;
    for (const Segment& s : segments) n += s.thetas.size();
    return n;
  }
};

namespace detail {

// Group surviving grid indices into circular runs and copy their samples.
inline PiecewiseCurve group_circular(const std::vector<bool>& alive,
                                     const std::vector<double>& thetas,
                                     const std::vector<double>& xs) {
  PiecewiseCurve out;
  const std::size_t n = alive.size();
  std::size_t alive_count = 0;
  for (bool b : alive) alive_count += b ? 1 : 0;
  if (alive_count == 0) return out;
  if (alive_count == n) {
    PiecewiseCurve::Segment seg;
    seg.thetas = thetas;
    seg.xs = xs;
    out.segments.push_back(std::move(seg));
    return out;
  }
  // Start scanning just past a dead sample so no run is split by the seam.
  std::size_t start = 0;
  while (alive[start]) ++start;
  PiecewiseCurve::Segment seg;
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t i = (start + k) % n;
    if (alive[i]) {
      seg.thetas.push_back(thetas[i]);
      seg.xs.push_back(xs[i]);
    } else if (!seg.thetas.empty()) {
      out.segments.push_back(std::move(seg));
      seg = PiecewiseCurve::Segment{};
    }
  }
  if (!seg.thetas.empty()) out.segments.push_back(std::move(seg));
  return out;
}

}  // namespace detail

// Backward image of the critical line under the symbol sequence, applied
// first symbol first. Samples are seeded at i/resolution + |s|*omega so the
// final angles land back on the uniform grid, which lets envelope code
// compare different sets index by index.
inline PiecewiseCurve precritical(const FlmParams& p, const SymbolSeq& s,
                                  std::size_t resolution = 8192) {
  const auto k = s.size();
  std::vector<bool> alive(resolution, true);
  std::vector<double> thetas(resolution), xs(resolution, 0.5);
  for (std::size_t i = 0; i < resolution; ++i)
    thetas[i] =
        wrap_unit(static_cast<double>(i) / static_cast<double>(resolution) +
                  static_cast<double>(k) * p.omega);
  for (Sign half : s) {
    for (std::size_t i = 0; i < resolution; ++i) {
      if (!alive[i]) continue;
      const auto pre = fold_preimage(p, half, thetas[i], xs[i]);
      if (!pre) {
        alive[i] = false;
        continue;
      }
      thetas[i] = pre->first;
      xs[i] = pre->second;
    }
  }
  return detail::group_circular(alive, thetas, xs);
}

// Largest eps below which the fiber maximum clears the critical line at
// every angle, so the first backward step exists on the whole circle.
inline double first_bound(double alpha) {
  if (alpha <= 2.0)
    throw std::domain_error("first backward bound needs alpha > 2");
  return 1.0 - 2.0 / alpha;
}

// Smallest signed clearance between a sampled set and the curve of fiber
// maxima; +inf when the set is empty.
inline double gap_to_postcritical(const FlmParams& p, const PiecewiseCurve& curve) {
  double gap = kInf;
  for (const PiecewiseCurve::Segment& seg : curve.segments)
    for (std::size_t i = 0; i < seg.thetas.size(); ++i)
      gap = std::min(gap, post_critical(p, seg.thetas[i]) - seg.xs[i]);
  return gap;
}

inline double gap_to_postcritical(const FlmParams& p, const SymbolSeq& s,
                                  std::size_t resolution = 8192) {
  return gap_to_postcritical(p, precritical(p, s, resolution));
}

// Eps at which the backward image of the critical line first touches the
// curve of fiber maxima: the first crossing of the clearance from positive
// to non-positive along increasing eps, located by a coarse scan plus
// bisection. The clearance need not be monotone (sets can shrink and empty
// out at large eps), so endpoint signs alone are not trusted. The default
// search interval is [1e-4, min(first bound, compactness bound)]; pass
// eps_hi explicitly to search past the compactness bound, where the sets
// are still well defined even though orbits may leave [0,1].
inline double tangency_constraint(double alpha, const SymbolSeq& s,
                                  std::size_t resolution = 8192, double eps_lo = 1e-4,
                                  double eps_hi = 0.0) {
  if (eps_hi <= 0.0) eps_hi = std::min(first_bound(alpha), 4.0 / alpha - 1.0);
  if (!(eps_hi > eps_lo))
    throw NoTangencyInRange("empty eps range for tangency search");
  auto gap_at = [&](double eps) {
    const FlmParams p{alpha, eps};
    return gap_to_postcritical(p, precritical(p, s, resolution));
  };
  constexpr int kScan = 48;
  double lo = kNan, hi = kNan;
  double prev_eps = eps_lo, prev_gap = gap_at(eps_lo);
  for (int i = 1; i <= kScan; ++i) {
    const double eps = eps_lo + (eps_hi - eps_lo) * static_cast<double>(i) / kScan;
    const double gap = gap_at(eps);
    if (prev_gap > 0.0 && std::isfinite(prev_gap) && gap <= 0.0 && std::isfinite(gap)) {
      lo = prev_eps;
      hi = eps;
      break;
    }
    prev_eps = eps;
    prev_gap = gap;
  }
  if (!std::isfinite(lo))
    throw NoTangencyInRange("clearance does not change sign over the eps range");
  for (int it = 0; it < 64 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (gap_at(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct ConstraintCurve {
  SymbolSeq symbols;
  std::vector<double> alphas;
  std::vector<double> eps_stars;  // same length as alphas; skipped alphas absent
};

inline ConstraintCurve constraint_curve(const SymbolSeq& s, double alpha_lo, double alpha_hi,
                                        std::size_t n_alpha, std::size_t resolution = 4096) {
  ConstraintCurve out;
  out.symbols = s;
  for (std::size_t i = 0; i < n_alpha; ++i) {
    const double a = alpha_lo + (alpha_hi - alpha_lo) * static_cast<double>(i) /
                                    static_cast<double>(n_alpha - 1);
    try {
      const double e = tangency_constraint(a, s, resolution);
      out.alphas.push_back(a);
      out.eps_stars.push_back(e);
    } catch (const NoTangencyInRange&) {
    } catch (const std::domain_error&) {
    }
  }
  return out;
}

// Envelopes of the region every reducible invariant curve in the upper half
// of the cylinder must occupy. The obstructions are the repeated
// order-reversing backward images of the critical line (the only backward
// images that stay inside the absorbing band): odd depths press down from
// the curve of fiber maxima, even depths push up from the critical line.
// The region exists while every even-depth image up to depth 2*k_max stays
// strictly below the curve of fiber maxima (empty images count as clear).
struct InvariantReducibilitySet {
  bool exists = false;
  double min_even_gap = kInf;   // min clearance of even-depth sets below the fiber maxima
  double min_separation = 0.0;  // min over the grid of upper - lower
  std::vector<double> thetas, lower, upper;
};

inline InvariantReducibilitySet invariant_reducibility_set(const FlmParams& p, int k_max,
                                                           std::size_t resolution = 8192) {
  InvariantReducibilitySet out;
  out.thetas.resize(resolution);
  out.lower.assign(resolution, 0.5);
  out.upper.resize(resolution);
  for (std::size_t i = 0; i < resolution; ++i) {
    out.thetas[i] = static_cast<double>(i) / static_cast<double>(resolution);
    out.upper[i] = post_critical(p, out.thetas[i]);
  }

  // Depth d of the all-minus chain. Angles are seeded at grid + d*omega so
  // depth-d outputs land back on the uniform grid and envelope updates
  // compare samples at the same index.
  for (int d = 1; d <= 2 * k_max; ++d) {
    for (std::size_t i = 0; i < resolution; ++i) {
      double theta = wrap_unit(out.thetas[i] + static_cast<double>(d) * p.omega);
      double x = 0.5;
      bool ok = true;
      for (int s = 0; s < d; ++s) {
        const auto pre = fold_preimage(p, Sign::Minus, theta, x);
        if (!pre) {
          ok = false;
          break;
        }
        theta = pre->first;
        x = pre->second;
      }
      if (!ok) continue;
      if (d % 2 == 0) {
        out.lower[i] = std::max(out.lower[i], x);
        out.min_even_gap = std::min(out.min_even_gap, post_critical(p, out.thetas[i]) - x);
      } else {
        out.upper[i] = std::min(out.upper[i], x);
      }
    }
  }
  out.exists = out.min_even_gap > 0.0;

  double sep = kInf;
  for (std::size_t i = 0; i < resolution; ++i)
    sep = std::min(sep, out.upper[i] - out.lower[i]);
  out.min_separation = sep;
  return out;
}

}  // namespace qpmap
