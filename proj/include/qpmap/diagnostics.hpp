#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpmap/angle.hpp"
#include "qpmap/common.hpp"
#include "qpmap/map_family.hpp"

namespace qpmap {

struct LyapunovEstimate {
  double value = 0.0;
  std::int64_t n_used = 0;
  bool converged = false;
};

// Birkhoff average of ln|df/dx| along the orbit. Convergence is declared at
// the first checkpoint n >= n_min where the running estimates at n,
// floor(3n/4) and floor(n/2) pairwise agree within tol; prefix sums are kept
// on a coarse lattice so the test costs O(n_max/64) memory, not O(n_max).
// n_min guards against flukes where a short early window happens to look
// flat while the average is still drifting.
// An exact zero of the fiber derivative short-circuits to -inf: the average
// is -inf no matter what the rest of the orbit does.
template <FiberMap M>
LyapunovEstimate lyapunov_limit(const M& map, OrbitState seed, double tol = 1e-3,
                                std::int64_t n_max = 1000000, std::int64_t transient = 1000,
                                double escape_bound = kEscapeBound, std::int64_t n_min = 512) {
  double theta = seed.theta.value();
  double x = seed.x;
  const double w = map.omega();
  for (std::int64_t i = 0; i < transient; ++i) {
    x = map.fiber(theta, x);
    theta = wrap_unit(theta + w);
    if (!(std::abs(x) <= escape_bound)) throw DivergedOrbit("orbit escaped during transient");
  }

  constexpr std::int64_t kStore = 64;   // prefix sums stored every kStore steps
  constexpr std::int64_t kCheck = 256;  // stopping rule tested every kCheck steps
  std::vector<double> sums;             // sums[k] = sum of first k*kStore log factors
  sums.reserve(static_cast<std::size_t>(n_max / kStore) + 2);
  sums.push_back(0.0);

  double acc = 0.0;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double a = map.dfiber_dx(theta, x);
    if (a == 0.0) return LyapunovEstimate{-kInf, n, true};
    acc += std::log(std::abs(a));
    x = map.fiber(theta, x);
    theta = wrap_unit(theta + w);
    if (!(std::abs(x) <= escape_bound)) throw DivergedOrbit("orbit escaped");

    if (n % kStore == 0) sums.push_back(acc);
    if (n % kCheck == 0 && n >= 2 * kCheck && n >= n_min) {
      const auto at = [&](std::int64_t m) {
        return sums[static_cast<std::size_t>(m / kStore)] / static_cast<double>(m);
      };
      const double e1 = acc / static_cast<double>(n);
      const double e2 = at(3 * n / 4);
      const double e3 = at(n / 2);
      if (std::abs(e1 - e2) < tol && std::abs(e1 - e3) < tol && std::abs(e2 - e3) < tol)
        return LyapunovEstimate{e1, n, true};
    }
  }
  return LyapunovEstimate{acc / static_cast<double>(n_max), n_max, false};
}

struct CurveMesh {
  std::vector<double> thetas;
  std::vector<double> xs;
  double residual = kInf;
};

// Evaluate a mesh as a function of theta: nearest segment of the periodic
// grid, linear interpolation inside it.
inline double mesh_eval(const CurveMesh& mesh, double theta) {
  const std::size_t n = mesh.xs.size();
  const double s = wrap_unit(theta) * static_cast<double>(n);
  const std::size_t i0 = std::min(static_cast<std::size_t>(s), n - 1);
  const double frac = s - static_cast<double>(i0);
  const std::size_t i1 = (i0 + 1 == n) ? 0 : i0 + 1;
  return mesh.xs[i0] * (1.0 - frac) + mesh.xs[i1] * frac;
}

// Max invariance defect over the mesh, with the shifted value read back off
// the mesh by interpolation.
template <FiberMap M>
double mesh_invariance_residual(const M& map, const CurveMesh& mesh) {
  double worst = 0.0;
  for (std::size_t j = 0; j < mesh.xs.size(); ++j) {
    const double image = map.fiber(mesh.thetas[j], mesh.xs[j]);
    worst = std::max(worst, std::abs(mesh_eval(mesh, mesh.thetas[j] + map.omega()) - image));
  }
  return worst;
}

// Attracting-curve mesh by the backward start: u(theta_j) is approximated by
// the M-step image of (theta_j - M*omega, x0). Contraction along the
// attractor washes out the arbitrary x0 at rate e^(Lyapunov * M).
template <FiberMap M>
CurveMesh curve_mesh(const M& map, std::size_t mesh_size, std::int64_t depth, double x0,
                     double escape_bound = kEscapeBound) {
  CurveMesh mesh;
  mesh.thetas.resize(mesh_size);
  mesh.xs.resize(mesh_size);
  const double w = map.omega();
  for (std::size_t j = 0; j < mesh_size; ++j) {
    const double theta_j = static_cast<double>(j) / static_cast<double>(mesh_size);
    double theta = rotate_n(theta_j, w, -depth);
    double x = x0;
    for (std::int64_t k = 0; k < depth; ++k) {
      x = map.fiber(theta, x);
      theta = wrap_unit(theta + w);
      if (!(std::abs(x) <= escape_bound)) throw DivergedOrbit("mesh orbit escaped");
    }
    mesh.thetas[j] = theta_j;
    mesh.xs[j] = x;
  }
  mesh.residual = mesh_invariance_residual(map, mesh);
  return mesh;
}

// Double the backward depth until the invariance residual passes tol (or the
// depth cap is hit; the caller can read the achieved residual off the mesh).
template <FiberMap M>
CurveMesh converged_curve_mesh(const M& map, std::size_t mesh_size, double x0, double tol = 1e-6,
                               std::int64_t depth0 = 1000, std::int64_t depth_cap = 16000,
                               double escape_bound = kEscapeBound) {
  std::int64_t depth = depth0;
  CurveMesh mesh = curve_mesh(map, mesh_size, depth, x0, escape_bound);
  while (mesh.residual > tol && depth < depth_cap) {
    depth = std::min(depth * 2, depth_cap);
    mesh = curve_mesh(map, mesh_size, depth, x0, escape_bound);
  }
  return mesh;
}

struct ReducibilityCheck {
  bool reducible = false;
  double min_abs_dxf = 0.0;
};

// A curve on which the fiber derivative never vanishes conjugates to a
// constant-multiplier skew product; numerically, "never vanishes" means the
// minimum over the mesh clears a threshold and the derivative keeps one sign.
// The sign test matters when the derivative crosses zero transversally: the
// dip between mesh nodes can stay above any fixed threshold while the sign
// flip still certifies a zero in between.
template <FiberMap M>
ReducibilityCheck reducibility_check(const M& map, const CurveMesh& mesh,
                                     double threshold = 1e-4) {
  double lo = kInf;
  bool flipped = false;
  double first = 0.0;
  double prev = 0.0;
  for (std::size_t j = 0; j < mesh.xs.size(); ++j) {
    const double a = map.dfiber_dx(mesh.thetas[j], mesh.xs[j]);
    lo = std::min(lo, std::abs(a));
    if (j == 0)
      first = a;
    else if (a * prev < 0.0)
      flipped = true;
    prev = a;
  }
  if (!mesh.xs.empty() && prev * first < 0.0) flipped = true;
  return ReducibilityCheck{lo > threshold && !flipped, lo};
}

namespace detail {

// Single-linkage cluster count of a sorted value set: groups split where the
// gap between consecutive values exceeds the threshold.
inline int cluster_count(std::vector<double>& values, double gap) {
  if (values.empty()) return 0;
  std::sort(values.begin(), values.end());
  int clusters = 1;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] - values[i - 1] > gap) ++clusters;
  return clusters;
}

inline bool power_of_two_le(int v, int cap) {
  return v >= 1 && v <= cap && (v & (v - 1)) == 0;
}

}  // namespace detail

// Count attractor branches over a theta fiber: collect orbit returns to a
// window around the seed's theta, cluster their x values, and accept the
// cluster count only if it is a power of two within range and stable when
// the sample is doubled. 0 means "no clean period" (wrinkled or chaotic
// layers), which is a result, not an error.
template <FiberMap M>
int detect_period(const M& map, OrbitState state, double window = 1e-3, int max_p = 32,
                  double x_gap = 1e-4, std::size_t base_returns = 32,
                  double escape_bound = kEscapeBound) {
  const double theta0 = state.theta.value();
  double theta = theta0;
  double x = state.x;
  const double w = map.omega();

  std::vector<double> first, second;
  first.reserve(base_returns);
  second.reserve(2 * base_returns);
  // Window hits arrive at rate 2*window per step; budget generously past the
  // expected count so slow starts still gather both samples.
  const std::int64_t budget =
      static_cast<std::int64_t>(std::ceil(6.0 * static_cast<double>(base_returns) / window));
  for (std::int64_t n = 0; n < budget && second.size() < 2 * base_returns; ++n) {
    x = map.fiber(theta, x);
    theta = wrap_unit(theta + w);
    if (!(std::abs(x) <= escape_bound)) throw DivergedOrbit("orbit escaped in period probe");
    double d = std::abs(theta - theta0);
    d = std::min(d, 1.0 - d);
    if (d <= window) {
      if (first.size() < base_returns) first.push_back(x);
      second.push_back(x);
    }
  }
  if (first.size() < 10) throw InsufficientSamples("fewer than 10 window returns");

  const int c1 = detail::cluster_count(first, x_gap);
  const int c2 = detail::cluster_count(second, x_gap);
  if (c1 == c2 && detail::power_of_two_le(c1, max_p)) return c1;
  return 0;
}

// Phase-derivative growth along the orbit: d <- df/dtheta + df/dx * d. The
// profile records the running max at each requested order; the indicator is
// the min of that over seeds (one transversally stable seed is enough to
// rule a candidate out).
template <FiberMap M>
std::vector<double> phase_sensitivity_profile(const M& map, const std::vector<OrbitState>& seeds,
                                              const std::vector<std::int64_t>& orders,
                                              double escape_bound = kEscapeBound) {
  std::vector<double> out(orders.size(), kInf);
  for (const OrbitState& seed : seeds) {
    double theta = seed.theta.value();
    double x = seed.x;
    double d = 0.0;
    double gmax = 0.0;
    const double w = map.omega();
    std::size_t next = 0;
    const std::int64_t n_last = orders.back();
    for (std::int64_t n = 1; n <= n_last && next < orders.size(); ++n) {
      d = map.dfiber_dtheta(theta, x) + map.dfiber_dx(theta, x) * d;
      x = map.fiber(theta, x);
      theta = wrap_unit(theta + w);
      if (!(std::abs(x) <= escape_bound))
        throw DivergedOrbit("orbit escaped in phase sensitivity");
      gmax = std::max(gmax, std::abs(d));
      while (next < orders.size() && orders[next] == n) {
        out[next] = std::min(out[next], gmax);
        ++next;
      }
      if (gmax > 1e280) {  // growth already decided; freeze remaining orders
        for (; next < orders.size(); ++next) out[next] = std::min(out[next], gmax);
        break;
      }
    }
  }
  return out;
}

template <FiberMap M>
double phase_sensitivity(const M& map, const std::vector<OrbitState>& seeds, std::int64_t order,
                         double escape_bound = kEscapeBound) {
  return phase_sensitivity_profile(map, seeds, {order}, escape_bound)[0];
}

// Candidate rule: gamma keeps at least doubling across two octaves,
// i.e. gamma(N) > 2*gamma(N/2) > 4*gamma(N/4).
inline bool sna_candidate(double g_quarter, double g_half, double g_full, double factor = 2.0) {
  return g_full > factor * g_half && g_half > factor * g_quarter;
}

enum class ClassLabel { Diverged, Chaotic, NonReducibleCurve, ReducibleCurve, ZeroLyapunov };

inline const char* to_string(ClassLabel c) {
  switch (c) {
    case ClassLabel::Diverged: return "diverged";
    case ClassLabel::Chaotic: return "chaotic";
    case ClassLabel::NonReducibleCurve: return "non_reducible_curve";
    case ClassLabel::ReducibleCurve: return "reducible_curve";
    case ClassLabel::ZeroLyapunov: return "zero_lyapunov";
  }
  return "unknown";
}

struct OrbitDiagnostics {
  bool diverged = false;
  LyapunovEstimate lyapunov;
  int period = 0;
  std::optional<bool> reducible;  // meaningful only for non-chaotic bounded orbits
  double min_abs_dxf = kInf;
  bool mesh_converged = false;
};

inline ClassLabel classify(const OrbitDiagnostics& d, double zero_tol = 1e-3) {
  if (d.diverged) return ClassLabel::Diverged;
  if (d.lyapunov.value > zero_tol) return ClassLabel::Chaotic;
  if (std::abs(d.lyapunov.value) <= zero_tol) return ClassLabel::ZeroLyapunov;
  if (!d.reducible.has_value())
    throw std::invalid_argument("classify: contracting orbit without reducibility verdict");
  return *d.reducible ? ClassLabel::ReducibleCurve : ClassLabel::NonReducibleCurve;
}

}  // namespace qpmap
