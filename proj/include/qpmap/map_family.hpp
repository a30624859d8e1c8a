#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "qpmap/angle.hpp"
#include "qpmap/common.hpp"

namespace qpmap {

struct FlmParams {
  double alpha = 0.0;
  double epsilon = 0.0;
  double omega = kGoldenMean;
};

struct ModelParams {
  double mu = 0.0;
  double lambda = 0.0;
  double omega = kGoldenMean;
};

// alpha*(1+|eps|) <= 4 keeps T x [0,1] forward invariant.
inline bool compact_domain_ok(const FlmParams& p) {
  return p.alpha * (1.0 + std::abs(p.epsilon)) <= 4.0;
}

inline void require_compact(const FlmParams& p) {
  if (!compact_domain_ok(p))
    throw std::domain_error("alpha*(1+|epsilon|) > 4: cylinder not invariant");
}

struct OrbitState {
  Angle theta;
  double x = 0.0;
  std::int64_t step_count = 0;
};

// Anything that exposes a skew-product fiber over the rigid rotation.
template <typename M>
concept FiberMap = requires(const M m, double t, double x) {
  { m.fiber(t, x) } -> std::convertible_to<double>;
  { m.dfiber_dx(t, x) } -> std::convertible_to<double>;
  { m.dfiber_dtheta(t, x) } -> std::convertible_to<double>;
  { m.omega() } -> std::convertible_to<double>;
};

// Quasi-periodically forced logistic fiber
//   x' = alpha*x*(1-x) * (1 + eps*cos(2*pi*theta)).
// The logistic factor is kept as a separate product so the eps = 0 fiber is
// bit-identical to the plain logistic map.
struct FlmMap {
  FlmParams p;

  double fiber(double theta, double x) const {
    return p.alpha * x * (1.0 - x) * (1.0 + p.epsilon * std::cos(kTwoPi * theta));
  }
  double dfiber_dx(double theta, double x) const {
    return p.alpha * (1.0 - 2.0 * x) * (1.0 + p.epsilon * std::cos(kTwoPi * theta));
  }
  double dfiber_dtheta(double theta, double x) const {
    return -kTwoPi * p.epsilon * p.alpha * x * (1.0 - x) * std::sin(kTwoPi * theta);
  }
  double omega() const { return p.omega; }
};

// Cubic model fiber  x' = x * (x^2 - (mu + lambda*cos(2*pi*theta))).
// Odd in x, so x = 0 is always invariant and the linearization along it is
// the weighted shift by -(mu + lambda*cos(2*pi*theta)).
struct ModelMap {
  ModelParams p;

  double forcing(double theta) const { return p.mu + p.lambda * std::cos(kTwoPi * theta); }

  double fiber(double theta, double x) const { return x * (x * x - forcing(theta)); }
  double dfiber_dx(double theta, double x) const { return 3.0 * x * x - forcing(theta); }
  double dfiber_dtheta(double theta, double x) const {
    return x * p.lambda * kTwoPi * std::sin(kTwoPi * theta);
  }
  double omega() const { return p.omega; }
};

// Type-erased family: user-defined forcings plug into every diagnostic that
// accepts the FiberMap concept. The two maps above are the provided stock.
struct MapFamily {
  std::function<double(double, double)> fiber_fn;
  std::function<double(double, double)> dfx_fn;
  std::function<double(double, double)> dtheta_fn;
  double omega_value = kGoldenMean;

  double fiber(double theta, double x) const { return fiber_fn(theta, x); }
  double dfiber_dx(double theta, double x) const { return dfx_fn(theta, x); }
  double dfiber_dtheta(double theta, double x) const { return dtheta_fn(theta, x); }
  double omega() const { return omega_value; }
};

inline MapFamily make_flm(const FlmParams& p) {
  FlmMap m{p};
  return MapFamily{
      [m](double t, double x) { return m.fiber(t, x); },
      [m](double t, double x) { return m.dfiber_dx(t, x); },
      [m](double t, double x) { return m.dfiber_dtheta(t, x); },
      p.omega,
  };
}

inline MapFamily make_model(const ModelParams& p) {
  ModelMap m{p};
  return MapFamily{
      [m](double t, double x) { return m.fiber(t, x); },
      [m](double t, double x) { return m.dfiber_dx(t, x); },
      [m](double t, double x) { return m.dfiber_dtheta(t, x); },
      p.omega,
  };
}

inline OrbitState flm_step(const FlmParams& p, const OrbitState& s) {
  FlmMap m{p};
  OrbitState next;
  next.x = m.fiber(s.theta.value(), s.x);
  next.theta = s.theta + p.omega;
  next.step_count = s.step_count + 1;
  return next;
}

inline OrbitState model_step(const ModelParams& p, const OrbitState& s) {
  ModelMap m{p};
  OrbitState next;
  next.x = m.fiber(s.theta.value(), s.x);
  next.theta = s.theta + p.omega;
  next.step_count = s.step_count + 1;
  return next;
}

inline double flm_dx(const FlmParams& p, double theta, double x) {
  return FlmMap{p}.dfiber_dx(theta, x);
}

inline constexpr double kEscapeBound = 1e6;

// p-fold composition viewed as a single fiber map over the rotation by
// p*omega; derivatives follow the chain rule along the intermediate states.
template <FiberMap M>
struct PowerMap {
  M base;
  int p = 1;
  PowerMap(M m, int power) : base(std::move(m)), p(power) {}

  double fiber(double theta, double x) const {
    const double w = base.omega();
    for (int s = 0; s < p; ++s) {
      x = base.fiber(theta, x);
      theta = wrap_unit(theta + w);
    }
    return x;
  }
  double dfiber_dx(double theta, double x) const {
    const double w = base.omega();
    double chain = 1.0;
    for (int s = 0; s < p; ++s) {
      chain *= base.dfiber_dx(theta, x);
      x = base.fiber(theta, x);
      theta = wrap_unit(theta + w);
    }
    return chain;
  }
  double dfiber_dtheta(double theta, double x) const {
    const double w = base.omega();
    double d = 0.0;
    for (int s = 0; s < p; ++s) {
      d = base.dfiber_dtheta(theta, x) + base.dfiber_dx(theta, x) * d;
      x = base.fiber(theta, x);
      theta = wrap_unit(theta + w);
    }
    return d;
  }
  double omega() const { return wrap_unit(static_cast<double>(p) * base.omega()); }
};

struct IterateResult {
  std::vector<std::pair<double, double>> samples;  // (theta, x) after the transient
  bool diverged = false;
  OrbitState final_state;
};

// Run `transient` warm-up steps, then record `keep` samples. Stops at the
// first iterate with |x| > escape_bound and reports divergence instead of
// throwing: a diverging orbit is a result, not a failure.
template <FiberMap M>
IterateResult iterate(const M& map, OrbitState s, std::int64_t transient, std::int64_t keep,
                      double escape_bound = kEscapeBound) {
  IterateResult out;
  double theta = s.theta.value();
  double x = s.x;
  const double w = map.omega();
  for (std::int64_t i = 0; i < transient; ++i) {
    x = map.fiber(theta, x);
    theta = wrap_unit(theta + w);
    if (!(std::abs(x) <= escape_bound)) {
      out.diverged = true;
      out.final_state = OrbitState{Angle(theta), x, s.step_count + i + 1};
      return out;
    }
  }
  out.samples.reserve(static_cast<std::size_t>(keep));
  for (std::int64_t i = 0; i < keep; ++i) {
    out.samples.emplace_back(theta, x);
    x = map.fiber(theta, x);
    theta = wrap_unit(theta + w);
    if (!(std::abs(x) <= escape_bound)) {
      out.diverged = true;
      out.final_state = OrbitState{Angle(theta), x, s.step_count + transient + i + 1};
      return out;
    }
  }
  out.final_state = OrbitState{Angle(theta), x, s.step_count + transient + keep};
  return out;
}

}  // namespace qpmap
