#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qpmap/common.hpp"
#include "qpmap/diagnostics.hpp"
#include "qpmap/map_family.hpp"

namespace qpmap {

// Mean of ln|tau + cos(2 pi theta)| over one period. The integrand has the
// closed form -ln 2 inside the unit interval of tau and picks up the
// ln(|tau| + sqrt(tau^2 - 1)) correction outside it.
inline double cos_log_integral(double tau) {
  const double a = std::abs(tau);
  if (a <= 1.0) return -std::log(2.0);
  return -std::log(2.0) + std::log(a + std::sqrt(tau * tau - 1.0));
}

// Vertical Lyapunov exponent of the invariant line x = 0 of the cubic model
// map, where the derivative cocycle is -(mu + lambda cos(2 pi theta)).
inline double trivial_lyapunov(double mu, double lambda) {
  const double am = std::abs(mu), al = std::abs(lambda);
  if (am == 0.0 && al == 0.0) return -kInf;
  if (al <= am) return std::log(0.5 * (am + std::sqrt(mu * mu - lambda * lambda)));
  return std::log(0.5 * al);
}

// Constant to which the cocycle -(mu + lambda cos(2 pi theta)) reduces by a
// change of variables along the rotation. The reduction exists only while
// the cocycle never vanishes, i.e. strictly inside |lambda| < |mu|.
inline std::optional<double> reduced_multiplier(double mu, double lambda) {
  const double am = std::abs(mu), al = std::abs(lambda);
  if (al >= am) return std::nullopt;
  const double root = std::sqrt(mu * mu - lambda * lambda);
  return -0.5 * (mu + (mu > 0 ? root : -root));
}

// |reduced multiplier| = 1 exactly on |mu| = 1 + lambda^2/4; below it the
// line x = 0 attracts, above it repels.
inline double stability_boundary_mu(double lambda) { return 1.0 + 0.25 * lambda * lambda; }

// Vertical distance from the stability boundary to the reducibility edge
// mu = |lambda|; algebraically equal to (|lambda| - 2)^2 / 4, so the two
// curves meet tangentially at |lambda| = 2.
inline double tangency_identity_gap(double lambda) {
  const double al = std::abs(lambda);
  const double lhs = stability_boundary_mu(lambda) - al;
  const double rhs = 0.25 * (al - 2.0) * (al - 2.0);
  return lhs - rhs;
}

// Parameter bands with proven asymptotic behavior once the line x = 0 turns
// repelling: a symmetric pair of curves swapped by the map for mu > 0, a
// pair of separately invariant curves for mu < 0.
enum class ModelRegion { None, PeriodTwoBand, TwoCurvesBand };

inline ModelRegion existence_band(double mu, double lambda) {
  const double al = std::abs(lambda);
  if (al > 0.0 && al < mu && 1.0 + 0.5 * lambda * lambda < mu && mu < 1.5 - 2.0 * al)
    return ModelRegion::PeriodTwoBand;
  if (al > 0.0 && mu < -al && -1.5 + 2.0 * al < mu && mu < -1.0 + 0.5 * lambda * lambda)
    return ModelRegion::TwoCurvesBand;
  return ModelRegion::None;
}

inline const char* to_string(ModelRegion r) {
  switch (r) {
    case ModelRegion::PeriodTwoBand: return "period_two_band";
    case ModelRegion::TwoCurvesBand: return "two_curves_band";
    default: return "none";
  }
}

// One cell of the nontrivial-attractor survey: iterate from x = 0.3 (the
// map is odd, so the mirrored seed gives the mirrored orbit bit for bit),
// estimate the Lyapunov exponent, detect the period and check reducibility
// of the attracting object, exactly as the forced-logistic survey does.
struct ModelCell {
  double mu = 0.0, lambda = 0.0;
  ClassLabel label = ClassLabel::Diverged;
  double lyapunov = 0.0;
  int period = 0;
  double min_abs_dxf = 0.0;
  double multiplier = 0.0;  // reduced multiplier of x = 0, nan when undefined
};

struct BoundaryPolyline {
  std::string label;
  std::vector<std::array<double, 2>> points;  // (lambda, mu)
};

// Reference curves for plots of the model parameter plane.
inline std::vector<BoundaryPolyline> model_boundary_polylines(double lambda_lo, double lambda_hi,
                                                              std::size_t n = 512) {
  std::vector<BoundaryPolyline> out;
  auto sample = [&](const char* label, auto f) {
    BoundaryPolyline line;
    line.label = label;
    line.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double l = lambda_lo + (lambda_hi - lambda_lo) * static_cast<double>(i) /
                                       static_cast<double>(n - 1);
      line.points.push_back({l, f(l)});
    }
    out.push_back(std::move(line));
  };
  sample("stability_boundary_upper", [](double l) { return stability_boundary_mu(l); });
  sample("stability_boundary_lower", [](double l) { return -stability_boundary_mu(l); });
  sample("reducibility_edge_upper", [](double l) { return std::abs(l); });
  sample("reducibility_edge_lower", [](double l) { return -std::abs(l); });
  sample("period_two_band_upper", [](double l) { return 1.5 - 2.0 * std::abs(l); });
  sample("period_two_band_lower", [](double l) { return 1.0 + 0.5 * l * l; });
  sample("two_curves_band_upper", [](double l) { return -1.0 + 0.5 * l * l; });
  sample("two_curves_band_lower", [](double l) { return -1.5 + 2.0 * std::abs(l); });
  return out;
}

}  // namespace qpmap
