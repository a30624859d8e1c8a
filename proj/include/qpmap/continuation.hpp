#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "qpmap/angle.hpp"
#include "qpmap/common.hpp"
#include "qpmap/fourier.hpp"
#include "qpmap/map_family.hpp"

namespace qpmap {

// Two-parameter fiber family with the cross partials the bordered Newton
// system needs. Parameter 1 is alpha, parameter 2 is epsilon.
struct FlmTwoParam {
  double omega_value = kGoldenMean;
  double omega() const { return omega_value; }

  static double forcing(double theta, double eps) {
    return 1.0 + eps * std::cos(kTwoPi * theta);
  }
  double fiber(double t, double x, double a, double e) const {
    return a * x * (1.0 - x) * forcing(t, e);
  }
  double fx(double t, double x, double a, double e) const {
    return a * (1.0 - 2.0 * x) * forcing(t, e);
  }
  double fxx(double t, double /*x*/, double a, double e) const {
    return -2.0 * a * forcing(t, e);
  }
  double fp1(double t, double x, double /*a*/, double e) const {
    return x * (1.0 - x) * forcing(t, e);
  }
  double fp2(double t, double x, double a, double /*e*/) const {
    return a * x * (1.0 - x) * std::cos(kTwoPi * t);
  }
  double fxp1(double t, double x, double /*a*/, double e) const {
    return (1.0 - 2.0 * x) * forcing(t, e);
  }
  double fxp2(double t, double x, double a, double /*e*/) const {
    return a * (1.0 - 2.0 * x) * std::cos(kTwoPi * t);
  }
  FlmMap map_at(double a, double e) const { return FlmMap{FlmParams{a, e, omega_value}}; }
};

// Collocation residual of the p-step invariance equation,
//   r(theta_j) = u(theta_j + p*omega) - F_p(theta_j, u(theta_j)),
// returned as the values at the 2N+1 nodes (the discrete transform of these
// values is the coefficient-space residual; values are what Newton uses).
template <FiberMap M>
std::vector<double> invariance_residual(const FourierCurve& u, const M& map, int p,
                                        double escape_bound = kEscapeBound) {
  const std::vector<double> nodes = collocation_nodes(u.order);
  std::vector<double> r(nodes.size());
  const double w = map.omega();
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    double theta = nodes[j];
    double x = eval_curve(u, theta);
    for (int s = 0; s < p; ++s) {
      x = map.fiber(theta, x);
      theta = wrap_unit(theta + w);
      if (!(std::abs(x) <= escape_bound))
        throw DivergedOrbit("curve image escaped during residual evaluation");
    }
    r[j] = eval_curve(u, nodes[j] + p * w) - x;
  }
  return r;
}

// Per-step-normalized Lyapunov exponent of a p-invariant curve: uniform-grid
// quadrature of (1/p) ln|prod_s df/dx| along the curve and its p-1 images,
// with grid doubling until the value is stationary. A rough integrand (the
// chain product passing through zero) keeps the doubling alive, which is the
// signal that the curve is at the edge of reducibility.
template <FiberMap M>
double curve_lyapunov(const FourierCurve& u, const M& map, int p, double rich_tol = 1e-8,
                      std::size_t q0 = 4096, std::size_t q_cap = (std::size_t{1} << 17)) {
  const double w = map.omega();
  auto value_at = [&](std::size_t q_count) {
    double sum = 0.0;
    bool degenerate = false;
    for (std::size_t q = 0; q < q_count; ++q) {
      double theta = static_cast<double>(q) / static_cast<double>(q_count);
      double x = eval_curve(u, theta);
      double chain = 1.0;
      for (int s = 0; s < p; ++s) {
        chain *= map.dfiber_dx(theta, x);
        x = map.fiber(theta, x);
        theta = wrap_unit(theta + w);
      }
      if (chain == 0.0) {
        degenerate = true;
        break;
      }
      sum += std::log(std::abs(chain));
    }
    return degenerate ? -kInf : sum / (static_cast<double>(p) * static_cast<double>(q_count));
  };

  std::size_t q_count = std::max(q0, 4 * u.size());
  double prev = value_at(q_count);
  while (q_count <= q_cap) {
    q_count *= 2;
    const double cur = value_at(q_count);
    if (std::isinf(prev) && std::isinf(cur) && prev == cur) return cur;
    if (std::abs(cur - prev) <= rich_tol) return cur;
    prev = cur;
  }
  throw QuadratureNonConvergent("curve Lyapunov quadrature kept moving under grid doubling");
}

namespace detail {

// Basis matrices on the collocation grid and its p*omega shift; rebuilt only
// when the truncation order changes.
struct BasisMatrices {
  int order = -1;
  int p = 0;
  double omega = 0.0;
  Eigen::MatrixXd phi, phi_shift;
  std::vector<double> nodes;

  void build(int order_, int p_, double omega_) {
    if (order == order_ && p == p_ && omega == omega_) return;
    order = order_;
    p = p_;
    omega = omega_;
    nodes = collocation_nodes(order);
    const auto m = static_cast<Eigen::Index>(nodes.size());
    phi.resize(m, m);
    phi_shift.resize(m, m);
    std::vector<double> row(nodes.size());
    for (Eigen::Index j = 0; j < m; ++j) {
      fill_basis_row(nodes[static_cast<std::size_t>(j)], order, row.data());
      for (Eigen::Index c = 0; c < m; ++c) phi(j, c) = row[static_cast<std::size_t>(c)];
      fill_basis_row(wrap_unit(nodes[static_cast<std::size_t>(j)] + p * omega), order, row.data());
      for (Eigen::Index c = 0; c < m; ++c) phi_shift(j, c) = row[static_cast<std::size_t>(c)];
    }
  }
};

// Residual, chain derivative and free-parameter derivative of F_p at every
// collocation node. which_param selects d/dalpha (1) or d/deps (2).
struct NodeAssembly {
  Eigen::VectorXd residual;  // r_j
  Eigen::VectorXd chain;     // A_j = prod_s fx
  Eigen::VectorXd dparam;    // dF_p/dq at node j
  bool escaped = false;
};

template <typename Family>
NodeAssembly assemble_nodes(const Family& fam, const BasisMatrices& basis,
                            const Eigen::VectorXd& coeffs, double alpha, double eps,
                            int which_param, double escape_bound = kEscapeBound) {
  const auto m = static_cast<Eigen::Index>(basis.nodes.size());
  NodeAssembly out;
  out.residual.resize(m);
  out.chain.resize(m);
  out.dparam.resize(m);
  const Eigen::VectorXd u_nodes = basis.phi * coeffs;
  const Eigen::VectorXd u_shift = basis.phi_shift * coeffs;
  const double w = fam.omega();
  for (Eigen::Index j = 0; j < m; ++j) {
    double theta = basis.nodes[static_cast<std::size_t>(j)];
    double x = u_nodes(j);
    double chain = 1.0;
    double wq = 0.0;
    for (int s = 0; s < basis.p; ++s) {
      const double f_x = fam.fx(theta, x, alpha, eps);
      const double f_q = (which_param == 1) ? fam.fp1(theta, x, alpha, eps)
                                            : fam.fp2(theta, x, alpha, eps);
      wq = f_q + f_x * wq;
      chain *= f_x;
      x = fam.fiber(theta, x, alpha, eps);
      theta = wrap_unit(theta + w);
      if (!(std::abs(x) <= escape_bound)) {
        out.escaped = true;
        return out;
      }
    }
    out.residual(j) = u_shift(j) - x;
    out.chain(j) = chain;
    out.dparam(j) = wq;
  }
  return out;
}

struct LambdaEval {
  double value = 0.0;
  Eigen::VectorXd dcoeffs;
  double dparam = 0.0;
  bool degenerate = false;  // exact zero factor on the grid
  bool escaped = false;
};

// Quadrature value of the per-step Lyapunov exponent along the curve, plus
// its exact derivatives with respect to the Fourier coefficients and the
// free parameter (exact for the fixed-grid sum, which is what Newton solves).
template <typename Family>
LambdaEval lambda_eval(const Family& fam, const FourierCurve& u, double alpha, double eps, int p,
                       std::size_t q_count, int which_param, bool want_derivs,
                       double escape_bound = kEscapeBound) {
  LambdaEval out;
  const std::size_t m = u.size();
  if (want_derivs) out.dcoeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  const double w = fam.omega();
  std::vector<double> row(m);
  double sum = 0.0, dparam_sum = 0.0;
  for (std::size_t q = 0; q < q_count; ++q) {
    const double tau = static_cast<double>(q) / static_cast<double>(q_count);
    double theta = tau;
    double x = eval_curve(u, tau);
    double chain = 1.0;
    double node_w = 0.0;   // W_q = sum_s fxx_s * P_s / f_s
    double node_dq = 0.0;  // sum_s (fxq_s + fxx_s * w_s) / f_s
    double wq = 0.0;       // dx_s/dq accumulator
    double prefix = 1.0;   // P_s = prod_{r<s} f_r
    for (int s = 0; s < p; ++s) {
      const double f_x = fam.fx(theta, x, alpha, eps);
      if (f_x == 0.0) {
        out.degenerate = true;
        return out;
      }
      const double f_xx = fam.fxx(theta, x, alpha, eps);
      if (want_derivs) {
        const double f_q = (which_param == 1) ? fam.fp1(theta, x, alpha, eps)
                                              : fam.fp2(theta, x, alpha, eps);
        const double f_xq = (which_param == 1) ? fam.fxp1(theta, x, alpha, eps)
                                               : fam.fxp2(theta, x, alpha, eps);
        node_w += f_xx * prefix / f_x;
        node_dq += (f_xq + f_xx * wq) / f_x;
        wq = f_q + f_x * wq;
        prefix *= f_x;
      }
      chain *= f_x;
      x = fam.fiber(theta, x, alpha, eps);
      theta = wrap_unit(theta + w);
      if (!(std::abs(x) <= escape_bound)) {
        out.escaped = true;
        return out;
      }
    }
    sum += std::log(std::abs(chain));
    if (want_derivs) {
      fill_basis_row(tau, u.order, row.data());
      for (std::size_t c = 0; c < m; ++c)
        out.dcoeffs(static_cast<Eigen::Index>(c)) += node_w * row[c];
      dparam_sum += node_dq;
    }
  }
  const double scale = 1.0 / (static_cast<double>(p) * static_cast<double>(q_count));
  out.value = sum * scale;
  if (want_derivs) {
    out.dcoeffs *= scale;
    out.dparam = dparam_sum * scale;
  }
  return out;
}

}  // namespace detail

struct NewtonReport {
  bool converged = false;
  std::vector<double> residuals;  // sup residual after each accepted update, [0] = initial
};

// Newton in coefficient space for the invariance equation at fixed (alpha,
// eps): square system, analytic Jacobian phi_shift - diag(A) phi, dense LU.
template <typename Family>
NewtonReport newton_solve(const Family& fam, double alpha, double eps, int p, FourierCurve& u,
                          double tol = 1e-10, int max_iter = 20) {
  detail::BasisMatrices basis;
  basis.build(u.order, p, fam.omega());
  const auto m = static_cast<Eigen::Index>(u.size());
  Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(u.coeffs.data(), m);
  NewtonReport rep;

  auto residual_of = [&](const Eigen::VectorXd& cv, Eigen::VectorXd& r, Eigen::VectorXd& chain,
                         bool& bad) {
    auto nodes = detail::assemble_nodes(fam, basis, cv, alpha, eps, 1);
    bad = nodes.escaped;
    r = nodes.residual;
    chain = nodes.chain;
    return bad ? kInf : r.cwiseAbs().maxCoeff();
  };

  Eigen::VectorXd r, chain;
  bool bad = false;
  double sup = residual_of(c, r, chain, bad);
  rep.residuals.push_back(sup);
  if (bad) return rep;
  for (int it = 0; it < max_iter; ++it) {
    if (sup < tol) {
      rep.converged = true;
      break;
    }
    Eigen::MatrixXd jac = basis.phi_shift - chain.asDiagonal() * basis.phi;
    Eigen::VectorXd delta = Eigen::PartialPivLU<Eigen::MatrixXd>(jac).solve(-r);
    if (!delta.allFinite()) break;
    // Backtrack up to four halvings if the full step overshoots.
    double scale = 1.0;
    Eigen::VectorXd c_try;
    double sup_try = kInf;
    int back = 0;
    for (; back <= 4; ++back) {
      c_try = c + scale * delta;
      sup_try = residual_of(c_try, r, chain, bad);
      if (!bad && sup_try < sup) break;
      scale *= 0.5;
    }
    if (back > 4) break;
    c = c_try;
    sup = sup_try;
    rep.residuals.push_back(sup);
  }
  if (sup < tol) rep.converged = true;
  Eigen::Map<Eigen::VectorXd>(u.coeffs.data(), m) = c;
  return rep;
}

struct ContinuationPoint {
  double alpha = 0.0;
  double epsilon = 0.0;
  FourierCurve curve;
  int period = 1;
  double lyapunov = 0.0;     // fixed-grid value the solver drove to zero
  double sup_d1 = 0.0;
  double sup_d2 = 0.0;
  double min_abs_dxf = 0.0;  // over the curve and its p-1 images, dense grid
  int order = 0;
  std::vector<double> newton_residuals;
};

struct BifurcationBranch {
  int period = 1;
  std::vector<ContinuationPoint> points;
  std::string terminal_reason;  // "step_failure" | "lyapunov_nondifferentiable" | "boundary"
};

struct ZeroLyapunovOptions {
  double step0 = 1e-3;
  double step_cap = 1e-2;
  double step_min = 1e-6;  // below this the branch is declared stuck
  int max_halvings = 8;
  int grow_after = 3;
  double grow_factor = 1.3;
  double newton_tol = 1e-10;
  int newton_max_iter = 20;
  int order0 = 32;
  int order_cap = 1024;
  double tail_tol = 1e-8;
  std::size_t q0 = 4096;
  std::size_t q_cap = std::size_t{1} << 17;
  double q_inner_tol = 1e-9;
  double alpha_min = 0.5, alpha_max = 4.0;
  double eps_min = -0.995, eps_max = 0.995;
  int initial_direction = +1;  // first step moves eps this way
  std::size_t max_points = 100000;
};

namespace detail {

template <typename Family>
double min_abs_dxf_on_cycle(const Family& fam, const FourierCurve& u, double alpha, double eps,
                            int p, std::size_t grid = 4096) {
  double lo = kInf;
  const double w = fam.omega();
  for (std::size_t j = 0; j < grid; ++j) {
    double theta = static_cast<double>(j) / static_cast<double>(grid);
    double x = eval_curve(u, theta);
    for (int s = 0; s < p; ++s) {
      lo = std::min(lo, std::abs(fam.fx(theta, x, alpha, eps)));
      x = fam.fiber(theta, x, alpha, eps);
      theta = wrap_unit(theta + w);
    }
  }
  return lo;
}

// Bordered Newton for (invariance, Lyapunov = 0) in (coeffs, free param).
// q_count is fixed during one solve; the caller owns grid adaptation.
struct ExtendedSolveResult {
  bool converged = false;
  bool degenerate = false;
  std::vector<double> residuals;
  double lambda = 0.0;
};

template <typename Family>
ExtendedSolveResult newton_extended(const Family& fam, detail::BasisMatrices& basis,
                                    FourierCurve& u, double& alpha, double& eps, int which_free,
                                    int p, std::size_t q_count, double tol, int max_iter) {
  ExtendedSolveResult rep;
  const auto m = static_cast<Eigen::Index>(u.size());
  basis.build(u.order, p, fam.omega());

  auto eval_all = [&](double& sup, Eigen::VectorXd& r, Eigen::VectorXd& chain,
                      Eigen::VectorXd& dparam, detail::LambdaEval& lam) {
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(u.coeffs.data(), m);
    auto nodes = detail::assemble_nodes(fam, basis, c, alpha, eps, which_free);
    if (nodes.escaped) return false;
    lam = detail::lambda_eval(fam, u, alpha, eps, p, q_count, which_free, true);
    if (lam.escaped || lam.degenerate) return false;
    r = nodes.residual;
    chain = nodes.chain;
    dparam = nodes.dparam;
    sup = std::max(r.cwiseAbs().maxCoeff(), std::abs(lam.value));
    return true;
  };

  double sup = kInf;
  Eigen::VectorXd r, chain, dparam;
  detail::LambdaEval lam;
  if (!eval_all(sup, r, chain, dparam, lam)) {
    rep.degenerate = true;
    return rep;
  }
  rep.residuals.push_back(sup);

  for (int it = 0; it < max_iter; ++it) {
    if (sup < tol) break;
    Eigen::MatrixXd jac(m + 1, m + 1);
    jac.topLeftCorner(m, m) = basis.phi_shift - chain.asDiagonal() * basis.phi;
    jac.topRightCorner(m, 1) = -dparam;
    jac.bottomLeftCorner(1, m) = lam.dcoeffs.transpose();
    jac(m, m) = lam.dparam;
    Eigen::VectorXd rhs(m + 1);
    rhs.head(m) = -r;
    rhs(m) = -lam.value;
    Eigen::VectorXd delta = Eigen::PartialPivLU<Eigen::MatrixXd>(jac).solve(rhs);
    if (!delta.allFinite()) return rep;

    const Eigen::VectorXd c_old = Eigen::Map<const Eigen::VectorXd>(u.coeffs.data(), m);
    const double free_old = (which_free == 1) ? alpha : eps;
    double scale = 1.0;
    int back = 0;
    for (; back <= 4; ++back) {
      Eigen::Map<Eigen::VectorXd>(u.coeffs.data(), m) = c_old + scale * delta.head(m);
      if (which_free == 1)
        alpha = free_old + scale * delta(m);
      else
        eps = free_old + scale * delta(m);
      double sup_try = kInf;
      if (eval_all(sup_try, r, chain, dparam, lam) && sup_try < sup) {
        sup = sup_try;
        break;
      }
      scale *= 0.5;
    }
    if (back > 4) {
      Eigen::Map<Eigen::VectorXd>(u.coeffs.data(), m) = c_old;
      if (which_free == 1)
        alpha = free_old;
      else
        eps = free_old;
      return rep;
    }
    rep.residuals.push_back(sup);
  }
  rep.lambda = lam.value;
  rep.converged = sup < tol;
  return rep;
}

}  // namespace detail

// Continue the zero-Lyapunov locus of a p-invariant curve through (alpha,
// eps) space. Each step fixes whichever parameter the branch currently moves
// fastest in (secant slope of the last two points) and solves the bordered
// system for the curve, the other parameter included as an unknown. Steps
// halve on failure and regrow after a run of successes; the branch ends when
// the minimum step fails (step_failure), the Lyapunov quadrature stops
// converging at the grid cap (lyapunov_nondifferentiable), or the next
// target leaves the parameter box (boundary).
template <typename Family>
BifurcationBranch continue_zero_lyapunov(const Family& fam, double alpha0, double eps0, int p,
                                         const FourierCurve& seed,
                                         const ZeroLyapunovOptions& opt = {}) {
  BifurcationBranch branch;
  branch.period = p;

  const FourierCurve start = resize_curve(seed, std::max(seed.order, opt.order0));
  std::size_t q_count = std::max(opt.q0, 4 * start.size());
  detail::BasisMatrices basis;

  auto record_point = [&](const FourierCurve& u, double a, double e, double lambda,
                          std::vector<double> hist) {
    ContinuationPoint pt;
    pt.alpha = a;
    pt.epsilon = e;
    pt.curve = u;
    pt.period = p;
    pt.lyapunov = lambda;
    const CurveNorms n = curve_norms(u);
    pt.sup_d1 = n.sup_d1;
    pt.sup_d2 = n.sup_d2;
    pt.min_abs_dxf = detail::min_abs_dxf_on_cycle(fam, u, a, e, p);
    pt.order = u.order;
    pt.newton_residuals = std::move(hist);
    branch.points.push_back(std::move(pt));
  };

  record_point(start, alpha0, eps0, 0.0, {});

  double step = opt.step0;
  int consec = 0;
  int halvings = 0;

  while (branch.points.size() < opt.max_points) {
    const ContinuationPoint& last = branch.points.back();
    const ContinuationPoint* prev =
        branch.points.size() >= 2 ? &branch.points[branch.points.size() - 2] : nullptr;

    // Axis choice: parameterize by the faster-moving coordinate.
    int fixed_param;  // 1 = alpha fixed, 2 = eps fixed
    double dir;
    if (prev) {
      const double da = last.alpha - prev->alpha;
      const double de = last.epsilon - prev->epsilon;
      fixed_param = (std::abs(de) >= std::abs(da)) ? 2 : 1;
      dir = (fixed_param == 2) ? (de >= 0 ? 1.0 : -1.0) : (da >= 0 ? 1.0 : -1.0);
    } else {
      fixed_param = 2;
      dir = opt.initial_direction;
    }
    const int which_free = (fixed_param == 1) ? 2 : 1;

    double target = (fixed_param == 2 ? last.epsilon : last.alpha) + dir * step;
    const double lo = (fixed_param == 2) ? opt.eps_min : opt.alpha_min;
    const double hi = (fixed_param == 2) ? opt.eps_max : opt.alpha_max;
    if (target < lo || target > hi) {
      branch.terminal_reason = "boundary";
      break;
    }

    // Predictor: linear extrapolation in the fixed coordinate.
    FourierCurve trial = last.curve;
    double a_try = last.alpha, e_try = last.epsilon;
    if (fixed_param == 2)
      e_try = target;
    else
      a_try = target;
    if (prev) {
      const double last_fixed = (fixed_param == 2) ? last.epsilon : last.alpha;
      const double prev_fixed = (fixed_param == 2) ? prev->epsilon : prev->alpha;
      if (std::abs(last_fixed - prev_fixed) > 1e-15) {
        const double t = (target - last_fixed) / (last_fixed - prev_fixed);
        FourierCurve prev_curve = resize_curve(prev->curve, last.curve.order);
        for (std::size_t i = 0; i < trial.coeffs.size(); ++i)
          trial.coeffs[i] += t * (trial.coeffs[i] - prev_curve.coeffs[i]);
        if (fixed_param == 2)
          a_try += t * (last.alpha - prev->alpha);
        else
          e_try += t * (last.epsilon - prev->epsilon);
      }
    }

    // Adapt the quadrature grid at the predictor before solving.
    bool quad_ok = true;
    {
      double prev_l = detail::lambda_eval(fam, trial, a_try, e_try, p, q_count / 2, which_free,
                                          false)
                          .value;
      while (true) {
        const double cur_l =
            detail::lambda_eval(fam, trial, a_try, e_try, p, q_count, which_free, false).value;
        if (std::abs(cur_l - prev_l) <= opt.q_inner_tol || !std::isfinite(cur_l)) break;
        if (q_count >= opt.q_cap) {
          quad_ok = std::abs(cur_l - prev_l) <= 1e-8;
          break;
        }
        prev_l = cur_l;
        q_count *= 2;
      }
    }

    bool accepted = false;
    if (quad_ok) {
      auto rep = detail::newton_extended(fam, basis, trial, a_try, e_try, which_free, p, q_count,
                                         opt.newton_tol, opt.newton_max_iter);
      if (rep.converged) {
        // Resolution gate: grow the order until the top harmonic is noise.
        bool resolved = tail_fraction(trial) < opt.tail_tol;
        while (!resolved && trial.order < opt.order_cap) {
          trial = resize_curve(trial, std::min(2 * trial.order, opt.order_cap));
          rep = detail::newton_extended(fam, basis, trial, a_try, e_try, which_free, p, q_count,
                                        opt.newton_tol, opt.newton_max_iter);
          if (!rep.converged) break;
          resolved = tail_fraction(trial) < opt.tail_tol;
        }
        if (rep.converged && resolved) {
          record_point(trial, a_try, e_try, rep.lambda, std::move(rep.residuals));
          accepted = true;
        }
      }
    }

    if (accepted) {
      halvings = 0;
      if (++consec >= opt.grow_after) step = std::min(step * opt.grow_factor, opt.step_cap);
      continue;
    }
    consec = 0;
    if (++halvings > opt.max_halvings || step * 0.5 < opt.step_min) {
      branch.terminal_reason = quad_ok ? "step_failure" : "lyapunov_nondifferentiable";
      break;
    }
    step *= 0.5;
  }
  if (branch.terminal_reason.empty()) branch.terminal_reason = "step_failure";
  return branch;
}

// Dense-grid derivative sup-norms for every accepted point of a branch.
struct BranchNormRow {
  double alpha, epsilon, sup_d1, sup_d2;
};

inline std::vector<BranchNormRow> branch_curve_norms(const BifurcationBranch& branch,
                                                     std::size_t grid = 4096) {
  std::vector<BranchNormRow> rows;
  rows.reserve(branch.points.size());
  for (const ContinuationPoint& pt : branch.points) {
    const CurveNorms n = curve_norms(pt.curve, grid);
    rows.push_back(BranchNormRow{pt.alpha, pt.epsilon, n.sup_d1, n.sup_d2});
  }
  return rows;
}

// Plain parameter continuation of an invariant curve in eps at fixed alpha
// (no Lyapunov constraint), tracking how far the curve stays above the
// critical line x = 1/2. Used to chase the loss of reducibility of unstable
// period-one curves: the gap shrinks to zero as the obstruction forms and
// Newton dies once the curve stops being a graph the truncation can resolve.
struct FixedAlphaPoint {
  double epsilon = 0.0;
  double gap_below_half = 0.0;  // min over theta of u(theta) - 1/2
  double min_abs_dxf = 0.0;
  double sup_d1 = 0.0, sup_d2 = 0.0;
  int order = 0;
};

struct FixedAlphaContinuation {
  double alpha = 0.0;
  std::vector<FixedAlphaPoint> points;
  std::string terminal_reason;
  FourierCurve last_curve;
};

struct FixedAlphaOptions {
  double step0 = 1e-3;
  double step_cap = 5e-3;
  double step_min = 1e-7;
  int max_halvings = 8;
  int grow_after = 3;
  double grow_factor = 1.3;
  double newton_tol = 1e-10;
  int newton_max_iter = 20;
  int order0 = 32;
  int order_cap = 2048;
  double tail_tol = 1e-8;
  double eps_max = 0.995;
  double stop_gap = -kInf;  // stop once the clearance drops below this
  std::size_t gap_grid = 8192;
  std::size_t max_points = 4000;
};

template <typename Family>
FixedAlphaContinuation continue_fixed_alpha(const Family& fam, double alpha, double x0,
                                            const FixedAlphaOptions& opt = {}) {
  FixedAlphaContinuation out;
  out.alpha = alpha;

  auto gap_of = [&](const FourierCurve& u) {
    double lo = kInf;
    for (std::size_t j = 0; j < opt.gap_grid; ++j)
      lo = std::min(lo, eval_curve(u, static_cast<double>(j) / static_cast<double>(opt.gap_grid)));
    return lo - 0.5;
  };

  auto record = [&](const FourierCurve& u, double e) {
    FixedAlphaPoint pt;
    pt.epsilon = e;
    pt.gap_below_half = gap_of(u);
    pt.min_abs_dxf = detail::min_abs_dxf_on_cycle(fam, u, alpha, e, 1);
    const CurveNorms n = curve_norms(u);
    pt.sup_d1 = n.sup_d1;
    pt.sup_d2 = n.sup_d2;
    pt.order = u.order;
    out.points.push_back(pt);
    out.last_curve = u;
  };

  FourierCurve cur = FourierCurve::constant(x0, opt.order0);
  FourierCurve prev_curve = cur;
  double eps = 0.0, eps_prev = 0.0;
  record(cur, eps);

  double step = opt.step0;
  int consec = 0, halvings = 0;
  while (out.points.size() < opt.max_points) {
    const double target = eps + step;
    if (target > opt.eps_max) {
      out.terminal_reason = "boundary";
      break;
    }
    FourierCurve trial = cur;
    if (eps > eps_prev) {  // secant predictor
      const double t = (target - eps) / (eps - eps_prev);
      FourierCurve pc = resize_curve(prev_curve, cur.order);
      for (std::size_t i = 0; i < trial.coeffs.size(); ++i)
        trial.coeffs[i] += t * (trial.coeffs[i] - pc.coeffs[i]);
    }
    auto rep =
        newton_solve(fam, alpha, target, 1, trial, opt.newton_tol, opt.newton_max_iter);
    bool accepted = rep.converged;
    if (accepted) {
      bool resolved = tail_fraction(trial) < opt.tail_tol;
      while (!resolved && trial.order < opt.order_cap) {
        trial = resize_curve(trial, std::min(2 * trial.order, opt.order_cap));
        rep = newton_solve(fam, alpha, target, 1, trial, opt.newton_tol, opt.newton_max_iter);
        if (!rep.converged) {
          accepted = false;
          break;
        }
        resolved = tail_fraction(trial) < opt.tail_tol;
      }
      accepted = accepted && resolved;
    }
    if (accepted) {
      prev_curve = cur;
      eps_prev = eps;
      cur = trial;
      eps = target;
      record(cur, eps);
      if (out.points.back().gap_below_half < opt.stop_gap) {
        out.terminal_reason = "gap_crossed";
        break;
      }
      halvings = 0;
      if (++consec >= opt.grow_after) step = std::min(step * opt.grow_factor, opt.step_cap);
      continue;
    }
    consec = 0;
    if (++halvings > opt.max_halvings || step * 0.5 < opt.step_min) {
      out.terminal_reason = "step_failure";
      break;
    }
    step *= 0.5;
  }
  if (out.terminal_reason.empty()) out.terminal_reason = "step_failure";
  return out;
}

// Eps where the clearance above x = 1/2 closes. If the run crossed zero,
// interpolate the bracketing pair; otherwise extrapolate the closing secant.
// Falls back to the last eps when the tail gives no decrease to work with.
inline double extrapolate_gap_zero(const FixedAlphaContinuation& run) {
  if (run.points.size() < 2) return run.points.empty() ? 0.0 : run.points.back().epsilon;
  for (std::size_t i = 0; i + 1 < run.points.size(); ++i) {
    const FixedAlphaPoint& a = run.points[i];
    const FixedAlphaPoint& b = run.points[i + 1];
    if (a.gap_below_half > 0.0 && b.gap_below_half <= 0.0)
      return a.epsilon + a.gap_below_half * (b.epsilon - a.epsilon) /
                             (a.gap_below_half - b.gap_below_half);
  }
  const FixedAlphaPoint& b = run.points.back();
  const FixedAlphaPoint& a = run.points[run.points.size() - 2];
  if (!(a.gap_below_half > b.gap_below_half)) return b.epsilon;
  return b.epsilon +
         b.gap_below_half * (b.epsilon - a.epsilon) / (a.gap_below_half - b.gap_below_half);
}

}  // namespace qpmap
