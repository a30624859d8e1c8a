#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "qpmap/common.hpp"
#include "qpmap/continuation.hpp"
#include "qpmap/critical_sets.hpp"
#include "qpmap/diagnostics.hpp"
#include "qpmap/map_family.hpp"
#include "qpmap/model_analysis.hpp"

namespace qpmap {

// Shortest decimal form that parses back to the same double; this is what
// keeps rendered configs and CSV output byte-stable across runs.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_size(std::size_t v) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Flat key=value configuration with [section] headers. parse(render(c))
// reproduces c exactly, doubles included.
struct ScanConfig {
  // [grid]
  std::string map_kind = "flm";  // flm | model
  double alpha_min = 2.6, alpha_max = 3.6;
  std::size_t alpha_steps = 200;
  double eps_min = 0.0, eps_max = 0.2;
  std::size_t eps_steps = 200;
  // [orbit]
  double omega = kGoldenMean;
  double theta0 = 0.0;
  double x0 = 0.33;
  std::size_t transient = 1000;
  std::size_t n_max = 200000;
  // [tolerances]
  double lyapunov_tol = 1e-3;
  double zero_tol = 1e-3;
  double mesh_tol = 1e-6;
  double reducibility_threshold = 1e-4;
  double period_window = 1e-3;
  double period_x_gap = 1e-4;
  // [run]
  std::size_t threads = 1;
  std::size_t mesh_size = 1024;
  std::size_t sna_base = 10000;
  std::size_t sna_levels = 3;
  std::size_t sna_seeds = 2;
  double sna_factor = 2.0;
  std::string out_dir = "out";

  double alpha_at(std::size_t i) const {
    return alpha_min + (alpha_max - alpha_min) * static_cast<double>(i) /
                           static_cast<double>(alpha_steps - 1);
  }
  double eps_at(std::size_t j) const {
    return eps_min +
           (eps_max - eps_min) * static_cast<double>(j) / static_cast<double>(eps_steps - 1);
  }
  std::size_t cell_count() const { return alpha_steps * eps_steps; }
};

inline std::string render_config(const ScanConfig& c) {
  std::string out;
  auto kv = [&](const char* k, const std::string& v) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  };
  out += "[grid]\n";
  kv("map", c.map_kind);
  kv("alpha_min", format_double(c.alpha_min));
  kv("alpha_max", format_double(c.alpha_max));
  kv("alpha_steps", format_size(c.alpha_steps));
  kv("eps_min", format_double(c.eps_min));
  kv("eps_max", format_double(c.eps_max));
  kv("eps_steps", format_size(c.eps_steps));
  out += "[orbit]\n";
  kv("omega", format_double(c.omega));
  kv("theta0", format_double(c.theta0));
  kv("x0", format_double(c.x0));
  kv("transient", format_size(c.transient));
  kv("n_max", format_size(c.n_max));
  out += "[tolerances]\n";
  kv("lyapunov_tol", format_double(c.lyapunov_tol));
  kv("zero_tol", format_double(c.zero_tol));
  kv("mesh_tol", format_double(c.mesh_tol));
  kv("reducibility_threshold", format_double(c.reducibility_threshold));
  kv("period_window", format_double(c.period_window));
  kv("period_x_gap", format_double(c.period_x_gap));
  out += "[run]\n";
  kv("threads", format_size(c.threads));
  kv("mesh_size", format_size(c.mesh_size));
  kv("sna_base", format_size(c.sna_base));
  kv("sna_levels", format_size(c.sna_levels));
  kv("sna_seeds", format_size(c.sna_seeds));
  kv("sna_factor", format_double(c.sna_factor));
  kv("out_dir", c.out_dir);
  return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline double parse_double_strict(std::string_view v, std::string_view key) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw std::invalid_argument("config: bad number for " + std::string(key));
  return out;
}

inline std::size_t parse_size_strict(std::string_view v, std::string_view key) {
  std::size_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw std::invalid_argument("config: bad integer for " + std::string(key));
  return out;
}

}  // namespace detail

inline void validate_config(const ScanConfig& c) {
  auto fail = [](const char* msg) { throw std::invalid_argument(std::string("config: ") + msg); };
  if (c.map_kind != "flm" && c.map_kind != "model") fail("map must be flm or model");
  if (!(std::isfinite(c.alpha_min) && std::isfinite(c.alpha_max) && std::isfinite(c.eps_min) &&
        std::isfinite(c.eps_max)))
    fail("grid ranges must be finite");
  if (c.alpha_steps < 2 || c.eps_steps < 2) fail("grid needs at least 2 steps per axis");
  if (!(c.alpha_max > c.alpha_min) || !(c.eps_max > c.eps_min))
    fail("grid ranges must have positive extent");
  if (!(c.omega > 0.0 && c.omega < 1.0)) fail("omega must lie strictly inside (0,1)");
  if (!(c.lyapunov_tol > 0 && c.zero_tol > 0 && c.mesh_tol > 0 &&
        c.reducibility_threshold > 0 && c.period_window > 0 && c.period_x_gap > 0))
    fail("tolerances must be positive");
  if (c.threads < 1) fail("threads must be >= 1");
  if (c.n_max < 1000) fail("n_max must be >= 1000");
  if (c.mesh_size < 16) fail("mesh_size must be >= 16");
  if (c.sna_levels < 1 || c.sna_seeds < 1) fail("sna settings must be >= 1");
  if (!(c.sna_factor > 1.0)) fail("sna_factor must exceed 1");
  if (c.out_dir.empty()) fail("out_dir must not be empty");
}

inline ScanConfig parse_config(std::string_view text) {
  ScanConfig c;
  std::string section;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("config: malformed section header");
      section = std::string(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config: expected key=value, got '" + std::string(line) + "'");
    const std::string_view key = detail::trim(line.substr(0, eq));
    const std::string_view val = detail::trim(line.substr(eq + 1));
    const std::string full = section + "." + std::string(key);
    if (full == "grid.map")
      c.map_kind = std::string(val);
    else if (full == "grid.alpha_min")
      c.alpha_min = detail::parse_double_strict(val, key);
    else if (full == "grid.alpha_max")
      c.alpha_max = detail::parse_double_strict(val, key);
    else if (full == "grid.alpha_steps")
      c.alpha_steps = detail::parse_size_strict(val, key);
    else if (full == "grid.eps_min")
      c.eps_min = detail::parse_double_strict(val, key);
    else if (full == "grid.eps_max")
      c.eps_max = detail::parse_double_strict(val, key);
    else if (full == "grid.eps_steps")
      c.eps_steps = detail::parse_size_strict(val, key);
    else if (full == "orbit.omega")
      c.omega = detail::parse_double_strict(val, key);
    else if (full == "orbit.theta0")
      c.theta0 = detail::parse_double_strict(val, key);
    else if (full == "orbit.x0")
      c.x0 = detail::parse_double_strict(val, key);
    else if (full == "orbit.transient")
      c.transient = detail::parse_size_strict(val, key);
    else if (full == "orbit.n_max")
      c.n_max = detail::parse_size_strict(val, key);
    else if (full == "tolerances.lyapunov_tol")
      c.lyapunov_tol = detail::parse_double_strict(val, key);
    else if (full == "tolerances.zero_tol")
      c.zero_tol = detail::parse_double_strict(val, key);
    else if (full == "tolerances.mesh_tol")
      c.mesh_tol = detail::parse_double_strict(val, key);
    else if (full == "tolerances.reducibility_threshold")
      c.reducibility_threshold = detail::parse_double_strict(val, key);
    else if (full == "tolerances.period_window")
      c.period_window = detail::parse_double_strict(val, key);
    else if (full == "tolerances.period_x_gap")
      c.period_x_gap = detail::parse_double_strict(val, key);
    else if (full == "run.threads")
      c.threads = detail::parse_size_strict(val, key);
    else if (full == "run.mesh_size")
      c.mesh_size = detail::parse_size_strict(val, key);
    else if (full == "run.sna_base")
      c.sna_base = detail::parse_size_strict(val, key);
    else if (full == "run.sna_levels")
      c.sna_levels = detail::parse_size_strict(val, key);
    else if (full == "run.sna_seeds")
      c.sna_seeds = detail::parse_size_strict(val, key);
    else if (full == "run.sna_factor")
      c.sna_factor = detail::parse_double_strict(val, key);
    else if (full == "run.out_dir")
      c.out_dir = std::string(val);
    else
      throw std::invalid_argument("config: unknown key '" + full + "'");
  }
  validate_config(c);
  return c;
}

inline ScanConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

// Named parameter windows for the survey figures. Extents are round numbers
// chosen to frame the relevant structures, not calibrated boundaries.
inline void apply_window_preset(ScanConfig& c, const std::string& name) {
  if (name == "main") {
    c.alpha_min = 2.6;
    c.alpha_max = 3.6;
    c.eps_min = 0.0;
    c.eps_max = 0.2;
  } else if (name == "sna") {
    c.alpha_min = 3.2;
    c.alpha_max = 3.9;
    c.eps_min = 0.0;
    c.eps_max = 0.3;
  } else if (name == "constraints") {
    c.alpha_min = 2.05;
    c.alpha_max = 3.8;
    c.eps_min = 0.0;
    c.eps_max = 0.45;
  } else if (name == "model") {
    c.alpha_min = 0.5;
    c.alpha_max = 2.5;
    c.eps_min = 0.0;
    c.eps_max = 2.5;
  } else {
    throw std::invalid_argument("unknown window preset '" + name + "'");
  }
}

inline std::uint64_t fnv1a_hash(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string config_hash_hex(const ScanConfig& c) {
  const std::uint64_t h = fnv1a_hash(render_config(c));
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) buf[i] = digits[(h >> (60 - 4 * i)) & 0xf];
  buf[16] = '\0';
  return std::string(buf);
}

// Run fn(i) for i in [0, n) on the requested number of worker threads; a
// budget of one runs inline. Work items are claimed from a shared counter
// and each writes only its own slot, so output is independent of the
// thread count.
template <typename Fn>
void parallel_for_index(std::size_t n, std::size_t threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const std::size_t spawn = std::min(threads, n);
  pool.reserve(spawn);
  for (std::size_t t = 0; t < spawn; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
}

// One cell of the parameter survey.
struct GridCell {
  double alpha = 0.0, eps = 0.0;
  ClassLabel label = ClassLabel::Diverged;
  double lyapunov = 0.0;
  int period = 0;
  double min_abs_dxf = 0.0;
  bool error = false;
  std::string error_msg;
};

namespace detail {

// Mesh depth that contracts initial separation below tol at rate lambda,
// with headroom; clamped to keep hopeless cells cheap.
inline std::size_t informed_depth(double lambda_per_step, double tol) {
  const double rate = std::max(std::abs(lambda_per_step), 1e-3);
  const double est = 1.5 * std::log(1.0 / tol) / rate;
  return static_cast<std::size_t>(std::clamp(est, 200.0, 4096.0));
}

}  // namespace detail

// Classify one parameter cell: divergence, then the Lyapunov sign, then
// period and reducibility for contracting orbits. min |df/dx| is taken over
// both orbit samples and, when the orbit contracts, a converged invariant
// mesh of the period-composed map.
template <FiberMap M>
GridCell classify_cell(const M& map, double axis1, double axis2, const ScanConfig& cfg) {
  GridCell cell;
  cell.alpha = axis1;
  cell.eps = axis2;
  OrbitState seed{Angle(cfg.theta0), cfg.x0};
  try {
    LyapunovEstimate lam;
    try {
      lam = lyapunov_limit(map, seed, cfg.lyapunov_tol, static_cast<std::int64_t>(cfg.n_max),
                           static_cast<std::int64_t>(cfg.transient));
    } catch (const DivergedOrbit&) {
      cell.label = ClassLabel::Diverged;
      cell.lyapunov = kNan;
      cell.min_abs_dxf = kNan;
      return cell;
    }
    cell.lyapunov = lam.value;

    // Orbit-sample floor of |df/dx| over the attractor.
    OrbitState s2 = seed;
    const IterateResult orbit = iterate(map, s2, static_cast<std::int64_t>(cfg.transient), 4096);
    double min_abs = kInf;
    for (const auto& [th, xx] : orbit.samples)
      min_abs = std::min(min_abs, std::abs(map.dfiber_dx(th, xx)));

    OrbitDiagnostics diag;
    diag.diverged = false;
    diag.lyapunov = lam;

    if (lam.value > cfg.zero_tol) {
      diag.period = 0;
      cell.label = classify(diag, cfg.zero_tol);
      cell.min_abs_dxf = min_abs;
      return cell;
    }

    int period = 0;
    try {
      // Start from the settled end of the sampling pass so the return
      // samples sit on the attractor, not on the approach to it.
      period = detect_period(map, orbit.final_state, cfg.period_window, 32, cfg.period_x_gap);
    } catch (const InsufficientSamples&) {
      period = 0;
    }
    diag.period = period;

    if (std::abs(lam.value) <= cfg.zero_tol) {
      cell.label = classify(diag, cfg.zero_tol);
      cell.period = period;
      cell.min_abs_dxf = min_abs;
      return cell;
    }

    // Contracting with a detected cycle of curves: refine with an invariant
    // mesh of map^p and take the floor of the base-map factors along the
    // whole cycle. Without a detected period the attractor may not be a
    // curve at all, so the backward mesh cannot converge and the orbit
    // floor is the verdict.
    bool mesh_ok = false;
    bool sign_flip = false;
    if (period >= 1) {
      try {
        const int p = period;
        const PowerMap<M> mp(map, p);
        const auto depth0 =
            static_cast<std::int64_t>(detail::informed_depth(lam.value * p, cfg.mesh_tol));
        const double x_on = orbit.samples.empty() ? cfg.x0 : orbit.samples.front().second;
        const CurveMesh mesh = converged_curve_mesh(mp, cfg.mesh_size, x_on, cfg.mesh_tol,
                                                    depth0, 2 * depth0);
        // Chain derivative per node; a sign flip between neighbouring nodes
        // certifies a zero of some factor even when the sampled minimum
        // stays above the threshold (transversal crossings dip narrowly).
        double chain_first = 0.0, chain_prev = 0.0;
        for (std::size_t j = 0; j < mesh.thetas.size(); ++j) {
          double th = mesh.thetas[j], xx = mesh.xs[j];
          double chain = 1.0;
          for (int st = 0; st < p; ++st) {
            const double a = map.dfiber_dx(th, xx);
            min_abs = std::min(min_abs, std::abs(a));
            chain *= a;
            xx = map.fiber(th, xx);
            th = wrap_unit(th + map.omega());
          }
          if (j == 0)
            chain_first = chain;
          else if (chain * chain_prev < 0.0)
            sign_flip = true;
          chain_prev = chain;
        }
        if (!mesh.thetas.empty() && chain_prev * chain_first < 0.0) sign_flip = true;
        mesh_ok = true;
      } catch (const std::exception&) {
        mesh_ok = false;  // orbit floor still stands
      }
    }
    diag.mesh_converged = mesh_ok;
    diag.min_abs_dxf = min_abs;
    diag.reducible = min_abs > cfg.reducibility_threshold && !sign_flip;
    cell.label = classify(diag, cfg.zero_tol);
    cell.period = period;
    cell.min_abs_dxf = min_abs;
    return cell;
  } catch (const std::exception& e) {
    cell.error = true;
    cell.error_msg = e.what();
    return cell;
  }
}

struct GridResult {
  ScanConfig config;
  std::vector<GridCell> cells;  // row-major, alpha outer, eps inner
  std::size_t error_count = 0;
};

inline GridResult run_scan(const ScanConfig& cfg) {
  validate_config(cfg);
  GridResult res;
  res.config = cfg;
  res.cells.resize(cfg.cell_count());
  parallel_for_index(res.cells.size(), cfg.threads, [&](std::size_t id) {
    const std::size_t i = id / cfg.eps_steps;
    const std::size_t j = id % cfg.eps_steps;
    const double a = cfg.alpha_at(i), e = cfg.eps_at(j);
    res.cells[id] = classify_cell(FlmMap{FlmParams{a, e, cfg.omega}}, a, e, cfg);
  });
  for (const GridCell& c : res.cells) res.error_count += c.error ? 1 : 0;
  return res;
}

// Model-map variant over a (mu, lambda) grid; reuses the grid axes of the
// config with alpha read as mu and eps read as lambda.
struct ModelGridResult {
  ScanConfig config;
  std::vector<GridCell> cells;
  std::vector<double> multipliers;  // reduced multiplier of x = 0, nan when undefined
  std::size_t error_count = 0;
};

inline ModelGridResult run_model_scan(const ScanConfig& cfg) {
  validate_config(cfg);
  ModelGridResult res;
  res.config = cfg;
  res.cells.resize(cfg.cell_count());
  res.multipliers.assign(cfg.cell_count(), kNan);
  parallel_for_index(res.cells.size(), cfg.threads, [&](std::size_t id) {
    const std::size_t i = id / cfg.eps_steps;
    const std::size_t j = id % cfg.eps_steps;
    const double mu = cfg.alpha_at(i), lam = cfg.eps_at(j);
    ScanConfig local = cfg;
    local.x0 = 0.3;  // off the invariant line, inside the cubic well
    res.cells[id] = classify_cell(ModelMap{ModelParams{mu, lam, cfg.omega}}, mu, lam, local);
    if (const auto b = reduced_multiplier(mu, lam)) res.multipliers[id] = *b;
  });
  for (const GridCell& c : res.cells) res.error_count += c.error ? 1 : 0;
  return res;
}

// Phase-sensitivity survey: growth exponents gamma of d(x_n)/d(theta_0)
// at geometric checkpoint budgets, plus the doubling-test candidate flag
// per budget level.
struct SnaCell {
  double alpha = 0.0, eps = 0.0;
  ClassLabel label = ClassLabel::Diverged;
  double lyapunov = 0.0;
  int period = 0;
  double min_abs_dxf = 0.0;
  std::vector<double> gamma;    // one per level
  std::vector<int> candidate;   // one per level
  bool error = false;
  std::string error_msg;
};

struct SnaResult {
  ScanConfig config;
  std::vector<std::size_t> levels;  // checkpoint budgets N
  std::vector<SnaCell> cells;
  std::size_t error_count = 0;
};

inline SnaResult run_sna_map(const ScanConfig& cfg) {
  validate_config(cfg);
  SnaResult res;
  res.config = cfg;
  for (std::size_t l = 0, n = cfg.sna_base; l < cfg.sna_levels; ++l, n *= 10)
    res.levels.push_back(n);
  res.cells.resize(cfg.cell_count());

  // Checkpoint orders N/4, N/2, N per level, deduplicated and sorted.
  std::vector<std::int64_t> orders;
  for (std::size_t n : res.levels) {
    orders.push_back(static_cast<std::int64_t>(n / 4));
    orders.push_back(static_cast<std::int64_t>(n / 2));
    orders.push_back(static_cast<std::int64_t>(n));
  }
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());

  parallel_for_index(res.cells.size(), cfg.threads, [&](std::size_t id) {
    const std::size_t i = id / cfg.eps_steps;
    const std::size_t j = id % cfg.eps_steps;
    const double a = cfg.alpha_at(i), e = cfg.eps_at(j);
    const FlmMap map{FlmParams{a, e, cfg.omega}};
    SnaCell& cell = res.cells[id];
    cell.alpha = a;
    cell.eps = e;
    try {
      const GridCell base = classify_cell(map, a, e, cfg);
      cell.label = base.label;
      cell.lyapunov = base.lyapunov;
      cell.period = base.period;
      cell.min_abs_dxf = base.min_abs_dxf;
      if (base.error) {
        cell.error = true;
        cell.error_msg = base.error_msg;
        return;
      }
      if (base.label == ClassLabel::Diverged) {
        cell.gamma.assign(res.levels.size(), kNan);
        cell.candidate.assign(res.levels.size(), 0);
        return;
      }
      std::vector<OrbitState> seeds;
      seeds.push_back(OrbitState{Angle(cfg.theta0), cfg.x0});
      if (cfg.sna_seeds > 1) seeds.push_back(OrbitState{Angle(0.37), 0.61});
      for (std::size_t k = 2; k < cfg.sna_seeds; ++k)
        seeds.push_back(OrbitState{Angle(wrap_unit(0.11 * static_cast<double>(k) + 0.29)),
                                   0.2 + 0.5 * static_cast<double>(k % 3) / 3.0});
      // Seeds run separately so one escaping seed (off the attractor) only
      // drops out of the min instead of failing the whole cell.
      std::vector<double> profile(orders.size(), kInf);
      std::size_t survivors = 0;
      for (const OrbitState& sd : seeds) {
        try {
          const std::vector<double> one = phase_sensitivity_profile(map, {sd}, orders);
          for (std::size_t q = 0; q < orders.size(); ++q)
            profile[q] = std::min(profile[q], one[q]);
          ++survivors;
        } catch (const DivergedOrbit&) {
        }
      }
      if (survivors == 0) {
        cell.gamma.assign(res.levels.size(), kNan);
        cell.candidate.assign(res.levels.size(), 0);
        return;
      }
      auto gamma_at = [&](std::size_t n) {
        const auto it =
            std::lower_bound(orders.begin(), orders.end(), static_cast<std::int64_t>(n));
        return profile[static_cast<std::size_t>(it - orders.begin())];
      };
      for (std::size_t n : res.levels) {
        const double g4 = gamma_at(n / 4), g2 = gamma_at(n / 2), g1 = gamma_at(n);
        cell.gamma.push_back(g1);
        cell.candidate.push_back(sna_candidate(g4, g2, g1, cfg.sna_factor) ? 1 : 0);
      }
    } catch (const std::exception& ex) {
      cell.error = true;
      cell.error_msg = ex.what();
      cell.gamma.assign(res.levels.size(), kNan);
      cell.candidate.assign(res.levels.size(), 0);
    }
  });
  for (const SnaCell& c : res.cells) res.error_count += c.error ? 1 : 0;
  return res;
}

// ---- artifact writers ----

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

inline std::string grid_csv(const GridResult& res) {
  std::string out = "alpha,epsilon,class,lyapunov,period,min_abs_dxf\n";
  for (const GridCell& c : res.cells) {
    out += format_double(c.alpha);
    out += ',';
    out += format_double(c.eps);
    out += ',';
    out += c.error ? "error" : to_string(c.label);
    out += ',';
    out += format_double(c.lyapunov);
    out += ',';
    out += format_size(static_cast<std::size_t>(c.period));
    out += ',';
    out += format_double(c.min_abs_dxf);
    out += '\n';
  }
  return out;
}

inline std::string model_csv(const ModelGridResult& res) {
  std::string out = "mu,lambda,class,lyapunov,multiplier\n";
  for (std::size_t id = 0; id < res.cells.size(); ++id) {
    const GridCell& c = res.cells[id];
    out += format_double(c.alpha);
    out += ',';
    out += format_double(c.eps);
    out += ',';
    out += c.error ? "error" : to_string(c.label);
    out += ',';
    out += format_double(c.lyapunov);
    out += ',';
    out += format_double(res.multipliers[id]);
    out += '\n';
  }
  return out;
}

inline std::string sna_csv(const SnaResult& res) {
  std::string out = "alpha,epsilon,class,lyapunov,period,min_abs_dxf";
  for (std::size_t n : res.levels) {
    out += ",gamma_" + format_size(n);
    out += ",cand_" + format_size(n);
  }
  out += '\n';
  for (const SnaCell& c : res.cells) {
    out += format_double(c.alpha);
    out += ',';
    out += format_double(c.eps);
    out += ',';
    out += c.error ? "error" : to_string(c.label);
    out += ',';
    out += format_double(c.lyapunov);
    out += ',';
    out += format_size(static_cast<std::size_t>(c.period));
    out += ',';
    out += format_double(c.min_abs_dxf);
    for (std::size_t l = 0; l < res.levels.size(); ++l) {
      out += ',';
      out += format_double(l < c.gamma.size() ? c.gamma[l] : kNan);
      out += ',';
      out += format_size(static_cast<std::size_t>(l < c.candidate.size() ? c.candidate[l] : 0));
    }
    out += '\n';
  }
  return out;
}

inline std::string branch_csv(const BifurcationBranch& b) {
  std::string out =
      "index,alpha,epsilon,period,order,lyapunov,sup_d1,sup_d2,min_abs_dxf,newton_iters\n";
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    const ContinuationPoint& pt = b.points[i];
    out += format_size(i);
    out += ',';
    out += format_double(pt.alpha);
    out += ',';
    out += format_double(pt.epsilon);
    out += ',';
    out += format_size(static_cast<std::size_t>(pt.period));
    out += ',';
    out += format_size(static_cast<std::size_t>(pt.order));
    out += ',';
    out += format_double(pt.lyapunov);
    out += ',';
    out += format_double(pt.sup_d1);
    out += ',';
    out += format_double(pt.sup_d2);
    out += ',';
    out += format_double(pt.min_abs_dxf);
    out += ',';
    out += format_size(pt.newton_residuals.empty() ? 0 : pt.newton_residuals.size() - 1);
    out += '\n';
  }
  return out;
}

// Sidecar with the full Fourier data, one line per accepted point:
// index then order then the coefficients in [a0, a1, b1, ...] layout.
inline std::string branch_coeffs_text(const BifurcationBranch& b) {
  std::string out;
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    const ContinuationPoint& pt = b.points[i];
    out += format_size(i);
    out += ' ';
    out += format_size(static_cast<std::size_t>(pt.curve.order));
    for (double c : pt.curve.coeffs) {
      out += ' ';
      out += format_double(c);
    }
    out += '\n';
  }
  return out;
}

inline std::string constraint_csv(const ConstraintCurve& cc) {
  std::string out = "alpha,eps_star,symbols\n";
  const std::string sym = symbols_to_string(cc.symbols);
  for (std::size_t i = 0; i < cc.alphas.size(); ++i) {
    out += format_double(cc.alphas[i]);
    out += ',';
    out += format_double(cc.eps_stars[i]);
    out += ',';
    out += sym;
    out += '\n';
  }
  return out;
}

inline std::string piecewise_csv(const PiecewiseCurve& pc) {
  std::string out = "theta,x,segment_id\n";
  for (std::size_t s = 0; s < pc.segments.size(); ++s) {
    const auto& seg = pc.segments[s];
    for (std::size_t i = 0; i < seg.thetas.size(); ++i) {
      out += format_double(seg.thetas[i]);
      out += ',';
      out += format_double(seg.xs[i]);
      out += ',';
      out += format_size(s);
      out += '\n';
    }
  }
  return out;
}

inline std::string envelopes_csv(const InvariantReducibilitySet& set) {
  std::string out = "theta,lower,upper\n";
  for (std::size_t i = 0; i < set.thetas.size(); ++i) {
    out += format_double(set.thetas[i]);
    out += ',';
    out += format_double(set.lower[i]);
    out += ',';
    out += format_double(set.upper[i]);
    out += '\n';
  }
  return out;
}

inline std::string model_boundary_csv(const std::vector<BoundaryPolyline>& lines) {
  std::string out = "lambda,mu,label\n";
  for (const BoundaryPolyline& line : lines)
    for (const auto& pt : line.points) {
      out += format_double(pt[0]);
      out += ',';
      out += format_double(pt[1]);
      out += ',';
      out += line.label;
      out += '\n';
    }
  return out;
}

// Key=value run manifest. Content is a pure function of the inputs and
// results, never of the wall clock, so reruns produce identical bytes.
inline std::string manifest_text(
    const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string out;
  for (const auto& [k, v] : rows) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace qpmap
