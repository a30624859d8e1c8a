#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "qpmap/qpmap.hpp"

using namespace qpmap;
namespace fs = std::filesystem;

TEST_CASE("shortest-form double rendering parses back exactly") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(3.0) == "3");
  for (double v : {kGoldenMean, 0.1, 1.0 / 3.0, -2.75, 1e-300, 6.02e23, -0.6931471805599453}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

namespace {

ScanConfig nondefault_config() {
  ScanConfig c;
  c.map_kind = "model";
  c.alpha_min = -3.0;
  c.alpha_max = 3.0;
  c.alpha_steps = 77;
  c.eps_min = -2.5;
  c.eps_max = 2.5;
  c.eps_steps = 41;
  c.omega = 0.391;
  c.theta0 = 0.123;
  c.x0 = 0.271;
  c.transient = 555;
  c.n_max = 123456;
  c.lyapunov_tol = 2e-4;
  c.zero_tol = 5e-4;
  c.mesh_tol = 3e-7;
  c.reducibility_threshold = 2e-5;
  c.period_window = 7e-4;
  c.period_x_gap = 3e-5;
  c.threads = 4;
  c.mesh_size = 512;
  c.sna_base = 5000;
  c.sna_levels = 2;
  c.sna_seeds = 3;
  c.sna_factor = 1.7;
  c.out_dir = "artifacts/run1";
  return c;
}

void check_configs_equal(const ScanConfig& a, const ScanConfig& b) {
  CHECK(a.map_kind == b.map_kind);
  CHECK(a.alpha_min == b.alpha_min);
  CHECK(a.alpha_max == b.alpha_max);
  CHECK(a.alpha_steps == b.alpha_steps);
  CHECK(a.eps_min == b.eps_min);
  CHECK(a.eps_max == b.eps_max);
  CHECK(a.eps_steps == b.eps_steps);
  CHECK(a.omega == b.omega);
  CHECK(a.theta0 == b.theta0);
  CHECK(a.x0 == b.x0);
  CHECK(a.transient == b.transient);
  CHECK(a.n_max == b.n_max);
  CHECK(a.lyapunov_tol == b.lyapunov_tol);
  CHECK(a.zero_tol == b.zero_tol);
  CHECK(a.mesh_tol == b.mesh_tol);
  CHECK(a.reducibility_threshold == b.reducibility_threshold);
  CHECK(a.period_window == b.period_window);
  CHECK(a.period_x_gap == b.period_x_gap);
  CHECK(a.threads == b.threads);
  CHECK(a.mesh_size == b.mesh_size);
  CHECK(a.sna_base == b.sna_base);
  CHECK(a.sna_levels == b.sna_levels);
  CHECK(a.sna_seeds == b.sna_seeds);
  CHECK(a.sna_factor == b.sna_factor);
  CHECK(a.out_dir == b.out_dir);
}

}  // namespace

TEST_CASE("config render and parse round-trip every field") {
  const ScanConfig c = nondefault_config();
  check_configs_equal(parse_config(render_config(c)), c);
  check_configs_equal(parse_config(render_config(ScanConfig{})), ScanConfig{});
}

TEST_CASE("config text accepts comments and rejects garbage") {
  ScanConfig c = parse_config("# comment\n\n[grid]\nalpha_min=2.7\n  alpha_max = 3.1 \n");
  CHECK(c.alpha_min == 2.7);
  CHECK(c.alpha_max == 3.1);

  CHECK_THROWS_AS(parse_config("[grid]\nbogus=1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("stray line\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[grid]\nalpha_min=abc\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[grid\nalpha_min=2\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("alpha_min=2\n"), std::invalid_argument);  // no section
  CHECK_THROWS_AS(parse_config("[orbit]\ntransient=-4\n"), std::invalid_argument);
}

TEST_CASE("config validation rejects out-of-range settings one by one") {
  auto broken = [](auto&& tweak) {
    ScanConfig c;
    tweak(c);
    return c;
  };
  CHECK_THROWS_AS(validate_config(broken([](ScanConfig& c) { c.map_kind = "x"; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_config(broken([](ScanConfig& c) { c.omega = 0.0; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_config(broken([](ScanConfig& c) { c.omega = 1.0; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_config(broken([](ScanConfig& c) { c.alpha_steps = 1; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_config(broken([](ScanConfig& c) { c.eps_max = c.eps_min; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_config(broken([](ScanConfig& c) { c.n_max = 999; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_config(broken([](ScanConfig& c) { c.threads = 0; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_config(broken([](ScanConfig& c) { c.mesh_size = 8; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_config(broken([](ScanConfig& c) { c.sna_factor = 1.0; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_config(broken([](ScanConfig& c) { c.lyapunov_tol = 0.0; })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_config(broken([](ScanConfig& c) { c.out_dir.clear(); })),
                  std::invalid_argument);
  CHECK_NOTHROW(validate_config(ScanConfig{}));
}

TEST_CASE("window presets set the documented extents") {
  ScanConfig c;
  apply_window_preset(c, "sna");
  CHECK(c.alpha_min == 3.2);
  CHECK(c.alpha_max == 3.9);
  CHECK(c.eps_min == 0.0);
  CHECK(c.eps_max == 0.3);
  apply_window_preset(c, "model");
  CHECK(c.alpha_min == 0.5);
  CHECK(c.alpha_max == 2.5);
  apply_window_preset(c, "main");
  CHECK(c.alpha_min == 2.6);
  CHECK(c.alpha_max == 3.6);
  apply_window_preset(c, "constraints");
  CHECK(c.alpha_min == 2.05);
  CHECK_THROWS_AS(apply_window_preset(c, "nope"), std::invalid_argument);
}

TEST_CASE("config hash is stable, hex-shaped and sensitive to every change") {
  const ScanConfig c = nondefault_config();
  const std::string h1 = config_hash_hex(c);
  const std::string h2 = config_hash_hex(c);
  REQUIRE(h1.size() == 16);
  CHECK(h1 == h2);
  for (char ch : h1) CHECK(((ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f')));
  ScanConfig d = c;
  d.n_max += 1;
  CHECK(config_hash_hex(d) != h1);
  ScanConfig e = c;
  e.out_dir += "x";
  CHECK(config_hash_hex(e) != h1);
}

TEST_CASE("manifest rows render as key=value lines") {
  CHECK(manifest_text({{"tool_version", kToolVersion}, {"config_hash", "abc"}}) ==
        std::string("tool_version=") + kToolVersion + "\nconfig_hash=abc\n");
  CHECK(manifest_text({}).empty());
}

TEST_CASE("csv writers: headers and hand-built rows") {
  GridResult gr;
  GridCell cell;
  cell.alpha = 2.5;
  cell.eps = 0.0;
  cell.label = ClassLabel::ReducibleCurve;
  cell.lyapunov = -0.5;
  cell.period = 1;
  cell.min_abs_dxf = 0.5;
  gr.cells.push_back(cell);
  GridCell bad;
  bad.alpha = 3.0;
  bad.eps = 0.1;
  bad.error = true;
  gr.cells.push_back(bad);
  const std::string g = grid_csv(gr);
  CHECK(g.rfind("alpha,epsilon,class,lyapunov,period,min_abs_dxf\n", 0) == 0);
  CHECK(g.find("2.5,0,reducible_curve,-0.5,1,0.5\n") != std::string::npos);
  CHECK(g.find("3,0.1,error,") != std::string::npos);

  ModelGridResult mr;
  mr.cells.push_back(cell);
  mr.multipliers.push_back(-1.25);
  const std::string m = model_csv(mr);
  CHECK(m.rfind("mu,lambda,class,lyapunov,multiplier\n", 0) == 0);
  CHECK(m.find("2.5,0,reducible_curve,-0.5,-1.25\n") != std::string::npos);

  SnaResult sr;
  sr.levels = {100};
  SnaCell sc;
  sc.alpha = 3.4;
  sc.eps = 0.2;
  sc.label = ClassLabel::Chaotic;
  sc.lyapunov = 0.1;
  sc.gamma = {2.5};
  sc.candidate = {1};
  sr.cells.push_back(sc);
  const std::string s = sna_csv(sr);
  CHECK(s.rfind("alpha,epsilon,class,lyapunov,period,min_abs_dxf,gamma_100,cand_100\n", 0) == 0);
  CHECK(s.find("3.4,0.2,chaotic,0.1,0,0,2.5,1\n") != std::string::npos);

  ConstraintCurve cc;
  cc.symbols = parse_symbols("--");
  cc.alphas = {3.0};
  cc.eps_stars = {0.1};
  CHECK(constraint_csv(cc) == "alpha,eps_star,symbols\n3,0.1,--\n");

  PiecewiseCurve pc;
  pc.segments.push_back({{0.0, 0.25}, {0.5, 0.6}});
  pc.segments.push_back({{0.75}, {0.7}});
  CHECK(piecewise_csv(pc) == "theta,x,segment_id\n0,0.5,0\n0.25,0.6,0\n0.75,0.7,1\n");

  InvariantReducibilitySet set;
  set.thetas = {0.0, 0.5};
  set.lower = {0.5, 0.55};
  set.upper = {0.75, 0.8};
  CHECK(envelopes_csv(set) == "theta,lower,upper\n0,0.5,0.75\n0.5,0.55,0.8\n");

  const std::string mb = model_boundary_csv(model_boundary_polylines(-1.0, 1.0, 3));
  CHECK(mb.rfind("lambda,mu,label\n", 0) == 0);
  CHECK(mb.find("-1,1.25,stability_boundary_upper\n") != std::string::npos);

  BifurcationBranch b;
  ContinuationPoint pt;
  pt.alpha = 3.0;
  pt.epsilon = 0.0;
  pt.period = 1;
  pt.order = 8;
  pt.lyapunov = 0.0;
  pt.sup_d1 = 0.1;
  pt.sup_d2 = 0.2;
  pt.min_abs_dxf = 0.9;
  pt.newton_residuals = {1e-3, 1e-8};
  pt.curve.order = 1;
  pt.curve.coeffs = {0.5, 0.0, 0.0};
  b.points.push_back(pt);
  const std::string bc = branch_csv(b);
  CHECK(bc.rfind("index,alpha,epsilon,period,order,lyapunov,sup_d1,sup_d2,min_abs_dxf,"
                 "newton_iters\n",
                 0) == 0);
  CHECK(bc.find("0,3,0,1,8,0,0.1,0.2,0.9,1\n") != std::string::npos);
  CHECK(branch_coeffs_text(b) == "0 1 0.5 0 0\n");
}

namespace {

ScanConfig small_grid_config() {
  ScanConfig cfg;
  cfg.alpha_min = 2.6;
  cfg.alpha_max = 3.0;
  cfg.alpha_steps = 10;
  cfg.eps_min = 0.0;
  cfg.eps_max = 0.1;
  cfg.eps_steps = 10;
  cfg.n_max = 20000;
  cfg.mesh_size = 256;
  return cfg;
}

}  // namespace

TEST_CASE("survey output is byte-identical across thread counts and reruns") {
  ScanConfig cfg = small_grid_config();
  cfg.threads = 1;
  const std::string base = grid_csv(run_scan(cfg));
  REQUIRE(base.size() > 100);
  const std::string again = grid_csv(run_scan(cfg));
  CHECK(base == again);
  for (std::size_t t : {4u, 8u}) {
    cfg.threads = t;
    INFO("threads = " << t);
    CHECK(grid_csv(run_scan(cfg)) == base);
  }
}

TEST_CASE("survey cells line up with the declared grid geometry") {
  ScanConfig cfg = small_grid_config();
  const GridResult res = run_scan(cfg);
  REQUIRE(res.cells.size() == cfg.cell_count());
  CHECK(cfg.alpha_at(0) == cfg.alpha_min);
  CHECK(cfg.alpha_at(cfg.alpha_steps - 1) == cfg.alpha_max);
  CHECK(cfg.eps_at(0) == cfg.eps_min);
  CHECK(cfg.eps_at(cfg.eps_steps - 1) == cfg.eps_max);
  for (std::size_t id = 0; id < res.cells.size(); ++id) {
    REQUIRE(res.cells[id].alpha == cfg.alpha_at(id / cfg.eps_steps));
    REQUIRE(res.cells[id].eps == cfg.eps_at(id % cfg.eps_steps));
  }
  CHECK(res.error_count == 0);
}

TEST_CASE("classification is stable when the orbit budget doubles") {
  ScanConfig cfg;
  cfg.alpha_min = 2.2;
  cfg.alpha_max = 2.8;
  cfg.alpha_steps = 8;
  cfg.eps_min = 0.0;
  cfg.eps_max = 0.1;
  cfg.eps_steps = 8;
  cfg.n_max = 50000;
  const GridResult r1 = run_scan(cfg);
  cfg.n_max = 100000;
  cfg.transient *= 2;
  const GridResult r2 = run_scan(cfg);
  REQUIRE(r1.cells.size() == r2.cells.size());
  for (std::size_t i = 0; i < r1.cells.size(); ++i) {
    INFO("alpha = " << r1.cells[i].alpha << " eps = " << r1.cells[i].eps);
    REQUIRE(r1.cells[i].label == r2.cells[i].label);
    REQUIRE(r1.cells[i].period == r2.cells[i].period);
  }
}

TEST_CASE("pinned cells along a weak-forcing row of the survey") {
  const ScanConfig cfg;
  struct Expect {
    double alpha;
    ClassLabel label;
    int period;
    double lyap;
  };
  const std::vector<Expect> table = {
      {2.4, ClassLabel::ReducibleCurve, 1, -0.919},
      {3.35, ClassLabel::ReducibleCurve, 2, -0.3785},
      {3.5, ClassLabel::NonReducibleCurve, 4, -0.158},
      {3.529, ClassLabel::Chaotic, 0, 0.0205},
  };
  for (const Expect& e : table) {
    const GridCell cell = classify_cell(FlmMap{FlmParams{e.alpha, 0.01}}, e.alpha, 0.01, cfg);
    INFO("alpha = " << e.alpha);
    REQUIRE_FALSE(cell.error);
    CHECK(cell.label == e.label);
    CHECK(cell.period == e.period);
    CHECK(cell.lyapunov == Catch::Approx(e.lyap).margin(0.02));
  }
}

TEST_CASE("the weakly forced period-four curve straddles the critical line") {
  // The unforced attractor at this parameter has a branch almost on the
  // critical line; under weak forcing the curve crosses it, so the chain
  // derivative changes sign even though its sampled floor stays above the
  // plain threshold. The sign test is what catches this.
  const ScanConfig cfg;
  const GridCell cell = classify_cell(FlmMap{FlmParams{3.5, 0.01}}, 3.5, 0.01, cfg);
  CHECK(cell.label == ClassLabel::NonReducibleCurve);
  CHECK(cell.min_abs_dxf > cfg.reducibility_threshold);
  CHECK(cell.min_abs_dxf < 1e-3);
}

TEST_CASE("model survey: attracting invariant line labels and multipliers") {
  ScanConfig cfg;
  cfg.map_kind = "model";
  cfg.alpha_min = 0.5;
  cfg.alpha_max = 0.9;
  cfg.alpha_steps = 3;
  cfg.eps_min = 0.2;
  cfg.eps_max = 0.3;
  cfg.eps_steps = 2;
  cfg.n_max = 50000;
  const ModelGridResult res = run_model_scan(cfg);
  REQUIRE(res.cells.size() == 6);
  REQUIRE(res.multipliers.size() == 6);
  CHECK(res.error_count == 0);
  for (std::size_t id = 0; id < res.cells.size(); ++id) {
    const GridCell& c = res.cells[id];
    INFO("mu = " << c.alpha << " lambda = " << c.eps);
    const auto m = reduced_multiplier(c.alpha, c.eps);
    REQUIRE(m);
    REQUIRE(res.multipliers[id] == *m);
    REQUIRE(std::abs(*m) < 1.0);
    CHECK(c.label == ClassLabel::ReducibleCurve);
    CHECK(c.period == 1);
    CHECK(c.lyapunov == Catch::Approx(trivial_lyapunov(c.alpha, c.eps)).margin(5e-3));
  }
}

TEST_CASE("model survey cell inside the period-two band") {
  ScanConfig cfg;
  cfg.map_kind = "model";
  const GridCell cell = [&] {
    ScanConfig local = cfg;
    local.x0 = 0.3;
    return classify_cell(ModelMap{ModelParams{1.2, 0.01}}, 1.2, 0.01, local);
  }();
  REQUIRE_FALSE(cell.error);
  CHECK(existence_band(1.2, 0.01) == ModelRegion::PeriodTwoBand);
  CHECK(cell.label == ClassLabel::ReducibleCurve);
  CHECK(cell.period == 2);
  CHECK(cell.lyapunov < 0.0);
}

TEST_CASE("phase-sensitivity survey: quiet cells are never flagged") {
  ScanConfig cfg;
  cfg.alpha_min = 2.4;
  cfg.alpha_max = 2.9;
  cfg.alpha_steps = 2;
  cfg.eps_min = 0.0;
  cfg.eps_max = 1e-6;
  cfg.eps_steps = 2;
  cfg.n_max = 50000;
  cfg.sna_base = 1000;
  cfg.sna_levels = 2;
  const SnaResult res = run_sna_map(cfg);
  REQUIRE(res.levels == std::vector<std::size_t>{1000, 10000});
  REQUIRE(res.cells.size() == 4);
  CHECK(res.error_count == 0);
  for (const SnaCell& c : res.cells) {
    INFO("alpha = " << c.alpha << " eps = " << c.eps);
    REQUIRE_FALSE(c.error);
    CHECK(c.label == ClassLabel::ReducibleCurve);
    REQUIRE(c.gamma.size() == 2);
    REQUIRE(c.candidate.size() == 2);
    CHECK(c.candidate[0] == 0);
    CHECK(c.candidate[1] == 0);
    CHECK(std::isfinite(c.gamma[0]));
    CHECK(c.gamma[1] >= 0.0);
  }
}

TEST_CASE("figure scripts: deterministic bytes, missing data, unknown names") {
  const fs::path dir = fs::temp_directory_path() / "qpmap_plot_test_dir";
  fs::remove_all(dir);
  fs::create_directories(dir);

  CHECK_THROWS_AS(figure_script("fig_grid_classes", dir), MissingArtifact);
  CHECK_THROWS_AS(figure_script("fig_envelopes", dir), MissingArtifact);
  CHECK_THROWS_AS(figure_script("no_such_figure", dir), std::invalid_argument);
  CHECK(emit_plots(dir).empty());

  GridResult gr;
  GridCell cell;
  cell.alpha = 2.5;
  cell.label = ClassLabel::ReducibleCurve;
  gr.cells.push_back(cell);
  write_text_file((dir / "grid.csv").string(), grid_csv(gr));

  const std::string s1 = figure_script("fig_grid_classes", dir);
  const std::string s2 = figure_script("fig_grid_classes", dir);
  CHECK(s1 == s2);
  CHECK(s1.find("grid.csv") != std::string::npos);
  CHECK(s1.find("reducible_curve") != std::string::npos);

  const auto written = emit_plots(dir);
  REQUIRE(written.size() == 2);
  CHECK(fs::exists(dir / "fig_grid_classes.gp"));
  CHECK(fs::exists(dir / "fig_grid_lyapunov.gp"));
  CHECK_THROWS_AS(emit_plots(dir, {"fig_sna_candidates"}), MissingArtifact);

  SnaResult sr;
  sr.levels = {100};
  SnaCell sc;
  sc.gamma = {1.0};
  sc.candidate = {0};
  sr.cells.push_back(sc);
  write_text_file((dir / "sna.csv").string(), sna_csv(sr));
  const std::string s3 = figure_script("fig_sna_candidates", dir);
  CHECK(s3.find("sna.csv") != std::string::npos);

  fs::remove_all(dir);
}

TEST_CASE("worker pool speeds up wide surveys") {
  if (std::thread::hardware_concurrency() < 4) SKIP("needs at least 4 hardware threads");
  ScanConfig cfg = small_grid_config();
  cfg.alpha_steps = 30;
  cfg.eps_steps = 30;
  cfg.threads = 1;
  const auto t0 = std::chrono::steady_clock::now();
  run_scan(cfg);
  const auto t1 = std::chrono::steady_clock::now();
  cfg.threads = 4;
  run_scan(cfg);
  const auto t2 = std::chrono::steady_clock::now();
  const double serial = std::chrono::duration<double>(t1 - t0).count();
  const double wide = std::chrono::duration<double>(t2 - t1).count();
  CHECK(wide < serial);
}
