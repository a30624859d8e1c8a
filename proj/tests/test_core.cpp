#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qpmap/qpmap.hpp"

using namespace qpmap;
using testutil::Rng;

TEST_CASE("wrap_unit reduces to [0,1) and respects integer shifts") {
  CHECK(wrap_unit(0.0) == 0.0);
  CHECK(wrap_unit(1.0) == 0.0);
  CHECK(wrap_unit(-1e-17) == 0.0);
  CHECK(wrap_unit(2.75) == Catch::Approx(0.75).margin(1e-15));
  CHECK(wrap_unit(-0.25) == Catch::Approx(0.75).margin(1e-15));

  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-10.0, 10.0);
    const double w = wrap_unit(x);
    REQUIRE(w >= 0.0);
    REQUIRE(w < 1.0);
    double d = std::abs(wrap_unit(x + 1.0) - w);
    d = std::min(d, 1.0 - d);
    REQUIRE(d < 1e-14);
  }
}

TEST_CASE("Angle construction wraps and advance stays on the circle") {
  CHECK(Angle(1.7).value() == Catch::Approx(0.7).margin(1e-15));
  CHECK(Angle(-0.25).value() == Catch::Approx(0.75).margin(1e-15));

  Angle a(0.9);
  a.advance(0.3);
  CHECK(a.value() == Catch::Approx(0.2).margin(1e-15));
  CHECK((Angle(0.9) + 0.3).value() == Catch::Approx(0.2).margin(1e-15));
}

TEST_CASE("walked rotation agrees with the closed-form n-step rotation") {
  const double theta0 = 0.123;
  const double w = kGoldenMean;
  Angle a(theta0);
  for (int n = 1; n <= 10000; ++n) {
    a.advance(w);
    if (n % 977 == 0 || n == 10000) {
      const double direct = rotate_n(theta0, w, n);
      double d = std::abs(a.value() - direct);
      d = std::min(d, 1.0 - d);
      REQUIRE(d < 1e-11);
    }
  }
}

TEST_CASE("forced logistic step at pinned parameter points") {
  {
    OrbitState s{Angle(0.0), 0.5};
    const OrbitState n = flm_step(FlmParams{2.0, 0.0}, s);
    CHECK(n.x == Catch::Approx(0.5).margin(1e-15));
    CHECK(n.theta.value() == Catch::Approx(kGoldenMean).margin(1e-15));
    CHECK(n.step_count == 1);
  }
  {
    OrbitState s{Angle(0.0), 0.5};
    const OrbitState n = flm_step(FlmParams{3.0, 0.1}, s);
    CHECK(n.x == Catch::Approx(0.825).margin(1e-15));
  }
  {
    OrbitState s{Angle(0.25), 0.3};
    const OrbitState n = flm_step(FlmParams{2.4, 0.5}, s);
    CHECK(n.x == Catch::Approx(0.504).margin(1e-15));
  }
}

TEST_CASE("cubic model step at pinned parameter points") {
  {
    OrbitState s{Angle(0.37), 0.0};
    CHECK(model_step(ModelParams{1.7, 0.9}, s).x == 0.0);
  }
  {
    OrbitState s{Angle(0.0), 1.0};
    CHECK(model_step(ModelParams{1.0, 0.0}, s).x == Catch::Approx(0.0).margin(1e-15));
  }
  {
    OrbitState s{Angle(0.5), 0.5};
    CHECK(model_step(ModelParams{2.0, 1.0}, s).x == Catch::Approx(-0.375).margin(1e-12));
  }
}

TEST_CASE("fiber derivative of the forced logistic map at pinned points") {
  CHECK(flm_dx(FlmParams{3.3, 0.7}, 0.37, 0.5) == 0.0);
  CHECK(flm_dx(FlmParams{3.0, 0.0}, 0.0, 0.0) == Catch::Approx(3.0).margin(1e-15));
  CHECK(flm_dx(FlmParams{2.0, 0.5}, 0.5, 0.25) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("iterate converges, diverges, and decays where it should") {
  {
    const FlmMap map{FlmParams{2.0, 0.0}};
    const IterateResult r = iterate(map, OrbitState{Angle(0.2), 0.3}, 1000, 100);
    REQUIRE_FALSE(r.diverged);
    REQUIRE(r.samples.size() == 100);
    for (const auto& [th, x] : r.samples) REQUIRE(std::abs(x - 0.5) < 1e-10);
    CHECK(r.final_state.step_count == 1100);
  }
  {
    const FlmMap map{FlmParams{3.2, 0.0}};
    const IterateResult r = iterate(map, OrbitState{Angle(0.0), -0.1}, 1000, 100);
    CHECK(r.diverged);
  }
  {
    const ModelMap map{ModelParams{0.0, 0.0}};
    const IterateResult r = iterate(map, OrbitState{Angle(0.1), 0.5}, 100, 10);
    REQUIRE_FALSE(r.diverged);
    for (const auto& [th, x] : r.samples) REQUIRE(std::abs(x) < 1e-300);
  }
}

TEST_CASE("zero forcing reproduces the plain logistic fiber bit for bit") {
  Rng rng(22);
  for (int i = 0; i < 1000; ++i) {
    const double alpha = rng.uniform(0.5, 4.0);
    const double theta = rng.uniform();
    const double x = rng.uniform(-0.5, 1.5);
    const FlmMap map{FlmParams{alpha, 0.0}};
    REQUIRE(map.fiber(theta, x) == logistic_fiber(alpha, x));
    REQUIRE(map.dfiber_dx(theta, x) == logistic_dx(alpha, x));
  }
}

TEST_CASE("the unit cylinder is forward invariant inside the compact regime") {
  Rng rng(33);
  int tried = 0;
  while (tried < 200) {
    const double alpha = rng.uniform(0.1, 4.0);
    const double emax = std::min(1.0, 4.0 / alpha - 1.0);
    if (emax <= 0.0) continue;
    ++tried;
    const FlmParams p{alpha, rng.uniform(-emax, emax)};
    REQUIRE(compact_domain_ok(p));
    const FlmMap map{p};
    double theta = rng.uniform();
    double x = rng.uniform();
    for (int n = 0; n < 2000; ++n) {
      x = map.fiber(theta, x);
      theta = wrap_unit(theta + p.omega);
      REQUIRE(x >= 0.0);
      REQUIRE(x <= 1.0);
    }
  }
}

TEST_CASE("compact-domain guard accepts the boundary and rejects beyond it") {
  CHECK(compact_domain_ok(FlmParams{4.0, 0.0}));
  CHECK(compact_domain_ok(FlmParams{3.0, 1.0 / 3.0}));
  CHECK_FALSE(compact_domain_ok(FlmParams{3.0, 0.5}));
  CHECK_THROWS_AS(require_compact(FlmParams{4.1, 0.0}), std::domain_error);
  CHECK_NOTHROW(require_compact(FlmParams{4.0, 0.0}));
}

TEST_CASE("cubic model fiber is odd in x bit for bit") {
  Rng rng(44);
  const ModelMap map{ModelParams{1.3, 0.8}};
  for (int i = 0; i < 1000; ++i) {
    const double theta = rng.uniform();
    const double x = rng.uniform(-2.0, 2.0);
    REQUIRE(map.fiber(theta, -x) == -map.fiber(theta, x));
  }
}

namespace {

template <typename M>
void check_derivatives_against_differences(const M& map, Rng& rng) {
  const double h = 1e-5;
  for (int i = 0; i < 1000; ++i) {
    const double theta = rng.uniform(0.05, 0.95);
    const double x = rng.uniform(0.05, 0.95);
    const double fd_x = (map.fiber(theta, x + h) - map.fiber(theta, x - h)) / (2.0 * h);
    const double an_x = map.dfiber_dx(theta, x);
    REQUIRE(std::abs(fd_x - an_x) <= 1e-6 * std::max(1.0, std::abs(an_x)));
    const double fd_t = (map.fiber(theta + h, x) - map.fiber(theta - h, x)) / (2.0 * h);
    const double an_t = map.dfiber_dtheta(theta, x);
    REQUIRE(std::abs(fd_t - an_t) <= 1e-6 * std::max(1.0, std::abs(an_t)));
  }
}

}  // namespace

TEST_CASE("analytic fiber derivatives match central differences") {
  Rng rng(55);
  check_derivatives_against_differences(FlmMap{FlmParams{3.1, 0.37}}, rng);
  check_derivatives_against_differences(ModelMap{ModelParams{1.3, 0.8}}, rng);
}

TEST_CASE("type-erased family forwards to the stock maps bit for bit") {
  const FlmParams fp{3.3, 0.12};
  const ModelParams mp{1.4, 0.6};
  const MapFamily ff = make_flm(fp);
  const MapFamily mf = make_model(mp);
  const FlmMap fm{fp};
  const ModelMap mm{mp};
  Rng rng(66);
  for (int i = 0; i < 200; ++i) {
    const double t = rng.uniform();
    const double x = rng.uniform(-1.0, 1.5);
    REQUIRE(ff.fiber(t, x) == fm.fiber(t, x));
    REQUIRE(ff.dfiber_dx(t, x) == fm.dfiber_dx(t, x));
    REQUIRE(ff.dfiber_dtheta(t, x) == fm.dfiber_dtheta(t, x));
    REQUIRE(mf.fiber(t, x) == mm.fiber(t, x));
    REQUIRE(mf.dfiber_dx(t, x) == mm.dfiber_dx(t, x));
    REQUIRE(mf.dfiber_dtheta(t, x) == mm.dfiber_dtheta(t, x));
  }
  CHECK(ff.omega() == fp.omega);
  CHECK(mf.omega() == mp.omega);
}

TEST_CASE("composed power map walks the base map and chains derivatives") {
  const FlmMap base{FlmParams{3.4, 0.08}};
  const PowerMap<FlmMap> one(base, 1);
  const PowerMap<FlmMap> three(base, 3);
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    const double t = rng.uniform();
    const double x = rng.uniform();
    REQUIRE(one.fiber(t, x) == base.fiber(t, x));

    double tt = t, xx = x;
    for (int s = 0; s < 3; ++s) {
      xx = base.fiber(tt, xx);
      tt = wrap_unit(tt + base.omega());
    }
    REQUIRE(three.fiber(t, x) == xx);
  }
  CHECK(one.omega() == base.omega());
  CHECK(three.omega() == Catch::Approx(wrap_unit(3.0 * base.omega())).margin(1e-15));

  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const double t = rng.uniform();
    const double x = rng.uniform(0.2, 0.8);
    const double fd = (three.fiber(t, x + h) - three.fiber(t, x - h)) / (2.0 * h);
    const double an = three.dfiber_dx(t, x);
    REQUIRE(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)));
    const double fdt = (three.fiber(t + h, x) - three.fiber(t - h, x)) / (2.0 * h);
    const double ant = three.dfiber_dtheta(t, x);
    REQUIRE(std::abs(fdt - ant) <= 1e-5 * std::max(1.0, std::abs(ant)));
  }
}
