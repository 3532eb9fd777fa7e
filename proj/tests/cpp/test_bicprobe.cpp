#include <doctest.h>

#include <cmath>

#include "bicscat/bicprobe.hpp"

using namespace bicscat;

namespace {

std::vector<Eigen::Vector2d> real_ring(int n, int turns) {
  std::vector<Eigen::Vector2d> a(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double phi = 2.0 * pi * j / n * turns;
    a[static_cast<size_t>(j)] = Eigen::Vector2d(std::cos(phi), std::sin(phi));
  }
  return a;
}

}  // namespace

TEST_CASE("real 2-vector winding kernel") {
  double res = -1.0;

  std::vector<Eigen::Vector2d> flat(24, Eigen::Vector2d(1.0, 0.2));
  CHECK(winding_real2(flat, &res) == 0);
  CHECK(res == 0.0);

  CHECK(winding_real2(real_ring(24, 1), &res) == 1);
  CHECK(res == doctest::Approx(2.0 * pi / 24).epsilon(1e-12));
  CHECK(res < tol_residual);

  auto rev = real_ring(24, 1);
  std::reverse(rev.begin() + 1, rev.end());
  CHECK(winding_real2(rev, &res) == -1);

  CHECK(winding_real2(real_ring(24, 2), &res) == 2);
  CHECK(res == doctest::Approx(2.0 * pi / 12).epsilon(1e-12));
}

TEST_CASE("complex winding kernel") {
  double res = -1.0;
  std::vector<cd> a(24), b(24), flat(24, cd(0.7, -0.1));
  for (int j = 0; j < 24; ++j) {
    const double phi = 2.0 * pi * j / 24;
    a[static_cast<size_t>(j)] = std::polar(1.0, phi);
    b[static_cast<size_t>(j)] = std::polar(0.5, -2.0 * phi);
  }
  CHECK(winding_complex(flat, &res) == 0);
  CHECK(winding_complex(a, &res) == 1);
  CHECK(res == doctest::Approx(2.0 * pi / 24).epsilon(1e-12));
  CHECK(winding_complex(b, &res) == -2);
  CHECK(res == doctest::Approx(2.0 * pi / 12).epsilon(1e-12));
}

TEST_CASE("two-sample sign index") {
  CHECK(sign_index(0.3, 0.2) == 0);
  CHECK(sign_index(-0.3, -0.2) == 0);
  CHECK(sign_index(0.3, -0.2) == 1);
  CHECK(sign_index(-0.3, 0.2) == -1);
}

TEST_CASE("probe input validation") {
  StructureSpec circle = make_circle_array(10.0, 1.0, 0.6 * pi);
  StructureSpec family = make_perturbed_circle(0.0);
  ProbeConfig cfg;
  cfg.beta_c = 0.0;
  cfg.k_seed = 0.45;
  cfg.r = 0.01;

  ProbeConfig bad = cfg;
  bad.r = 0.0;
  CHECK_THROWS_AS(run_probe(circle, ProbeCase::IV, bad, Grid{16, 16}), Error);

  bad = cfg;
  bad.C = 2;
  CHECK_THROWS_AS(run_probe(circle, ProbeCase::IV, bad, Grid{16, 16}), Error);

  // Family arity must match the probe case.
  CHECK_THROWS_AS(run_probe(circle, ProbeCase::II, cfg, Grid{16, 16}), Error);
  CHECK_THROWS_AS(run_probe(circle, ProbeCase::III, cfg, Grid{16, 16}), Error);
  CHECK_THROWS_AS(run_probe(family, ProbeCase::IV, cfg, Grid{16, 16}), Error);

  bad = cfg;
  bad.n_samples = 6;
  CHECK_THROWS_AS(run_probe(family, ProbeCase::III, bad, Grid{16, 16}), Error);
}

TEST_CASE("sign probe finds the symmetry-protected state") {
  StructureSpec s = make_circle_array(10.0, 1.0, 0.6 * pi);
  ProbeConfig cfg;
  cfg.beta_c = 0.0;
  cfg.k_seed = 0.4414;
  cfg.r = 0.012;

  ProbeResult pr = run_probe(s, ProbeCase::IV, cfg, Grid{64, 64});
  REQUIRE(pr.samples.size() == 2);
  CHECK(std::abs(pr.index) == 1);
  CHECK(pr.samples[0].beta == doctest::Approx(-0.012));
  CHECK(pr.samples[1].beta == doctest::Approx(0.012));
  CHECK(std::abs(pr.samples[0].k - 0.4414) < 0.02);
  CHECK(std::abs(pr.samples[1].k - 0.4414) < 0.02);

  // Same sign of the index at a different radius.
  ProbeConfig cfg2 = cfg;
  cfg2.r = 0.024;
  ProbeResult pr2 = run_probe(s, ProbeCase::IV, cfg2, Grid{64, 64});
  CHECK(pr2.index == pr.index);
}

TEST_CASE("sign probe reports zero on the empty cell") {
  // The empty-cell eigenvalue branch crosses e^{i pi} at every beta, but
  // carries no zero of the reduced amplitude, so the index must vanish.
  StructureSpec vac = make_circle_array(1.0, 1.0, 0.5);
  ProbeConfig cfg;
  cfg.beta_c = 0.3;
  cfg.k_seed = 0.583;
  cfg.r = 0.02;
  ProbeResult pr = run_probe(vac, ProbeCase::IV, cfg, Grid{32, 32});
  CHECK(pr.index == 0);
}

TEST_CASE("ring probe winds around an interior zero") {
  // The standing wave at nonzero quasimomentum on the unscaled circle is an
  // isolated zero of the reduced amplitude in the (beta, delta) plane of the
  // radius-scaling family; a ring around it carries winding +-1.
  StructureSpec family = make_scaled_circle(0.0, 10.0, 1.0, 0.6 * pi);
  ProbeConfig cfg;
  cfg.beta_c = 0.2206;
  cfg.delta_c = 0.0;
  cfg.k_seed = 0.6173;
  cfg.r = 0.05;
  cfg.n_samples = 24;
  ProbeResult pr = run_probe(family, ProbeCase::III, cfg, Grid{64, 64});
  REQUIRE(pr.samples.size() == 24);
  CHECK(std::abs(pr.index) == 1);
  CHECK(pr.residual <= tol_residual);
  CHECK(pr.omega.size() == 24);
  // The samples carry the affine ring coordinates.
  CHECK(pr.samples[6].beta == doctest::Approx(0.2206));
  CHECK(pr.samples[6].delta == doctest::Approx(0.05));
}

TEST_CASE("ring probe sees nothing around an empty region") {
  StructureSpec family = make_scaled_circle(0.0, 10.0, 1.0, 0.6 * pi);
  ProbeConfig cfg;
  cfg.beta_c = 0.3;
  cfg.delta_c = 0.1;
  cfg.k_seed = 0.6173;
  cfg.r = 0.05;
  cfg.n_samples = 24;
  ProbeResult pr = run_probe(family, ProbeCase::III, cfg, Grid{64, 64});
  CHECK(pr.index == 0);
}

TEST_CASE("localization shrinks the radius and keeps the index") {
  StructureSpec s = make_circle_array(10.0, 1.0, 0.6 * pi);
  ProbeConfig cfg;
  cfg.beta_c = 0.0;
  cfg.k_seed = 0.4414;
  cfg.r = 0.012;
  LocalizeResult loc = localize_bic(s, ProbeCase::IV, cfg, Grid{64, 64}, 2);
  CHECK(std::abs(loc.index) == 1);
  CHECK(loc.r_final <= 0.012 * 0.25 * 1.0001);
  CHECK(std::abs(loc.beta) < 1e-12);
  CHECK(std::abs(loc.k - 0.4414) < 0.02);

  // A region without a state fails localization.
  ProbeConfig off = cfg;
  off.beta_c = 0.3;
  off.k_seed = 0.583;
  StructureSpec vac = make_circle_array(1.0, 1.0, 0.5);
  CHECK_THROWS_AS(localize_bic(vac, ProbeCase::IV, off, Grid{32, 32}, 2), Error);
}
