#include <doctest.h>

#include <random>

#include "bicscat/solver.hpp"

using namespace bicscat;
using cdv = Eigen::VectorXcd;

namespace {

// Assembles the scattering matrix column by column straight from the solver.
Eigen::MatrixXcd smat_of(const Discretization& disc) {
  const int n = 2 * disc.channels().n0();
  Eigen::MatrixXcd s(n, n);
  for (int c = 0; c < n; ++c) {
    cdv e = cdv::Zero(n);
    e[c] = 1.0;
    s.col(c) = disc.solve_scattering(e).b;
  }
  return s;
}

Eigen::MatrixXcd vacuum_smat(const ChannelSet& ch, double d0) {
  const int n0 = ch.n0();
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(2 * n0, 2 * n0);
  for (int i = 0; i < n0; ++i) {
    const cd ph = std::exp(cd(0.0, 2.0 * d0) * ch.alpha_of(ch.prop[static_cast<size_t>(i)]));
    s(i, n0 + i) = ph;  // a wave entering from below leaves at the top
    s(n0 + i, i) = ph;
  }
  return s;
}

}  // namespace

TEST_CASE("permittivity sampling averages cut cells") {
  StructureSpec s = make_circle_array(10.0, 1.0, 0.6 * pi);
  Grid g{64, 64};
  Eigen::ArrayXXd eps = sample_eps_grid(s, g);
  REQUIRE(eps.rows() == 64);
  REQUIRE(eps.cols() == 65);
  CHECK(eps(32, 32) == doctest::Approx(10.0));  // node at the disk center
  CHECK(eps(0, 0) == doctest::Approx(1.0));     // strip corner, far outside
  CHECK((eps >= 1.0).all());
  CHECK((eps <= 10.0).all());

  // The weighted node sum reproduces the integral of eps over the cell.
  const double h1 = 2.0 * pi / g.n1, h2 = 2.0 * s.d0 / g.n2;
  double sum = 0.0;
  for (int l = 0; l <= g.n2; ++l) {
    const double w = (l == 0 || l == g.n2) ? 0.5 * h2 : h2;
    sum += w * h1 * eps.col(l).sum();
  }
  const double rho = 0.6 * pi;
  const double exact = 4.0 * pi * pi + 9.0 * pi * rho * rho;
  CHECK(sum == doctest::Approx(exact).epsilon(2e-3));
}

TEST_CASE("empty cell scatters exactly") {
  StructureSpec vac = make_circle_array(1.0, 1.0, 0.5);
  for (auto [beta, k] : {std::pair{0.3, 0.45}, std::pair{0.3, 1.5}}) {
    CAPTURE(beta);
    CAPTURE(k);
    Discretization disc(vac, Grid{32, 32}, beta, k);
    Eigen::MatrixXcd s = smat_of(disc);
    Eigen::MatrixXcd exact = vacuum_smat(disc.channels(), vac.d0);
    CHECK((s - exact).norm() < 1e-12);
  }
}

TEST_CASE("discrete scattering matrix is unitary at any resolution") {
  StructureSpec s = make_circle_array(10.0, 1.0, 0.6 * pi);
  for (auto [beta, k] : {std::pair{0.25, 0.8}, std::pair{0.0, 0.45}}) {
    CAPTURE(beta);
    CAPTURE(k);
    Discretization disc(s, Grid{48, 48}, beta, k);
    Eigen::MatrixXcd sm = smat_of(disc);
    const int n = static_cast<int>(sm.rows());
    CHECK((sm.adjoint() * sm - Eigen::MatrixXcd::Identity(n, n)).norm() < 1e-12);
    // Both mirror symmetries of the disk show up in the matrix.
    CHECK((sm - sm.transpose()).norm() < 1e-12);
    Eigen::MatrixXcd perm(n, n);
    const int h = n / 2;
    perm.setZero();
    perm.topRightCorner(h, h).setIdentity();
    perm.bottomLeftCorner(h, h).setIdentity();
    CHECK((perm * sm * perm - sm).norm() < 1e-12);
  }
}

TEST_CASE("grid refinement converges at second order") {
  // Self-convergence of a transmission entry against the 192^2 reference;
  // the ratio of successive errors should approach 4.
  StructureSpec s = make_circle_array(10.0, 1.0, 0.6 * pi);
  const double beta = 0.25, k = 0.45;
  auto entry = [&](int n) { return smat_of(Discretization(s, Grid{n, n}, beta, k))(1, 0); };
  const cd ref = entry(192);
  const double e48 = std::abs(entry(48) - ref);
  const double e96 = std::abs(entry(96) - ref);
  CHECK(e96 < e48);
  // Pure h^2 decay against a 2x-refined reference gives a ratio of 5; allow
  // headroom for higher-order contamination at this particular point.
  CHECK(e48 / e96 > 3.2);
  CHECK(e48 / e96 < 12.0);
}

TEST_CASE("adjoint solve hits the prescribed outgoing amplitudes") {
  StructureSpec s = make_circle_array(10.0, 1.0, 0.6 * pi);
  Discretization disc(s, Grid{48, 48}, 0.3, 0.75);
  const int n = 2 * disc.channels().n0();
  REQUIRE(n == 4);
  std::mt19937 rng(11);
  std::normal_distribution<double> nd;
  cdv b(n);
  for (int i = 0; i < n; ++i) b[i] = cd(nd(rng), nd(rng));
  FieldSolution adj = disc.solve_adjoint(b);
  CHECK((adj.b - b).norm() == 0.0);  // prescribed exactly by construction
  CHECK(adj.u.allFinite());
}

TEST_CASE("outgoing coefficients have an adjoint representation") {
  // For any volume source f, the flux-normalized outgoing coefficient of the
  // solution equals (i/2) (f, v_c) with v_c built from one adjoint solve.
  // This identity is what makes one adjoint solve per channel sufficient for
  // all the coefficient derivative formulas.
  StructureSpec s = make_circle_array(10.0, 1.0, 0.6 * pi);
  Grid g{48, 48};
  Discretization disc(s, g, 0.3, 0.75);
  const int n0 = disc.channels().n0();

  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  cdv f(disc.n_dof());
  for (long i = 0; i < f.size(); ++i) f[i] = cd(nd(rng), nd(rng));

  cdv u = disc.solve_raw(f);
  cdv uhat_up = disc.boundary_coeffs(u, true);
  cdv uhat_dn = disc.boundary_coeffs(u, false);

  for (int c = 0; c < 2 * n0; ++c) {
    CAPTURE(c);
    const int r = disc.channels().prop[static_cast<size_t>(c % n0)] + g.n1 / 2;
    const double sa = std::sqrt(disc.lambda_disc(r));
    const cd b_raw = sa * (c < n0 ? uhat_up[r] : uhat_dn[r]);

    cdv e = cdv::Zero(2 * n0);
    e[c] = 1.0;
    cdv vhat = std::conj(disc.comp(r)) * disc.solve_adjoint(e).u;
    const cd pair = cd(0.0, 0.5) * vhat.dot(f);
    CHECK(std::abs(pair - b_raw) < 1e-12 * std::abs(b_raw));
  }
}

TEST_CASE("strip inner products integrate exactly") {
  StructureSpec vac = make_circle_array(1.0, 1.0, 0.5);
  Grid g{32, 32};
  Discretization disc(vac, g, 0.3, 0.45);
  FieldSolution one = disc.wrap_field(cdv::Ones(disc.n_dof()));
  const double area = 4.0 * pi * pi;  // 2 pi wide, 2 d0 = 2 pi tall
  CHECK(inner_product_cell(one, one, Weight::one).real() == doctest::Approx(area));
  CHECK(inner_product_cell(one, one, Weight::eps).real() == doctest::Approx(area));
  CHECK(norm_cell(one) == doctest::Approx(std::sqrt(area)));
  // The spectral x1 derivative of a constant vanishes.
  CHECK(std::abs(inner_product_cell(one, one, Weight::d_x1)) < 1e-12);

  // A pure order-m profile differentiates to the exact eigenvalue i m.
  cdv um(disc.n_dof());
  const int m = 3;
  for (int l = 0; l <= g.n2; ++l)
    for (int j = 0; j < g.n1; ++j)
      um[static_cast<long>(l) * g.n1 + j] = std::exp(cd(0.0, m * (-pi + j * disc.h1())));
  FieldSolution fm = disc.wrap_field(um);
  const cd dxx = inner_product_cell(fm, fm, Weight::d_x1);
  CHECK(dxx.real() == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(dxx.imag() == doctest::Approx(m * area));
}

TEST_CASE("interface integral matches a finite difference in delta") {
  // (d eps/d delta u, v) over the strip is realized as a line integral along
  // the inclusion boundary.  Compare against the difference quotient of the
  // cell integral (eps_delta u, v) evaluated by dense quadrature.
  StructureSpec s = make_scaled_circle(0.1, 10.0, 1.0, 1.2);
  Grid g{96, 96};
  Discretization disc(s, g, 0.3, 0.75);
  // Smooth test fields so the quadrature error is dominated by the eps step.
  cdv uv(disc.n_dof()), vv(disc.n_dof());
  for (int l = 0; l <= g.n2; ++l)
    for (int j = 0; j < g.n1; ++j) {
      const double x1 = -pi + j * disc.h1(), x2 = -s.d0 + l * disc.h2();
      uv[static_cast<long>(l) * g.n1 + j] = std::exp(cd(0.0, x1)) * std::cos(0.3 * x2);
      vv[static_cast<long>(l) * g.n1 + j] = std::exp(cd(0.0, -0.5 * x1 * x1)) + 0.2 * x2;
    }
  FieldSolution u = disc.wrap_field(uv), v = disc.wrap_field(vv);
  const cd line = inner_product_cell(u, v, Weight::d_eps);

  // Difference quotient of int eps(delta) u conj(v): only the thin annulus
  // between the two boundaries contributes, integrated exactly in polar
  // coordinates (tau x 4-point radial rule) with the analytic fields.
  auto fields = [](double x1, double x2) {
    const cd uu = std::exp(cd(0.0, x1)) * std::cos(0.3 * x2);
    const cd vvq = std::exp(cd(0.0, -0.5 * x1 * x1)) + 0.2 * x2;
    return uu * std::conj(vvq);
  };
  const double dq = 1e-4;
  const int ntau = 4096;
  cd fd = 0.0;
  for (int i = 0; i < ntau; ++i) {
    const double tau = (i + 0.5) * 2.0 * pi / ntau;
    const double r_lo = boundary_radius(with_delta(s, 0.1 - dq), tau);
    const double r_hi = boundary_radius(with_delta(s, 0.1 + dq), tau);
    cd rad = 0.0;
    for (int q = 0; q < 4; ++q) {
      const double rho = r_lo + (q + 0.5) * (r_hi - r_lo) / 4.0;
      rad += fields(rho * std::cos(tau), rho * std::sin(tau)) * rho * (r_hi - r_lo) / 4.0;
    }
    fd += (10.0 - 1.0) * rad * (2.0 * pi / ntau) / (2.0 * dq);
  }
  CHECK(std::abs(line - fd) < 1e-2 * std::abs(fd));
}

TEST_CASE("tail corrections complete the strip integrals") {
  // For a field that is a pure decaying exponential in the exterior, the
  // closed-form tail integral must match a brute-force continuation sum.
  StructureSpec s = make_circle_array(10.0, 1.0, 0.6 * pi);
  Grid g{64, 64};
  Discretization disc(s, g, 0.3, 0.45);
  // Use a physically meaningful decaying field: the scattering solution with
  // the propagating content subtracted would still radiate, so instead take
  // the solve itself and compare omega minus cell against a dense exterior
  // quadrature of its modal expansion.
  cdv e = cdv::Zero(2);
  e[0] = 1.0;
  FieldSolution u = disc.solve_scattering(e);
  const cd cell = inner_product_cell(u, u, Weight::eps);
  const cd omega = inner_product_omega(u, u, Weight::eps);
  const cd tails = omega - cell;

  // Brute force: integrate |sum_m c_m exp(i alpha_m t) phi_m|^2 over both
  // exterior half-planes, skipping the non-decaying propagating pieces just
  // like the closed form does.
  cd brute = 0.0;
  const double T = 60.0, ht = 1e-3;
  for (int side = 0; side < 2; ++side) {
    const cdv& out = side == 0 ? u.out_up : u.out_dn;
    for (long r = 0; r < out.size(); ++r) {
      const cd al = u.alpha_ret[r];
      if (std::abs(out[r]) == 0.0) continue;
      if (al.imag() <= 1e-14) continue;  // propagating: excluded from the tails
      // int_0^inf |c|^2 exp(-2 Im alpha t) dt, times ||phi_m||^2 = 1 in x1.
      cd acc = 0.0;
      for (double t = 0.5 * ht; t < T; t += ht)
        acc += std::norm(out[r] * std::exp(cd(0.0, 1.0) * al * t)) * ht;
      brute += acc;
    }
  }
  CHECK(std::abs(tails - brute) < 1e-6 * std::abs(cell));
}
