#include <doctest.h>

#include "bicscat/smatrix.hpp"

using namespace bicscat;

TEST_CASE("scattering matrix reports defects and symmetry flags") {
  StructureSpec s = make_circle_array(10.0, 1.0, 0.6 * pi);
  ScatteringMatrix sm = scattering_matrix(s, Grid{48, 48}, 0.25, {}, 0.8);
  CHECK(sm.channels.n0() == 2);
  CHECK(sm.s.rows() == 4);
  CHECK(sm.symmetric_x1);
  CHECK(sm.symmetric_x2);
  CHECK(sm.unitarity_defect < 1e-12);
  CHECK(sm.sym_t_defect < 1e-12);
  CHECK(sm.sym_p_defect < 1e-12);

  // Breaking the x1 mirror removes the transpose symmetry but keeps the
  // block-swap one.
  StructureSpec p = make_perturbed_circle(0.4);
  ScatteringMatrix sp = scattering_matrix(p, Grid{48, 48}, 0.25, {0.4}, 0.8);
  CHECK_FALSE(sp.symmetric_x1);
  CHECK(sp.symmetric_x2);
  CHECK(sp.unitarity_defect < 1e-12);
  CHECK(sp.sym_t_defect > 1e-6);
  CHECK(sp.sym_p_defect < 1e-12);
}

TEST_CASE("boundary translation identity") {
  // Same structure discretized with two box heights at equal x2 spacing; the
  // diagonal translation re-references one to the other exactly.
  StructureSpec s1 = make_circle_array(10.0, 1.0, 0.6 * pi, pi);
  StructureSpec s2 = make_circle_array(10.0, 1.0, 0.6 * pi, 1.25 * pi);
  ScatteringMatrix a = scattering_matrix(s1, Grid{64, 64}, 0.3, {}, 0.45);
  ScatteringMatrix b = scattering_matrix(s2, Grid{64, 80}, 0.3, {}, 0.45);
  CHECK((translate_smatrix(b.s, b.channels, 1.25 * pi, pi) - a.s).norm() < 1e-11);
  CHECK((translate_smatrix(a.s, a.channels, pi, 1.25 * pi) - b.s).norm() < 1e-11);
  // Translating there and back is the identity.
  Eigen::MatrixXcd round =
      translate_smatrix(translate_smatrix(a.s, a.channels, pi, 2.0), a.channels, 2.0, pi);
  CHECK((round - a.s).norm() < 1e-13);
}

TEST_CASE("eigenvalue tracking hits the analytic vacuum crossing") {
  // Empty cell: eigenvalues are +-exp(2 i alpha d0); the + branch crosses
  // exp(i pi) at alpha = 1/2, i.e. k = sqrt(beta^2 + 1/4).
  StructureSpec vac = make_circle_array(1.0, 1.0, 0.5);
  EigTrackResult tr = eig_track(vac, Grid{32, 32}, 0.3, {}, 0.58, pi);
  CHECK(tr.k_star == doctest::Approx(std::sqrt(0.34)).epsilon(1e-9));
  CHECK(std::abs(tr.lambda - std::polar(1.0, pi)) < 1e-8);
  CHECK(tr.iterations < 60);
  REQUIRE(tr.disc != nullptr);
  CHECK(tr.disc->k() == tr.k_star);
  CHECK(tr.smat.k == tr.k_star);
}

TEST_CASE("eigenvalue tracking converges on the dielectric structure") {
  StructureSpec s = make_circle_array(10.0, 1.0, 0.6 * pi);
  EigTrackResult tr = eig_track(s, Grid{48, 48}, 0.2206, {}, 0.6173, pi);
  CHECK(std::abs(tr.lambda - std::polar(1.0, pi)) < 1e-9);
  CHECK(tr.k_star > 0.55);
  CHECK(tr.k_star < 0.68);
  CHECK(tr.smat.unitarity_defect < 1e-12);
  // The tracked eigenpair really is an eigenpair of the returned matrix.
  CHECK((tr.smat.s * tr.eigvec - tr.lambda * tr.eigvec).norm() < 1e-10);
}

TEST_CASE("persymmetric eigendecomposition splits the swap parities") {
  StructureSpec vac = make_circle_array(1.0, 1.0, 0.5);
  ScatteringMatrix sm = scattering_matrix(vac, Grid{32, 32}, 0.3, {}, 0.45);
  const cd ph = std::exp(cd(0.0, 2.0 * pi) * sm.channels.alpha_of(0));

  auto plus = eig_decompose_symmetric(sm, DecomposeMode::case3_persym, 1);
  REQUIRE(plus.size() == 1);
  CHECK(std::abs(plus[0].lambda - ph) < 1e-12);
  CHECK(plus[0].parity == 1);
  CHECK(std::abs(plus[0].vec[0] - plus[0].vec[1]) < 1e-10);

  auto minus = eig_decompose_symmetric(sm, DecomposeMode::case3_persym, -1);
  REQUIRE(minus.size() == 1);
  CHECK(std::abs(minus[0].lambda + ph) < 1e-12);
  CHECK(minus[0].parity == -1);
  CHECK(std::abs(minus[0].vec[0] + minus[0].vec[1]) < 1e-10);
}

TEST_CASE("realization rotates symmetric-unitary eigenvectors real") {
  // Any S = U diag(phases) U^T with U real orthogonal is symmetric unitary
  // with eigenvectors that admit a real representative.
  Eigen::Matrix2d u;
  const double t = 0.7;
  u << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  Eigen::MatrixXcd s = u.cast<cd>() *
                       Eigen::Vector2cd(std::polar(1.0, 0.3), std::polar(1.0, 1.1)).asDiagonal() *
                       u.transpose().cast<cd>();
  ScatteringMatrix sm;
  sm.s = s;
  auto pairs = eig_decompose_symmetric(sm, DecomposeMode::case2_real, 0);
  REQUIRE(pairs.size() == 2);
  for (const auto& p : pairs) {
    CHECK((s * p.vec - p.lambda * p.vec).norm() < 1e-12);
    CHECK(p.vec.imag().norm() < 1e-8);
    CHECK(p.parity == 0);
  }
}
