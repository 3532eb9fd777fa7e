#include <doctest.h>

#include "bicscat/channels.hpp"

using namespace bicscat;

TEST_CASE("channel classification and branch") {
  ChannelSet ch = compute_channels(0.3, 0.45, 4);
  REQUIRE(ch.n0() == 1);
  CHECK(ch.prop[0] == 0);
  CHECK(ch.alpha_of(0).real() == doctest::Approx(std::sqrt(0.45 * 0.45 - 0.09)));
  CHECK(ch.alpha_of(0).imag() == 0.0);
  // Evanescent orders sit on the positive imaginary axis.
  for (int m : {-4, -3, -2, -1, 1, 2, 3, 4}) {
    CAPTURE(m);
    CHECK(ch.alpha_of(m).real() == 0.0);
    CHECK(ch.alpha_of(m).imag() > 0.0);
    CHECK(std::abs(ch.alpha_of(m) * ch.alpha_of(m) -
                   cd(0.45 * 0.45 - (m + 0.3) * (m + 0.3), 0.0)) < 1e-14);
    CHECK_FALSE(ch.is_prop(m));
  }

  ChannelSet wide = compute_channels(0.3, 1.5, 6);
  REQUIRE(wide.n0() == 3);
  CHECK(wide.prop == std::vector<int>{-1, 0, 1});
  CHECK(wide.prop_index(-1) == 0);
  CHECK(wide.prop_index(1) == 2);
  CHECK(wide.prop_index(2) == -1);
}

TEST_CASE("channel preconditions") {
  CHECK_THROWS_AS(compute_channels(0.7, 1.0, 4), Error);   // beta outside the zone
  CHECK_THROWS_AS(compute_channels(0.3, 0.2, 4), Error);   // k < |beta|: nothing propagates
  CHECK_THROWS_AS(compute_channels(0.3, 0.3, 4), Error);   // k = |beta|: order 0 at cutoff
  CHECK_THROWS_AS(compute_channels(0.0, 1.0, 4), Error);   // orders +-1 exactly at cutoff
  CHECK_THROWS_AS(compute_channels(-0.5, 0.5, 4), Error);  // order 0 exactly at cutoff
  try {
    compute_channels(0.0, 2.0, 4);
    FAIL("expected a cutoff rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::cutoff_degenerate);
  }
}

TEST_CASE("translation matrices form a one-parameter unitary group") {
  ChannelSet ch = compute_channels(0.3, 1.5, 6);
  const int n = 2 * ch.n0();
  Eigen::MatrixXcd t0 = translation_matrix(ch, 0.0);
  CHECK((t0 - Eigen::MatrixXcd::Identity(n, n)).norm() == 0.0);

  Eigen::MatrixXcd t1 = translation_matrix(ch, 0.7);
  Eigen::MatrixXcd t2 = translation_matrix(ch, 1.1);
  Eigen::MatrixXcd t12 = translation_matrix(ch, 1.8);
  CHECK((t1 * t2 - t12).norm() < 1e-14);
  CHECK((t1 * t1.adjoint() - Eigen::MatrixXcd::Identity(n, n)).norm() < 1e-14);
  // Both boundary blocks carry the same diagonal.
  for (int i = 0; i < ch.n0(); ++i) CHECK(t1(i, i) == t1(ch.n0() + i, ch.n0() + i));
}

TEST_CASE("block swap conjugation is an involution") {
  ChannelSet ch = compute_channels(0.3, 1.5, 6);
  const int n = 2 * ch.n0();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Random(n, n);
  CHECK((permute(permute(m)) - m).norm() == 0.0);
  // Corner blocks swap across the anti-diagonal.
  Eigen::MatrixXcd p = permute(m);
  const int h = ch.n0();
  CHECK((p.topLeftCorner(h, h) - m.bottomRightCorner(h, h)).norm() == 0.0);
  CHECK((p.topRightCorner(h, h) - m.bottomLeftCorner(h, h)).norm() == 0.0);
}
