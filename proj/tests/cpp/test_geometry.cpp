#include <doctest.h>

#include "bicscat/geometry.hpp"

using namespace bicscat;

TEST_CASE("family metadata") {
  StructureSpec circle = make_circle_array();
  CHECK(circle.n_params() == 0);
  CHECK(circle.symmetric_x1());
  CHECK(circle.symmetric_x2());

  StructureSpec pert = make_perturbed_circle(0.3);
  CHECK(pert.n_params() == 1);
  CHECK_FALSE(pert.symmetric_x1());  // bump sits at polar angle pi, off the mirror axis pair
  CHECK(pert.symmetric_x2());
  CHECK(make_perturbed_circle(0.0).symmetric_x1());  // symmetry restored at delta = 0

  StructureSpec scaled = make_scaled_circle(0.2);
  CHECK(scaled.n_params() == 1);
  CHECK(scaled.symmetric_x1());
  CHECK(scaled.symmetric_x2());
}

TEST_CASE("validation rejects out-of-range specs") {
  CHECK_THROWS_AS(make_circle_array(10.0, 1.0, pi), Error);        // disk touches the boundary
  CHECK_THROWS_AS(make_circle_array(10.0, 1.0, -0.5), Error);      // negative radius
  CHECK_THROWS_AS(make_circle_array(10.0, 2.0), Error);            // background must be vacuum
  CHECK_THROWS_AS(make_scaled_circle(0.9), Error);                 // |delta| beyond delta_max
  CHECK_THROWS_AS(with_delta(make_scaled_circle(0.0), 0.9), Error);

  StructureSpec s = with_delta(make_scaled_circle(0.0), 0.25);
  CHECK(s.delta0() == doctest::Approx(0.25));
  CHECK_THROWS_AS(with_delta(make_circle_array(), std::vector<double>{0.1}), Error);
}

TEST_CASE("pointwise permittivity") {
  StructureSpec s = make_circle_array(10.0, 1.0, 0.6 * pi);
  CHECK(eval_eps(s, 0.0, 0.0) == doctest::Approx(10.0));
  CHECK(eval_eps(s, 0.6 * pi - 1e-6, 0.0) == doctest::Approx(10.0));
  CHECK(eval_eps(s, 0.6 * pi + 1e-6, 0.0) == doctest::Approx(1.0));
  CHECK(eval_eps(s, 3.0, 2.9) == doctest::Approx(1.0));
  // Periodic in x1, vacuum beyond the strip.
  CHECK(eval_eps(s, 0.5 + 2.0 * pi, 0.3) == doctest::Approx(eval_eps(s, 0.5, 0.3)));
  CHECK(eval_eps(s, 0.0, s.d0 + 0.1) == doctest::Approx(1.0));
}

TEST_CASE("boundary radius and its parameter derivative") {
  StructureSpec scaled = make_scaled_circle(0.2, 10.0, 1.0, 1.5);
  for (double tau : {0.0, 1.0, 4.0}) {
    CHECK(boundary_radius(scaled, tau) == doctest::Approx(1.5 * 1.2));
    CHECK(boundary_radius_ddelta(scaled, tau) == doctest::Approx(1.5));
  }

  StructureSpec pert = make_perturbed_circle(0.3, 10.0, 1.0, 1.5);
  // The bump peaks at tau = pi and decays fast away from it.
  CHECK(boundary_radius(pert, pi) == doctest::Approx(1.5 * 1.3));
  CHECK(boundary_radius_ddelta(pert, pi) == doctest::Approx(1.5));
  CHECK(boundary_radius(pert, 0.0) == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(std::abs(boundary_radius_ddelta(pert, 0.0)) < 1e-9);

  // eval_eps agrees with the boundary radius on a ray.
  const double tau = 2.8;
  const double rb = boundary_radius(pert, tau);
  CHECK(eval_eps(pert, (rb - 1e-6) * std::cos(tau), (rb - 1e-6) * std::sin(tau)) ==
        doctest::Approx(10.0));
  CHECK(eval_eps(pert, (rb + 1e-6) * std::cos(tau), (rb + 1e-6) * std::sin(tau)) ==
        doctest::Approx(1.0));

  // Finite differences of the boundary radius recover the analytic derivative.
  const double h = 1e-6;
  const double fd = (boundary_radius(with_delta(pert, 0.3 + h), tau) -
                     boundary_radius(with_delta(pert, 0.3 - h), tau)) /
                    (2.0 * h);
  CHECK(fd == doctest::Approx(boundary_radius_ddelta(pert, tau)).epsilon(1e-6));
}
