#include "bicscat/geometry.hpp"

#include <cmath>

namespace bicscat {

namespace {

void check_common(const StructureSpec& s) {
  // The exterior must be vacuum: the channel wavenumbers, the transparent
  // boundary rows and the analytic tail integrals all assume eps = 1 outside
  // the strip, so any other background would silently be wrong physics.
  if (s.eps0 != 1.0)
    fail(ErrorCode::invalid_parameter, "background permittivity eps0 must be exactly 1");
  if (!(s.eps1 > 0.0)) fail(ErrorCode::invalid_parameter, "eps1 must be positive");
  if (!(s.radius > 0.0)) fail(ErrorCode::invalid_parameter, "radius must be positive");
  if (!(s.d0 > 0.0)) fail(ErrorCode::invalid_parameter, "d0 must be positive");
}

// Gaussian bump profile of the perturbed family, as a function of the polar
// angle tau in [0, 2*pi).  Centered at tau = pi, even around it, and smaller
// than 1e-42 at the wrap-around point, so the boundary is smooth and periodic
// to machine precision.
inline double bump(double tau) {
  const double t = tau - pi;
  return std::exp(-10.0 * t * t);
}

}  // namespace

int StructureSpec::n_params() const {
  switch (family) {
    case Family::circle_array: return 0;
    case Family::perturbed_circle: return 1;
    case Family::scaled_circle: return 1;
    case Family::shifted_circle: return 1;
  }
  return 0;
}

bool StructureSpec::symmetric_x1() const {
  if (family == Family::perturbed_circle) return delta0() == 0.0;
  return true;
}

bool StructureSpec::symmetric_x2() const {
  if (family == Family::shifted_circle) return delta0() == 0.0;
  return true;
}

void validate(const StructureSpec& s) {
  check_common(s);
  if (static_cast<int>(s.delta.size()) != s.n_params())
    fail(ErrorCode::invalid_parameter, "delta has wrong dimension for this family");
  for (double d : s.delta) {
    if (!(std::abs(d) <= delta_max))
      fail(ErrorCode::invalid_parameter, "shape parameter outside validated range |delta| <= 0.5");
  }
  if (s.family == Family::shifted_circle) {
    // The offset is an absolute length; the origin must stay well inside the
    // disk so the boundary remains a radial graph around it.
    for (double d : s.delta) {
      if (!(std::abs(d) <= 0.5 * s.radius))
        fail(ErrorCode::invalid_parameter, "offset must satisfy |delta| <= radius / 2");
    }
  }
  // Largest boundary extent must stay inside the cell so the structure is
  // genuinely confined to |x2| < d0 and does not touch the x1 period edges.
  const double rmax = s.family == Family::shifted_circle
                          ? s.radius + std::min(delta_max, 0.5 * s.radius)
                          : s.radius * (1.0 + (s.n_params() ? delta_max : 0.0));
  if (!(rmax < s.d0) || !(rmax < pi))
    fail(ErrorCode::invalid_parameter, "inclusion is not confined to the computational cell");
}

StructureSpec make_circle_array(double eps1, double eps0, double radius, double d0) {
  StructureSpec s;
  s.family = Family::circle_array;
  s.eps0 = eps0;
  s.eps1 = eps1;
  s.radius = radius;
  s.d0 = d0;
  validate(s);
  return s;
}

StructureSpec make_perturbed_circle(double delta, double eps1, double eps0, double radius,
                                    double d0) {
  StructureSpec s;
  s.family = Family::perturbed_circle;
  s.eps0 = eps0;
  s.eps1 = eps1;
  s.radius = radius;
  s.d0 = d0;
  s.delta = {delta};
  validate(s);
  return s;
}

StructureSpec make_scaled_circle(double delta, double eps1, double eps0, double radius, double d0) {
  StructureSpec s;
  s.family = Family::scaled_circle;
  s.eps0 = eps0;
  s.eps1 = eps1;
  s.radius = radius;
  s.d0 = d0;
  s.delta = {delta};
  validate(s);
  return s;
}

StructureSpec make_shifted_circle(double delta, double eps1, double eps0, double radius,
                                  double d0) {
  StructureSpec s;
  s.family = Family::shifted_circle;
  s.eps0 = eps0;
  s.eps1 = eps1;
  s.radius = radius;
  s.d0 = d0;
  s.delta = {delta};
  validate(s);
  return s;
}

StructureSpec with_delta(const StructureSpec& s, double delta) {
  StructureSpec out = s;
  if (out.n_params() == 0) {
    if (delta != 0.0) fail(ErrorCode::invalid_parameter, "family has no shape parameter");
    return out;
  }
  out.delta.assign(1, delta);
  validate(out);
  return out;
}

StructureSpec with_delta(const StructureSpec& s, const std::vector<double>& delta) {
  if (static_cast<int>(delta.size()) != s.n_params())
    fail(ErrorCode::invalid_parameter, "delta has wrong dimension for this family");
  StructureSpec out = s;
  out.delta = delta;
  validate(out);
  return out;
}

double boundary_radius(const StructureSpec& s, double tau) {
  switch (s.family) {
    case Family::circle_array: return s.radius;
    case Family::perturbed_circle: return s.radius * (1.0 + s.delta0() * bump(tau));
    case Family::scaled_circle: return s.radius * (1.0 + s.delta0());
    case Family::shifted_circle: {
      // Radial graph of the circle |p - (0, delta)| = R around the origin.
      const double d = s.delta0(), c = std::cos(tau);
      return d * std::sin(tau) + std::sqrt(s.radius * s.radius - d * d * c * c);
    }
  }
  return s.radius;
}

double boundary_radius_ddelta(const StructureSpec& s, double tau) {
  switch (s.family) {
    case Family::circle_array: return 0.0;
    case Family::perturbed_circle: return s.radius * bump(tau);
    case Family::scaled_circle: return s.radius;
    case Family::shifted_circle: {
      // Implicit derivative of rho^2 - 2 rho delta sin(tau) + delta^2 = R^2.
      const double rho = boundary_radius(s, tau), d = s.delta0(), sn = std::sin(tau);
      return (rho * sn - d) / (rho - d * sn);
    }
  }
  return 0.0;
}

double eval_eps(const StructureSpec& s, double x1, double x2) {
  if (std::abs(x2) >= s.d0) return s.eps0;
  // Reduce x1 into [-pi, pi).
  double x = std::remainder(x1, 2.0 * pi);
  if (x >= pi) x -= 2.0 * pi;
  if (s.family == Family::shifted_circle)
    return std::hypot(x, x2 - s.delta0()) < s.radius ? s.eps1 : s.eps0;
  const double rho = std::hypot(x, x2);
  if (s.family == Family::circle_array || s.family == Family::scaled_circle) {
    // Radius is angle-independent; skip the atan2.
    return rho < boundary_radius(s, 0.0) ? s.eps1 : s.eps0;
  }
  double tau = std::atan2(x2, x);
  if (tau < 0.0) tau += 2.0 * pi;
  return rho < boundary_radius(s, tau) ? s.eps1 : s.eps0;
}

}  // namespace bicscat
