#pragma once

#include <vector>

#include "bicscat/types.hpp"

namespace bicscat {

// Dielectric structures periodic in x1 (period 2*pi) and confined to the
// strip |x2| < d0.  The permittivity equals eps0 (vacuum) outside the
// inclusions and eps1 inside.  All shipped families are penetrable disks
// centered at the origin of the unit cell (-pi, pi) x (-d0, d0):
//
//   circle_array     fixed disk of radius `radius`; no shape parameters.
//   perturbed_circle disk whose boundary radius is modulated by a Gaussian
//                    bump of size delta[0] centered at polar angle pi
//                    (the -x1 direction).  Mirror-symmetric in x2 for every
//                    delta; the x1 mirror symmetry is broken once delta != 0.
//   scaled_circle    disk of radius radius*(1 + delta[0]); keeps both mirror
//                    symmetries.
//   shifted_circle   disk displaced to center (0, delta[0]); keeps the x1
//                    mirror for every delta, breaks the x2 mirror once
//                    delta != 0 (the complement of perturbed_circle).
enum class Family { circle_array, perturbed_circle, scaled_circle, shifted_circle };

struct StructureSpec {
  Family family = Family::circle_array;
  double eps0 = 1.0;
  double eps1 = 10.0;
  double radius = 0.6 * pi;  // base disk radius
  double d0 = pi;            // half-height of the computational cell
  std::vector<double> delta; // shape parameters, size n_params()

  int n_params() const;        // number of shape parameters (0 or 1)
  bool symmetric_x1() const;   // eps(x1, x2) == eps(-x1, x2)
  bool symmetric_x2() const;   // eps(x1, x2) == eps(x1, -x2)
  double delta0() const { return delta.empty() ? 0.0 : delta[0]; }
};

// Admissible parameter range for the one-parameter families.  Beyond this the
// perturbed boundary could approach the strip edge and the families are not
// validated.
inline constexpr double delta_max = 0.5;

StructureSpec make_circle_array(double eps1 = 10.0, double eps0 = 1.0,
                                double radius = 0.6 * pi, double d0 = pi);
StructureSpec make_perturbed_circle(double delta, double eps1 = 10.0, double eps0 = 1.0,
                                    double radius = 0.6 * pi, double d0 = pi);
StructureSpec make_scaled_circle(double delta, double eps1 = 10.0, double eps0 = 1.0,
                                 double radius = 0.6 * pi, double d0 = pi);
StructureSpec make_shifted_circle(double delta, double eps1 = 10.0, double eps0 = 1.0,
                                  double radius = 0.6 * pi, double d0 = pi);

// Copy of `s` with the shape parameter replaced (validated).
StructureSpec with_delta(const StructureSpec& s, double delta);
StructureSpec with_delta(const StructureSpec& s, const std::vector<double>& delta);

// Throws invalid-parameter if the spec is out of its validated range.
void validate(const StructureSpec& s);

// Pointwise permittivity.  x1 is reduced modulo the period into [-pi, pi);
// returns eps0 whenever |x2| >= d0.
double eval_eps(const StructureSpec& s, double x1, double x2);

// Boundary radius rho_b(tau) of the inclusion and its derivative with respect
// to the shape parameter.  tau is the polar angle measured from the +x1 axis,
// taken in [0, 2*pi).
double boundary_radius(const StructureSpec& s, double tau);
double boundary_radius_ddelta(const StructureSpec& s, double tau);

}  // namespace bicscat
