#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>

#include "bicscat/channels.hpp"
#include "bicscat/geometry.hpp"
#include "bicscat/types.hpp"

namespace bicscat {

// Uniform tensor grid over the computational cell (-pi, pi) x (-d0, d0):
// n1 nodes along x1 (periodic, x1_j = -pi + j h1) and n2+1 nodes along x2
// (x2_l = -d0 + l h2, both boundaries included).
struct Grid {
  int n1 = 128;
  int n2 = 128;
};

// Permittivity sampled at the grid nodes with 4x4 subcell averaging: each
// node value is the mean of eps over the h1 x h2 cell centered at the node,
// sampled at the 16 subcell midpoints.  Cut cells therefore carry an
// area-fraction average, which restores second-order accuracy of the scheme
// at the material interface.  Shape: n1 rows x (n2+1) columns.
Eigen::ArrayXXd sample_eps_grid(const StructureSpec& s, Grid g);

// One scattering or adjoint solution on the strip, together with the data
// needed to extend it into the vacuum half-planes.
//
// Coefficient conventions: `a` and `b` are the incident/outgoing coefficient
// vectors over the propagating channels (upper-boundary block first, then
// lower, ascending order m), in the boundary-referenced convention in which
// an empty cell has the exact anti-diagonal scattering matrix
// diag pairs exp(2 i alpha_m d0).  Internally the discrete medium carries a
// slightly different numerical dispersion; the per-channel phase factor
// `comp` below re-references the discrete amplitudes to the continuum ones
// (see Discretization).
//
// `inc`/`out` hold the exterior modal function coefficients of the discrete
// field per retained order r (order m = r - n1/2): the order-m component of
// the field beyond a boundary is  out[r] e^{i alpha_m t} + inc[r] e^{-i alpha_m t}
// with t >= 0 the outward distance from that boundary.  Evanescent orders
// have inc = 0.  These feed the analytic tail integrals below.
struct FieldSolution {
  StructureSpec structure;
  Grid grid;
  double beta = 0.0;
  double k = 0.0;

  Eigen::VectorXcd u;  // nodal values, index l * n1 + j

  Eigen::VectorXcd a, b;  // size 2 n0

  Eigen::VectorXcd alpha_ret;          // continuum alpha_m per retained order
  Eigen::VectorXcd inc_up, out_up;     // upper boundary (x2 = +d0)
  Eigen::VectorXcd inc_dn, out_dn;     // lower boundary (x2 = -d0)

  std::shared_ptr<const Eigen::ArrayXXd> eps;  // subcell-averaged grid used in assembly

  int n1() const { return grid.n1; }
  int n2() const { return grid.n2; }
  double d0() const { return structure.d0; }
};

enum class Weight { one, eps, d_eps, d_x1 };

// Sesquilinear inner products (conjugate-linear in v), both fields on the
// same grid and parameter point.
//
//   one    (u, v)
//   eps    (eps u, v)
//   d_eps  (d eps / d delta * u, v), evaluated as a line integral over the
//          inclusion boundary (the parameter derivative of the permittivity
//          is a surface measure on the interface)
//   d_x1   (du/dx1, v), with the x1 derivative taken spectrally
//
// inner_product_cell integrates over the strip only (trapezoid in x2,
// periodic rectangle in x1).  inner_product_omega adds the closed-form tail
// integrals over both vacuum half-planes from the modal data; products of two
// propagating components are not integrable over the tails and are skipped,
// so the omega variant is meant for bound or nearly bound fields whose
// propagating content is negligible.
cd inner_product_cell(const FieldSolution& u, const FieldSolution& v, Weight w);
cd inner_product_omega(const FieldSolution& u, const FieldSolution& v, Weight w);

// sqrt((u, u)) over the strip.
double norm_cell(const FieldSolution& u);

// Multiplies every linear component of the solution (nodal values, channel
// coefficients, exterior modal coefficients) by c.
void scale_field(FieldSolution& f, cd c);

// y += c * x over every linear component; both fields must share the grid
// and parameter point.
void axpy_field(FieldSolution& y, cd c, const FieldSolution& x);

// Assembled discrete operator at one parameter point (structure, beta, k):
// second-order finite differences on the tensor grid with the quasi-momentum
// carried by phase factors exp(+-i beta h1) on the x1 neighbor couplings (so
// the discrete x1 symbol is exactly (4/h1^2) sin^2((m+beta) h1/2)), closed at
// x2 = +-d0 by Fourier-diagonal transparent boundary rows over all n1
// retained orders.
//
// The boundary impedances use the dispersion-matched discrete wavenumbers
// alpha~_m solving
//
//   (4/h2^2) sin^2(alpha~ h2 / 2) = k^2 - (4/h1^2) sin^2((m+beta) h1/2),
//
// so a discrete outgoing wave is absorbed exactly and an empty cell produces
// zero spurious reflection at any resolution.  Reported coefficients are
// re-referenced to continuum phases by comp_m = exp(-i(alpha~_m - alpha_m) d0)
// per propagating channel, which makes the empty-cell scattering matrix and
// the analytic boundary-translation identity exact to rounding.
//
// The stored matrix is the (quadrature-weighted) matrix of the discrete
// sesquilinear form, so its conjugate transpose is the discrete adjoint
// operator; solve_adjoint factors that transpose.
class Discretization {
public:
  Discretization(const StructureSpec& s, Grid g, double beta, double k);
  Discretization(const StructureSpec& s, Grid g, double beta, double k,
                 std::shared_ptr<const Eigen::ArrayXXd> eps_grid);

  const StructureSpec& structure() const { return spec_; }
  Grid grid() const { return grid_; }
  double beta() const { return beta_; }
  double k() const { return k_; }
  double d0() const { return spec_.d0; }
  double h1() const { return 2.0 * pi / grid_.n1; }
  double h2() const { return 2.0 * spec_.d0 / grid_.n2; }
  int n_dof() const { return grid_.n1 * (grid_.n2 + 1); }
  const ChannelSet& channels() const { return channels_; }
  std::shared_ptr<const Eigen::ArrayXXd> eps_grid() const { return eps_; }
  const Eigen::SparseMatrix<cd>& matrix() const { return A_; }

  // Retained-order data (index r = 0..n1-1, order m = r - n1/2).
  int order_of(int r) const { return r - grid_.n1 / 2; }
  cd alpha_cont(int r) const { return alpha_cont_[r]; }       // continuum alpha_m
  cd alpha_disc(int r) const { return alpha_disc_[r]; }       // matched discrete alpha~_m
  double lambda_disc(int r) const { return lambda_[r]; }      // sin(alpha~ h2)/h2 (propagating)
  cd comp(int r) const { return comp_[r]; }                   // phase re-reference factor

  // Solve with prescribed incident coefficients a (size 2 n0).
  FieldSolution solve_scattering(const Eigen::VectorXcd& a) const;

  // Solve the adjoint problem with prescribed outgoing coefficients b
  // (size 2 n0); the returned field has exactly those outgoing amplitudes.
  FieldSolution solve_adjoint(const Eigen::VectorXcd& b) const;

  // Forward solve with an arbitrary (form-weighted) right-hand side, no
  // incident wave; returns the nodal values.  Exposed for custom volume
  // sources and for testing the adjoint representation of the outgoing
  // coefficient functionals.
  Eigen::VectorXcd solve_raw(const Eigen::VectorXcd& f) const;

  // Modal coefficients of the boundary trace of nodal values (all n1
  // retained orders, index r).
  Eigen::VectorXcd boundary_coeffs(const Eigen::VectorXcd& u, bool upper) const;

  // Wrap arbitrary nodal values as a FieldSolution with a = 0 (all
  // propagating trace content counted as outgoing).  Used for null vectors of
  // the homogeneous system.
  FieldSolution wrap_field(const Eigen::VectorXcd& u) const;

  // Two smallest singular values of the system matrix and the right singular
  // vector of the smallest, via subspace iteration on the inverse normal
  // operator.  Deterministic (fixed seed).
  struct SingularData {
    double sigma_min = 0.0;
    double sigma_next = 0.0;
    Eigen::VectorXcd v;
  };
  SingularData smallest_singular(int iters = 40) const;

private:
  void build();
  void factor_forward() const;
  void factor_adjoint() const;
  FieldSolution make_solution(const Eigen::VectorXcd& u, const Eigen::VectorXcd& a_raw_up,
                              const Eigen::VectorXcd& a_raw_dn, bool adjoint_mode,
                              const Eigen::VectorXcd& b_user) const;

  StructureSpec spec_;
  Grid grid_;
  double beta_, k_;
  ChannelSet channels_;
  std::shared_ptr<const Eigen::ArrayXXd> eps_;

  std::vector<cd> alpha_cont_, alpha_disc_, comp_;
  std::vector<double> lambda_;  // matched impedance factor per retained order
  std::vector<cd> Lambda_;      // boundary impedance i sin(alpha~ h2)/h2

  Eigen::MatrixXcd ana_;  // trace -> modal coefficients (rows r, cols j)
  Eigen::MatrixXcd syn_;  // modal -> nodal synthesis (rows j, cols r)

  Eigen::SparseMatrix<cd> A_;
  mutable std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<cd>>> lu_;
  mutable std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<cd>>> lu_adj_;
};

}  // namespace bicscat
