#pragma once

#include <vector>

#include "bicscat/smatrix.hpp"

namespace bicscat {

// Largest admissible propagating trace content of a numerically computed
// bound field: the minimal singular vector must carry essentially no
// incoming/outgoing amplitude to qualify as a trapped mode.
inline constexpr double tol_bic = 1e-4;

struct BicFieldResult {
  FieldSolution field;     // unit L2 norm over the strip, a = 0
  double sigma_min = 0.0;  // two smallest singular values of the system matrix
  double sigma_next = 0.0;
  double b_norm = 0.0;     // propagating outgoing content of the null field
};

// Near-null field of the homogeneous scattering problem at a localized bound
// state.  Fails with not-a-bic when the smallest singular value is not
// separated from the next by a factor >= 10, or when the null field radiates
// more than tol_bic.
BicFieldResult bic_field(const Discretization& disc);
BicFieldResult bic_field(const StructureSpec& spec, double beta, const std::vector<double>& delta,
                         double k, Grid grid);

// ---------------------------------------------------------------------------
// First-order parameter derivatives of the bound-state branch.

struct FrequencyDerivs {
  double dk_dbeta = 0.0;
  std::vector<double> dk_ddelta;  // one entry per shape parameter
  double imag_residual = 0.0;     // largest relative imaginary part of the ratios
};

// Analytic derivative formulas evaluated on the bound field (inner products
// over the full domain, with analytic tail corrections):
//
//   dk/dbeta  = -[i (d_x1 u, u) - beta (u, u)] / [k (eps u, u)]
//   dk/ddelta = -k (d_eps u, u) / [2 (eps u, u)]
FrequencyDerivs frequency_derivatives(const FieldSolution& u_star);

struct CoeffDerivs {
  Eigen::VectorXcd da_dbeta;   // 2N0
  Eigen::MatrixXcd da_ddelta;  // 2N0 x N1
  Eigen::MatrixXcd xi;         // 2N0 x (1+N1), independent of the matrix M
  Eigen::MatrixXcd s0;         // scattering matrix at the point (frequency-averaged)
};

// Derivatives of the incident coefficient vector of the scattering branch
// through the bound state:
//
//   da/dX = (S0 - M)^{-1} xi,   xi columns built from inner products of the
//   bound field against the adjoint channel fields v_hat (one adjoint solve
//   per channel, canonically gauged so (eps u*, v_hat) = 0).
//
// M must keep S0 - M well-conditioned; e^{i phase} I with phase off the
// eigenphases of S0 is the usual choice.  Fails with inadmissible-m
// otherwise.
CoeffDerivs coefficient_derivatives(const Discretization& disc, const FieldSolution& u_star,
                                    const FrequencyDerivs& fd, const Eigen::MatrixXcd& M);

// ---------------------------------------------------------------------------
// Sufficient-condition determinants.

// Builds the case-j test matrix from xi:
//   mu1 = [Re xi; Im xi]   mu2 = xi   mu3 = [Re(L xi); Im(L xi)]   mu4 = L xi
// with L = [I, C I]/2 and C the x2-mirror parity of the bound field.  The
// determinant is returned as a complex number (real-matrix cases carry a
// zero imaginary part); index_prediction is the determinant's sign when it
// is meaningfully nonzero, else 0.
struct DerivativeReport {
  FrequencyDerivs freq;
  Eigen::VectorXcd da_dbeta;
  Eigen::MatrixXcd da_ddelta;
  Eigen::MatrixXcd xi;
  int mu_case = 0;
  cd mu_det;
  double mu_scale = 0.0;  // Hadamard bound of the mu matrix, for relative tests
  int index_prediction = 0;
  int C = 0;              // x2-mirror parity of the field (0 when unused)
  double sigma_min = 0.0;
  double sigma_next = 0.0;
  double b_norm = 0.0;
};

// x2-mirror parity of a grid field: +1/-1 when u(x1,-x2) = +-u within 1e-3
// relative; fails otherwise.
int mirror_parity_x2(const FieldSolution& u);

DerivativeReport derivative_report(const StructureSpec& spec, double beta,
                                   const std::vector<double>& delta, double k, Grid grid,
                                   int mu_case, double m_phase = 0.5 * pi);

}  // namespace bicscat
