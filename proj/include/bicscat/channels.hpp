#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bicscat/types.hpp"

namespace bicscat {

// Diffraction channels of the vacuum half-planes above and below the strip.
// For quasi-momentum beta and frequency k the order-m transverse wavenumber is
//
//   alpha_m = sqrt(k^2 - (m + beta)^2),
//
// with the square-root branch cut along the negative imaginary axis: alpha_m
// is real positive for propagating orders (the set Z0) and positive imaginary
// for evanescent ones.  Scattering vectors are indexed by the propagating
// orders only, upper-boundary block first, then lower, ascending m inside
// each block.
struct ChannelSet {
  double beta = 0.0;
  double k = 0.0;
  int m_trunc = 0;           // orders kept: m = -m_trunc .. m_trunc
  std::vector<int> prop;     // propagating orders, ascending
  std::vector<cd> alpha;     // alpha_m, index m + m_trunc

  int n0() const { return static_cast<int>(prop.size()); }
  cd alpha_of(int m) const { return alpha[static_cast<size_t>(m + m_trunc)]; }
  bool is_prop(int m) const;

  // Position of order m inside the propagating block (0-based), -1 if not
  // propagating.
  int prop_index(int m) const;
};

// Relative cutoff guard: orders with |alpha_m| < tol_cutoff_rel * k are
// rejected as degenerate rather than classified.
inline constexpr double tol_cutoff_rel = 1e-8;

// beta must lie in the first Brillouin zone [-1/2, 1/2), and k > |beta| so at
// least the m = 0 order propagates.
ChannelSet compute_channels(double beta, double k, int m_trunc);

// Diagonal phase matrix accumulated when the reference boundaries are moved
// outward by t: diag(exp(-i alpha_m t)) repeated for both boundary blocks.
// Unitary for real t; T(t1) T(t2) = T(t1 + t2).
Eigen::MatrixXcd translation_matrix(const ChannelSet& ch, double t);

// Conjugation by the block anti-identity R = [[0, I], [I, 0]]: returns R M R.
// Involutive and unitarity-preserving; a structure is mirror-symmetric in x2
// exactly when its scattering matrix S satisfies S = permute(S).
Eigen::MatrixXcd permute(const Eigen::MatrixXcd& m);

}  // namespace bicscat
