#pragma once

#include <vector>

#include "bicscat/solver.hpp"

namespace bicscat {

// Scattering matrix at one parameter point, ordered like the coefficient
// vectors (upper-boundary block first, then lower, ascending order m within
// each block).  Column c is the outgoing response to a unit incident wave in
// channel c.  The defect norms are Frobenius norms; the transpose defect is
// meaningful when the structure has the x1 mirror symmetry, the block-swap
// (persymmetry) defect when it has the x2 mirror symmetry.
struct ScatteringMatrix {
  Eigen::MatrixXcd s;
  double beta = 0.0;
  double k = 0.0;
  std::vector<double> delta;
  ChannelSet channels;
  double unitarity_defect = 0.0;
  double sym_t_defect = 0.0;
  double sym_p_defect = 0.0;
  bool symmetric_x1 = false;
  bool symmetric_x2 = false;
};

ScatteringMatrix scattering_matrix(const Discretization& disc);
ScatteringMatrix scattering_matrix(const StructureSpec& spec, Grid grid, double beta,
                                   const std::vector<double>& delta, double k);

// Re-references S to boundaries at distance d1 from the axis instead of d0:
// S_{d1} = T(d0 - d1) S T(d0 - d1) with the diagonal translation matrix T.
Eigen::MatrixXcd translate_smatrix(const Eigen::MatrixXcd& s, const ChannelSet& ch, double d0,
                                   double d1);

// ---------------------------------------------------------------------------
// Eigenvalue tracking in k.

struct EigTrackOptions {
  double tol_phase = 1e-10;  // stop when |lambda - e^{i theta}| <= tol_phase
  int max_iter = 60;
  double rel_step = 1e-4;    // second secant seed k_seed * (1 + rel_step)
  double tol_gap = 1e-3;     // angular gap below which branch identity is ambiguous
  // 0: track eigenvalues of the full S.  +-1: restrict to the block-swap
  // parity sector S11 + C S12 (needs the x2 mirror symmetry).  Near a narrow
  // resonance the sector restriction is what makes tracking reliable: the
  // other sector's smooth background phases cannot shadow the resonant sweep.
  int sector = 0;
  // Optional pre-sampled permittivity grid (must match spec+delta+grid).
  std::shared_ptr<const Eigen::ArrayXXd> eps_grid;
};

struct EigTrackResult {
  double k_star = 0.0;
  cd lambda;                 // tracked eigenvalue at k_star
  Eigen::VectorXcd eigvec;   // unit eigenvector of the tracked branch
  int iterations = 0;
  ScatteringMatrix smat;     // scattering matrix at k_star
  std::shared_ptr<const Discretization> disc;  // factored operator at k_star
};

// Finds k_star near k_seed where an eigenvalue branch of S(k) crosses
// e^{i theta}.  Every candidate branch at the seed (at most the four with
// phases nearest theta) is continued by maximal eigenvector overlap and
// iterated to its own crossing by a secant on the principal phase
// arg(lambda e^{-i theta}); the branch whose crossing lies nearest k_seed
// wins.  A narrow resonance therefore beats any smooth background branch
// whenever the seed is closer to the resonance than to the background
// crossing.
EigTrackResult eig_track(const StructureSpec& spec, Grid grid, double beta,
                         const std::vector<double>& delta, double k_seed, double theta,
                         const EigTrackOptions& opts = {});

// ---------------------------------------------------------------------------
// Symmetry-adapted eigendecomposition.

enum class DecomposeMode { case2_real, case3_persym, case4_both };

struct SymmetricEigenpair {
  cd lambda;
  Eigen::VectorXcd vec;  // unit eigenvector; real after realization where applicable
  int parity = 0;        // +1/-1 under the block swap R (case3/case4), else 0
};

// Eigendecomposition of a (numerically) unitary S with the structure implied
// by mode.  For case3/case4, only eigenpairs whose eigenvector satisfies
// R v = C v are returned (C = +1 or -1); for case2 all pairs are returned and
// C is ignored.  For case2/case4 each eigenvector is rotated by the global
// phase -arg(v^T v)/2, which makes it real (up to tol) when S is symmetric
// unitary and the eigenvalue is simple.
std::vector<SymmetricEigenpair> eig_decompose_symmetric(const ScatteringMatrix& S,
                                                        DecomposeMode mode, int C);

}  // namespace bicscat
