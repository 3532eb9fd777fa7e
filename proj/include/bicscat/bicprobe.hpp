#pragma once

#include <vector>

#include "bicscat/smatrix.hpp"

namespace bicscat {

// Which symmetry reduction the probe uses.
//
//   II   x1 mirror symmetry only: S = S^T, eigenvectors realizable as real
//        2-vectors; the index D2 counts their rotation around the ring.
//   III  x2 mirror symmetry only: S = R S R, eigenvectors split into the
//        +-1 eigenspaces of the block swap; the index D3 is the winding of
//        the complex scalar a_hat = (a_up + C a_dn)/2.
//   IV   both symmetries, no shape parameter: two samples at beta_c +- r and
//        the sign-based index D4.
enum class ProbeCase { II, III, IV };

// Affine image of the standard sampling circle: sample n sits at
//
//   beta_n  = beta_c  + axx (r cos phi_n) + axy (r sin phi_n) + shift_beta
//   delta_n = delta_c + ayx (r cos phi_n) + ayy (r sin phi_n) + shift_delta
//
// with phi_n = 2 pi n / n_samples.  The identity map gives the standard
// circle of radius r; anisotropic scans (e.g. compressing the beta axis)
// set the diagonal entries.
struct RingMap {
  double axx = 1.0, axy = 0.0;
  double ayx = 0.0, ayy = 1.0;
  double shift_beta = 0.0, shift_delta = 0.0;
};

struct ProbeConfig {
  double beta_c = 0.0;
  double delta_c = 0.0;   // ignored by case IV (no shape parameter)
  double k_seed = 0.0;
  double r = 0.0;
  int n_samples = 0;      // 0 = case default: 24 ring samples, 2 in case IV
  double theta = pi;      // eigenphase to track
  int C = 1;              // block-swap parity, cases III/IV
  RingMap map;
  EigTrackOptions track;
};

struct ProbeSample {
  double beta = 0.0;
  double delta = 0.0;
  double k = 0.0;           // tracked frequency
  Eigen::VectorXcd a;       // aligned eigenvector, scaled with the unit-norm field
  cd a_hat;                 // reduced scalar (cases III/IV; zero in case II)
};

struct ProbeResult {
  ProbeCase which = ProbeCase::III;
  std::vector<ProbeSample> samples;
  std::vector<double> omega;  // per-step angles (cases II/III), size n_samples
  int index = 0;
  double residual = 0.0;      // distance of the angle sum from 2 pi * index
  double max_step = 0.0;      // largest per-step angle magnitude, radians
};

// Residual gate: the accumulated angle must sit within this distance of an
// integer number of turns for the index to be reported.
inline constexpr double tol_residual = 0.05 * 2.0 * pi;

// Aliasing gate on the largest per-step angle: a step near pi is ambiguous
// under the principal branch, so the winding could silently gain or lose a
// turn.  pi/2 leaves a factor-2 margin while tolerating the uneven step
// distribution of rings whose zero sits off-center.
inline constexpr double tol_step = 0.5 * pi;

// Pure index kernels (closed ring, element n_samples wraps to 0).  The index
// is the nearest integer to the accumulated angle over 2 pi; residual is the
// distance from that multiple, max_step the largest per-step magnitude.
int winding_real2(const std::vector<Eigen::Vector2d>& a, double* residual,
                  double* max_step = nullptr);
int winding_complex(const std::vector<cd>& a_hat, double* residual,
                    double* max_step = nullptr);
int sign_index(double a_hat0, double a_hat1);

ProbeResult probe_case2(const StructureSpec& spec, const ProbeConfig& cfg, Grid grid);
ProbeResult probe_case3(const StructureSpec& spec, const ProbeConfig& cfg, Grid grid);
ProbeResult probe_case4(const StructureSpec& spec, const ProbeConfig& cfg, Grid grid);

// Dispatch on cfg fields via the explicit case argument.
ProbeResult run_probe(const StructureSpec& spec, ProbeCase which, const ProbeConfig& cfg,
                      Grid grid);

struct LocalizeResult {
  double beta = 0.0;
  double delta = 0.0;
  double k = 0.0;
  int index = 0;
  double r_final = 0.0;
};

// Refines a detected index carrier: shrinks the sampling radius (case IV:
// halving in place; cases II/III: quadrant subdivision, keeping whichever
// sub-ring retains a nonzero index) until r < r0 * 2^-depth.  Fails with
// not-a-bic when every sub-ring loses the index.
LocalizeResult localize_bic(const StructureSpec& spec, ProbeCase which, const ProbeConfig& cfg,
                            Grid grid, int depth);

}  // namespace bicscat
