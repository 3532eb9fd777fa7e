#include "bicscat/smatrix.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace bicscat {

namespace {
constexpr cd I(0.0, 1.0);

double principal(double phi) {
  while (phi > pi) phi -= 2.0 * pi;
  while (phi <= -pi) phi += 2.0 * pi;
  return phi;
}

double angdist(cd a, cd b) { return std::abs(principal(std::arg(a) - std::arg(b))); }
}  // namespace

ScatteringMatrix scattering_matrix(const Discretization& disc) {
  const int n0 = disc.channels().n0();
  const int n = 2 * n0;
  ScatteringMatrix sm;
  sm.beta = disc.beta();
  sm.k = disc.k();
  sm.delta = disc.structure().delta;
  sm.channels = disc.channels();
  sm.symmetric_x1 = disc.structure().symmetric_x1();
  sm.symmetric_x2 = disc.structure().symmetric_x2();
  sm.s.resize(n, n);
  for (int c = 0; c < n; ++c) {
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(n);
    a[c] = 1.0;
    sm.s.col(c) = disc.solve_scattering(a).b;
  }
  sm.unitarity_defect = (sm.s.adjoint() * sm.s - Eigen::MatrixXcd::Identity(n, n)).norm();
  sm.sym_t_defect = (sm.s - sm.s.transpose()).norm();
  sm.sym_p_defect = (sm.s - permute(sm.s)).norm();
  return sm;
}

ScatteringMatrix scattering_matrix(const StructureSpec& spec, Grid grid, double beta,
                                   const std::vector<double>& delta, double k) {
  Discretization disc(with_delta(spec, delta), grid, beta, k);
  return scattering_matrix(disc);
}

Eigen::MatrixXcd translate_smatrix(const Eigen::MatrixXcd& s, const ChannelSet& ch, double d0,
                                   double d1) {
  const Eigen::MatrixXcd T = translation_matrix(ch, d0 - d1);
  return T * s * T;
}

// ---------------------------------------------------------------------------

namespace {

struct EigState {
  std::shared_ptr<const Discretization> disc;
  ScatteringMatrix smat;
  Eigen::VectorXcd evals;
  Eigen::MatrixXcd evecs;
  int sel = -1;  // tracked eigenvalue index
};

EigState evaluate_point(const StructureSpec& sp, Grid grid, double beta, double k,
                        const std::shared_ptr<const Eigen::ArrayXXd>& eps, int sector) {
  EigState st;
  st.disc = std::make_shared<Discretization>(sp, grid, beta, k, eps);
  st.smat = scattering_matrix(*st.disc);
  if (sector == 0) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(st.smat.s);
    if (es.info() != Eigen::Success)
      fail(ErrorCode::no_convergence, "dense eigendecomposition failed");
    st.evals = es.eigenvalues();
    st.evecs = es.eigenvectors();
  } else {
    const auto pairs = eig_decompose_symmetric(st.smat, DecomposeMode::case3_persym, sector);
    const int n0 = static_cast<int>(pairs.size());
    st.evals.resize(n0);
    st.evecs.resize(st.smat.s.rows(), n0);
    for (int i = 0; i < n0; ++i) {
      st.evals[i] = pairs[static_cast<size_t>(i)].lambda;
      st.evecs.col(i) = pairs[static_cast<size_t>(i)].vec;
    }
  }
  return st;
}

// Continues the tracked eigenvalue by maximal eigenvector overlap with the
// previous iterate.  Raises branch-crossing when the identity is ambiguous.
void select_branch(EigState& st, const Eigen::VectorXcd& prev_vec, double tol_gap) {
  const int n = static_cast<int>(st.evals.size());
  if (prev_vec.size() != st.evecs.rows())
    fail(ErrorCode::branch_crossing, "channel count changed while tracking");
  int best = 0;
  double o_best = -1.0, o_next = -1.0;
  for (int i = 0; i < n; ++i) {
    const double o = std::abs(prev_vec.dot(st.evecs.col(i)));
    if (o > o_best) {
      o_next = o_best;
      o_best = o;
      best = i;
    } else {
      o_next = std::max(o_next, o);
    }
  }
  if (o_best < 0.7 || (n > 1 && o_next > 0.8 * o_best))
    fail(ErrorCode::branch_crossing, "lost the tracked eigenvector between iterates");
  st.sel = best;
  for (int i = 0; i < n; ++i) {
    if (i == st.sel) continue;
    if (angdist(st.evals[i], st.evals[st.sel]) <= tol_gap)
      fail(ErrorCode::branch_crossing, "angular gap to a neighboring eigenvalue collapsed");
  }
}

double phase_error(const EigState& st, double theta) {
  return principal(std::arg(st.evals[st.sel]) - theta);
}

// Crossing prediction from a Moebius model lambda(k) = (a k + b) / (c k + d)
// through the last three samples.  An isolated resonance over a locally
// constant background is exactly of this form, so the prediction homes in on
// a narrow phase sweep that a plain secant would step across without ever
// noticing it; for smooth branches it degrades into an ordinary rational
// extrapolation.  Returns nothing when the fit is degenerate.
std::optional<double> moebius_step(const double* ks, const cd* ls, double theta) {
  const double kc = ks[2];
  const double sc = std::max(std::abs(ks[0] - kc), std::abs(ks[1] - kc));
  if (!(sc > 0.0)) return std::nullopt;
  Eigen::Matrix<cd, 3, 4> M;
  for (int j = 0; j < 3; ++j) {
    const cd x((ks[j] - kc) / sc, 0.0);
    M(j, 0) = x;
    M(j, 1) = cd(1.0);
    M(j, 2) = -ls[j] * x;
    M(j, 3) = -ls[j];
  }
  Eigen::JacobiSVD<Eigen::Matrix<cd, 3, 4>> svd(M, Eigen::ComputeFullV);
  const Eigen::Vector4cd v = svd.matrixV().col(3);
  const cd t = std::exp(I * theta);
  const cd den = v[0] - v[2] * t;
  if (std::abs(den) < 1e-14 * (std::abs(v[0]) + std::abs(v[2]))) return std::nullopt;
  const cd x = (v[3] * t - v[1]) / den;
  if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return std::nullopt;
  // Crossings of a unitary branch are real; a large imaginary part means the
  // model is extrapolating far outside its validity.
  if (std::abs(x.imag()) > 2.0) return std::nullopt;
  return kc + sc * x.real();
}

// Refined branch model: lambda(k) ~ anchor * exp(i c1 (k - ka)) * B(k)/B(ka)
// with a single Blaschke factor B(k) = (k - conj z)/(k - z).  The explicit
// background slope keeps a weak far-away pole identifiable; a bare Moebius fit
// would spend its pole mimicking the slope and lose the resonance.
struct ResonanceFit {
  double c1 = 0.0;
  cd z{0.0, 0.0};
  double ka = 0.0;
  cd anchor{1.0, 0.0};
  double rms = 1e300;
};

cd blaschke(double k, cd z) {
  const cd den(k - z.real(), -z.imag());
  if (std::abs(den) < 1e-300) return cd(1.0);
  return cd(k - z.real(), z.imag()) / den;
}

// Consecutive sample ratios compared against the model as complex numbers, so
// phase wrapping never enters the fit.
double resonance_residuals(const std::vector<double>& ks, const std::vector<cd>& ls, double c1,
                           cd z, std::vector<double>* out) {
  double ss = 0.0;
  size_t m = 0;
  for (size_t j = 0; j + 1 < ks.size(); ++j) {
    const double dk = ks[j + 1] - ks[j];
    if (dk == 0.0) continue;
    const cd U = ls[j + 1] / ls[j];
    const cd V = std::exp(cd(0.0, c1 * dk)) * blaschke(ks[j + 1], z) / blaschke(ks[j], z);
    const cd R = U - V;
    if (out) {
      out->push_back(R.real());
      out->push_back(R.imag());
    }
    ss += std::norm(R);
    m += 2;
  }
  return m ? std::sqrt(ss / static_cast<double>(m)) : 1e300;
}

// Multi-start Levenberg-Marquardt over (slope, pole position, pole width);
// the width is log-parametrized because it spans many orders of magnitude.
ResonanceFit fit_resonance(const std::vector<double>& ks_in, const std::vector<cd>& ls_in) {
  ResonanceFit best;
  std::vector<size_t> idx(ks_in.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return ks_in[a] < ks_in[b]; });
  std::vector<double> ks;
  std::vector<cd> ls;
  for (size_t i : idx)
    if (ks.empty() || ks_in[i] != ks.back()) {
      ks.push_back(ks_in[i]);
      ls.push_back(ls_in[i]);
    }
  if (ks.size() < 4) return best;
  const double span = ks.back() - ks.front();
  if (!(span > 0.0)) return best;
  const double kc = 0.5 * (ks.front() + ks.back());

  // Safe slope estimate from the tightest adjacent pair.
  double slope0 = 0.0, dk_min = std::numeric_limits<double>::infinity();
  for (size_t j = 0; j + 1 < ks.size(); ++j) {
    const double dk = ks[j + 1] - ks[j];
    if (dk > 0.0 && dk < dk_min) {
      dk_min = dk;
      slope0 = std::arg(ls[j + 1] / ls[j]) / dk;
    }
  }

  auto eval = [&](const std::array<double, 3>& p, int sgn, std::vector<double>* r) {
    const cd z(p[1], sgn * span * std::exp(p[2]));
    return resonance_residuals(ks, ls, p[0], z, r);
  };

  for (double q0 : {std::log(30.0), std::log(0.03)})
    for (int sgn : {-1, 1}) {
      std::array<double, 3> p{slope0, kc, q0};
      std::vector<double> r0;
      double f = eval(p, sgn, &r0);
      double lm = 1e-3;
      for (int gn = 0; gn < 15; ++gn) {
        const size_t m = r0.size();
        if (m < 3) break;
        Eigen::MatrixXd J(m, 3);
        Eigen::VectorXd rv(m);
        for (size_t i = 0; i < m; ++i) rv[static_cast<long>(i)] = r0[i];
        const std::array<double, 3> h{1e-7 * (std::abs(p[0]) + 1.0 / span), 1e-7 * span, 1e-7};
        for (int c = 0; c < 3; ++c) {
          std::array<double, 3> pp = p;
          pp[c] += h[c];
          std::vector<double> rp;
          eval(pp, sgn, &rp);
          for (size_t i = 0; i < m; ++i)
            J(static_cast<long>(i), c) = (rp[i] - r0[i]) / h[c];
        }
        const Eigen::Matrix3d JtJ = J.transpose() * J;
        const Eigen::Vector3d Jtr = J.transpose() * rv;
        bool improved = false;
        for (int t = 0; t < 8; ++t) {
          Eigen::Matrix3d M = JtJ;
          M.diagonal() += lm * JtJ.diagonal().cwiseMax(1e-300);
          const Eigen::Vector3d step = M.ldlt().solve(Jtr);
          std::array<double, 3> pn{p[0] - step[0], p[1] - step[1],
                                   std::clamp(p[2] - step[2], std::log(1e-12), std::log(1e3))};
          std::vector<double> rn;
          const double fn = eval(pn, sgn, &rn);
          if (fn < f) {
            p = pn;
            f = fn;
            r0 = std::move(rn);
            lm = std::max(lm * 0.3, 1e-9);
            improved = true;
            break;
          }
          lm *= 8.0;
        }
        if (!improved) break;
      }
      if (f < best.rms) {
        best.rms = f;
        best.c1 = p[0];
        best.z = cd(p[1], sgn * span * std::exp(p[2]));
      }
    }
  // Anchor at the most recent sample so crossing search starts from there.
  best.ka = ks_in.back();
  best.anchor = ls_in.back();
  return best;
}

// Nearest crossing of the fitted model with e^{i theta}.  The model is
// analytic, so dense sampling plus points clustered across the pole at the
// natural tangent spacing costs nothing and cannot step over the sweep the
// way sampling the operator would.
std::optional<double> model_crossing(const ResonanceFit& f, double k_now, double theta) {
  const double x = f.z.real(), w = std::abs(f.z.imag());
  double L = 4.0 * std::abs(k_now - x) + 300.0 * w;
  L = std::clamp(L, 1e-6 * k_now, 0.15 * k_now);
  const double lo = std::max(k_now - L, 1e-8 * k_now), hi = k_now + L;
  if (!(hi > lo)) return std::nullopt;
  std::vector<double> grid;
  grid.reserve(760);
  for (int i = 0; i <= 600; ++i)
    grid.push_back(lo + (hi - lo) * static_cast<double>(i) / 600.0);
  for (int i = 1; i < 128; ++i) {
    const double kk = x + w * std::tan(-1.55 + 3.10 * static_cast<double>(i) / 128.0);
    if (kk > lo && kk < hi) grid.push_back(kk);
  }
  std::sort(grid.begin(), grid.end());
  const cd t = std::exp(cd(0.0, theta));
  auto G = [&](double k) {
    const cd m =
        f.anchor * std::exp(cd(0.0, f.c1 * (k - f.ka))) * blaschke(k, f.z) / blaschke(f.ka, f.z);
    return std::arg(m * std::conj(t));
  };
  std::optional<double> bestk;
  double gprev = G(grid.front());
  for (size_t i = 1; i < grid.size(); ++i) {
    const double gcur = G(grid[i]);
    // A sign change with a small jump is a genuine crossing through zero; a
    // jump near 2 pi is the principal-value wrap at +-pi.
    if ((gprev <= 0.0) != (gcur <= 0.0) && std::abs(gcur - gprev) < pi) {
      double a = grid[i - 1], b = grid[i], ga = gprev;
      for (int it = 0; it < 90 && b > a; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const double gm = G(mid);
        if ((ga <= 0.0) == (gm <= 0.0)) {
          a = mid;
          ga = gm;
        } else {
          b = mid;
        }
      }
      const double root = 0.5 * (a + b);
      if (!bestk || std::abs(root - k_now) < std::abs(*bestk - k_now)) bestk = root;
    }
    gprev = gcur;
  }
  return bestk;
}

}  // namespace

EigTrackResult eig_track(const StructureSpec& spec, Grid grid, double beta,
                         const std::vector<double>& delta, double k_seed, double theta,
                         const EigTrackOptions& opts) {
  if (k_seed <= 0.0) fail(ErrorCode::invalid_parameter, "k_seed must be positive");
  if (opts.sector != 0 && opts.sector != 1 && opts.sector != -1)
    fail(ErrorCode::invalid_parameter, "sector must be 0, +1 or -1");
  const StructureSpec sp = with_delta(spec, delta);
  std::shared_ptr<const Eigen::ArrayXXd> eps = opts.eps_grid;
  if (!eps) eps = std::make_shared<const Eigen::ArrayXXd>(sample_eps_grid(sp, grid));

  auto finish = [&](EigState&& st, double k, int iters) {
    EigTrackResult out;
    out.k_star = k;
    out.lambda = st.evals[st.sel];
    out.eigvec = st.evecs.col(st.sel).normalized();
    out.iterations = iters;
    out.smat = std::move(st.smat);
    out.disc = std::move(st.disc);
    return out;
  };
  auto converged = [&](const EigState& st) {
    return std::abs(2.0 * std::sin(0.5 * phase_error(st, theta))) <= opts.tol_phase;
  };

  const EigState seed = evaluate_point(sp, grid, beta, k_seed, eps, opts.sector);
  const int n = static_cast<int>(seed.evals.size());

  // Candidate branches at the seed, nearest phases first, at most four.
  std::vector<int> order(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
  const cd target = std::exp(I * theta);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return angdist(seed.evals[a], target) < angdist(seed.evals[b], target);
  });
  if (order.size() > 4) order.resize(4);

  // Secant per candidate, each continued by eigenvector overlap from the
  // seed; the admissible crossing nearest the seed wins.
  std::optional<EigTrackResult> best;
  // Bracket evaluations at k_seed*(1 +- rel_step), shared across candidates.
  std::optional<EigState> second, third;
  Error first_err(ErrorCode::no_convergence, "no candidate branch reached a crossing");
  bool have_err = false;
  for (int cand : order) {
    try {
      EigState s0 = seed;
      s0.sel = cand;
      if (converged(s0)) {
        best = finish(std::move(s0), k_seed, 0);
        break;
      }
      double k0 = k_seed, f0 = phase_error(s0, theta);
      double k1 = k_seed * (1.0 + opts.rel_step);
      if (!second) second = evaluate_point(sp, grid, beta, k1, eps, opts.sector);
      EigState s1 = *second;
      select_branch(s1, s0.evecs.col(s0.sel), opts.tol_gap);
      EigTrackResult r;
      if (converged(s1)) {
        r = finish(std::move(s1), k1, 1);
      } else {
        double f1 = phase_error(s1, theta);
        // A third bracket point below the seed completes a tight window
        // centered on it, so even the first step is a Moebius prediction; a
        // narrow sweep just outside the window would be invisible to a plain
        // secant but still bends the model's pole toward itself.
        const double km = k_seed * (1.0 - opts.rel_step);
        if (!third) third = evaluate_point(sp, grid, beta, km, eps, opts.sector);
        EigState sm = *third;
        select_branch(sm, s0.evecs.col(s0.sel), opts.tol_gap);
        // Recent samples in insertion order; the rational models read them.
        std::vector<double> hk = {km, k0, k1};
        std::vector<cd> hl = {sm.evals[sm.sel], s0.evals[s0.sel], s1.evals[s1.sel]};
        int it = 2;
        for (;; ++it) {
          if (it > opts.max_iter)
            fail(ErrorCode::no_convergence, "crossing iteration did not reach tol_phase");
          std::optional<double> pred;
          if (hk.size() >= 4) {
            const ResonanceFit rf = fit_resonance(hk, hl);
            if (rf.rms < 0.05) pred = model_crossing(rf, k1, theta);
          }
          if (!pred) pred = moebius_step(&hk[hk.size() - 3], &hl[hl.size() - 3], theta);
          if (!pred) {
            const double denom = f1 - f0;
            if (denom == 0.0)
              fail(ErrorCode::no_convergence, "crossing iteration stalled (flat phase)");
            pred = k1 - f1 * (k1 - k0) / denom;
          }
          const double max_step = 0.2 * k1;
          const double k2 = std::clamp(*pred, k1 - max_step, k1 + max_step);
          if (k2 <= 0.0)
            fail(ErrorCode::no_convergence, "crossing iterate left the admissible range");
          EigState s2 = evaluate_point(sp, grid, beta, k2, eps, opts.sector);
          select_branch(s2, s1.evecs.col(s1.sel), opts.tol_gap);
          // At a narrow resonance the eigenphase carries solver noise of
          // order eps_machine * cond(A) while dphase/dk blows up, so a step
          // stagnating in k with the phase already small locates the crossing
          // to full precision even when tol_phase itself is out of reach.
          const bool stagnated =
              std::abs(k2 - k1) <= 1e-13 * k1 &&
              std::abs(2.0 * std::sin(0.5 * phase_error(s2, theta))) <= 1e-6;
          if (converged(s2) || stagnated) {
            r = finish(std::move(s2), k2, it);
            break;
          }
          k0 = k1;
          f0 = f1;
          k1 = k2;
          f1 = phase_error(s2, theta);
          hk.push_back(k2);
          hl.push_back(s2.evals[s2.sel]);
          if (hk.size() > 6) {
            hk.erase(hk.begin());
            hl.erase(hl.begin());
          }
          s1 = std::move(s2);
        }
      }
      if (!best || std::abs(r.k_star - k_seed) < std::abs(best->k_star - k_seed))
        best = std::move(r);
    } catch (const Error& e) {
      if (!have_err) {
        first_err = e;
        have_err = true;
      }
    }
  }
  if (!best) throw first_err;
  return *best;
}

// ---------------------------------------------------------------------------

namespace {

// Global-phase rotation making a unit eigenvector of a symmetric unitary
// matrix real (Takagi gauge).  v^T v has unit modulus in exact arithmetic for
// a simple eigenvalue; a small |v^T v| signals degeneracy or broken symmetry.
void realize_vector(Eigen::VectorXcd& v, double tol_realize) {
  const cd t = (v.array() * v.array()).sum();
  if (std::abs(t) < 1e-6)
    fail(ErrorCode::realization_failure,
         "eigenvector cannot be phase-rotated to real (degenerate eigenvalue or broken symmetry)");
  v *= std::exp(cd(0.0, -0.5 * std::arg(t)));
  if (v.imag().lpNorm<Eigen::Infinity>() > tol_realize * v.norm())
    fail(ErrorCode::realization_failure, "imaginary residual after phase rotation too large");
}

constexpr double tol_realize_default = 1e-8;

}  // namespace

std::vector<SymmetricEigenpair> eig_decompose_symmetric(const ScatteringMatrix& S,
                                                        DecomposeMode mode, int C) {
  const int n = static_cast<int>(S.s.rows());
  const int n0 = n / 2;
  if (n == 0 || n % 2 != 0) fail(ErrorCode::invalid_parameter, "scattering matrix is empty");
  if (mode != DecomposeMode::case2_real && C != 1 && C != -1)
    fail(ErrorCode::invalid_parameter, "block-swap parity C must be +1 or -1");

  const double tol_use = 1e-7 * std::sqrt(double(n));
  const bool need_t = mode == DecomposeMode::case2_real || mode == DecomposeMode::case4_both;
  const bool need_p = mode == DecomposeMode::case3_persym || mode == DecomposeMode::case4_both;
  if (need_t && S.sym_t_defect > tol_use)
    fail(ErrorCode::invalid_parameter, "transpose symmetry defect too large for this mode");
  if (need_p && S.sym_p_defect > tol_use)
    fail(ErrorCode::invalid_parameter, "block-swap symmetry defect too large for this mode");

  std::vector<SymmetricEigenpair> out;
  if (mode == DecomposeMode::case2_real) {
    const Eigen::MatrixXcd Ssym = 0.5 * (S.s + S.s.transpose());
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Ssym);
    if (es.info() != Eigen::Success)
      fail(ErrorCode::no_convergence, "dense eigendecomposition failed");
    for (int i = 0; i < n; ++i) {
      SymmetricEigenpair p;
      p.lambda = es.eigenvalues()[i];
      p.vec = es.eigenvectors().col(i).normalized();
      realize_vector(p.vec, tol_realize_default);
      out.push_back(std::move(p));
    }
    return out;
  }

  // Persymmetric reduction: on vectors [x; Cx]/sqrt(2) the matrix acts as
  // G_C = S11 + C S12 (blocks averaged with their swap partners).
  const Eigen::MatrixXcd S11 = 0.5 * (S.s.topLeftCorner(n0, n0) + S.s.bottomRightCorner(n0, n0));
  const Eigen::MatrixXcd S12 = 0.5 * (S.s.topRightCorner(n0, n0) + S.s.bottomLeftCorner(n0, n0));
  Eigen::MatrixXcd G = S11 + double(C) * S12;
  if (mode == DecomposeMode::case4_both) G = 0.5 * (G + G.transpose());
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(G);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::no_convergence, "dense eigendecomposition failed");
  for (int i = 0; i < n0; ++i) {
    SymmetricEigenpair p;
    p.lambda = es.eigenvalues()[i];
    p.parity = C;
    const Eigen::VectorXcd x = es.eigenvectors().col(i).normalized();
    p.vec.resize(n);
    p.vec.head(n0) = x / std::sqrt(2.0);
    p.vec.tail(n0) = double(C) * x / std::sqrt(2.0);
    if (mode == DecomposeMode::case4_both) realize_vector(p.vec, tol_realize_default);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace bicscat
