#include "bicscat/bicprobe.hpp"

#include <cmath>

namespace bicscat {

namespace {
constexpr cd I(0.0, 1.0);

std::pair<double, double> ring_point(const ProbeConfig& cfg, double cphi, double sphi) {
  const double cx = cfg.r * cphi, sx = cfg.r * sphi;
  return {cfg.beta_c + cfg.map.axx * cx + cfg.map.axy * sx + cfg.map.shift_beta,
          cfg.delta_c + cfg.map.ayx * cx + cfg.map.ayy * sx + cfg.map.shift_delta};
}

}  // namespace

int winding_real2(const std::vector<Eigen::Vector2d>& a, double* residual, double* max_step) {
  const int n = static_cast<int>(a.size());
  if (n < 2) fail(ErrorCode::invalid_parameter, "winding needs at least two samples");
  double total = 0.0, worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d& p = a[static_cast<size_t>(i)];
    const Eigen::Vector2d& q = a[static_cast<size_t>((i + 1) % n)];
    const double w = std::atan2(p.x() * q.y() - p.y() * q.x(), p.dot(q));
    total += w;
    worst = std::max(worst, std::abs(w));
  }
  const int d = static_cast<int>(std::llround(total / (2.0 * pi)));
  if (residual) *residual = std::abs(total - 2.0 * pi * d);
  if (max_step) *max_step = worst;
  return d;
}

int winding_complex(const std::vector<cd>& a_hat, double* residual, double* max_step) {
  const int n = static_cast<int>(a_hat.size());
  if (n < 2) fail(ErrorCode::invalid_parameter, "winding needs at least two samples");
  double total = 0.0, worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const cd p = a_hat[static_cast<size_t>(i)];
    const cd q = a_hat[static_cast<size_t>((i + 1) % n)];
    const double w = std::arg(q / p);
    total += w;
    worst = std::max(worst, std::abs(w));
  }
  const int d = static_cast<int>(std::llround(total / (2.0 * pi)));
  if (residual) *residual = std::abs(total - 2.0 * pi * d);
  if (max_step) *max_step = worst;
  return d;
}

int sign_index(double a_hat0, double a_hat1) {
  if (a_hat0 * a_hat1 > 0.0) return 0;
  return a_hat1 < 0.0 ? 1 : -1;
}

namespace {

// One tracked, reduced, normalized ring sample together with its field.
struct TrackedSample {
  ProbeSample s;
  FieldSolution field;
};

// Tracks the selected eigenphase at one parameter point and produces the
// symmetry-reduced eigenvector plus the unit-norm scattered field.  The
// global sign/phase is left as produced; alignment happens in the caller.
TrackedSample eval_sample(const StructureSpec& spec, Grid grid, const ProbeConfig& cfg,
                          ProbeCase which, double beta, double delta, double k_seed) {
  std::vector<double> dvec;
  if (spec.n_params() == 1) dvec.assign(1, delta);
  else if (delta != 0.0)
    fail(ErrorCode::invalid_parameter, "family has no shape parameter to sample");

  const StructureSpec sample_spec = with_delta(spec, dvec);
  // Case II needs no symmetry on the samples: reciprocity alone keeps S
  // symmetric, which is all the real realization uses.
  if ((which == ProbeCase::III || which == ProbeCase::IV) && !sample_spec.symmetric_x2())
    fail(ErrorCode::invalid_parameter, "cases III/IV require the x2 mirror symmetry");
  if (which == ProbeCase::IV && !sample_spec.symmetric_x1())
    fail(ErrorCode::invalid_parameter, "case IV requires the x1 mirror symmetry");

  EigTrackOptions track = cfg.track;
  // Track inside the requested block-swap sector wherever the sample is
  // x2-symmetric: the resonant sweep is then the only crossing in sight, so
  // a narrow resonance cannot be shadowed by the other sector's background
  // branch.  (Cases III/IV always qualify; case II qualifies when the family
  // happens to keep the x2 mirror, e.g. on its delta = 0 axis samples.)
  if (sample_spec.symmetric_x2()) track.sector = cfg.C;
  EigTrackResult tr = eig_track(spec, grid, beta, dvec, k_seed, cfg.theta, track);
  if (tr.smat.channels.n0() != 1)
    fail(ErrorCode::invalid_parameter,
         "probe requires exactly one propagating order per boundary");

  const DecomposeMode mode = which == ProbeCase::II    ? DecomposeMode::case2_real
                             : which == ProbeCase::III ? DecomposeMode::case3_persym
                                                       : DecomposeMode::case4_both;
  const auto pairs = eig_decompose_symmetric(tr.smat, mode, cfg.C);
  int best = -1;
  double o_best = -1.0;
  for (size_t i = 0; i < pairs.size(); ++i) {
    const double o = std::abs(tr.eigvec.dot(pairs[i].vec));
    if (o > o_best) {
      o_best = o;
      best = static_cast<int>(i);
    }
  }
  if (best < 0 || o_best < 0.99)
    fail(ErrorCode::invalid_parameter,
         "tracked eigenvector does not lie in the requested symmetry sector");

  TrackedSample out;
  out.s.beta = beta;
  out.s.delta = delta;
  out.s.k = tr.k_star;
  out.s.a = pairs[static_cast<size_t>(best)].vec;
  out.field = tr.disc->solve_scattering(out.s.a);
  const double nrm = norm_cell(out.field);
  if (!(nrm > 0.0)) fail(ErrorCode::near_singular_system, "scattered field has zero norm");
  scale_field(out.field, cd(1.0 / nrm));
  out.s.a /= nrm;
  return out;
}

cd reduce_hat(const Eigen::VectorXcd& a, int C) { return 0.5 * (a[0] + double(C) * a[1]); }

// Follows the tracked branch from an already-evaluated sample to the next
// ring point.  When the field overlap collapses the chained seed has landed
// on a different branch -- resonance paths can move in k much faster than
// the ring steps -- so the parameter segment is bisected and walked through
// intermediate points until every hop stays on the branch.
TrackedSample continue_sample(const StructureSpec& spec, Grid grid, const ProbeConfig& cfg,
                              ProbeCase which, const TrackedSample& from, double beta,
                              double delta, int depth) {
  try {
    TrackedSample t = eval_sample(spec, grid, cfg, which, beta, delta, from.s.k);
    if (std::abs(inner_product_cell(from.field, t.field, Weight::one)) >= 0.8) return t;
  } catch (const Error& e) {
    // Transient tracking failures (runaway iterate crossing a cutoff, lost
    // eigenvector, stalled iteration) are cured by a shorter hop like a lost
    // branch is; anything else is a real error.
    switch (e.code()) {
      case ErrorCode::branch_crossing:
      case ErrorCode::no_convergence:
      case ErrorCode::near_singular_system:
      case ErrorCode::cutoff_degenerate:
        break;
      default:
        throw;
    }
  }
  if (depth >= 6)
    fail(ErrorCode::under_resolved,
         "lost the tracked branch between ring samples (resonance path too steep)");
  TrackedSample mid =
      continue_sample(spec, grid, cfg, which, from, 0.5 * (from.s.beta + beta),
                      0.5 * (from.s.delta + delta), depth + 1);
  return continue_sample(spec, grid, cfg, which, mid, beta, delta, depth + 1);
}

// Deterministic gauge for the first ring sample.
void canonicalize_first(TrackedSample& t, ProbeCase which, int C) {
  if (which == ProbeCase::III) {
    const cd ah = reduce_hat(t.s.a, C);
    if (std::abs(ah) < 1e-8 * t.s.a.norm())
      fail(ErrorCode::zero_crossing, "reduced amplitude vanishes at the first sample");
    const cd ph = std::exp(-I * std::arg(ah));
    scale_field(t.field, ph);
    t.s.a *= ph;
  } else {
    int imax = 0;
    t.s.a.cwiseAbs().maxCoeff(&imax);
    if (t.s.a[imax].real() < 0.0) {
      scale_field(t.field, cd(-1.0));
      t.s.a = -t.s.a;
    }
  }
}

// Aligns sample t against the first sample's field: sign flip (real cases)
// or phase rotation (case III) making (u_0, u_n) positive.
void align_against(const FieldSolution& u0, TrackedSample& t, ProbeCase which) {
  const cd ip = inner_product_cell(u0, t.field, Weight::one);
  if (which == ProbeCase::III) {
    if (std::abs(ip) == 0.0)
      fail(ErrorCode::under_resolved, "consecutive ring samples are orthogonal");
    const cd ph = std::exp(I * std::arg(ip));
    scale_field(t.field, ph);
    t.s.a *= ph;
  } else if (ip.real() < 0.0) {
    scale_field(t.field, cd(-1.0));
    t.s.a = -t.s.a;
  }
}

ProbeResult run_ring(const StructureSpec& spec, ProbeCase which, const ProbeConfig& cfg,
                     Grid grid) {
  if (!(cfg.r > 0.0)) fail(ErrorCode::invalid_parameter, "sampling radius must be positive");
  if (!(cfg.k_seed > 0.0)) fail(ErrorCode::invalid_parameter, "k_seed must be positive");
  if (cfg.C != 1 && cfg.C != -1) fail(ErrorCode::invalid_parameter, "C must be +1 or -1");

  int n_samples = cfg.n_samples;
  if (which == ProbeCase::IV) {
    if (n_samples != 0 && n_samples != 2)
      fail(ErrorCode::invalid_parameter, "case IV uses exactly two samples");
    n_samples = 2;
  } else {
    if (n_samples == 0) n_samples = 24;
    if (n_samples < 8)
      fail(ErrorCode::invalid_parameter, "cases II/III need at least 8 ring samples");
  }

  ProbeConfig c = cfg;
  if (which == ProbeCase::IV && spec.n_params() != 0)
    fail(ErrorCode::invalid_parameter, "case IV applies to families without shape parameters");
  if (which != ProbeCase::IV && spec.n_params() != 1)
    fail(ErrorCode::invalid_parameter, "cases II/III need a one-parameter family");
  if (which == ProbeCase::IV && !c.track.eps_grid) {
    // delta never varies in case IV, so every sample shares one sampled grid.
    c.track.eps_grid =
        std::make_shared<const Eigen::ArrayXXd>(sample_eps_grid(with_delta(spec, {}), grid));
  }

  ProbeResult res;
  res.which = which;

  std::vector<TrackedSample> ring;
  double k_seed = c.k_seed;
  for (int n = 0; n < n_samples; ++n) {
    // Exact quarter-point trigonometry: case IV must place its two samples
    // at delta exactly delta_c (sin(pi) is not 0.0 in floating point), and
    // the axis samples of larger rings benefit likewise.
    const int quarters = 4 * n;
    double cphi, sphi;
    if (quarters % n_samples == 0) {
      const int q = quarters / n_samples;  // 0..3
      cphi = (q == 0) ? 1.0 : (q == 2) ? -1.0 : 0.0;
      sphi = (q == 1) ? 1.0 : (q == 3) ? -1.0 : 0.0;
    } else {
      const double phi = 2.0 * pi * n / n_samples;
      cphi = std::cos(phi);
      sphi = std::sin(phi);
    }
    const auto [bn, dn] = ring_point(c, cphi, sphi);
    // First sample (and both case IV samples) start from the configured
    // seed; later ring samples continue the branch from their predecessor.
    // The second case IV sample reflects through the configured center: the
    // resonance path is locally linear, so it sits at the mirrored detuning.
    TrackedSample t = (n == 0 || which == ProbeCase::IV)
                          ? eval_sample(spec, grid, c, which, bn, dn, k_seed)
                          : continue_sample(spec, grid, c, which, ring.back(), bn, dn, 0);
    if (which == ProbeCase::IV)
      k_seed = std::max(2.0 * c.k_seed - t.s.k, 0.1 * c.k_seed);
    if (n == 0) canonicalize_first(t, which, c.C);
    else
      align_against(ring.front().field, t, which);
    if (which != ProbeCase::II) {
      t.s.a_hat = reduce_hat(t.s.a, c.C);
      if (std::abs(t.s.a_hat) < 1e-8 * t.s.a.norm())
        fail(ErrorCode::zero_crossing, "a ring sample lies on the BIC set (reduced amplitude 0)");
    }
    ring.push_back(std::move(t));
  }

  // The winding data only means something if the samples sit on one closed
  // branch, so the wrap-around hop gets the same overlap certificate.
  if (which != ProbeCase::IV && ring.size() > 2 &&
      std::abs(inner_product_cell(ring.back().field, ring.front().field, Weight::one)) < 0.8)
    fail(ErrorCode::under_resolved, "ring does not close on the tracked branch");

  if (which == ProbeCase::II) {
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(ring.size());
    for (const auto& t : ring)
      pts.emplace_back(t.s.a[0].real(), t.s.a[1].real());
    res.index = winding_real2(pts, &res.residual, &res.max_step);
    res.omega.resize(ring.size());
    for (size_t i = 0; i < ring.size(); ++i) {
      const auto& p = pts[i];
      const auto& q = pts[(i + 1) % pts.size()];
      res.omega[i] = std::atan2(p.x() * q.y() - p.y() * q.x(), p.dot(q));
    }
  } else if (which == ProbeCase::III) {
    std::vector<cd> hats;
    hats.reserve(ring.size());
    for (const auto& t : ring) hats.push_back(t.s.a_hat);
    res.index = winding_complex(hats, &res.residual, &res.max_step);
    res.omega.resize(ring.size());
    for (size_t i = 0; i < ring.size(); ++i)
      res.omega[i] = std::arg(hats[(i + 1) % hats.size()] / hats[i]);
  } else {
    res.index = sign_index(ring[0].s.a_hat.real(), ring[1].s.a_hat.real());
    res.residual = 0.0;
    res.max_step = 0.0;
  }

  if (which != ProbeCase::IV) {
    if (res.residual > tol_residual)
      fail(ErrorCode::under_resolved,
           "accumulated angle is not an integer number of turns within tolerance");
    if (res.max_step > tol_step)
      fail(ErrorCode::under_resolved,
           "per-step rotation exceeds the aliasing margin; increase n_samples");
  }

  res.samples.reserve(ring.size());
  for (auto& t : ring) res.samples.push_back(std::move(t.s));
  return res;
}

}  // namespace

ProbeResult probe_case2(const StructureSpec& spec, const ProbeConfig& cfg, Grid grid) {
  return run_ring(spec, ProbeCase::II, cfg, grid);
}
ProbeResult probe_case3(const StructureSpec& spec, const ProbeConfig& cfg, Grid grid) {
  return run_ring(spec, ProbeCase::III, cfg, grid);
}
ProbeResult probe_case4(const StructureSpec& spec, const ProbeConfig& cfg, Grid grid) {
  return run_ring(spec, ProbeCase::IV, cfg, grid);
}

ProbeResult run_probe(const StructureSpec& spec, ProbeCase which, const ProbeConfig& cfg,
                      Grid grid) {
  return run_ring(spec, which, cfg, grid);
}

LocalizeResult localize_bic(const StructureSpec& spec, ProbeCase which, const ProbeConfig& cfg,
                            Grid grid, int depth) {
  if (depth < 1 || depth > 40) fail(ErrorCode::invalid_parameter, "depth must be in 1..40");
  ProbeConfig c = cfg;
  // Fold the map shift into the center so subdivision happens around the
  // effective ring center.
  c.beta_c += c.map.shift_beta;
  c.delta_c += c.map.shift_delta;
  c.map.shift_beta = c.map.shift_delta = 0.0;

  const double r_stop = c.r * std::pow(2.0, -double(depth));
  ProbeResult pr = run_ring(spec, which, c, grid);
  if (pr.index == 0) fail(ErrorCode::not_a_bic, "seed ring carries no index");
  auto mean_k = [](const ProbeResult& p) {
    double s = 0.0;
    for (const auto& q : p.samples) s += q.k;
    return s / double(p.samples.size());
  };
  double k_bar = mean_k(pr);
  int index = pr.index;

  while (c.r >= r_stop) {
    if (which == ProbeCase::IV) {
      ProbeConfig next = c;
      next.r = 0.5 * c.r;
      next.k_seed = k_bar;
      ProbeResult sub = run_ring(spec, which, next, grid);
      if (sub.index == 0)
        fail(ErrorCode::not_a_bic, "index lost while shrinking the sampling radius");
      c = next;
      k_bar = mean_k(sub);
      index = sub.index;
      continue;
    }
    // Quadrant subdivision: four sub-rings of radius r/sqrt(2) centered at
    // the quadrant midpoints cover the current disk.
    bool found = false;
    for (int q = 0; q < 4 && !found; ++q) {
      const double sx = (q & 1) ? -0.5 : 0.5;
      const double sy = (q & 2) ? -0.5 : 0.5;
      ProbeConfig next = c;
      next.beta_c = c.beta_c + c.map.axx * (sx * c.r) + c.map.axy * (sy * c.r);
      next.delta_c = c.delta_c + c.map.ayx * (sx * c.r) + c.map.ayy * (sy * c.r);
      next.r = c.r / std::sqrt(2.0);
      next.k_seed = k_bar;
      try {
        ProbeResult sub = run_ring(spec, which, next, grid);
        if (sub.index != 0) {
          c = next;
          k_bar = mean_k(sub);
          index = sub.index;
          found = true;
        }
      } catch (const Error&) {
        // This quadrant failed to track or sat on the BIC set; try the next.
      }
    }
    if (!found) fail(ErrorCode::not_a_bic, "index lost during quadrant subdivision");
  }

  LocalizeResult out;
  out.beta = c.beta_c;
  out.delta = c.delta_c;
  out.k = k_bar;
  out.index = index;
  out.r_final = c.r;
  return out;
}

}  // namespace bicscat
