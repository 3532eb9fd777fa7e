#include "bicscat/solver.hpp"

#include <cmath>
#include <random>

namespace bicscat {

namespace {
constexpr cd I(0.0, 1.0);

// Interior of the cell around node (j, l) is sampled at the 16 midpoints of a
// 4x4 subcell split; offsets in units of the step.
constexpr double subcell_offsets[4] = {-0.375, -0.125, 0.125, 0.375};
}  // namespace

Eigen::ArrayXXd sample_eps_grid(const StructureSpec& s, Grid g) {
  const int n1 = g.n1, n2 = g.n2;
  const double h1 = 2.0 * pi / n1;
  const double h2 = 2.0 * s.d0 / n2;
  Eigen::ArrayXXd eps(n1, n2 + 1);
  for (int l = 0; l <= n2; ++l) {
    const double x2 = -s.d0 + l * h2;
    for (int j = 0; j < n1; ++j) {
      const double x1 = -pi + j * h1;
      double acc = 0.0;
      for (double o1 : subcell_offsets)
        for (double o2 : subcell_offsets) acc += eval_eps(s, x1 + o1 * h1, x2 + o2 * h2);
      eps(j, l) = acc / 16.0;
    }
  }
  return eps;
}

Discretization::Discretization(const StructureSpec& s, Grid g, double beta, double k)
    : Discretization(s, g, beta, k, nullptr) {}

Discretization::Discretization(const StructureSpec& s, Grid g, double beta, double k,
                               std::shared_ptr<const Eigen::ArrayXXd> eps_grid)
    : spec_(s), grid_(g), beta_(beta), k_(k) {
  validate(spec_);
  if (spec_.eps0 != 1.0)
    fail(ErrorCode::invalid_parameter, "exterior permittivity must be exactly 1");
  if (grid_.n1 < 16 || grid_.n2 < 16)
    fail(ErrorCode::invalid_parameter, "grid must be at least 16 x 16");
  if (grid_.n1 % 2 != 0) fail(ErrorCode::invalid_parameter, "n1 must be even");
  if (eps_grid) {
    if (eps_grid->rows() != grid_.n1 || eps_grid->cols() != grid_.n2 + 1)
      fail(ErrorCode::invalid_parameter, "cached eps grid has wrong shape");
    eps_ = std::move(eps_grid);
  } else {
    eps_ = std::make_shared<const Eigen::ArrayXXd>(sample_eps_grid(spec_, grid_));
  }
  channels_ = compute_channels(beta_, k_, std::max(2, grid_.n1 / 2 - 1));
  build();
}

void Discretization::build() {
  const int n1 = grid_.n1, n2 = grid_.n2;
  const double h1v = h1(), h2v = h2();

  // Per-order channel data: continuum wavenumbers, matched discrete ones, and
  // the resulting boundary impedances Lambda_m (i sin(alpha~ h2)/h2, which a
  // central-difference ghost row turns into exact absorption of the discrete
  // outgoing wave).
  alpha_cont_.assign(n1, cd(0.0));
  alpha_disc_.assign(n1, cd(0.0));
  lambda_.assign(n1, 0.0);
  Lambda_.assign(n1, cd(0.0));
  comp_.assign(n1, cd(1.0));
  const double guard = tol_cutoff_rel * k_;
  for (int r = 0; r < n1; ++r) {
    const int m = order_of(r);
    const double q = m + beta_;
    const double disc = (k_ - q) * (k_ + q);
    const cd ac = disc > 0.0 ? cd(std::sqrt(disc), 0.0) : cd(0.0, std::sqrt(-disc));
    if (std::abs(ac) < guard)
      fail(ErrorCode::cutoff_degenerate, "order m=" + std::to_string(m) + " at its cutoff");
    alpha_cont_[r] = ac;

    const double s1 = std::pow(2.0 * std::sin(0.5 * q * h1v) / h1v, 2);
    const double mu = k_ * k_ - s1;
    if ((mu > 0.0) != (disc > 0.0) || mu == 0.0)
      fail(ErrorCode::cutoff_degenerate,
           "discrete and continuum channel classification disagree for m=" + std::to_string(m) +
               " (too close to a cutoff for this grid)");
    if (mu > 0.0) {
      const double z = 0.5 * std::sqrt(mu) * h2v;
      if (z >= 1.0)
        fail(ErrorCode::invalid_parameter, "x2 grid too coarse for this frequency");
      const double at = (2.0 / h2v) * std::asin(z);
      alpha_disc_[r] = cd(at, 0.0);
      lambda_[r] = std::sin(at * h2v) / h2v;
      Lambda_[r] = cd(0.0, lambda_[r]);
      comp_[r] = std::exp(-I * (at - ac.real()) * spec_.d0);
    } else {
      const double z = 0.5 * std::sqrt(-mu) * h2v;
      const double kt = (2.0 / h2v) * std::asinh(z);
      alpha_disc_[r] = cd(0.0, kt);
      lambda_[r] = std::sinh(kt * h2v) / h2v;
      Lambda_[r] = cd(-lambda_[r], 0.0);
      comp_[r] = cd(1.0, 0.0);
    }
  }

  // Modal analysis/synthesis over the boundary nodes: uhat = ana * trace is
  // the periodic-rectangle approximation of (trace, phi_m); ana * syn = I.
  ana_.resize(n1, n1);
  syn_.resize(n1, n1);
  const double nrm = 1.0 / std::sqrt(2.0 * pi);
  for (int r = 0; r < n1; ++r) {
    const int m = order_of(r);
    for (int j = 0; j < n1; ++j) {
      const double x = -pi + j * h1v;
      const cd ph = std::exp(I * double(m) * x) * nrm;
      syn_(j, r) = ph;
      ana_(r, j) = h1v * std::conj(ph);
    }
  }

  // Dense transparent-boundary block, shared by both boundary rows:
  // -h1 * syn * diag(Lambda) * ana.
  Eigen::MatrixXcd Lam = Eigen::MatrixXcd::Zero(n1, n1);
  for (int r = 0; r < n1; ++r) Lam(r, r) = Lambda_[r];
  const Eigen::MatrixXcd dtn = -h1v * (syn_ * Lam * ana_);

  // Quadrature-weighted matrix of the discrete sesquilinear form: stiffness
  // with quasi-momentum phases on x1 couplings, trapezoid-weighted mass, and
  // the boundary blocks.  Its conjugate transpose is the discrete adjoint.
  const int n = n_dof();
  std::vector<Eigen::Triplet<cd>> trips;
  trips.reserve(static_cast<size_t>(5 * n + 2 * n1 * n1));
  const cd eplus = std::exp(I * beta_ * h1v);
  const cd eminus = std::conj(eplus);
  const auto idx = [n1](int j, int l) { return l * n1 + j; };
  for (int l = 0; l <= n2; ++l) {
    const double wl = (l == 0 || l == n2) ? 0.5 * h2v : h2v;
    const int edges2 = (l > 0 ? 1 : 0) + (l < n2 ? 1 : 0);
    for (int j = 0; j < n1; ++j) {
      const cd diag = 2.0 * wl / h1v + edges2 * (h1v / h2v) - k_ * k_ * wl * h1v * (*eps_)(j, l);
      trips.emplace_back(idx(j, l), idx(j, l), diag);
      trips.emplace_back(idx(j, l), idx((j + 1) % n1, l), -(wl / h1v) * eplus);
      trips.emplace_back(idx(j, l), idx((j + n1 - 1) % n1, l), -(wl / h1v) * eminus);
      if (l > 0) trips.emplace_back(idx(j, l), idx(j, l - 1), cd(-h1v / h2v));
      if (l < n2) trips.emplace_back(idx(j, l), idx(j, l + 1), cd(-h1v / h2v));
    }
  }
  for (int l : {0, n2})
    for (int j = 0; j < n1; ++j)
      for (int jp = 0; jp < n1; ++jp) trips.emplace_back(idx(j, l), idx(jp, l), dtn(j, jp));

  A_.resize(n, n);
  A_.setFromTriplets(trips.begin(), trips.end());
  A_.makeCompressed();
}

void Discretization::factor_forward() const {
  if (lu_) return;
  lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<cd>>>();
  lu_->compute(A_);
  if (lu_->info() != Eigen::Success)
    fail(ErrorCode::near_singular_system, "sparse factorization failed");
}

void Discretization::factor_adjoint() const {
  if (lu_adj_) return;
  Eigen::SparseMatrix<cd> Ah = A_.adjoint();
  Ah.makeCompressed();
  lu_adj_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<cd>>>();
  lu_adj_->compute(Ah);
  if (lu_adj_->info() != Eigen::Success)
    fail(ErrorCode::near_singular_system, "adjoint sparse factorization failed");
}

FieldSolution Discretization::solve_scattering(const Eigen::VectorXcd& a) const {
  const int n0 = channels_.n0();
  if (a.size() != 2 * n0)
    fail(ErrorCode::invalid_parameter, "incident vector has wrong size");
  const int n1 = grid_.n1, n2 = grid_.n2;
  const double h1v = h1();

  // Raw (discrete-referenced) incident amplitudes per retained order.
  Eigen::VectorXcd a_raw_up = Eigen::VectorXcd::Zero(n1);
  Eigen::VectorXcd a_raw_dn = Eigen::VectorXcd::Zero(n1);
  Eigen::VectorXcd coef_up = Eigen::VectorXcd::Zero(n1);
  Eigen::VectorXcd coef_dn = Eigen::VectorXcd::Zero(n1);
  for (int i = 0; i < n0; ++i) {
    const int r = channels_.prop[static_cast<size_t>(i)] + n1 / 2;
    a_raw_up[r] = comp_[r] * a[i];
    a_raw_dn[r] = comp_[r] * a[n0 + i];
    // Flux normalization uses the matched impedance lambda~ (the quantity the
    // discrete scheme conserves exactly), so S is exactly unitary for any
    // number of open channels.
    const cd scale = -2.0 * I * h1v * std::sqrt(lambda_[r]);
    coef_up[r] = scale * a_raw_up[r];
    coef_dn[r] = scale * a_raw_dn[r];
  }
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(n_dof());
  f.segment(static_cast<long>(n2) * n1, n1) = syn_ * coef_up;
  f.segment(0, n1) = syn_ * coef_dn;

  factor_forward();
  Eigen::VectorXcd u = lu_->solve(f);
  if (!u.allFinite() || u.norm() > 1e14 * (f.norm() + 1.0))
    fail(ErrorCode::near_singular_system, "scattering solve amplification beyond threshold");

  return make_solution(u, a_raw_up, a_raw_dn, false, Eigen::VectorXcd());
}

FieldSolution Discretization::solve_adjoint(const Eigen::VectorXcd& b) const {
  const int n0 = channels_.n0();
  if (b.size() != 2 * n0)
    fail(ErrorCode::invalid_parameter, "outgoing vector has wrong size");
  const int n1 = grid_.n1, n2 = grid_.n2;
  const double h1v = h1();

  Eigen::VectorXcd coef_up = Eigen::VectorXcd::Zero(n1);
  Eigen::VectorXcd coef_dn = Eigen::VectorXcd::Zero(n1);
  for (int i = 0; i < n0; ++i) {
    const int r = channels_.prop[static_cast<size_t>(i)] + n1 / 2;
    const cd scale = 2.0 * I * h1v * std::sqrt(lambda_[r]);
    coef_up[r] = scale * comp_[r] * b[i];
    coef_dn[r] = scale * comp_[r] * b[n0 + i];
  }
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(n_dof());
  g.segment(static_cast<long>(n2) * n1, n1) = syn_ * coef_up;
  g.segment(0, n1) = syn_ * coef_dn;

  factor_adjoint();
  Eigen::VectorXcd u = lu_adj_->solve(g);
  if (!u.allFinite() || u.norm() > 1e14 * (g.norm() + 1.0))
    fail(ErrorCode::near_singular_system, "adjoint solve amplification beyond threshold");

  return make_solution(u, Eigen::VectorXcd(), Eigen::VectorXcd(), true, b);
}

Eigen::VectorXcd Discretization::solve_raw(const Eigen::VectorXcd& f) const {
  if (f.size() != n_dof()) fail(ErrorCode::invalid_parameter, "right-hand side has wrong size");
  factor_forward();
  Eigen::VectorXcd u = lu_->solve(f);
  if (!u.allFinite() || u.norm() > 1e14 * (f.norm() + 1.0))
    fail(ErrorCode::near_singular_system, "solve amplification beyond threshold");
  return u;
}

Eigen::VectorXcd Discretization::boundary_coeffs(const Eigen::VectorXcd& u, bool upper) const {
  if (u.size() != n_dof()) fail(ErrorCode::invalid_parameter, "field has wrong size");
  const int n1 = grid_.n1;
  const long off = upper ? static_cast<long>(grid_.n2) * n1 : 0;
  return ana_ * u.segment(off, n1);
}

FieldSolution Discretization::wrap_field(const Eigen::VectorXcd& u) const {
  if (u.size() != n_dof()) fail(ErrorCode::invalid_parameter, "field has wrong size");
  const int n1 = grid_.n1;
  return make_solution(u, Eigen::VectorXcd::Zero(n1), Eigen::VectorXcd::Zero(n1), false,
                       Eigen::VectorXcd());
}

// Shared trace bookkeeping.  For a scattering solve the incident amplitudes
// are known and the outgoing ones are read off the boundary traces; for an
// adjoint solve the outgoing amplitudes are prescribed exactly by the forcing
// construction and the incoming content is the remainder of the trace.
FieldSolution Discretization::make_solution(const Eigen::VectorXcd& u,
                                            const Eigen::VectorXcd& a_raw_up,
                                            const Eigen::VectorXcd& a_raw_dn, bool adjoint_mode,
                                            const Eigen::VectorXcd& b_user) const {
  const int n1 = grid_.n1, n2 = grid_.n2, n0 = channels_.n0();
  FieldSolution fs;
  fs.structure = spec_;
  fs.grid = grid_;
  fs.beta = beta_;
  fs.k = k_;
  fs.u = u;
  fs.eps = eps_;
  fs.alpha_ret.resize(n1);
  for (int r = 0; r < n1; ++r) fs.alpha_ret[r] = alpha_cont_[r];
  fs.a = Eigen::VectorXcd::Zero(2 * n0);
  fs.b = Eigen::VectorXcd::Zero(2 * n0);
  fs.inc_up = Eigen::VectorXcd::Zero(n1);
  fs.out_up = Eigen::VectorXcd::Zero(n1);
  fs.inc_dn = Eigen::VectorXcd::Zero(n1);
  fs.out_dn = Eigen::VectorXcd::Zero(n1);

  const Eigen::VectorXcd uhat_up = ana_ * u.segment(static_cast<long>(n2) * n1, n1);
  const Eigen::VectorXcd uhat_dn = ana_ * u.segment(0, n1);

  for (int r = 0; r < n1; ++r) {
    const int m = order_of(r);
    const int i = channels_.prop_index(m);
    if (i < 0) {
      fs.out_up[r] = uhat_up[r];
      fs.out_dn[r] = uhat_dn[r];
      continue;
    }
    const double sa = std::sqrt(lambda_[r]);  // discrete flux normalization
    if (!adjoint_mode) {
      const cd b_raw_up = sa * uhat_up[r] - a_raw_up[r];
      const cd b_raw_dn = sa * uhat_dn[r] - a_raw_dn[r];
      fs.a[i] = std::conj(comp_[r]) * a_raw_up[r];
      fs.a[n0 + i] = std::conj(comp_[r]) * a_raw_dn[r];
      fs.b[i] = comp_[r] * b_raw_up;
      fs.b[n0 + i] = comp_[r] * b_raw_dn;
      fs.inc_up[r] = a_raw_up[r] / sa;
      fs.inc_dn[r] = a_raw_dn[r] / sa;
      fs.out_up[r] = b_raw_up / sa;
      fs.out_dn[r] = b_raw_dn / sa;
    } else {
      const cd out_up = comp_[r] * b_user[i] / sa;
      const cd out_dn = comp_[r] * b_user[n0 + i] / sa;
      fs.out_up[r] = out_up;
      fs.out_dn[r] = out_dn;
      fs.inc_up[r] = uhat_up[r] - out_up;
      fs.inc_dn[r] = uhat_dn[r] - out_dn;
      fs.b[i] = b_user[i];
      fs.b[n0 + i] = b_user[n0 + i];
      fs.a[i] = std::conj(comp_[r]) * sa * fs.inc_up[r];
      fs.a[n0 + i] = std::conj(comp_[r]) * sa * fs.inc_dn[r];
    }
  }
  return fs;
}

Discretization::SingularData Discretization::smallest_singular(int iters) const {
  factor_forward();
  factor_adjoint();
  const int n = n_dof();
  const int p = 3;
  std::mt19937 rng(12345);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXcd V(n, p);
  for (int c = 0; c < p; ++c)
    for (int i = 0; i < n; ++i) V(i, c) = cd(nd(rng), nd(rng));
  auto orth = [&](Eigen::MatrixXcd& M) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(M);
    M = qr.householderQ() * Eigen::MatrixXcd::Identity(n, p);
  };
  orth(V);
  double prev = -1.0;
  Eigen::VectorXd sig = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXcd Q = Eigen::MatrixXcd::Identity(p, p);
  for (int it = 0; it < std::max(1, iters); ++it) {
    // One step of subspace iteration with (A^H A)^{-1}.
    Eigen::MatrixXcd W = lu_adj_->solve(V);
    V = lu_->solve(W);
    orth(V);
    const Eigen::MatrixXcd AV = A_ * V;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(AV.adjoint() * AV);
    sig = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Q = es.eigenvectors();
    if (prev > 0.0 && std::abs(sig[0] - prev) <= 1e-10 * std::max(prev, 1e-300)) break;
    prev = sig[0];
  }
  SingularData out;
  out.sigma_min = sig[0];
  out.sigma_next = sig[1];
  out.v = V * Q.col(0);
  out.v.normalize();
  return out;
}

// ---------------------------------------------------------------------------
// Inner products.

namespace {

void require_compatible(const FieldSolution& u, const FieldSolution& v, Weight w) {
  if (u.grid.n1 != v.grid.n1 || u.grid.n2 != v.grid.n2 || u.d0() != v.d0())
    fail(ErrorCode::invalid_parameter, "inner product requires fields on the same grid");
  // The plain and x1-derivative forms are pure quadrature and stay meaningful
  // across parameter points (ring-sample alignment relies on that); the
  // weighted forms sample one structure, so both fields must come from the
  // same operator.
  if ((w == Weight::eps || w == Weight::d_eps) && u.eps != v.eps)
    fail(ErrorCode::invalid_parameter,
         "weighted inner product requires fields from the same operator");
}

// Spectral x1 derivative of the nodal field (exact for the retained orders).
Eigen::VectorXcd x1_derivative(const FieldSolution& f) {
  const int n1 = f.n1(), n2 = f.n2();
  const double h1 = 2.0 * pi / n1;
  Eigen::MatrixXcd ana(n1, n1), syn(n1, n1);
  const double nrm = 1.0 / std::sqrt(2.0 * pi);
  for (int r = 0; r < n1; ++r) {
    const int m = r - n1 / 2;
    for (int j = 0; j < n1; ++j) {
      const double x = -pi + j * h1;
      const cd ph = std::exp(cd(0.0, 1.0) * double(m) * x) * nrm;
      syn(j, r) = ph * cd(0.0, double(m));  // synthesis of i m * phi_m
      ana(r, j) = h1 * std::conj(ph);
    }
  }
  const Eigen::MatrixXcd D = syn * ana;
  Eigen::MatrixXcd U = Eigen::Map<const Eigen::MatrixXcd>(f.u.data(), n1, n2 + 1);
  U = D * U;
  return Eigen::Map<const Eigen::VectorXcd>(U.data(), f.u.size());
}

// Boundary interface integral for the d_eps weight: the parameter derivative
// of the permittivity of the disk families is (eps1 - eps0) times a line
// measure on the inclusion boundary with density d rho_b / d delta, so
// (d_eps u, v) = (eps1 - eps0) \int rho_b(tau) rho_b'(tau)|_delta u vbar dtau.
cd interface_integral(const FieldSolution& u, const FieldSolution& v) {
  const StructureSpec& s = u.structure;
  if (s.n_params() == 0) return cd(0.0);
  const int n_tau = 4096;
  const int n1 = u.n1(), n2 = u.n2();
  const double h1 = 2.0 * pi / n1, h2 = 2.0 * s.d0 / n2;
  auto interp = [&](const Eigen::VectorXcd& w, double x1, double x2) {
    double t1 = (x1 + pi) / h1;
    double t2 = (x2 + s.d0) / h2;
    int j0 = static_cast<int>(std::floor(t1));
    int l0 = static_cast<int>(std::floor(t2));
    const double f1 = t1 - j0, f2 = t2 - l0;
    l0 = std::max(0, std::min(n2 - 1, l0));
    const int j0m = ((j0 % n1) + n1) % n1;
    const int j1m = (j0m + 1) % n1;
    const auto at = [&](int j, int l) { return w[static_cast<long>(l) * n1 + j]; };
    return (1 - f1) * (1 - f2) * at(j0m, l0) + f1 * (1 - f2) * at(j1m, l0) +
           (1 - f1) * f2 * at(j0m, l0 + 1) + f1 * f2 * at(j1m, l0 + 1);
  };
  cd acc(0.0);
  const double dt = 2.0 * pi / n_tau;
  for (int t = 0; t < n_tau; ++t) {
    const double tau = t * dt;
    const double rb = boundary_radius(s, tau);
    const double drb = boundary_radius_ddelta(s, tau);
    if (drb == 0.0) continue;
    const double x1 = rb * std::cos(tau), x2 = rb * std::sin(tau);
    acc += rb * drb * interp(u.u, x1, x2) * std::conj(interp(v.u, x1, x2));
  }
  return (s.eps1 - s.eps0) * acc * dt;
}

}  // namespace

cd inner_product_cell(const FieldSolution& u, const FieldSolution& v, Weight w) {
  require_compatible(u, v, w);
  if (w == Weight::d_eps) return interface_integral(u, v);
  const int n1 = u.n1(), n2 = u.n2();
  const double h1 = 2.0 * pi / n1, h2 = 2.0 * u.d0() / n2;
  const Eigen::VectorXcd* lhs = &u.u;
  Eigen::VectorXcd du;
  if (w == Weight::d_x1) {
    du = x1_derivative(u);
    lhs = &du;
  }
  cd acc(0.0);
  for (int l = 0; l <= n2; ++l) {
    const double wl = (l == 0 || l == n2) ? 0.5 * h2 : h2;
    cd row(0.0);
    const long base = static_cast<long>(l) * n1;
    if (w == Weight::eps) {
      for (int j = 0; j < n1; ++j)
        row += (*u.eps)(j, l) * (*lhs)[base + j] * std::conj(v.u[base + j]);
    } else {
      for (int j = 0; j < n1; ++j) row += (*lhs)[base + j] * std::conj(v.u[base + j]);
    }
    acc += wl * row;
  }
  return acc * h1;
}

cd inner_product_omega(const FieldSolution& u, const FieldSolution& v, Weight w) {
  cd acc = inner_product_cell(u, v, w);
  if (w == Weight::d_eps) return acc;  // parameter derivative vanishes outside the cell

  // Closed-form tails: per order, the exterior components are
  // out e^{i alpha t} + inc e^{-i alpha t}, t >= 0 outward, and
  // \int_0^inf e^{i p t} conj(e^{i q t}) dt = i / (p - conj(q)) whenever the
  // product decays.  Pairs of two propagating components are skipped.
  const int n1 = u.n1();
  cd tail(0.0);
  for (int side = 0; side < 2; ++side) {
    const Eigen::VectorXcd& uout = side == 0 ? u.out_up : u.out_dn;
    const Eigen::VectorXcd& uinc = side == 0 ? u.inc_up : u.inc_dn;
    const Eigen::VectorXcd& vout = side == 0 ? v.out_up : v.out_dn;
    const Eigen::VectorXcd& vinc = side == 0 ? v.inc_up : v.inc_dn;
    for (int r = 0; r < n1; ++r) {
      const cd al = u.alpha_ret[r];
      const cd comps_u[2][2] = {{uout[r], al}, {uinc[r], -al}};
      const cd comps_v[2][2] = {{vout[r], al}, {vinc[r], -al}};
      cd term(0.0);
      for (const auto& cu : comps_u) {
        if (cu[0] == cd(0.0)) continue;
        for (const auto& cv : comps_v) {
          if (cv[0] == cd(0.0)) continue;
          const cd p = cu[1], q = cv[1];
          if (p.imag() + q.imag() <= 1e-14) continue;  // non-decaying pair
          term += cu[0] * std::conj(cv[0]) * (cd(0.0, 1.0) / (p - std::conj(q)));
        }
      }
      if (w == Weight::d_x1) term *= cd(0.0, double(r - n1 / 2));
      if (w == Weight::eps) term *= u.structure.eps0;
      tail += term;
    }
  }
  return acc + tail;
}

double norm_cell(const FieldSolution& u) {
  return std::sqrt(std::max(0.0, inner_product_cell(u, u, Weight::one).real()));
}

void scale_field(FieldSolution& f, cd c) {
  f.u *= c;
  f.a *= c;
  f.b *= c;
  f.inc_up *= c;
  f.out_up *= c;
  f.inc_dn *= c;
  f.out_dn *= c;
}

void axpy_field(FieldSolution& y, cd c, const FieldSolution& x) {
  require_compatible(y, x, Weight::eps);  // linear combination: same operator
  y.u += c * x.u;
  y.a += c * x.a;
  y.b += c * x.b;
  y.inc_up += c * x.inc_up;
  y.out_up += c * x.out_up;
  y.inc_dn += c * x.inc_dn;
  y.out_dn += c * x.out_dn;
}

}  // namespace bicscat
