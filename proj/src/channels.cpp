#include "bicscat/channels.hpp"

#include <algorithm>
#include <cmath>

namespace bicscat {

bool ChannelSet::is_prop(int m) const {
  return std::binary_search(prop.begin(), prop.end(), m);
}

int ChannelSet::prop_index(int m) const {
  auto it = std::lower_bound(prop.begin(), prop.end(), m);
  if (it == prop.end() || *it != m) return -1;
  return static_cast<int>(it - prop.begin());
}

ChannelSet compute_channels(double beta, double k, int m_trunc) {
  if (!(beta >= -0.5) || !(beta < 0.5))
    fail(ErrorCode::invalid_parameter, "beta outside the Brillouin zone [-1/2, 1/2)");
  if (!(k > 0.0)) fail(ErrorCode::invalid_parameter, "k must be positive");
  if (!(k > std::abs(beta)))
    fail(ErrorCode::invalid_parameter, "k <= |beta|: no propagating order");
  if (m_trunc < 0) fail(ErrorCode::invalid_parameter, "m_trunc must be >= 0");

  ChannelSet ch;
  ch.beta = beta;
  ch.k = k;
  ch.m_trunc = m_trunc;
  ch.alpha.resize(static_cast<size_t>(2 * m_trunc + 1));
  const double guard = tol_cutoff_rel * k;
  for (int m = -m_trunc; m <= m_trunc; ++m) {
    const double q = m + beta;
    const double disc = (k - q) * (k + q);  // k^2 - (m+beta)^2 without cancellation
    cd a;
    if (disc > 0.0)
      a = cd(std::sqrt(disc), 0.0);
    else
      a = cd(0.0, std::sqrt(-disc));
    if (std::abs(a) < guard)
      fail(ErrorCode::cutoff_degenerate, "order m=" + std::to_string(m) + " is at its cutoff");
    ch.alpha[static_cast<size_t>(m + m_trunc)] = a;
    if (disc > 0.0) ch.prop.push_back(m);
  }
  return ch;
}

Eigen::MatrixXcd translation_matrix(const ChannelSet& ch, double t) {
  const int n0 = ch.n0();
  Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(2 * n0, 2 * n0);
  for (int i = 0; i < n0; ++i) {
    const cd ph = std::exp(cd(0.0, -1.0) * ch.alpha_of(ch.prop[static_cast<size_t>(i)]) * t);
    T(i, i) = ph;
    T(n0 + i, n0 + i) = ph;
  }
  return T;
}

Eigen::MatrixXcd permute(const Eigen::MatrixXcd& m) {
  const long n2 = m.rows();
  if (n2 != m.cols() || n2 % 2 != 0)
    fail(ErrorCode::invalid_parameter, "permute expects a square matrix of even size");
  const long n0 = n2 / 2;
  Eigen::MatrixXcd out(n2, n2);
  // R M R swaps the boundary blocks: out[I, J] = M[swap(I), swap(J)].
  out.topLeftCorner(n0, n0) = m.bottomRightCorner(n0, n0);
  out.topRightCorner(n0, n0) = m.bottomLeftCorner(n0, n0);
  out.bottomLeftCorner(n0, n0) = m.topRightCorner(n0, n0);
  out.bottomRightCorner(n0, n0) = m.topLeftCorner(n0, n0);
  return out;
}

}  // namespace bicscat
