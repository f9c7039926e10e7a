#include "nep/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace nep {

TruncatedCompanion build_truncation(const SplitNep &nep, Index blocks, Index max_dim)
{
  return build_truncation(nep, lu_factorize(m_at_zero(nep)), blocks, max_dim);
}

TruncatedCompanion build_truncation(const SplitNep &nep, const LuFactors &lu, Index blocks,
                                    Index max_dim)
{
  if (blocks < 1) {
    throw Error(ErrorCode::InvalidArgument, "build_truncation: at least one block");
  }
  const Index n = nep.dim();
  if (blocks * n > max_dim) {
    throw Error(ErrorCode::InvalidArgument, "build_truncation: N n exceeds the dense cap");
  }
  TruncatedCompanion tc;
  tc.blocks = blocks;
  tc.n = n;
  tc.matrix = CDense::Zero(blocks * n, blocks * n);

  // Derivative weights f_k^(j)(0) / j.
  std::vector<std::vector<Complex>> d;
  for (const auto &t : nep.terms()) d.push_back(t.family.derivative_over_order(blocks));

  const CDense identity = CDense::Identity(n, n);
  for (Index j = 1; j <= blocks; ++j) {
    CSparse mj(n, n);
    for (Index k = 0; k < nep.num_terms(); ++k) {
      const Complex w = d[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
      if (w != Complex(0.0, 0.0)) mj += w * nep.term(k).matrix;
    }
    const CDense rhs = CDense(mj);
    tc.matrix.block(0, (j - 1) * n, n, n) = -lu_solve(lu, rhs, Op::Normal);
    if (j < blocks) {
      tc.matrix.block(j * n, (j - 1) * n, n, n) = identity / double(j);
    }
  }
  return tc;
}

DenseBiLanczos two_sided_lanczos(const CDense &a, const CVec &q1, const CVec &qt1, Index k)
{
  const Index dim = a.rows();
  if (a.cols() != dim || q1.size() != dim || qt1.size() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "two_sided_lanczos: shapes");
  }
  if (k < 1 || k > dim) {
    throw Error(ErrorCode::InvalidArgument, "two_sided_lanczos: need 1 <= k <= dimension");
  }
  const Complex d = qt1.dot(q1);
  if (!(std::abs(d) > 1e-14 * q1.norm() * qt1.norm())) {
    throw Error(ErrorCode::Breakdown, "start vectors are biorthogonal");
  }
  DenseBiLanczos out;
  out.q = CDense::Zero(dim, k + 1);
  out.qt = CDense::Zero(dim, k + 1);
  out.q.col(0) = q1;
  out.qt.col(0) = qt1 / std::conj(d);

  Complex beta_j(0.0, 0.0), gamma_j(0.0, 0.0);
  for (Index j = 0; j < k; ++j) {
    CVec r = a * out.q.col(j);
    CVec s = a.adjoint() * out.qt.col(j);
    if (j > 0) {
      r -= gamma_j * out.q.col(j - 1);
      s -= std::conj(beta_j) * out.qt.col(j - 1);
    }
    const Complex alpha = out.qt.col(j).dot(r);
    r -= alpha * out.q.col(j);
    s -= std::conj(alpha) * out.qt.col(j);
    if (j + 1 == dim) {
      // whole space spanned: T is similar to A
      out.t.alpha.push_back(alpha);
      out.t.beta.push_back(0.0);
      out.t.gamma.push_back(0.0);
      break;
    }
    const Complex omega = r.dot(s);
    if (!(std::abs(omega) > 1e-14 * r.norm() * s.norm())) {
      throw Error(ErrorCode::Breakdown, "serious breakdown at step " + std::to_string(j + 1));
    }
    const double beta = std::sqrt(std::abs(omega));
    const Complex gamma = std::conj(omega) / beta;
    out.q.col(j + 1) = r / beta;
    out.qt.col(j + 1) = s / std::conj(gamma);
    out.t.alpha.push_back(alpha);
    out.t.beta.push_back(beta);
    out.t.gamma.push_back(gamma);
    beta_j = beta;
    gamma_j = gamma;
  }
  return out;
}

std::vector<Complex> reference_eigs(const SplitNep &nep, Index blocks, double window_radius)
{
  const TruncatedCompanion tc = build_truncation(nep, blocks);
  const auto eig = dense_eig(tc.matrix);
  std::vector<Complex> lambdas;
  for (const auto &e : eig) {
    if (std::abs(e.value) == 0.0) continue;
    const Complex l = 1.0 / e.value;
    if (std::abs(l) < window_radius) lambdas.push_back(l);
  }
  std::sort(lambdas.begin(), lambdas.end(), [](Complex a, Complex b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    return std::arg(a) < std::arg(b);
  });
  std::vector<Complex> unique;
  for (Complex l : lambdas) {
    const bool dup = std::any_of(unique.begin(), unique.end(),
                                 [&](Complex u) { return std::abs(u - l) <= 1e-8 * std::abs(l); });
    if (!dup) unique.push_back(l);
  }
  return unique;
}

CVec expand_right(const CoeffBasisRight &a, Index blocks)
{
  const Index n = a.dim();
  CVec v = CVec::Zero(blocks * n);
  double inv_fact = 1.0;  // 1 / (j-1)!
  for (Index j = 1; j <= std::min(blocks, a.cols()); ++j) {
    if (j > 1) inv_fact /= double(j - 1);
    v.segment((j - 1) * n, n) = a.coeffs.col(j - 1) * inv_fact;
  }
  return v;
}

CVec expand_left(const SplitNep &nep, const CoeffBasisLeft &a, Index blocks)
{
  // Block m = -(m-1)! sum_j (M^(m+j-1)(0) / (m+j-1)!)^* comp_j.
  const Index n = a.dim();
  const Index ka = a.cols();
  CVec v = CVec::Zero(blocks * n);
  if (ka == 0) return v;
  const CDense table = nep.taylor_table(blocks + ka);
  double fact = 1.0;  // (m-1)!
  for (Index m = 1; m <= blocks; ++m) {
    if (m > 1) fact *= double(m - 1);
    CDense w(ka, nep.num_terms());
    for (Index k = 0; k < nep.num_terms(); ++k) {
      for (Index j = 1; j <= ka; ++j) {
        w(j - 1, k) = std::conj(table(k, m + j - 1)) * fact;
      }
    }
    v.segment((m - 1) * n, n) = -apply_terms(nep, a.coeffs, w, Op::ConjTranspose);
  }
  return v;
}

}  // namespace nep
