#include "nep/split_nep.hpp"

#include <cmath>
#include <limits>

namespace nep {

SplitNep::SplitNep(std::vector<NepTerm> terms, std::string name)
    : terms_(std::move(terms)), name_(std::move(name))
{
  if (terms_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "SplitNep needs at least one term");
  }
  dim_ = terms_.front().matrix.rows();
  for (auto &t : terms_) {
    if (t.matrix.rows() != dim_ || t.matrix.cols() != dim_) {
      throw Error(ErrorCode::DimensionMismatch, "SplitNep terms must be square with equal dimension");
    }
    t.matrix.makeCompressed();
    fro_norms_.push_back(frobenius_norm(t.matrix));
    two_norms_.push_back(two_norm_estimate(t.matrix));
  }
}

double SplitNep::radius() const
{
  double rho = std::numeric_limits<double>::infinity();
  for (const auto &t : terms_) {
    rho = std::min(rho, t.family.radius());
  }
  return rho;
}

CDense SplitNep::taylor_table(Index jmax) const
{
  CDense table(num_terms(), jmax + 1);
  for (Index k = 0; k < num_terms(); ++k) {
    const auto series = term(k).family.taylor_series(jmax);
    for (Index j = 0; j <= jmax; ++j) {
      table(k, j) = series[static_cast<std::size_t>(j)];
    }
  }
  return table;
}

CSparse eval_m(const SplitNep &nep, Complex lambda)
{
  CSparse m(nep.dim(), nep.dim());
  for (const auto &t : nep.terms()) {
    m += t.family.eval(lambda) * t.matrix;
  }
  m.makeCompressed();
  return m;
}

CVec apply_m(const SplitNep &nep, Complex lambda, const CVec &x, Op mode)
{
  if (x.size() != nep.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "apply_m: vector length");
  }
  CVec y = CVec::Zero(nep.dim());
  for (const auto &t : nep.terms()) {
    const Complex f = t.family.eval(lambda);
    if (mode == Op::Normal) {
      y += f * (t.matrix * x);
    } else {
      y += std::conj(f) * (t.matrix.adjoint() * x);
    }
  }
  return y;
}

CVec apply_dm(const SplitNep &nep, Complex lambda, const CVec &x, Op mode)
{
  if (x.size() != nep.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "apply_dm: vector length");
  }
  CVec y = CVec::Zero(nep.dim());
  for (const auto &t : nep.terms()) {
    const Complex df = t.family.derivative(lambda);
    if (df == Complex(0.0, 0.0)) continue;
    if (mode == Op::Normal) {
      y += df * (t.matrix * x);
    } else {
      y += std::conj(df) * (t.matrix.adjoint() * x);
    }
  }
  return y;
}

std::vector<Complex> taylor_block(const SplitNep &nep, Index j)
{
  if (j < 1) {
    throw Error(ErrorCode::InvalidArgument, "taylor_block: order must be >= 1");
  }
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(nep.num_terms()));
  for (const auto &t : nep.terms()) {
    out.push_back(t.family.taylor(j));
  }
  return out;
}

CVec apply_terms(const SplitNep &nep, const CDense &z, const CDense &weights, Op mode)
{
  if (z.rows() != nep.dim() || weights.rows() != z.cols() || weights.cols() != nep.num_terms()) {
    throw Error(ErrorCode::DimensionMismatch, "apply_terms: shape mismatch");
  }
  const CDense acc = z * weights;  // n x p
  CVec y = CVec::Zero(nep.dim());
  for (Index k = 0; k < nep.num_terms(); ++k) {
    if (weights.col(k).isZero(0.0)) continue;
    if (mode == Op::Normal) {
      y += nep.term(k).matrix * acc.col(k);
    } else {
      y += nep.term(k).matrix.adjoint() * acc.col(k);
    }
  }
  return y;
}

namespace {

/// weights(i-1, k) = f_k^(i)(0) for i = 1..m.
CDense derivative_weights(const SplitNep &nep, Index m)
{
  CDense w(m, nep.num_terms());
  for (Index k = 0; k < nep.num_terms(); ++k) {
    const auto d = nep.term(k).family.derivative_over_order(m);
    for (Index i = 1; i <= m; ++i) {
      w(i - 1, k) = double(i) * d[static_cast<std::size_t>(i)];
    }
  }
  return w;
}

}  // namespace

CVec lincomb(const SplitNep &nep, const CDense &z)
{
  if (z.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "lincomb needs at least one vector");
  }
  return apply_terms(nep, z, derivative_weights(nep, z.cols()), Op::Normal);
}

CVec lincomb_star(const SplitNep &nep, const CDense &z)
{
  if (z.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "lincomb_star needs at least one vector");
  }
  return apply_terms(nep, z, derivative_weights(nep, z.cols()).conjugate(), Op::ConjTranspose);
}

CSparse m_at_zero(const SplitNep &nep)
{
  CSparse m(nep.dim(), nep.dim());
  for (const auto &t : nep.terms()) {
    const Complex c0 = t.family.taylor(0);
    if (c0 != Complex(0.0, 0.0)) {
      m += c0 * t.matrix;
    }
  }
  m.makeCompressed();
  return m;
}

SplitNep shift_nep(const SplitNep &nep, const ShiftScale &ss)
{
  ss.validate();
  std::vector<NepTerm> terms;
  for (const auto &t : nep.terms()) terms.push_back({t.matrix, t.family.shifted(ss)});
  return SplitNep(std::move(terms), nep.name());
}

}  // namespace nep
