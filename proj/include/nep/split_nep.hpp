#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nep/linalg.hpp"
#include "nep/scalar_family.hpp"

namespace nep {

struct NepTerm {
  CSparse matrix;
  ScalarFamily family;
};

/// Nonlinear eigenvalue problem in split form M(lambda) = sum_k M_k f_k(lambda).
///
/// Immutable after construction. Norms of the coefficient matrices are cached
/// at construction for residual and condition-number scaling.
class SplitNep {
public:
  explicit SplitNep(std::vector<NepTerm> terms, std::string name = {});

  Index dim() const { return dim_; }
  Index num_terms() const { return static_cast<Index>(terms_.size()); }
  const std::vector<NepTerm> &terms() const { return terms_; }
  const NepTerm &term(Index k) const { return terms_[static_cast<std::size_t>(k)]; }
  const std::string &name() const { return name_; }

  /// Smallest convergence radius among the scalar families.
  double radius() const;

  /// ||M_k||_F per term.
  const std::vector<double> &frobenius_norms() const { return fro_norms_; }
  /// Power-iteration estimates of ||M_k||_2 per term.
  const std::vector<double> &two_norms() const { return two_norms_; }

  /// p x (jmax + 1) table with entry (k, j) = f_k^(j)(0) / j!.
  CDense taylor_table(Index jmax) const;

private:
  std::vector<NepTerm> terms_;
  std::string name_;
  Index dim_ = 0;
  std::vector<double> fro_norms_;
  std::vector<double> two_norms_;
};

/// M(lambda) assembled as a sparse matrix.
CSparse eval_m(const SplitNep &nep, Complex lambda);

/// op(M(lambda)) x without assembling M(lambda).
CVec apply_m(const SplitNep &nep, Complex lambda, const CVec &x, Op mode = Op::Normal);
/// op(M'(lambda)) x.
CVec apply_dm(const SplitNep &nep, Complex lambda, const CVec &x, Op mode = Op::Normal);

/// (c_{1,j}, ..., c_{p,j}) with c_{k,j} = f_k^(j)(0) / j!.
std::vector<Complex> taylor_block(const SplitNep &nep, Index j);

/// sum_k op(M_k) (Z * weights.col(k)).
///
/// Z is n x m, weights is m x p. Each M_k touches one accumulated vector, so
/// the cost is one sparse product per term regardless of m.
CVec apply_terms(const SplitNep &nep, const CDense &z, const CDense &weights, Op mode);

/// sum_{i=1..m} M^(i)(0) z_i with z_i the columns of Z.
CVec lincomb(const SplitNep &nep, const CDense &z);
/// sum_{i=1..m} M^(i)(0)^* z_i with z_i the columns of Z.
CVec lincomb_star(const SplitNep &nep, const CDense &z);

/// M(0) = sum_k M_k f_k(0).
CSparse m_at_zero(const SplitNep &nep);

/// M_hat(mu) = M(shift + scale * mu), term by term.
SplitNep shift_nep(const SplitNep &nep, const ShiftScale &ss);

}  // namespace nep
