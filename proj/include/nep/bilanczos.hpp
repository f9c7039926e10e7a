#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nep/history.hpp"
#include "nep/linalg.hpp"
#include "nep/split_nep.hpp"

namespace nep {

/// Right-type infinite vector sum_l e_l (x) a_l with finite support.
///
/// Column l (0-based) stores l! * a_{l+1}, so the companion action only shifts
/// columns and never rescales them.
struct CoeffBasisRight {
  CDense coeffs;

  Index dim() const { return coeffs.rows(); }
  Index cols() const { return coeffs.cols(); }
};

/// Left-type infinite vector sum_j (S^T (x) I)^{j-1} N^* a~_j.
///
/// Column j stores M(0)^{-*} a~_j; with this scaling the adjoint action needs a
/// single solve and scalar products need none.
struct CoeffBasisLeft {
  CDense coeffs;

  Index dim() const { return coeffs.rows(); }
  Index cols() const { return coeffs.cols(); }
};

/// Tridiagonal projection T_k.
///
/// alpha[i] = alpha_{i+1}; beta[i] = beta_{i+2} (subdiagonal); gamma[i] =
/// gamma_{i+2} (superdiagonal). After k steps alpha has k entries while beta
/// and gamma have k entries (the last pair couples to the next basis vector).
struct TridiagT {
  std::vector<Complex> alpha;
  std::vector<Complex> beta;
  std::vector<Complex> gamma;

  Index size() const { return static_cast<Index>(alpha.size()); }
  /// Leading k x k block (k <= size()).
  CDense dense(Index k) const;
  CDense dense() const { return dense(size()); }
};

enum class ScalarProduct { Naive, Split };

/// Companion action on a right vector: k columns in, k + 1 columns out.
CoeffBasisRight action_a(const SplitNep &nep, const LuFactors &lu, const CoeffBasisRight &a);
/// Adjoint companion action on a left vector: k columns in, k + 1 columns out.
CoeffBasisLeft action_a_star(const SplitNep &nep, const LuFactors &lu, const CoeffBasisLeft &a);

/// Infinite scalar product a~^* b, one sparse product per (column of a~, term).
Complex dot_naive(const SplitNep &nep, const CoeffBasisLeft &at, const CoeffBasisRight &b);
/// Same value through the projected matrices A~^* M_k B, formed once per term.
Complex dot_split(const SplitNep &nep, const CoeffBasisLeft &at, const CoeffBasisRight &b);
Complex dot(const SplitNep &nep, const CoeffBasisLeft &at, const CoeffBasisRight &b,
            ScalarProduct kind);

/// Euclidean norm of the (finitely supported) right vector.
double norm(const CoeffBasisRight &b);
/// Euclidean norm of the first `blocks` blocks of a left vector. Only these
/// blocks meet a right vector supported on `blocks` blocks.
double leading_norm(const SplitNep &nep, const CoeffBasisLeft &at, Index blocks);

/// Approximate eigentriplet of the NEP lifted from an eigentriplet of T_k.
struct RitzTriplet {
  Complex theta;   // Ritz value of the projection
  Complex lambda;  // 1 / theta
  CVec x;          // right vector, unit norm
  CVec y;          // left vector, unit norm (empty for one-sided methods)
  double rres = 0.0;
  double lres = 0.0;
  double kappa = 0.0;
  /// |beta_{k+1}| |e_k^T z|, the projected residual.
  double ritz_estimate = 0.0;
  /// False when |lambda| is outside the convergence radius; residuals are +inf then.
  bool inside_radius = true;
  bool converged = false;
};

struct Residuals {
  double rres;
  double lres;
};

/// Relative residuals ||M(l) x|| / (sum_k |f_k(l)| ||M_k||_F ||x||), and the same for M(l)^* y.
Residuals residuals(const SplitNep &nep, Complex lambda, const CVec &x, const CVec &y);
double right_residual(const SplitNep &nep, Complex lambda, const CVec &x);

/// kappa = a ||x|| ||y|| / (|lambda| |y^* M'(lambda) x|) with a = sum_k |f_k(lambda)| ||M_k||_2.
double condition_number(const SplitNep &nep, Complex lambda, const CVec &x, const CVec &y);

/// Map triplets of shift_nep(original, ss) back to the original variable and
/// recompute residuals and condition numbers there.
void unshift(const SplitNep &original, const ShiftScale &ss, std::vector<RitzTriplet> &triplets);

struct BiLanczosOptions {
  Index max_iter = 50;
  double tol = 1e-10;
  /// Stop once this many triplets are converged; 0 runs to max_iter.
  Index nev = 0;
  /// Breakdown when |omega| <= breakdown_tol ||r|| ||s||, both norms taken on
  /// the infinite vectors (s restricted to the support of r).
  double breakdown_tol = 1e-14;
  /// r or s counts as zero (invariant subspace) below this fraction of the
  /// norm of the corresponding companion action.
  double invariant_tol = 1e-10;
  bool rebiorthogonalize = false;
  ScalarProduct scalar_product = ScalarProduct::Split;
  /// Split products fall back to the naive route above this many terms.
  Index split_max_terms = 16;
  /// Extract Ritz triplets every this many iterations (and at the last one).
  Index ritz_stride = 5;
  /// Relative change a converged Ritz value may show between checks.
  double stability_tol = 1e-8;
};

/// Scale the start pair so the infinite product of the induced vectors is 1.
/// Throws Breakdown when that product is numerically zero.
std::pair<CoeffBasisRight, CoeffBasisLeft> normalize_start(const SplitNep &nep, const LuFactors &lu,
                                                           const CVec &q1, const CVec &qt1);

/// Infinite bi-Lanczos iteration state.
///
/// Holds the two most recent basis pairs plus the first comp column of every
/// basis vector, which is all Ritz extraction needs. The NEP must outlive the
/// state; the factorization of M(0) is owned.
class InfBiLanczos {
public:
  InfBiLanczos(const SplitNep &nep, BiLanczosOptions opts = {});
  InfBiLanczos(const SplitNep &nep, LuFactors lu, BiLanczosOptions opts = {});

  /// Normalize and install a start pair.
  void start(const CVec &q1, const CVec &qt1);
  /// Install an already normalized pair as-is.
  void start(CoeffBasisRight p1, CoeffBasisLeft pt1);

  /// One iteration. Throws Breakdown or InvariantViolation with the state
  /// unchanged. When r or s vanishes the step is completed with
  /// beta = gamma = 0, further steps are refused and LuckyBreakdown is thrown.
  void step();

  /// Eigentriplets of T_k lifted to the NEP, sorted by |lambda|.
  std::vector<RitzTriplet> extract_ritz() const;

  Index iterations() const { return k_; }
  const TridiagT &tridiag() const { return t_; }
  const SplitNep &nep() const { return *nep_; }
  const LuFactors &lu() const { return lu_; }
  const BiLanczosOptions &options() const { return opts_; }

  /// Current basis pair P_{k+1}, P~_{k+1}.
  const CoeffBasisRight &right_basis() const { return p_cur_; }
  const CoeffBasisLeft &left_basis() const { return pt_cur_; }
  /// All basis vectors, available when rebiorthogonalization is on or
  /// keep_all_bases(true) was called before start().
  const std::vector<CoeffBasisRight> &all_right() const { return all_p_; }
  const std::vector<CoeffBasisLeft> &all_left() const { return all_pt_; }
  void keep_all_bases(bool keep) { keep_all_ = keep; }

  double scalar_product_seconds() const { return scalar_seconds_; }

private:
  Complex product(const CoeffBasisLeft &at, const CoeffBasisRight &b);

  const SplitNep *nep_;
  LuFactors lu_;
  BiLanczosOptions opts_;
  Index k_ = 0;
  bool exhausted_ = false;
  TridiagT t_;
  CoeffBasisRight p_prev_, p_cur_;
  CoeffBasisLeft pt_prev_, pt_cur_;
  CDense x_first_;  // n x (k + 1): first column of P_1 .. P_{k+1}
  CDense y_first_;
  bool keep_all_ = false;
  std::vector<CoeffBasisRight> all_p_;
  std::vector<CoeffBasisLeft> all_pt_;
  double scalar_seconds_ = 0.0;
};

enum class StopReason { Converged, MaxIterations, Breakdown, InvariantSubspace };
const char *to_string(StopReason r);

struct SolveResult {
  std::vector<RitzTriplet> triplets;
  ConvergenceHistory history;
  StopReason reason = StopReason::MaxIterations;
  std::string message;
  Index iterations = 0;
  TridiagT tridiag;
};

/// Run the infinite bi-Lanczos iteration from (q1, qt1).
///
/// Breakdown does not throw: the result carries the triplets and history up
/// to the last completed step with reason == Breakdown.
SolveResult solve(const SplitNep &nep, const CVec &q1, const CVec &qt1, const BiLanczosOptions &opts = {});

namespace detail {

/// -M(0)^{-1} sum_k M_k (Z weights.col(k)), or the adjoint variant.
CVec companion_head(const SplitNep &nep, const LuFactors &lu, const CDense &z,
                    const CDense &weights, Op mode);

/// Convergence bookkeeping shared by both Krylov solvers.
class ConvergenceMonitor {
public:
  ConvergenceMonitor(double tol, double stability_tol) : tol_(tol), stab_(stability_tol) {}

  /// Marks converged triplets and returns how many there are. With `exact`
  /// (invariant subspace reached) the stability requirement is dropped.
  Index update(std::vector<RitzTriplet> &triplets, bool exact = false);

private:
  double tol_;
  double stab_;
  std::vector<Complex> prev_;
  std::vector<Complex> prev2_;
};

}  // namespace detail

}  // namespace nep
