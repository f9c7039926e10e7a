#pragma once

#include "nep/bilanczos.hpp"

namespace nep {

struct IarOptions {
  Index max_iter = 50;
  double tol = 1e-10;
  Index nev = 0;
  Index ritz_stride = 5;
  double stability_tol = 1e-8;
  double lucky_tol = 1e-14;
};

/// Infinite Arnoldi on the companion operator, orthonormal in the Euclidean
/// product of the stacked plain Taylor coefficients.
///
/// Basis column j occupies the first (j + 1) n rows of a stacked
/// (max_iter + 1) n x (max_iter + 1) matrix; H is the (k + 1) x k Hessenberg.
class InfArnoldi {
public:
  InfArnoldi(const SplitNep &nep, IarOptions opts = {});
  InfArnoldi(const SplitNep &nep, LuFactors lu, IarOptions opts = {});

  /// Throws LuckyBreakdown on a zero start vector.
  void start(const CVec &q1);
  /// Throws LuckyBreakdown when the new direction vanishes.
  void step();

  /// Right Ritz pairs of H_k lifted to the NEP (y empty, lres and kappa NaN).
  std::vector<RitzTriplet> extract_ritz() const;

  Index iterations() const { return k_; }
  /// Stacked basis restricted to its nonzero part: (k + 1) n x (k + 1).
  CDense basis() const;
  /// (k + 1) x k Hessenberg matrix.
  CDense hessenberg() const { return h_.topLeftCorner(k_ + 1, k_); }

private:
  const SplitNep *nep_;
  LuFactors lu_;
  IarOptions opts_;
  Index k_ = 0;
  bool exhausted_ = false;
  CDense v_;
  CDense h_;
  CDense weights_;  // max_iter x p, entry (j-1, k) = f_k^(j)(0) / j
};

/// Loop + Ritz extraction with the same history format as the bi-Lanczos solve.
SolveResult iar_solve(const SplitNep &nep, const CVec &q1, const IarOptions &opts = {});

}  // namespace nep
