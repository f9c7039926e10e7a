#pragma once

#include "nep/bilanczos.hpp"

namespace nep {

/// Explicit (N n) x (N n) truncation of the companion operator
/// A = e_1 (x) [N_1 N_2 ...] + S (x) I with N_j = -M(0)^{-1} M^(j)(0) / j.
struct TruncatedCompanion {
  CDense matrix;
  Index blocks = 0;
  Index n = 0;
};

/// Throws InvalidArgument when N n exceeds max_dim.
TruncatedCompanion build_truncation(const SplitNep &nep, Index blocks, Index max_dim = 2000);
TruncatedCompanion build_truncation(const SplitNep &nep, const LuFactors &lu, Index blocks,
                                    Index max_dim = 2000);

struct DenseBiLanczos {
  TridiagT t;
  CDense q;   // columns q_1 .. q_{k+1}
  CDense qt;  // columns q~_1 .. q~_{k+1}
};

/// Textbook two-sided Lanczos on a dense matrix, k steps.
///
/// The start pair is rescaled internally so that q~_1^* q_1 = 1. Throws
/// Breakdown when |omega| <= 1e-14 ||r|| ||s||. With k equal to the dimension
/// the last step closes T with beta = gamma = 0.
DenseBiLanczos two_sided_lanczos(const CDense &a, const CVec &q1, const CVec &qt1, Index k);

/// Reciprocal eigenvalues of the truncation with |lambda| < window_radius,
/// deduplicated at relative distance 1e-8 and sorted by modulus.
std::vector<Complex> reference_eigs(const SplitNep &nep, Index blocks, double window_radius);

/// Block j of the result is a_j = coeffs.col(j-1) / (j-1)!; zero past the support.
CVec expand_right(const CoeffBasisRight &a, Index blocks);

/// First N blocks of sum_j (S^T (x) I)^{j-1} N^* a~_j with a~_j = M(0)^* coeffs.col(j-1).
CVec expand_left(const SplitNep &nep, const CoeffBasisLeft &a, Index blocks);

}  // namespace nep
