#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "nep/split_nep.hpp"

namespace nep {

/// sigma_2 of the electromagnetic cavity ("gun") problem.
inline constexpr double kGunSigma2 = 108.8774;

/// Shift and scale used for the gun problem: lambda = 300^2 + (300^2 - 200^2) * 10 * lambda_hat.
inline ShiftScale gun_default_shift()
{
  return {Complex(300.0 * 300.0, 0.0), Complex((300.0 * 300.0 - 200.0 * 200.0) * 10.0, 0.0)};
}

/// M(lambda) = -lambda^2 I + A0 + exp(-lambda) A1.
SplitNep make_dep(const CSparse &a0, const CSparse &a1);

/// M(lambda) = A0 - lambda A1 + i sqrt(lambda) A2 + i sqrt(lambda - sigma2^2) A3,
/// expressed in lambda_hat with lambda = shift + scale * lambda_hat.
/// Throws BranchCut when the shift puts lambda_hat = 0 on a square-root branch cut.
SplitNep make_gun(const CSparse &a0, const CSparse &a1, const CSparse &a2, const CSparse &a3,
                  double sigma2 = kGunSigma2, const ShiftScale &ss = gun_default_shift());

/// M(lambda) = sum_j coeffs[j] lambda^j.
SplitNep make_pep(const std::vector<CSparse> &coeffs);

/// n x n sparse matrix with Bernoulli(density) pattern and N(0, 1) real entries.
CSparse random_sparse(Index n, double density, std::uint64_t seed);

/// Delay problem with random A0, A1 (regression baseline: seed 1, density 0.01).
SplitNep make_random_dep(Index n = 1000, std::uint64_t seed = 1, double density = 0.01);

/// diag(lambda^2 - 1, lambda^2 - 4) as a PEP.
SplitNep make_quadratic_demo();

/// Build a SplitNep from a JSON problem file. Matrix paths are resolved
/// relative to the file's directory.
SplitNep load_problem(const std::filesystem::path &path);

}  // namespace nep
