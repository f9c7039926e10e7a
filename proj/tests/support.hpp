#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nep/problems.hpp"
#include "nep/split_nep.hpp"

namespace nep::testing {

inline double rel_diff(Complex a, Complex b)
{
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline CDense random_dense(Index rows, Index cols, std::mt19937_64 &rng)
{
  std::normal_distribution<double> g(0.0, 1.0);
  CDense m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

inline CVec random_vec(Index n, std::mt19937_64 &rng) { return random_dense(n, 1, rng).col(0); }

/// Small random split NEP: M(0) diagonally dominated, the remaining
/// families have Taylor coefficients that decay fast enough for a dense
/// truncation with a few dozen blocks.
inline SplitNep random_nep(Index n, Index p, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<NepTerm> terms;

  CDense m0 = random_dense(n, n, rng) + 3.0 * double(n) * CDense::Identity(n, n);
  terms.push_back({to_sparse(m0 / double(n)), ScalarFamily::constant(1.0)});

  terms.push_back({to_sparse(random_dense(n, n, rng) / double(n)),
                   ScalarFamily::exp_scaled(Complex(u(rng), u(rng)), Complex(u(rng), 0.3 * u(rng)))});
  if (p >= 3) {
    if (seed % 2 == 0) {
      terms.push_back({to_sparse(random_dense(n, n, rng) / double(n)),
                       ScalarFamily::polynomial({0.0, Complex(u(rng), u(rng)), Complex(u(rng), u(rng))})});
    } else {
      terms.push_back({to_sparse(random_dense(n, n, rng) / double(n)),
                       ScalarFamily::sqrt_shifted(Complex(u(rng), u(rng)), Complex(0.15 * u(rng), 0.0),
                                                  Complex(1.0, 0.2 * u(rng)))});
    }
  }
  return SplitNep(std::move(terms), "random");
}

}  // namespace nep::testing
