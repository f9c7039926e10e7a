#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "nep/types.hpp"

namespace nep {

/// Change of variables lambda = shift + scale * lambda_hat.
struct ShiftScale {
  Complex shift{0.0, 0.0};
  Complex scale{1.0, 0.0};

  /// Throws InvalidArgument when scale == 0.
  void validate() const;
};

/// sum_j coeffs[j] * lambda^j
struct Polynomial {
  std::vector<Complex> coeffs;
};

/// a * exp(b * lambda)
struct ScaledExp {
  Complex a{1.0, 0.0};
  Complex b{1.0, 0.0};
};

/// a * sqrt(c + b * lambda), on the branch that is principal at lambda = 0.
struct ShiftedSqrt {
  Complex a{1.0, 0.0};
  Complex b{1.0, 0.0};
  Complex c{1.0, 0.0};
};

/// Scalar analytic function f with exact Taylor coefficients at 0.
///
/// Taylor coefficients are exposed in divided form c_j = f^(j)(0) / j!, built
/// from ratio recurrences so no factorial is ever formed.
class ScalarFamily {
public:
  using Kind = std::variant<Polynomial, ScaledExp, ShiftedSqrt>;

  static ScalarFamily polynomial(std::vector<Complex> coeffs);
  static ScalarFamily constant(Complex value) { return polynomial({value}); }
  static ScalarFamily exp_scaled(Complex a, Complex b);
  /// Throws BranchCut when c lies on (-inf, 0].
  static ScalarFamily sqrt_shifted(Complex a, Complex b, Complex c);

  const Kind &kind() const { return kind_; }

  /// Convergence radius of the Taylor series at 0 (infinity for entire functions).
  double radius() const;

  /// f(lambda); throws OutsideRadius when |lambda| >= radius().
  Complex eval(Complex lambda) const;
  /// f'(lambda), same domain rules as eval.
  Complex derivative(Complex lambda) const;

  /// c_j = f^(j)(0) / j!
  Complex taylor(Index j) const;
  /// c_0 .. c_jmax
  std::vector<Complex> taylor_series(Index jmax) const;
  /// Entry j holds f^(j)(0) / j for j >= 1 (entry 0 is zero). Used by the
  /// plain-coefficient companion action.
  std::vector<Complex> derivative_over_order(Index jmax) const;

  /// g(lambda_hat) = f(shift + scale * lambda_hat), in the same family.
  ScalarFamily shifted(const ShiftScale &ss) const;

  std::string describe() const;

private:
  explicit ScalarFamily(Kind kind) : kind_(std::move(kind)) {}
  void check_radius(Complex lambda) const;

  Kind kind_;
};

}  // namespace nep
