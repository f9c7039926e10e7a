#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace nep {

using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Length-n complex vector.
using CVec = Eigen::VectorXcd;
/// Column-major dense complex matrix.
using CDense = Eigen::MatrixXcd;
/// Compressed-column sparse complex matrix.
using CSparse = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  SingularMatrix,
  NoConvergence,
  OutsideRadius,
  BranchCut,
  ParseError,
  FileNotFound,
  Breakdown,
  LuckyBreakdown,
  InvariantViolation,
  DegenerateDerivative,
};

const char *to_string(ErrorCode code);

/// Exception type for every failure raised by the library.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Apply a matrix as-is or as its conjugate transpose.
enum class Op { Normal, ConjTranspose };

}  // namespace nep
