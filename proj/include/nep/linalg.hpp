#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "nep/types.hpp"

namespace nep {

/// Reusable sparse LU factorization of a square complex matrix.
///
/// Both M x = b and M^* x = b are solved from the same factors. The object is
/// immutable after construction and cheap to copy (the factors are shared).
class LuFactors {
public:
  using Solver = Eigen::SparseLU<CSparse, Eigen::COLAMDOrdering<int>>;

  Index dim() const { return dim_; }
  /// Smallest |u_ii| seen during factorization.
  double min_pivot() const { return min_pivot_; }

private:
  friend LuFactors lu_factorize(const CSparse &m);
  friend CVec lu_solve(const LuFactors &f, const CVec &b, Op mode);
  friend CDense lu_solve(const LuFactors &f, const CDense &b, Op mode);

  std::shared_ptr<Solver> solver_;
  Index dim_ = 0;
  double min_pivot_ = 0.0;
};

/// Pivots below this magnitude are treated as exact zeros.
inline constexpr double kSingularPivot = 1e-300;

LuFactors lu_factorize(const CSparse &m);
CVec lu_solve(const LuFactors &f, const CVec &b, Op mode = Op::Normal);
CDense lu_solve(const LuFactors &f, const CDense &b, Op mode = Op::Normal);

CVec sparse_matvec(const CSparse &m, const CVec &x, Op mode = Op::Normal);

struct EigenTriplet {
  Complex value;
  CVec right;  // A z = value z, unit norm
  CVec left;   // A^* w = conj(value) w, unit norm
};

struct DenseEigOptions {
  Index max_dim = 2000;
  /// Relative tolerance (times ||A||) for pairing eigenvalues of A and A^*.
  double pairing_tol = 1e-8;
};

/// Eigenvalues with right and left eigenvectors of a small dense matrix.
///
/// Left vectors come from a separate eigendecomposition of A^*, paired to the
/// right ones by nearest conjugate eigenvalue. Throws NoConvergence if the QR
/// iteration fails.
std::vector<EigenTriplet> dense_eig(const CDense &a, const DenseEigOptions &opts = {});

double frobenius_norm(const CSparse &m);

/// Power-iteration estimate of ||m||_2 on m^* m.
double two_norm_estimate(const CSparse &m, int max_steps = 50, double tol = 1e-6);

CSparse sparse_identity(Index n);
CSparse to_sparse(const CDense &m, double drop_tol = 0.0);

// Matrix Market coordinate files, 1-based indices.
CSparse read_matrix_market(const std::filesystem::path &path);
void write_matrix_market(const std::filesystem::path &path, const CSparse &m);

}  // namespace nep
