#include "nep/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <type_traits>

#include <Eigen/Eigenvalues>

namespace nep {

const char *to_string(ErrorCode code)
{
  switch (code) {
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  case ErrorCode::DimensionMismatch: return "DimensionMismatch";
  case ErrorCode::SingularMatrix: return "SingularMatrix";
  case ErrorCode::NoConvergence: return "NoConvergence";
  case ErrorCode::OutsideRadius: return "OutsideRadius";
  case ErrorCode::BranchCut: return "BranchCut";
  case ErrorCode::ParseError: return "ParseError";
  case ErrorCode::FileNotFound: return "FileNotFound";
  case ErrorCode::Breakdown: return "Breakdown";
  case ErrorCode::LuckyBreakdown: return "LuckyBreakdown";
  case ErrorCode::InvariantViolation: return "InvariantViolation";
  case ErrorCode::DegenerateDerivative: return "DegenerateDerivative";
  }
  return "Unknown";
}

LuFactors lu_factorize(const CSparse &m)
{
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "lu_factorize needs a square matrix");
  }
  LuFactors f;
  f.dim_ = m.rows();
  f.solver_ = std::make_shared<LuFactors::Solver>();
  CSparse a = m;
  a.makeCompressed();
  f.solver_->analyzePattern(a);
  f.solver_->factorize(a);
  if (f.solver_->info() != Eigen::Success) {
    throw Error(ErrorCode::SingularMatrix, f.solver_->lastErrorMessage());
  }

  // The diagonal of U lives in the supernodal L storage.
  auto u = f.solver_->matrixU();
  double min_pivot = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < f.dim_; ++j) {
    double pivot = 0.0;
    using MapL = std::remove_cvref_t<decltype(u.m_mapL)>;
    for (MapL::InnerIterator it(u.m_mapL, j); it; ++it) {
      if (it.index() == j) {
        pivot = std::abs(it.value());
        break;
      }
    }
    min_pivot = std::min(min_pivot, pivot);
  }
  f.min_pivot_ = f.dim_ == 0 ? 0.0 : min_pivot;
  if (f.dim_ > 0 && !(min_pivot >= kSingularPivot)) {
    std::ostringstream msg;
    msg << "pivot magnitude " << min_pivot << " below " << kSingularPivot
        << " (0 may be an eigenvalue; apply a shift)";
    throw Error(ErrorCode::SingularMatrix, msg.str());
  }
  return f;
}

CDense lu_solve(const LuFactors &f, const CDense &b, Op mode)
{
  if (!f.solver_) {
    throw Error(ErrorCode::InvalidArgument, "lu_solve on an empty factorization");
  }
  if (b.rows() != f.dim_) {
    throw Error(ErrorCode::DimensionMismatch, "right-hand side length does not match factorization");
  }
  if (mode == Op::Normal) {
    return f.solver_->solve(b);
  }
  return f.solver_->adjoint().solve(b);
}

CVec lu_solve(const LuFactors &f, const CVec &b, Op mode)
{
  CDense x = lu_solve(f, CDense(b), mode);
  return x.col(0);
}

CVec sparse_matvec(const CSparse &m, const CVec &x, Op mode)
{
  const Index in_dim = mode == Op::Normal ? m.cols() : m.rows();
  if (x.size() != in_dim) {
    throw Error(ErrorCode::DimensionMismatch, "sparse_matvec: vector length does not match matrix");
  }
  if (mode == Op::Normal) {
    return m * x;
  }
  return m.adjoint() * x;
}

namespace {

CVec normalized(const CVec &v)
{
  const double nrm = v.norm();
  return nrm > 0.0 ? CVec(v / nrm) : v;
}

}  // namespace

std::vector<EigenTriplet> dense_eig(const CDense &a, const DenseEigOptions &opts)
{
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "dense_eig needs a square matrix");
  }
  if (a.rows() > opts.max_dim) {
    throw Error(ErrorCode::InvalidArgument, "dense_eig: dimension exceeds configured cap");
  }
  const Index n = a.rows();
  std::vector<EigenTriplet> out;
  if (n == 0) {
    return out;
  }

  Eigen::ComplexEigenSolver<CDense> right(a, true);
  if (right.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "QR iteration failed on A");
  }
  Eigen::ComplexEigenSolver<CDense> left(a.adjoint(), true);
  if (left.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "QR iteration failed on A^*");
  }

  // Greedy closest-conjugate pairing. Eigenvalues are processed in order of
  // their best match distance so well-separated pairs lock in first.
  const auto &mu = left.eigenvalues();
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::vector<Index> partner(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < n; ++i) {
    order[static_cast<std::size_t>(i)] = i;
  }
  auto best_distance = [&](Index i) {
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n; ++j) {
      best = std::min(best, std::abs(mu(j) - std::conj(right.eigenvalues()(i))));
    }
    return best;
  };
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    dist[static_cast<std::size_t>(i)] = best_distance(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
    return dist[static_cast<std::size_t>(x)] < dist[static_cast<std::size_t>(y)];
  });
  for (Index i : order) {
    const Complex target = std::conj(right.eigenvalues()(i));
    Index best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      const double d = std::abs(mu(j) - target);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    partner[static_cast<std::size_t>(i)] = best;
  }

  out.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    EigenTriplet t;
    t.value = right.eigenvalues()(i);
    t.right = normalized(right.eigenvectors().col(i));
    t.left = normalized(left.eigenvectors().col(partner[static_cast<std::size_t>(i)]));
    out.push_back(std::move(t));
  }
  return out;
}

double frobenius_norm(const CSparse &m)
{
  return m.norm();
}

double two_norm_estimate(const CSparse &m, int max_steps, double tol)
{
  if (m.nonZeros() == 0) {
    return 0.0;
  }
  // Deterministic start with no structured zero pattern.
  CVec x(m.cols());
  for (Index i = 0; i < x.size(); ++i) {
    x(i) = Complex(1.0 + 0.1 * std::sin(double(i)), 0.05 * std::cos(3.0 * double(i)));
  }
  x.normalize();
  double sigma = 0.0;
  for (int step = 0; step < max_steps; ++step) {
    CVec y = m * x;
    CVec z = m.adjoint() * y;
    const double next = std::sqrt(z.norm());
    const double znorm = z.norm();
    if (znorm == 0.0) {
      return sigma;
    }
    x = z / znorm;
    if (step > 0 && std::abs(next - sigma) <= tol * next) {
      return next;
    }
    sigma = next;
  }
  return sigma;
}

CSparse sparse_identity(Index n)
{
  CSparse id(n, n);
  id.setIdentity();
  return id;
}

CSparse to_sparse(const CDense &m, double drop_tol)
{
  std::vector<Eigen::Triplet<Complex>> trips;
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (std::abs(m(i, j)) > drop_tol) {
        trips.emplace_back(static_cast<int>(i), static_cast<int>(j), m(i, j));
      }
    }
  }
  CSparse s(m.rows(), m.cols());
  s.setFromTriplets(trips.begin(), trips.end());
  return s;
}

namespace {

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

CSparse read_matrix_market(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::FileNotFound, path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::ParseError, path.string() + ": empty file");
  }
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix") {
    throw Error(ErrorCode::ParseError, path.string() + ": missing %%MatrixMarket matrix banner");
  }
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (format != "coordinate") {
    throw Error(ErrorCode::ParseError, path.string() + ": only coordinate format is supported");
  }
  if (field != "real" && field != "complex" && field != "integer" && field != "pattern") {
    throw Error(ErrorCode::ParseError, path.string() + ": unknown field '" + field + "'");
  }
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "hermitian" &&
      symmetry != "skew-symmetric") {
    throw Error(ErrorCode::ParseError, path.string() + ": unknown symmetry '" + symmetry + "'");
  }

  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  long rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream size_line(line);
    if (!(size_line >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
      throw Error(ErrorCode::ParseError, path.string() + ": bad size line");
    }
  }

  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(static_cast<std::size_t>(symmetry == "general" ? nnz : 2 * nnz));
  for (long e = 0; e < nnz; ++e) {
    if (!std::getline(in, line)) {
      throw Error(ErrorCode::ParseError, path.string() + ": fewer entries than declared");
    }
    if (line.empty() || line[0] == '%') {
      --e;
      continue;
    }
    std::istringstream entry(line);
    long i = 0, j = 0;
    double re = 1.0, im = 0.0;
    entry >> i >> j;
    if (field != "pattern") entry >> re;
    if (field == "complex") entry >> im;
    if (entry.fail() || i < 1 || j < 1 || i > rows || j > cols) {
      throw Error(ErrorCode::ParseError, path.string() + ": bad entry '" + line + "'");
    }
    const Complex v(re, im);
    trips.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
    if (i != j) {
      if (symmetry == "symmetric") trips.emplace_back(int(j - 1), int(i - 1), v);
      if (symmetry == "hermitian") trips.emplace_back(int(j - 1), int(i - 1), std::conj(v));
      if (symmetry == "skew-symmetric") trips.emplace_back(int(j - 1), int(i - 1), -v);
    }
  }
  CSparse m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

void write_matrix_market(const std::filesystem::path &path, const CSparse &m)
{
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::FileNotFound, "cannot open " + path.string() + " for writing");
  }
  out << "%%MatrixMarket matrix coordinate complex general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  out << std::setprecision(17);
  for (Index j = 0; j < m.outerSize(); ++j) {
    for (CSparse::InnerIterator it(m, j); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value().real() << ' '
          << it.value().imag() << '\n';
    }
  }
  if (!out) {
    throw Error(ErrorCode::FileNotFound, "write failed for " + path.string());
  }
}

}  // namespace nep
