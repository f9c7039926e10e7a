#include "nep/bilanczos.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace nep {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// weights(j-1, k) = c_{k, j} for j = 1..m.
CDense taylor_weights(const SplitNep &nep, Index m)
{
  const CDense table = nep.taylor_table(m);
  return table.rightCols(m).transpose();
}

void check_dims(const SplitNep &nep, Index rows, const char *what)
{
  if (rows != nep.dim()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": coefficient rows != NEP dimension");
  }
}

bool all_finite(const CDense &m)
{
  return m.allFinite();
}

}  // namespace

CDense TridiagT::dense(Index k) const
{
  if (k > size()) {
    throw Error(ErrorCode::InvalidArgument, "TridiagT::dense: k exceeds iteration count");
  }
  CDense t = CDense::Zero(k, k);
  for (Index i = 0; i < k; ++i) {
    t(i, i) = alpha[static_cast<std::size_t>(i)];
    if (i + 1 < k) {
      t(i + 1, i) = beta[static_cast<std::size_t>(i)];
      t(i, i + 1) = gamma[static_cast<std::size_t>(i)];
    }
  }
  return t;
}

namespace detail {

CVec companion_head(const SplitNep &nep, const LuFactors &lu, const CDense &z,
                    const CDense &weights, Op mode)
{
  return -lu_solve(lu, apply_terms(nep, z, weights, mode), mode);
}

Index ConvergenceMonitor::update(std::vector<RitzTriplet> &triplets, bool exact)
{
  auto near = [](const std::vector<Complex> &set, Complex v, double tol) {
    return std::any_of(set.begin(), set.end(),
                       [&](Complex u) { return std::abs(u - v) <= tol * std::abs(v); });
  };
  Index count = 0;
  for (auto &t : triplets) {
    const bool stable = exact || (near(prev_, t.lambda, stab_) && near(prev2_, t.lambda, 2.0 * stab_));
    t.converged = t.inside_radius && std::isfinite(t.rres) && t.rres < tol_ && stable;
    if (t.converged) ++count;
  }
  prev2_ = std::move(prev_);
  prev_.clear();
  for (const auto &t : triplets) prev_.push_back(t.lambda);
  return count;
}

}  // namespace detail

CoeffBasisRight action_a(const SplitNep &nep, const LuFactors &lu, const CoeffBasisRight &a)
{
  check_dims(nep, a.dim(), "action_a");
  const Index k = a.cols();
  if (k < 1) {
    throw Error(ErrorCode::InvalidArgument, "action_a needs at least one column");
  }
  CoeffBasisRight b{CDense(nep.dim(), k + 1)};
  b.coeffs.col(0) = detail::companion_head(nep, lu, a.coeffs, taylor_weights(nep, k), Op::Normal);
  b.coeffs.rightCols(k) = a.coeffs;
  return b;
}

CoeffBasisLeft action_a_star(const SplitNep &nep, const LuFactors &lu, const CoeffBasisLeft &a)
{
  check_dims(nep, a.dim(), "action_a_star");
  const Index k = a.cols();
  if (k < 1) {
    throw Error(ErrorCode::InvalidArgument, "action_a_star needs at least one column");
  }
  CoeffBasisLeft b{CDense(nep.dim(), k + 1)};
  b.coeffs.col(0) = detail::companion_head(nep, lu, a.coeffs, taylor_weights(nep, k).conjugate(),
                                           Op::ConjTranspose);
  b.coeffs.rightCols(k) = a.coeffs;
  return b;
}

Complex dot_naive(const SplitNep &nep, const CoeffBasisLeft &at, const CoeffBasisRight &b)
{
  check_dims(nep, at.dim(), "dot_naive");
  check_dims(nep, b.dim(), "dot_naive");
  const Index ka = at.cols();
  const Index kb = b.cols();
  const Index p = nep.num_terms();
  if (ka == 0 || kb == 0) return {0.0, 0.0};
  const CDense table = nep.taylor_table(ka + kb - 1);

  // One derivative combination per column of a~:
  //   v_j = sum_l M^(j+l-1)(0) / (j+l-1)! b_l
  Complex s(0.0, 0.0);
  CDense w(kb, p);
  for (Index j = 1; j <= ka; ++j) {
    for (Index k = 0; k < p; ++k) {
      w.col(k) = table.row(k).segment(j, kb).transpose();
    }
    const CVec v = apply_terms(nep, b.coeffs, w, Op::Normal);
    s += at.coeffs.col(j - 1).dot(v);
  }
  return -s;
}

Complex dot_split(const SplitNep &nep, const CoeffBasisLeft &at, const CoeffBasisRight &b)
{
  check_dims(nep, at.dim(), "dot_split");
  check_dims(nep, b.dim(), "dot_split");
  const Index ka = at.cols();
  const Index kb = b.cols();
  if (ka == 0 || kb == 0) return {0.0, 0.0};
  const CDense table = nep.taylor_table(ka + kb - 1);

  Complex s(0.0, 0.0);
  for (Index k = 0; k < nep.num_terms(); ++k) {
    // Highest order with a nonzero coefficient; polynomial terms only need
    // the leading columns of both bases.
    Index top = ka + kb - 1;
    while (top > 0 && table(k, top) == Complex(0.0, 0.0)) --top;
    if (top == 0) continue;
    const Index ja = std::min(ka, top);
    const Index lb = std::min(kb, top);
    const CDense mb = nep.term(k).matrix * b.coeffs.leftCols(lb);
    const CDense mhat = at.coeffs.leftCols(ja).adjoint() * mb;  // ja x lb
    // Hankel-weighted sum over anti-diagonals j + l - 1.
    for (Index l = 0; l < lb; ++l) {
      for (Index j = 0; j < std::min(ja, top - l); ++j) {
        s += mhat(j, l) * table(k, j + l + 1);
      }
    }
  }
  return -s;
}

Complex dot(const SplitNep &nep, const CoeffBasisLeft &at, const CoeffBasisRight &b, ScalarProduct kind)
{
  return kind == ScalarProduct::Split ? dot_split(nep, at, b) : dot_naive(nep, at, b);
}

double right_residual(const SplitNep &nep, Complex lambda, const CVec &x)
{
  double scale = 0.0;
  for (Index k = 0; k < nep.num_terms(); ++k) {
    scale += std::abs(nep.term(k).family.eval(lambda)) * nep.frobenius_norms()[static_cast<std::size_t>(k)];
  }
  const double xn = x.norm();
  const double r = apply_m(nep, lambda, x, Op::Normal).norm();
  if (scale == 0.0 || xn == 0.0) {
    return r == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return r / (scale * xn);
}

Residuals residuals(const SplitNep &nep, Complex lambda, const CVec &x, const CVec &y)
{
  double scale = 0.0;
  for (Index k = 0; k < nep.num_terms(); ++k) {
    scale += std::abs(nep.term(k).family.eval(lambda)) * nep.frobenius_norms()[static_cast<std::size_t>(k)];
  }
  auto rel = [&](double r, double vn) {
    if (scale == 0.0 || vn == 0.0) {
      return r == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return r / (scale * vn);
  };
  return {rel(apply_m(nep, lambda, x, Op::Normal).norm(), x.norm()),
          rel(apply_m(nep, lambda, y, Op::ConjTranspose).norm(), y.norm())};
}

double condition_number(const SplitNep &nep, Complex lambda, const CVec &x, const CVec &y)
{
  if (lambda == Complex(0.0, 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "condition_number at lambda = 0");
  }
  double alpha = 0.0;
  for (Index k = 0; k < nep.num_terms(); ++k) {
    alpha += std::abs(nep.term(k).family.eval(lambda)) * nep.two_norms()[static_cast<std::size_t>(k)];
  }
  const double denom = std::abs(y.dot(apply_dm(nep, lambda, x, Op::Normal)));
  if (denom < 1e-300) {
    throw Error(ErrorCode::DegenerateDerivative, "|y^* M'(lambda) x| vanishes");
  }
  return alpha * x.norm() * y.norm() / (std::abs(lambda) * denom);
}

void unshift(const SplitNep &original, const ShiftScale &ss, std::vector<RitzTriplet> &triplets)
{
  ss.validate();
  const double inf = std::numeric_limits<double>::infinity();
  for (auto &t : triplets) {
    t.lambda = ss.shift + ss.scale * t.lambda;
    if (!t.inside_radius) continue;
    try {
      if (t.y.size() == 0) {
        t.rres = right_residual(original, t.lambda, t.x);
        continue;
      }
      const Residuals r = residuals(original, t.lambda, t.x, t.y);
      t.rres = r.rres;
      t.lres = r.lres;
    } catch (const Error &e) {
      if (e.code() != ErrorCode::OutsideRadius) throw;
      t.inside_radius = false;
      t.rres = t.lres = t.kappa = inf;
      continue;
    }
    try {
      t.kappa = condition_number(original, t.lambda, t.x, t.y);
    } catch (const Error &) {
      t.kappa = inf;
    }
  }
}

double norm(const CoeffBasisRight &b)
{
  double sum = 0.0;
  double inv_fact = 1.0;  // 1 / (l-1)!
  for (Index l = 0; l < b.cols(); ++l) {
    if (l > 0) inv_fact /= double(l);
    sum += b.coeffs.col(l).squaredNorm() * inv_fact * inv_fact;
  }
  return std::sqrt(sum);
}

double leading_norm(const SplitNep &nep, const CoeffBasisLeft &at, Index blocks)
{
  // Block m = -(m-1)! sum_j sum_k conj(c_{k,m+j-1}) M_k^* comp_j.
  const Index ka = at.cols();
  if (ka == 0 || blocks < 1) return 0.0;
  const Index p = nep.num_terms();
  const CDense table = nep.taylor_table(blocks + ka);
  CDense w = CDense::Zero(ka, p * blocks);
  double fact = 1.0;
  for (Index m = 1; m <= blocks; ++m) {
    if (m > 1) fact *= double(m - 1);
    for (Index k = 0; k < p; ++k)
      for (Index j = 1; j <= ka; ++j) w(j - 1, (m - 1) * p + k) = std::conj(table(k, m + j - 1)) * fact;
  }
  const CDense acc = at.coeffs * w;
  double sum = 0.0;
  for (Index m = 0; m < blocks; ++m) {
    CVec block = CVec::Zero(nep.dim());
    for (Index k = 0; k < p; ++k) {
      if (acc.col(m * p + k).isZero(0.0)) continue;
      block.noalias() += nep.term(k).matrix.adjoint() * acc.col(m * p + k);
    }
    sum += block.squaredNorm();
  }
  return std::sqrt(sum);
}

std::pair<CoeffBasisRight, CoeffBasisLeft> normalize_start(const SplitNep &nep, const LuFactors &,
                                                           const CVec &q1, const CVec &qt1)
{
  if (q1.size() != nep.dim() || qt1.size() != nep.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "normalize_start: start vector length");
  }
  CoeffBasisRight p{CDense(q1)};
  CoeffBasisLeft pt{CDense(qt1)};
  const Complex d = dot_naive(nep, pt, p);
  if (!(std::abs(d) > 1e-14 * q1.norm() * qt1.norm())) {
    throw Error(ErrorCode::Breakdown, "start vectors are biorthogonal in the infinite product");
  }
  const double root = std::sqrt(std::abs(d));
  p.coeffs /= root;
  pt.coeffs *= root / std::conj(d);
  return {std::move(p), std::move(pt)};
}

InfBiLanczos::InfBiLanczos(const SplitNep &nep, BiLanczosOptions opts)
    : InfBiLanczos(nep, lu_factorize(m_at_zero(nep)), opts)
{
}

InfBiLanczos::InfBiLanczos(const SplitNep &nep, LuFactors lu, BiLanczosOptions opts)
    : nep_(&nep), lu_(std::move(lu)), opts_(opts)
{
  if (opts_.max_iter < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  }
  if (!(opts_.tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  }
  if (lu_.dim() != nep.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "factorization size differs from NEP dimension");
  }
}

void InfBiLanczos::start(const CVec &q1, const CVec &qt1)
{
  auto [p, pt] = normalize_start(*nep_, lu_, q1, qt1);
  start(std::move(p), std::move(pt));
}

void InfBiLanczos::start(CoeffBasisRight p1, CoeffBasisLeft pt1)
{
  check_dims(*nep_, p1.dim(), "start");
  check_dims(*nep_, pt1.dim(), "start");
  if (p1.cols() != 1 || pt1.cols() != 1) {
    throw Error(ErrorCode::InvalidArgument, "start vectors must have a single column");
  }
  k_ = 0;
  exhausted_ = false;
  t_ = {};
  scalar_seconds_ = 0.0;
  p_prev_ = {CDense(nep_->dim(), 0)};
  pt_prev_ = {CDense(nep_->dim(), 0)};
  p_cur_ = std::move(p1);
  pt_cur_ = std::move(pt1);
  x_first_ = p_cur_.coeffs.col(0);
  y_first_ = pt_cur_.coeffs.col(0);
  all_p_.clear();
  all_pt_.clear();
  if (keep_all_ || opts_.rebiorthogonalize) {
    all_p_.push_back(p_cur_);
    all_pt_.push_back(pt_cur_);
  }
}

Complex InfBiLanczos::product(const CoeffBasisLeft &at, const CoeffBasisRight &b)
{
  const auto t0 = Clock::now();
  const ScalarProduct kind = nep_->num_terms() > opts_.split_max_terms ? ScalarProduct::Naive
                                                                        : opts_.scalar_product;
  const Complex v = dot(*nep_, at, b, kind);
  scalar_seconds_ += seconds_since(t0);
  return v;
}

void InfBiLanczos::step()
{
  if (p_cur_.cols() == 0) {
    throw Error(ErrorCode::InvalidArgument, "step() before start()");
  }
  if (exhausted_) {
    throw Error(ErrorCode::LuckyBreakdown, "Krylov spaces already invariant");
  }
  const Index k = k_ + 1;
  const Index n = nep_->dim();

  // (1), (2)
  CoeffBasisRight r = action_a(*nep_, lu_, p_cur_);
  CoeffBasisLeft rt = action_a_star(*nep_, lu_, pt_cur_);
  const double ar_norm = norm(r);
  const double as_norm = leading_norm(*nep_, rt, r.cols());

  // (3), (4)
  if (k > 1) {
    const Complex gamma_k = t_.gamma.back();
    const Complex beta_k = t_.beta.back();
    r.coeffs.leftCols(k - 1) -= gamma_k * p_prev_.coeffs;
    rt.coeffs.leftCols(k - 1) -= std::conj(beta_k) * pt_prev_.coeffs;
  }

  // (5) - (7)
  const Complex alpha = product(pt_cur_, r);
  r.coeffs.leftCols(k) -= alpha * p_cur_.coeffs;
  rt.coeffs.leftCols(k) -= std::conj(alpha) * pt_cur_.coeffs;

  const double r_norm = norm(r);
  const double s_norm = leading_norm(*nep_, rt, r.cols());
  if (r_norm <= opts_.invariant_tol * ar_norm || s_norm <= opts_.invariant_tol * as_norm) {
    t_.alpha.push_back(alpha);
    t_.beta.push_back(0.0);
    t_.gamma.push_back(0.0);
    k_ = k;
    exhausted_ = true;
    throw Error(ErrorCode::LuckyBreakdown, "invariant subspace found at step " + std::to_string(k));
  }

  // (8) - (10)
  const Complex omega = std::conj(product(rt, r));
  if (!(std::abs(omega) > opts_.breakdown_tol * r_norm * s_norm)) {
    throw Error(ErrorCode::Breakdown, "|omega_" + std::to_string(k) + "| is numerically zero");
  }
  const double beta = std::sqrt(std::abs(omega));
  const Complex gamma = std::conj(omega) / beta;

  // (11), (12)
  r.coeffs /= beta;
  rt.coeffs /= std::conj(gamma);

  if (opts_.rebiorthogonalize) {
    for (std::size_t i = 0; i < all_p_.size(); ++i) {
      const Index w = all_p_[i].cols();
      const Complex cr = product(all_pt_[i], r);
      r.coeffs.leftCols(w) -= cr * all_p_[i].coeffs;
      const Complex cl = product(rt, all_p_[i]);
      rt.coeffs.leftCols(w) -= std::conj(cl) * all_pt_[i].coeffs;
    }
  }

  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()) || !std::isfinite(beta) ||
      !all_finite(r.coeffs) || !all_finite(rt.coeffs)) {
    throw Error(ErrorCode::InvariantViolation, "non-finite entries at step " + std::to_string(k));
  }

  t_.alpha.push_back(alpha);
  t_.beta.push_back(beta);
  t_.gamma.push_back(gamma);
  x_first_.conservativeResize(n, k + 1);
  y_first_.conservativeResize(n, k + 1);
  x_first_.col(k) = r.coeffs.col(0);
  y_first_.col(k) = rt.coeffs.col(0);
  if (keep_all_ || opts_.rebiorthogonalize) {
    all_p_.push_back(r);
    all_pt_.push_back(rt);
  }
  p_prev_ = std::move(p_cur_);
  pt_prev_ = std::move(pt_cur_);
  p_cur_ = std::move(r);
  pt_cur_ = std::move(rt);
  k_ = k;
}

std::vector<RitzTriplet> InfBiLanczos::extract_ritz() const
{
  std::vector<RitzTriplet> out;
  const Index k = k_;
  if (k == 0) return out;
  const auto eig = dense_eig(t_.dense(k));
  const double beta_next = std::abs(t_.beta.back());
  const double rho = nep_->radius();
  for (const auto &e : eig) {
    RitzTriplet t;
    t.theta = e.value;
    t.lambda = 1.0 / e.value;
    t.x = x_first_.leftCols(k) * e.right;
    t.y = y_first_.leftCols(k) * e.left;
    if (t.x.norm() > 0.0) t.x.normalize();
    if (t.y.norm() > 0.0) t.y.normalize();
    t.ritz_estimate = beta_next * std::abs(e.right(k - 1));
    t.inside_radius = std::isfinite(std::abs(t.lambda)) && std::abs(t.lambda) < rho;
    if (t.inside_radius) {
      const auto res = residuals(*nep_, t.lambda, t.x, t.y);
      t.rres = res.rres;
      t.lres = res.lres;
      try {
        t.kappa = condition_number(*nep_, t.lambda, t.x, t.y);
      } catch (const Error &) {
        t.kappa = std::numeric_limits<double>::infinity();
      }
    } else {
      t.rres = t.lres = std::numeric_limits<double>::infinity();
      t.kappa = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(std::move(t));
  }
  std::stable_sort(out.begin(), out.end(), [](const RitzTriplet &a, const RitzTriplet &b) {
    return std::abs(a.lambda) < std::abs(b.lambda);
  });
  return out;
}

const char *to_string(StopReason r)
{
  switch (r) {
  case StopReason::Converged: return "converged";
  case StopReason::MaxIterations: return "max_iterations";
  case StopReason::Breakdown: return "breakdown";
  case StopReason::InvariantSubspace: return "invariant_subspace";
  }
  return "unknown";
}

SolveResult solve(const SplitNep &nep, const CVec &q1, const CVec &qt1, const BiLanczosOptions &opts)
{
  SolveResult result;
  InfBiLanczos solver(nep, opts);
  try {
    solver.start(q1, qt1);
  } catch (const Error &e) {
    if (e.code() != ErrorCode::Breakdown) throw;
    result.reason = StopReason::Breakdown;
    result.message = e.what();
    return result;
  }

  detail::ConvergenceMonitor monitor(opts.tol, opts.stability_tol);
  const auto t0 = Clock::now();
  const Index stride = std::max<Index>(1, opts.ritz_stride);
  Index extracted_at = 0;

  auto record = [&](Index it, bool exact = false) {
    result.triplets = solver.extract_ritz();
    const Index nconv = monitor.update(result.triplets, exact);
    const double wall = seconds_since(t0);
    for (std::size_t i = 0; i < result.triplets.size(); ++i) {
      const auto &t = result.triplets[i];
      result.history.rows.push_back({it, wall, static_cast<Index>(i), t.lambda, t.rres, t.lres, t.kappa});
    }
    extracted_at = it;
    return nconv;
  };

  for (Index it = 1; it <= opts.max_iter; ++it) {
    try {
      solver.step();
    } catch (const Error &e) {
      if (e.code() == ErrorCode::LuckyBreakdown) {
        result.reason = StopReason::InvariantSubspace;
      } else if (e.code() == ErrorCode::Breakdown) {
        result.reason = StopReason::Breakdown;
      } else {
        throw;
      }
      result.message = e.what();
      if (solver.iterations() == it) {
        result.history.timings.push_back({it, seconds_since(t0), solver.scalar_product_seconds()});
      }
      break;
    }
    result.history.timings.push_back({it, seconds_since(t0), solver.scalar_product_seconds()});
    if (it % stride == 0 || it == opts.max_iter) {
      const Index nconv = record(it);
      if (opts.nev > 0 && nconv >= opts.nev) {
        result.reason = StopReason::Converged;
        break;
      }
    }
  }
  const bool exact = result.reason == StopReason::InvariantSubspace;
  if (solver.iterations() > 0 && (exact || extracted_at != solver.iterations())) {
    record(solver.iterations(), exact);
  }
  result.iterations = solver.iterations();
  result.tridiag = solver.tridiag();
  return result;
}

}  // namespace nep
