#include "nep/iar.hpp"

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

}  // namespace

InfArnoldi::InfArnoldi(const SplitNep &nep, IarOptions opts)
    : InfArnoldi(nep, lu_factorize(m_at_zero(nep)), opts)
{
}

InfArnoldi::InfArnoldi(const SplitNep &nep, LuFactors lu, IarOptions opts)
    : nep_(&nep), lu_(std::move(lu)), opts_(opts)
{
  if (opts_.max_iter < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  }
  if (lu_.dim() != nep.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "factorization size differs from NEP dimension");
  }
  weights_.resize(opts_.max_iter, nep.num_terms());
  for (Index k = 0; k < nep.num_terms(); ++k) {
    const auto d = nep.term(k).family.derivative_over_order(opts_.max_iter);
    for (Index j = 1; j <= opts_.max_iter; ++j) {
      weights_(j - 1, k) = d[static_cast<std::size_t>(j)];
    }
  }
}

void InfArnoldi::start(const CVec &q1)
{
  const Index n = nep_->dim();
  if (q1.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "start vector length");
  }
  const double nrm = q1.norm();
  if (!(nrm > 0.0)) {
    throw Error(ErrorCode::LuckyBreakdown, "zero start vector");
  }
  v_ = CDense::Zero((opts_.max_iter + 1) * n, opts_.max_iter + 1);
  h_ = CDense::Zero(opts_.max_iter + 1, opts_.max_iter);
  v_.col(0).head(n) = q1 / nrm;
  k_ = 0;
  exhausted_ = false;
}

void InfArnoldi::step()
{
  if (v_.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "step() before start()");
  }
  if (exhausted_) {
    throw Error(ErrorCode::LuckyBreakdown, "Krylov space already invariant");
  }
  if (k_ >= opts_.max_iter) {
    throw Error(ErrorCode::InvalidArgument, "basis capacity (max_iter) exhausted");
  }
  const Index n = nep_->dim();
  const Index j = k_ + 1;  // current vector has j blocks
  const Index rows = (j + 1) * n;

  // Plain-coefficient companion action: b_1 = sum_i N_i a_i, b_{i+1} = a_i / i.
  const Eigen::Map<const CDense> blocks(v_.col(j - 1).data(), n, j);
  CVec w = CVec::Zero(rows);
  w.head(n) = detail::companion_head(*nep_, lu_, blocks, weights_.topRows(j), Op::Normal);
  for (Index i = 1; i <= j; ++i) {
    w.segment(i * n, n) = blocks.col(i - 1) / double(i);
  }
  const double w_norm0 = w.norm();

  // Two passes of classical Gram-Schmidt.
  auto basis = v_.topLeftCorner(rows, j);
  CVec h = basis.adjoint() * w;
  w -= basis * h;
  const CVec h2 = basis.adjoint() * w;
  w -= basis * h2;
  h += h2;

  const double beta = w.norm();
  h_.col(j - 1).head(j) = h;
  if (!(beta > opts_.lucky_tol * w_norm0)) {
    // H_j is exact; keep it so the Ritz values of the invariant subspace remain available.
    h_(j, j - 1) = 0.0;
    k_ = j;
    exhausted_ = true;
    throw Error(ErrorCode::LuckyBreakdown, "invariant subspace found at step " + std::to_string(j));
  }
  h_(j, j - 1) = beta;
  v_.col(j).head(rows) = w / beta;
  k_ = j;
}

CDense InfArnoldi::basis() const
{
  const Index n = nep_->dim();
  return v_.topLeftCorner((k_ + 1) * n, k_ + 1);
}

std::vector<RitzTriplet> InfArnoldi::extract_ritz() const
{
  std::vector<RitzTriplet> out;
  if (k_ == 0) return out;
  const Index n = nep_->dim();
  const CDense hk = h_.topLeftCorner(k_, k_);
  const auto eig = dense_eig(hk);
  const double rho = nep_->radius();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  // First block of each basis vector.
  CDense first(n, k_);
  for (Index i = 0; i < k_; ++i) first.col(i) = v_.col(i).head(n);
  for (const auto &e : eig) {
    RitzTriplet t;
    t.theta = e.value;
    t.lambda = 1.0 / e.value;
    t.x = first * e.right;
    if (t.x.norm() > 0.0) t.x.normalize();
    t.ritz_estimate = std::abs(h_(k_, k_ - 1)) * std::abs(e.right(k_ - 1));
    t.inside_radius = std::isfinite(std::abs(t.lambda)) && std::abs(t.lambda) < rho;
    t.rres = t.inside_radius ? right_residual(*nep_, t.lambda, t.x)
                             : std::numeric_limits<double>::infinity();
    t.lres = nan;
    t.kappa = nan;
    out.push_back(std::move(t));
  }
  std::stable_sort(out.begin(), out.end(), [](const RitzTriplet &a, const RitzTriplet &b) {
    return std::abs(a.lambda) < std::abs(b.lambda);
  });
  return out;
}

SolveResult iar_solve(const SplitNep &nep, const CVec &q1, const IarOptions &opts)
{
  SolveResult result;
  InfArnoldi solver(nep, opts);
  solver.start(q1);

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
      if (e.code() != ErrorCode::LuckyBreakdown) throw;
      // An invariant subspace makes the current Ritz values exact.
      result.reason = StopReason::InvariantSubspace;
      result.message = e.what();
      if (solver.iterations() == it) result.history.timings.push_back({it, seconds_since(t0), 0.0});
      break;
    }
    result.history.timings.push_back({it, seconds_since(t0), 0.0});
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
  return result;
}

}  // namespace nep
