#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nep/bilanczos.hpp"
#include "nep/oracle.hpp"
#include "nep/problems.hpp"
#include "support.hpp"

using namespace nep;
using nep::testing::random_dense;
using nep::testing::random_nep;
using nep::testing::random_vec;
using nep::testing::rel_diff;

namespace {

CSparse scalar(Complex v)
{
  CDense m(1, 1);
  m(0, 0) = v;
  return to_sparse(m, 0.0);
}

SplitNep one_minus_lambda() { return SplitNep({{scalar(1.0), ScalarFamily::polynomial({1.0, -1.0})}}); }

CDense col1(Complex v)
{
  CDense c(1, 1);
  c(0, 0) = v;
  return c;
}

// Adjoint of the truncation applied to a left vector; the last block is
// polluted by truncation, so callers compare the first blocks - 1 only.
CVec head(const CVec &v, Index n, Index blocks) { return v.head(n * blocks); }

}  // namespace

TEST_CASE("companion action on the scalar 1 - lambda")
{
  const SplitNep s = one_minus_lambda();
  const auto lu = lu_factorize(m_at_zero(s));
  const auto r = action_a(s, lu, CoeffBasisRight{col1(1.0)});
  REQUIRE(r.cols() == 2);
  CHECK(std::abs(r.coeffs(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(r.coeffs(0, 1) - 1.0) < 1e-15);

  const auto l = action_a_star(s, lu, CoeffBasisLeft{col1(1.0)});
  REQUIRE(l.cols() == 2);
  CHECK(std::abs(l.coeffs(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(l.coeffs(0, 1) - 1.0) < 1e-15);
}

TEST_CASE("companion actions map zero to zero")
{
  const SplitNep nep = random_nep(5, 3, 2);
  const auto lu = lu_factorize(m_at_zero(nep));
  const auto r = action_a(nep, lu, CoeffBasisRight{CDense::Zero(5, 3)});
  CHECK(r.cols() == 4);
  CHECK(r.coeffs.norm() == 0.0);
  const auto l = action_a_star(nep, lu, CoeffBasisLeft{CDense::Zero(5, 3)});
  CHECK(l.cols() == 4);
  CHECK(l.coeffs.norm() == 0.0);
}

TEST_CASE("right action agrees with the dense truncation")
{
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const SplitNep nep = random_nep(8, 3, seed);
    const auto lu = lu_factorize(m_at_zero(nep));
    std::mt19937_64 rng(seed);
    const CoeffBasisRight a{random_dense(8, 3, rng)};
    const Index blocks = 6;
    const auto trunc = build_truncation(nep, lu, blocks);
    const CVec expect = trunc.matrix * expand_right(a, blocks);
    const CVec got = expand_right(action_a(nep, lu, a), blocks);
    CHECK((got - expect).norm() <= 1e-12 * expect.norm());
  }
}

TEST_CASE("adjoint action agrees with the dense truncation")
{
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const SplitNep nep = random_nep(8, 3, seed);
    const auto lu = lu_factorize(m_at_zero(nep));
    std::mt19937_64 rng(seed + 7);
    const Index k = 3;
    const Index blocks = 2 * k + 4;
    const CoeffBasisLeft at{random_dense(8, k, rng)};
    const auto trunc = build_truncation(nep, lu, blocks);
    const CVec expect = trunc.matrix.adjoint() * expand_left(nep, at, blocks);
    const CVec got = expand_left(nep, action_a_star(nep, lu, at), blocks);
    const Index keep = blocks - 1;
    CHECK((head(got, 8, keep) - head(expect, 8, keep)).norm() <= 1e-12 * head(expect, 8, keep).norm());
  }
}

TEST_CASE("scalar product examples")
{
  const SplitNep s = one_minus_lambda();
  const CoeffBasisLeft at{col1(1.0)};
  const CoeffBasisRight b{col1(1.0)};
  CHECK(std::abs(dot_naive(s, at, b) - 1.0) < 1e-15);
  CHECK(std::abs(dot_split(s, at, b) - 1.0) < 1e-15);
  const CoeffBasisLeft zero{CDense::Zero(1, 3)};
  CHECK(dot_naive(s, zero, b) == Complex(0.0));
  CHECK(dot_split(s, zero, b) == Complex(0.0));
}

TEST_CASE("scalar product equals the dense product of expanded vectors")
{
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const SplitNep nep = random_nep(6, 3, seed);
    std::mt19937_64 rng(seed * 3);
    const CoeffBasisLeft at{random_dense(6, 3, rng)};
    const CoeffBasisRight b{random_dense(6, 4, rng)};
    const Index blocks = 7;
    const Complex expect = expand_left(nep, at, blocks).dot(expand_right(b, blocks));
    const Complex naive = dot_naive(nep, at, b);
    const Complex split = dot_split(nep, at, b);
    CHECK(rel_diff(naive, expect) < 1e-12);
    CHECK(rel_diff(split, naive) < 1e-13);
    CHECK(dot(nep, at, b, ScalarProduct::Split) == split);
    CHECK(dot(nep, at, b, ScalarProduct::Naive) == naive);
  }
}

TEST_CASE("split product matches naive on wide inputs and many terms")
{
  const SplitNep dep = make_random_dep(300, 3, 0.02);
  std::mt19937_64 rng(5);
  const CoeffBasisLeft at{random_dense(300, 20, rng)};
  const CoeffBasisRight b{random_dense(300, 21, rng)};
  const Complex n = dot_naive(dep, at, b);
  CHECK(rel_diff(dot_split(dep, at, b), n) < 1e-12);

  std::vector<CSparse> coeffs;
  for (int j = 0; j < 5; ++j) coeffs.push_back(to_sparse(random_dense(4, 4, rng)));
  const SplitNep pep = make_pep(coeffs);
  const CoeffBasisLeft at2{random_dense(4, 9, rng)};
  const CoeffBasisRight b2{random_dense(4, 2, rng)};
  CHECK(rel_diff(dot_split(pep, at2, b2), dot_naive(pep, at2, b2)) < 1e-12);
}

TEST_CASE("infinite vector norms")
{
  CDense c(1, 3);
  c << 3.0, 4.0, 2.0;  // blocks 3, 4, 2/2!
  CHECK(norm(CoeffBasisRight{c}) == doctest::Approx(std::sqrt(9.0 + 16.0 + 1.0)));

  const SplitNep nep = random_nep(5, 3, 3);
  std::mt19937_64 rng(1);
  const CoeffBasisLeft at{random_dense(5, 3, rng)};
  CHECK(leading_norm(nep, at, 6) == doctest::Approx(expand_left(nep, at, 6).norm()).epsilon(1e-12));
}

TEST_CASE("normalize_start")
{
  const SplitNep s = one_minus_lambda();
  const auto lu = lu_factorize(m_at_zero(s));
  auto [p, pt] = normalize_start(s, lu, CVec::Ones(1), CVec::Ones(1));
  CHECK(std::abs(p.coeffs(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(pt.coeffs(0, 0) - 1.0) < 1e-15);

  // M'(0) = 0 makes every pair biorthogonal
  const SplitNep q = make_quadratic_demo();
  const auto luq = lu_factorize(m_at_zero(q));
  try {
    normalize_start(q, luq, CVec::Ones(2), CVec::Ones(2));
    FAIL("expected Breakdown");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::Breakdown);
  }

  const SplitNep nep = random_nep(7, 3, 5);
  const auto lun = lu_factorize(m_at_zero(nep));
  std::mt19937_64 rng(3);
  auto [p2, pt2] = normalize_start(nep, lun, random_vec(7, rng), random_vec(7, rng));
  CHECK(std::abs(dot_naive(nep, pt2, p2) - 1.0) < 1e-14);
}

TEST_CASE("one step on the scalar problem recovers lambda = 1")
{
  const SplitNep s = one_minus_lambda();
  InfBiLanczos it(s);
  it.start(CVec::Ones(1), CVec::Ones(1));
  try {
    it.step();
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::LuckyBreakdown);
  }
  CHECK(it.iterations() == 1);
  const auto tr = it.extract_ritz();
  REQUIRE(tr.size() == 1);
  CHECK(std::abs(tr[0].theta - 1.0) < 1e-14);
  CHECK(std::abs(tr[0].lambda - 1.0) < 1e-14);
  CHECK(tr[0].rres < 1e-14);
}

TEST_CASE("tridiagonal matrix matches two-sided Lanczos on the truncation")
{
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const SplitNep nep = random_nep(10, 3, seed);
    const auto lu = lu_factorize(m_at_zero(nep));
    std::mt19937_64 rng(seed + 40);
    const Index k = 6;
    const Index blocks = 2 * k + 4;
    auto [p1, pt1] = normalize_start(nep, lu, random_vec(10, rng), random_vec(10, rng));

    BiLanczosOptions o;
    o.max_iter = k;
    InfBiLanczos it(nep, lu, o);
    it.start(p1, pt1);
    for (Index i = 0; i < k; ++i) it.step();

    const auto trunc = build_truncation(nep, lu, blocks);
    const auto ref = two_sided_lanczos(trunc.matrix, expand_right(p1, blocks), expand_left(nep, pt1, blocks), k);
    const auto &t = it.tridiag();
    REQUIRE(t.size() == k);
    for (Index i = 0; i < k; ++i) {
      const auto u = std::size_t(i);
      CHECK(rel_diff(t.alpha[u], ref.t.alpha[u]) < 1e-10);
      CHECK(rel_diff(t.beta[u], ref.t.beta[u]) < 1e-10);
      CHECK(rel_diff(t.gamma[u], ref.t.gamma[u]) < 1e-10);
    }
  }
}

TEST_CASE("zero start vector breaks down at once")
{
  const SplitNep nep = random_nep(5, 2, 1);
  InfBiLanczos it(nep);
  CHECK_THROWS_AS(it.start(CVec::Zero(5), CVec::Ones(5)), Error);
  const auto r = solve(nep, CVec::Zero(5), CVec::Ones(5));
  CHECK(r.reason == StopReason::Breakdown);
  CHECK(r.iterations == 0);
  CHECK(r.triplets.empty());
}

TEST_CASE("computed bases are biorthogonal")
{
  for (std::uint64_t seed : {2u, 3u}) {
    const SplitNep nep = random_nep(8, 3, seed);
    std::mt19937_64 rng(seed);
    InfBiLanczos it(nep);
    it.keep_all_bases(true);
    it.start(random_vec(8, rng), random_vec(8, rng));
    const Index k = 10;
    for (Index i = 0; i < k; ++i) it.step();
    const auto &p = it.all_right();
    const auto &pt = it.all_left();
    REQUIRE(Index(p.size()) == k + 1);
    double worst = 0.0;
    for (Index i = 0; i <= k; ++i)
      for (Index j = 0; j <= k; ++j) {
        const Complex g = dot_naive(nep, pt[std::size_t(i)], p[std::size_t(j)]);
        worst = std::max(worst, std::abs(g - (i == j ? 1.0 : 0.0)));
      }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("residual and condition number examples")
{
  const SplitNep q = make_quadratic_demo();
  CVec e1 = CVec::Zero(2);
  e1(0) = 1.0;
  const auto r = residuals(q, 1.0, e1, e1);
  CHECK(r.rres < 1e-14);
  CHECK(r.lres < 1e-14);

  std::mt19937_64 rng(2);
  const SplitNep nep = random_nep(6, 3, 2);
  const auto bad = residuals(nep, Complex(0.3, 0.1), random_vec(6, rng), random_vec(6, rng));
  CHECK(bad.rres > 1e-2);
  CHECK(bad.lres > 1e-2);

  const SplitNep sq({{scalar(1.0), ScalarFamily::sqrt_shifted(1.0, 1.0, 1.0)}});
  try {
    residuals(sq, 2.0, CVec::Ones(1), CVec::Ones(1));
    FAIL("expected OutsideRadius");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::OutsideRadius);
  }

  // two-term split 1 * 1 + 1 * (-lambda): a = 1 + |1| * 1
  const SplitNep s({{scalar(1.0), ScalarFamily::constant(1.0)}, {scalar(1.0), ScalarFamily::polynomial({0.0, -1.0})}});
  CHECK(condition_number(s, 1.0, CVec::Ones(1), CVec::Ones(1)) == doctest::Approx(2.0));
}

TEST_CASE("condition number ignores phase and scale of the vectors")
{
  const SplitNep nep = random_nep(6, 3, 4);
  std::mt19937_64 rng(4);
  const CVec x = random_vec(6, rng), y = random_vec(6, rng);
  const Complex lam(0.2, -0.1);
  const double k0 = condition_number(nep, lam, x, y);
  const double k1 = condition_number(nep, lam, std::polar(3.0, 1.1) * x, std::polar(0.5, -2.0) * y);
  CHECK(k1 == doctest::Approx(k0).epsilon(1e-12));
}

TEST_CASE("quadratic demo through shift and unshift")
{
  const SplitNep q = make_quadratic_demo();
  const ShiftScale ss{0.1, 1.0};
  const SplitNep sh = shift_nep(q, ss);
  BiLanczosOptions o;
  o.max_iter = 20;
  o.ritz_stride = 1;
  auto res = solve(sh, CVec::Ones(2) / std::sqrt(2.0), CVec::Ones(2) / std::sqrt(2.0), o);
  CHECK(res.reason == StopReason::InvariantSubspace);
  unshift(q, ss, res.triplets);
  for (double target : {1.0, -1.0, 2.0, -2.0}) {
    bool found = false;
    for (const auto &t : res.triplets) {
      if (std::abs(t.lambda - target) < 1e-8) {
        found = true;
        CHECK(t.rres < 1e-10);
        CHECK(t.lres < 1e-10);
        CHECK(t.converged);
        CHECK(std::isfinite(t.kappa));
        CHECK(std::abs(t.theta * (t.lambda - ss.shift) - 1.0) < 1e-12);
      }
    }
    CHECK(found);
  }
}

TEST_CASE("unshift flags values outside the radius")
{
  const SplitNep sq({{scalar(1.0), ScalarFamily::sqrt_shifted(1.0, 1.0, 1.0)}});
  std::vector<RitzTriplet> tr(1);
  tr[0].lambda = 5.0;
  tr[0].theta = 0.2;
  tr[0].x = CVec::Ones(1);
  tr[0].y = CVec::Ones(1);
  unshift(sq, ShiftScale{0.0, 1.0}, tr);
  CHECK_FALSE(tr[0].inside_radius);
  CHECK(std::isinf(tr[0].rres));
  CHECK_FALSE(tr[0].converged);
}

TEST_CASE("Ritz triplets are consistent with their vectors")
{
  const SplitNep nep = random_nep(10, 3, 6);
  std::mt19937_64 rng(8);
  BiLanczosOptions o;
  o.max_iter = 25;
  o.ritz_stride = 1;
  const auto res = solve(nep, random_vec(10, rng), random_vec(10, rng), o);
  REQUIRE_FALSE(res.triplets.empty());
  for (const auto &t : res.triplets) {
    CHECK(std::abs(t.theta * t.lambda - 1.0) < 1e-12);
    CHECK(t.x.norm() == doctest::Approx(1.0));
    CHECK(t.y.norm() == doctest::Approx(1.0));
    if (t.inside_radius) {
      const auto r = residuals(nep, t.lambda, t.x, t.y);
      CHECK(r.rres == doctest::Approx(t.rres).epsilon(1e-10));
    }
  }
  // sorted by modulus
  for (std::size_t i = 1; i < res.triplets.size(); ++i)
    CHECK(std::abs(res.triplets[i - 1].lambda) <= std::abs(res.triplets[i].lambda) + 1e-15);
}

TEST_CASE("DEP regression: converged values and condition numbers")
{
  const SplitNep dep = make_random_dep();
  BiLanczosOptions o;
  o.max_iter = 50;
  o.tol = 1e-8;
  const CVec q1 = CVec::Ones(dep.dim()) / std::sqrt(double(dep.dim()));
  const auto res = solve(dep, q1, q1, o);
  std::vector<Complex> conv;
  for (const auto &t : res.triplets) {
    if (t.rres < 1e-8) {
      CHECK(std::isfinite(t.kappa));
      CHECK(t.kappa >= 1e2);
      CHECK(t.kappa <= 1e5);
      bool dup = false;
      for (Complex c : conv) dup = dup || rel_diff(c, t.lambda) < 1e-8;
      if (!dup) conv.push_back(t.lambda);
    }
  }
  CHECK(conv.size() >= 8);
}

TEST_CASE("convergence monitor requires stable values")
{
  detail::ConvergenceMonitor m(1e-10, 1e-8);
  std::vector<RitzTriplet> tr(1);
  tr[0].lambda = 1.0;
  tr[0].rres = tr[0].lres = 1e-12;
  CHECK(m.update(tr) == 0);
  CHECK(m.update(tr) == 0);
  CHECK(m.update(tr) == 1);
  CHECK(tr[0].converged);
  tr[0].lambda = 2.0;
  CHECK(m.update(tr) == 0);

  detail::ConvergenceMonitor exact(1e-10, 1e-8);
  CHECK(exact.update(tr, true) == 1);
}

TEST_CASE("history csv")
{
  ConvergenceHistory h;
  h.rows.push_back({1, 0.5, 0, Complex(1.0, -0.25), 1e-3, 2e-3, 10.0});
  h.rows.push_back({2, 0.75, 0, Complex(1.0, 0.0), 1e-9, 2e-9, 11.0});
  h.rows.push_back({2, 0.75, 1, Complex(3.0, 0.0), 1e-5, 2e-5, 12.0});
  const std::string csv = h.to_csv();
  CHECK(csv.rfind("iteration,wall_seconds,ritz_index,re_lambda,im_lambda,rres,lres,kappa\n", 0) == 0);
  CHECK(csv.find("-0.25") != std::string::npos);
  const auto best = h.best_residual_per_iteration();
  REQUIRE(best.size() == 2);
  CHECK(best[1].second == 1e-9);
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("tridiagonal dense view")
{
  TridiagT t;
  t.alpha = {1.0, 2.0, 3.0};
  t.beta = {4.0, 5.0, 6.0};
  t.gamma = {7.0, 8.0, 9.0};
  const CDense d = t.dense();
  CHECK(d(1, 0) == Complex(4.0));
  CHECK(d(0, 1) == Complex(7.0));
  CHECK(d(2, 2) == Complex(3.0));
  CHECK(t.dense(2).rows() == 2);
}
