#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "nep/problems.hpp"
#include "nep/split_nep.hpp"
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

double factorial(Index i)
{
  double f = 1.0;
  for (Index k = 2; k <= i; ++k) f *= double(k);
  return f;
}

// f^(i)(0) from closed forms, independent of the library's recurrences.
Complex derivative_at_zero(const ScalarFamily &f, Index i)
{
  return std::visit(
      [i](const auto &k) -> Complex {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Polynomial>) {
          return i < Index(k.coeffs.size()) ? factorial(i) * k.coeffs[std::size_t(i)] : Complex(0.0);
        } else if constexpr (std::is_same_v<K, ScaledExp>) {
          return k.a * std::pow(k.b, double(i));
        } else {
          Complex falling = 1.0;
          for (Index m = 0; m < i; ++m) falling *= 0.5 - double(m);
          return k.a * std::pow(k.b, double(i)) * falling * std::pow(k.c, 0.5 - double(i));
        }
      },
      f.kind());
}

CDense dense_derivative(const SplitNep &nep, Index i)
{
  CDense d = CDense::Zero(nep.dim(), nep.dim());
  for (const auto &t : nep.terms()) d += derivative_at_zero(t.family, i) * CDense(t.matrix);
  return d;
}

Complex binom_half(Index j)
{
  double b = 1.0;
  for (Index m = 0; m < j; ++m) b *= (0.5 - double(m)) / double(m + 1);
  return b;
}

SplitNep scalar_one_minus_lambda()
{
  return SplitNep({{scalar(1.0), ScalarFamily::polynomial({1.0, -1.0})}});
}

}  // namespace

TEST_CASE("eval_m examples")
{
  const CSparse id = sparse_identity(3);
  SplitNep lin({{id, ScalarFamily::constant(1.0)}, {id, ScalarFamily::polynomial({0.0, -1.0})}});
  CHECK((CDense(eval_m(lin, 0.0)) - CDense::Identity(3, 3)).norm() == 0.0);

  std::mt19937_64 rng(2);
  const CSparse a0 = random_sparse(30, 0.2, 3);
  const CSparse a1 = random_sparse(30, 0.2, 4);
  const SplitNep dep = make_dep(a0, a1);
  CHECK((CDense(eval_m(dep, 0.0)) - CDense(a0) - CDense(a1)).norm() < 1e-14);
  const Complex z(0.3, -0.7);
  const CDense expect = -z * z * CDense::Identity(30, 30) + CDense(a0) + std::exp(-z) * CDense(a1);
  CHECK((CDense(eval_m(dep, z)) - expect).norm() < 1e-13 * expect.norm());

  const CDense q = CDense(eval_m(make_quadratic_demo(), 1.0));
  CHECK(std::abs(q(0, 0)) < 1e-15);
  CHECK(std::abs(q(1, 1) - Complex(-3.0)) < 1e-15);
  CHECK(std::abs(q(0, 1)) == 0.0);
}

TEST_CASE("apply_m and apply_dm match the assembled matrix")
{
  const SplitNep nep = random_nep(7, 3, 4);
  std::mt19937_64 rng(9);
  const CVec x = random_vec(7, rng);
  const Complex z(0.2, 0.1);
  const CDense m = CDense(eval_m(nep, z));
  CHECK((apply_m(nep, z, x) - m * x).norm() < 1e-13 * (m * x).norm());
  CHECK((apply_m(nep, z, x, Op::ConjTranspose) - m.adjoint() * x).norm() < 1e-13 * (m * x).norm());

  // central difference for the derivative
  const double h = 1e-5;
  const CDense fd = (CDense(eval_m(nep, z + h)) - CDense(eval_m(nep, z - h))) / (2.0 * h);
  CHECK((apply_dm(nep, z, x) - fd * x).norm() < 1e-7 * (fd * x).norm());
}

TEST_CASE("taylor coefficients of the exponential")
{
  const auto f = ScalarFamily::exp_scaled(1.0, -1.0);
  double fact = 1.0;
  for (Index j = 0; j <= 25; ++j) {
    if (j > 0) fact *= double(j);
    const double expect = (j % 2 == 0 ? 1.0 : -1.0) / fact;
    CHECK(rel_diff(f.taylor(j), expect) < 1e-14);
  }
  // deep coefficients stay finite and underflow gracefully
  const auto deep = f.taylor_series(300);
  CHECK(std::isfinite(std::abs(deep[200])));
  CHECK(std::abs(deep[150]) < std::abs(deep[149]));
  CHECK(std::abs(deep[300]) == 0.0);
}

TEST_CASE("taylor coefficients of a quadratic")
{
  const auto f = ScalarFamily::polynomial({0.0, 0.0, -1.0});
  CHECK(f.taylor(1) == Complex(0.0));
  CHECK(f.taylor(2) == Complex(-1.0));
  for (Index j = 3; j < 8; ++j) CHECK(f.taylor(j) == Complex(0.0));
}

TEST_CASE("taylor coefficients of the shifted square root")
{
  const double sigma = kGunSigma2;
  const ShiftScale ss = gun_default_shift();
  const Complex c = ss.shift - sigma * sigma;
  const Complex alpha = ss.scale;
  const Complex i(0.0, 1.0);
  const auto f = ScalarFamily::sqrt_shifted(i, alpha, c);
  for (Index j = 0; j <= 12; ++j) {
    const Complex expect = i * std::pow(alpha, double(j)) * binom_half(j) * std::pow(c, 0.5 - double(j));
    CHECK(rel_diff(f.taylor(j), expect) < 1e-12);
  }
  CHECK(f.radius() == doctest::Approx(std::abs(c / alpha)));

  // first five coefficients against finite differences of the derivative
  const double h = 1e-6 * f.radius();
  Complex prev = f.derivative(0.0);
  CHECK(rel_diff(prev, f.taylor(1)) < 1e-12);
  CHECK(rel_diff((f.eval(h) - f.eval(-h)) / (2.0 * h), f.taylor(1)) < 1e-5);
  CHECK(rel_diff((f.eval(h) - 2.0 * f.eval(0.0) + f.eval(-h)) / (h * h), 2.0 * f.taylor(2)) < 1e-3);
  for (Index j = 2; j <= 5; ++j) {
    // f^(j)(0)/j! via complex-step style contour average, exact for this radius
    const int m = 64;
    const double r = 0.5 * f.radius();
    Complex acc = 0.0;
    for (int s = 0; s < m; ++s) {
      const Complex w = std::polar(r, 2.0 * M_PI * double(s) / m);
      acc += f.eval(w) / std::pow(w, double(j));
    }
    CHECK(rel_diff(acc / double(m), f.taylor(j)) < 1e-5);
  }
}

TEST_CASE("first divided difference approaches the first coefficient for every family")
{
  const std::vector<ScalarFamily> fams = {
      ScalarFamily::polynomial({1.0, Complex(2.0, -1.0), 3.0}),
      ScalarFamily::exp_scaled(Complex(0.5, 1.0), Complex(-2.0, 0.3)),
      ScalarFamily::sqrt_shifted(Complex(0.0, 1.0), Complex(0.4, 0.1), Complex(1.0, 0.5)),
      ScalarFamily::sqrt_shifted(1.0, 1e4, 9e4),
  };
  for (const auto &f : fams) {
    const double h = 1e-6;
    const Complex fd = (f.eval(h) - f.eval(0.0)) / h;
    CHECK(rel_diff(fd, f.taylor(1)) < 1e-5);
    CHECK(rel_diff(f.derivative(0.0), f.taylor(1)) < 1e-13);
  }
}

TEST_CASE("derivative_over_order")
{
  const auto f = ScalarFamily::exp_scaled(2.0, Complex(0.5, -0.5));
  const auto d = f.derivative_over_order(10);
  CHECK(d[0] == Complex(0.0));
  for (Index j = 1; j <= 10; ++j) {
    CHECK(rel_diff(d[std::size_t(j)], derivative_at_zero(f, j) / double(j)) < 1e-13);
  }
}

TEST_CASE("scalar family domain errors")
{
  CHECK_THROWS_AS(ScalarFamily::sqrt_shifted(1.0, 1.0, -2.0), Error);
  CHECK_THROWS_AS(ScalarFamily::sqrt_shifted(1.0, 1.0, 0.0), Error);
  const auto f = ScalarFamily::sqrt_shifted(1.0, 1.0, 2.0);
  try {
    f.eval(3.0);
    FAIL("expected OutsideRadius");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::OutsideRadius);
  }
  CHECK(std::isinf(ScalarFamily::exp_scaled(1.0, 1.0).radius()));
}

TEST_CASE("shifted families evaluate the original at the mapped point")
{
  const ShiftScale ss{Complex(0.3, 0.1), Complex(2.0, -1.0)};
  const std::vector<ScalarFamily> fams = {
      ScalarFamily::polynomial({1.0, -2.0, Complex(0.0, 1.0), 0.5}),
      ScalarFamily::exp_scaled(Complex(0.5, 1.0), Complex(-1.0, 0.3)),
      ScalarFamily::sqrt_shifted(Complex(0.0, 1.0), Complex(0.4, 0.1), Complex(5.0, 0.5)),
  };
  for (const auto &f : fams) {
    const auto g = f.shifted(ss);
    const Complex mu(0.05, -0.02);
    CHECK(rel_diff(g.eval(mu), f.eval(ss.shift + ss.scale * mu)) < 1e-13);
  }
  CHECK_THROWS_AS((ShiftScale{0.0, 0.0}.validate()), Error);
}

TEST_CASE("lincomb examples")
{
  const SplitNep s = scalar_one_minus_lambda();
  CDense z(1, 1);
  z(0, 0) = 1.0;
  CHECK(std::abs(lincomb(s, z)(0) - Complex(-1.0)) < 1e-15);
  CHECK(std::abs(lincomb_star(s, z)(0) - Complex(-1.0)) < 1e-15);

  const SplitNep q({{scalar(1.0), ScalarFamily::polynomial({0.0, 0.0, -1.0})}});
  CDense z2(1, 2);
  z2 << Complex(3.0, 1.0), Complex(0.5, -2.0);
  CHECK(std::abs(lincomb(q, z2)(0) - (-2.0 * z2(0, 1))) < 1e-15);
  CHECK(std::abs(lincomb_star(q, z2)(0) - (-2.0 * z2(0, 1))) < 1e-15);

  const SplitNep cplx({{scalar(Complex(0.0, 1.0)), ScalarFamily::polynomial({0.0, Complex(2.0, 1.0)})}});
  // M'(0) = i(2+i), its adjoint is the conjugate
  CHECK(std::abs(lincomb(cplx, z)(0) - Complex(0.0, 1.0) * Complex(2.0, 1.0)) < 1e-15);
  CHECK(std::abs(lincomb_star(cplx, z)(0) - std::conj(Complex(0.0, 1.0) * Complex(2.0, 1.0))) < 1e-15);
}

TEST_CASE("lincomb and lincomb_star match the dense derivatives")
{
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const SplitNep nep = random_nep(10, 3, seed);
    std::mt19937_64 rng(seed + 100);
    const CDense z = random_dense(10, 3, rng);
    CVec expect = CVec::Zero(10), expect_star = CVec::Zero(10);
    for (Index i = 1; i <= 3; ++i) {
      const CDense d = dense_derivative(nep, i);
      expect += d * z.col(i - 1);
      expect_star += d.adjoint() * z.col(i - 1);
    }
    CHECK((lincomb(nep, z) - expect).norm() <= 1e-12 * expect.norm());
    CHECK((lincomb_star(nep, z) - expect_star).norm() <= 1e-12 * expect_star.norm());
  }
}

TEST_CASE("lincomb adjoint identity per derivative order")
{
  const SplitNep nep = random_nep(9, 3, 6);
  std::mt19937_64 rng(12);
  const CVec w = random_vec(9, rng);
  for (Index i = 1; i <= 4; ++i) {
    CDense z = CDense::Zero(9, i);
    z.col(i - 1) = random_vec(9, rng);
    CDense wz = CDense::Zero(9, i);
    wz.col(i - 1) = w;
    const Complex lhs = w.dot(lincomb(nep, z));
    const Complex rhs = lincomb_star(nep, wz).dot(z.col(i - 1));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("lincomb dimension mismatch")
{
  const SplitNep nep = random_nep(5, 2, 1);
  try {
    lincomb(nep, CDense::Ones(4, 2));
    FAIL("expected DimensionMismatch");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("taylor_block and taylor_table")
{
  const SplitNep dep = make_dep(scalar(2.0), scalar(0.0));
  const auto b = taylor_block(dep, 3);
  REQUIRE(b.size() == 3);
  const CDense table = dep.taylor_table(5);
  CHECK(table.rows() == 3);
  CHECK(table.cols() == 6);
  for (Index k = 0; k < 3; ++k) CHECK(table(k, 3) == b[std::size_t(k)]);
}

TEST_CASE("make_dep scalar roots")
{
  const SplitNep dep = make_dep(scalar(2.0), scalar(0.0));
  CHECK(dep.num_terms() == 3);
  for (double s : {std::sqrt(2.0), -std::sqrt(2.0)}) {
    CHECK(std::abs(CDense(eval_m(dep, s))(0, 0)) < 1e-14);
  }
  const SplitNep degenerate = make_dep(scalar(0.0), scalar(0.0));
  CHECK_THROWS_AS(lu_factorize(m_at_zero(degenerate)), Error);
  CHECK_THROWS_AS(make_dep(sparse_identity(2), sparse_identity(3)), Error);
}

TEST_CASE("make_random_dep is deterministic")
{
  const SplitNep a = make_random_dep(200, 5, 0.02);
  const SplitNep b = make_random_dep(200, 5, 0.02);
  CHECK(a.dim() == 200);
  CHECK((CDense(a.term(1).matrix) - CDense(b.term(1).matrix)).norm() == 0.0);
  CHECK((CDense(a.term(2).matrix) - CDense(b.term(2).matrix)).norm() == 0.0);
}

TEST_CASE("make_gun shift handling")
{
  const CSparse id = sparse_identity(4);
  const SplitNep gun = make_gun(id, id, id, id);
  CHECK(gun.num_terms() == 4);
  CHECK(std::isfinite(gun.radius()));

  // lambda_hat = 0.001 maps back to lambda
  const ShiftScale ss = gun_default_shift();
  const Complex mu(1e-3, 2e-4);
  const Complex lam = ss.shift + ss.scale * mu;
  const Complex i(0.0, 1.0);
  const Complex expect = 1.0 - lam + i * std::sqrt(lam) + i * std::sqrt(lam - kGunSigma2 * kGunSigma2);
  CHECK(rel_diff(CDense(eval_m(gun, mu))(0, 0), expect) < 1e-12);

  try {
    make_gun(id, id, id, id, kGunSigma2, ShiftScale{0.0, 1.0});
    FAIL("expected BranchCut");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::BranchCut);
  }
}

TEST_CASE("make_pep")
{
  const SplitNep q = make_quadratic_demo();
  for (double r : {1.0, -1.0, 2.0, -2.0}) {
    CHECK(std::abs(CDense(eval_m(q, r)).determinant()) < 1e-13);
  }
  const CSparse id = sparse_identity(2);
  CSparse neg = -id;
  const SplitNep lin = make_pep({id, neg});
  CHECK(CDense(eval_m(lin, 1.0)).norm() == 0.0);
  CHECK_THROWS_AS(make_pep({}), Error);
  CHECK_THROWS_AS(make_pep({id, sparse_identity(3)}), Error);

  // polynomial evaluation equals the Taylor sum
  std::mt19937_64 rng(4);
  std::vector<CSparse> coeffs;
  for (int j = 0; j < 4; ++j) coeffs.push_back(to_sparse(random_dense(5, 5, rng)));
  const SplitNep pep = make_pep(coeffs);
  const Complex z(0.7, -0.4);
  CDense sum = CDense::Zero(5, 5);
  for (Index j = 0; j <= 3; ++j) sum += dense_derivative(pep, j) * std::pow(z, double(j)) / factorial(j);
  CHECK((CDense(eval_m(pep, z)) - sum).norm() < 1e-13 * sum.norm());
}

TEST_CASE("shift_nep matches the original at mapped points")
{
  const SplitNep nep = random_nep(6, 3, 3);
  const ShiftScale ss{Complex(0.1, 0.05), Complex(0.5, 0.0)};
  const SplitNep sh = shift_nep(nep, ss);
  const Complex mu(0.2, -0.1);
  const CDense a = CDense(eval_m(sh, mu));
  const CDense b = CDense(eval_m(nep, ss.shift + ss.scale * mu));
  CHECK((a - b).norm() < 1e-13 * b.norm());
}

TEST_CASE("split nep cached norms")
{
  const SplitNep dep = make_dep(scalar(2.0), scalar(Complex(0.0, -3.0)));
  REQUIRE(dep.frobenius_norms().size() == 3);
  CHECK(dep.frobenius_norms()[2] == doctest::Approx(3.0));
  CHECK(dep.two_norms()[1] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("load_problem")
{
  const auto dir = std::filesystem::temp_directory_path() / "nep_test_load";
  std::filesystem::create_directories(dir);
  const CSparse a0 = random_sparse(6, 0.5, 2) + sparse_identity(6);
  const CSparse a1 = random_sparse(6, 0.5, 3);
  write_matrix_market(dir / "a0.mtx", a0);
  write_matrix_market(dir / "a1.mtx", a1);
  {
    std::ofstream out(dir / "dep.json");
    out << R"({"name": "file-dep", "terms": [
      {"matrix": "identity", "family": {"poly": [0, 0, -1]}},
      {"matrix": "a0.mtx", "family": {"poly": [1]}},
      {"matrix": "a1.mtx", "family": {"exp_scaled": {"a": 1, "b": -1}}}]})";
  }
  const SplitNep loaded = load_problem(dir / "dep.json");
  const SplitNep built = make_dep(a0, a1);
  CHECK(loaded.name() == "file-dep");
  const Complex z(0.4, 0.3);
  CHECK((CDense(eval_m(loaded, z)) - CDense(eval_m(built, z))).norm() < 1e-13);

  {
    std::ofstream out(dir / "shifted.json");
    out << R"({"shift": [0.5, 0], "scale": 2, "terms": [
      {"matrix": "a0.mtx", "family": {"sqrt_shifted": {"a": {"re": 0, "im": 1}, "b": 1, "c": 3}}}]})";
  }
  const SplitNep sh = load_problem(dir / "shifted.json");
  const Complex mu(0.1, 0.0);
  const Complex expect = Complex(0.0, 1.0) * std::sqrt(3.0 + 0.5 + 2.0 * mu);
  CHECK((CDense(eval_m(sh, mu)) - expect * CDense(a0)).norm() < 1e-13 * CDense(a0).norm());

  auto code_of = [&](const std::string &text) {
    std::ofstream(dir / "bad.json") << text;
    try {
      load_problem(dir / "bad.json");
    } catch (const Error &e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code_of("{not json") == ErrorCode::ParseError);
  CHECK(code_of(R"({"terms": []})") == ErrorCode::ParseError);
  CHECK(code_of(R"({"terms": [{"matrix": "a0.mtx", "family": {"bessel": 1}}]})") == ErrorCode::ParseError);
  CHECK(code_of(R"({"terms": [{"matrix": "nope.mtx", "family": {"poly": [1]}}]})") == ErrorCode::FileNotFound);
  CHECK(code_of(R"({"terms": [{"matrix": "identity", "family": {"poly": [1]}}]})") == ErrorCode::ParseError);
  {
    write_matrix_market(dir / "small.mtx", sparse_identity(3));
  }
  CHECK(code_of(R"({"terms": [{"matrix": "a0.mtx", "family": {"poly": [1]}},
                              {"matrix": "small.mtx", "family": {"poly": [0, 1]}}]})") ==
        ErrorCode::DimensionMismatch);

  try {
    load_problem(dir / "missing.json");
    FAIL("expected FileNotFound");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::FileNotFound);
  }
  std::filesystem::remove_all(dir);
}
