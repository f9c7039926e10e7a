#include "nep/problems.hpp"

#include <fstream>
#include <random>
#include <optional>
#include <variant>

#include <json.hpp>

namespace nep {

SplitNep make_dep(const CSparse &a0, const CSparse &a1)
{
  if (a0.rows() != a0.cols() || a1.rows() != a1.cols() || a0.rows() != a1.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "make_dep: A0 and A1 must be square with equal size");
  }
  std::vector<NepTerm> terms;
  terms.push_back({sparse_identity(a0.rows()), ScalarFamily::polynomial({0.0, 0.0, -1.0})});
  terms.push_back({a0, ScalarFamily::constant(1.0)});
  terms.push_back({a1, ScalarFamily::exp_scaled(1.0, -1.0)});
  return SplitNep(std::move(terms), "dep");
}

SplitNep make_gun(const CSparse &a0, const CSparse &a1, const CSparse &a2, const CSparse &a3,
                  double sigma2, const ShiftScale &ss)
{
  ss.validate();
  const Index n = a0.rows();
  for (const CSparse *m : {&a0, &a1, &a2, &a3}) {
    if (m->rows() != n || m->cols() != n) {
      throw Error(ErrorCode::DimensionMismatch, "make_gun: four square matrices of equal size");
    }
  }
  const Complex i(0.0, 1.0);
  std::vector<NepTerm> terms;
  terms.push_back({a0, ScalarFamily::constant(1.0)});
  terms.push_back({a1, ScalarFamily::polynomial({-ss.shift, -ss.scale})});
  terms.push_back({a2, ScalarFamily::sqrt_shifted(i, ss.scale, ss.shift)});
  terms.push_back({a3, ScalarFamily::sqrt_shifted(i, ss.scale, ss.shift - sigma2 * sigma2)});
  return SplitNep(std::move(terms), "gun");
}

SplitNep make_pep(const std::vector<CSparse> &coeffs)
{
  if (coeffs.empty()) {
    throw Error(ErrorCode::InvalidArgument, "make_pep: at least one coefficient");
  }
  std::vector<NepTerm> terms;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    std::vector<Complex> mono(j + 1, Complex(0.0, 0.0));
    mono[j] = 1.0;
    terms.push_back({coeffs[j], ScalarFamily::polynomial(std::move(mono))});
  }
  return SplitNep(std::move(terms), "pep");
}

CSparse random_sparse(Index n, double density, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(density);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::Triplet<Complex>> trips;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (keep(rng)) {
        trips.emplace_back(static_cast<int>(i), static_cast<int>(j), Complex(normal(rng), 0.0));
      }
    }
  }
  CSparse m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

SplitNep make_random_dep(Index n, std::uint64_t seed, double density)
{
  // A1 uses a derived seed so the two matrices are independent draws.
  CSparse a0 = random_sparse(n, density, seed);
  CSparse a1 = random_sparse(n, density, seed * 0x9E3779B97F4A7C15ULL + 1);
  SplitNep nep = make_dep(a0, a1);
  return SplitNep(nep.terms(), "dep-random");
}

SplitNep make_quadratic_demo()
{
  CSparse a0(2, 2), a2(2, 2);
  a0.insert(0, 0) = -1.0;
  a0.insert(1, 1) = -4.0;
  a2.insert(0, 0) = 1.0;
  a2.insert(1, 1) = 1.0;
  SplitNep pep = make_pep({a0, CSparse(2, 2), a2});
  return SplitNep(pep.terms(), "quadratic-demo");
}

namespace {

using json = nlohmann::json;

Complex parse_complex(const json &j, const std::string &where)
{
  if (j.is_number()) {
    return {j.get<double>(), 0.0};
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  if (j.is_object() && j.contains("re")) {
    return {j.at("re").get<double>(), j.value("im", 0.0)};
  }
  throw Error(ErrorCode::ParseError, where + ": expected a number, [re, im] or {re, im}");
}

ScalarFamily parse_family(const json &j, const ShiftScale &ss, const std::string &where)
{
  if (!j.is_object() || j.size() != 1) {
    throw Error(ErrorCode::ParseError, where + ": family must be an object with one key");
  }
  if (j.contains("poly")) {
    const auto &arr = j.at("poly");
    if (!arr.is_array() || arr.empty()) {
      throw Error(ErrorCode::ParseError, where + ": poly must be a non-empty coefficient list");
    }
    std::vector<Complex> coeffs;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      coeffs.push_back(parse_complex(arr[i], where + ".poly[" + std::to_string(i) + "]"));
    }
    return ScalarFamily::polynomial(std::move(coeffs)).shifted(ss);
  }
  if (j.contains("exp_scaled")) {
    const auto &p = j.at("exp_scaled");
    const Complex a = parse_complex(p.at("a"), where + ".exp_scaled.a");
    const Complex b = parse_complex(p.at("b"), where + ".exp_scaled.b");
    return ScalarFamily::exp_scaled(a, b).shifted(ss);
  }
  if (j.contains("sqrt_shifted")) {
    const auto &p = j.at("sqrt_shifted");
    const Complex a = parse_complex(p.at("a"), where + ".sqrt_shifted.a");
    const Complex b = parse_complex(p.at("b"), where + ".sqrt_shifted.b");
    const Complex c = parse_complex(p.at("c"), where + ".sqrt_shifted.c");
    // Shift before construction: the unshifted expansion point may sit on the cut.
    return ScalarFamily::sqrt_shifted(a, b * ss.scale, c + b * ss.shift);
  }
  throw Error(ErrorCode::ParseError, where + ": unknown family '" + j.begin().key() + "'");
}

}  // namespace

SplitNep load_problem(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::FileNotFound, path.string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }

  try {
    ShiftScale ss;
    if (doc.contains("shift")) ss.shift = parse_complex(doc.at("shift"), "shift");
    if (doc.contains("scale")) ss.scale = parse_complex(doc.at("scale"), "scale");
    ss.validate();

    const auto &entries = doc.at("terms");
    if (!entries.is_array() || entries.empty()) {
      throw Error(ErrorCode::ParseError, path.string() + ": 'terms' must be a non-empty array");
    }
    const auto base = path.parent_path();

    // First pass: load matrices so "identity" entries can take the common size.
    std::vector<std::optional<CSparse>> mats;
    Index dim = doc.contains("dim") ? doc.at("dim").get<Index>() : -1;
    for (std::size_t t = 0; t < entries.size(); ++t) {
      const std::string ref = entries[t].at("matrix").get<std::string>();
      if (ref == "identity") {
        mats.emplace_back(std::nullopt);
        continue;
      }
      std::filesystem::path mpath(ref);
      if (mpath.is_relative()) mpath = base / mpath;
      CSparse m = read_matrix_market(mpath);
      if (dim < 0) dim = m.rows();
      mats.emplace_back(std::move(m));
    }
    if (dim < 0) {
      throw Error(ErrorCode::ParseError, path.string() + ": cannot infer dimension (set 'dim')");
    }

    std::vector<NepTerm> terms;
    for (std::size_t t = 0; t < entries.size(); ++t) {
      const std::string where = "terms[" + std::to_string(t) + "]";
      CSparse m = mats[t] ? std::move(*mats[t]) : sparse_identity(dim);
      terms.push_back({std::move(m), parse_family(entries[t].at("family"), ss, where)});
    }
    return SplitNep(std::move(terms), doc.value("name", path.stem().string()));
  } catch (const json::exception &e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

}  // namespace nep
