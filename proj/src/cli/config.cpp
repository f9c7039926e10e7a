#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "nep/cli.hpp"
#include "nep/problems.hpp"

namespace nep::cli {

namespace {

using json = nlohmann::json;

Complex complex_from(const json &j, const std::string &where)
{
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object()) return {j.value("re", 0.0), j.value("im", 0.0)};
  throw Error(ErrorCode::ParseError, where + ": expected a number, [re, im] or {re, im}");
}

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p)
{
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

ScalarProductMode parse_scalar_product(const std::string &s)
{
  if (s == "naive") return ScalarProductMode::Naive;
  if (s == "split") return ScalarProductMode::Split;
  if (s == "both-timed") return ScalarProductMode::BothTimed;
  throw Error(ErrorCode::InvalidArgument, "scalar_product must be naive, split or both-timed, got '" + s + "'");
}

}  // namespace

Method parse_method(const std::string &s)
{
  if (s == "bilanczos") return Method::BiLanczos;
  if (s == "iar") return Method::Iar;
  if (s == "both") return Method::Both;
  throw Error(ErrorCode::InvalidArgument, "method must be bilanczos, iar or both, got '" + s + "'");
}

void RunConfig::validate() const
{
  if (k_max < 1) throw Error(ErrorCode::InvalidArgument, "k_max must be >= 1");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be > 0");
  if (ritz_stride < 1) throw Error(ErrorCode::InvalidArgument, "ritz_stride must be >= 1");
  if (problem.empty()) throw Error(ErrorCode::InvalidArgument, "problem must be set");
  if (dep_n < 1) throw Error(ErrorCode::InvalidArgument, "dep.n must be >= 1");
  if (!(dep_density > 0.0 && dep_density <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "dep.density must lie in (0, 1]");
  }
  if (shift) shift->validate();
}

RunConfig parse_config(const std::string &json_text, const std::filesystem::path &base)
{
  RunConfig cfg;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");

    if (j.contains("problem")) {
      const std::string p = j.at("problem").get<std::string>();
      const bool builtin = p == "dep-random" || p == "gun" || p == "quadratic-demo";
      cfg.problem = builtin ? p : resolve(base, p).string();
    }
    if (j.contains("method")) cfg.method = parse_method(j.at("method").get<std::string>());
    if (j.contains("k_max")) cfg.k_max = j.at("k_max").get<Index>();
    if (j.contains("tol")) cfg.tol = j.at("tol").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) cfg.out = resolve(base, j.at("out").get<std::string>());
    if (j.contains("rebiorthogonalize")) cfg.rebiorthogonalize = j.at("rebiorthogonalize").get<bool>();
    if (j.contains("scalar_product")) {
      cfg.scalar_product = parse_scalar_product(j.at("scalar_product").get<std::string>());
    }
    if (j.contains("start")) {
      const std::string s = j.at("start").get<std::string>();
      if (s == "ones") {
        cfg.start = StartVector::Ones;
      } else if (s == "random") {
        cfg.start = StartVector::Random;
      } else {
        throw Error(ErrorCode::InvalidArgument, "start must be ones or random");
      }
    }
    if (j.contains("ritz_stride")) cfg.ritz_stride = j.at("ritz_stride").get<Index>();
    if (j.contains("shift") || j.contains("scale")) {
      ShiftScale ss;
      if (j.contains("shift")) ss.shift = complex_from(j.at("shift"), "shift");
      if (j.contains("scale")) ss.scale = complex_from(j.at("scale"), "scale");
      cfg.shift = ss;
    }
    if (j.contains("dep")) {
      const auto &d = j.at("dep");
      cfg.dep_n = d.value("n", cfg.dep_n);
      cfg.dep_density = d.value("density", cfg.dep_density);
    }
    if (j.contains("gun")) {
      const auto &g = j.at("gun");
      GunFiles files;
      const std::filesystem::path dir = g.contains("dir") ? resolve(base, g.at("dir").get<std::string>()) : base;
      files.k = resolve(dir, g.value("K", "K.mtx"));
      files.m = resolve(dir, g.value("M", "M.mtx"));
      files.w1 = resolve(dir, g.value("W1", "W1.mtx"));
      files.w2 = resolve(dir, g.value("W2", "W2.mtx"));
      cfg.gun = files;
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

void apply_overrides(RunConfig &cfg, const Overrides &o)
{
  if (o.out) cfg.out = *o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (o.k) cfg.k_max = *o.k;
  if (o.tol) cfg.tol = *o.tol;
  if (o.method) cfg.method = parse_method(*o.method);
  cfg.validate();
}

PreparedProblem prepare_problem(const RunConfig &cfg)
{
  std::optional<ShiftScale> shift = cfg.shift;
  auto finish = [&](SplitNep original) {
    if (!shift) return PreparedProblem{original, original, std::nullopt};
    SplitNep solved = shift_nep(original, *shift);
    return PreparedProblem{std::move(original), std::move(solved), shift};
  };

  if (cfg.problem == "quadratic-demo") {
    // M'(0) = 0 here, so no start pair can be normalized at the origin.
    if (!shift) shift = ShiftScale{Complex(0.1, 0.0), Complex(1.0, 0.0)};
    return finish(make_quadratic_demo());
  }
  if (cfg.problem == "dep-random") {
    return finish(make_random_dep(cfg.dep_n, cfg.seed, cfg.dep_density));
  }
  if (cfg.problem == "gun") {
    if (!cfg.gun) {
      throw Error(ErrorCode::InvalidArgument,
                  "the gun problem needs its four Matrix Market files (K, M, W1, W2) under a \"gun\" "
                  "entry in the config; they ship with the NLEVP collection (problem 'gun')");
    }
    // The gun problem carries its own shift and is reported in shifted coordinates.
    SplitNep gun = make_gun(read_matrix_market(cfg.gun->k), read_matrix_market(cfg.gun->m),
                            read_matrix_market(cfg.gun->w1), read_matrix_market(cfg.gun->w2));
    return finish(std::move(gun));
  }
  return finish(load_problem(cfg.problem));
}

CVec start_vector(const RunConfig &cfg, Index n)
{
  if (cfg.start == StartVector::Ones) {
    return CVec::Ones(n) / std::sqrt(double(n));
  }
  // Separate stream from the one that draws the problem matrices.
  std::mt19937_64 rng(cfg.seed ^ 0x5DEECE66DULL);
  std::normal_distribution<double> g(0.0, 1.0);
  CVec q(n);
  for (Index i = 0; i < n; ++i) q(i) = g(rng);
  return q / q.norm();
}

}  // namespace nep::cli
