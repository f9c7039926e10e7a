#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nep/bilanczos.hpp"
#include "nep/iar.hpp"

namespace nep::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kBreakdown = 2, kIoError = 3 };

enum class Method { BiLanczos, Iar, Both };
enum class ScalarProductMode { Naive, Split, BothTimed };
enum class StartVector { Ones, Random };

struct GunFiles {
  std::filesystem::path k, m, w1, w2;
};

struct RunConfig {
  /// dep-random, gun, quadratic-demo, or a problem JSON path.
  std::string problem = "quadratic-demo";
  Method method = Method::BiLanczos;
  Index k_max = 50;
  double tol = 1e-10;
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  bool rebiorthogonalize = false;
  ScalarProductMode scalar_product = ScalarProductMode::Split;
  StartVector start = StartVector::Ones;
  Index ritz_stride = 1;
  /// Solve M(shift + scale mu) and report lambda in the original variable.
  std::optional<ShiftScale> shift;
  Index dep_n = 1000;
  double dep_density = 0.01;
  std::optional<GunFiles> gun;

  /// Throws Error(InvalidArgument) on out-of-range fields.
  void validate() const;
};

/// Parse a run config; relative paths resolve against `base`. Throws
/// Error(ParseError / InvalidArgument) on malformed content.
RunConfig parse_config(const std::string &json_text, const std::filesystem::path &base = {});
/// Throws Error(FileNotFound) when the file cannot be read.
RunConfig load_config(const std::filesystem::path &path);

/// Command-line overrides applied on top of a config file.
struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<Index> k;
  std::optional<double> tol;
  std::optional<std::string> method;
};
void apply_overrides(RunConfig &cfg, const Overrides &o);

Method parse_method(const std::string &s);

/// Problem as solved (possibly shifted) together with the original.
struct PreparedProblem {
  SplitNep original;
  SplitNep solved;
  std::optional<ShiftScale> shift;
};
PreparedProblem prepare_problem(const RunConfig &cfg);
CVec start_vector(const RunConfig &cfg, Index n);

int cmd_solve(const RunConfig &cfg, std::ostream &log);
int cmd_compare(const RunConfig &cfg, std::ostream &log);
int cmd_timing(const RunConfig &cfg, std::ostream &log);
int cmd_oracle_check(const RunConfig &cfg, std::ostream &log);

/// Entry point shared by the executable and the tests.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

// Output helpers, exposed for testing.
std::string triplets_csv(const std::vector<RitzTriplet> &triplets);

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line plot with a log10 y axis. Non-positive or non-finite y values break
/// the line.
struct Panel {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<Series> series;
};

/// Panels laid out side by side in one standalone SVG document.
std::string render_svg(const std::vector<Panel> &panels);

/// Residual curve per finally converged eigenvalue: at every extraction the
/// row closest to it. Falls back to the best residual per iteration when
/// nothing converged.
std::vector<Series> residual_curves(const SolveResult &r, bool by_time, const std::string &prefix,
                                    const std::vector<std::string> &palette);

}  // namespace nep::cli
