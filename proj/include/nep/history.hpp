#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nep/types.hpp"

namespace nep {

struct HistoryRow {
  Index iteration = 0;
  double wall_seconds = 0.0;
  Index ritz_index = 0;
  Complex lambda;
  double rres = 0.0;
  double lres = 0.0;
  double kappa = 0.0;
};

/// Accumulated time after an iteration.
struct IterationTiming {
  Index iteration = 0;
  double total_seconds = 0.0;
  double scalar_product_seconds = 0.0;
};

/// Per-iteration Ritz data of a Krylov run.
struct ConvergenceHistory {
  std::vector<HistoryRow> rows;
  std::vector<IterationTiming> timings;

  /// Header: iteration,wall_seconds,ritz_index,re_lambda,im_lambda,rres,lres,kappa
  std::string to_csv() const;
  void write_csv(const std::filesystem::path &path) const;

  /// Smallest right residual per recorded iteration, in iteration order.
  std::vector<std::pair<Index, double>> best_residual_per_iteration() const;
};

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace nep
