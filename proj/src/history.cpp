#include "nep/history.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace nep {

std::string format_double(double v)
{
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string ConvergenceHistory::to_csv() const
{
  std::ostringstream out;
  out << "iteration,wall_seconds,ritz_index,re_lambda,im_lambda,rres,lres,kappa\n";
  for (const auto &r : rows) {
    out << r.iteration << ',' << format_double(r.wall_seconds) << ',' << r.ritz_index << ','
        << format_double(r.lambda.real()) << ',' << format_double(r.lambda.imag()) << ','
        << format_double(r.rres) << ',' << format_double(r.lres) << ',' << format_double(r.kappa)
        << '\n';
  }
  return out.str();
}

void ConvergenceHistory::write_csv(const std::filesystem::path &path) const
{
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::FileNotFound, "cannot open " + path.string() + " for writing");
  }
  out << to_csv();
  if (!out) {
    throw Error(ErrorCode::FileNotFound, "write failed for " + path.string());
  }
}

std::vector<std::pair<Index, double>> ConvergenceHistory::best_residual_per_iteration() const
{
  std::map<Index, double> best;
  for (const auto &r : rows) {
    auto [it, inserted] = best.emplace(r.iteration, r.rres);
    if (!inserted && r.rres < it->second) it->second = r.rres;
  }
  return {best.begin(), best.end()};
}

}  // namespace nep
