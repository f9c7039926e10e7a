#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "nep/cli.hpp"
#include "nep/oracle.hpp"

namespace nep::cli {

namespace {

using Clock = std::chrono::steady_clock;

const std::vector<std::string> kBlues = {"#1f4e9c", "#3a78c9", "#5fa0e0", "#2b8cbe", "#0b3c7a", "#6a8fd1"};
const std::vector<std::string> kReds = {"#b2182b", "#d6604d", "#e3875f", "#a50026", "#f46d43", "#c23b22"};

int exit_code_for(const Error &e)
{
  switch (e.code()) {
  case ErrorCode::FileNotFound: return kIoError;
  case ErrorCode::Breakdown:
  case ErrorCode::InvariantViolation:
  case ErrorCode::NoConvergence: return kBreakdown;
  default: return kConfigError;
  }
}

void write_text(const std::filesystem::path &path, const std::string &text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::FileNotFound, "write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path &dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::FileNotFound, "cannot create " + dir.string() + ": " + ec.message());
}

/// Map a run on the shifted problem back to the original variable.
void unshift_result(const PreparedProblem &prep, SolveResult &r)
{
  if (!prep.shift) return;
  const ShiftScale &ss = *prep.shift;
  unshift(prep.original, ss, r.triplets);
  // Residuals are invariant under the change of variables; kappa rescales.
  for (auto &row : r.history.rows) {
    const Complex mu = row.lambda;
    row.lambda = ss.shift + ss.scale * mu;
    if (std::abs(row.lambda) > 0.0) row.kappa *= std::abs(mu) * std::abs(ss.scale) / std::abs(row.lambda);
  }
}

BiLanczosOptions bilanczos_options(const RunConfig &cfg, ScalarProduct kind)
{
  BiLanczosOptions o;
  o.max_iter = cfg.k_max;
  o.tol = cfg.tol;
  o.rebiorthogonalize = cfg.rebiorthogonalize;
  o.scalar_product = kind;
  o.ritz_stride = cfg.ritz_stride;
  return o;
}

IarOptions iar_options(const RunConfig &cfg)
{
  IarOptions o;
  o.max_iter = cfg.k_max;
  o.tol = cfg.tol;
  o.ritz_stride = cfg.ritz_stride;
  return o;
}

SolveResult run_bilanczos(const PreparedProblem &prep, const RunConfig &cfg, const CVec &q, ScalarProduct kind)
{
  SolveResult r = solve(prep.solved, q, q, bilanczos_options(cfg, kind));
  unshift_result(prep, r);
  return r;
}

SolveResult run_iar(const PreparedProblem &prep, const RunConfig &cfg, const CVec &q)
{
  SolveResult r = iar_solve(prep.solved, q, iar_options(cfg));
  unshift_result(prep, r);
  return r;
}

Index count_converged(const SolveResult &r)
{
  return std::count_if(r.triplets.begin(), r.triplets.end(), [](const RitzTriplet &t) { return t.converged; });
}

std::string convergence_svg(const std::vector<std::pair<const SolveResult *, std::string>> &runs)
{
  Panel by_it{"Residual against iterations", "iteration", "relative residual", {}};
  Panel by_time{"Residual against computation time", "wall time (s)", "relative residual", {}};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto &palette = i == 0 ? kBlues : kReds;
    const std::string label = runs.size() > 1 ? runs[i].second : std::string();
    for (auto &s : residual_curves(*runs[i].first, false, label, palette)) by_it.series.push_back(std::move(s));
    for (auto &s : residual_curves(*runs[i].first, true, label, palette)) by_time.series.push_back(std::move(s));
  }
  return render_svg({by_it, by_time});
}

const char *method_name(Method m)
{
  return m == Method::Iar ? "iar" : "bilanczos";
}

void summarize(std::ostream &log, const char *name, const SolveResult &r)
{
  log << name << ": " << r.iterations << " iterations, " << count_converged(r) << " converged, stop: "
      << to_string(r.reason);
  if (!r.message.empty()) log << " (" << r.message << ")";
  log << '\n';
}

template <class F>
int guarded(std::ostream &log, F &&body)
{
  try {
    return body();
  } catch (const Error &e) {
    log << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception &e) {
    log << "error: " << e.what() << '\n';
    return kIoError;
  }
}

std::string fixed(double v, int prec = 4)
{
  std::ostringstream s;
  s << std::scientific << std::setprecision(prec) << v;
  return s.str();
}

}  // namespace

std::string triplets_csv(const std::vector<RitzTriplet> &triplets)
{
  std::ostringstream out;
  out << "i,re_lambda,im_lambda,abs_theta_inv,rres,lres,kappa,converged\n";
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const auto &t = triplets[i];
    const double inv = std::abs(t.theta) > 0.0 ? 1.0 / std::abs(t.theta) : std::numeric_limits<double>::infinity();
    out << i + 1 << ',' << format_double(t.lambda.real()) << ',' << format_double(t.lambda.imag()) << ','
        << format_double(inv) << ',' << format_double(t.rres) << ',' << format_double(t.lres) << ','
        << format_double(t.kappa) << ',' << (t.converged ? 1 : 0) << '\n';
  }
  return out.str();
}

int cmd_solve(const RunConfig &cfg, std::ostream &log)
{
  return guarded(log, [&]() {
    const PreparedProblem prep = prepare_problem(cfg);
    const CVec q = start_vector(cfg, prep.solved.dim());
    ensure_dir(cfg.out);

    std::vector<Method> methods;
    if (cfg.method == Method::Both) {
      methods = {Method::BiLanczos, Method::Iar};
    } else {
      methods = {cfg.method};
    }
    const ScalarProduct kind = cfg.scalar_product == ScalarProductMode::Naive ? ScalarProduct::Naive
                                                                              : ScalarProduct::Split;
    bool broke = false;
    std::vector<SolveResult> results;
    for (Method m : methods) {
      results.push_back(m == Method::Iar ? run_iar(prep, cfg, q) : run_bilanczos(prep, cfg, q, kind));
      const SolveResult &r = results.back();
      const std::string suffix = methods.size() > 1 ? std::string("_") + method_name(m) : std::string();
      write_text(cfg.out / ("triplets" + suffix + ".csv"), triplets_csv(r.triplets));
      r.history.write_csv(cfg.out / ("history" + suffix + ".csv"));
      summarize(log, method_name(m), r);
      broke = broke || r.reason == StopReason::Breakdown;
    }
    std::vector<std::pair<const SolveResult *, std::string>> runs;
    for (std::size_t i = 0; i < methods.size(); ++i) runs.emplace_back(&results[i], method_name(methods[i]));
    write_text(cfg.out / "convergence.svg", convergence_svg(runs));

    if (cfg.scalar_product == ScalarProductMode::BothTimed && cfg.method != Method::Iar) {
      const SolveResult naive = run_bilanczos(prep, cfg, q, ScalarProduct::Naive);
      const SolveResult &split = results.front();
      auto last = [](const SolveResult &r) {
        return r.history.timings.empty() ? IterationTiming{} : r.history.timings.back();
      };
      std::ostringstream csv;
      csv << "scalar_product,iterations,scal_prod_seconds,total_seconds\n";
      csv << "naive," << last(naive).iteration << ',' << format_double(last(naive).scalar_product_seconds) << ','
          << format_double(last(naive).total_seconds) << '\n';
      csv << "split," << last(split).iteration << ',' << format_double(last(split).scalar_product_seconds) << ','
          << format_double(last(split).total_seconds) << '\n';
      write_text(cfg.out / "scalar_product_timing.csv", csv.str());
    }
    log << "wrote " << cfg.out.string() << '\n';
    return broke ? int(kBreakdown) : int(kOk);
  });
}

int cmd_compare(const RunConfig &cfg, std::ostream &log)
{
  return guarded(log, [&]() {
    const PreparedProblem prep = prepare_problem(cfg);
    const CVec q = start_vector(cfg, prep.solved.dim());
    ensure_dir(cfg.out);
    const ScalarProduct kind = cfg.scalar_product == ScalarProductMode::Naive ? ScalarProduct::Naive
                                                                              : ScalarProduct::Split;
    // Sequential on purpose: the time axis compares the two methods.
    const SolveResult bl = run_bilanczos(prep, cfg, q, kind);
    const SolveResult ia = run_iar(prep, cfg, q);

    std::ostringstream csv;
    csv << "method,iteration,wall_seconds,ritz_index,re_lambda,im_lambda,rres,lres,kappa\n";
    for (const auto &[name, r] : {std::pair<const char *, const SolveResult *>{"bilanczos", &bl},
                                  std::pair<const char *, const SolveResult *>{"iar", &ia}}) {
      for (const auto &row : r->history.rows) {
        csv << name << ',' << row.iteration << ',' << format_double(row.wall_seconds) << ',' << row.ritz_index
            << ',' << format_double(row.lambda.real()) << ',' << format_double(row.lambda.imag()) << ','
            << format_double(row.rres) << ',' << format_double(row.lres) << ',' << format_double(row.kappa)
            << '\n';
      }
    }
    write_text(cfg.out / "compare.csv", csv.str());
    write_text(cfg.out / "triplets_bilanczos.csv", triplets_csv(bl.triplets));
    write_text(cfg.out / "triplets_iar.csv", triplets_csv(ia.triplets));
    write_text(cfg.out / "compare.svg", convergence_svg({{&bl, "bi-Lanczos"}, {&ia, "IAR"}}));

    summarize(log, "bilanczos", bl);
    summarize(log, "iar", ia);
    double worst = 0.0;
    Index shared = 0;
    for (const auto &a : bl.triplets) {
      if (!a.converged) continue;
      for (const auto &b : ia.triplets) {
        if (!b.converged) continue;
        const double d = std::abs(a.lambda - b.lambda) / std::max(std::abs(a.lambda), std::abs(b.lambda));
        if (d < 1e-6) {
          worst = std::max(worst, d);
          ++shared;
          break;
        }
      }
    }
    log << "eigenvalues converged in both: " << shared << ", max relative difference " << fixed(worst) << '\n';
    log << "wrote " << cfg.out.string() << '\n';
    return bl.reason == StopReason::Breakdown ? int(kBreakdown) : int(kOk);
  });
}

int cmd_timing(const RunConfig &cfg, std::ostream &log)
{
  return guarded(log, [&]() {
    const PreparedProblem prep = prepare_problem(cfg);
    const CVec q = start_vector(cfg, prep.solved.dim());
    ensure_dir(cfg.out);
    const std::vector<Index> rows = {10, 20, 30, 40, 50, 60};
    const Index steps = rows.back();

    struct Sample {
      double scal = std::numeric_limits<double>::quiet_NaN();
      double total = std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<std::vector<Sample>> table(2, std::vector<Sample>(rows.size()));
    bool broke = false;
    for (int m = 0; m < 2; ++m) {
      BiLanczosOptions o = bilanczos_options(cfg, m == 0 ? ScalarProduct::Naive : ScalarProduct::Split);
      o.max_iter = steps;
      InfBiLanczos solver(prep.solved, o);
      const auto t0 = Clock::now();
      solver.start(q, q);
      std::size_t next = 0;
      try {
        for (Index k = 1; k <= steps; ++k) {
          solver.step();
          if (next < rows.size() && k == rows[next]) {
            table[m][next] = {solver.scalar_product_seconds(),
                              std::chrono::duration<double>(Clock::now() - t0).count()};
            ++next;
          }
        }
      } catch (const Error &e) {
        if (e.code() != ErrorCode::Breakdown && e.code() != ErrorCode::LuckyBreakdown) throw;
        log << (m == 0 ? "naive" : "split") << ": stopped at step " << solver.iterations() + 1 << ": " << e.what()
            << '\n';
        broke = broke || e.code() == ErrorCode::Breakdown;
      }
    }

    std::ostringstream csv, txt;
    csv << "k,naive_scal_prod_seconds,naive_total_seconds,split_scal_prod_seconds,split_total_seconds\n";
    txt << std::left << std::setw(6) << "k" << std::setw(16) << "naive scal.prod" << std::setw(16) << "naive total"
        << std::setw(16) << "split scal.prod" << std::setw(16) << "split total" << "ratio\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Sample &n = table[0][i];
      const Sample &s = table[1][i];
      csv << rows[i] << ',' << format_double(n.scal) << ',' << format_double(n.total) << ','
          << format_double(s.scal) << ',' << format_double(s.total) << '\n';
      txt << std::left << std::setw(6) << rows[i] << std::setw(16) << fixed(n.scal, 2) << std::setw(16)
          << fixed(n.total, 2) << std::setw(16) << fixed(s.scal, 2) << std::setw(16) << fixed(s.total, 2)
          << std::fixed << std::setprecision(2) << n.scal / s.scal << '\n';
    }
    write_text(cfg.out / "timing.csv", csv.str());
    write_text(cfg.out / "timing.txt", txt.str());
    log << txt.str();
    log << "wrote " << cfg.out.string() << '\n';
    return broke ? int(kBreakdown) : int(kOk);
  });
}

int cmd_oracle_check(const RunConfig &cfg, std::ostream &log)
{
  return guarded(log, [&]() {
    const PreparedProblem prep = prepare_problem(cfg);
    const SplitNep &nep = prep.solved;
    const Index n = nep.dim();
    const Index k_req = std::min<Index>(cfg.k_max, 10);
    const Index blocks = 2 * k_req + 4;
    if (blocks * n > 2000) {
      throw Error(ErrorCode::InvalidArgument, "oracle-check needs (2k+4) n <= 2000; this problem has n = " +
                                                  std::to_string(n));
    }
    const CVec q = start_vector(cfg, n);

    BiLanczosOptions o = bilanczos_options(cfg, ScalarProduct::Split);
    o.max_iter = k_req;
    InfBiLanczos solver(nep, o);
    solver.keep_all_bases(true);
    solver.start(q, q);
    Index k_done = 0;
    bool invariant = false;
    try {
      for (Index k = 1; k <= k_req; ++k) {
        solver.step();
        k_done = k;
      }
    } catch (const Error &e) {
      if (e.code() != ErrorCode::LuckyBreakdown) throw;
      invariant = true;
      log << "note: " << e.what() << "; comparing the steps before it\n";
    }
    const Index k_cmp = invariant ? solver.iterations() - 1 : k_done;

    const TruncatedCompanion tc = build_truncation(nep, solver.lu(), blocks);
    const auto &ps = solver.all_right();
    const auto &pts = solver.all_left();

    double dev_t = 0.0;
    if (k_cmp > 0) {
      const DenseBiLanczos ref =
          two_sided_lanczos(tc.matrix, expand_right(ps[0], blocks), expand_left(nep, pts[0], blocks), k_cmp);
      const TridiagT &t = solver.tridiag();
      auto rel = [](Complex a, Complex b) {
        const double s = std::max(std::abs(a), std::abs(b));
        return s == 0.0 ? 0.0 : std::abs(a - b) / s;
      };
      for (Index i = 0; i < k_cmp; ++i) {
        const auto u = static_cast<std::size_t>(i);
        dev_t = std::max({dev_t, rel(t.alpha[u], ref.t.alpha[u]), rel(t.beta[u], ref.t.beta[u]),
                          rel(t.gamma[u], ref.t.gamma[u])});
      }
    }

    // Gram-type quantities are compared relative to their largest entry.
    double dev_bi = 0.0, dev_expand = 0.0;
    double diff_dot = 0.0, max_dot = 0.0, diff_adj = 0.0, max_adj = 0.0;
    const Index m = static_cast<Index>(std::min(ps.size(), pts.size()));
    for (Index i = 0; i < m; ++i) {
      const CoeffBasisLeft apt = action_a_star(nep, solver.lu(), pts[i]);
      for (Index j = 0; j < m; ++j) {
        const Complex ds = dot_split(nep, pts[i], ps[j]);
        const Complex dn = dot_naive(nep, pts[i], ps[j]);
        diff_dot = std::max(diff_dot, std::abs(ds - dn));
        max_dot = std::max({max_dot, std::abs(ds), std::abs(dn)});
        dev_bi = std::max(dev_bi, std::abs(ds - (i == j ? 1.0 : 0.0)));
        const Complex l = dot_split(nep, pts[i], action_a(nep, solver.lu(), ps[j]));
        const Complex r = dot_split(nep, apt, ps[j]);
        diff_adj = std::max(diff_adj, std::abs(l - r));
        max_adj = std::max({max_adj, std::abs(l), std::abs(r)});
      }
      const CVec lhs = tc.matrix * expand_right(ps[i], blocks);
      const CVec rhs = expand_right(action_a(nep, solver.lu(), ps[i]), blocks);
      dev_expand = std::max(dev_expand, (lhs - rhs).head((ps[i].cols() + 1) * n).norm() /
                                            std::max(rhs.norm(), 1e-300));
    }
    const double dev_dot = max_dot > 0.0 ? diff_dot / max_dot : 0.0;
    const double dev_adj = max_adj > 0.0 ? diff_adj / max_adj : 0.0;

    // Converged Ritz values against the truncation's spectrum.
    const auto reference = reference_eigs(nep, blocks, nep.radius());
    double dev_eig = 0.0;
    Index checked = 0;
    for (const auto &t : solver.extract_ritz()) {
      if (!(t.rres < cfg.tol)) continue;
      double best = std::numeric_limits<double>::infinity();
      for (Complex r : reference) best = std::min(best, std::abs(r - t.lambda) / std::abs(r));
      dev_eig = std::max(dev_eig, best);
      ++checked;
    }

    log << "problem " << nep.name() << ", n = " << n << ", k = " << k_cmp << ", truncation N = " << blocks << '\n';
    log << "tridiagonal vs dense two-sided Lanczos   max rel dev " << fixed(dev_t) << '\n';
    log << "split vs naive scalar product            max rel dev " << fixed(dev_dot) << '\n';
    log << "biorthogonality |G - I|                  max abs dev " << fixed(dev_bi) << '\n';
    log << "adjoint consistency                      max rel dev " << fixed(dev_adj) << '\n';
    log << "right expansion vs dense action          max rel dev " << fixed(dev_expand) << '\n';
    log << "converged Ritz values vs reference eigs  max rel dev " << fixed(dev_eig) << " (" << checked
        << " values)\n";
    return int(kOk);
  });
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Infinite bi-Lanczos and infinite Arnoldi for nonlinear eigenvalue problems", "nep"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  std::string out_dir, method;
  std::uint64_t seed = 0;
  Index k = 0;
  double tol = 0.0;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--k", k, "maximum number of iterations");
    sub->add_option("--tol", tol, "residual tolerance");
    sub->add_option("--method", method, "bilanczos, iar or both");
  };
  CLI::App *solve_cmd = app.add_subcommand("solve", "solve a problem, write triplets, history and plot");
  CLI::App *compare_cmd = app.add_subcommand("compare", "bi-Lanczos against IAR from the same start vector");
  CLI::App *timing_cmd = app.add_subcommand("timing", "naive against split scalar product timings");
  CLI::App *oracle_cmd = app.add_subcommand("oracle-check", "deviations from the dense oracles");
  for (CLI::App *sub : {solve_cmd, compare_cmd, timing_cmd, oracle_cmd}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    auto *sub = app.get_subcommands().front();
    if (sub->count("--out")) ov.out = out_dir;
    if (sub->count("--seed")) ov.seed = seed;
    if (sub->count("--k")) ov.k = k;
    if (sub->count("--tol")) ov.tol = tol;
    if (sub->count("--method")) ov.method = method;
    apply_overrides(cfg, ov);
  } catch (const Error &e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }

  if (solve_cmd->parsed()) return cmd_solve(cfg, out);
  if (compare_cmd->parsed()) return cmd_compare(cfg, out);
  if (timing_cmd->parsed()) return cmd_timing(cfg, out);
  return cmd_oracle_check(cfg, out);
}

}  // namespace nep::cli
