#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "nep/cli.hpp"

namespace nep::cli {

namespace {

constexpr double kPanelW = 520.0;
constexpr double kPanelH = 380.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

std::string escape(const std::string &s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// 1, 2 or 5 times a power of ten, giving roughly `target` intervals.
double nice_step(double span, int target)
{
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f <= 1.0 ? 1.0 : f <= 2.0 ? 2.0 : f <= 5.0 ? 5.0 : 10.0) * mag;
}

void render_panel(std::ostringstream &svg, const Panel &panel, double ox)
{
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto &s : panel.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || s.y[i] <= 0.0) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, std::log10(s.y[i]));
      ymax = std::max(ymax, std::log10(s.y[i]));
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0.0;
    xmax = 1.0;
    ymin = -1.0;
    ymax = 0.0;
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  ymin = std::floor(ymin);
  ymax = std::ceil(ymax);
  if (ymax <= ymin) ymax = ymin + 1.0;

  const double pw = kPanelW - kLeft - kRight;
  const double ph = kPanelH - kTop - kBottom;
  auto px = [&](double x) { return ox + kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double ly) { return kTop + (ymax - ly) / (ymax - ymin) * ph; };

  svg << "<text x=\"" << num(ox + kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(panel.title) << "</text>\n";
  svg << "<rect x=\"" << num(ox + kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
      << num(ph) << "\" fill=\"none\" stroke=\"#000\"/>\n";

  // Decades on y.
  const int ystep = std::max(1, int(std::ceil((ymax - ymin) / 10.0)));
  for (double ly = ymin; ly <= ymax + 1e-9; ly += ystep) {
    const double y = py(ly);
    svg << "<line x1=\"" << num(ox + kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(ox + kLeft + pw)
        << "\" y2=\"" << num(y) << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << num(ox + kLeft - 6) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">1e" << int(ly) << "</text>\n";
  }
  const double xstep = nice_step(xmax - xmin, 6);
  for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9 * xstep; x += xstep) {
    svg << "<line x1=\"" << num(px(x)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(px(x)) << "\" y2=\""
        << num(kTop + ph + 5) << "\" stroke=\"#000\"/>\n";
    svg << "<text x=\"" << num(px(x)) << "\" y=\"" << num(kTop + ph + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(x) << "</text>\n";
  }
  svg << "<text x=\"" << num(ox + kLeft + pw / 2) << "\" y=\"" << num(kPanelH - 12)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(panel.xlabel) << "</text>\n";
  svg << "<text transform=\"translate(" << num(ox + 16) << "," << num(kTop + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape(panel.ylabel) << "</text>\n";

  for (const auto &s : panel.series) {
    std::ostringstream pts;
    auto flush = [&]() {
      if (pts.tellp() > 0) {
        svg << "<polyline fill=\"none\" stroke=\"" << escape(s.color) << "\" stroke-width=\"1.5\" points=\""
            << pts.str() << "\"/>\n";
      }
      pts.str("");
      pts.clear();
    };
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || s.y[i] <= 0.0) {
        flush();
        continue;
      }
      if (pts.tellp() > 0) pts << ' ';
      pts << num(px(s.x[i])) << ',' << num(py(std::log10(s.y[i])));
    }
    flush();
  }

  // Legend, one entry per distinct label.
  std::vector<std::pair<std::string, std::string>> seen;
  for (const auto &s : panel.series) {
    if (s.label.empty()) continue;
    if (std::none_of(seen.begin(), seen.end(), [&](const auto &e) { return e.first == s.label; })) {
      seen.emplace_back(s.label, s.color);
    }
  }
  double ly = kTop + 14;
  for (const auto &[label, color] : seen) {
    const double lx = ox + kLeft + pw - 150;
    svg << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 20) << "\" y2=\""
        << num(ly - 4) << "\" stroke=\"" << escape(color) << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << num(lx + 26) << "\" y=\"" << num(ly) << "\" font-size=\"11\">" << escape(label)
        << "</text>\n";
    ly += 16;
  }
}

}  // namespace

std::string render_svg(const std::vector<Panel> &panels)
{
  const double width = kPanelW * double(std::max<std::size_t>(1, panels.size()));
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(kPanelH)
      << "\" viewBox=\"0 0 " << num(width) << ' ' << num(kPanelH) << "\" font-family=\"sans-serif\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) render_panel(svg, panels[i], kPanelW * double(i));
  svg << "</svg>\n";
  return svg.str();
}

std::vector<Series> residual_curves(const SolveResult &r, bool by_time, const std::string &prefix,
                                    const std::vector<std::string> &palette)
{
  // Group history rows by extraction.
  struct Extraction {
    Index iteration;
    double wall;
    std::vector<const HistoryRow *> rows;
  };
  std::vector<Extraction> ex;
  for (const auto &row : r.history.rows) {
    if (ex.empty() || ex.back().iteration != row.iteration) ex.push_back({row.iteration, row.wall_seconds, {}});
    ex.back().rows.push_back(&row);
  }

  std::vector<Complex> targets;
  for (const auto &t : r.triplets) {
    if (!t.converged) continue;
    const bool dup = std::any_of(targets.begin(), targets.end(), [&](Complex u) {
      return std::abs(u - t.lambda) <= 1e-8 * std::abs(t.lambda);
    });
    if (!dup) targets.push_back(t.lambda);
  }

  std::vector<Series> out;
  auto xval = [&](const Extraction &e) { return by_time ? e.wall : double(e.iteration); };
  if (targets.empty()) {
    Series s{prefix + "best residual", palette.empty() ? "#000" : palette.front(), {}, {}};
    for (const auto &e : ex) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto *row : e.rows) best = std::min(best, row->rres);
      s.x.push_back(xval(e));
      s.y.push_back(best);
    }
    out.push_back(std::move(s));
    return out;
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    Series s{prefix.empty() ? "" : prefix, palette.empty() ? "#000" : palette[i % palette.size()], {}, {}};
    for (const auto &e : ex) {
      const HistoryRow *best = nullptr;
      for (const auto *row : e.rows) {
        if (!best || std::abs(row->lambda - targets[i]) < std::abs(best->lambda - targets[i])) best = row;
      }
      s.x.push_back(xval(e));
      s.y.push_back(best ? best->rres : std::numeric_limits<double>::quiet_NaN());
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace nep::cli
