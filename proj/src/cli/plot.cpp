#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mckv/cli.hpp"
#include "mckv/error.hpp"

namespace mckv::cli {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b"};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string escape(const std::string& s) {
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

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double map(double v) const {
    const double t = log ? std::log10(v) : v;
    return (t - lo) / (hi - lo);
  }
  double value_at(double frac) const {
    const double t = lo + frac * (hi - lo);
    return log ? std::pow(10.0, t) : t;
  }
};

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

Axis make_axis(const std::vector<double>& values, bool log) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    const double t = log ? std::log10(v) : v;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.04 * (hi - lo);
  return {lo - pad, hi + pad, log};
}

}  // namespace

std::string render_plot(const std::vector<Series>& series, const PlotOptions& options) {
  std::vector<double> xs, ys;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw Error(ErrorCode::ShapeMismatch, "series '" + s.label + "' has mismatched x and y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (usable(s.x[i], options.log_x) && usable(s.y[i], options.log_y)) {
        xs.push_back(s.x[i]);
        ys.push_back(s.y[i]);
      }
    }
  }
  if (xs.empty()) throw Error(ErrorCode::EmptyPlot, "no finite points to plot in '" + options.title + "'");
  const Axis ax = make_axis(xs, options.log_x);
  const Axis ay = make_axis(ys, options.log_y);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + ax.map(v) * pw; };
  auto py = [&](double v) { return kTop + (1.0 - ay.map(v)) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\"" << fmt(kHeight)
     << "\" viewBox=\"0 0 " << fmt(kWidth) << ' ' << fmt(kHeight) << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << fmt(kWidth) << "\" height=\"" << fmt(kHeight) << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"24.00\" text-anchor=\"middle\" font-size=\"16\">"
     << escape(options.title) << "</text>\n";
  os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\"" << fmt(kLeft + pw) << "\" y2=\""
     << fmt(kTop + ph) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft) << "\" y2=\"" << fmt(kTop + ph)
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    const double x = kLeft + f * pw;
    const double y = kTop + (1.0 - f) * ph;
    os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\"" << fmt(x) << "\" y2=\"" << fmt(kTop + ph + 5)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(kTop + ph + 20) << "\" text-anchor=\"middle\" font-size=\"11\">"
       << tick_label(ax.value_at(f)) << "</text>\n";
    os << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft) << "\" y2=\"" << fmt(y)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
       << tick_label(ay.value_at(f)) << "</text>\n";
  }
  os << "<text x=\"" << fmt(kLeft + pw / 2) << "\" y=\"" << fmt(kHeight - 14) << "\" text-anchor=\"middle\" font-size=\"13\">"
     << escape(options.x_label) << (options.log_x ? " (log)" : "") << "</text>\n";
  os << "<text x=\"18.00\" y=\"" << fmt(kTop + ph / 2) << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18.00 "
     << fmt(kTop + ph / 2) << ")\">" << escape(options.y_label) << (options.log_y ? " (log)" : "") << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = kColors[si % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], options.log_x) || !usable(s.y[i], options.log_y)) continue;
      os << (first ? "" : " ") << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
      first = false;
    }
    os << "\"/>\n";
    const double ly = kTop + 16.0 * si + 8.0;
    os << "<line x1=\"" << fmt(kLeft + pw + 12) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(kLeft + pw + 32) << "\" y2=\""
       << fmt(ly) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    os << "<text x=\"" << fmt(kLeft + pw + 36) << "\" y=\"" << fmt(ly + 4) << "\" font-size=\"11\">" << escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_plot(const std::vector<Series>& series, const PlotOptions& options, const std::filesystem::path& path) {
  const std::string svg = render_plot(series, options);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << svg;
}

}  // namespace mckv::cli
