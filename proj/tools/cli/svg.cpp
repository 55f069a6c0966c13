#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "kglab/format.hpp"

namespace kglab::cli {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 30.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double map(double v) const { return log ? std::log10(v) : v; }
  double fraction(double v) const { return (map(v) - lo) / (hi - lo); }
};

Axis make_axis(double lo, double hi, bool log) {
  Axis a{lo, hi, log};
  if (log) {
    a.lo = std::floor(std::log10(lo));
    a.hi = std::ceil(std::log10(hi));
    if (a.hi == a.lo) a.hi += 1.0;
  } else if (hi == lo) {
    a.lo = lo - 0.5;
    a.hi = hi + 0.5;
  } else {
    const double pad = 0.05 * (hi - lo);
    a.lo = lo - pad;
    a.hi = hi + pad;
  }
  return a;
}

// Tick positions in mapped coordinates.
std::vector<double> ticks(const Axis& a) {
  std::vector<double> out;
  if (a.log) {
    const double step = std::max(1.0, std::ceil((a.hi - a.lo) / 8.0));
    for (double e = a.lo; e <= a.hi + 1e-9; e += step) out.push_back(e);
    return out;
  }
  const double raw = (a.hi - a.lo) / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-12 * step; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

std::string tick_label(double mapped, bool log) {
  if (log) return "1e" + format_double(mapped);
  std::ostringstream s;
  s.precision(6);
  s << mapped;
  return s.str();
}

std::string fixed(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << v;
  return s.str();
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const std::vector<Series>& series, const PlotOptions& options) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument("plot: non-finite value");
      if (options.log_x && x <= 0.0) throw std::invalid_argument("plot: log x axis needs positive x");
      if (options.log_y && y <= 0.0) throw std::invalid_argument("plot: log y axis needs positive y");
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  if (!std::isfinite(xlo)) throw std::invalid_argument("plot: no data points");
  if (options.reference_y && (!options.log_y || *options.reference_y > 0.0)) {
    ylo = std::min(ylo, *options.reference_y);
    yhi = std::max(yhi, *options.reference_y);
  }
  const Axis ax = make_axis(xlo, xhi, options.log_x);
  const Axis ay = make_axis(ylo, yhi, options.log_y);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + ax.fraction(x) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - ay.fraction(y)) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
         "viewBox=\"0 0 800 600\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  out << "<g stroke=\"black\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kTop + ph) << "\" x2=\""
      << fixed(kLeft + pw) << "\" y2=\"" << fixed(kTop + ph) << "\"/>\n";
  out << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kTop) << "\" x2=\""
      << fixed(kLeft) << "\" y2=\"" << fixed(kTop + ph) << "\"/>\n";
  out << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (double t : ticks(ax)) {
    const double x = kLeft + (t - ax.lo) / (ax.hi - ax.lo) * pw;
    out << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(kTop + ph) << "\" x2=\""
        << fixed(x) << "\" y2=\"" << fixed(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(kTop + ph + 20)
        << "\" text-anchor=\"middle\">" << tick_label(t, ax.log) << "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double y = kTop + (1.0 - (t - ay.lo) / (ay.hi - ay.lo)) * ph;
    out << "<line x1=\"" << fixed(kLeft - 5) << "\" y1=\"" << fixed(y) << "\" x2=\""
        << fixed(kLeft) << "\" y2=\"" << fixed(y) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fixed(kLeft - 8) << "\" y=\"" << fixed(y + 4)
        << "\" text-anchor=\"end\">" << tick_label(t, ay.log) << "</text>\n";
  }
  out << "<text x=\"" << fixed(kLeft + pw / 2) << "\" y=\"" << fixed(kHeight - 15)
      << "\" text-anchor=\"middle\">" << escape(options.x_label) << "</text>\n";
  out << "<text x=\"20\" y=\"" << fixed(kTop + ph / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " << fixed(kTop + ph / 2)
      << ")\">" << escape(options.y_label) << "</text>\n</g>\n";

  if (options.reference_y && (!options.log_y || *options.reference_y > 0.0)) {
    const double y = py(*options.reference_y);
    out << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(y) << "\" x2=\""
        << fixed(kLeft + pw) << "\" y2=\"" << fixed(y)
        << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    out << "<path fill=\"none\" stroke=\"" << kPalette[i % std::size(kPalette)]
        << "\" stroke-width=\"1.5\" data-series=\"" << escape(s.label) << "\" d=\"";
    for (std::size_t k = 0; k < s.points.size(); ++k) {
      out << (k == 0 ? "M" : " L") << fixed(px(s.points[k].first)) << ','
          << fixed(py(s.points[k].second));
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace kglab::cli
