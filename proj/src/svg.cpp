#include "stfem/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace stfem {

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 90, kRight = 170, kTop = 60, kBottom = 60;
constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

struct Axis {
  bool log = true;
  double lo = 0, hi = 1;  // in transformed units
  double pixel_lo = 0, pixel_hi = 1;

  double transform(double v) const { return log ? std::log10(v) : v; }
  double map(double v) const {
    const double s = (transform(v) - lo) / (hi - lo);
    return pixel_lo + s * (pixel_hi - pixel_lo);
  }
  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::ceil(lo - 1e-9); e <= hi + 1e-9; e += 1.0) out.push_back(std::pow(10.0, e));
      if (out.size() < 2) {
        out.clear();
        for (double e = std::floor(lo); e <= hi; e += 1.0)
          for (double m : {1.0, 2.0, 5.0}) {
            const double v = m * std::pow(10.0, e);
            if (std::log10(v) >= lo - 1e-9 && std::log10(v) <= hi + 1e-9) out.push_back(v);
          }
      }
    } else {
      const double raw = (hi - lo) / 5.0;
      const double mag = std::pow(10.0, std::floor(std::log10(raw)));
      double step = mag;
      for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
          step = m * mag;
          break;
        }
      for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step)
        out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    }
    return out;
  }
};

Axis make_axis(bool log, const std::vector<double>& values, double p0, double p1) {
  Axis a;
  a.log = log;
  a.pixel_lo = p0;
  a.pixel_hi = p1;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values)
    if (a.usable(v)) {
      lo = std::min(lo, a.transform(v));
      hi = std::max(hi, a.transform(v));
    }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  if (hi - lo < 1e-12) {
    lo -= log ? 0.5 : std::max(1.0, std::abs(lo)) * 0.5;
    hi += log ? 0.5 : std::max(1.0, std::abs(hi)) * 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  a.lo = lo - pad;
  a.hi = hi + pad;
  return a;
}

}  // namespace

void write_svg(std::ostream& out, const LinePlot& plot) {
  std::vector<double> xs, ys;
  for (const auto& s : plot.series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  const Axis ax = make_axis(plot.log_x, xs, kLeft, kWidth - kRight);
  const Axis ay = make_axis(plot.log_y, ys, kHeight - kBottom, kTop);

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(plot.title) << "</text>\n";
  for (std::size_t i = 0; i < plot.notes.size(); ++i)
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << 40 + 14 * i
        << "\" text-anchor=\"middle\">" << escape(plot.notes[i]) << "</text>\n";

  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  out << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\""
      << y0 - y1 << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ax.ticks()) {
    const double px = ax.map(t);
    out << "<line x1=\"" << px << "\" y1=\"" << y0 << "\" x2=\"" << px << "\" y2=\"" << y1
        << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << px << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">" << fmt(t)
        << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double py = ay.map(t);
    out << "<line x1=\"" << x0 << "\" y1=\"" << py << "\" x2=\"" << x1 << "\" y2=\"" << py
        << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << x0 - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << fmt(t)
        << "</text>\n";
  }
  out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 16
      << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n"
      << "<text x=\"20\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << (y0 + y1) / 2 << ")\">" << escape(plot.y_label) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % std::size(kColors)];
    std::string path;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
      path += (path.empty() ? "M" : " L") + fmt(ax.map(s.x[i])) + "," + fmt(ay.map(s.y[i]));
      out << "<circle cx=\"" << fmt(ax.map(s.x[i])) << "\" cy=\"" << fmt(ay.map(s.y[i]))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    if (!path.empty())
      out << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\"/>\n";
    const double ly = kTop + 10 + 18 * k;
    out << "<line x1=\"" << x1 + 12 << "\" y1=\"" << ly << "\" x2=\"" << x1 + 32 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << x1 + 38 << "\" y=\"" << ly + 4 << "\">" << escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace stfem
