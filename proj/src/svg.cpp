#include "asgd/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace asgd {

namespace {

constexpr double kWidth = 840, kHeight = 560;
constexpr double kLeft = 90, kRight = 30, kTop = 50, kBottom = 70;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

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

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;

  double to_unit(double v) const {
    if (log) return (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo));
    return (v - lo) / (hi - lo);
  }

  std::vector<double> ticks() const {
    std::vector<double> t;
    if (log) {
      const int e0 = static_cast<int>(std::floor(std::log10(lo)));
      const int e1 = static_cast<int>(std::ceil(std::log10(hi)));
      for (int e = e0; e <= e1; ++e) {
        const double v = std::pow(10.0, e);
        if (v >= lo * 0.999 && v <= hi * 1.001) t.push_back(v);
      }
      if (t.size() < 2) t = {lo, hi};
    } else {
      const double span = hi - lo;
      const double raw = span / 5.0;
      const double mag = std::pow(10.0, std::floor(std::log10(raw)));
      double step = mag;
      for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) {
          step = m * mag;
          break;
        }
      for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) t.push_back(v);
    }
    return t;
  }
};

}  // namespace

void write_line_plot(const std::filesystem::path& path, const PlotSpec& spec,
                     std::span<const PlotSeries> series) {
  Axis x{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
         spec.log_x};
  Axis y{x.lo, x.hi, spec.log_y};
  bool any = false;
  for (const PlotSeries& s : series) {
    for (const auto& [px, py] : s.points) {
      if ((spec.log_x && px <= 0) || (spec.log_y && py <= 0)) continue;
      x.lo = std::min(x.lo, px);
      x.hi = std::max(x.hi, px);
      y.lo = std::min(y.lo, py);
      y.hi = std::max(y.hi, py);
      any = true;
    }
  }
  if (!any) {
    x.lo = spec.log_x ? 1 : 0;
    x.hi = spec.log_x ? 10 : 1;
    y.lo = spec.log_y ? 1 : 0;
    y.hi = spec.log_y ? 10 : 1;
  }
  if (x.lo == x.hi) {
    x.lo = spec.log_x ? x.lo / 2 : x.lo - 1;
    x.hi = spec.log_x ? x.hi * 2 : x.hi + 1;
  }
  if (y.lo == y.hi) {
    y.lo = spec.log_y ? y.lo / 2 : y.lo - 1;
    y.hi = spec.log_y ? y.hi * 2 : y.hi + 1;
  }

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px_of = [&](double v) { return kLeft + x.to_unit(v) * pw; };
  auto py_of = [&](double v) { return kTop + (1.0 - y.to_unit(v)) * ph; };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
         fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
         "\" fill=\"white\"/>\n";
  out += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"28\" text-anchor=\"middle\" font-size=\"17\" "
         "font-family=\"sans-serif\">" + escape(spec.title) + "</text>\n";

  // axes frame
  out += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(pw) +
         "\" height=\"" + fmt(ph) + "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (double t : x.ticks()) {
    const double X = px_of(t);
    out += "<line x1=\"" + fmt(X) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(X) + "\" y2=\"" +
           fmt(kTop + ph) + "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"" + fmt(X) + "\" y=\"" + fmt(kTop + ph + 20) +
           "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" + fmt(t) +
           "</text>\n";
  }
  for (double t : y.ticks()) {
    const double Y = py_of(t);
    out += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(Y) + "\" x2=\"" + fmt(kLeft + pw) +
           "\" y2=\"" + fmt(Y) + "\" stroke=\"#ddd\"/>\n";
    out += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(Y + 4) +
           "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">" + fmt(t) +
           "</text>\n";
  }
  out += "<text x=\"" + fmt(kLeft + pw / 2) + "\" y=\"" + fmt(kHeight - 18) +
         "\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\">" +
         escape(spec.x_label) + "</text>\n";
  out += "<text x=\"22\" y=\"" + fmt(kTop + ph / 2) +
         "\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\" transform=\"rotate(-90 22 " +
         fmt(kTop + ph / 2) + ")\">" + escape(spec.y_label) + "</text>\n";

  std::size_t color = 0;
  double legend_y = kTop + 14;
  for (const PlotSeries& s : series) {
    const char* stroke = kPalette[color % (sizeof kPalette / sizeof *kPalette)];
    ++color;
    std::string pts;
    for (const auto& [vx, vy] : s.points) {
      if ((spec.log_x && vx <= 0) || (spec.log_y && vy <= 0)) continue;
      pts += fmt(px_of(vx)) + "," + fmt(py_of(vy)) + " ";
    }
    if (!pts.empty()) {
      out += "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"2\"";
      if (s.dashed) out += " stroke-dasharray=\"6,5\"";
      out += " points=\"" + pts + "\"/>\n";
    }
    out += "<line x1=\"" + fmt(kLeft + pw - 150) + "\" y1=\"" + fmt(legend_y - 4) + "\" x2=\"" +
           fmt(kLeft + pw - 120) + "\" y2=\"" + fmt(legend_y - 4) + "\" stroke=\"" + stroke +
           "\" stroke-width=\"2\"" + (s.dashed ? " stroke-dasharray=\"6,5\"" : "") + "/>\n";
    out += "<text x=\"" + fmt(kLeft + pw - 112) + "\" y=\"" + fmt(legend_y) +
           "\" font-size=\"12\" font-family=\"sans-serif\">" + escape(s.name) + "</text>\n";
    legend_y += 18;
  }
  out += "</svg>\n";

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write plot: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace asgd
