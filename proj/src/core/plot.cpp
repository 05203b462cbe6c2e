#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "metrics.hpp"

namespace hammer {

namespace {

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
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

// Round tick spacing to 1/2/5 times a power of ten.
double nice_step(double span, int target_ticks) {
  if (span <= 0.0) return 1.0;
  double raw = span / target_ticks;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double frac = raw / mag;
  double step = frac < 1.5 ? 1.0 : frac < 3.5 ? 2.0 : frac < 7.5 ? 5.0 : 10.0;
  return step * mag;
}

}  // namespace

std::string render_svg_plot(const std::vector<PlotSeries>& series, const PlotOptions& opts) {
  if (series.empty()) throw std::runtime_error("render_svg_plot: no series");
  std::vector<PlotSeries> smooth = series;
  if (opts.smoothing_window > 1)
    for (PlotSeries& s : smooth) s.values = rolling_mean(s.values, opts.smoothing_window);

  double x_max = 1.0, y_min = 0.0, y_max = 0.0;
  bool any = false;
  for (const PlotSeries& s : smooth) {
    x_max = std::max(x_max, static_cast<double>(s.values.size()));
    for (double v : s.values) {
      if (!any) {
        y_min = y_max = v;
        any = true;
      } else {
        y_min = std::min(y_min, v);
        y_max = std::max(y_max, v);
      }
    }
  }
  if (!any) throw std::runtime_error("render_svg_plot: all series empty");
  if (y_max == y_min) {
    y_max += 1.0;
    y_min -= 1.0;
  }
  double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  const double ml = 70, mr = 20, mt = opts.title.empty() ? 20 : 44, mb = 50;
  const double pw = opts.width - ml - mr, ph = opts.height - mt - mb;
  auto sx = [&](double x) { return ml + (x - 1.0) / std::max(x_max - 1.0, 1.0) * pw; };
  auto sy = [&](double y) { return mt + (y_max - y) / (y_max - y_min) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opts.width) +
         "\" height=\"" + std::to_string(opts.height) + "\" viewBox=\"0 0 " +
         std::to_string(opts.width) + " " + std::to_string(opts.height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!opts.title.empty())
    svg += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">" + escape_xml(opts.title) + "</text>\n";

  // axes
  svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(mt) + "\" x2=\"" + fmt(ml) + "\" y2=\"" +
         fmt(mt + ph) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(mt + ph) + "\" x2=\"" + fmt(ml + pw) +
         "\" y2=\"" + fmt(mt + ph) + "\" stroke=\"black\"/>\n";

  double ystep = nice_step(y_max - y_min, 6);
  for (double ty = std::ceil(y_min / ystep) * ystep; ty <= y_max + 1e-12; ty += ystep) {
    double y = sy(ty);
    svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(ml + pw) + "\" y2=\"" +
           fmt(y) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + fmt(ml - 8) + "\" y=\"" + fmt(y + 4) + "\" text-anchor=\"end\" "
           "font-family=\"sans-serif\" font-size=\"11\">" + fmt(ty) + "</text>\n";
  }
  double xstep = nice_step(x_max - 1.0, 8);
  for (double tx = 1.0; tx <= x_max + 1e-12; tx += xstep) {
    double x = sx(tx);
    svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(mt + ph) + "\" x2=\"" + fmt(x) + "\" y2=\"" +
           fmt(mt + ph + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(mt + ph + 18) + "\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"11\">" + fmt(tx) + "</text>\n";
  }
  svg += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"" + fmt(mt + ph + 36) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
         escape_xml(opts.x_label) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt(mt + ph / 2) + "\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 " +
         fmt(mt + ph / 2) + ")\">" + escape_xml(opts.y_label) + "</text>\n";

  for (size_t si = 0; si < smooth.size(); ++si) {
    const PlotSeries& s = smooth[si];
    if (s.values.empty()) continue;
    const char* color = kSeriesColors[si % (sizeof(kSeriesColors) / sizeof(*kSeriesColors))];
    std::string points;
    for (size_t i = 0; i < s.values.size(); ++i) {
      if (!points.empty()) points += ' ';
      points += fmt(sx(static_cast<double>(i + 1))) + "," + fmt(sy(s.values[i]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    double ly = mt + 16 + 18 * static_cast<double>(si);
    svg += "<line x1=\"" + fmt(ml + pw - 150) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" +
           fmt(ml + pw - 126) + "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(ml + pw - 120) + "\" y=\"" + fmt(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + escape_xml(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void write_svg_plot(const std::vector<PlotSeries>& series, const PlotOptions& opts,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write plot file '" + path + "'");
  out << render_svg_plot(series, opts);
  if (!out) throw std::runtime_error("short write to '" + path + "'");
}

}  // namespace hammer
