#pragma once

#include <string>
#include <vector>

namespace hammer {

struct PlotSeries {
  std::string label;
  std::vector<double> values;  // y per episode, x is the index + 1
};

struct PlotOptions {
  std::string title;
  std::string x_label = "episode";
  std::string y_label = "mean reward per agent";
  int smoothing_window = 1;  // trailing mean applied before drawing
  int width = 960;
  int height = 540;
};

// Standalone SVG line chart: axes, ticks, one polyline per series, legend.
// No external renderer involved, so output is identical across machines.
std::string render_svg_plot(const std::vector<PlotSeries>& series, const PlotOptions& opts);
void write_svg_plot(const std::vector<PlotSeries>& series, const PlotOptions& opts,
                    const std::string& path);

}  // namespace hammer
