#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rggrecon/sweep.hpp"

namespace rgg {

struct PlotSeries {
  double alpha = 0.0;
  int m = 2;
  std::vector<double> ns;       // distinct sizes, ascending
  std::vector<double> medians;  // median d_star per size
  bool fitted = false;
  LogLogFit fit;
};

struct Plot {
  std::string svg;
  std::vector<PlotSeries> series;
};

/// Left panel: fitted exponent against alpha, with the predicted exponent
/// drawn as a line. Right panel: median d_star against n on log axes, one
/// series per alpha with its least squares line. Throws Format when there is
/// nothing to draw.
Plot render_plot(const std::vector<SweepRow>& rows);

/// Reads the CSV, renders, writes the SVG.
Plot plot_csv(const std::filesystem::path& csv, const std::filesystem::path& svg);

}  // namespace rgg
