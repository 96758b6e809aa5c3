#pragma once

#include <string>
#include <vector>

#include "dirsel/harness.hpp"

namespace dirsel {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  bool dashed = false;
  bool markers = false;
};

struct LinePlot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  std::vector<Series> series;
  std::string caption;
};

// Self-contained SVG document.
std::string render_svg(const LinePlot& plot);

// One profile of a run at one time; eps = 0 marks the limit run.
struct Trajectory {
  double eps = 0.0;
  double t = 0.0;
  std::vector<double> y;
  std::vector<double> X;
  std::vector<double> c;
};

struct PlotData {
  std::vector<ReportRow> rows;
  std::vector<Trajectory> trajectories;
};

PlotData plot_data(const SweepResult& result, const Grids& grids);

// Reads report.csv, limit.csv and eps_*.csv from a sweep output directory.
PlotData load_plot_data(const std::string& dir);

struct PlotOutcome {
  std::vector<std::string> files;
  std::vector<std::string> notices;
};

inline const std::vector<std::string> kPlotFiles{"trait_profiles.svg", "err_X_loglog.svg",
                                                 "width_ratio.svg", "nutrient_profiles.svg"};

PlotOutcome emit_plots(const PlotData& data, const std::string& dir);

}  // namespace dirsel
