#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mlr::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool points_only = false;
};

struct PlotOptions {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  int width = 720;
  int height = 480;
};

/// Static line/scatter plot. Non-positive values are dropped on log axes.
void write_plot(std::ostream& os, const std::vector<Series>& series, const PlotOptions& opt);
void write_plot(const std::string& path, const std::vector<Series>& series,
                const PlotOptions& opt);

}  // namespace mlr::svg
