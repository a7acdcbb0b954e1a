#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cofine::plot {

struct Series {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
  bool dashed = false;
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 860;
  int height = 520;
};

// Static vector-graphics line chart; series get a fixed color cycle.
void write_line_chart(const std::filesystem::path& path,
                      const std::vector<Series>& series,
                      const ChartOptions& options);

}  // namespace cofine::plot
