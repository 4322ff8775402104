#pragma once

#include <string>
#include <vector>

namespace wgm::cli {

struct Series {
  std::string name;
  std::vector<double> x, y;
  bool dashed = false;
};

struct Plot {
  std::string title, xlabel, ylabel;
  std::vector<Series> series;
};

/// Minimal line plot; deterministic output for identical input.
std::string render_svg(const Plot &plot);

} // namespace wgm::cli
