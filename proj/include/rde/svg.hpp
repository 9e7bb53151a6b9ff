#pragma once

#include <string>
#include <vector>

namespace rde::svg {

struct Series {
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool line = true;    // polyline through the points
  bool marks = true;   // circles at the points
};

/// Fixed 800x600 plot with linear or log-10 x axis. No dependencies: the
/// CSV next to it is the machine-readable output, this is a quick look.
struct Plot {
  std::string title, xlabel, ylabel;
  bool log_x = false;
  std::vector<Series> series;

  std::string render() const;
  void write(const std::string& path) const;
};

}  // namespace rde::svg
