#pragma once

#include <optional>
#include <string>
#include <vector>

namespace softguide::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
  bool markers = true;  // otherwise a polyline
  std::string color = "#1f77b4";
};

struct Chart {
  std::string title, xlabel, ylabel;
  std::vector<Series> series;
  std::optional<double> hline;  // dashed horizontal reference
  std::string hline_label;
  bool log_x = false;
};

std::string render(const Chart& c, int width = 640, int height = 420);
// Best effort: returns false instead of throwing.
bool write(const std::string& path, const Chart& c);

}  // namespace softguide::svg
