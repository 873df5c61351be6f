#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace rotorxy::io {

// Shortest round-trip decimal representation; keeps CSV output byte-stable.
std::string format_double(double v);

// Write via a temp file in the same directory, then rename into place.
void atomic_write(const std::filesystem::path& path, const std::string& content);

struct Column {
  std::string name;
  std::vector<double> values;
};

std::string csv_table(const std::vector<Column>& columns);

// Minimal self-contained SVG line plot (one polyline per series).
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};
std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label,
                          const std::vector<PlotSeries>& series);

}  // namespace rotorxy::io
