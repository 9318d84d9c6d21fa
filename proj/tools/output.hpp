#pragma once

// CSV and SVG emitters for the sim tool.

#include <string>
#include <vector>

namespace simtool {

struct Column {
  std::string name;
  std::vector<double> values;
};

// RFC-4180 style table; numbers in scientific notation with 9 significant
// digits. Optional flags column (0/1) appended last under flags_name.
std::string format_csv(const Column& axis, const std::vector<Column>& columns,
                       const std::vector<char>* flags = nullptr, const std::string& flags_name = "converged");

std::string format_number(double v);

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  int width = 800;
  int height = 500;
};

// Static line plot; no timestamps or other run-dependent content.
std::string format_svg(const PlotSpec& spec, const std::vector<Series>& series);

// Throws std::runtime_error with the OS error text.
void write_file(const std::string& path, const std::string& content);

}  // namespace simtool
