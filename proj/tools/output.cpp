#include "output.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace simtool {

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  if (v == 0.0) return "0";
  const double a = std::abs(v);
  if (a >= 1e-2 && a < 1e4) {
    std::snprintf(buf, sizeof buf, "%.3g", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.0e", v);
  }
  return buf;
}

// Roughly five round-numbered ticks covering [lo, hi].
std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
    out.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return buf;
}

std::string format_csv(const Column& axis, const std::vector<Column>& columns, const std::vector<char>* flags,
                       const std::string& flags_name) {
  std::string out = quote(axis.name);
  for (const auto& c : columns) out += "," + quote(c.name);
  if (flags != nullptr) out += "," + quote(flags_name);
  out += "\r\n";
  for (std::size_t r = 0; r < axis.values.size(); ++r) {
    out += format_number(axis.values[r]);
    for (const auto& c : columns) out += "," + format_number(r < c.values.size() ? c.values[r] : std::nan(""));
    if (flags != nullptr) out += (*flags)[r] ? ",1" : ",0";
    out += "\r\n";
  }
  return out;
}

std::string format_svg(const PlotSpec& spec, const std::vector<Series>& series) {
  const double left = 80, right = 20, top = 40, bottom = 60;
  const double w = spec.width, h = spec.height;
  const double pw = w - left - right, ph = h - top - bottom;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  auto xt = [&](double x) { return spec.log_x ? std::log10(x) : x; };
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || !std::isfinite(s.x[i]) || (spec.log_x && s.x[i] <= 0)) continue;
      xmin = std::min(xmin, xt(s.x[i]));
      xmax = std::max(xmax, xt(s.x[i]));
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!(xmax >= xmin)) xmin = 0, xmax = 1;
  if (!(ymax >= ymin)) ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto px = [&](double x) { return left + (xt(x) - xmin) / (xmax - xmin) * pw; };
  auto pxt = [&](double tx) { return left + (tx - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) + "\" height=\"" +
       std::to_string(spec.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + fixed(w / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
       escape_xml(spec.title) + "</text>\n";
  o += "<rect x=\"" + fixed(left) + "\" y=\"" + fixed(top) + "\" width=\"" + fixed(pw) + "\" height=\"" + fixed(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";

  // X ticks: decades on a log axis.
  std::vector<std::pair<double, std::string>> xticks;
  if (spec.log_x) {
    for (double d = std::ceil(xmin - 1e-9); d <= xmax + 1e-9; d += 1.0) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(d));
      xticks.emplace_back(d, buf);
    }
  } else {
    for (double t : linear_ticks(xmin, xmax)) xticks.emplace_back(t, tick_label(t));
  }
  for (const auto& [t, label] : xticks) {
    const double x = pxt(t);
    o += "<line x1=\"" + fixed(x) + "\" y1=\"" + fixed(top + ph) + "\" x2=\"" + fixed(x) + "\" y2=\"" +
         fixed(top + ph + 5) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fixed(x) + "\" y=\"" + fixed(top + ph + 18) + "\" text-anchor=\"middle\">" + label +
         "</text>\n";
  }
  for (double t : linear_ticks(ymin, ymax)) {
    const double y = py(t);
    o += "<line x1=\"" + fixed(left - 5) + "\" y1=\"" + fixed(y) + "\" x2=\"" + fixed(left) + "\" y2=\"" + fixed(y) +
         "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fixed(left - 8) + "\" y=\"" + fixed(y + 4) + "\" text-anchor=\"end\">" + tick_label(t) +
         "</text>\n";
  }
  o += "<text x=\"" + fixed(left + pw / 2) + "\" y=\"" + fixed(h - 15) + "\" text-anchor=\"middle\">" +
       escape_xml(spec.x_label) + "</text>\n";
  o += "<text x=\"18\" y=\"" + fixed(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       fixed(top + ph / 2) + ")\">" + escape_xml(spec.y_label) + "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || !std::isfinite(s.x[i]) || (spec.log_x && s.x[i] <= 0)) continue;
      if (!pts.empty()) pts += ' ';
      pts += fixed(px(s.x[i])) + "," + fixed(py(s.y[i]));
    }
    o += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
         "\"/>\n";
    const double ly = top + 16 + 16 * static_cast<double>(k);
    o += "<line x1=\"" + fixed(left + pw - 150) + "\" y1=\"" + fixed(ly - 4) + "\" x2=\"" + fixed(left + pw - 130) +
         "\" y2=\"" + fixed(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + fixed(left + pw - 125) + "\" y=\"" + fixed(ly) + "\">" + escape_xml(s.label) + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path + "': " + std::strerror(errno));
  f << content;
  f.close();
  if (!f) throw std::runtime_error("cannot write '" + path + "': " + std::strerror(errno));
}

}  // namespace simtool
