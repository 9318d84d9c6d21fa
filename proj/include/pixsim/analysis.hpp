#pragma once

// Figures of merit computed from sweep and transient results.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pixsim/engine.hpp"
#include "pixsim/netlist.hpp"

namespace pixsim {

// Trace name for a node label: "out" -> "v_out"; names already carrying a
// v_/i_/x_ prefix pass through.
std::string trace_name(std::string_view node);

// max - min of the node trace over samples with t_from <= t <= t_to.
// Throws EmptyWindow when no sample lies inside the window.
double output_swing(const TransientResult& tr, std::string_view node, double t_from, double t_to);
double output_swing(std::span<const double> time, std::span<const double> v, double t_from, double t_to);

struct ResponseFit {
  double log_slope_mv_per_decade = 0.0;  // sign preserved
  double log_intercept_v = 0.0;          // value at I = 1 A
  double r_squared = 0.0;
  double fit_lo = 0.0, fit_hi = 0.0;     // A, extreme points used
  std::size_t points = 0;
};

// Least-squares V = a + b*log10(I) over converged points with lo <= I <= hi.
// Throws InsufficientPoints below 4 points.
ResponseFit fit_log_slope(const SweepResult& sw, std::string_view node, double lo, double hi);
ResponseFit fit_log_slope(std::span<const double> current, std::span<const double> v, double lo, double hi);

struct KneeReport {
  double knee_current = 0.0;  // A, geometric mean of the points around the split
  double linear_r2 = 0.0;
  double log_r2 = 0.0;
  double linear_lo = 0.0, linear_hi = 0.0;
  double log_lo = 0.0, log_hi = 0.0;
  double improvement = 0.0;   // 1 - SSE(two segments) / SSE(best single model)
};

// Exhaustive split search: V linear in I below the split, linear in log10(I)
// above. Throws NoKnee when the split improves the best single model by less
// than 5%, InsufficientPoints below 6 points.
KneeReport detect_knee(const SweepResult& sw, std::string_view node);
KneeReport detect_knee(std::span<const double> current, std::span<const double> v);

inline constexpr double kDefaultSensitivityFloor = 0.010;  // V per decade

// 20*log10(Imax/Imin) over the widest contiguous run of points where the
// central-difference |dV/dlog10 I| >= floor. Throws NoSensitiveRegion.
double dynamic_range_db(const SweepResult& sw, std::string_view node,
                        double floor_v_per_decade = kDefaultSensitivityFloor);
double dynamic_range_db(std::span<const double> current, std::span<const double> v,
                        double floor_v_per_decade = kDefaultSensitivityFloor);

// Time-weighted mean of the power delivered by all independent sources,
// trapezoidal quadrature. The window defaults to the whole trace.
double average_power(const TransientResult& tr, std::optional<double> t_from = std::nullopt,
                     std::optional<double> t_to = std::nullopt);

// ---------------------------------------------------------------------------
// Area

struct AreaConfig {
  std::optional<double> mosfet_overhead;               // multiplies W*L
  std::optional<double> capacitor_density_ff_per_um2;
  std::map<DeviceKind, double> fixed_um2;              // per-kind footprint
  std::map<std::string, double> instance_um2;          // "<circuit>.<device>", lower-case
  bool calibrated = false;                             // loaded from a file

  // Overhead 25, 5 fF/um^2, zero-area sources and photodiode.
  static AreaConfig defaults();
};

// Flat "key = value" text; '#' starts a comment; "[section]" prefixes keys.
// Throws Error{Config} with the offending line.
AreaConfig parse_area_config(std::string_view text);
AreaConfig load_area_config(const std::string& path);

struct AreaRow {
  std::string device;
  DeviceKind kind;
  double area_um2;
};

struct AreaReport {
  std::string circuit;
  std::vector<AreaRow> rows;
  double total_um2 = 0.0;
  bool calibrated = false;
};

// Throws MissingGeometry naming the device kind the config cannot size.
AreaReport area_report(const Circuit& c, const AreaConfig& cfg);

struct PixelReport {
  std::string name;
  double swing_v = 0.0;
  double dynamic_range_db = 0.0;
  double avg_power_w = 0.0;
  AreaReport area;
};

struct ComparisonRow {
  std::string name;
  double area_ratio, power_ratio, swing_ratio;
  double dr_difference_db;
};

// Ratios of every report against the last one (the baseline).
std::vector<ComparisonRow> compare_pixels(std::span<const PixelReport> reports);

}  // namespace pixsim
