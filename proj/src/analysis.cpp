#include "pixsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pixsim/error.hpp"

namespace pixsim {

namespace {

struct LineFit {
  double a = 0.0, b = 0.0;  // y = a + b*x
  double sse = 0.0, sst = 0.0;
  double r2() const { return sst > 0.0 ? std::clamp(1.0 - sse / sst, 0.0, 1.0) : (sse == 0.0 ? 1.0 : 0.0); }
};

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.b = sxx > 0.0 ? sxy / sxx : 0.0;
  f.a = my - f.b * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.a + f.b * x[i]);
    f.sse += r * r;
  }
  f.sst = syy;
  return f;
}

// Converged, positive-current points sorted by current.
struct Curve {
  std::vector<double> i, v;
};

Curve clean(std::span<const double> current, std::span<const double> v) {
  if (current.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "current and voltage lengths differ");
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < current.size(); ++k) {
    if (current[k] > 0.0 && std::isfinite(current[k]) && std::isfinite(v[k])) idx.push_back(k);
  }
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return current[a] < current[b]; });
  Curve c;
  for (auto k : idx) {
    c.i.push_back(current[k]);
    c.v.push_back(v[k]);
  }
  return c;
}

Curve sweep_curve(const SweepResult& sw, std::string_view node) {
  const std::vector<double> v = sw.trace(trace_name(node));
  std::vector<double> i = sw.values;
  std::vector<double> vv = v;
  for (std::size_t k = 0; k < i.size(); ++k) {
    if (k < sw.converged.size() && !sw.converged[k]) vv[k] = std::numeric_limits<double>::quiet_NaN();
  }
  return clean(i, vv);
}

std::vector<double> log10_of(std::span<const double> x) {
  std::vector<double> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [](double v) { return std::log10(v); });
  return out;
}

}  // namespace

std::string trace_name(std::string_view node) {
  if (node.size() > 2 && node[1] == '_' && (node[0] == 'v' || node[0] == 'i' || node[0] == 'x' ||
                                            node[0] == 'V' || node[0] == 'I' || node[0] == 'X')) {
    return std::string(node);
  }
  return "v_" + to_lower(node);
}

double output_swing(std::span<const double> time, std::span<const double> v, double t_from, double t_to) {
  if (time.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "time and trace lengths differ");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 0; k < time.size(); ++k) {
    if (time[k] < t_from || time[k] > t_to) continue;
    lo = std::min(lo, v[k]);
    hi = std::max(hi, v[k]);
  }
  if (!(hi >= lo)) throw Error(ErrorCode::EmptyWindow, "no samples inside the measurement window");
  return hi - lo;
}

double output_swing(const TransientResult& tr, std::string_view node, double t_from, double t_to) {
  const auto v = tr.trace(trace_name(node));
  return output_swing(tr.time, v, t_from, t_to);
}

ResponseFit fit_log_slope(std::span<const double> current, std::span<const double> v, double lo, double hi) {
  const Curve c = clean(current, v);
  std::vector<double> x, y;
  for (std::size_t k = 0; k < c.i.size(); ++k) {
    if (c.i[k] >= lo * (1 - 1e-12) && c.i[k] <= hi * (1 + 1e-12)) {
      x.push_back(std::log10(c.i[k]));
      y.push_back(c.v[k]);
    }
  }
  if (x.size() < 4) {
    throw Error(ErrorCode::InsufficientPoints,
                "log fit needs at least 4 converged points in range, got " + std::to_string(x.size()));
  }
  const LineFit f = fit_line(x, y);
  ResponseFit r;
  r.log_slope_mv_per_decade = f.b * 1e3;
  r.log_intercept_v = f.a;
  r.r_squared = f.r2();
  r.fit_lo = std::pow(10.0, x.front());
  r.fit_hi = std::pow(10.0, x.back());
  r.points = x.size();
  return r;
}

ResponseFit fit_log_slope(const SweepResult& sw, std::string_view node, double lo, double hi) {
  const Curve c = sweep_curve(sw, node);
  return fit_log_slope(c.i, c.v, lo, hi);
}

KneeReport detect_knee(std::span<const double> current, std::span<const double> v) {
  constexpr std::size_t kMinSide = 3;
  const Curve c = clean(current, v);
  const std::size_t n = c.i.size();
  if (n < 2 * kMinSide) {
    throw Error(ErrorCode::InsufficientPoints, "knee detection needs at least 6 converged points");
  }
  const std::vector<double> lg = log10_of(c.i);
  const LineFit all_lin = fit_line(c.i, c.v);
  const LineFit all_log = fit_line(lg, c.v);
  const double single = std::min(all_lin.sse, all_log.sse);

  double best = std::numeric_limits<double>::infinity();
  std::size_t split = 0;
  LineFit best_lo, best_hi;
  for (std::size_t s = kMinSide; s + kMinSide <= n; ++s) {
    const LineFit lo = fit_line(std::span(c.i).first(s), std::span(c.v).first(s));
    const LineFit hi = fit_line(std::span(lg).subspan(s), std::span(c.v).subspan(s));
    if (lo.sse + hi.sse < best) {
      best = lo.sse + hi.sse;
      split = s;
      best_lo = lo;
      best_hi = hi;
    }
  }

  const double spread = all_log.sst;
  if (!(single > 1e-12 * spread) || single <= 0.0) {
    throw Error(ErrorCode::NoKnee, "response is fitted exactly by a single model");
  }
  const double improvement = 1.0 - best / single;
  if (improvement < 0.05) {
    throw Error(ErrorCode::NoKnee, "two-segment fit improves the single-model fit by only " +
                                       std::to_string(improvement * 100.0) + "%");
  }
  KneeReport r;
  r.knee_current = std::sqrt(c.i[split - 1] * c.i[split]);
  r.linear_r2 = best_lo.r2();
  r.log_r2 = best_hi.r2();
  r.linear_lo = c.i.front();
  r.linear_hi = c.i[split - 1];
  r.log_lo = c.i[split];
  r.log_hi = c.i.back();
  r.improvement = improvement;
  return r;
}

KneeReport detect_knee(const SweepResult& sw, std::string_view node) {
  const Curve c = sweep_curve(sw, node);
  return detect_knee(c.i, c.v);
}

double dynamic_range_db(std::span<const double> current, std::span<const double> v, double floor_v_per_decade) {
  const Curve c = clean(current, v);
  const std::size_t n = c.i.size();
  if (n < 2) throw Error(ErrorCode::NoSensitiveRegion, "need at least 2 converged points");
  const std::vector<double> lg = log10_of(c.i);
  std::vector<char> ok(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t a = k == 0 ? 0 : k - 1;
    const std::size_t b = k + 1 == n ? n - 1 : k + 1;
    const double slope = (c.v[b] - c.v[a]) / (lg[b] - lg[a]);
    ok[k] = std::abs(slope) >= floor_v_per_decade;
  }
  double best = -1.0;
  for (std::size_t k = 0; k < n;) {
    if (!ok[k]) {
      ++k;
      continue;
    }
    std::size_t e = k;
    while (e + 1 < n && ok[e + 1]) ++e;
    best = std::max(best, lg[e] - lg[k]);
    k = e + 1;
  }
  if (best < 0.0) {
    throw Error(ErrorCode::NoSensitiveRegion, "no point reaches the sensitivity floor");
  }
  return 20.0 * best;
}

double dynamic_range_db(const SweepResult& sw, std::string_view node, double floor_v_per_decade) {
  const Curve c = sweep_curve(sw, node);
  return dynamic_range_db(c.i, c.v, floor_v_per_decade);
}

double average_power(const TransientResult& tr, std::optional<double> t_from, std::optional<double> t_to) {
  const double lo = t_from.value_or(tr.time.empty() ? 0.0 : tr.time.front());
  const double hi = t_to.value_or(tr.time.empty() ? 0.0 : tr.time.back());
  auto delivered = [&](std::size_t k) {
    double p = 0.0;
    for (std::size_t s = 0; s < tr.source_currents[k].size(); ++s) {
      p -= tr.source_voltages[k][s] * tr.source_currents[k][s];
    }
    return p;
  };
  double energy = 0.0;
  double span = 0.0;
  for (std::size_t k = 1; k < tr.time.size(); ++k) {
    if (tr.time[k - 1] < lo || tr.time[k] > hi) continue;
    const double dt = tr.time[k] - tr.time[k - 1];
    energy += 0.5 * dt * (delivered(k - 1) + delivered(k));
    span += dt;
  }
  if (span <= 0.0) {
    if (tr.time.size() == 1) return delivered(0);
    throw Error(ErrorCode::EmptyWindow, "power window contains no interval");
  }
  return energy / span;
}

std::vector<ComparisonRow> compare_pixels(std::span<const PixelReport> reports) {
  if (reports.size() < 2) throw Error(ErrorCode::InvalidArgument, "comparison needs at least two reports");
  const PixelReport& base = reports.back();
  auto ratio = [](double a, double b) {
    if (a == b) return 1.0;
    return b != 0.0 ? a / b : std::numeric_limits<double>::quiet_NaN();
  };
  std::vector<ComparisonRow> out;
  for (const auto& r : reports) {
    out.push_back({r.name, ratio(r.area.total_um2, base.area.total_um2), ratio(r.avg_power_w, base.avg_power_w),
                   ratio(r.swing_v, base.swing_v), r.dynamic_range_db - base.dynamic_range_db});
  }
  return out;
}

}  // namespace pixsim
