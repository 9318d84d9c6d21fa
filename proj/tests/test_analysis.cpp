#include <doctest.h>

#include <cmath>
#include <numeric>
#include <algorithm>
#include <functional>
#include <random>

#include "pixsim/analysis.hpp"
#include "pixsim/error.hpp"

using namespace pixsim;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

// Two-segment curve: linear in I below the knee, log above, continuous.
std::vector<double> lin_log(const std::vector<double>& i, double knee, double lin_drop, double log_slope) {
  std::vector<double> v;
  const double b = -lin_drop / knee;
  const double at_knee = 1.0 + b * knee;
  for (double x : i) v.push_back(x < knee ? 1.0 + b * x : at_knee + log_slope * std::log10(x / knee));
  return v;
}

AreaConfig table1_config() { return load_area_config(std::string(PIXSIM_CONFIG_DIR) + "/table1.toml"); }

}  // namespace

TEST_CASE("trace names") {
  CHECK(trace_name("out") == "v_out");
  CHECK(trace_name("v_pd") == "v_pd");
  CHECK(trace_name("x_mem") == "x_mem");
  CHECK(trace_name("i_VDD") == "i_VDD");
}

TEST_CASE("output swing") {
  std::vector<double> t, flat, sine;
  for (int k = 0; k <= 1000; ++k) {
    t.push_back(k * 1e-3);
    flat.push_back(0.7);
    sine.push_back(0.4 + 0.2 * std::sin(2 * M_PI * k / 1000.0 * 3 + 0.1));
  }
  CHECK(output_swing(t, flat, 0.0, 1.0) == 0.0);
  CHECK(output_swing(t, sine, 0.0, 1.0) == doctest::Approx(0.4).epsilon(1e-4));
  CHECK(code_of([&] { output_swing(t, sine, 2.0, 3.0); }) == ErrorCode::EmptyWindow);
}

TEST_CASE("log fit is exact on log-linear data") {
  const auto i = log_space(1e-10, 1e-5, 13);
  std::vector<double> v;
  for (double x : i) v.push_back(1.0 - 0.077 * std::log10(x / 1e-9));
  const auto f = fit_log_slope(i, v, 1e-9, 1e-6);
  CHECK(f.log_slope_mv_per_decade == doctest::Approx(-77.0).epsilon(1e-9));
  CHECK(std::abs(f.r_squared - 1.0) <= 1e-9);
  CHECK(f.points == 40);
  CHECK(f.fit_lo == doctest::Approx(1e-9));
  CHECK(f.fit_hi == doctest::Approx(1e-6));
  CHECK(f.log_intercept_v == doctest::Approx(1.0 + 0.077 * -9));
}

TEST_CASE("log fit needs four points") {
  const std::vector<double> i = {1e-9, 1e-8, 1e-7};
  const std::vector<double> v = {1.0, 0.9, 0.8};
  CHECK(code_of([&] { fit_log_slope(i, v, 1e-10, 1e-6); }) == ErrorCode::InsufficientPoints);
}

TEST_CASE("log fit skips non-converged points") {
  auto i = log_space(1e-9, 1e-6, 4);
  std::vector<double> v;
  for (double x : i) v.push_back(0.5 - 0.06 * std::log10(x));
  v[3] = std::nan("");
  const auto f = fit_log_slope(i, v, 1e-9, 1e-6);
  CHECK(f.points == i.size() - 1);
  CHECK(f.log_slope_mv_per_decade == doctest::Approx(-60.0));
}

TEST_CASE("knee planted at 1e-8 A") {
  const auto i = log_space(1e-11, 1e-5, 10);
  const auto v = lin_log(i, 1e-8, 0.2, -0.06);
  const auto k = detect_knee(i, v);
  CHECK(k.knee_current >= 0.5e-8);
  CHECK(k.knee_current <= 2e-8);
  CHECK(k.linear_r2 >= 0.98);
  CHECK(k.log_r2 >= 0.98);
  CHECK(k.linear_hi < k.log_lo);
}

TEST_CASE("pure log response has no knee") {
  const auto i = log_space(1e-10, 1e-5, 10);
  std::vector<double> v;
  for (double x : i) v.push_back(0.3 - 0.07 * std::log10(x));
  CHECK(code_of([&] { detect_knee(i, v); }) == ErrorCode::NoKnee);
}

TEST_CASE("knee detection needs enough points") {
  const std::vector<double> i = {1e-9, 1e-8, 1e-7, 1e-6, 1e-5};
  const std::vector<double> v = {1, 0.9, 0.8, 0.7, 0.6};
  CHECK(code_of([&] { detect_knee(i, v); }) == ErrorCode::InsufficientPoints);
}

TEST_CASE("50 random planted knees are recovered") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto i = log_space(1e-12, 1e-4, 13);
  const double cell = std::pow(10.0, 1.0 / 13.0);
  int recovered = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const double knee = std::pow(10.0, -10.0 + 4.0 * u(rng));
    const auto v = lin_log(i, knee, 0.05 + 0.3 * u(rng), -(0.03 + 0.09 * u(rng)));
    const auto k = detect_knee(i, v);
    const double ratio = k.knee_current / knee;
    CAPTURE(knee);
    CAPTURE(k.knee_current);
    CHECK(ratio <= cell);
    CHECK(ratio >= 1.0 / cell);
    recovered += ratio <= cell && ratio >= 1.0 / cell;
  }
  CHECK(recovered == 50);
}

TEST_CASE("dynamic range") {
  const auto i = log_space(1e-10, 1e-5, 10);
  std::vector<double> logv, flat;
  for (double x : i) {
    logv.push_back(0.2 - 0.05 * std::log10(x));
    flat.push_back(0.5);
  }
  CHECK(dynamic_range_db(i, logv) == doctest::Approx(100.0));
  CHECK(code_of([&] { dynamic_range_db(i, flat); }) == ErrorCode::NoSensitiveRegion);
}

TEST_CASE("dynamic range picks the longest sensitive run") {
  const auto i = log_space(1e-10, 1e-4, 10);
  std::vector<double> v;
  for (double x : i) {
    const double d = std::log10(x);
    v.push_back(d < -8 ? -0.05 * d : (d < -7 ? 0.4 : 0.4 - 0.05 * (d + 7)));
  }
  const double db = dynamic_range_db(i, v);
  CHECK(db >= 55.0);
  CHECK(db <= 65.0);
}

TEST_CASE("dynamic range is invariant under re-spacing") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto curve = [](double x) {
    const double d = std::log10(x);
    return d < -9 ? 0.9 : 0.9 - 0.06 * (d + 9) + (d > -6 ? 0.06 * (d + 6) : 0.0);
  };
  const auto base = log_space(1e-11, 1e-4, 12);
  std::vector<double> v;
  for (double x : base) v.push_back(curve(x));
  const double ref = dynamic_range_db(base, v);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> d = {-11.0, -4.0};
    for (int k = 0; k < 90; ++k) d.push_back(-11.0 + 7.0 * u(rng));
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    std::vector<double> i2, v2;
    double widest = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
      i2.push_back(std::pow(10.0, d[k]));
      v2.push_back(curve(i2.back()));
      if (k) widest = std::max(widest, d[k] - d[k - 1]);
    }
    const double cell_db = 20.0 * std::max(widest, 1.0 / 12.0);
    CHECK(std::abs(dynamic_range_db(i2, v2) - ref) <= 2.0 * cell_db);
  }
}

TEST_CASE("average power of a resistor") {
  const auto sys = assemble(parse("V1 a 0 DC 1.2\nR1 a 0 1.2k\n"));
  const auto tr = transient(sys, 1e-6, SimOptions{});
  CHECK(average_power(tr) == doctest::Approx(1.2e-3).epsilon(1e-9));
}

TEST_CASE("source-free RC decay draws no power") {
  const auto sys = assemble(parse("C1 a 0 1n IC=1\nR1 a 0 1k\n"));
  const auto tr = transient(sys, 5e-6, SimOptions{});
  CHECK(average_power(tr) == 0.0);
}

TEST_CASE("average power is invariant under grid refinement") {
  const auto sys = assemble(parse("V1 in 0 PULSE(0 1 1u 10n 10n 3u 8u)\nR1 in a 1k\nC1 a 0 1n\n"));
  SimOptions coarse, fine;
  coarse.dt_max = 1e-7;
  fine.dt_max = 2e-8;
  fine.lte_tol = 1e-5;
  const double pc = average_power(transient(sys, 8e-6, coarse));
  const double pf = average_power(transient(sys, 8e-6, fine));
  CHECK(pc > 0.0);
  CHECK(std::abs(pc - pf) <= 1e-2 * pf);
}

TEST_CASE("average power window") {
  const auto sys = assemble(parse("V1 a 0 PWL(0 0 1u 0 1.001u 1 2u 1)\nR1 a 0 1k\n"));
  const auto tr = transient(sys, 2e-6, SimOptions{});
  CHECK(average_power(tr, 1.5e-6, 2e-6) == doctest::Approx(1e-3).epsilon(1e-6));
  CHECK(average_power(tr, 0.0, 0.9e-6) == doctest::Approx(0.0));
  CHECK(code_of([&] { average_power(tr, 3e-6, 4e-6); }) == ErrorCode::EmptyWindow);
}

TEST_CASE("MOSFET and memristor areas") {
  Circuit m("one");
  m.add("M1", {"d", "g", "0", "0"}, MosfetCard::default_n());
  const auto r = area_report(m, AreaConfig::defaults());
  CHECK(r.total_um2 == doctest::Approx(0.81).epsilon(1e-12));
  CHECK_FALSE(r.calibrated);
  Circuit y("mem");
  y.add("Y1", {"a", "0"}, MemristorCard{});
  CHECK(area_report(y, AreaConfig::defaults()).total_um2 == doctest::Approx(3.6e-3).epsilon(1e-12));
}

TEST_CASE("shipped calibration reproduces the table areas") {
  const auto cfg = table1_config();
  CHECK(cfg.calibrated);
  const auto a = area_report(builtin(Builtin::Pixel3tm), cfg);
  const auto b = area_report(builtin(Builtin::Pixel4tLinlog), cfg);
  CHECK(a.total_um2 == doctest::Approx(26.83).epsilon(1e-12));
  CHECK(b.total_um2 == doctest::Approx(100.00).epsilon(1e-12));
  for (const auto* r : {&a, &b}) {
    double sum = 0.0;
    for (const auto& row : r->rows) sum += row.area_um2;
    CHECK(sum == r->total_um2);
  }
  PixelReport pa{"pixel_3tm", 0, 0, 0, a}, pb{"pixel_4t_linlog", 0, 0, 0, b};
  const std::vector<PixelReport> reports = {pa, pb};
  const auto rows = compare_pixels(reports);
  CHECK(rows[0].area_ratio == doctest::Approx(0.2683).epsilon(1e-9));
}

TEST_CASE("config errors") {
  CHECK(code_of([] { area_report(builtin(Builtin::Pixel3tm), parse_area_config("[mosfet]\noverhead = 25\n")); }) ==
        ErrorCode::MissingGeometry);
  try {
    area_report(builtin(Builtin::Pixel3tm), parse_area_config("mosfet.overhead = 25\ncapacitor.density_fF_per_um2=5\n"));
    FAIL("expected MissingGeometry");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("vsource") != std::string::npos);
  }
  try {
    parse_area_config("# header\nmosfet.overhead = 25\nbogus line\n");
    FAIL("expected Config");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    CHECK(e.line() == 3);
  }
  CHECK(code_of([] { parse_area_config("mosfet.overhead = -1\n"); }) == ErrorCode::Config);
  CHECK(code_of([] { parse_area_config("widget.area_um2 = 1\n"); }) == ErrorCode::Config);
  CHECK(code_of([] { load_area_config("/nonexistent/table1.toml"); }) == ErrorCode::Io);
}

TEST_CASE("comparison of identical reports") {
  PixelReport r{"p", 0.3, 80.0, 1e-6, {}};
  r.area.total_um2 = 12.0;
  const std::vector<PixelReport> reports = {r, r};
  for (const auto& row : compare_pixels(reports)) {
    CHECK(row.area_ratio == 1.0);
    CHECK(row.power_ratio == 1.0);
    CHECK(row.swing_ratio == 1.0);
    CHECK(row.dr_difference_db == 0.0);
  }
}
