// Acceptance checks: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "cli_util.hpp"
#include "pixsim/analysis.hpp"
#include "pixsim/devices.hpp"
#include "pixsim/engine.hpp"
#include "pixsim/error.hpp"
#include "pixsim/netlist.hpp"
#include "random_circuit.hpp"

using namespace pixsim;
using clitest::q;

namespace {

// Tolerances and limits.
constexpr double kFdStep = 1e-6;             // V
constexpr double kFdRel = 1e-6;
constexpr double kFdAbs = 1e-15;             // S
constexpr double kWeakTol = 0.01;
constexpr double kStrongTol = 0.05;
constexpr double kRcTol = 0.005;
constexpr double kOrderTol = 0.3;
constexpr double kPinchV = 1e-9;             // V
constexpr double kPinchI = 1e-12;            // A
constexpr double kQuadratureTol = 1e-4;
constexpr double kLogR2 = 0.99;
constexpr double kSlopeTol = 0.15;
constexpr double kKneeR2 = 0.98;
constexpr double kKneeLo = 1e-10, kKneeHi = 1e-7;  // A
constexpr double kDrGap = 6.0;               // dB
constexpr double kSwingFloor = 1.5;
constexpr double kAreaRatio = 0.2683, kAreaRatioTol = 1e-4;
constexpr double kResetBand = 0.050;         // V below the cycle maximum
constexpr double kResetLevelTol = 1e-3;      // V below the pulse top still counted as reset high
constexpr double kResetSettle = 0.1;         // leading fraction of reset high allowed for OUT to rise
constexpr double kSlopeDeadband = 1e-6;      // V per sample treated as flat
constexpr int kMaxSignChanges = 3;
constexpr int kRandomNetlists = 100;
constexpr int kMutations = 1000;

// Shared stimulus of the figure reproductions.
constexpr const char* kStaircase = "PWL(0 1n 9u 1n 9.01u 10n 12u 10n 12.01u 100n 15u 100n 15.01u 1u 21u 1u)";
constexpr double kSwingFrom = 8e-6, kCycleEnd = 21e-6;  // s

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void require(Outcome& o, bool ok, const std::string& what) {
  if (!ok) {
    o.pass = false;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("failed: ") + what;
  }
}

void note(Outcome& o, const std::string& what) { o.detail += (o.detail.empty() ? "" : "; ") + what; }

bool fd_close(double analytic, double fd) {
  return std::abs(analytic - fd) <= std::max(kFdRel * std::max(std::abs(analytic), std::abs(fd)), kFdAbs);
}

// ---------------------------------------------------------------------------

Outcome device_models() {
  Outcome o;
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  int checked = 0, bad = 0;
  for (Polarity pol : {Polarity::N, Polarity::P}) {
    const auto c = pol == Polarity::N ? MosfetCard::default_n() : MosfetCard::default_p();
    for (int k = 0; k < 500; ++k) {
      const double vg = u(rng), vd = u(rng), vs = u(rng), vb = u(rng);
      if (std::abs(vd - vs) < 10 * kFdStep) continue;
      const auto e = mosfet_conductances(vg, vd, vs, c, vb);
      const double h = kFdStep;
      auto ids = [&](double g, double d, double s, double b) { return mosfet_ids(g, d, s, c, b); };
      const double fg = (ids(vg + h, vd, vs, vb) - ids(vg - h, vd, vs, vb)) / (2 * h);
      const double fd = (ids(vg, vd + h, vs, vb) - ids(vg, vd - h, vs, vb)) / (2 * h);
      const double fs = (ids(vg, vd, vs + h, vb) - ids(vg, vd, vs - h, vb)) / (2 * h);
      const double fb = (ids(vg, vd, vs, vb + h) - ids(vg, vd, vs, vb - h)) / (2 * h);
      bad += !fd_close(e.gm, fg) + !fd_close(e.gds, fd) + !fd_close(e.gms, fs) + !fd_close(e.gmb, fb);
      checked += 4;
    }
  }
  for (double v = -1.0; v <= 0.8; v += 0.01) {
    const double h = kFdStep;
    const double fd = (diode_current(v + h, 1e-15) - diode_current(v - h, 1e-15)) / (2 * h);
    bad += !fd_close(diode_conductance(v, 1e-15), fd);
    ++checked;
  }
  require(o, bad == 0, std::to_string(bad) + " finite-difference mismatches");
  note(o, std::to_string(checked) + " Jacobian entries");

  MemristorCard m;
  require(o, memristance(1.0, m) == m.r_on && memristance(0.0, m) == m.r_off, "memristance boundaries");
  const double g = 1.0 / memristance(m.x0, m);
  const auto st = stamp_memristor(0, 1, m, m.x0);
  bool stamp_ok = !st.conductances.empty();
  for (const auto& e : st.conductances) stamp_ok &= std::abs(std::abs(e.g) - g) <= kFdRel * g;
  require(o, stamp_ok, "memristor stamp");
  for (int p = 1; p <= 4; ++p) {
    m.p = p;
    m.window = WindowKind::Joglekar;
    require(o, window_fn(0.0, m, 1.0) == 0.0 && window_fn(1.0, m, -1.0) == 0.0, "Joglekar zeros");
    m.window = WindowKind::Biolek;
    require(o, window_fn(1.0, m, 1.0) == 0.0 && window_fn(0.0, m, -1.0) == 0.0, "Biolek zeros");
  }

  const auto c = MosfetCard::default_n();
  const double vt = c.temp_vt;
  const double vp_weak = -10.0 * vt;
  const double weak = specific_current(c) * std::exp(vp_weak / vt) * (1.0 + c.lambda * 1.0);
  const double weak_err = std::abs(mosfet_ids(c.vth + c.n_slope * vp_weak, 1.0, 0.0, c) / weak - 1.0);
  const double vov = c.n_slope * 20.0 * vt;
  const double strong = c.kp * c.w / c.l / (2.0 * c.n_slope) * vov * vov * (1.0 + c.lambda * 1.2);
  const double strong_err = std::abs(mosfet_ids(c.vth + vov, 1.2, 0.0, c) / strong - 1.0);
  require(o, weak_err <= kWeakTol, "weak-inversion asymptote");
  require(o, strong_err <= kStrongTol, "strong-inversion asymptote");
  note(o, "EKV weak " + fmt("%.2f%%", 100 * weak_err) + ", strong " + fmt("%.2f%%", 100 * strong_err));
  return o;
}

// ---------------------------------------------------------------------------

const char* kRc = "V1 in 0 DC 1.2\nR1 in a 1k\nC1 a 0 1n IC=0\n";

TransientResult fixed_step_rc(Integrator method, double dt, double tstop) {
  SimOptions o;
  o.integrator = method;
  o.adaptive = false;
  o.dt_initial = dt;
  o.dt_min = dt * 1e-3;
  o.dt_max = dt;
  return transient(assemble(parse(kRc)), tstop, o);
}

double rc_error(Integrator method, double dt) {
  const auto tr = fixed_step_rc(method, dt, 3e-6);
  const auto v = tr.trace("v_a");
  double worst = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    worst = std::max(worst, std::abs(v[k] - 1.2 * (1.0 - std::exp(-tr.time[k] / 1e-6))));
  }
  return worst;
}

Outcome integrators() {
  Outcome o;
  const auto tr = fixed_step_rc(Integrator::Trapezoidal, 1e-8, 2e-6);
  const auto v = tr.trace("v_a");
  std::size_t k = 0;
  for (std::size_t j = 0; j < tr.time.size(); ++j) {
    if (std::abs(tr.time[j] - 1e-6) < std::abs(tr.time[k] - 1e-6)) k = j;
  }
  const double oracle = 1.2 * (1.0 - std::exp(-1.0));
  const double rel = std::abs(v[k] - oracle) / oracle;
  require(o, std::abs(tr.time[k] - 1e-6) <= 1e-15 && rel <= kRcTol, "RC at tau");
  const double be = std::log2(rc_error(Integrator::BackwardEuler, 2e-8) / rc_error(Integrator::BackwardEuler, 1e-8));
  const double trap = std::log2(rc_error(Integrator::Trapezoidal, 2e-8) / rc_error(Integrator::Trapezoidal, 1e-8));
  require(o, std::abs(be - 1.0) <= kOrderTol, "BE order");
  require(o, std::abs(trap - 2.0) <= kOrderTol, "trapezoidal order");
  note(o, "RC error at tau " + fmt("%.3f%%", 100 * rel) + ", orders BE " + fmt("%.3f", be) + " trap " +
              fmt("%.3f", trap));
  return o;
}

// ---------------------------------------------------------------------------

TransientResult memristor_drive(double freq) {
  const std::string net = "V1 a 0 SIN(0 0.8 " + std::to_string(freq) + ")\nYMEM m a 0\n";
  SimOptions o;
  o.dt_max = 1.0 / (freq * 400);
  return transient(assemble(parse(net)), 2.0 / freq, o);
}

// |loop integral of v di| over the last period.
double loop_area(const TransientResult& tr, double period) {
  const double t0 = tr.time.back() - period;
  double area = 0.0;
  for (std::size_t k = 1; k < tr.time.size(); ++k) {
    if (tr.time[k - 1] < t0) continue;
    const double v0 = tr.source_voltages[k - 1][0], v1 = tr.source_voltages[k][0];
    const double i0 = tr.mem_currents[k - 1][0], i1 = tr.mem_currents[k][0];
    area += 0.5 * (v0 * i1 - v1 * i0);
  }
  return std::abs(area);
}

// RK4 quadrature of dx/dt = k i f(x) over the recorded current, linear between samples.
double quadrature_deviation(const TransientResult& tr, const MemristorCard& card) {
  double x = tr.mem_states[0][0], worst = 0.0;
  for (std::size_t k = 1; k < tr.time.size(); ++k) {
    const double t0 = tr.time[k - 1], t1 = tr.time[k];
    const double i0 = tr.mem_currents[k - 1][0], i1 = tr.mem_currents[k][0];
    auto f = [&](double t, double xx) {
      return memristor_dxdt(std::clamp(xx, 0.0, 1.0), i0 + (i1 - i0) * (t - t0) / (t1 - t0), card);
    };
    const int sub = 50;
    const double h = (t1 - t0) / sub;
    for (int s = 0; s < sub; ++s) {
      const double t = t0 + s * h;
      const double k1 = f(t, x), k2 = f(t + h / 2, x + h / 2 * k1), k3 = f(t + h / 2, x + h / 2 * k2),
                   k4 = f(t + h, x + h * k3);
      x = std::clamp(x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4), 0.0, 1.0);
    }
    worst = std::max(worst, std::abs(x - tr.mem_states[k][0]));
  }
  return worst;
}

Outcome memristor_fingerprint() {
  Outcome o;
  const auto slow = memristor_drive(1.0), fast = memristor_drive(10.0);
  int pinch_samples = 0;
  bool pinched = true;
  for (const auto* tr : {&slow, &fast}) {
    for (std::size_t k = 0; k < tr->time.size(); ++k) {
      if (std::abs(tr->source_voltages[k][0]) > kPinchV) continue;
      ++pinch_samples;
      pinched &= std::abs(tr->mem_currents[k][0]) <= kPinchI;
    }
  }
  require(o, pinched && pinch_samples >= 4, "pinched at origin");
  const double a1 = loop_area(slow, 1.0), a10 = loop_area(fast, 0.1);
  require(o, a10 < a1, "loop area decreases with frequency");
  const double dev = quadrature_deviation(slow, MemristorCard{});
  require(o, dev <= kQuadratureTol, "state vs quadrature");
  note(o, std::to_string(pinch_samples) + " zero-crossing samples, loop area f " + fmt("%.3e", a1) + " 10f " +
              fmt("%.3e", a10) + ", quadrature deviation " + fmt("%.2e", dev));
  return o;
}

// ---------------------------------------------------------------------------

Outcome log_response() {
  Outcome o;
  const auto sys = assemble(builtin(Builtin::Pixel3tLog));
  const auto sw = dc_sweep(sys, "photo", log_space(1e-9, 1e-6, 13), SimOptions{});
  const auto fit = fit_log_slope(sw, "pd", 1e-9, 1e-6);
  const auto card = MosfetCard::default_n();
  const double oracle = card.n_slope * card.temp_vt * std::log(10.0) * 1e3;
  const double dev = std::abs(std::abs(fit.log_slope_mv_per_decade) / oracle - 1.0);
  require(o, fit.r_squared >= kLogR2, "r^2");
  require(o, dev <= kSlopeTol, "slope");
  note(o, "PD slope " + fmt("%.2f", fit.log_slope_mv_per_decade) + " mV/dec vs " + fmt("%.2f", oracle) + " (" +
              fmt("%.1f%%", 100 * dev) + "), r^2 " + fmt("%.4f", fit.r_squared));
  return o;
}

// ---------------------------------------------------------------------------

SweepResult integrating_sweep(Builtin b) {
  return photoresponse_sweep(assemble(builtin(b)), "photo", log_space(1e-10, 1e-5, 13), kCycleEnd, SimOptions{});
}

Outcome linlog_response() {
  Outcome o;
  std::map<std::string, double> dr;
  for (auto [b, name] : {std::pair{Builtin::Pixel4tLinlog, "4T"}, std::pair{Builtin::Pixel3tm, "3T-M"}}) {
    const auto sw = integrating_sweep(b);
    try {
      const auto k = detect_knee(sw, "out");
      require(o, k.linear_r2 >= kKneeR2 && k.log_r2 >= kKneeR2, std::string(name) + " segment r^2");
      require(o, k.knee_current >= kKneeLo && k.knee_current <= kKneeHi, std::string(name) + " knee range");
      note(o, std::string(name) + " knee " + fmt("%.3e", k.knee_current) + " A r^2 " + fmt("%.4f", k.linear_r2) +
                  "/" + fmt("%.4f", k.log_r2));
    } catch (const Error& e) {
      require(o, false, std::string(name) + " knee: " + e.what());
    }
    dr[name] = dynamic_range_db(sw, "out");
  }
  require(o, dr["3T-M"] >= dr["4T"] - kDrGap, "DR(3T-M) >= DR(4T) - 6 dB");
  note(o, "DR 4T " + fmt("%.2f", dr["4T"]) + " dB, 3T-M " + fmt("%.2f", dr["3T-M"]) + " dB");
  return o;
}

// ---------------------------------------------------------------------------

Outcome swing_comparison() {
  Outcome o;
  std::map<Builtin, double> swing;
  for (Builtin b : {Builtin::Pixel3tLog, Builtin::Pixel2tm}) {
    auto c = builtin(b);
    std::get<PhotodiodeCard>(c.find_device("photo")->card).iph = parse_waveform(kStaircase);
    const auto tr = transient(assemble(c), kCycleEnd, SimOptions{});
    swing[b] = output_swing(tr, "out", kSwingFrom, kCycleEnd);
  }
  const double ratio = swing[Builtin::Pixel2tm] / swing[Builtin::Pixel3tLog];
  require(o, ratio >= kSwingFloor, "swing ratio >= 1.5");
  note(o, "swing 3T " + fmt("%.4f", swing[Builtin::Pixel3tLog]) + " V, 2T-M " +
              fmt("%.4f", swing[Builtin::Pixel2tm]) + " V, ratio " + fmt("%.3f", ratio));
  return o;
}

// ---------------------------------------------------------------------------

Outcome table1() {
  Outcome o;
  const auto dir = clitest::scratch("acc_table1");
  const auto r = clitest::sim("report table1 --area-config " + q(std::string(PIXSIM_CONFIG_DIR) + "/table1.toml") +
                              " --out " + q(dir));
  require(o, r.code == 0, "exit status " + std::to_string(r.code));
  std::map<std::string, std::pair<std::string, double>> rows;
  const std::regex row(R"(^(pixel_\w+)\s+([0-9.]+)\*?\s+([0-9.eE+-]+)\s*$)");
  const std::regex ratio_line(R"(^area ratio \(3T-M / 4T\): ([0-9.]+))");
  double ratio = -1;
  std::istringstream in(r.output);
  std::string line;
  while (std::getline(in, line)) {
    std::smatch m;
    if (std::regex_match(line, m, row)) rows[m[1]] = {m[2], std::stod(m[3])};
    if (std::regex_search(line, m, ratio_line)) ratio = std::stod(m[1]);
  }
  require(o, rows.count("pixel_3tm") && rows["pixel_3tm"].first == "26.83", "3T-M area 26.83");
  require(o, rows.count("pixel_4t_linlog") && rows["pixel_4t_linlog"].first == "100.00", "4T area 100.00");
  require(o, std::abs(ratio - kAreaRatio) <= kAreaRatioTol, "area ratio");
  require(o, r.output.find("contradicts") != std::string::npos, "discrepancy note");
  const double p3 = rows["pixel_3tm"].second, p4 = rows["pixel_4t_linlog"].second;
  require(o, p3 > p4, "power ordering P(3T-M) > P(4T)");
  note(o, "areas " + rows["pixel_3tm"].first + " / " + rows["pixel_4t_linlog"].first + " ratio " +
              fmt("%.4f", ratio) + ", power 3T-M " + fmt("%.6f", p3) + " mW, 4T " + fmt("%.6f", p4) + " mW");
  std::filesystem::remove_all(dir);
  return o;
}

// ---------------------------------------------------------------------------

std::map<std::string, std::vector<double>> read_columns(const std::string& text) {
  std::map<std::string, std::vector<double>> cols;
  std::vector<std::string> names;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    for (std::size_t k = 0; std::getline(ls, cell, ','); ++k) {
      if (header) names.push_back(cell);
      else if (k < names.size()) cols[names[k]].push_back(std::strtod(cell.c_str(), nullptr));
    }
    header = false;
  }
  return cols;
}

Outcome operation_cycle() {
  Outcome o;
  for (const char* fig : {"fig7", "fig9"}) {
    const auto dir = clitest::scratch(std::string("acc_") + fig);
    const auto r = clitest::sim(std::string("demo ") + fig + " --out " + q(dir));
    require(o, r.code == 0, std::string(fig) + " exit status");
    auto cols = read_columns(clitest::slurp(dir / (std::string(fig) + "_tran.csv")));
    std::filesystem::remove_all(dir);
    const auto& t = cols["time_s"];
    const auto& out = cols["v_out"];
    const auto& rst = cols["v_rst"];
    if (t.empty() || out.size() != t.size() || rst.size() != t.size()) {
      require(o, false, std::string(fig) + " CSV columns");
      continue;
    }
    const double rst_hi = *std::max_element(rst.begin(), rst.end());
    const double out_max = *std::max_element(out.begin(), out.end());
    double hi_from = -1, hi_to = -1;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (rst[k] < rst_hi - kResetLevelTol) continue;
      if (hi_from < 0) hi_from = t[k];
      hi_to = t[k];
    }
    const double settled = hi_from + kResetSettle * (hi_to - hi_from);
    double low = out_max;
    int changes = 0, last = 0;
    for (std::size_t k = 1; k < t.size(); ++k) {
      if (t[k] >= settled && t[k] <= hi_to) low = std::min(low, out[k]);
      if (t[k - 1] < hi_to) continue;
      const double d = out[k] - out[k - 1];
      const int s = d > kSlopeDeadband ? 1 : (d < -kSlopeDeadband ? -1 : 0);
      if (s != 0 && last != 0 && s != last) ++changes;
      if (s != 0) last = s;
    }
    require(o, out_max - low <= kResetBand, std::string(fig) + " OUT within 50 mV of maximum during reset");
    require(o, changes <= kMaxSignChanges, std::string(fig) + " monotone settling");
    require(o, out.back() < out_max, std::string(fig) + " OUT leaves the reset level");
    note(o, std::string(fig) + " reset " + fmt("%.2f", hi_from * 1e6) + "-" + fmt("%.2f", hi_to * 1e6) +
                " us, " + fmt("%.1f", (out_max - low) * 1e3) + " mV below max, " + std::to_string(changes) +
                " slope sign changes");
  }
  return o;
}

// ---------------------------------------------------------------------------

// Deterministic corruption of one netlist line; every variant is a parse error.
std::string mutate(const std::string& line, std::mt19937& rng) {
  static const std::string kBadPrefix = "ABDEFGHJKLNOPQSTUWXZ";
  std::vector<std::string> tok;
  std::istringstream in(line);
  for (std::string s; in >> s;) tok.push_back(s);
  auto join = [](const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : " ") + s;
    return out;
  };
  switch (rng() % 4) {
    case 0: {
      std::string out = line;
      out[0] = kBadPrefix[rng() % kBadPrefix.size()];
      return out;
    }
    case 1: return tok.front();
    case 2: {
      std::string& last = tok.back();
      const auto eq = last.find('=');
      last = eq == std::string::npos ? "@@" : last.substr(0, eq + 1) + "@@";
      return join(tok);
    }
    default: return line + " ZZZ=1";
  }
}

Outcome parser_round_trip() {
  Outcome o;
  std::vector<std::string> texts;
  int mismatches = 0;
  std::mt19937 rng(2024);
  for (int k = 0; k < kRandomNetlists; ++k) {
    const auto c = testing::random_circuit(rng, k);
    const auto text = serialize(c);
    mismatches += !structurally_equal(c, parse(text));
    texts.push_back(text);
  }
  for (Builtin b : {Builtin::Pixel3tLog, Builtin::Pixel2tm, Builtin::Pixel4tLinlog, Builtin::Pixel3tm}) {
    const auto c = builtin(b);
    const auto text = serialize(c);
    mismatches += !structurally_equal(c, parse(text));
    texts.push_back(text);
  }
  require(o, mismatches == 0, std::to_string(mismatches) + " round-trip mismatches");

  const auto dir = clitest::scratch("acc_fuzz");
  int wrong = 0;
  std::string first_wrong;
  for (int k = 0; k < kMutations; ++k) {
    const auto& text = texts[static_cast<std::size_t>(k) % texts.size()];
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) lines.push_back(l);
    std::vector<std::size_t> devices;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (!lines[i].empty() && std::isalpha(static_cast<unsigned char>(lines[i][0]))) devices.push_back(i);
    }
    const std::size_t target = devices[rng() % devices.size()];
    lines[target] = mutate(lines[target], rng);
    std::string mutated;
    for (const auto& l : lines) mutated += l + "\n";
    const auto path = dir / ("m" + std::to_string(k) + ".cir");
    clitest::spit(path, mutated);
    const auto r = clitest::sim("run " + q(path) + " --op");
    const std::string where = "line " + std::to_string(target + 1) + ", column ";
    if (r.code != 1 || r.output.find(where) == std::string::npos) {
      if (wrong++ == 0) first_wrong = lines[target] + " -> exit " + std::to_string(r.code) + ": " + r.output;
    }
    std::filesystem::remove(path);
  }
  std::filesystem::remove_all(dir);
  require(o, wrong == 0, std::to_string(wrong) + " mutated inputs not rejected with line/column (first: " +
                             first_wrong + ")");
  note(o, std::to_string(texts.size()) + " netlists round trip, " + std::to_string(kMutations) +
              " mutated lines rejected");
  return o;
}

// ---------------------------------------------------------------------------

Outcome determinism() {
  Outcome o;
  std::vector<std::string> csvs;
  for (const char* extra : {"", "", " --jobs 4"}) {
    const auto dir = clitest::scratch("acc_det" + std::to_string(csvs.size()));
    const auto r = clitest::sim("demo fig6" + std::string(extra) + " --out " + q(dir));
    require(o, r.code == 0, "exit status");
    csvs.push_back(clitest::slurp(dir / "fig6_sweep.csv"));
    std::filesystem::remove_all(dir);
  }
  require(o, !csvs[0].empty(), "CSV written");
  require(o, csvs[0] == csvs[1], "repeat run identical");
  require(o, csvs[0] == csvs[2], "serial vs --jobs 4 identical");
  note(o, std::to_string(csvs[0].size()) + " bytes compared");
  return o;
}

struct Criterion {
  int id;
  const char* title;
  double budget_s;  // 0 = no limit
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "device models", 5, device_models},
      {2, "integrators", 10, integrators},
      {3, "memristor fingerprint", 10, memristor_fingerprint},
      {4, "log response", 30, log_response},
      {5, "lin-log response", 60, linlog_response},
      {6, "swing comparison", 0, swing_comparison},
      {7, "table 1", 60, table1},
      {8, "operation cycle", 0, operation_cycle},
      {9, "parser round trip and fuzzing", 10, parser_round_trip},
      {10, "determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail += std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs > c.budget_s) require(o, false, "runtime over " + fmt("%.0f s", c.budget_s));
    failed += !o.pass;
    std::printf("%s criterion %d: %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
