// sim: command-line front end over the pixsim C API.
//
// Exit codes: 0 success, 1 input error, 2 numerical failure.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "output.hpp"
#include "pixsim/pixsim.h"

namespace fs = std::filesystem;
using simtool::Column;
using simtool::Series;

namespace {

// ---------------------------------------------------------------------------
// Errors and handles

class SimError : public std::runtime_error {
public:
  SimError(int exit_code, const std::string& msg) : std::runtime_error(msg), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

private:
  int exit_code_;
};

[[noreturn]] void throw_status(pixsim_status s, const std::string& context) {
  std::string msg = context.empty() ? "" : context + ": ";
  const int line = pixsim_last_error_line();
  if (line > 0) msg += "line " + std::to_string(line) + ", column " + std::to_string(pixsim_last_error_column()) + ": ";
  msg += std::string(pixsim_status_name(s)) + ": " + pixsim_last_error();
  throw SimError(pixsim_status_is_numerical(s) ? 2 : 1, msg);
}

void check(pixsim_status s, const std::string& context = "") {
  if (s != PIXSIM_OK) throw_status(s, context);
}

struct CircuitDeleter {
  void operator()(pixsim_circuit* c) const { pixsim_circuit_free(c); }
};
struct TraceDeleter {
  void operator()(pixsim_trace* t) const { pixsim_trace_free(t); }
};
struct AreaDeleter {
  void operator()(pixsim_area* a) const { pixsim_area_free(a); }
};
using CircuitPtr = std::unique_ptr<pixsim_circuit, CircuitDeleter>;
using TracePtr = std::unique_ptr<pixsim_trace, TraceDeleter>;
using AreaPtr = std::unique_ptr<pixsim_area, AreaDeleter>;

std::string take_string(char* s) {
  std::string out = s == nullptr ? "" : s;
  pixsim_string_free(s);
  return out;
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : sep) + s;
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Number with an optional SPICE scale suffix: f p n u m k meg g t.
double parse_scaled(const std::string& text) {
  static const std::vector<std::pair<std::string, double>> kSuffix = {
      {"meg", 1e6}, {"f", 1e-15}, {"p", 1e-12}, {"n", 1e-9}, {"u", 1e-6},
      {"m", 1e-3},  {"k", 1e3},   {"g", 1e9},   {"t", 1e12}};
  size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw SimError(1, "not a number: '" + text + "'");
  }
  std::string rest = text.substr(used);
  std::transform(rest.begin(), rest.end(), rest.begin(), [](unsigned char c) { return std::tolower(c); });
  if (rest.empty()) return v;
  for (const auto& [suffix, scale] : kSuffix) {
    if (rest == suffix) return v * scale;
  }
  throw SimError(1, "not a number: '" + text + "'");
}

CircuitPtr load_builtin(const std::string& name) {
  pixsim_circuit* c = nullptr;
  check(pixsim_circuit_builtin(name.c_str(), &c));
  return CircuitPtr(c);
}

CircuitPtr load_input(const std::string& path, const std::string& builtin) {
  if (!path.empty() && !builtin.empty()) throw SimError(1, "give either a netlist file or --builtin, not both");
  if (path.empty() && builtin.empty()) throw SimError(1, "no input: give a netlist file or --builtin NAME");
  if (!builtin.empty()) return load_builtin(builtin);
  pixsim_circuit* c = nullptr;
  check(pixsim_circuit_load(path.c_str(), &c), path);
  CircuitPtr out(c);
  size_t count = 0;
  char* report = nullptr;
  check(pixsim_circuit_validate(out.get(), &count, &report), path);
  const std::string text = take_string(report);
  if (count > 0) throw SimError(1, path + ": invalid circuit:\n  " + join(split_lines(text), "\n  "));
  return out;
}

// ---------------------------------------------------------------------------
// Run context: options, output directory, manifest

struct SolverFlags {
  std::optional<double> reltol, abstol, vtol, dt_max, lte_tol, iph;
  std::string integrator;
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--reltol", f.reltol, "Relative tolerance");
  cmd->add_option("--abstol", f.abstol, "Absolute current tolerance (A)");
  cmd->add_option("--vtol", f.vtol, "Voltage update tolerance (V)");
  cmd->add_option("--dt-max", f.dt_max, "Largest transient step (s)");
  cmd->add_option("--lte-tol", f.lte_tol, "Local truncation error target (V)");
  cmd->add_option("--integrator", f.integrator, "be or trap")->check(CLI::IsMember({"be", "trap"}));
  cmd->add_option("--iph", f.iph, "DC photocurrent of device 'photo' (A)");
}

struct Run {
  std::string command;
  std::string input;
  fs::path out_dir = ".";
  nlohmann::json overrides = nlohmann::json::object();
  std::vector<std::string> files;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void emit(const std::string& name, const std::string& content) {
    fs::create_directories(out_dir);
    const fs::path p = out_dir / name;
    simtool::write_file(p.string(), content);
    files.push_back(name);
  }

  void write_manifest() {
    nlohmann::json m;
    m["command"] = command;
    m["input"] = input;
    m["overrides"] = overrides;
    m["output_dir"] = out_dir.string();
    m["files"] = files;
    m["duration_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fs::create_directories(out_dir);
    simtool::write_file((out_dir / "manifest.json").string(), m.dump(2) + "\n");
  }
};

pixsim_options make_options(const SolverFlags& f, Run& run) {
  pixsim_options o;
  pixsim_options_default(&o);
  if (f.reltol) o.reltol = *f.reltol, run.overrides["reltol"] = *f.reltol;
  if (f.abstol) o.abstol = *f.abstol, run.overrides["abstol"] = *f.abstol;
  if (f.vtol) o.vtol = *f.vtol, run.overrides["vtol"] = *f.vtol;
  if (f.dt_max) o.dt_max = *f.dt_max, run.overrides["dt_max"] = *f.dt_max;
  if (f.lte_tol) o.lte_tol = *f.lte_tol, run.overrides["lte_tol"] = *f.lte_tol;
  if (!f.integrator.empty()) {
    o.integrator = f.integrator == "be" ? PIXSIM_BACKWARD_EULER : PIXSIM_TRAPEZOIDAL;
    run.overrides["integrator"] = f.integrator;
  }
  return o;
}

void apply_iph(const SolverFlags& f, pixsim_circuit* c, Run& run) {
  if (!f.iph) return;
  check(pixsim_circuit_set_source_dc(c, "photo", *f.iph), "--iph");
  run.overrides["iph"] = *f.iph;
}

// ---------------------------------------------------------------------------
// Tables from traces

struct Table {
  Column axis;
  std::vector<Column> columns;
  std::vector<char> converged;

  const Column& column(const std::string& name) const {
    for (const auto& c : columns) {
      if (c.name == name) return c;
    }
    throw SimError(1, "no column named '" + name + "'");
  }
  bool has(const std::string& name) const {
    return std::any_of(columns.begin(), columns.end(), [&](const Column& c) { return c.name == name; });
  }
};

Table to_table(const pixsim_trace* t) {
  Table tab;
  const size_t rows = pixsim_trace_rows(t);
  tab.axis.name = pixsim_trace_axis_name(t);
  const double* ax = pixsim_trace_axis(t);
  tab.axis.values.assign(ax, ax + rows);
  for (size_t j = 0; j < pixsim_trace_columns(t); ++j) {
    const double* d = pixsim_trace_column_data(t, j);
    tab.columns.push_back({pixsim_trace_column_name(t, j), std::vector<double>(d, d + rows)});
  }
  for (size_t r = 0; r < rows; ++r) tab.converged.push_back(static_cast<char>(pixsim_trace_converged(t, r)));
  return tab;
}

// Appends sweep chunk b to a.
void append(Table& a, const Table& b) {
  if (a.columns.empty()) {
    a = b;
    return;
  }
  a.axis.values.insert(a.axis.values.end(), b.axis.values.begin(), b.axis.values.end());
  for (size_t j = 0; j < a.columns.size(); ++j) {
    a.columns[j].values.insert(a.columns[j].values.end(), b.columns[j].values.begin(), b.columns[j].values.end());
  }
  a.converged.insert(a.converged.end(), b.converged.begin(), b.converged.end());
}

std::vector<Series> voltage_series(const Table& t, const std::string& prefix = "") {
  std::vector<Series> out;
  for (const auto& c : t.columns) {
    if (c.name.rfind("v_", 0) == 0) out.push_back({prefix + c.name, t.axis.values, c.values});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps, optionally spread over worker threads in fixed chunks

constexpr size_t kChunk = 8;

struct SweepRequest {
  const pixsim_circuit* circuit;
  std::string source;
  std::vector<double> values;
  bool integrate = false;
  double t_sample = 21e-6;
  pixsim_options opts;
  int jobs = 1;
};

Table run_sweep(const SweepRequest& req) {
  const size_t n = req.values.size();
  const size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<TracePtr> results(chunks);
  std::vector<pixsim_status> status(chunks, PIXSIM_OK);
  std::vector<std::string> errors(chunks);
  std::atomic<size_t> next{0};

  auto worker = [&] {
    for (size_t k; (k = next.fetch_add(1)) < chunks;) {
      const size_t lo = k * kChunk;
      const size_t len = std::min(kChunk, n - lo);
      pixsim_trace* t = nullptr;
      status[k] = req.integrate ? pixsim_photo_sweep(req.circuit, req.source.c_str(), req.values.data() + lo, len,
                                                     req.t_sample, &req.opts, &t)
                                : pixsim_dc_sweep(req.circuit, req.source.c_str(), req.values.data() + lo, len,
                                                  &req.opts, &t);
      results[k].reset(t);
      if (status[k] != PIXSIM_OK) errors[k] = pixsim_last_error();
    }
  };

  const int jobs = std::max(1, std::min<int>(req.jobs, static_cast<int>(chunks)));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  Table merged;
  for (size_t k = 0; k < chunks; ++k) {
    if (status[k] != PIXSIM_OK) {
      throw SimError(pixsim_status_is_numerical(status[k]) ? 2 : 1,
                     std::string("sweep: ") + pixsim_status_name(status[k]) + ": " + errors[k]);
    }
    append(merged, to_table(results[k].get()));
  }
  return merged;
}

std::vector<double> log_values(double from, double to, int ppd) {
  double* v = nullptr;
  size_t n = 0;
  check(pixsim_log_space(from, to, ppd, &v, &n), "sweep range");
  std::vector<double> out(v, v + n);
  pixsim_values_free(v);
  return out;
}

// Fit, knee and dynamic range of one sweep column as a text block.
std::string sweep_report(const Table& t, const std::string& node, double fit_lo, double fit_hi) {
  const std::string col = node.rfind("v_", 0) == 0 ? node : "v_" + node;
  const auto& v = t.column(col).values;
  const auto& i = t.axis.values;
  std::vector<double> vi;
  for (size_t k = 0; k < v.size(); ++k) vi.push_back(t.converged[k] ? v[k] : std::nan(""));

  std::string out = "node: " + col + "\n";
  size_t failed = std::count(t.converged.begin(), t.converged.end(), 0);
  out += "points: " + std::to_string(i.size()) + " (" + std::to_string(failed) + " not converged)\n";

  pixsim_fit fit{};
  if (pixsim_fit_log_slope(i.data(), vi.data(), i.size(), fit_lo, fit_hi, &fit) == PIXSIM_OK) {
    out += "log fit: slope " + fmt("%.2f", fit.slope_mv_per_decade) + " mV/decade, intercept " +
           fmt("%.4f", fit.intercept_v) + " V, r2 " + fmt("%.5f", fit.r_squared) + ", range " +
           fmt("%.3e", fit.fit_lo) + ".." + fmt("%.3e", fit.fit_hi) + " A\n";
  } else {
    out += std::string("log fit: none (") + pixsim_last_error() + ")\n";
  }
  pixsim_knee knee{};
  if (pixsim_detect_knee(i.data(), vi.data(), i.size(), &knee) == PIXSIM_OK) {
    out += "knee: " + fmt("%.3e", knee.knee_current) + " A, linear r2 " + fmt("%.5f", knee.linear_r2) +
           ", log r2 " + fmt("%.5f", knee.log_r2) + ", improvement " + fmt("%.1f", knee.improvement * 100) + "%\n";
  } else {
    out += std::string("knee: none (") + pixsim_last_error() + ")\n";
  }
  double db = 0;
  if (pixsim_dynamic_range_db(i.data(), vi.data(), i.size(), 0.010, &db) == PIXSIM_OK) {
    out += "dynamic range: " + fmt("%.2f", db) + " dB (floor 10 mV/decade)\n";
  } else {
    out += std::string("dynamic range: none (") + pixsim_last_error() + ")\n";
  }
  return out;
}

std::string sweep_csv(const Table& t) { return simtool::format_csv(t.axis, t.columns, &t.converged); }

std::string tran_csv(const Table& t) { return simtool::format_csv(t.axis, t.columns); }

// ---------------------------------------------------------------------------
// Commands

struct RunArgs {
  std::string netlist, builtin, out_dir = ".";
  std::vector<std::string> tran;
  bool op = false;
  SolverFlags solver;
};

int cmd_run(const RunArgs& a, Run& run) {
  run.command = "run";
  run.out_dir = a.out_dir;
  CircuitPtr c = load_input(a.netlist, a.builtin);
  run.input = a.builtin.empty() ? a.netlist : "builtin:" + a.builtin;
  apply_iph(a.solver, c.get(), run);
  pixsim_options o = make_options(a.solver, run);
  const std::string name = pixsim_circuit_name(c.get())[0] ? pixsim_circuit_name(c.get()) : "circuit";

  if (a.op) {
    pixsim_trace* t = nullptr;
    check(pixsim_op(c.get(), &o, &t), "operating point");
    TracePtr tp(t);
    std::printf("operating point of %s (%d Newton iterations)\n", name.c_str(), pixsim_trace_iterations(t));
    for (size_t j = 0; j < pixsim_trace_columns(t); ++j) {
      std::printf("  %-16s %s\n", pixsim_trace_column_name(t, j),
                  simtool::format_number(pixsim_trace_column_data(t, j)[0]).c_str());
    }
    run.write_manifest();
    return 0;
  }

  double dt = 0, tstop = 0;
  if (a.tran.size() == 2) {
    dt = parse_scaled(a.tran[0]);
    tstop = parse_scaled(a.tran[1]);
    run.overrides["tran"] = {dt, tstop};
  } else {
    int present = 0;
    check(pixsim_circuit_tran_directive(c.get(), &present, &dt, &tstop));
    if (!present) throw SimError(1, "no analysis: give --tran DT TSTOP, --op, or a .tran directive");
  }
  if (!(dt > 0) || !(tstop > 0)) throw SimError(1, "--tran needs positive DT and TSTOP");
  o.dt_initial = std::min(dt, tstop);
  if (o.dt_min > o.dt_initial) o.dt_min = o.dt_initial * 1e-6;

  pixsim_trace* t = nullptr;
  check(pixsim_transient(c.get(), tstop, &o, &t), "transient");
  TracePtr tp(t);
  const Table tab = to_table(t);
  run.emit(name + "_tran.csv", tran_csv(tab));
  simtool::PlotSpec spec{name + " transient", "time (s)", "voltage (V)"};
  run.emit(name + "_tran.svg", simtool::format_svg(spec, voltage_series(tab)));
  std::printf("%s: %zu time points to %s s\n", name.c_str(), tab.axis.values.size(),
              simtool::format_number(tstop).c_str());
  run.write_manifest();
  return 0;
}

struct SweepArgs {
  std::string netlist, builtin, out_dir = ".", source, node = "out", mode = "dc";
  std::optional<double> from, to, fit_from, fit_to, t_sample;
  std::optional<int> ppd;
  int jobs = 1;
  SolverFlags solver;
};

int cmd_sweep(const SweepArgs& a, Run& run) {
  run.command = "sweep";
  run.out_dir = a.out_dir;
  CircuitPtr c = load_input(a.netlist, a.builtin);
  run.input = a.builtin.empty() ? a.netlist : "builtin:" + a.builtin;
  pixsim_options o = make_options(a.solver, run);
  const std::string name = pixsim_circuit_name(c.get())[0] ? pixsim_circuit_name(c.get()) : "circuit";

  std::string source = a.source;
  double from = a.from.value_or(0), to = a.to.value_or(0);
  int ppd = a.ppd.value_or(10);
  int present = 0;
  char* dsrc = nullptr;
  double dstart = 0, dstop = 0;
  int dpoints = 0, ddec = 0;
  check(pixsim_circuit_dc_directive(c.get(), &present, &dsrc, &dstart, &dstop, &dpoints, &ddec));
  const std::string directive_source = take_string(dsrc);
  if (present) {
    if (source.empty()) source = directive_source;
    if (!a.from) from = dstart;
    if (!a.to) to = dstop;
    if (!a.ppd && ddec) ppd = dpoints;
  }
  if (source.empty()) source = "photo";

  char* names = nullptr;
  check(pixsim_circuit_sweep_sources(c.get(), &names));
  const auto valid = split_lines(take_string(names));
  const bool known = std::any_of(valid.begin(), valid.end(), [&](const std::string& s) {
    return s.size() == source.size() &&
           std::equal(s.begin(), s.end(), source.begin(), [](char x, char y) { return std::tolower(x) == std::tolower(y); });
  });
  if (!known) {
    throw SimError(1, "unknown sweep source '" + source + "'; valid sources: " + (valid.empty() ? "none" : join(valid, ", ")));
  }
  if (!a.from && !present) from = 1e-10;
  if (!a.to && !present) to = 1e-5;
  run.overrides["source"] = source;
  run.overrides["from"] = from;
  run.overrides["to"] = to;
  run.overrides["ppd"] = ppd;
  run.overrides["mode"] = a.mode;

  SweepRequest req{c.get(), source, log_values(from, to, ppd), a.mode == "integrate", a.t_sample.value_or(21e-6), o,
                   a.jobs};
  const Table tab = run_sweep(req);
  run.emit(name + "_sweep.csv", sweep_csv(tab));
  simtool::PlotSpec spec{name + " response", "photocurrent (A)", "voltage (V)", true};
  run.emit(name + "_sweep.svg", simtool::format_svg(spec, voltage_series(tab)));
  const std::string report = sweep_report(tab, a.node, a.fit_from.value_or(from), a.fit_to.value_or(to));
  std::printf("%s sweep of %s: %zu points\n%s", name.c_str(), source.c_str(), tab.axis.values.size(), report.c_str());
  run.emit(name + "_sweep_report.txt", report);
  run.write_manifest();
  return 0;
}

// --- demos ---------------------------------------------------------------

// Illumination staircase shared by the paired log-pixel transient.
constexpr const char* kStaircase =
    "PWL(0 1n 9u 1n 9.01u 10n 12u 10n 12.01u 100n 15u 100n 15.01u 1u 21u 1u)";
constexpr double kCycleEnd = 21e-6;       // start of the second reset
constexpr double kSwingFrom = 8e-6;       // after reset recovery, before the first step
constexpr double kSampleTime = 21e-6;     // end of the first integration period
constexpr double kResetLevelTol = 1e-3;   // V below the pulse top still counted as reset high
constexpr double kResetSettle = 0.1;      // leading fraction of reset high allowed for OUT to rise
constexpr double kSlopeDeadband = 1e-6;   // V per sample treated as flat

Table transient_table(pixsim_circuit* c, double tstop, const pixsim_options& o, TracePtr* keep = nullptr) {
  pixsim_trace* t = nullptr;
  check(pixsim_transient(c, tstop, &o, &t), std::string("transient of ") + pixsim_circuit_name(c));
  TracePtr tp(t);
  Table tab = to_table(t);
  if (keep != nullptr) *keep = std::move(tp);
  return tab;
}

double swing_of(const pixsim_trace* t, double from, double to) {
  double s = 0;
  check(pixsim_output_swing(t, "out", from, to, &s), "swing");
  return s;
}

int demo_fig3(Run& run, const pixsim_options& o) {
  std::vector<Series> series;
  std::map<std::string, double> swings;
  for (const char* b : {"pixel_3t_log", "pixel_2tm"}) {
    CircuitPtr c = load_builtin(b);
    check(pixsim_circuit_set_source_waveform(c.get(), "photo", kStaircase));
    TracePtr keep;
    const Table tab = transient_table(c.get(), kCycleEnd, o, &keep);
    run.emit(std::string("fig3_") + b + "_tran.csv", tran_csv(tab));
    series.push_back({std::string(b) + " v_out", tab.axis.values, tab.column("v_out").values});
    swings[b] = swing_of(keep.get(), kSwingFrom, kCycleEnd);
  }
  simtool::PlotSpec spec{"Log pixel vs memristor pixel, photocurrent 1n to 1u A", "time (s)", "OUT (V)"};
  run.emit("fig3.svg", simtool::format_svg(spec, series));
  const double ratio = swings["pixel_2tm"] / swings["pixel_3t_log"];
  std::string text = "swing window: " + fmt("%.1f", kSwingFrom * 1e6) + " us to " + fmt("%.1f", kCycleEnd * 1e6) +
                     " us\n";
  text += "swing pixel_3t_log: " + fmt("%.4f", swings["pixel_3t_log"]) + " V\n";
  text += "swing pixel_2tm:    " + fmt("%.4f", swings["pixel_2tm"]) + " V\n";
  text += "swing ratio (2T-M / 3T): " + fmt("%.3f", ratio) + " (target 2.0, floor 1.5)\n";
  std::fputs(text.c_str(), stdout);
  run.emit("fig3_report.txt", text);
  return 0;
}

int demo_sweep(Run& run, const pixsim_options& o, const char* fig, const char* builtin, int jobs) {
  CircuitPtr c = load_builtin(builtin);
  SweepRequest req{c.get(), "photo", log_values(1e-10, 1e-5, 13), true, kSampleTime, o, jobs};
  const Table tab = run_sweep(req);
  run.emit(std::string(fig) + "_sweep.csv", sweep_csv(tab));
  simtool::PlotSpec spec{std::string(builtin) + " output vs photocurrent", "photocurrent (A)", "OUT (V)", true};
  run.emit(std::string(fig) + ".svg", simtool::format_svg(spec, {{"v_out", tab.axis.values, tab.column("v_out").values}}));
  const std::string text = std::string("circuit: ") + builtin + ", integrating sweep sampled at " +
                           fmt("%.1f", kSampleTime * 1e6) + " us\n" + sweep_report(tab, "out", 1e-9, 1e-6);
  std::fputs(text.c_str(), stdout);
  run.emit(std::string(fig) + "_report.txt", text);
  return 0;
}

int demo_cycle(Run& run, const pixsim_options& o, const char* fig, const char* builtin) {
  CircuitPtr c = load_builtin(builtin);
  const Table tab = transient_table(c.get(), kCycleEnd, o);
  run.emit(std::string(fig) + "_tran.csv", tran_csv(tab));
  std::vector<Series> series = {{"v_out", tab.axis.values, tab.column("v_out").values},
                                {"v_pd", tab.axis.values, tab.column("v_pd").values},
                                {"v_rst", tab.axis.values, tab.column("v_rst").values}};
  simtool::PlotSpec spec{std::string(builtin) + " operation cycle", "time (s)", "voltage (V)"};
  run.emit(std::string(fig) + ".svg", simtool::format_svg(spec, series));

  const auto& t = tab.axis.values;
  const auto& out = tab.column("v_out").values;
  const auto& rst = tab.column("v_rst").values;
  const double rst_hi = *std::max_element(rst.begin(), rst.end());
  const double out_max = *std::max_element(out.begin(), out.end());
  double hi_from = -1, hi_to = -1;
  for (size_t k = 0; k < t.size(); ++k) {
    if (rst[k] < rst_hi - kResetLevelTol) continue;
    if (hi_from < 0) hi_from = t[k];
    hi_to = t[k];
  }
  const double settled_from = hi_from + kResetSettle * (hi_to - hi_from);
  double reset_min = out_max;
  int sign_changes = 0, last_sign = 0;
  for (size_t k = 0; k < t.size(); ++k) {
    if (t[k] >= settled_from && t[k] <= hi_to) reset_min = std::min(reset_min, out[k]);
    if (t[k] > hi_to && k > 0 && t[k - 1] >= hi_to) {
      const double d = out[k] - out[k - 1];
      const int sign = d > kSlopeDeadband ? 1 : (d < -kSlopeDeadband ? -1 : 0);
      if (sign != 0 && last_sign != 0 && sign != last_sign) ++sign_changes;
      if (sign != 0) last_sign = sign;
    }
  }
  std::string text = std::string("circuit: ") + builtin + "\n";
  text += "reset high: " + fmt("%.3f", hi_from * 1e6) + " us to " + fmt("%.3f", hi_to * 1e6) + " us\n";
  text += "OUT maximum over cycle: " + fmt("%.4f", out_max) + " V\n";
  text += "OUT lowest while reset is high (from " + fmt("%.3f", settled_from * 1e6) + " us): " +
          fmt("%.4f", reset_min) + " V (" + fmt("%.1f", (out_max - reset_min) * 1e3) + " mV below maximum)\n";
  text += "OUT slope sign changes after release: " + std::to_string(sign_changes) + "\n";
  text += "OUT at end of integration: " + fmt("%.4f", out.back()) + " V\n";
  std::fputs(text.c_str(), stdout);
  run.emit(std::string(fig) + "_report.txt", text);
  return 0;
}

int cmd_demo(const std::string& fig, const std::string& out_dir, int jobs, const SolverFlags& flags, Run& run) {
  run.command = "demo " + fig;
  run.input = fig;
  run.out_dir = out_dir;
  const pixsim_options o = make_options(flags, run);
  int rc = 0;
  if (fig == "fig3") rc = demo_fig3(run, o);
  else if (fig == "fig6") rc = demo_sweep(run, o, "fig6", "pixel_3tm", jobs);
  else if (fig == "fig7") rc = demo_cycle(run, o, "fig7", "pixel_3tm");
  else if (fig == "fig8") rc = demo_sweep(run, o, "fig8", "pixel_4t_linlog", jobs);
  else if (fig == "fig9") rc = demo_cycle(run, o, "fig9", "pixel_4t_linlog");
  else throw SimError(1, "unknown demo '" + fig + "' (valid: fig3, fig6, fig7, fig8, fig9)");
  run.write_manifest();
  return rc;
}

// --- report table1 ---------------------------------------------------------

int cmd_report(const std::string& which, const std::string& area_config, const std::string& out_dir,
               const SolverFlags& flags, Run& run) {
  run.command = "report " + which;
  run.input = area_config.empty() ? "defaults" : area_config;
  run.out_dir = out_dir;
  if (which != "table1") throw SimError(1, "unknown report '" + which + "' (valid: table1)");
  const pixsim_options o = make_options(flags, run);

  struct Row {
    std::string name;
    double area, power;
  };
  std::vector<Row> rows;
  std::string detail;
  bool calibrated = false;
  for (const char* b : {"pixel_3tm", "pixel_4t_linlog"}) {
    CircuitPtr c = load_builtin(b);
    pixsim_area* a = nullptr;
    check(pixsim_area_report(c.get(), area_config.empty() ? nullptr : area_config.c_str(), &a),
          area_config.empty() ? "area defaults" : area_config);
    AreaPtr ap(a);
    calibrated = pixsim_area_calibrated(a) != 0;
    detail += std::string(b) + ":\n";
    for (size_t k = 0; k < pixsim_area_rows(a); ++k) {
      detail += "  " + std::string(pixsim_area_device(a, k)) + " (" + pixsim_area_kind(a, k) +
                "): " + fmt("%.4f", pixsim_area_um2(a, k)) + " um2\n";
    }
    TracePtr keep;
    transient_table(c.get(), kCycleEnd, o, &keep);
    double watts = 0;
    check(pixsim_average_power(keep.get(), 1e-6, kCycleEnd, &watts), "power");
    rows.push_back({b, pixsim_area_total_um2(a), watts});
  }

  const double area_ratio = rows[0].area / rows[1].area;
  const double power_ratio = rows[0].power / rows[1].power;
  std::string text = "pixel             area_um2    power_mW\n";
  for (const auto& r : rows) {
    char line[128];
    std::snprintf(line, sizeof line, "%-16s %9.2f%s  %10.6f\n", r.name.c_str(), r.area, calibrated ? " " : "*",
                  r.power * 1e3);
    text += line;
  }
  text += "area ratio (3T-M / 4T): " + fmt("%.4f", area_ratio) + "\n";
  text += "power ratio (3T-M / 4T): " + fmt("%.4f", power_ratio) + "\n";
  text += std::string("power ordering: P(3T-M) ") + (rows[0].power > rows[1].power ? ">" : "<=") +
          " P(4T); expected P(3T-M) > P(4T) (0.00376 vs 0.000605 mW)\n";
  text += "notes:\n";
  text += "  area unit is um^2; a pm^2 unit would be physically implausible for a pixel\n";
  text += "  power is the mean power delivered by all sources over one reset cycle (1 us to 21 us)\n";
  text += "  the expected ordering contradicts the lower-power claim usually made for memristive pixels\n";
  text += "  only the ordering is compared; absolute powers depend on unpublished device cards\n";
  if (!calibrated) text += "  * areas use built-in defaults and are not calibrated (pass --area-config)\n";
  std::fputs(text.c_str(), stdout);

  std::string csv = "pixel,area_um2,power_W\r\n";
  for (const auto& r : rows) {
    csv += r.name + "," + simtool::format_number(r.area) + "," + simtool::format_number(r.power) + "\r\n";
  }
  run.emit("table1.csv", csv);
  run.emit("table1.txt", text + "\nper-device areas:\n" + detail);
  run.write_manifest();
  return 0;
}

int cmd_export(const std::string& builtin, const std::string& path, Run& run) {
  run.command = "export";
  run.input = "builtin:" + builtin;
  CircuitPtr c = load_builtin(builtin);
  char* text = nullptr;
  check(pixsim_circuit_serialize(c.get(), &text));
  const std::string body = take_string(text);
  try {
    simtool::write_file(path, body);
  } catch (const std::runtime_error& e) {
    throw SimError(1, e.what());
  }
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sim: pixel circuit simulator"};
  app.require_subcommand(1);
  Run run;

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Transient or operating point of a netlist or builtin");
  run_cmd->add_option("netlist", ra.netlist, "Netlist file");
  run_cmd->add_option("--builtin", ra.builtin, "Builtin circuit name");
  auto* tran_opt = run_cmd->add_option("--tran", ra.tran, "Transient: DT TSTOP (s)")->expected(2);
  run_cmd->add_flag("--op", ra.op, "DC operating point")->excludes(tran_opt);
  run_cmd->add_option("--out", ra.out_dir, "Output directory");
  add_solver_flags(run_cmd, ra.solver);

  SweepArgs sa;
  auto* sweep_cmd = app.add_subcommand("sweep", "Photocurrent sweep with fit, knee and dynamic range");
  sweep_cmd->add_option("netlist", sa.netlist, "Netlist file");
  sweep_cmd->add_option("--builtin", sa.builtin, "Builtin circuit name");
  sweep_cmd->add_option("--source", sa.source, "Swept current source (default photo)");
  sweep_cmd->add_option("--from", sa.from, "First value (A)");
  sweep_cmd->add_option("--to", sa.to, "Last value (A)");
  sweep_cmd->add_option("--ppd", sa.ppd, "Points per decade");
  sweep_cmd->add_option("--mode", sa.mode, "dc (steady state) or integrate (sampled reset cycle)")
      ->check(CLI::IsMember({"dc", "integrate"}));
  sweep_cmd->add_option("--t-sample", sa.t_sample, "Sample time for --mode integrate (s)");
  sweep_cmd->add_option("--node", sa.node, "Node for the fit report (default out)");
  sweep_cmd->add_option("--fit-from", sa.fit_from, "Log fit lower bound (A)");
  sweep_cmd->add_option("--fit-to", sa.fit_to, "Log fit upper bound (A)");
  sweep_cmd->add_option("--jobs", sa.jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", sa.out_dir, "Output directory");
  add_solver_flags(sweep_cmd, sa.solver);

  std::string fig, demo_out = ".";
  int demo_jobs = 1;
  SolverFlags demo_flags;
  auto* demo_cmd = app.add_subcommand("demo", "Reproduce a figure: fig3, fig6, fig7, fig8, fig9");
  demo_cmd->add_option("figure", fig, "Figure name")->required();
  demo_cmd->add_option("--out", demo_out, "Output directory");
  demo_cmd->add_option("--jobs", demo_jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  add_solver_flags(demo_cmd, demo_flags);

  std::string report_name, area_config, report_out = ".";
  SolverFlags report_flags;
  auto* report_cmd = app.add_subcommand("report", "Area and power comparison table");
  report_cmd->add_option("name", report_name, "Report name (table1)")->required();
  report_cmd->add_option("--area-config", area_config, "Area calibration file");
  report_cmd->add_option("--out", report_out, "Output directory");
  add_solver_flags(report_cmd, report_flags);

  std::string export_builtin, export_path;
  auto* export_cmd = app.add_subcommand("export", "Write a builtin circuit as a netlist");
  export_cmd->add_option("--builtin", export_builtin, "Builtin circuit name")->required();
  export_cmd->add_option("path", export_path, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return cmd_run(ra, run);
    if (*sweep_cmd) return cmd_sweep(sa, run);
    if (*demo_cmd) return cmd_demo(fig, demo_out, demo_jobs, demo_flags, run);
    if (*report_cmd) return cmd_report(report_name, area_config, report_out, report_flags, run);
    if (*export_cmd) return cmd_export(export_builtin, export_path, run);
  } catch (const SimError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
