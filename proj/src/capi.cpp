#include "pixsim/pixsim.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "pixsim/analysis.hpp"
#include "pixsim/engine.hpp"
#include "pixsim/error.hpp"
#include "pixsim/netlist.hpp"

struct pixsim_circuit {
  pixsim::Circuit circuit;
};

struct pixsim_trace {
  std::string axis_name;
  std::vector<double> axis;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::vector<char> converged;
  int iterations = 0;
  std::optional<pixsim::TransientResult> tran;
};

struct pixsim_area {
  pixsim::AreaReport report;
  std::vector<std::string> kinds;
};

namespace {

thread_local std::string t_error;
thread_local int t_line = 0;
thread_local int t_column = 0;

pixsim_status status_of(pixsim::ErrorCode code) {
  using pixsim::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return PIXSIM_ERR_INVALID_ARGUMENT;
    case ErrorCode::DimensionMismatch: return PIXSIM_ERR_DIMENSION_MISMATCH;
    case ErrorCode::Singular: return PIXSIM_ERR_SINGULAR;
    case ErrorCode::StateOutOfRange: return PIXSIM_ERR_STATE_OUT_OF_RANGE;
    case ErrorCode::Io: return PIXSIM_ERR_IO;
    case ErrorCode::Syntax: return PIXSIM_ERR_SYNTAX;
    case ErrorCode::UnknownDevicePrefix: return PIXSIM_ERR_UNKNOWN_DEVICE_PREFIX;
    case ErrorCode::DuplicateName: return PIXSIM_ERR_DUPLICATE_NAME;
    case ErrorCode::Validation: return PIXSIM_ERR_VALIDATION;
    case ErrorCode::NonConvergence: return PIXSIM_ERR_NONCONVERGENCE;
    case ErrorCode::StepUnderflow: return PIXSIM_ERR_STEP_UNDERFLOW;
    case ErrorCode::EmptyWindow: return PIXSIM_ERR_EMPTY_WINDOW;
    case ErrorCode::InsufficientPoints: return PIXSIM_ERR_INSUFFICIENT_POINTS;
    case ErrorCode::NoKnee: return PIXSIM_ERR_NO_KNEE;
    case ErrorCode::NoSensitiveRegion: return PIXSIM_ERR_NO_SENSITIVE_REGION;
    case ErrorCode::MissingGeometry: return PIXSIM_ERR_MISSING_GEOMETRY;
    case ErrorCode::Config: return PIXSIM_ERR_CONFIG;
  }
  return PIXSIM_ERR_INTERNAL;
}

pixsim_status fail(pixsim_status s, std::string msg, int line = 0, int column = 0) {
  t_error = std::move(msg);
  t_line = line;
  t_column = column;
  return s;
}

// Runs f, translating exceptions into status codes and the thread-local error.
template <class F>
pixsim_status guarded(F&& f) {
  try {
    f();
    t_error.clear();
    t_line = t_column = 0;
    return PIXSIM_OK;
  } catch (const pixsim::Error& e) {
    return fail(status_of(e.code()), e.what(), e.line(), e.column());
  } catch (const std::bad_alloc&) {
    return fail(PIXSIM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PIXSIM_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void require(bool ok, const char* what) {
  if (!ok) throw pixsim::Error(pixsim::ErrorCode::InvalidArgument, what);
}

pixsim::SimOptions to_options(const pixsim_options* o) {
  pixsim::SimOptions s;
  if (o == nullptr) return s;
  s.abstol = o->abstol;
  s.vtol = o->vtol;
  s.reltol = o->reltol;
  s.max_newton_iters = o->max_newton_iters;
  s.gmin = o->gmin;
  s.gmin_start = o->gmin_start;
  s.dt_initial = o->dt_initial;
  s.dt_min = o->dt_min;
  s.dt_max = o->dt_max;
  s.integrator = o->integrator == PIXSIM_BACKWARD_EULER ? pixsim::Integrator::BackwardEuler
                                                        : pixsim::Integrator::Trapezoidal;
  s.lte_tol = o->lte_tol;
  s.adaptive = o->adaptive != 0;
  s.max_step_voltage = o->max_step_voltage;
  s.carry_state = o->carry_state != 0;
  return s;
}

std::string joined(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : "\n") + s;
  return out;
}

// Column-major table from row-major unknowns and memristor states.
void fill_columns(pixsim_trace& t, const std::vector<std::string>& unknown_names,
                  const std::vector<std::string>& mem_names, const std::vector<std::vector<double>>& unknowns,
                  const std::vector<std::vector<double>>& mem) {
  t.names = unknown_names;
  t.names.insert(t.names.end(), mem_names.begin(), mem_names.end());
  t.columns.assign(t.names.size(), {});
  for (std::size_t r = 0; r < unknowns.size(); ++r) {
    for (std::size_t j = 0; j < unknown_names.size(); ++j) t.columns[j].push_back(unknowns[r][j]);
    for (std::size_t k = 0; k < mem_names.size(); ++k) t.columns[unknown_names.size() + k].push_back(mem[r][k]);
  }
}

pixsim_trace* from_sweep(const pixsim::SweepResult& sw) {
  auto* t = new pixsim_trace;
  t->axis_name = "iph_A";
  t->axis = sw.values;
  t->converged = sw.converged;
  fill_columns(*t, sw.unknown_names, sw.memristor_names, sw.unknowns, sw.mem_states);
  return t;
}

}  // namespace

extern "C" {

const char* pixsim_version(void) { return "0.1.0"; }

const char* pixsim_status_name(pixsim_status s) {
  switch (s) {
    case PIXSIM_OK: return "Ok";
    case PIXSIM_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case PIXSIM_ERR_DIMENSION_MISMATCH: return "DimensionMismatch";
    case PIXSIM_ERR_SINGULAR: return "SingularMatrix";
    case PIXSIM_ERR_STATE_OUT_OF_RANGE: return "StateOutOfRange";
    case PIXSIM_ERR_IO: return "Io";
    case PIXSIM_ERR_SYNTAX: return "SyntaxError";
    case PIXSIM_ERR_UNKNOWN_DEVICE_PREFIX: return "UnknownDevicePrefix";
    case PIXSIM_ERR_DUPLICATE_NAME: return "DuplicateName";
    case PIXSIM_ERR_VALIDATION: return "Validation";
    case PIXSIM_ERR_NONCONVERGENCE: return "NonConvergence";
    case PIXSIM_ERR_STEP_UNDERFLOW: return "StepUnderflow";
    case PIXSIM_ERR_EMPTY_WINDOW: return "EmptyWindow";
    case PIXSIM_ERR_INSUFFICIENT_POINTS: return "InsufficientPoints";
    case PIXSIM_ERR_NO_KNEE: return "NoKnee";
    case PIXSIM_ERR_NO_SENSITIVE_REGION: return "NoSensitiveRegion";
    case PIXSIM_ERR_MISSING_GEOMETRY: return "MissingGeometry";
    case PIXSIM_ERR_CONFIG: return "Config";
    case PIXSIM_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* pixsim_last_error(void) { return t_error.c_str(); }
int pixsim_last_error_line(void) { return t_line; }
int pixsim_last_error_column(void) { return t_column; }

int pixsim_status_is_numerical(pixsim_status s) {
  return s == PIXSIM_ERR_NONCONVERGENCE || s == PIXSIM_ERR_STEP_UNDERFLOW || s == PIXSIM_ERR_SINGULAR;
}

void pixsim_string_free(char* s) { std::free(s); }

// ---------------------------------------------------------------------------

pixsim_status pixsim_circuit_parse(const char* text, pixsim_circuit** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "null argument");
    *out = new pixsim_circuit{pixsim::parse(text)};
  });
}

pixsim_status pixsim_circuit_load(const char* path, pixsim_circuit** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new pixsim_circuit{pixsim::parse_file(path)};
  });
}

pixsim_status pixsim_circuit_builtin(const char* name, pixsim_circuit** out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "null argument");
    const auto which = pixsim::builtin_from_name(name);
    if (!which) {
      throw pixsim::Error(pixsim::ErrorCode::InvalidArgument, std::string("unknown builtin '") + name +
                                                                  "' (valid: pixel_3t_log, pixel_2tm, "
                                                                  "pixel_4t_linlog, pixel_3tm)");
    }
    *out = new pixsim_circuit{pixsim::builtin(*which)};
  });
}

pixsim_status pixsim_circuit_clone(const pixsim_circuit* c, pixsim_circuit** out) {
  return guarded([&] {
    require(c != nullptr && out != nullptr, "null argument");
    *out = new pixsim_circuit{c->circuit};
  });
}

void pixsim_circuit_free(pixsim_circuit* c) { delete c; }

const char* pixsim_builtin_names(void) { return "pixel_3t_log\npixel_2tm\npixel_4t_linlog\npixel_3tm"; }

const char* pixsim_circuit_name(const pixsim_circuit* c) { return c == nullptr ? "" : c->circuit.name.c_str(); }

pixsim_status pixsim_circuit_serialize(const pixsim_circuit* c, char** text) {
  return guarded([&] {
    require(c != nullptr && text != nullptr, "null argument");
    *text = dup_string(pixsim::serialize(c->circuit));
  });
}

pixsim_status pixsim_circuit_validate(const pixsim_circuit* c, size_t* count, char** report) {
  return guarded([&] {
    require(c != nullptr && count != nullptr, "null argument");
    const auto diags = pixsim::validate(c->circuit);
    *count = diags.size();
    if (report != nullptr) {
      std::vector<std::string> lines;
      for (const auto& d : diags) lines.push_back(std::string(pixsim::to_string(d.kind)) + ": " + d.message);
      *report = dup_string(joined(lines));
    }
  });
}

pixsim_status pixsim_circuit_sweep_sources(const pixsim_circuit* c, char** names) {
  return guarded([&] {
    require(c != nullptr && names != nullptr, "null argument");
    *names = dup_string(joined(c->circuit.sweepable_sources()));
  });
}

pixsim_status pixsim_circuit_set_source_dc(pixsim_circuit* c, const char* source, double value) {
  return guarded([&] {
    require(c != nullptr && source != nullptr, "null argument");
    pixsim::DeviceInstance* d = c->circuit.find_device(source);
    if (d == nullptr) throw pixsim::Error(pixsim::ErrorCode::InvalidArgument, std::string("unknown source '") + source + "'");
    if (auto* i = std::get_if<pixsim::ISourceCard>(&d->card)) {
      i->wave = pixsim::DcWave{value};
    } else if (auto* p = std::get_if<pixsim::PhotodiodeCard>(&d->card)) {
      require(value >= 0.0, "photocurrent must be >= 0");
      p->iph = pixsim::DcWave{value};
    } else {
      throw pixsim::Error(pixsim::ErrorCode::InvalidArgument, std::string("'") + source + "' is not a current source");
    }
  });
}

pixsim_status pixsim_circuit_set_source_waveform(pixsim_circuit* c, const char* source, const char* waveform) {
  return guarded([&] {
    require(c != nullptr && source != nullptr && waveform != nullptr, "null argument");
    pixsim::DeviceInstance* d = c->circuit.find_device(source);
    if (d == nullptr) throw pixsim::Error(pixsim::ErrorCode::InvalidArgument, std::string("unknown source '") + source + "'");
    pixsim::Waveform w = pixsim::parse_waveform(waveform);
    pixsim::check_waveform(w);
    if (auto* v = std::get_if<pixsim::VSourceCard>(&d->card)) {
      v->wave = std::move(w);
    } else if (auto* i = std::get_if<pixsim::ISourceCard>(&d->card)) {
      i->wave = std::move(w);
    } else if (auto* p = std::get_if<pixsim::PhotodiodeCard>(&d->card)) {
      require(pixsim::waveform_is_nonnegative(w), "photocurrent must be >= 0");
      p->iph = std::move(w);
    } else {
      throw pixsim::Error(pixsim::ErrorCode::InvalidArgument, std::string("'") + source + "' is not a source");
    }
  });
}

pixsim_status pixsim_circuit_tran_directive(const pixsim_circuit* c, int* present, double* dt, double* tstop) {
  return guarded([&] {
    require(c != nullptr && present != nullptr, "null argument");
    *present = c->circuit.tran.has_value();
    if (c->circuit.tran) {
      if (dt != nullptr) *dt = c->circuit.tran->dt;
      if (tstop != nullptr) *tstop = c->circuit.tran->tstop;
    }
  });
}

pixsim_status pixsim_circuit_dc_directive(const pixsim_circuit* c, int* present, char** source, double* start,
                                          double* stop, int* points, int* decade) {
  return guarded([&] {
    require(c != nullptr && present != nullptr, "null argument");
    *present = c->circuit.dc.has_value();
    if (!c->circuit.dc) return;
    const auto& d = *c->circuit.dc;
    if (source != nullptr) *source = dup_string(d.source);
    if (start != nullptr) *start = d.start;
    if (stop != nullptr) *stop = d.stop;
    if (points != nullptr) *points = d.points;
    if (decade != nullptr) *decade = d.decade;
  });
}

// ---------------------------------------------------------------------------

void pixsim_options_default(pixsim_options* o) {
  if (o == nullptr) return;
  const pixsim::SimOptions s;
  o->abstol = s.abstol;
  o->vtol = s.vtol;
  o->reltol = s.reltol;
  o->max_newton_iters = s.max_newton_iters;
  o->gmin = s.gmin;
  o->gmin_start = s.gmin_start;
  o->dt_initial = s.dt_initial;
  o->dt_min = s.dt_min;
  o->dt_max = s.dt_max;
  o->integrator = PIXSIM_TRAPEZOIDAL;
  o->lte_tol = s.lte_tol;
  o->adaptive = s.adaptive;
  o->max_step_voltage = s.max_step_voltage;
  o->carry_state = s.carry_state;
}

pixsim_status pixsim_op(const pixsim_circuit* c, const pixsim_options* opts, pixsim_trace** out) {
  return guarded([&] {
    require(c != nullptr && out != nullptr, "null argument");
    const auto sys = pixsim::assemble(c->circuit);
    const auto sol = pixsim::dc_operating_point(sys, to_options(opts));
    auto* t = new pixsim_trace;
    t->axis = {0.0};
    t->converged = {1};
    t->iterations = sol.iterations;
    fill_columns(*t, sys.unknown_names(), sys.memristor_names(), {sol.x}, {sol.mem_states});
    *out = t;
  });
}

pixsim_status pixsim_transient(const pixsim_circuit* c, double tstop, const pixsim_options* opts,
                               pixsim_trace** out) {
  return guarded([&] {
    require(c != nullptr && out != nullptr, "null argument");
    const auto sys = pixsim::assemble(c->circuit);
    auto tr = pixsim::transient(sys, tstop, to_options(opts));
    auto* t = new pixsim_trace;
    t->axis_name = "time_s";
    t->axis = tr.time;
    t->converged.assign(tr.time.size(), 1);
    fill_columns(*t, tr.unknown_names, tr.memristor_names, tr.unknowns, tr.mem_states);
    t->tran = std::move(tr);
    *out = t;
  });
}

pixsim_status pixsim_dc_sweep(const pixsim_circuit* c, const char* source, const double* values, size_t n,
                              const pixsim_options* opts, pixsim_trace** out) {
  return guarded([&] {
    require(c != nullptr && source != nullptr && out != nullptr && (values != nullptr || n == 0), "null argument");
    const auto sys = pixsim::assemble(c->circuit);
    *out = from_sweep(pixsim::dc_sweep(sys, source, std::span<const double>(values, n), to_options(opts)));
  });
}

pixsim_status pixsim_photo_sweep(const pixsim_circuit* c, const char* source, const double* values, size_t n,
                                 double t_sample, const pixsim_options* opts, pixsim_trace** out) {
  return guarded([&] {
    require(c != nullptr && source != nullptr && out != nullptr && (values != nullptr || n == 0), "null argument");
    const auto sys = pixsim::assemble(c->circuit);
    *out = from_sweep(
        pixsim::photoresponse_sweep(sys, source, std::span<const double>(values, n), t_sample, to_options(opts)));
  });
}

pixsim_status pixsim_log_space(double from, double to, int per_decade, double** values, size_t* n) {
  return guarded([&] {
    require(values != nullptr && n != nullptr, "null argument");
    const auto v = pixsim::log_space(from, to, per_decade);
    auto* p = static_cast<double*>(std::malloc(v.size() * sizeof(double)));
    if (p == nullptr) throw std::bad_alloc();
    std::memcpy(p, v.data(), v.size() * sizeof(double));
    *values = p;
    *n = v.size();
  });
}

void pixsim_values_free(double* values) { std::free(values); }

void pixsim_trace_free(pixsim_trace* t) { delete t; }
size_t pixsim_trace_rows(const pixsim_trace* t) { return t == nullptr ? 0 : t->axis.size(); }
size_t pixsim_trace_columns(const pixsim_trace* t) { return t == nullptr ? 0 : t->names.size(); }

const char* pixsim_trace_column_name(const pixsim_trace* t, size_t col) {
  return t == nullptr || col >= t->names.size() ? nullptr : t->names[col].c_str();
}

const char* pixsim_trace_axis_name(const pixsim_trace* t) { return t == nullptr ? "" : t->axis_name.c_str(); }
const double* pixsim_trace_axis(const pixsim_trace* t) { return t == nullptr ? nullptr : t->axis.data(); }

const double* pixsim_trace_column_data(const pixsim_trace* t, size_t col) {
  return t == nullptr || col >= t->columns.size() ? nullptr : t->columns[col].data();
}

pixsim_status pixsim_trace_find(const pixsim_trace* t, const char* name, size_t* col) {
  return guarded([&] {
    require(t != nullptr && name != nullptr && col != nullptr, "null argument");
    const std::string wanted = pixsim::trace_name(name);
    for (std::size_t j = 0; j < t->names.size(); ++j) {
      if (pixsim::iequals(t->names[j], wanted)) {
        *col = j;
        return;
      }
    }
    throw pixsim::Error(pixsim::ErrorCode::InvalidArgument, std::string("no trace named '") + name + "'");
  });
}

int pixsim_trace_converged(const pixsim_trace* t, size_t row) {
  return t != nullptr && row < t->converged.size() && t->converged[row] != 0;
}

int pixsim_trace_iterations(const pixsim_trace* t) { return t == nullptr ? 0 : t->iterations; }

// ---------------------------------------------------------------------------

pixsim_status pixsim_output_swing(const pixsim_trace* tran, const char* node, double t_from, double t_to,
                                  double* swing) {
  return guarded([&] {
    require(tran != nullptr && node != nullptr && swing != nullptr, "null argument");
    require(tran->tran.has_value(), "swing needs a transient trace");
    *swing = pixsim::output_swing(*tran->tran, node, t_from, t_to);
  });
}

pixsim_status pixsim_average_power(const pixsim_trace* tran, double t_from, double t_to, double* watts) {
  return guarded([&] {
    require(tran != nullptr && watts != nullptr, "null argument");
    require(tran->tran.has_value(), "power needs a transient trace");
    if (t_from > t_to) {
      *watts = pixsim::average_power(*tran->tran);
    } else {
      *watts = pixsim::average_power(*tran->tran, t_from, t_to);
    }
  });
}

pixsim_status pixsim_fit_log_slope(const double* current, const double* v, size_t n, double lo, double hi,
                                   pixsim_fit* out) {
  return guarded([&] {
    require(current != nullptr && v != nullptr && out != nullptr, "null argument");
    const auto f = pixsim::fit_log_slope(std::span(current, n), std::span(v, n), lo, hi);
    *out = {f.log_slope_mv_per_decade, f.log_intercept_v, f.r_squared, f.fit_lo, f.fit_hi, f.points};
  });
}

pixsim_status pixsim_detect_knee(const double* current, const double* v, size_t n, pixsim_knee* out) {
  return guarded([&] {
    require(current != nullptr && v != nullptr && out != nullptr, "null argument");
    const auto k = pixsim::detect_knee(std::span(current, n), std::span(v, n));
    *out = {k.knee_current, k.linear_r2, k.log_r2, k.linear_lo, k.linear_hi, k.log_lo, k.log_hi, k.improvement};
  });
}

pixsim_status pixsim_dynamic_range_db(const double* current, const double* v, size_t n, double floor_v_per_decade,
                                      double* db) {
  return guarded([&] {
    require(current != nullptr && v != nullptr && db != nullptr, "null argument");
    *db = pixsim::dynamic_range_db(std::span(current, n), std::span(v, n), floor_v_per_decade);
  });
}

pixsim_status pixsim_area_report(const pixsim_circuit* c, const char* config_path, pixsim_area** out) {
  return guarded([&] {
    require(c != nullptr && out != nullptr, "null argument");
    const auto cfg = config_path == nullptr ? pixsim::AreaConfig::defaults() : pixsim::load_area_config(config_path);
    auto* a = new pixsim_area{pixsim::area_report(c->circuit, cfg), {}};
    for (const auto& r : a->report.rows) a->kinds.emplace_back(pixsim::to_string(r.kind));
    *out = a;
  });
}

void pixsim_area_free(pixsim_area* a) { delete a; }
size_t pixsim_area_rows(const pixsim_area* a) { return a == nullptr ? 0 : a->report.rows.size(); }

const char* pixsim_area_device(const pixsim_area* a, size_t row) {
  return a == nullptr || row >= a->report.rows.size() ? nullptr : a->report.rows[row].device.c_str();
}

const char* pixsim_area_kind(const pixsim_area* a, size_t row) {
  return a == nullptr || row >= a->kinds.size() ? nullptr : a->kinds[row].c_str();
}

double pixsim_area_um2(const pixsim_area* a, size_t row) {
  return a == nullptr || row >= a->report.rows.size() ? std::nan("") : a->report.rows[row].area_um2;
}

double pixsim_area_total_um2(const pixsim_area* a) { return a == nullptr ? std::nan("") : a->report.total_um2; }
int pixsim_area_calibrated(const pixsim_area* a) { return a != nullptr && a->report.calibrated; }

}  // extern "C"
