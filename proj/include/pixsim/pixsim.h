/* pixsim C API: opaque handles, status codes, thread-local error text. */
#ifndef PIXSIM_H
#define PIXSIM_H

#include <stddef.h>

#if defined(PIXSIM_BUILDING_LIBRARY)
#define PIXSIM_API __attribute__((visibility("default")))
#else
#define PIXSIM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pixsim_status {
  PIXSIM_OK = 0,
  PIXSIM_ERR_INVALID_ARGUMENT,
  PIXSIM_ERR_DIMENSION_MISMATCH,
  PIXSIM_ERR_SINGULAR,
  PIXSIM_ERR_STATE_OUT_OF_RANGE,
  PIXSIM_ERR_IO,
  PIXSIM_ERR_SYNTAX,
  PIXSIM_ERR_UNKNOWN_DEVICE_PREFIX,
  PIXSIM_ERR_DUPLICATE_NAME,
  PIXSIM_ERR_VALIDATION,
  PIXSIM_ERR_NONCONVERGENCE,
  PIXSIM_ERR_STEP_UNDERFLOW,
  PIXSIM_ERR_EMPTY_WINDOW,
  PIXSIM_ERR_INSUFFICIENT_POINTS,
  PIXSIM_ERR_NO_KNEE,
  PIXSIM_ERR_NO_SENSITIVE_REGION,
  PIXSIM_ERR_MISSING_GEOMETRY,
  PIXSIM_ERR_CONFIG,
  PIXSIM_ERR_INTERNAL
} pixsim_status;

typedef struct pixsim_circuit pixsim_circuit;
typedef struct pixsim_trace pixsim_trace;
typedef struct pixsim_area pixsim_area;

PIXSIM_API const char* pixsim_version(void);
PIXSIM_API const char* pixsim_status_name(pixsim_status status);
/* Message of the last failed call on this thread; "" after a success. */
PIXSIM_API const char* pixsim_last_error(void);
/* 1-based netlist position of the last parse error, 0 when not applicable. */
PIXSIM_API int pixsim_last_error_line(void);
PIXSIM_API int pixsim_last_error_column(void);
/* 1 for solver failures (non-convergence, step underflow, singular matrix). */
PIXSIM_API int pixsim_status_is_numerical(pixsim_status status);

/* Strings returned through char** are owned by the caller. */
PIXSIM_API void pixsim_string_free(char* s);

/* ------------------------------------------------------------------------ */
/* Circuits */

PIXSIM_API pixsim_status pixsim_circuit_parse(const char* text, pixsim_circuit** out);
PIXSIM_API pixsim_status pixsim_circuit_load(const char* path, pixsim_circuit** out);
PIXSIM_API pixsim_status pixsim_circuit_builtin(const char* name, pixsim_circuit** out);
PIXSIM_API pixsim_status pixsim_circuit_clone(const pixsim_circuit* c, pixsim_circuit** out);
PIXSIM_API void pixsim_circuit_free(pixsim_circuit* c);

/* Newline-separated builtin names. */
PIXSIM_API const char* pixsim_builtin_names(void);

PIXSIM_API const char* pixsim_circuit_name(const pixsim_circuit* c);
PIXSIM_API pixsim_status pixsim_circuit_serialize(const pixsim_circuit* c, char** text);
/* Newline-separated "Kind: message" diagnostics; *count = 0 means simulable. */
PIXSIM_API pixsim_status pixsim_circuit_validate(const pixsim_circuit* c, size_t* count, char** report);
/* Newline-separated names of sources usable as sweep variables. */
PIXSIM_API pixsim_status pixsim_circuit_sweep_sources(const pixsim_circuit* c, char** names);
/* Replaces an I source or photodiode photocurrent with a DC value. */
PIXSIM_API pixsim_status pixsim_circuit_set_source_dc(pixsim_circuit* c, const char* source, double value);
/* Replaces the waveform of a V/I source or photodiode photocurrent, e.g.
   "PWL(0 1n 9u 1n 9.01u 10n)". */
PIXSIM_API pixsim_status pixsim_circuit_set_source_waveform(pixsim_circuit* c, const char* source,
                                                            const char* waveform);
/* Directive values; *present = 0 when the netlist has no such directive. */
PIXSIM_API pixsim_status pixsim_circuit_tran_directive(const pixsim_circuit* c, int* present, double* dt,
                                                       double* tstop);
PIXSIM_API pixsim_status pixsim_circuit_dc_directive(const pixsim_circuit* c, int* present, char** source,
                                                     double* start, double* stop, int* points, int* decade);

/* ------------------------------------------------------------------------ */
/* Analyses */

typedef enum pixsim_integrator { PIXSIM_BACKWARD_EULER = 0, PIXSIM_TRAPEZOIDAL = 1 } pixsim_integrator;

typedef struct pixsim_options {
  double abstol;            /* A */
  double vtol;              /* V */
  double reltol;
  int max_newton_iters;
  double gmin;              /* S */
  double gmin_start;        /* S */
  double dt_initial;        /* s */
  double dt_min;            /* s */
  double dt_max;            /* s, 0 = tstop / 50 */
  pixsim_integrator integrator;
  double lte_tol;
  int adaptive;
  double max_step_voltage;  /* V */
  int carry_state;
} pixsim_options;

PIXSIM_API void pixsim_options_default(pixsim_options* opts);

/* opts may be NULL for defaults. Results are column tables: an axis
   (time_s, iph_A or none) plus one column per unknown and memristor state. */
PIXSIM_API pixsim_status pixsim_op(const pixsim_circuit* c, const pixsim_options* opts, pixsim_trace** out);
PIXSIM_API pixsim_status pixsim_transient(const pixsim_circuit* c, double tstop, const pixsim_options* opts,
                                          pixsim_trace** out);
PIXSIM_API pixsim_status pixsim_dc_sweep(const pixsim_circuit* c, const char* source, const double* values,
                                         size_t n, const pixsim_options* opts, pixsim_trace** out);
/* One transient per value, sampled at t_sample. */
PIXSIM_API pixsim_status pixsim_photo_sweep(const pixsim_circuit* c, const char* source, const double* values,
                                            size_t n, double t_sample, const pixsim_options* opts,
                                            pixsim_trace** out);
/* Log-spaced values, both ends included. Caller frees with pixsim_values_free. */
PIXSIM_API pixsim_status pixsim_log_space(double from, double to, int per_decade, double** values, size_t* n);
PIXSIM_API void pixsim_values_free(double* values);

PIXSIM_API void pixsim_trace_free(pixsim_trace* t);
PIXSIM_API size_t pixsim_trace_rows(const pixsim_trace* t);
PIXSIM_API size_t pixsim_trace_columns(const pixsim_trace* t);
PIXSIM_API const char* pixsim_trace_column_name(const pixsim_trace* t, size_t col);
/* "time_s", "iph_A" or "" for an operating point. */
PIXSIM_API const char* pixsim_trace_axis_name(const pixsim_trace* t);
/* Pointers stay valid until the trace is freed. */
PIXSIM_API const double* pixsim_trace_axis(const pixsim_trace* t);
PIXSIM_API const double* pixsim_trace_column_data(const pixsim_trace* t, size_t col);
PIXSIM_API pixsim_status pixsim_trace_find(const pixsim_trace* t, const char* name, size_t* col);
PIXSIM_API int pixsim_trace_converged(const pixsim_trace* t, size_t row);
/* Newton iterations of an operating point; 0 otherwise. */
PIXSIM_API int pixsim_trace_iterations(const pixsim_trace* t);

/* ------------------------------------------------------------------------ */
/* Figures of merit */

typedef struct pixsim_fit {
  double slope_mv_per_decade;
  double intercept_v;
  double r_squared;
  double fit_lo, fit_hi;
  size_t points;
} pixsim_fit;

typedef struct pixsim_knee {
  double knee_current;
  double linear_r2, log_r2;
  double linear_lo, linear_hi, log_lo, log_hi;
  double improvement;
} pixsim_knee;

/* node is a label ("out") or trace name ("v_out"). */
PIXSIM_API pixsim_status pixsim_output_swing(const pixsim_trace* tran, const char* node, double t_from,
                                             double t_to, double* swing);
/* Average power delivered by all sources over [t_from, t_to]; pass
   t_from > t_to for the whole trace. */
PIXSIM_API pixsim_status pixsim_average_power(const pixsim_trace* tran, double t_from, double t_to, double* watts);

PIXSIM_API pixsim_status pixsim_fit_log_slope(const double* current, const double* v, size_t n, double lo,
                                              double hi, pixsim_fit* out);
PIXSIM_API pixsim_status pixsim_detect_knee(const double* current, const double* v, size_t n, pixsim_knee* out);
PIXSIM_API pixsim_status pixsim_dynamic_range_db(const double* current, const double* v, size_t n,
                                                 double floor_v_per_decade, double* db);

/* config_path NULL selects the built-in defaults (not calibrated). */
PIXSIM_API pixsim_status pixsim_area_report(const pixsim_circuit* c, const char* config_path, pixsim_area** out);
PIXSIM_API void pixsim_area_free(pixsim_area* a);
PIXSIM_API size_t pixsim_area_rows(const pixsim_area* a);
PIXSIM_API const char* pixsim_area_device(const pixsim_area* a, size_t row);
PIXSIM_API const char* pixsim_area_kind(const pixsim_area* a, size_t row);
PIXSIM_API double pixsim_area_um2(const pixsim_area* a, size_t row);
PIXSIM_API double pixsim_area_total_um2(const pixsim_area* a);
PIXSIM_API int pixsim_area_calibrated(const pixsim_area* a);

#ifdef __cplusplus
}
#endif

#endif /* PIXSIM_H */
