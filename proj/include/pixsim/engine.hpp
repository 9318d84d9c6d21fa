#pragma once

// Modified nodal analysis: assembly, damped Newton with gmin stepping, DC
// sweeps and adaptive transient analysis with memristor state integration.
//
// Unknown layout: node voltages for nodes 1..N (ground eliminated), then one
// branch current per voltage source in declaration order. A branch current is
// positive when it flows from the source's n+ terminal through the source.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pixsim/devices.hpp"
#include "pixsim/netlist.hpp"
#include "pixsim/numeric.hpp"

namespace pixsim {

struct SimOptions {
  double abstol = 1e-12;            // A
  double vtol = 1e-6;               // V
  double reltol = 1e-4;
  int max_newton_iters = 200;
  double gmin = 1e-12;              // leak to ground on every node, always present
  double gmin_start = 1e-3;         // gmin stepping runs from here down to gmin
  double dt_initial = 1e-9;         // s
  double dt_min = 1e-16;            // s
  double dt_max = 0.0;              // s; 0 selects tstop / 50
  Integrator integrator = Integrator::Trapezoidal;
  double lte_tol = 1e-4;            // V (also applied to memristor state)
  bool adaptive = true;             // false: fixed steps of dt_initial
  double max_step_voltage = 0.5;    // Newton damping cap, V
  bool carry_state = false;         // photoresponse sweep: carry memristor state between points
};

// Throws InvalidArgument when an option breaks its invariant.
void check_options(const SimOptions& opts);

class MnaSystem {
public:
  const Circuit& circuit() const { return circuit_; }

  std::size_t size() const { return size_; }
  std::size_t node_unknowns() const { return circuit_.node_count() - 1; }
  int unknown_of_node(int node) const { return node == 0 ? kGround : node - 1; }
  // Branch unknown of a voltage source, or -1.
  int branch_of(std::size_t device) const { return branch_[device]; }
  int memristor_slot(std::size_t device) const { return mem_slot_[device]; }
  int capacitive_slot(std::size_t device) const { return cap_slot_[device]; }

  std::size_t memristor_count() const { return memristors_.size(); }
  // True when any device is nonlinear in the node voltages (MOSFET, clamped
  // photodiode). Newton damping applies only then.
  bool nonlinear() const { return nonlinear_; }
  std::size_t capacitive_count() const { return capacitive_.size(); }
  const std::vector<std::size_t>& memristors() const { return memristors_; }
  const std::vector<std::size_t>& capacitive() const { return capacitive_; }
  // Independent sources (V, I, photodiode photocurrent), in device order.
  const std::vector<std::size_t>& sources() const { return sources_; }

  // "v_<node>" for node unknowns, "i_<source>" for branch currents.
  const std::vector<std::string>& unknown_names() const { return unknown_names_; }
  std::vector<std::string> memristor_names() const;
  std::vector<std::string> source_names() const;
  std::optional<std::size_t> find_unknown(std::string_view name) const;

  // Replaces the waveform of an ISource or photodiode with a DC value.
  void set_source_dc(std::string_view device, double value);
  // Overwrites each memristor card's x0 (by memristor slot).
  void set_memristor_x0(std::span<const double> states);

private:
  friend MnaSystem assemble(const Circuit& c);
  Circuit circuit_;
  std::size_t size_ = 0;
  bool nonlinear_ = false;
  std::vector<int> branch_, mem_slot_, cap_slot_;
  std::vector<std::size_t> memristors_, capacitive_, sources_;
  std::vector<std::string> unknown_names_;
};

// Throws Error{Validation} listing the diagnostics if validate(c) is not empty.
MnaSystem assemble(const Circuit& c);

struct Solution {
  std::vector<double> x;
  std::vector<double> mem_states;  // aligned with MnaSystem::memristors()
  double time = 0.0;
  int iterations = 0;
};

// Everything a device stamp needs beyond the candidate solution.
struct EvalContext {
  double time = 0.0;
  IntegratorContext integ;
  std::span<const CapacitorHistory> cap_hist;  // by capacitive slot
  std::span<const double> mem_x;               // by memristor slot
  double gmin = 0.0;
  // Initial-condition solve: capacitors with IC are pinned to it.
  bool pin_initial_conditions = false;
};

// Loaded linear system at a candidate solution, plus per-row residual scale.
struct LoadedSystem {
  numeric::DenseMatrix a;
  std::vector<double> b;
  std::vector<double> residual;  // A(x) x - b(x): KCL current per node row
  std::vector<double> scale;     // largest single-device contribution per row
};

LoadedSystem load(const MnaSystem& sys, std::span<const double> x, const EvalContext& ctx);

// True when every row satisfies |f| <= tol + reltol * scale (abstol on node
// rows, vtol on branch rows).
bool residual_ok(const MnaSystem& sys, const LoadedSystem& ls, const SimOptions& opts);
double worst_residual(const MnaSystem& sys, const LoadedSystem& ls, const SimOptions& opts,
                      std::size_t* row = nullptr);

// Newton iteration at a fixed context. Throws NonConvergence (message names
// the worst node) or Singular (annotated with the unknown it points at).
Solution newton_solve(const MnaSystem& sys, std::span<const double> initial, const EvalContext& ctx,
                      const SimOptions& opts);

// Newton at ctx, falling back to gmin stepping from opts.gmin_start down to
// ctx.gmin, each decade warm-started from the previous one.
Solution solve_with_gmin_stepping(const MnaSystem& sys, std::span<const double> initial, EvalContext ctx,
                                  const SimOptions& opts);

// Capacitors open, memristors frozen at their card x0, sources at time t.
// Falls back to gmin stepping when the plain solve fails.
Solution dc_operating_point(const MnaSystem& sys, const SimOptions& opts,
                            std::optional<std::span<const double>> initial = std::nullopt,
                            double time = 0.0);

// Default DC context at time t with memristors at x0.
std::vector<double> initial_memristor_states(const MnaSystem& sys);

// ---------------------------------------------------------------------------

struct SweepResult {
  std::string source;
  std::vector<std::string> unknown_names;
  std::vector<std::string> memristor_names;
  std::vector<double> values;
  std::vector<std::vector<double>> unknowns;    // [point][unknown]
  std::vector<std::vector<double>> mem_states;  // [point][memristor]
  std::vector<char> converged;

  // Column of one unknown ("v_out") or memristor state ("x_mem").
  std::vector<double> trace(std::string_view name) const;
};

// Each point is warm-started from the previous converged one. Failed points
// are flagged and filled with NaN; the sweep continues.
SweepResult dc_sweep(const MnaSystem& sys, std::string_view source, std::span<const double> values,
                     const SimOptions& opts);

// Integrating response: for each photocurrent a transient from t = 0 to
// t_sample, recording the state at t_sample.
SweepResult photoresponse_sweep(const MnaSystem& sys, std::string_view source,
                                std::span<const double> values, double t_sample, const SimOptions& opts);

// Log-spaced values from `from` to `to` with `per_decade` points per decade,
// both ends included.
std::vector<double> log_space(double from, double to, int per_decade);

// ---------------------------------------------------------------------------

struct TransientResult {
  std::vector<std::string> unknown_names;
  std::vector<std::string> memristor_names;
  std::vector<std::string> source_names;
  std::vector<double> time;
  std::vector<std::vector<double>> unknowns;         // [point][unknown]
  std::vector<std::vector<double>> mem_states;       // [point][memristor]
  std::vector<std::vector<double>> mem_currents;     // [point][memristor], n+ -> n-
  std::vector<std::vector<double>> source_currents;  // [point][source], n+ -> n- through source
  std::vector<std::vector<double>> source_voltages;  // [point][source], v(n+) - v(n-)
  int rejected_steps = 0;

  std::vector<double> trace(std::string_view name) const;
};

TransientResult transient(const MnaSystem& sys, double tstop, const SimOptions& opts);

}  // namespace pixsim
