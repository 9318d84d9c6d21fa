#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "pixsim/engine.hpp"
#include "pixsim/error.hpp"

namespace pixsim {

namespace {

struct State {
  double t = 0.0;
  std::vector<double> x;
  std::vector<CapacitorHistory> hist;  // by capacitive slot
  std::vector<double> mem_x;           // by memristor slot
  std::vector<double> mem_i;
};

double node_voltage(const MnaSystem& sys, const std::vector<double>& x, int node) {
  const int u = sys.unknown_of_node(node);
  return u == kGround ? 0.0 : x[static_cast<std::size_t>(u)];
}

double across(const MnaSystem& sys, const std::vector<double>& x, const DeviceInstance& d) {
  return node_voltage(sys, x, d.terminals[0]) - node_voltage(sys, x, d.terminals[1]);
}

double capacitance_of(const DeviceInstance& d) {
  if (const auto* c = std::get_if<CapacitorCard>(&d.card)) return c->c;
  return std::get<PhotodiodeCard>(d.card).c_pd;
}

const MemristorCard& mem_card(const MnaSystem& sys, std::size_t slot) {
  return std::get<MemristorCard>(sys.circuit().devices()[sys.memristors()[slot]].card);
}

std::vector<double> memristor_currents(const MnaSystem& sys, const std::vector<double>& x,
                                       const std::vector<double>& mem_x) {
  std::vector<double> out(sys.memristor_count());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& d = sys.circuit().devices()[sys.memristors()[k]];
    out[k] = across(sys, x, d) / memristance(mem_x[k], mem_card(sys, k));
  }
  return out;
}

// One implicit step of length h from s. Empty when Newton fails.
std::optional<State> take_step(const MnaSystem& sys, const State& s, double t1, Integrator method,
                               const SimOptions& opts) {
  const double h = t1 - s.t;
  EvalContext ctx;
  ctx.time = t1;
  ctx.integ = IntegratorContext{false, h, method};
  ctx.cap_hist = s.hist;
  ctx.mem_x = s.mem_x;
  ctx.gmin = opts.gmin;

  Solution sol;
  try {
    sol = newton_solve(sys, s.x, ctx, opts);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonConvergence || e.code() == ErrorCode::Singular) return std::nullopt;
    throw;
  }

  State next;
  next.t = t1;
  next.x = std::move(sol.x);
  next.hist.resize(s.hist.size());
  for (std::size_t k = 0; k < sys.capacitive_count(); ++k) {
    const auto& d = sys.circuit().devices()[sys.capacitive()[k]];
    const double v = across(sys, next.x, d);
    next.hist[k] = {v, capacitor_current(capacitance_of(d), v, ctx.integ, s.hist[k])};
  }

  // Memristor state: explicit in x, using currents of the accepted solution.
  next.mem_i = memristor_currents(sys, next.x, s.mem_x);
  next.mem_x.resize(s.mem_x.size());
  for (std::size_t k = 0; k < s.mem_x.size(); ++k) {
    const auto& card = mem_card(sys, k);
    const double x0 = s.mem_x[k];
    double x1;
    if (method == Integrator::BackwardEuler) {
      x1 = x0 + h * memristor_dxdt(x0, next.mem_i[k], card);
    } else {
      const double k1 = memristor_dxdt(x0, s.mem_i[k], card);
      const double pred = std::clamp(x0 + h * k1, 0.0, 1.0);
      const double k2 = memristor_dxdt(pred, next.mem_i[k], card);
      x1 = x0 + 0.5 * h * (k1 + k2);
    }
    next.mem_x[k] = std::clamp(x1, 0.0, 1.0);
  }
  return next;
}

double lte_ratio(const MnaSystem& sys, const State& coarse, const State& fine, int order, const SimOptions& opts) {
  const double denom = std::pow(2.0, order) - 1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < sys.node_unknowns(); ++i) {
    const double tol = opts.lte_tol + opts.reltol * std::abs(fine.x[i]);
    worst = std::max(worst, std::abs(coarse.x[i] - fine.x[i]) / denom / tol);
  }
  for (std::size_t k = 0; k < fine.mem_x.size(); ++k) {
    worst = std::max(worst, std::abs(coarse.mem_x[k] - fine.mem_x[k]) / denom / opts.lte_tol);
  }
  return std::isfinite(worst) ? worst : 1e300;
}

std::vector<double> collect_breakpoints(const MnaSystem& sys, double tstop) {
  std::vector<double> bps;
  for (auto i : sys.sources()) {
    const auto& d = sys.circuit().devices()[i];
    const Waveform* w = nullptr;
    if (const auto* v = std::get_if<VSourceCard>(&d.card)) w = &v->wave;
    if (const auto* c = std::get_if<ISourceCard>(&d.card)) w = &c->wave;
    if (const auto* p = std::get_if<PhotodiodeCard>(&d.card)) w = &p->iph;
    if (w == nullptr) continue;
    for (double t : waveform_breakpoints(*w, tstop)) {
      if (t > 0.0 && t < tstop) bps.push_back(t);
    }
  }
  bps.push_back(tstop);
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  return bps;
}

void record(const MnaSystem& sys, const State& s, TransientResult& r) {
  r.time.push_back(s.t);
  r.unknowns.push_back(s.x);
  r.mem_states.push_back(s.mem_x);
  r.mem_currents.push_back(s.mem_i);
  std::vector<double> cur, volt;
  for (auto i : sys.sources()) {
    const auto& d = sys.circuit().devices()[i];
    volt.push_back(across(sys, s.x, d));
    if (std::holds_alternative<VSourceCard>(d.card)) {
      cur.push_back(s.x[static_cast<std::size_t>(sys.branch_of(i))]);
    } else if (const auto* c = std::get_if<ISourceCard>(&d.card)) {
      cur.push_back(waveform_eval(c->wave, s.t));
    } else {
      cur.push_back(waveform_eval(std::get<PhotodiodeCard>(d.card).iph, s.t));
    }
  }
  r.source_currents.push_back(std::move(cur));
  r.source_voltages.push_back(std::move(volt));
}

State initial_state(const MnaSystem& sys, const SimOptions& opts) {
  const std::vector<double> mem = initial_memristor_states(sys);
  EvalContext ctx;
  ctx.time = 0.0;
  ctx.mem_x = mem;
  ctx.gmin = opts.gmin;
  ctx.pin_initial_conditions = true;
  const std::vector<double> zero(sys.size(), 0.0);
  Solution sol = solve_with_gmin_stepping(sys, zero, ctx, opts);

  State s;
  s.t = 0.0;
  s.x = std::move(sol.x);
  s.mem_x = mem;
  s.mem_i = memristor_currents(sys, s.x, mem);
  for (auto i : sys.capacitive()) {
    const auto& d = sys.circuit().devices()[i];
    const double v = across(sys, s.x, d);
    double cur = 0.0;
    if (const auto* c = std::get_if<CapacitorCard>(&d.card); c != nullptr && c->ic) {
      // Current the pinned companion carried at t = 0.
      cur = capacitor_current(c->c > 0 ? c->c : 1e-15, v, IntegratorContext{false, 1e-18, Integrator::BackwardEuler},
                              CapacitorHistory{*c->ic, 0.0});
      if (c->c == 0.0) cur = 0.0;
    }
    s.hist.push_back({v, cur});
  }
  return s;
}

// Caps the step so no memristor state moves by more than 1% of its range.
double memristor_step_cap(const MnaSystem& sys, const State& s) {
  double cap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.mem_i.size(); ++k) {
    const double rate = drift_coefficient(mem_card(sys, k)) * std::abs(s.mem_i[k]);
    if (rate > 0.0) cap = std::min(cap, 0.01 / rate);
  }
  return cap;
}

}  // namespace

std::vector<double> TransientResult::trace(std::string_view name) const {
  std::vector<double> out;
  for (std::size_t j = 0; j < unknown_names.size(); ++j) {
    if (!iequals(unknown_names[j], name)) continue;
    for (const auto& row : unknowns) out.push_back(row[j]);
    return out;
  }
  for (std::size_t j = 0; j < memristor_names.size(); ++j) {
    if (!iequals(memristor_names[j], name)) continue;
    for (const auto& row : mem_states) out.push_back(row[j]);
    return out;
  }
  if (name == "time" || name == "time_s") return time;
  throw Error(ErrorCode::InvalidArgument, "no trace named '" + std::string(name) + "'");
}

TransientResult transient(const MnaSystem& sys, double tstop, const SimOptions& opts) {
  check_options(opts);
  if (!(tstop > 0.0) || !std::isfinite(tstop)) throw Error(ErrorCode::InvalidArgument, "tstop must be positive");
  const double dt_max = opts.dt_max > 0.0 ? opts.dt_max : tstop / 50.0;
  if (!(opts.dt_min <= opts.dt_initial)) throw Error(ErrorCode::InvalidArgument, "need dt_min <= dt_initial");

  TransientResult r;
  r.unknown_names = sys.unknown_names();
  r.memristor_names = sys.memristor_names();
  r.source_names = sys.source_names();

  State s = initial_state(sys, opts);
  record(sys, s, r);

  const std::vector<double> bps = collect_breakpoints(sys, tstop);
  std::size_t next_bp = 0;
  bool after_breakpoint = true;  // start-up and every corner restart with a damped step
  double dt = std::min(opts.dt_initial, dt_max);

  while (s.t < tstop) {
    while (next_bp < bps.size() && bps[next_bp] <= s.t) ++next_bp;
    const double target = bps[next_bp];
    double h = std::min({dt, dt_max, memristor_step_cap(sys, s)});
    if (!opts.adaptive) h = opts.dt_initial;
    bool lands = false;
    if (s.t + h >= target || target - (s.t + h) < 1e-3 * h) {
      h = target - s.t;
      lands = true;
    }

    const Integrator method = after_breakpoint ? Integrator::BackwardEuler : opts.integrator;
    const int order = method == Integrator::BackwardEuler ? 1 : 2;
    const double t1 = lands ? target : s.t + h;

    if (!opts.adaptive) {
      auto full = take_step(sys, s, t1, method, opts);
      if (!full) {
        throw Error(ErrorCode::NonConvergence,
                    "Newton failed at t=" + std::to_string(s.t) + " with fixed dt=" + std::to_string(h));
      }
      s = std::move(*full);
      record(sys, s, r);
      after_breakpoint = lands && target < tstop;
      continue;
    }

    const double t_half = s.t + 0.5 * h;
    std::optional<State> full = take_step(sys, s, t1, method, opts);
    std::optional<State> half1, half2;
    if (full) half1 = take_step(sys, s, t_half, method, opts);
    if (half1) half2 = take_step(sys, *half1, t1, method, opts);
    if (!half2) {
      ++r.rejected_steps;
      dt = 0.5 * h;
      if (dt < opts.dt_min) {
        throw Error(ErrorCode::NonConvergence, "Newton failed at t=" + std::to_string(s.t) +
                                                   " with dt at dt_min=" + std::to_string(opts.dt_min));
      }
      continue;
    }

    const double err = lte_ratio(sys, *full, *half2, order, opts);
    const double factor = err > 0.0 ? 0.9 * std::pow(err, -1.0 / (order + 1)) : 2.0;
    if (err <= 1.0) {
      record(sys, *half1, r);
      s = std::move(*half2);
      record(sys, s, r);
      dt = h * std::clamp(factor, 1.0, 2.0);
      if (lands && target < tstop) dt = std::min(dt, opts.dt_initial);
      after_breakpoint = lands && target < tstop;
    } else {
      ++r.rejected_steps;
      dt = h * std::clamp(factor, 0.1, 0.5);
      if (dt < opts.dt_min) {
        throw Error(ErrorCode::StepUnderflow,
                    "time step fell below dt_min=" + std::to_string(opts.dt_min) + " at t=" + std::to_string(s.t));
      }
    }
  }
  return r;
}

}  // namespace pixsim
