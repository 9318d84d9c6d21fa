#include "pixsim/engine.hpp"

#include <algorithm>
#include <cmath>

#include "pixsim/error.hpp"

namespace pixsim {

namespace {

// Companion step used to pin a capacitor to its initial condition.
constexpr double kPinDt = 1e-18;

double node_voltage(const MnaSystem& sys, std::span<const double> x, int node) {
  const int u = sys.unknown_of_node(node);
  return u == kGround ? 0.0 : x[static_cast<std::size_t>(u)];
}

// Adds a device stamp into the system and records its residual contribution.
void accumulate(const Stamp& s, std::span<const double> x, LoadedSystem& ls, std::vector<double>& scratch,
                std::vector<int>& touched) {
  for (const auto& e : s.conductances) {
    ls.a(static_cast<std::size_t>(e.row), static_cast<std::size_t>(e.col)) += e.g;
    scratch[static_cast<std::size_t>(e.row)] += e.g * x[static_cast<std::size_t>(e.col)];
    touched.push_back(e.row);
  }
  for (const auto& r : s.rhs) {
    ls.b[static_cast<std::size_t>(r.row)] += r.amps;
    scratch[static_cast<std::size_t>(r.row)] -= r.amps;
    touched.push_back(r.row);
  }
  for (int row : touched) {
    auto& v = scratch[static_cast<std::size_t>(row)];
    if (v != 0.0) {
      ls.residual[static_cast<std::size_t>(row)] += v;
      ls.scale[static_cast<std::size_t>(row)] = std::max(ls.scale[static_cast<std::size_t>(row)], std::abs(v));
      v = 0.0;
    }
  }
  touched.clear();
}

}  // namespace

void check_options(const SimOptions& o) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::InvalidArgument, what);
  };
  require(o.abstol > 0 && o.vtol > 0 && o.reltol >= 0, "tolerances must be positive");
  require(o.max_newton_iters >= 1, "max_newton_iters must be >= 1");
  require(o.gmin >= 0 && o.gmin_start >= o.gmin, "need 0 <= gmin <= gmin_start");
  require(o.dt_initial > 0 && o.dt_min > 0 && o.dt_max >= 0, "time steps must be positive");
  require(o.dt_min <= o.dt_initial, "need dt_min <= dt_initial");
  require(o.dt_max == 0 || o.dt_initial <= o.dt_max, "need dt_initial <= dt_max");
  require(o.lte_tol > 0, "lte_tol must be positive");
  require(o.max_step_voltage > 0, "max_step_voltage must be positive");
}

// ---------------------------------------------------------------------------
// MnaSystem

MnaSystem assemble(const Circuit& c) {
  const auto diags = validate(c);
  if (!diags.empty()) {
    std::string msg;
    for (const auto& d : diags) {
      if (!msg.empty()) msg += "; ";
      msg += std::string(to_string(d.kind)) + ": " + d.message;
    }
    throw Error(ErrorCode::Validation, msg);
  }

  MnaSystem s;
  s.circuit_ = c;
  const std::size_t nodes = c.node_count() - 1;
  for (std::size_t i = 1; i <= nodes; ++i) s.unknown_names_.push_back("v_" + c.node_name(static_cast<int>(i)));

  const std::size_t n_dev = c.devices().size();
  s.branch_.assign(n_dev, -1);
  s.mem_slot_.assign(n_dev, -1);
  s.cap_slot_.assign(n_dev, -1);
  int next = static_cast<int>(nodes);
  for (std::size_t i = 0; i < n_dev; ++i) {
    const auto& d = c.devices()[i];
    switch (d.kind()) {
      case DeviceKind::VSource:
        s.branch_[i] = next++;
        s.unknown_names_.push_back("i_" + d.name);
        s.sources_.push_back(i);
        break;
      case DeviceKind::ISource:
        s.sources_.push_back(i);
        break;
      case DeviceKind::Photodiode:
        if (std::get<PhotodiodeCard>(d.card).clamp_enabled) s.nonlinear_ = true;
        s.sources_.push_back(i);
        s.cap_slot_[i] = static_cast<int>(s.capacitive_.size());
        s.capacitive_.push_back(i);
        break;
      case DeviceKind::Capacitor:
        s.cap_slot_[i] = static_cast<int>(s.capacitive_.size());
        s.capacitive_.push_back(i);
        break;
      case DeviceKind::Memristor:
        s.mem_slot_[i] = static_cast<int>(s.memristors_.size());
        s.memristors_.push_back(i);
        break;
      case DeviceKind::Mosfet:
        s.nonlinear_ = true;
        break;
      default:
        break;
    }
  }
  s.size_ = static_cast<std::size_t>(next);
  return s;
}

std::vector<std::string> MnaSystem::memristor_names() const {
  std::vector<std::string> out;
  for (auto i : memristors_) out.push_back("x_" + circuit_.devices()[i].name);
  return out;
}

std::vector<std::string> MnaSystem::source_names() const {
  std::vector<std::string> out;
  for (auto i : sources_) out.push_back(circuit_.devices()[i].name);
  return out;
}

std::optional<std::size_t> MnaSystem::find_unknown(std::string_view name) const {
  for (std::size_t i = 0; i < unknown_names_.size(); ++i) {
    if (iequals(unknown_names_[i], name)) return i;
  }
  return std::nullopt;
}

void MnaSystem::set_source_dc(std::string_view device, double value) {
  DeviceInstance* d = circuit_.find_device(device);
  if (d == nullptr) throw Error(ErrorCode::InvalidArgument, "unknown source '" + std::string(device) + "'");
  if (auto* i = std::get_if<ISourceCard>(&d->card)) {
    i->wave = DcWave{value};
  } else if (auto* p = std::get_if<PhotodiodeCard>(&d->card)) {
    if (value < 0) throw Error(ErrorCode::InvalidArgument, "photocurrent must be >= 0");
    p->iph = DcWave{value};
  } else {
    throw Error(ErrorCode::InvalidArgument, "'" + std::string(device) + "' is not a current source");
  }
}

void MnaSystem::set_memristor_x0(std::span<const double> states) {
  if (states.size() != memristors_.size()) throw Error(ErrorCode::DimensionMismatch, "memristor state count");
  for (std::size_t k = 0; k < states.size(); ++k) {
    auto& card = std::get<MemristorCard>(circuit_.devices()[memristors_[k]].card);
    card.x0 = std::clamp(states[k], 0.0, 1.0);
  }
}

std::vector<double> initial_memristor_states(const MnaSystem& sys) {
  std::vector<double> out;
  for (auto i : sys.memristors()) out.push_back(std::get<MemristorCard>(sys.circuit().devices()[i].card).x0);
  return out;
}

// ---------------------------------------------------------------------------
// Load

LoadedSystem load(const MnaSystem& sys, std::span<const double> x, const EvalContext& ctx) {
  const std::size_t n = sys.size();
  if (x.size() != n) throw Error(ErrorCode::DimensionMismatch, "solution vector has wrong size");
  LoadedSystem ls{numeric::DenseMatrix(n), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                  std::vector<double>(n, 0.0)};
  std::vector<double> scratch(n, 0.0);
  std::vector<int> touched;

  const auto& devices = sys.circuit().devices();
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const auto& d = devices[i];
    const auto& t = d.terminals;
    auto u = [&](std::size_t k) { return sys.unknown_of_node(t[k]); };
    auto v = [&](std::size_t k) { return node_voltage(sys, x, t[k]); };
    Stamp s;
    switch (d.kind()) {
      case DeviceKind::Resistor:
        s = stamp_resistor(u(0), u(1), std::get<ResistorCard>(d.card).r);
        break;
      case DeviceKind::Capacitor: {
        const auto& card = std::get<CapacitorCard>(d.card);
        const auto& hist = ctx.cap_hist.empty() ? CapacitorHistory{}
                                                : ctx.cap_hist[static_cast<std::size_t>(sys.capacitive_slot(i))];
        if (ctx.pin_initial_conditions && card.ic) {
          s = stamp_capacitor(u(0), u(1), card.c > 0 ? card.c : 1e-15,
                              IntegratorContext{false, kPinDt, Integrator::BackwardEuler},
                              CapacitorHistory{*card.ic, 0.0});
        } else {
          s = stamp_capacitor(u(0), u(1), card.c, ctx.integ, hist);
        }
        break;
      }
      case DeviceKind::Memristor: {
        const auto& card = std::get<MemristorCard>(d.card);
        const double xm = ctx.mem_x.empty() ? card.x0 : ctx.mem_x[static_cast<std::size_t>(sys.memristor_slot(i))];
        s = stamp_memristor(u(0), u(1), card, xm);
        break;
      }
      case DeviceKind::VSource:
        s = stamp_vsource(u(0), u(1), sys.branch_of(i),
                          waveform_eval(std::get<VSourceCard>(d.card).wave, ctx.time));
        break;
      case DeviceKind::ISource:
        s = stamp_isource(u(0), u(1), waveform_eval(std::get<ISourceCard>(d.card).wave, ctx.time));
        break;
      case DeviceKind::Mosfet: {
        const int idx[4] = {u(0), u(1), u(2), u(3)};
        const double volts[4] = {v(0), v(1), v(2), v(3)};
        s = stamp_mosfet(std::span<const int, 4>(idx), std::span<const double, 4>(volts),
                         std::get<MosfetCard>(d.card));
        break;
      }
      case DeviceKind::Photodiode: {
        const auto& card = std::get<PhotodiodeCard>(d.card);
        const auto& hist = ctx.cap_hist.empty() ? CapacitorHistory{}
                                                : ctx.cap_hist[static_cast<std::size_t>(sys.capacitive_slot(i))];
        s = stamp_photodiode(u(0), u(1), v(0), v(1), waveform_eval(card.iph, ctx.time), card, ctx.integ, hist);
        break;
      }
    }
    accumulate(s, x, ls, scratch, touched);
  }

  if (ctx.gmin > 0.0) {
    Stamp leak;
    for (std::size_t k = 0; k < sys.node_unknowns(); ++k) leak.add(static_cast<int>(k), static_cast<int>(k), ctx.gmin);
    accumulate(leak, x, ls, scratch, touched);
  }
  return ls;
}

double worst_residual(const MnaSystem& sys, const LoadedSystem& ls, const SimOptions& opts, std::size_t* row) {
  double worst = 0.0;
  std::size_t at = 0;
  for (std::size_t r = 0; r < sys.size(); ++r) {
    const double tol = (r < sys.node_unknowns() ? opts.abstol : opts.vtol) + opts.reltol * ls.scale[r];
    const double ratio = std::abs(ls.residual[r]) / tol;
    if (!(ratio <= worst)) {
      worst = ratio;
      at = r;
    }
  }
  if (row != nullptr) *row = at;
  return worst;
}

bool residual_ok(const MnaSystem& sys, const LoadedSystem& ls, const SimOptions& opts) {
  return worst_residual(sys, ls, opts) <= 1.0;
}

// ---------------------------------------------------------------------------
// Newton

Solution newton_solve(const MnaSystem& sys, std::span<const double> initial, const EvalContext& ctx,
                      const SimOptions& opts) {
  const std::size_t n = sys.size();
  std::vector<double> x(initial.begin(), initial.end());
  if (x.size() != n) throw Error(ErrorCode::DimensionMismatch, "initial guess has wrong size");

  std::size_t worst_row = 0;
  for (int k = 1; k <= opts.max_newton_iters + 1; ++k) {
    LoadedSystem ls = load(sys, x, ctx);
    std::vector<double> next;
    try {
      next = numeric::lu_solve(numeric::lu_factor(ls.a), ls.b);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Singular) throw;
      const auto col = static_cast<std::size_t>(std::max(e.column(), 0));
      const std::string who = col < n ? sys.unknown_names()[col] : "?";
      throw Error(ErrorCode::Singular, "singular MNA matrix near " + who + " (floating node or source loop?)");
    }

    bool small_step = true;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = next[i] - x[i];
      const double tol = (i < sys.node_unknowns() ? opts.vtol : opts.abstol) + opts.reltol * std::abs(x[i]);
      if (!(std::abs(dx) <= tol)) small_step = false;
    }
    if (small_step && residual_ok(sys, ls, opts)) {
      // The last update is usually far more accurate than x; keep it when it
      // also meets the residual test.
      if (residual_ok(sys, load(sys, next, ctx), opts)) x = std::move(next);
      Solution sol;
      sol.x = std::move(x);
      sol.time = ctx.time;
      sol.iterations = k - 1;
      sol.mem_states.assign(ctx.mem_x.begin(), ctx.mem_x.end());
      if (sol.mem_states.empty()) sol.mem_states = initial_memristor_states(sys);
      return sol;
    }
    worst_residual(sys, ls, opts, &worst_row);
    if (k > opts.max_newton_iters) break;

    for (std::size_t i = 0; i < n; ++i) {
      double dx = next[i] - x[i];
      if (!std::isfinite(dx)) throw Error(ErrorCode::NonConvergence, "Newton produced a non-finite update");
      if (sys.nonlinear() && i < sys.node_unknowns()) {
        dx = std::clamp(dx, -opts.max_step_voltage, opts.max_step_voltage);
      }
      x[i] += dx;
    }
  }
  const std::string& who = sys.unknown_names()[worst_row];
  throw Error(ErrorCode::NonConvergence, "Newton did not converge in " + std::to_string(opts.max_newton_iters) +
                                             " iterations; worst residual at " + who);
}

Solution solve_with_gmin_stepping(const MnaSystem& sys, std::span<const double> initial, EvalContext ctx,
                                  const SimOptions& opts) {
  const double target = ctx.gmin;
  try {
    return newton_solve(sys, initial, ctx, opts);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonConvergence && e.code() != ErrorCode::Singular) throw;
    if (!(opts.gmin_start > target * 1.0001)) throw;
  }

  std::vector<double> x(initial.begin(), initial.end());
  int total = 0;
  try {
    for (double g = opts.gmin_start; g > target * 1.0001 && g > 1e-30; g /= 10.0) {
      ctx.gmin = g;
      Solution s = newton_solve(sys, x, ctx, opts);
      x = std::move(s.x);
      total += s.iterations;
    }
    ctx.gmin = target;
    Solution s = newton_solve(sys, x, ctx, opts);
    s.iterations += total;
    return s;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Singular) {
      throw Error(ErrorCode::Singular, std::string(e.what()) + " after gmin stepping (floating node?)");
    }
    if (e.code() != ErrorCode::NonConvergence) throw;
    throw Error(ErrorCode::NonConvergence, std::string("no convergence after gmin stepping: ") + e.what());
  }
}

Solution dc_operating_point(const MnaSystem& sys, const SimOptions& opts,
                            std::optional<std::span<const double>> initial, double time) {
  check_options(opts);
  const std::vector<double> x0 = initial ? std::vector<double>(initial->begin(), initial->end())
                                         : std::vector<double>(sys.size(), 0.0);
  const std::vector<double> mem = initial_memristor_states(sys);
  EvalContext ctx;
  ctx.time = time;
  ctx.mem_x = mem;
  ctx.gmin = opts.gmin;
  return solve_with_gmin_stepping(sys, x0, ctx, opts);
}

}  // namespace pixsim
