#include <cmath>
#include <limits>

#include "pixsim/engine.hpp"
#include "pixsim/error.hpp"

namespace pixsim {

namespace {

SweepResult empty_result(const MnaSystem& sys, std::string_view source, std::span<const double> values) {
  const DeviceInstance* d = sys.circuit().find_device(source);
  if (d == nullptr || (d->kind() != DeviceKind::ISource && d->kind() != DeviceKind::Photodiode)) {
    std::string valid;
    for (const auto& n : sys.circuit().sweepable_sources()) valid += (valid.empty() ? "" : ", ") + n;
    throw Error(ErrorCode::InvalidArgument,
                "unknown sweep source '" + std::string(source) + "' (valid: " + valid + ")");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || (i > 0 && !(values[i] > values[i - 1]))) {
      throw Error(ErrorCode::InvalidArgument, "sweep values must be finite and strictly increasing");
    }
  }
  SweepResult r;
  r.source = d->name;
  r.unknown_names = sys.unknown_names();
  r.memristor_names = sys.memristor_names();
  r.values.assign(values.begin(), values.end());
  return r;
}

void push_failure(const MnaSystem& sys, SweepResult& r) {
  r.unknowns.emplace_back(sys.size(), std::numeric_limits<double>::quiet_NaN());
  r.mem_states.emplace_back(sys.memristor_count(), std::numeric_limits<double>::quiet_NaN());
  r.converged.push_back(0);
}

}  // namespace

std::vector<double> SweepResult::trace(std::string_view name) const {
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
  throw Error(ErrorCode::InvalidArgument, "no trace named '" + std::string(name) + "'");
}

SweepResult dc_sweep(const MnaSystem& sys, std::string_view source, std::span<const double> values,
                     const SimOptions& opts) {
  check_options(opts);
  SweepResult r = empty_result(sys, source, values);
  MnaSystem work = sys;
  std::optional<std::vector<double>> warm;
  for (double v : values) {
    work.set_source_dc(source, v);
    try {
      Solution s = warm ? dc_operating_point(work, opts, std::span<const double>(*warm))
                        : dc_operating_point(work, opts);
      warm = s.x;
      r.unknowns.push_back(std::move(s.x));
      r.mem_states.push_back(std::move(s.mem_states));
      r.converged.push_back(1);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonConvergence && e.code() != ErrorCode::Singular) throw;
      push_failure(work, r);
    }
  }
  return r;
}

SweepResult photoresponse_sweep(const MnaSystem& sys, std::string_view source, std::span<const double> values,
                                double t_sample, const SimOptions& opts) {
  check_options(opts);
  SweepResult r = empty_result(sys, source, values);
  MnaSystem work = sys;
  for (double v : values) {
    work.set_source_dc(source, v);
    try {
      TransientResult tr = transient(work, t_sample, opts);
      r.unknowns.push_back(tr.unknowns.back());
      r.mem_states.push_back(tr.mem_states.back());
      r.converged.push_back(1);
      if (opts.carry_state) work.set_memristor_x0(tr.mem_states.back());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonConvergence && e.code() != ErrorCode::Singular &&
          e.code() != ErrorCode::StepUnderflow) {
        throw;
      }
      push_failure(work, r);
    }
  }
  return r;
}

std::vector<double> log_space(double from, double to, int per_decade) {
  if (!(from > 0.0) || !(to > from) || per_decade < 1) {
    throw Error(ErrorCode::InvalidArgument, "log_space needs 0 < from < to and per_decade >= 1");
  }
  const double lo = std::log10(from);
  const double decades = std::log10(to) - lo;
  const auto steps = static_cast<long>(std::llround(decades * per_decade));
  std::vector<double> out;
  out.push_back(from);
  for (long k = 1; k < steps; ++k) out.push_back(std::pow(10.0, lo + static_cast<double>(k) / per_decade));
  if (steps >= 1) out.push_back(to);
  return out;
}

}  // namespace pixsim
