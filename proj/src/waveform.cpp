#include <algorithm>
#include <cmath>
#include <numbers>

#include "pixsim/devices.hpp"
#include "pixsim/error.hpp"

namespace pixsim {

namespace {

[[noreturn]] void bad(const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); }

double pulse_eval(const PulseWave& p, double t) {
  if (t < p.delay) return p.v1;
  double local = t - p.delay;
  if (p.period > 0.0) local = std::fmod(local, p.period);
  if (local < p.rise) return p.v1 + (p.v2 - p.v1) * local / p.rise;
  local -= p.rise;
  if (local <= p.width) return p.v2;
  local -= p.width;
  if (local < p.fall) return p.v2 + (p.v1 - p.v2) * local / p.fall;
  return p.v1;
}

double pwl_eval(const PwlWave& w, double t) {
  const auto& pts = w.points;
  if (pts.empty()) return 0.0;
  if (t <= pts.front().t) return pts.front().v;
  if (t >= pts.back().t) return pts.back().v;
  auto hi = std::upper_bound(pts.begin(), pts.end(), t,
                             [](double tt, const PwlWave::Point& p) { return tt < p.t; });
  auto lo = hi - 1;
  const double f = (t - lo->t) / (hi->t - lo->t);
  return lo->v + f * (hi->v - lo->v);
}

}  // namespace

void check_waveform(const Waveform& w) {
  std::visit(
      [](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, DcWave>) {
          if (!std::isfinite(x.value)) bad("DC value must be finite");
        } else if constexpr (std::is_same_v<T, PulseWave>) {
          if (!(x.rise > 0) || !(x.fall > 0)) bad("PULSE rise and fall must be > 0");
          if (!(x.width >= 0) || !(x.delay >= 0)) bad("PULSE delay and width must be >= 0");
          if (x.period != 0.0 && !(x.period >= x.width + x.rise + x.fall)) {
            bad("PULSE period must be >= width + rise + fall");
          }
        } else if constexpr (std::is_same_v<T, PwlWave>) {
          if (x.points.empty()) bad("PWL needs at least one point");
          for (std::size_t i = 1; i < x.points.size(); ++i) {
            if (!(x.points[i].t > x.points[i - 1].t)) bad("PWL time points must be strictly increasing");
          }
        } else if constexpr (std::is_same_v<T, SineWave>) {
          if (!(x.freq > 0) || !(x.delay >= 0)) bad("SIN frequency must be > 0");
        }
      },
      w);
}

double waveform_eval(const Waveform& w, double t) {
  return std::visit(
      [t](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, DcWave>) {
          return x.value;
        } else if constexpr (std::is_same_v<T, PulseWave>) {
          return pulse_eval(x, t);
        } else if constexpr (std::is_same_v<T, PwlWave>) {
          return pwl_eval(x, t);
        } else {
          if (t < x.delay) return x.offset;
          return x.offset + x.amplitude * std::sin(2.0 * std::numbers::pi * x.freq * (t - x.delay));
        }
      },
      w);
}

std::vector<double> waveform_breakpoints(const Waveform& w, double tstop) {
  std::vector<double> out;
  auto push = [&](double t) {
    if (t > 0.0 && t <= tstop) out.push_back(t);
  };
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, PulseWave>) {
          const double edges[4] = {0.0, x.rise, x.rise + x.width, x.rise + x.width + x.fall};
          for (int k = 0;; ++k) {
            const double base = x.delay + k * x.period;
            if (base > tstop) break;
            for (double e : edges) push(base + e);
            if (x.period <= 0.0) break;
          }
        } else if constexpr (std::is_same_v<T, PwlWave>) {
          for (const auto& p : x.points) push(p.t);
        } else if constexpr (std::is_same_v<T, SineWave>) {
          push(x.delay);
          const double half = 0.5 / x.freq;
          for (int k = 1;; ++k) {
            const double t = x.delay + k * half;
            if (t > tstop) break;
            push(t);
          }
        }
      },
      w);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool waveform_is_nonnegative(const Waveform& w) {
  return std::visit(
      [](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, DcWave>) {
          return x.value >= 0.0;
        } else if constexpr (std::is_same_v<T, PulseWave>) {
          return x.v1 >= 0.0 && x.v2 >= 0.0;
        } else if constexpr (std::is_same_v<T, PwlWave>) {
          return std::all_of(x.points.begin(), x.points.end(),
                             [](const auto& p) { return p.v >= 0.0; });
        } else {
          return x.offset - std::abs(x.amplitude) >= 0.0;
        }
      },
      w);
}

}  // namespace pixsim
