#include "pixsim/devices.hpp"

#include <algorithm>
#include <cmath>

#include "pixsim/error.hpp"

namespace pixsim {

namespace {

double guarded_exp(double z) { return std::exp(std::clamp(z, -kExpLimit, kExpLimit)); }

// ln(1 + e^z) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(guarded_exp(-std::abs(z))); }

double sigmoid(double z) {
  const double e = guarded_exp(-std::abs(z));
  return z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
}

// EKV interpolation: normalized current for a pinch-off-to-terminal difference u.
double ekv_f(double u, double vt) {
  const double s = softplus(u / (2.0 * vt));
  return s * s;
}

double ekv_df(double u, double vt) {
  const double z = u / (2.0 * vt);
  return softplus(z) * sigmoid(z) / vt;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// N-channel evaluation with a positive threshold.
MosfetEval eval_n(double vg, double vd, double vs, double vb, const MosfetCard& c, double vth) {
  const double vt = c.temp_vt;
  const double n = c.n_slope;
  const double ispec = specific_current(c);
  const double vp = (vg - vb - vth) / n;
  const double uf = vp - (vs - vb);
  const double ur = vp - (vd - vb);
  const double ff = ekv_f(uf, vt);
  const double fr = ekv_f(ur, vt);
  const double dff = ekv_df(uf, vt);
  const double dfr = ekv_df(ur, vt);

  const double vds = vd - vs;
  const double clm = 1.0 + c.lambda * std::abs(vds);
  const double core = ispec * (ff - fr);
  const double dclm = c.lambda * sign_of(vds);

  MosfetEval e;
  e.ids = core * clm;
  e.gm = ispec * (dff - dfr) / n * clm;
  e.gds = ispec * dfr * clm + core * dclm;
  e.gms = -ispec * dff * clm - core * dclm;
  e.gmb = -(e.gm + e.gds + e.gms);
  return e;
}

}  // namespace

// ---------------------------------------------------------------------------

MosfetCard MosfetCard::default_n() { return MosfetCard{}; }

MosfetCard MosfetCard::default_p() {
  MosfetCard c;
  c.polarity = Polarity::P;
  c.vth = -0.35;
  c.kp = 120e-6;
  c.n_slope = 1.4;
  return c;
}

const char* to_string(DeviceKind kind) {
  switch (kind) {
    case DeviceKind::Mosfet: return "mosfet";
    case DeviceKind::Memristor: return "memristor";
    case DeviceKind::Resistor: return "resistor";
    case DeviceKind::Capacitor: return "capacitor";
    case DeviceKind::VSource: return "vsource";
    case DeviceKind::ISource: return "isource";
    case DeviceKind::Photodiode: return "photodiode";
  }
  return "unknown";
}

std::size_t terminal_count(DeviceKind kind) { return kind == DeviceKind::Mosfet ? 4 : 2; }

void check_card(const DeviceCard& card) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, MosfetCard>) {
          if (!(c.w > 0) || !(c.l > 0)) fail("mosfet: W and L must be positive");
          if (!(c.kp > 0)) fail("mosfet: KP must be positive");
          if (!(c.n_slope >= 1)) fail("mosfet: N must be >= 1");
          if (!(c.temp_vt > 0)) fail("mosfet: VT must be positive");
          if (!std::isfinite(c.vth) || !std::isfinite(c.lambda)) fail("mosfet: non-finite parameter");
        } else if constexpr (std::is_same_v<T, MemristorCard>) {
          if (!(c.r_on > 0) || !(c.r_on < c.r_off)) fail("memristor: need 0 < RON < ROFF");
          if (!(c.x0 >= 0 && c.x0 <= 1)) fail("memristor: X0 must lie in [0, 1]");
          if (!(c.d > 0)) fail("memristor: D must be positive");
          if (!(c.mu_v > 0)) fail("memristor: MU must be positive");
          if (c.p < 1) fail("memristor: P must be an integer >= 1");
          if (!(c.width > 0) || !(c.height > 0)) fail("memristor: footprint must be positive");
        } else if constexpr (std::is_same_v<T, ResistorCard>) {
          if (!(c.r > 0) || !std::isfinite(c.r)) fail("resistor: value must be positive");
        } else if constexpr (std::is_same_v<T, CapacitorCard>) {
          if (!(c.c >= 0) || !std::isfinite(c.c)) fail("capacitor: value must be >= 0");
        } else if constexpr (std::is_same_v<T, VSourceCard> || std::is_same_v<T, ISourceCard>) {
          check_waveform(c.wave);
        } else if constexpr (std::is_same_v<T, PhotodiodeCard>) {
          check_waveform(c.iph);
          if (!waveform_is_nonnegative(c.iph)) fail("photodiode: IPH must be >= 0");
          if (!(c.c_pd >= 0)) fail("photodiode: CPD must be >= 0");
          if (!(c.i_s >= 0)) fail("photodiode: IS must be >= 0");
        }
      },
      card);
}

// ---------------------------------------------------------------------------
// Memristor

double memristance(double x, const MemristorCard& card) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::StateOutOfRange, "memristor state " + std::to_string(x) + " outside [0, 1]");
  }
  return card.r_on * x + card.r_off * (1.0 - x);
}

double window_fn(double x, const MemristorCard& card, double current_sign) {
  const int e = 2 * card.p;
  switch (card.window) {
    case WindowKind::None:
      return 1.0;
    case WindowKind::Joglekar:
      return 1.0 - std::pow(2.0 * x - 1.0, e);
    case WindowKind::Biolek: {
      // stp(-i): drift toward x = 1 is pinned at 1, toward x = 0 at 0.
      const double target = current_sign >= 0.0 ? 0.0 : 1.0;
      return 1.0 - std::pow(x - target, e);
    }
  }
  return 1.0;
}

double drift_coefficient(const MemristorCard& card) {
  return card.mu_v * card.r_on / (card.d * card.d);
}

double memristor_dxdt(double x, double current, const MemristorCard& card) {
  if (current == 0.0) return 0.0;
  return drift_coefficient(card) * current * window_fn(x, card, current);
}

// ---------------------------------------------------------------------------
// MOSFET

double specific_current(const MosfetCard& card) {
  const double beta = card.kp * card.w / card.l;
  return 2.0 * card.n_slope * beta * card.temp_vt * card.temp_vt;
}

MosfetEval mosfet_conductances(double vg, double vd, double vs, const MosfetCard& card, double vb) {
  if (card.polarity == Polarity::N) return eval_n(vg, vd, vs, vb, card, card.vth);
  // P device: mirror all voltages and the current. Derivatives keep their sign.
  MosfetEval e = eval_n(-vg, -vd, -vs, -vb, card, -card.vth);
  e.ids = -e.ids;
  return e;
}

double mosfet_ids(double vg, double vd, double vs, const MosfetCard& card, double vb) {
  return mosfet_conductances(vg, vd, vs, card, vb).ids;
}

// ---------------------------------------------------------------------------
// Diode; linear continuation past the exponent guard keeps Newton moving.

double diode_current(double vd, double i_s, double vt) {
  const double z = vd / vt;
  if (z > kExpLimit) {
    const double e = std::exp(kExpLimit);
    return i_s * (e * (1.0 + (z - kExpLimit)) - 1.0);
  }
  return i_s * (std::exp(std::max(z, -kExpLimit)) - 1.0);
}

double diode_conductance(double vd, double i_s, double vt) {
  const double z = std::min(vd / vt, kExpLimit);
  return i_s / vt * std::exp(std::max(z, -kExpLimit));
}

// ---------------------------------------------------------------------------
// Stamps

void Stamp::add(int row, int col, double g) {
  if (row == kGround || col == kGround || g == 0.0) return;
  conductances.push_back({row, col, g});
}

void Stamp::inject(int row, double amps) {
  if (row == kGround || amps == 0.0) return;
  rhs.push_back({row, amps});
}

void Stamp::conductance(int a, int b, double g) {
  add(a, a, g);
  add(b, b, g);
  add(a, b, -g);
  add(b, a, -g);
}

void Stamp::current(int a, int b, double amps) {
  inject(a, -amps);
  inject(b, amps);
}

Stamp stamp_resistor(int a, int b, double ohms) {
  Stamp s;
  s.conductance(a, b, 1.0 / ohms);
  return s;
}

namespace {

// Companion conductance and history current for a capacitive branch.
std::pair<double, double> companion(double farads, const IntegratorContext& ctx,
                                    const CapacitorHistory& hist) {
  if (ctx.method == Integrator::BackwardEuler) {
    const double g = farads / ctx.dt;
    return {g, -g * hist.v};
  }
  const double g = 2.0 * farads / ctx.dt;
  return {g, -g * hist.v - hist.i};
}

}  // namespace

Stamp stamp_capacitor(int a, int b, double farads, const IntegratorContext& ctx,
                      const CapacitorHistory& hist) {
  Stamp s;
  if (ctx.dc || farads == 0.0) return s;
  const auto [g, ieq] = companion(farads, ctx, hist);
  s.conductance(a, b, g);
  s.current(a, b, ieq);
  return s;
}

double capacitor_current(double farads, double v, const IntegratorContext& ctx,
                         const CapacitorHistory& hist) {
  if (ctx.dc || farads == 0.0) return 0.0;
  const auto [g, ieq] = companion(farads, ctx, hist);
  return g * v + ieq;
}

Stamp stamp_memristor(int a, int b, const MemristorCard& card, double x) {
  Stamp s;
  s.conductance(a, b, 1.0 / memristance(x, card));
  return s;
}

Stamp stamp_isource(int a, int b, double amps) {
  Stamp s;
  s.current(a, b, amps);
  return s;
}

Stamp stamp_vsource(int a, int b, int branch, double volts) {
  Stamp s;
  s.add(a, branch, 1.0);
  s.add(b, branch, -1.0);
  s.add(branch, a, 1.0);
  s.add(branch, b, -1.0);
  s.inject(branch, volts);
  return s;
}

Stamp stamp_mosfet(std::span<const int, 4> idx, std::span<const double, 4> v,
                   const MosfetCard& card) {
  const double vd = v[0], vg = v[1], vs = v[2], vb = v[3];
  const MosfetEval e = mosfet_conductances(vg, vd, vs, card, vb);
  const double g[4] = {e.gds, e.gm, e.gms, e.gmb};
  double ieq = e.ids;
  for (int k = 0; k < 4; ++k) ieq -= g[k] * v[k];

  Stamp s;
  const int d = idx[0], src = idx[2];
  for (int k = 0; k < 4; ++k) {
    s.add(d, idx[k], g[k]);
    s.add(src, idx[k], -g[k]);
  }
  s.current(d, src, ieq);
  return s;
}

Stamp stamp_photodiode(int a, int b, double va, double vb, double iph,
                       const PhotodiodeCard& card, const IntegratorContext& ctx,
                       const CapacitorHistory& hist) {
  Stamp s = stamp_capacitor(a, b, card.c_pd, ctx, hist);
  s.current(a, b, iph);
  if (card.clamp_enabled && card.i_s > 0.0) {
    const double vd = vb - va;
    const double gd = diode_conductance(vd, card.i_s);
    const double ieq = diode_current(vd, card.i_s) - gd * vd;
    s.conductance(a, b, gd);
    s.current(b, a, ieq);
  }
  return s;
}

}  // namespace pixsim
