#pragma once

// Compact device models and their MNA stamps.
//
// Current conventions: a two-terminal device's current is positive when it
// flows from its first terminal (n+) through the device to its second (n-).
// MOSFET drain current is positive into the drain.

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace pixsim {

// Thermal voltage kT/q at 300 K.
inline constexpr double kThermalVoltage = 0.02585;
// Guard applied to every exponent argument in the device models.
inline constexpr double kExpLimit = 80.0;

// ---------------------------------------------------------------------------
// Waveforms

struct DcWave {
  double value = 0.0;
  bool operator==(const DcWave&) const = default;
};

struct PulseWave {
  double v1 = 0.0, v2 = 0.0;
  double delay = 0.0, rise = 1e-9, fall = 1e-9, width = 0.0, period = 0.0;
  bool operator==(const PulseWave&) const = default;
};

struct PwlWave {
  struct Point {
    double t, v;
    bool operator==(const Point&) const = default;
  };
  std::vector<Point> points;
  bool operator==(const PwlWave&) const = default;
};

// offset + amplitude * sin(2*pi*freq*(t - delay)) for t >= delay.
struct SineWave {
  double offset = 0.0, amplitude = 0.0, freq = 0.0, delay = 0.0;
  bool operator==(const SineWave&) const = default;
};

using Waveform = std::variant<DcWave, PulseWave, PwlWave, SineWave>;

// Throws Error{InvalidArgument} if the waveform violates its invariants.
void check_waveform(const Waveform& w);
double waveform_eval(const Waveform& w, double t);
// Times in (0, tstop] where the waveform has a corner or, for sines, a zero
// crossing. The transient stepper lands on these exactly.
std::vector<double> waveform_breakpoints(const Waveform& w, double tstop);
bool waveform_is_nonnegative(const Waveform& w);

// ---------------------------------------------------------------------------
// Device cards

enum class Polarity { N, P };

struct MosfetCard {
  Polarity polarity = Polarity::N;
  double vth = 0.35;       // V
  double kp = 300e-6;      // A/V^2
  double w = 360e-9;       // m
  double l = 90e-9;        // m
  double n_slope = 1.3;
  double lambda = 0.1;     // 1/V
  double temp_vt = kThermalVoltage;

  static MosfetCard default_n();
  static MosfetCard default_p();
  bool operator==(const MosfetCard&) const = default;
};

enum class WindowKind { None, Joglekar, Biolek };

struct MemristorCard {
  double r_on = 100.0;
  double r_off = 16e3;
  double d = 10e-9;
  double mu_v = 1e-14;
  double x0 = 0.5;
  WindowKind window = WindowKind::Joglekar;
  int p = 2;
  double width = 40e-9;
  double height = 90e-9;
  bool operator==(const MemristorCard&) const = default;
};

struct PhotodiodeCard {
  Waveform iph = DcWave{10e-9};
  double c_pd = 10e-15;
  double i_s = 1e-15;
  bool clamp_enabled = true;
  bool operator==(const PhotodiodeCard&) const = default;
};

struct ResistorCard {
  double r = 1e3;
  bool operator==(const ResistorCard&) const = default;
};

struct CapacitorCard {
  double c = 1e-12;
  std::optional<double> ic;  // initial voltage for transient analysis
  bool operator==(const CapacitorCard&) const = default;
};

struct VSourceCard {
  Waveform wave = DcWave{0.0};
  bool operator==(const VSourceCard&) const = default;
};

struct ISourceCard {
  Waveform wave = DcWave{0.0};
  bool operator==(const ISourceCard&) const = default;
};

// Alternative order matches DeviceKind.
using DeviceCard = std::variant<MosfetCard, MemristorCard, ResistorCard, CapacitorCard,
                                VSourceCard, ISourceCard, PhotodiodeCard>;

enum class DeviceKind { Mosfet, Memristor, Resistor, Capacitor, VSource, ISource, Photodiode };

const char* to_string(DeviceKind kind);
std::size_t terminal_count(DeviceKind kind);

struct DeviceInstance {
  std::string name;
  std::vector<int> terminals;  // node indices, 0 = ground; MOSFET order d g s b
  DeviceCard card;

  DeviceKind kind() const { return static_cast<DeviceKind>(card.index()); }
  bool operator==(const DeviceInstance&) const = default;
};

void check_card(const DeviceCard& card);

// ---------------------------------------------------------------------------
// Memristor (HP linear ion drift)

double memristance(double x, const MemristorCard& card);
// current_sign is only consulted by the Biolek window.
double window_fn(double x, const MemristorCard& card, double current_sign);
double memristor_dxdt(double x, double current, const MemristorCard& card);
// mu_v * r_on / d^2, the drift rate per ampere.
double drift_coefficient(const MemristorCard& card);

// ---------------------------------------------------------------------------
// MOSFET (EKV-style, bulk referenced)

struct MosfetEval {
  double ids = 0.0;
  double gm = 0.0;   // d ids / d vg
  double gds = 0.0;  // d ids / d vd
  double gms = 0.0;  // d ids / d vs
  double gmb = 0.0;  // d ids / d vb
};

double specific_current(const MosfetCard& card);
double mosfet_ids(double vg, double vd, double vs, const MosfetCard& card, double vb = 0.0);
MosfetEval mosfet_conductances(double vg, double vd, double vs, const MosfetCard& card,
                               double vb = 0.0);

// ---------------------------------------------------------------------------
// Junction diode

double diode_current(double vd, double i_s, double vt = kThermalVoltage);
double diode_conductance(double vd, double i_s, double vt = kThermalVoltage);

// ---------------------------------------------------------------------------
// MNA stamps
//
// Rows/columns are unknown indices; kGround entries are dropped on insertion.

inline constexpr int kGround = -1;

struct Stamp {
  struct Entry {
    int row, col;
    double g;
  };
  struct Injection {
    int row;
    double amps;
  };
  std::vector<Entry> conductances;
  std::vector<Injection> rhs;

  void add(int row, int col, double g);
  void inject(int row, double amps);
  // Conductance g between a and b.
  void conductance(int a, int b, double g);
  // Independent current flowing a -> b through the element.
  void current(int a, int b, double amps);
  bool empty() const { return conductances.empty() && rhs.empty(); }
};

enum class Integrator { BackwardEuler, Trapezoidal };

// DC analysis is signalled by dc == true; dt is then ignored.
struct IntegratorContext {
  bool dc = true;
  double dt = 0.0;
  Integrator method = Integrator::Trapezoidal;
};

// Companion-model memory of a capacitive branch at the last accepted point.
struct CapacitorHistory {
  double v = 0.0;
  double i = 0.0;
};

Stamp stamp_resistor(int a, int b, double ohms);
Stamp stamp_capacitor(int a, int b, double farads, const IntegratorContext& ctx,
                      const CapacitorHistory& hist);
Stamp stamp_memristor(int a, int b, const MemristorCard& card, double x);
Stamp stamp_isource(int a, int b, double amps);
Stamp stamp_vsource(int a, int b, int branch, double volts);
// Unknown indices in d g s b order; volts are the candidate terminal voltages.
Stamp stamp_mosfet(std::span<const int, 4> idx, std::span<const double, 4> volts,
                   const MosfetCard& card);
// Cathode a, anode b; va/vb are candidate voltages.
Stamp stamp_photodiode(int a, int b, double va, double vb, double iph,
                       const PhotodiodeCard& card, const IntegratorContext& ctx,
                       const CapacitorHistory& hist);

// Capacitor branch current implied by the companion model at voltage v.
double capacitor_current(double farads, double v, const IntegratorContext& ctx,
                         const CapacitorHistory& hist);

}  // namespace pixsim
