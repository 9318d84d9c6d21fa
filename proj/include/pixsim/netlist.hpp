#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pixsim/devices.hpp"

namespace pixsim {

struct TranDirective {
  double dt = 0.0;
  double tstop = 0.0;
  bool operator==(const TranDirective&) const = default;
};

struct DcDirective {
  std::string source;
  double start = 0.0;
  double stop = 0.0;
  int points = 0;
  bool decade = false;
  bool operator==(const DcDirective&) const = default;
};

// A flat netlist. Node 0 is ground ("0"); node labels are stored lower-case.
// Device names are unique ignoring case.
class Circuit {
public:
  Circuit();
  explicit Circuit(std::string name);

  std::string name;
  std::map<std::string, double> params;
  std::optional<TranDirective> tran;
  std::optional<DcDirective> dc;

  // Returns the index for label, creating the node on first use.
  int node(std::string_view label);
  std::optional<int> find_node(std::string_view label) const;
  const std::string& node_name(int index) const { return nodes_.at(static_cast<std::size_t>(index)); }
  std::size_t node_count() const { return nodes_.size(); }

  // Throws DuplicateName, or InvalidArgument for a malformed instance.
  DeviceInstance& add_device(DeviceInstance dev);
  // Convenience: terminal labels instead of indices.
  DeviceInstance& add(std::string dev_name, std::initializer_list<std::string_view> terminals,
                      DeviceCard card);

  const std::vector<DeviceInstance>& devices() const { return devices_; }
  std::vector<DeviceInstance>& devices() { return devices_; }

  const DeviceInstance* find_device(std::string_view dev_name) const;
  DeviceInstance* find_device(std::string_view dev_name);

  // Devices usable as sweep variables: independent current sources and
  // photodiodes.
  std::vector<std::string> sweepable_sources() const;

private:
  std::vector<std::string> nodes_;
  std::unordered_map<std::string, int> node_index_;
  std::vector<DeviceInstance> devices_;
};

std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

// Compares devices by name, kind, terminal labels and card; node numbering
// is irrelevant.
bool structurally_equal(const Circuit& a, const Circuit& b);

// ---------------------------------------------------------------------------
// Text format

// Throws Error with code Syntax, UnknownDevicePrefix or DuplicateName; line and
// column are 1-based.
Circuit parse(std::string_view text);
Circuit parse_file(const std::string& path);
std::string serialize(const Circuit& c);

// Parses a source specification as accepted after "V<name> n+ n-", e.g.
// "DC 1.2", "PULSE(0 1.2 1u 10n 10n 5u 20u)", "PWL(0 0 1u 1)", "SIN(0 1 1k)".
Waveform parse_waveform(std::string_view text);
std::string format_waveform(const Waveform& w);
// Engineering-notation number ("10k", "1.5meg", "3p").
double parse_number(std::string_view text);
std::string format_number(double v);

// ---------------------------------------------------------------------------
// Validation

enum class DiagnosticKind { EmptyCircuit, FloatingNode, VoltageSourceLoop, UndefinedNode, UnknownSource };

struct Diagnostic {
  DiagnosticKind kind;
  std::string subject;  // node label or device name
  std::string message;
};

const char* to_string(DiagnosticKind kind);

std::vector<Diagnostic> validate(const Circuit& c);

// ---------------------------------------------------------------------------
// Reference pixel circuits

enum class Builtin { Pixel3tLog, Pixel2tm, Pixel4tLinlog, Pixel3tm };

struct BuiltinOptions {
  double vdd = 1.2;
  double iph = 10e-9;
  double ibias = 10e-6;
  double vbias = 0.45;         // gate bias of the weak-inversion device (4T)
  double c_couple = 1e-12;     // capacitor paired with the memristor
  PulseWave reset{0.0, 1.2, 1e-6, 10e-9, 10e-9, 5e-6, 20e-6};
};

Circuit builtin(Builtin which, const BuiltinOptions& opts = {});
const char* builtin_name(Builtin which);
std::optional<Builtin> builtin_from_name(std::string_view name);
std::vector<std::string> builtin_names();

// Device names used by every builtin.
inline constexpr const char* kPhotodiodeName = "photo";
inline constexpr const char* kResetSourceName = "VRST";
inline constexpr const char* kSupplyName = "VDD";
inline constexpr const char* kOutputNode = "out";
inline constexpr const char* kPhotoNode = "pd";

}  // namespace pixsim
