#include <algorithm>
#include <cctype>
#include <numeric>

#include "pixsim/error.hpp"
#include "pixsim/netlist.hpp"

namespace pixsim {

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

Circuit::Circuit() : Circuit(std::string{}) {}

Circuit::Circuit(std::string n) : name(std::move(n)) {
  nodes_.push_back("0");
  node_index_.emplace("0", 0);
}

int Circuit::node(std::string_view label) {
  std::string key = to_lower(label);
  if (key == "gnd") key = "0";
  if (auto it = node_index_.find(key); it != node_index_.end()) return it->second;
  const int idx = static_cast<int>(nodes_.size());
  nodes_.push_back(key);
  node_index_.emplace(std::move(key), idx);
  return idx;
}

std::optional<int> Circuit::find_node(std::string_view label) const {
  std::string key = to_lower(label);
  if (key == "gnd") key = "0";
  if (auto it = node_index_.find(key); it != node_index_.end()) return it->second;
  return std::nullopt;
}

DeviceInstance& Circuit::add_device(DeviceInstance dev) {
  if (dev.name.empty() ||
      std::any_of(dev.name.begin(), dev.name.end(),
                  [](char c) { return std::isspace(static_cast<unsigned char>(c)) || c == '=' || c == '(' || c == ')'; })) {
    throw Error(ErrorCode::InvalidArgument, "invalid device name '" + dev.name + "'");
  }
  const DeviceKind kind = dev.kind();
  static constexpr char kPrefix[] = {'m', 0, 'r', 'c', 'v', 'i', 0};
  const char prefix = kPrefix[static_cast<int>(kind)];
  if (prefix != 0 && std::tolower(static_cast<unsigned char>(dev.name[0])) != prefix) {
    throw Error(ErrorCode::InvalidArgument, std::string(to_string(kind)) + " name '" + dev.name +
                                                "' must start with '" + prefix + "'");
  }
  if (dev.terminals.size() != terminal_count(kind)) {
    throw Error(ErrorCode::InvalidArgument, "device " + dev.name + " has wrong terminal count");
  }
  if (find_device(dev.name) != nullptr) {
    throw Error(ErrorCode::DuplicateName, "duplicate device name '" + dev.name + "'");
  }
  check_card(dev.card);
  devices_.push_back(std::move(dev));
  return devices_.back();
}

DeviceInstance& Circuit::add(std::string dev_name, std::initializer_list<std::string_view> terminals,
                             DeviceCard card) {
  DeviceInstance d{std::move(dev_name), {}, std::move(card)};
  for (auto t : terminals) d.terminals.push_back(node(t));
  return add_device(std::move(d));
}

const DeviceInstance* Circuit::find_device(std::string_view dev_name) const {
  for (const auto& d : devices_) {
    if (iequals(d.name, dev_name)) return &d;
  }
  return nullptr;
}

DeviceInstance* Circuit::find_device(std::string_view dev_name) {
  return const_cast<DeviceInstance*>(std::as_const(*this).find_device(dev_name));
}

std::vector<std::string> Circuit::sweepable_sources() const {
  std::vector<std::string> out;
  for (const auto& d : devices_) {
    if (d.kind() == DeviceKind::ISource || d.kind() == DeviceKind::Photodiode) out.push_back(d.name);
  }
  return out;
}

bool structurally_equal(const Circuit& a, const Circuit& b) {
  if (a.name != b.name || a.params != b.params || a.tran != b.tran || a.dc != b.dc) return false;
  if (a.devices().size() != b.devices().size()) return false;
  for (std::size_t i = 0; i < a.devices().size(); ++i) {
    const auto& da = a.devices()[i];
    const auto& db = b.devices()[i];
    if (da.name != db.name || da.card != db.card || da.terminals.size() != db.terminals.size()) {
      return false;
    }
    for (std::size_t t = 0; t < da.terminals.size(); ++t) {
      if (a.node_name(da.terminals[t]) != b.node_name(db.terminals[t])) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Validation

const char* to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::EmptyCircuit: return "EmptyCircuit";
    case DiagnosticKind::FloatingNode: return "FloatingNode";
    case DiagnosticKind::VoltageSourceLoop: return "VoltageSourceLoop";
    case DiagnosticKind::UndefinedNode: return "UndefinedNode";
    case DiagnosticKind::UnknownSource: return "UnknownSource";
  }
  return "Unknown";
}

namespace {

class DisjointSet {
public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  // False when a and b were already joined.
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

private:
  std::vector<std::size_t> parent_;
};

bool conducts_at_dc(const DeviceInstance& d) {
  switch (d.kind()) {
    case DeviceKind::Resistor:
    case DeviceKind::Memristor:
    case DeviceKind::VSource:
    case DeviceKind::Mosfet:
      return true;
    case DeviceKind::Photodiode:
      return std::get<PhotodiodeCard>(d.card).clamp_enabled;
    case DeviceKind::Capacitor:
    case DeviceKind::ISource:
      return false;
  }
  return false;
}

}  // namespace

std::vector<Diagnostic> validate(const Circuit& c) {
  std::vector<Diagnostic> out;
  if (c.devices().empty()) {
    out.push_back({DiagnosticKind::EmptyCircuit, c.name, "circuit has no devices"});
    return out;
  }

  const std::size_t n = c.node_count();
  bool undefined = false;
  for (const auto& d : c.devices()) {
    for (int t : d.terminals) {
      if (t < 0 || static_cast<std::size_t>(t) >= n) {
        out.push_back({DiagnosticKind::UndefinedNode, d.name,
                       "device " + d.name + " refers to undefined node index " + std::to_string(t)});
        undefined = true;
      }
    }
  }
  if (undefined) return out;

  DisjointSet sources(n);
  for (const auto& d : c.devices()) {
    if (d.kind() != DeviceKind::VSource) continue;
    if (!sources.unite(static_cast<std::size_t>(d.terminals[0]), static_cast<std::size_t>(d.terminals[1]))) {
      out.push_back({DiagnosticKind::VoltageSourceLoop, d.name,
                     "voltage source " + d.name + " closes a loop of voltage sources"});
    }
  }

  DisjointSet paths(n);
  for (const auto& d : c.devices()) {
    if (!conducts_at_dc(d)) continue;
    // MOSFET: only the channel (d-s) conducts.
    paths.unite(static_cast<std::size_t>(d.terminals[0]),
                static_cast<std::size_t>(d.kind() == DeviceKind::Mosfet ? d.terminals[2] : d.terminals[1]));
  }
  // Floating: a dangling node (fewer than two terminals) with no DC path to
  // ground. Better-connected nodes without a DC path are held by gmin.
  std::vector<int> uses(n, 0);
  for (const auto& d : c.devices()) {
    for (int t : d.terminals) ++uses[static_cast<std::size_t>(t)];
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (uses[i] < 2 && paths.find(i) != paths.find(0)) {
      out.push_back({DiagnosticKind::FloatingNode, c.node_name(static_cast<int>(i)),
                     "node " + c.node_name(static_cast<int>(i)) + " is dangling with no DC path to ground"});
    }
  }

  if (c.dc) {
    const DeviceInstance* src = c.find_device(c.dc->source);
    if (src == nullptr || (src->kind() != DeviceKind::ISource && src->kind() != DeviceKind::Photodiode)) {
      out.push_back({DiagnosticKind::UnknownSource, c.dc->source,
                     ".dc refers to unknown source '" + c.dc->source + "'"});
    }
  }
  return out;
}

}  // namespace pixsim
