#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pixsim/analysis.hpp"
#include "pixsim/error.hpp"

namespace pixsim {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<DeviceKind> kind_from_name(std::string_view s) {
  for (DeviceKind k : {DeviceKind::Mosfet, DeviceKind::Memristor, DeviceKind::Resistor, DeviceKind::Capacitor,
                       DeviceKind::VSource, DeviceKind::ISource, DeviceKind::Photodiode}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

}  // namespace

AreaConfig AreaConfig::defaults() {
  AreaConfig c;
  c.mosfet_overhead = 25.0;
  c.capacitor_density_ff_per_um2 = 5.0;
  for (DeviceKind k : {DeviceKind::Resistor, DeviceKind::VSource, DeviceKind::ISource, DeviceKind::Photodiode}) {
    c.fixed_um2[k] = 0.0;
  }
  return c;
}

AreaConfig parse_area_config(std::string_view text) {
  AreaConfig cfg;
  cfg.calibrated = true;
  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    auto fail = [&](const std::string& m) { throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": " + m, line_no); };
    std::string_view line = raw;
    if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = to_lower(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    std::string key = to_lower(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (!section.empty()) key = section + "." + key;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v) || v < 0.0) {
      fail("value for '" + key + "' must be a non-negative number");
    }

    if (key == "mosfet.overhead") {
      cfg.mosfet_overhead = v;
    } else if (key == "capacitor.density_ff_per_um2") {
      if (v <= 0.0) fail("capacitor density must be positive");
      cfg.capacitor_density_ff_per_um2 = v;
    } else if (key.rfind("instance.", 0) == 0) {
      const std::string rest = key.substr(9);
      const std::string suffix = ".area_um2";
      if (rest.size() <= suffix.size() || rest.compare(rest.size() - suffix.size(), suffix.size(), suffix) != 0 ||
          rest.find('.') == rest.size() - suffix.size()) {
        fail("instance keys look like instance.<circuit>.<device>.area_um2");
      }
      cfg.instance_um2[rest.substr(0, rest.size() - suffix.size())] = v;
    } else if (const auto dot = key.find('.'); dot != std::string::npos && key.substr(dot) == ".area_um2") {
      const auto kind = kind_from_name(key.substr(0, dot));
      if (!kind) fail("unknown device kind '" + key.substr(0, dot) + "'");
      cfg.fixed_um2[*kind] = v;
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  return cfg;
}

AreaConfig load_area_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open area config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_area_config(ss.str());
}

AreaReport area_report(const Circuit& c, const AreaConfig& cfg) {
  AreaReport r;
  r.circuit = c.name;
  r.calibrated = cfg.calibrated;
  for (const auto& d : c.devices()) {
    const DeviceKind kind = d.kind();
    double area = 0.0;
    if (auto it = cfg.instance_um2.find(to_lower(c.name) + "." + to_lower(d.name)); it != cfg.instance_um2.end()) {
      area = it->second;
    } else if (auto fx = cfg.fixed_um2.find(kind); fx != cfg.fixed_um2.end()) {
      area = fx->second;
    } else if (kind == DeviceKind::Mosfet && cfg.mosfet_overhead) {
      const auto& m = std::get<MosfetCard>(d.card);
      area = m.w * 1e6 * m.l * 1e6 * *cfg.mosfet_overhead;
    } else if (kind == DeviceKind::Memristor) {
      const auto& m = std::get<MemristorCard>(d.card);
      area = m.width * 1e6 * m.height * 1e6;
    } else if (kind == DeviceKind::Capacitor && cfg.capacitor_density_ff_per_um2) {
      area = std::get<CapacitorCard>(d.card).c * 1e15 / *cfg.capacitor_density_ff_per_um2;
    } else {
      throw Error(ErrorCode::MissingGeometry, std::string("area config has no entry for device kind '") +
                                                  to_string(kind) + "' (device " + d.name + ")");
    }
    r.rows.push_back({d.name, kind, area});
    r.total_um2 += area;
  }
  return r;
}

}  // namespace pixsim
