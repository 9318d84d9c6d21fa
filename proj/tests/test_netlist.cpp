#include <doctest.h>

#include <algorithm>
#include <random>

#include "pixsim/error.hpp"
#include "pixsim/netlist.hpp"
#include "random_circuit.hpp"

using namespace pixsim;
using pixsim::testing::random_circuit;

namespace {

std::size_t count_kind(const Circuit& c, DeviceKind k) {
  return static_cast<std::size_t>(
      std::count_if(c.devices().begin(), c.devices().end(), [&](const DeviceInstance& d) { return d.kind() == k; }));
}

bool has_diag(const std::vector<Diagnostic>& ds, DiagnosticKind k, const std::string& subject = "") {
  return std::any_of(ds.begin(), ds.end(),
                     [&](const Diagnostic& d) { return d.kind == k && (subject.empty() || d.subject == subject); });
}

Error parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected a parse error for: " << text);
  return Error(ErrorCode::Syntax, "");
}

}  // namespace

TEST_CASE("parse a resistor with an engineering suffix") {
  const auto c = parse("R1 a 0 1k\n.end\n");
  REQUIRE(c.devices().size() == 1);
  CHECK(std::get<ResistorCard>(c.devices()[0].card).r == 1000.0);
}

TEST_CASE("parse a memristor card") {
  const auto c = parse("YMEM m1 a 0 RON=100 ROFF=16k\n");
  REQUIRE(c.devices().size() == 1);
  const auto& m = std::get<MemristorCard>(c.devices()[0].card);
  CHECK(m.r_on == 100.0);
  CHECK(m.r_off == 16000.0);
  CHECK(c.devices()[0].name == "m1");
}

TEST_CASE("engineering notation") {
  CHECK(parse_number("10k") == 1e4);
  CHECK(parse_number("1.5meg") == doctest::Approx(1.5e6));
  CHECK(parse_number("3p") == doctest::Approx(3e-12));
  CHECK(parse_number("2.5e-3") == 2.5e-3);
  CHECK(parse_number("1MEG") == 1e6);
  CHECK(parse_number("1M") == doctest::Approx(1e-3));
  CHECK(parse_number("4f") == doctest::Approx(4e-15));
  CHECK_THROWS_AS(parse_number("abc"), Error);
}

TEST_CASE("parser features") {
  const auto c = parse(
      "* comment line\n"
      ".title demo\n"
      ".param rload=2k\n"
      "V1 in 0 DC 1.2\n"
      "R1 in\n"
      "+ out {rload}\n"
      "C1 out gnd 1p IC=0.3 ; trailing comment\n"
      "YPD p1 out 0 IPH=PWL(0 1n 1u 2n)\n"
      ".tran 1n 10u\n"
      ".dc p1 1e-9 1e-6 10 dec\n"
      ".end\n");
  CHECK(c.name == "demo");
  CHECK(c.params.at("rload") == 2000.0);
  CHECK(std::get<ResistorCard>(c.find_device("R1")->card).r == 2000.0);
  CHECK(c.find_device("C1")->terminals[1] == 0);
  CHECK(std::get<CapacitorCard>(c.find_device("C1")->card).ic == 0.3);
  REQUIRE(c.tran.has_value());
  CHECK(c.tran->tstop == doctest::Approx(1e-5));
  REQUIRE(c.dc.has_value());
  CHECK(c.dc->decade);
  CHECK(c.dc->points == 10);
  CHECK(c.find_device("r1") != nullptr);
}

TEST_CASE("MOSFET arity error names the terminal count") {
  const auto e = parse_error("Mx d g s\n");
  CHECK(e.code() == ErrorCode::Syntax);
  CHECK(e.line() == 1);
  CHECK(e.column() > 0);
  CHECK(std::string(e.what()).find("terminal") != std::string::npos);
}

TEST_CASE("unknown device prefix has a position") {
  const auto e = parse_error("R1 a 0 1k\nQ1 a b c\n");
  CHECK(e.code() == ErrorCode::UnknownDevicePrefix);
  CHECK(e.line() == 2);
  CHECK(e.column() == 1);
}

TEST_CASE("duplicate names ignore case") {
  const auto e = parse_error("R1 a 0 1k\nr1 b 0 2k\n");
  CHECK(e.code() == ErrorCode::DuplicateName);
  CHECK(e.line() == 2);
}

TEST_CASE("malformed values report the column") {
  const auto e = parse_error("V1 a 0 DC 1.2\nR1 a 0 1k!\n");
  CHECK(e.code() == ErrorCode::Syntax);
  CHECK(e.line() == 2);
  CHECK(e.column() == 8);
}

TEST_CASE("malformed waveforms") {
  CHECK_THROWS_AS(parse("V1 a 0 PULSE(0 1 0 0 1n 1u 2u)\n"), Error);
  CHECK_THROWS_AS(parse("V1 a 0 PWL(0 0 0 1)\n"), Error);
  CHECK_THROWS_AS(parse("V1 a 0 PULSE(0 1\n"), Error);
  CHECK_THROWS_AS(parse("YPD p a 0 CPD=1f\n"), Error);
  CHECK_THROWS_AS(parse("YPD p a 0 IPH=-1n\n"), Error);
}

TEST_CASE("serialize an empty circuit") {
  Circuit c;
  CHECK(serialize(c) == ".end\n");
}

TEST_CASE("PULSE round trip keeps the waveform record") {
  const PulseWave p{0.0, 1.2, 1e-6, 10e-9, 10e-9, 5e-6, 20e-6};
  Circuit c;
  c.add("V1", {"a", "0"}, VSourceCard{p});
  c.add("R1", {"a", "0"}, ResistorCard{1e3});
  const auto back = parse(serialize(c));
  CHECK(std::get<PulseWave>(std::get<VSourceCard>(back.find_device("V1")->card).wave) == p);
}

TEST_CASE("builtins round trip") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    const auto c = builtin(*builtin_from_name(name));
    const auto back = parse(serialize(c));
    CHECK(structurally_equal(c, back));
    CHECK(serialize(back) == serialize(c));
  }
}

TEST_CASE("random netlists round trip") {
  std::mt19937 rng(2024);
  for (int k = 0; k < 100; ++k) {
    const auto c = random_circuit(rng, k);
    const auto text = serialize(c);
    CAPTURE(text);
    const auto back = parse(text);
    CHECK(structurally_equal(c, back));
    CHECK(back.params == c.params);
    CHECK(back.tran == c.tran);
  }
}

TEST_CASE("structural equality ignores node numbering") {
  Circuit a, b;
  a.node("x");
  a.add("R1", {"y", "0"}, ResistorCard{1e3});
  b.add("R1", {"y", "0"}, ResistorCard{1e3});
  CHECK(structurally_equal(a, b));
  b.devices()[0].card = ResistorCard{2e3};
  CHECK_FALSE(structurally_equal(a, b));
}

TEST_CASE("validate") {
  SUBCASE("resistor to ground is simulable") { CHECK(validate(parse("R1 a 0 1k\n")).empty()); }
  SUBCASE("capacitor-only node floats at DC") {
    const auto ds = validate(parse("C1 a 0 1p\n"));
    CHECK(has_diag(ds, DiagnosticKind::FloatingNode, "a"));
  }
  SUBCASE("parallel voltage sources form a loop") {
    const auto ds = validate(parse("V1 a 0 DC 1\nV2 a 0 DC 2\nR1 a 0 1k\n"));
    CHECK(has_diag(ds, DiagnosticKind::VoltageSourceLoop));
  }
  SUBCASE("empty circuit") { CHECK(has_diag(validate(Circuit{}), DiagnosticKind::EmptyCircuit)); }
  SUBCASE("dangling resistor end reached through a capacitor floats") {
    const auto ds = validate(parse("R1 a 0 1k\nC1 a b 1p\nR2 b c 1k\n"));
    CHECK(has_diag(ds, DiagnosticKind::FloatingNode, "c"));
    CHECK_FALSE(has_diag(ds, DiagnosticKind::FloatingNode, "b"));
  }
  SUBCASE("capacitor pair sharing charge through a resistor is simulable") {
    CHECK(validate(parse("C1 a 0 1n IC=1\nC2 b 0 1n\nR1 a b 1k\n")).empty());
  }
}

TEST_CASE("builtins validate and have the documented inventory") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    CHECK(validate(builtin(*builtin_from_name(name))).empty());
  }
  const auto log3 = builtin(Builtin::Pixel3tLog);
  CHECK(count_kind(log3, DeviceKind::Mosfet) == 3);
  CHECK(count_kind(log3, DeviceKind::Photodiode) == 1);
  CHECK(log3.find_device(kSupplyName) != nullptr);
  CHECK(log3.find_device(kResetSourceName) != nullptr);

  const auto m3 = builtin(Builtin::Pixel3tm);
  REQUIRE(count_kind(m3, DeviceKind::Memristor) == 1);
  REQUIRE(count_kind(m3, DeviceKind::Capacitor) == 1);
  const DeviceInstance* mem = nullptr;
  const DeviceInstance* cap = nullptr;
  for (const auto& d : m3.devices()) {
    if (d.kind() == DeviceKind::Memristor) mem = &d;
    if (d.kind() == DeviceKind::Capacitor) cap = &d;
  }
  CHECK(std::get<CapacitorCard>(cap->card).c == 1e-12);
  // Series: the memristor and capacitor share exactly one node that nothing else touches.
  int shared = -1;
  for (int a : mem->terminals)
    for (int b : cap->terminals)
      if (a == b) shared = a;
  REQUIRE(shared > 0);
  int touching = 0;
  for (const auto& d : m3.devices())
    touching += static_cast<int>(std::count(d.terminals.begin(), d.terminals.end(), shared));
  CHECK(touching == 2);

  const auto m2 = builtin(Builtin::Pixel2tm);
  CHECK(count_kind(m2, DeviceKind::Mosfet) == 2);
  for (const auto& d : m2.devices()) {
    if (d.kind() == DeviceKind::Memristor) mem = &d;
    if (d.kind() == DeviceKind::Capacitor) cap = &d;
  }
  auto sorted = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  CHECK(sorted(mem->terminals) == sorted(cap->terminals));

  const auto lin = builtin(Builtin::Pixel4tLinlog);
  CHECK(count_kind(lin, DeviceKind::Mosfet) == 4);
}

TEST_CASE("builtin reset and supply") {
  const auto c = builtin(Builtin::Pixel3tm);
  const auto& vdd = std::get<VSourceCard>(c.find_device(kSupplyName)->card);
  CHECK(std::get<DcWave>(vdd.wave).value == 1.2);
  const auto& rst = std::get<VSourceCard>(c.find_device(kResetSourceName)->card);
  const auto& p = std::get<PulseWave>(rst.wave);
  CHECK(p.delay == 1e-6);
  CHECK(p.width == 5e-6);
  CHECK(p.period == 20e-6);
  CHECK(p.v2 == 1.2);
}

TEST_CASE("builtin names") {
  CHECK(builtin_names().size() == 4);
  CHECK_FALSE(builtin_from_name("pixel_9t").has_value());
  CHECK(builtin_name(Builtin::Pixel4tLinlog) == std::string("pixel_4t_linlog"));
}

TEST_CASE("sweepable sources") {
  const auto s = builtin(Builtin::Pixel3tLog).sweepable_sources();
  CHECK(std::find(s.begin(), s.end(), "photo") != s.end());
  CHECK(std::find(s.begin(), s.end(), "VDD") == s.end());
}
