// Reference interpretations of the four pixel schematics.
//
// Shared conventions: VDD supply, VRST reset pulse, a 10 uA column bias sink
// on "out", photodiode "photo" from node "pd" to ground. Every NMOS has its
// bulk tied to its own source, so no device sees body bias.

#include "pixsim/error.hpp"
#include "pixsim/netlist.hpp"

namespace pixsim {

namespace {

MosfetCard nmos() { return MosfetCard::default_n(); }

PhotodiodeCard photodiode(double iph) {
  PhotodiodeCard pd;
  pd.iph = DcWave{iph};
  return pd;
}

void add_supply_and_diode(Circuit& c, const BuiltinOptions& o) {
  c.add(kSupplyName, {"vdd", "0"}, VSourceCard{DcWave{o.vdd}});
  c.add(kPhotodiodeName, {kPhotoNode, "0"}, photodiode(o.iph));
}

// Source follower and row select shared by the 3T/4T families.
void add_readout(Circuit& c, const BuiltinOptions& o, bool with_follower, const char* sf_name,
                 const char* sel_name) {
  if (with_follower) c.add(sf_name, {"vdd", kPhotoNode, "x", "x"}, nmos());
  c.add(sel_name, {"x", "vdd", kOutputNode, kOutputNode}, nmos());
  c.add("IBIAS", {kOutputNode, "0"}, ISourceCard{DcWave{o.ibias}});
}

// The reset pulse sits on top of VDD at M1's gate: outside reset the gate is
// at VDD (diode-connected log load), during reset it is boosted and pulls the
// photodiode node hard to the supply.
void add_log_load(Circuit& c, const BuiltinOptions& o) {
  c.add(kResetSourceName, {"rst", "vdd"}, VSourceCard{o.reset});
  c.add("M1", {"vdd", "rst", kPhotoNode, kPhotoNode}, nmos());
}

Circuit pixel_3t_log(const BuiltinOptions& o) {
  Circuit c("pixel_3t_log");
  add_supply_and_diode(c, o);
  add_log_load(c, o);
  add_readout(c, o, true, "M2", "M3");
  return c;
}

// M2 replaced by a memristor in parallel with a capacitor between the
// photodiode node and the select transistor.
Circuit pixel_2tm(const BuiltinOptions& o) {
  Circuit c("pixel_2tm");
  add_supply_and_diode(c, o);
  add_log_load(c, o);
  c.add("mem", {kPhotoNode, "x"}, MemristorCard{});
  c.add("C1", {kPhotoNode, "x"}, CapacitorCard{o.c_couple, std::nullopt});
  add_readout(c, o, false, "", "M3");
  return c;
}

void add_reset_switch(Circuit& c, const BuiltinOptions& o) {
  c.add(kResetSourceName, {"rst", "0"}, VSourceCard{o.reset});
  c.add("M1", {"vdd", "rst", kPhotoNode, kPhotoNode}, nmos());
}

Circuit pixel_4t_linlog(const BuiltinOptions& o) {
  Circuit c("pixel_4t_linlog");
  add_supply_and_diode(c, o);
  add_reset_switch(c, o);
  c.add("VB", {"vb", "0"}, VSourceCard{DcWave{o.vbias}});
  c.add("M2", {"vdd", "vb", kPhotoNode, kPhotoNode}, nmos());
  add_readout(c, o, true, "M3", "M4");
  return c;
}

// M2 replaced by a memristor and capacitor in series from VDD to the
// photodiode node.
Circuit pixel_3tm(const BuiltinOptions& o) {
  Circuit c("pixel_3tm");
  add_supply_and_diode(c, o);
  add_reset_switch(c, o);
  c.add("mem", {"vdd", "mid"}, MemristorCard{});
  c.add("C1", {"mid", kPhotoNode}, CapacitorCard{o.c_couple, std::nullopt});
  add_readout(c, o, true, "M3", "M4");
  return c;
}

}  // namespace

Circuit builtin(Builtin which, const BuiltinOptions& opts) {
  switch (which) {
    case Builtin::Pixel3tLog: return pixel_3t_log(opts);
    case Builtin::Pixel2tm: return pixel_2tm(opts);
    case Builtin::Pixel4tLinlog: return pixel_4t_linlog(opts);
    case Builtin::Pixel3tm: return pixel_3tm(opts);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown builtin");
}

const char* builtin_name(Builtin which) {
  switch (which) {
    case Builtin::Pixel3tLog: return "pixel_3t_log";
    case Builtin::Pixel2tm: return "pixel_2tm";
    case Builtin::Pixel4tLinlog: return "pixel_4t_linlog";
    case Builtin::Pixel3tm: return "pixel_3tm";
  }
  return "";
}

std::optional<Builtin> builtin_from_name(std::string_view name) {
  for (Builtin b : {Builtin::Pixel3tLog, Builtin::Pixel2tm, Builtin::Pixel4tLinlog, Builtin::Pixel3tm}) {
    if (iequals(name, builtin_name(b))) return b;
  }
  return std::nullopt;
}

std::vector<std::string> builtin_names() {
  return {"pixel_3t_log", "pixel_2tm", "pixel_4t_linlog", "pixel_3tm"};
}

}  // namespace pixsim
