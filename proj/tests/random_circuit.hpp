#pragma once

#include <cmath>
#include <random>
#include <string>

#include "pixsim/netlist.hpp"

namespace pixsim::testing {

// Random valid circuit over a handful of nodes, every kind represented.
inline Circuit random_circuit(std::mt19937& rng, int id) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick_node(0, 5);
  const char* labels[] = {"0", "a", "b", "out", "n_1", "vdd"};
  auto node = [&] { return std::string(labels[pick_node(rng)]); };
  auto val = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
  auto wave = [&]() -> Waveform {
    switch (rng() % 4) {
      case 0: return DcWave{val(1e-12, 1.0)};
      case 1: {
        PulseWave p{val(1e-3, 1.0), val(1e-3, 2.0), val(1e-9, 1e-6), val(1e-10, 1e-8), val(1e-10, 1e-8),
                    val(1e-7, 1e-5), 0.0};
        p.period = p.rise + p.fall + p.width + val(1e-7, 1e-5);
        return p;
      }
      case 2: {
        PwlWave w;
        double t = 0.0;
        for (int k = 0; k < 2 + static_cast<int>(rng() % 4); ++k) {
          w.points.push_back({t, val(1e-12, 1e-6)});
          t += val(1e-9, 1e-6);
        }
        return w;
      }
      default: return SineWave{val(1e-3, 1.0), val(1e-3, 1.0), val(1e2, 1e6), val(1e-9, 1e-6)};
    }
  };

  Circuit c("rand" + std::to_string(id));
  if (rng() % 2) c.params["scale"] = val(1e-3, 1e3);
  if (rng() % 2) c.tran = TranDirective{val(1e-10, 1e-8), val(1e-6, 1e-4)};
  const int n = 1 + static_cast<int>(rng() % 9);
  for (int k = 0; k < n; ++k) {
    const std::string name = std::to_string(k);
    switch (rng() % 7) {
      case 0: {
        MosfetCard m = rng() % 2 ? MosfetCard::default_n() : MosfetCard::default_p();
        m.w = val(1e-7, 1e-5);
        m.l = val(5e-8, 1e-6);
        m.vth = (m.polarity == Polarity::N ? 1 : -1) * val(0.1, 0.7);
        m.lambda = val(1e-3, 0.3);
        c.add("M" + name, {node(), node(), node(), node()}, m);
        break;
      }
      case 1: {
        MemristorCard m;
        m.r_on = val(10, 1e3);
        m.r_off = m.r_on * val(2, 1e3);
        m.x0 = u(rng);
        m.p = 1 + static_cast<int>(rng() % 4);
        m.window = static_cast<WindowKind>(rng() % 3);
        c.add("mem" + name, {node(), node()}, m);
        break;
      }
      case 2: c.add("R" + name, {node(), node()}, ResistorCard{val(1, 1e9)}); break;
      case 3: {
        CapacitorCard cc{val(1e-15, 1e-9), std::nullopt};
        if (rng() % 2) cc.ic = val(1e-3, 1.0);
        c.add("C" + name, {node(), node()}, cc);
        break;
      }
      case 4: c.add("V" + name, {node(), node()}, VSourceCard{wave()}); break;
      case 5: c.add("I" + name, {node(), node()}, ISourceCard{wave()}); break;
      default: {
        PhotodiodeCard pd;
        do pd.iph = wave();
        while (std::holds_alternative<SineWave>(pd.iph));
        pd.c_pd = val(1e-16, 1e-12);
        pd.clamp_enabled = rng() % 2;
        c.add("pd" + name, {node(), node()}, pd);
      }
    }
  }
  return c;
}

}  // namespace pixsim::testing
