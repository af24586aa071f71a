// Herald table for the fused state: probability, class and fidelity with the
// expected remote state for each (b, d) polarization pattern.

#include <cstdio>

#include "qnet/protocol.hpp"
#include "qnet/source.hpp"

int main() {
  using namespace qnet;
  const PureState fused = fuse(dual_pair("a", "b", "c", "d"), 0.0, WavepacketModel{}).final_state;
  for (Polarization pb : {Polarization::H, Polarization::V}) {
    for (Polarization pd : {Polarization::H, Polarization::V}) {
      const HeraldResult h = herald(fused, pb, pd);
      double f = 0.0;
      if (h.herald_class == HeraldClass::kBell) {
        f = fidelity(singlet_pair("e", "f"), *h.postselected);
      } else {
        f = fidelity(noon_state(h.herald_class == HeraldClass::kNoonH ? Polarization::H : Polarization::V), h.remote_state);
      }
      std::printf("%c_b %c_d  p=%.6f  %-5s  fidelity=%.12f\n", to_char(pb), to_char(pd), h.probability,
                  to_string(h.herald_class), f);
    }
  }
}
