// Fuse two singlet pairs at zero delay and print the resulting four-photon
// state, one basis ket per line.

#include <iostream>

#include "qnet/protocol.hpp"
#include "qnet/source.hpp"

int main() {
  using namespace qnet;
  const PureState in = dual_pair("a", "b", "c", "d");
  const FusionOutcome out = fuse(in, 0.0, WavepacketModel{});
  std::cout << "# splitter tree success " << splitter_tree_success().num << "/" << splitter_tree_success().den << "\n";
  std::cout << out.final_state.serialize();

  std::cout << "# projection spectrum (b f e d)\n";
  for (const auto& [pattern, p] : projection_spectrum(out.final_state)) {
    if (p > 1e-12) std::cout << projection_label(pattern) << " " << p << "\n";
  }
}
