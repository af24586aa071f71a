#pragma once

// Shared helpers for the suites: bundled config location and small random
// generators for property tests.

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qnet/fock.hpp"

namespace testing_support {

inline std::filesystem::path source_dir() { return QNET_SOURCE_DIR; }
inline std::filesystem::path config_path(const std::string& name) { return source_dir() / "configs" / (name + ".json"); }

inline const std::vector<std::string>& bundled_configs() {
  static const std::vector<std::string> names{"fig4c_hom",        "fig4d_bell_fringe",    "fig5_g2",
                                              "fig6c_local_fusion", "fig6d_network_fusion", "fig6e_projection",
                                              "fig7_bell",        "fig8_noon",            "throughput"};
  return names;
}

// Haar-ish random 2x2 unitary: e^{i a} [[e^{i b} cos t, e^{i c} sin t], [-e^{-i c} sin t, e^{-i b} cos t]].
inline qnet::Matrix2 random_unitary(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  const double t = std::acos(std::sqrt(std::uniform_real_distribution<double>(0.0, 1.0)(rng)));
  const double a = ang(rng), b = ang(rng), c = ang(rng);
  const std::complex<double> g = std::polar(1.0, a);
  qnet::Matrix2 u{};
  u[0][0] = g * std::polar(std::cos(t), b);
  u[0][1] = g * std::polar(std::sin(t), c);
  u[1][0] = -g * std::polar(std::sin(t), -c);
  u[1][1] = g * std::polar(std::cos(t), -b);
  return u;
}

// Random normalized state over the given slots with at most max_photons in
// total per term.
inline qnet::PureState random_state(std::mt19937_64& rng, const std::vector<qnet::SlotKey>& slots, int max_photons,
                                    int terms = 4) {
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<std::size_t> pick(0, slots.size() - 1);
  std::uniform_int_distribution<int> count(0, max_photons);
  qnet::PureState::TermMap map;
  for (int k = 0; k < terms; ++k) {
    std::vector<qnet::BasisKet::Occupation> occ;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) occ.emplace_back(slots[pick(rng)], 1);
    map[qnet::BasisKet(occ)] += std::complex<double>(gauss(rng), gauss(rng));
  }
  return qnet::PureState(map).normalized();
}

}  // namespace testing_support
