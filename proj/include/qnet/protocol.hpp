#pragma once

// Two-pair fusion on a 50/50 beamsplitter, polarization heralding of the
// remote pair into Bell or N00N states, and the closed-form curves used to
// verify them (Bell fringes, HOM dips, four-fold projection spectra).

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <optional>
#include <string>
#include <vector>

#include "qnet/error.hpp"
#include "qnet/fock.hpp"
#include "qnet/optics.hpp"
#include "qnet/source.hpp"

namespace qnet {

// Mode names of the fusion layout: pairs on (a, b) and (c, d); a and c meet
// on the final beamsplitter whose outputs are e and f.
namespace fusion_modes {
inline const std::string a = "a";
inline const std::string b = "b";
inline const std::string c = "c";
inline const std::string d = "d";
inline const std::string e = "e";
inline const std::string f = "f";
}  // namespace fusion_modes

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational reduced(std::int64_t n, std::int64_t d) {
    const std::int64_t g = std::gcd(n, d);
    return g == 0 ? Rational{0, 1} : Rational{n / g, d / g};
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

// Routes 2^levels photons (one pair per two output ports) independently and
// uniformly through a binary tree of 50/50 beamsplitters with 2^levels
// outputs, and counts the routings where every pair lands one photon on each
// port of its own port group (ports {0,1}, {2,3}, ...). With allow_swap the
// pairs may take any groups; without it pair i must take group i.
inline Rational splitter_tree_success(int levels = 2, bool allow_swap = true) {
  if (levels < 1 || levels > 3) throw Error(Errc::kInvalidArgument, "splitter tree depth must be 1..3");
  const int ports = 1 << levels;
  const int photons = ports;
  const int pairs = photons / 2;
  std::int64_t total = 1;
  for (int i = 0; i < photons; ++i) total *= ports;

  std::int64_t hits = 0;
  std::vector<int> port(static_cast<std::size_t>(photons));
  for (std::int64_t code = 0; code < total; ++code) {
    std::int64_t x = code;
    for (int i = 0; i < photons; ++i) {
      port[static_cast<std::size_t>(i)] = static_cast<int>(x % ports);
      x /= ports;
    }
    std::vector<bool> group_used(static_cast<std::size_t>(pairs), false);
    bool ok = true;
    for (int p = 0; p < pairs && ok; ++p) {
      const int p1 = port[static_cast<std::size_t>(2 * p)];
      const int p2 = port[static_cast<std::size_t>(2 * p + 1)];
      const int g = p1 / 2;
      if (p2 / 2 != g || p1 == p2) ok = false;
      else if (!allow_swap && g != p) ok = false;
      else if (group_used[static_cast<std::size_t>(g)]) ok = false;
      else group_used[static_cast<std::size_t>(g)] = true;
    }
    if (ok) ++hits;
  }
  return Rational::reduced(hits, total);
}

struct FusionOutcome {
  PureState final_state;
  double success_probability = 0.0;
};

inline Circuit fusion_circuit(double delay_ps = 0.0) {
  using namespace fusion_modes;
  Circuit circuit(std::set<std::string>{a, b, c, d});
  circuit.add(DelayLine{c, delay_ps, "vdl"});
  circuit.add(BeamSplitter{a, c, e, f, 0.5, "fusion_bs"});
  return circuit;
}

// Interferes modes a and c on the final beamsplitter with `delay_ps` applied
// to c. b and d pass through untouched.
inline FusionOutcome fuse(const PureState& input, double delay_ps, const WavepacketModel& wavepacket) {
  return FusionOutcome{run_circuit(input, fusion_circuit(delay_ps), wavepacket), splitter_tree_success().value()};
}

enum class HeraldClass { kBell, kNoonH, kNoonV };

inline const char* to_string(HeraldClass c) {
  switch (c) {
    case HeraldClass::kBell: return "Bell";
    case HeraldClass::kNoonH: return "NoonH";
    case HeraldClass::kNoonV: return "NoonV";
  }
  return "?";
}

// Identical (b, d) polarizations herald a N00N state in the opposite
// polarization; crossed ones herald a Bell state.
inline HeraldClass classify_herald(Polarization pol_b, Polarization pol_d) {
  if (pol_b != pol_d) return HeraldClass::kBell;
  return pol_b == Polarization::H ? HeraldClass::kNoonV : HeraldClass::kNoonH;
}

struct HeraldResult {
  HeraldClass herald_class = HeraldClass::kBell;
  double probability = 0.0;
  PureState remote_state;  // on e, f
  // Bell heralds only: the one-photon-in-each-arm component and its weight
  // within remote_state.
  std::optional<PureState> postselected;
  double postselected_weight = 0.0;
};

// Removes the listed modes from every ket. Valid only when the removed part
// is the same in every term (true right after a projection on those modes).
inline PureState trace_out_fixed(const PureState& state, const std::set<std::string>& modes) {
  PureState::TermMap out;
  std::optional<BasisKet> removed_part;
  for (const auto& [ket, amp] : state.terms()) {
    std::vector<BasisKet::Occupation> keep;
    std::vector<BasisKet::Occupation> drop;
    for (const auto& occ : ket.occupations()) (modes.count(occ.first.mode) ? drop : keep).push_back(occ);
    BasisKet dropped(std::move(drop));
    if (removed_part && !(*removed_part == dropped)) {
      throw Error(Errc::kUnsupported, "modes to remove are not in a common product state");
    }
    removed_part = dropped;
    out[BasisKet(std::move(keep))] += amp;
  }
  return PureState(std::move(out), state.prune_epsilon());
}

inline constexpr double kMinHeraldProbability = 1e-12;

inline HeraldResult herald(const PureState& fused, Polarization pol_b, Polarization pol_d) {
  using namespace fusion_modes;
  const auto proj = project(fused, ProjectionSpec::one_each({{b, pol_b}, {d, pol_d}}));
  if (proj.probability < kMinHeraldProbability) {
    throw Error(Errc::kZeroProbabilityHerald, std::string("pattern (") + to_char(pol_b) + "," + to_char(pol_d) +
                                                  ") has vanishing probability");
  }
  HeraldResult r;
  r.herald_class = classify_herald(pol_b, pol_d);
  r.probability = proj.probability;
  r.remote_state = trace_out_fixed(proj.collapsed, {b, d});
  if (r.herald_class == HeraldClass::kBell) {
    ProjectionSpec one_each_arm;
    one_each_arm.require(SlotPattern{e, std::nullopt, std::nullopt}, 1);
    one_each_arm.require(SlotPattern{f, std::nullopt, std::nullopt}, 1);
    const auto post = project(r.remote_state, one_each_arm);
    r.postselected = post.collapsed;
    r.postselected_weight = post.probability;
  }
  return r;
}

// (|2_p>_e - |2_p>_f) / sqrt(2)
inline PureState noon_state(Polarization pol, const std::string& mode_e = fusion_modes::e,
                            const std::string& mode_f = fusion_modes::f) {
  const double r = 1.0 / std::sqrt(2.0);
  return PureState(PureState::TermMap{{BasisKet({{SlotKey{mode_e, pol}, 2}}), Complex(r)},
                                      {BasisKet({{SlotKey{mode_f, pol}, 2}}), Complex(-r)}});
}

inline double fidelity(const PureState& target, const PureState& state) {
  const double n = target.norm2() * state.norm2();
  return n == 0.0 ? 0.0 : std::norm(inner_product(target, state)) / n;
}

// ---------------------------------------------------------------------------
// Singlet verification fringe.

struct FringePoint {
  double same = 0.0;   // P_HH = P_VV
  double cross = 0.0;  // P_HV = P_VH
};

// P_{HH,VV} = (1 - cos Δφ)/4, P_{HV,VH} = (1 + cos Δφ)/4
inline FringePoint bell_fringe(double delta_phi) {
  const double c = std::cos(delta_phi);
  return {0.25 * (1.0 - c), 0.25 * (1.0 + c)};
}

inline Circuit fringe_circuit(double delta_phi, const std::string& mode_a = "a", const std::string& mode_b = "b") {
  Circuit circuit(std::set<std::string>{mode_a, mode_b});
  circuit.add(Lcvr{mode_a, delta_phi, "lcvr"});
  circuit.add(Rotation{mode_a, 45.0, "rot_a"});
  circuit.add(Rotation{mode_b, 45.0, "rot_b"});
  return circuit;
}

inline FringePoint fringe_of_state(const PureState& input, double delta_phi) {
  const PureState out = run_circuit(input, fringe_circuit(delta_phi), WavepacketModel{});
  const double hh = project(out, ProjectionSpec::one_each({{"a", Polarization::H}, {"b", Polarization::H}})).probability;
  const double hv = project(out, ProjectionSpec::one_each({{"a", Polarization::H}, {"b", Polarization::V}})).probability;
  return {hh, hv};
}

// Same quantity computed by propagating the singlet through LCVR(Δφ) and 45°
// rotations on both arms, then projecting.
inline FringePoint bell_fringe_via_state(double delta_phi) {
  return fringe_of_state(singlet_pair("a", "b"), delta_phi);
}

// Fringe of a source whose pairs are singlets with probability
// entangled_fraction and unpolarized product pairs otherwise.
inline FringePoint mixed_bell_fringe(double delta_phi, double entangled_fraction) {
  FringePoint mix{};
  const FringePoint ent = bell_fringe_via_state(delta_phi);
  mix.same += entangled_fraction * ent.same;
  mix.cross += entangled_fraction * ent.cross;
  for (Polarization pa : {Polarization::H, Polarization::V}) {
    for (Polarization pb : {Polarization::H, Polarization::V}) {
      const FringePoint bg = fringe_of_state(product_pair("a", pa, "b", pb), delta_phi);
      mix.same += 0.25 * (1.0 - entangled_fraction) * bg.same;
      mix.cross += 0.25 * (1.0 - entangled_fraction) * bg.cross;
    }
  }
  return mix;
}

// (max - min) / (max + min) of P_HH over a full LCVR period.
inline double fringe_visibility(double entangled_fraction) {
  const double lo = mixed_bell_fringe(0.0, entangled_fraction).same;
  const double hi = mixed_bell_fringe(std::numbers::pi, entangled_fraction).same;
  return (hi - lo) / (hi + lo);
}

// ---------------------------------------------------------------------------
// Four-fold projection spectrum: one photon in each of b, f, e, d with the
// given polarizations, keyed by the pattern string in (b, f, e, d) order,
// e.g. "HHVV".

inline std::string projection_label(const std::string& pattern) {
  static const char* modes[4] = {"b", "f", "e", "d"};
  std::string out;
  for (std::size_t i = 0; i < 4 && i < pattern.size(); ++i) {
    out += pattern[i];
    out += '_';
    out += modes[i];
  }
  return out;
}

inline std::map<std::string, double> projection_spectrum(const PureState& fused) {
  using namespace fusion_modes;
  std::map<std::string, double> out;
  for (int code = 0; code < 16; ++code) {
    std::array<Polarization, 4> p{};
    std::string key;
    for (int i = 0; i < 4; ++i) {
      p[static_cast<std::size_t>(i)] = ((code >> (3 - i)) & 1) ? Polarization::V : Polarization::H;
      key += to_char(p[static_cast<std::size_t>(i)]);
    }
    const auto spec = ProjectionSpec::one_each({{b, p[0]}, {f, p[1]}, {e, p[2]}, {d, p[3]}});
    out[key] = project(fused, spec).probability;
  }
  return out;
}

// ---------------------------------------------------------------------------
// HOM dip.

// baseline * (1 - v0² exp(-delay² / (2 σ_t²))): the (1 - v²)/2 coincidence
// law with v = v0 exp(-delay² / (4 σ_t²)), normalized to its baseline.
inline double hom_dip(double delay_ps, double sigma_t_ps, double v0, double baseline) {
  if (!(sigma_t_ps > 0.0)) throw Error(Errc::kNonPositiveWidth, "sigma_t must be positive");
  if (v0 < 0.0 || v0 > 1.0) throw Error(Errc::kInvalidArgument, "v0 must lie in [0, 1]");
  return baseline * (1.0 - v0 * v0 * std::exp(-delay_ps * delay_ps / (2.0 * sigma_t_ps * sigma_t_ps)));
}

// Coincidence probability across the outputs of a 50/50 beamsplitter for two
// H photons, one per input, with `delay_ps` on the second input.
inline double hom_coincidence_via_state(double delay_ps, const WavepacketModel& model) {
  Circuit circuit(std::set<std::string>{"a", "c"});
  circuit.add(DelayLine{"c", delay_ps, "vdl"});
  circuit.add(BeamSplitter{"a", "c", "e", "f", 0.5, "bs"});
  const PureState in = product_pair("a", Polarization::H, "c", Polarization::H);
  const PureState out = run_circuit(in, circuit, model);
  ProjectionSpec split;
  split.require(SlotPattern{"e", std::nullopt, std::nullopt}, 1);
  split.require(SlotPattern{"f", std::nullopt, std::nullopt}, 1);
  return project(out, split).probability;
}

}  // namespace qnet
