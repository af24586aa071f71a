#pragma once

// Fiber-optic elements (beamsplitters, PBS, LCVR, polarization rotation,
// variable delay lines) and their composition into circuits acting on
// PureState.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qnet/error.hpp"
#include "qnet/fock.hpp"

namespace qnet {

struct BeamSplitter {
  std::string in1;
  std::string in2;
  std::string out1;
  std::string out2;
  double ratio = 0.5;  // power fraction in1 -> out1
  std::string label;
};

// Rotates the input basis by slow_axis_deg (+ misalignment_deg), then sends H
// to out_h and V to out_v.
struct Pbs {
  std::string in;
  std::string out_h;
  std::string out_v;
  double slow_axis_deg = 0.0;
  double misalignment_deg = 0.0;
  std::string label;
};

struct Lcvr {
  std::string mode;
  double retardance_rad = 0.0;
  std::string label;
};

struct Rotation {
  std::string mode;
  double angle_deg = 0.0;
  std::string label;
};

struct DelayLine {
  std::string mode;
  double delay_ps = 0.0;
  std::string label;
};

using ElementSpec = std::variant<BeamSplitter, Pbs, Lcvr, Rotation, DelayLine>;

inline const std::string& element_label(const ElementSpec& e) {
  return std::visit([](const auto& x) -> const std::string& { return x.label; }, e);
}

inline std::vector<std::string> element_inputs(const ElementSpec& e) {
  return std::visit(
      [](const auto& x) -> std::vector<std::string> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, BeamSplitter>) {
          return {x.in1, x.in2};
        } else if constexpr (std::is_same_v<T, Pbs>) {
          return {x.in};
        } else {
          return {x.mode};
        }
      },
      e);
}

inline std::vector<std::string> element_outputs(const ElementSpec& e) {
  return std::visit(
      [](const auto& x) -> std::vector<std::string> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, BeamSplitter>) {
          return {x.out1, x.out2};
        } else if constexpr (std::is_same_v<T, Pbs>) {
          return {x.out_h, x.out_v};
        } else {
          return {x.mode};
        }
      },
      e);
}

// ---------------------------------------------------------------------------
// Element unitaries.

inline Matrix2 beam_splitter_matrix(double ratio = 0.5) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(Errc::kInvalidArgument, "beamsplitter ratio must lie in (0, 1)");
  }
  const double t = std::sqrt(ratio);
  const double r = std::sqrt(1.0 - ratio);
  return Matrix2{{{Complex(t), Complex(r)}, {Complex(r), Complex(-t)}}};
}

// H† -> cos H† + sin V†, V† -> -sin H† + cos V†; 45 degrees takes H to D.
inline Matrix2 rotation_matrix(double angle_deg) {
  const double th = angle_deg * std::numbers::pi / 180.0;
  const double c = std::cos(th);
  const double s = std::sin(th);
  return Matrix2{{{Complex(c), Complex(s)}, {Complex(-s), Complex(c)}}};
}

inline Matrix2 lcvr_matrix(double retardance_rad) {
  return Matrix2{{{Complex(1.0), Complex(0.0)}, {Complex(0.0), std::polar(1.0, retardance_rad)}}};
}

struct CouplerStep {
  CouplerPorts ports;
  Matrix2 u;
};

// Moves every (from, pol, *) occupation to (to, pol, *).
struct RerouteStep {
  std::string from;
  Polarization pol;
  std::string to;
};

struct DelayStep {
  std::string mode;
  double delay_ps;
};

using CouplerAction = std::variant<CouplerStep, RerouteStep, DelayStep>;

inline std::vector<CouplerAction> element_to_coupler(const ElementSpec& e,
                                                     const std::set<std::string>* registry = nullptr) {
  if (registry) {
    for (const auto& m : element_inputs(e)) {
      if (!registry->count(m)) throw Error(Errc::kUnknownMode, "element references unregistered mode '" + m + "'");
    }
  }
  auto pol_family = [](const std::string& m, Polarization p) { return SlotFamily{m, p}; };
  return std::visit(
      [&](const auto& x) -> std::vector<CouplerAction> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, BeamSplitter>) {
          if (x.in1 == x.in2) throw Error(Errc::kInvalidArgument, "beamsplitter inputs must differ");
          if (x.out1 == x.out2) throw Error(Errc::kInvalidArgument, "beamsplitter outputs must differ");
          CouplerPorts ports{{x.in1, std::nullopt}, {x.in2, std::nullopt}, {x.out1, std::nullopt},
                             {x.out2, std::nullopt}};
          return {CouplerStep{ports, beam_splitter_matrix(x.ratio)}};
        } else if constexpr (std::is_same_v<T, Pbs>) {
          if (x.out_h == x.out_v) throw Error(Errc::kInvalidArgument, "PBS outputs must differ");
          const SlotFamily h = pol_family(x.in, Polarization::H);
          const SlotFamily v = pol_family(x.in, Polarization::V);
          return {CouplerStep{{h, v, h, v}, rotation_matrix(x.slow_axis_deg + x.misalignment_deg)},
                  RerouteStep{x.in, Polarization::H, x.out_h}, RerouteStep{x.in, Polarization::V, x.out_v}};
        } else if constexpr (std::is_same_v<T, Lcvr>) {
          const SlotFamily h = pol_family(x.mode, Polarization::H);
          const SlotFamily v = pol_family(x.mode, Polarization::V);
          return {CouplerStep{{h, v, h, v}, lcvr_matrix(x.retardance_rad)}};
        } else if constexpr (std::is_same_v<T, Rotation>) {
          const SlotFamily h = pol_family(x.mode, Polarization::H);
          const SlotFamily v = pol_family(x.mode, Polarization::V);
          return {CouplerStep{{h, v, h, v}, rotation_matrix(x.angle_deg)}};
        } else {
          return {DelayStep{x.mode, x.delay_ps}};
        }
      },
      e);
}

inline PureState apply_reroute(const PureState& state, const RerouteStep& step) {
  if (step.from == step.to) return state;
  LinearModeMap map;
  for (const SlotKey& s : state.slots()) {
    if (s.mode == step.from && s.pol == step.pol) {
      map[s] = {{SlotKey{step.to, s.pol, s.tbin}, Complex(1.0)}};
    }
  }
  return apply_linear_map(state, map);
}

// ---------------------------------------------------------------------------
// Circuits.

class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(std::set<std::string> input_modes) : modes_(std::move(input_modes)) {}

  Circuit& register_mode(std::string mode) {
    modes_.insert(std::move(mode));
    return *this;
  }

  // Inputs must already be registered; outputs are registered here.
  Circuit& add(ElementSpec e) {
    element_to_coupler(e, &modes_);
    for (auto& m : element_outputs(e)) modes_.insert(m);
    elements_.push_back(std::move(e));
    return *this;
  }

  const std::vector<ElementSpec>& elements() const { return elements_; }
  const std::set<std::string>& modes() const { return modes_; }
  bool empty() const { return elements_.empty(); }

  std::optional<std::size_t> find(std::string_view label) const {
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      if (!label.empty() && element_label(elements_[i]) == label) return i;
    }
    return std::nullopt;
  }

  Circuit with_replaced(std::size_t index, ElementSpec e) const {
    Circuit out = *this;
    out.elements_.at(index) = std::move(e);
    for (auto& m : element_outputs(out.elements_[index])) out.modes_.insert(m);
    return out;
  }

  // c1 ++ c2
  Circuit then(const Circuit& next) const {
    Circuit out = *this;
    out.modes_.insert(next.modes_.begin(), next.modes_.end());
    out.elements_.insert(out.elements_.end(), next.elements_.begin(), next.elements_.end());
    return out;
  }

 private:
  std::vector<ElementSpec> elements_;
  std::set<std::string> modes_;
};

// ---------------------------------------------------------------------------
// Distinguishability.

// Gaussian wavepacket with rms temporal width sigma_t_ps. overlap_cap bounds
// the mutual overlap of photons meeting at a beamsplitter (1 = ideal source).
struct WavepacketModel {
  double sigma_t_ps = 1.0;
  double overlap_cap = 1.0;
};

struct Distinguishability {
  double overlap = 1.0;     // v
  double orthogonal = 0.0;  // sqrt(1 - v^2)
};

// The delayed photon is rewritten as v |tbin 0> + sqrt(1 - v^2) |tbin 1>,
// with v = cap * exp(-delay^2 / (4 sigma_t^2)).
inline Distinguishability resolve_distinguishability(double delay_ps, const WavepacketModel& model) {
  if (!(model.sigma_t_ps > 0.0)) throw Error(Errc::kNonPositiveWidth, "wavepacket sigma_t must be positive");
  if (model.overlap_cap < 0.0 || model.overlap_cap > 1.0) {
    throw Error(Errc::kInvalidArgument, "overlap cap must lie in [0, 1]");
  }
  const double v = model.overlap_cap * std::exp(-delay_ps * delay_ps / (4.0 * model.sigma_t_ps * model.sigma_t_ps));
  return {v, std::sqrt(std::max(0.0, 1.0 - v * v))};
}

// Fock state plus the wavepacket center time attached to each spatial mode.
struct OpticalState {
  PureState fock;
  std::map<std::string, double> center_ps;

  double center(const std::string& mode) const {
    auto it = center_ps.find(mode);
    return it == center_ps.end() ? 0.0 : it->second;
  }
};

namespace detail {

inline PureState split_time_bins(const PureState& state, const std::string& mode, const Distinguishability& d) {
  LinearModeMap map;
  for (const SlotKey& s : state.slots()) {
    if (s.mode != mode) continue;
    if (s.tbin != 0) {
      throw Error(Errc::kUnsupported, "mode '" + mode + "' already carries a second time bin; only one "
                                      "relative delay per interference chain is resolved exactly");
    }
    map[s] = {{s, Complex(d.overlap)}, {SlotKey{s.mode, s.pol, 1}, Complex(d.orthogonal)}};
  }
  return apply_linear_map(state, map);
}

inline PureState apply_action(const PureState& state, const CouplerAction& action) {
  if (auto* c = std::get_if<CouplerStep>(&action)) return apply_coupler(state, c->ports, c->u);
  if (auto* r = std::get_if<RerouteStep>(&action)) return apply_reroute(state, *r);
  return state;
}

}  // namespace detail

inline OpticalState run_circuit(OpticalState in, const Circuit& circuit, const WavepacketModel& model) {
  for (const auto& m : in.fock.modes()) {
    if (!circuit.modes().count(m)) throw Error(Errc::kUnknownMode, "state mode '" + m + "' is not registered");
  }
  OpticalState s = std::move(in);
  for (const ElementSpec& e : circuit.elements()) {
    const auto actions = element_to_coupler(e, &circuit.modes());
    if (const auto* bs = std::get_if<BeamSplitter>(&e)) {
      const double delta = s.center(bs->in2) - s.center(bs->in1);
      if (delta != 0.0 || model.overlap_cap < 1.0) {
        const Distinguishability d = resolve_distinguishability(delta, model);
        if (d.overlap < 1.0) s.fock = detail::split_time_bins(s.fock, bs->in2, d);
      }
      const double ref = s.center(bs->in1);
      for (const auto& a : actions) s.fock = detail::apply_action(s.fock, a);
      s.center_ps.erase(bs->in1);
      s.center_ps.erase(bs->in2);
      s.center_ps[bs->out1] = ref;
      s.center_ps[bs->out2] = ref;
    } else if (const auto* pbs = std::get_if<Pbs>(&e)) {
      const double ref = s.center(pbs->in);
      for (const auto& a : actions) s.fock = detail::apply_action(s.fock, a);
      s.center_ps.erase(pbs->in);
      s.center_ps[pbs->out_h] = ref;
      s.center_ps[pbs->out_v] = ref;
    } else if (const auto* dl = std::get_if<DelayLine>(&e)) {
      s.center_ps[dl->mode] = s.center(dl->mode) + dl->delay_ps;
    } else {
      for (const auto& a : actions) s.fock = detail::apply_action(s.fock, a);
    }
  }
  return s;
}

inline PureState run_circuit(const PureState& state, const Circuit& circuit, const WavepacketModel& model) {
  return run_circuit(OpticalState{state, {}}, circuit, model).fock;
}

// ---------------------------------------------------------------------------

// Piecewise-linear map from an LCVR control value (e.g. drive voltage) to
// retardance in radians, built from a user-supplied calibration table.
class LcvrCalibration {
 public:
  LcvrCalibration() = default;

  explicit LcvrCalibration(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw Error(Errc::kInvalidArgument, "LCVR calibration needs at least two points");
    std::sort(points_.begin(), points_.end());
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (points_[i].first == points_[i - 1].first) {
        throw Error(Errc::kInvalidArgument, "LCVR calibration has duplicate control values");
      }
    }
  }

  bool empty() const { return points_.empty(); }
  const std::vector<std::pair<double, double>>& points() const { return points_; }

  double retardance(double control) const {
    if (points_.empty()) return control;
    if (control < points_.front().first || control > points_.back().first) {
      throw Error(Errc::kInvalidArgument, "control value outside the LCVR calibration range");
    }
    auto hi = std::lower_bound(points_.begin(), points_.end(), control,
                               [](const auto& p, double c) { return p.first < c; });
    if (hi->first == control) return hi->second;
    auto lo = std::prev(hi);
    const double t = (control - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
  }

 private:
  std::vector<std::pair<double, double>> points_;
};

}  // namespace qnet
