#pragma once

// Sparse multi-photon Fock states over (spatial mode, polarization, time bin)
// slots, and the creation-operator algebra everything else is built from.
//
// A state is a map from canonical occupation kets to complex amplitudes.
// Kets are kept canonical (slots strictly increasing, counts >= 1), so two
// physically identical kets always compare equal and bosonic exchange
// symmetry holds by construction.

#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qnet/error.hpp"

namespace qnet {

using Complex = std::complex<double>;

enum class Polarization : std::uint8_t { H = 0, V = 1 };

inline char to_char(Polarization p) { return p == Polarization::H ? 'H' : 'V'; }

inline Polarization orthogonal(Polarization p) {
  return p == Polarization::H ? Polarization::V : Polarization::H;
}

inline std::optional<Polarization> parse_polarization(std::string_view s) {
  if (s == "H" || s == "h") return Polarization::H;
  if (s == "V" || s == "v") return Polarization::V;
  return std::nullopt;
}

struct SlotKey {
  std::string mode;
  Polarization pol = Polarization::H;
  std::uint8_t tbin = 0;

  friend auto operator<=>(const SlotKey&, const SlotKey&) = default;

  std::string to_string() const {
    return mode + ':' + to_char(pol) + ':' + std::to_string(static_cast<int>(tbin));
  }
};

namespace detail {

inline double sqrt_factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return std::sqrt(f);
}

inline std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  (void)ec;
  return std::string(buf.data(), end);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(Errc::kInvalidArgument, "bad number '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace detail

class BasisKet {
 public:
  using Occupation = std::pair<SlotKey, int>;

  BasisKet() = default;

  // Accepts occupations in any order; merges repeated slots and drops zeros.
  explicit BasisKet(std::vector<Occupation> occupations) {
    std::map<SlotKey, int> merged;
    for (auto& [slot, n] : occupations) {
      if (n < 0) throw Error(Errc::kInvalidArgument, "negative occupation at " + slot.to_string());
      merged[slot] += n;
    }
    for (auto& [slot, n] : merged) {
      if (n > 0) occupations_.emplace_back(slot, n);
    }
  }

  const std::vector<Occupation>& occupations() const { return occupations_; }
  bool empty() const { return occupations_.empty(); }

  int count(const SlotKey& slot) const {
    for (const auto& [s, n] : occupations_) {
      if (s == slot) return n;
    }
    return 0;
  }

  int total() const {
    int t = 0;
    for (const auto& occ : occupations_) t += occ.second;
    return t;
  }

  // Photons in a spatial mode, summed over polarization and time bin.
  int mode_count(std::string_view mode) const {
    int t = 0;
    for (const auto& [s, n] : occupations_) {
      if (s.mode == mode) t += n;
    }
    return t;
  }

  BasisKet with_added(const SlotKey& slot, int delta = 1) const {
    BasisKet out;
    out.occupations_.reserve(occupations_.size() + 1);
    bool placed = false;
    for (const auto& occ : occupations_) {
      if (!placed && slot < occ.first) {
        if (delta > 0) out.occupations_.emplace_back(slot, delta);
        placed = true;
      }
      if (!placed && slot == occ.first) {
        const int n = occ.second + delta;
        if (n < 0) throw Error(Errc::kInvalidArgument, "occupation below zero at " + slot.to_string());
        if (n > 0) out.occupations_.emplace_back(slot, n);
        placed = true;
        continue;
      }
      out.occupations_.push_back(occ);
    }
    if (!placed) {
      if (delta < 0) throw Error(Errc::kInvalidArgument, "occupation below zero at " + slot.to_string());
      if (delta > 0) out.occupations_.emplace_back(slot, delta);
    }
    return out;
  }

  // "mode:pol:tbin^count" tokens separated by single spaces.
  std::string serialize() const {
    std::string out;
    for (const auto& [slot, n] : occupations_) {
      if (!out.empty()) out += ' ';
      out += slot.to_string();
      out += '^';
      out += std::to_string(n);
    }
    return out;
  }

  static BasisKet parse(std::string_view text) {
    std::vector<Occupation> occ;
    for (std::string_view tok : detail::split_ws(text)) {
      const auto c1 = tok.find(':');
      const auto c2 = tok.find(':', c1 == std::string_view::npos ? c1 : c1 + 1);
      const auto caret = tok.find('^');
      if (c1 == std::string_view::npos || c2 == std::string_view::npos || caret == std::string_view::npos ||
          !(c1 < c2 && c2 < caret)) {
        throw Error(Errc::kInvalidArgument, "bad ket token '" + std::string(tok) + "'");
      }
      auto pol = parse_polarization(tok.substr(c1 + 1, c2 - c1 - 1));
      if (!pol) throw Error(Errc::kInvalidArgument, "bad polarization in '" + std::string(tok) + "'");
      const int tbin = static_cast<int>(detail::parse_double(tok.substr(c2 + 1, caret - c2 - 1)));
      const int n = static_cast<int>(detail::parse_double(tok.substr(caret + 1)));
      if (tbin < 0 || tbin > 255) throw Error(Errc::kInvalidArgument, "tbin out of range");
      occ.emplace_back(SlotKey{std::string(tok.substr(0, c1)), *pol, static_cast<std::uint8_t>(tbin)}, n);
    }
    return BasisKet(std::move(occ));
  }

  friend auto operator<=>(const BasisKet&, const BasisKet&) = default;

 private:
  std::vector<Occupation> occupations_;
};

// Immutable sparse state vector. Operations return new states.
class PureState {
 public:
  using TermMap = std::map<BasisKet, Complex>;
  static constexpr double kDefaultPruneEpsilon = 1e-15;

  PureState() = default;

  explicit PureState(TermMap terms, double prune_epsilon = kDefaultPruneEpsilon)
      : prune_epsilon_(prune_epsilon) {
    for (auto it = terms.begin(); it != terms.end();) {
      const double mag = std::abs(it->second);
      if (mag == 0.0 || mag < prune_epsilon_) {
        it = terms.erase(it);
      } else {
        ++it;
      }
    }
    terms_ = std::move(terms);
  }

  static PureState vacuum() { return PureState(TermMap{{BasisKet{}, Complex(1.0, 0.0)}}); }

  static PureState from_ket(const BasisKet& ket, Complex amplitude = 1.0) {
    return PureState(TermMap{{ket, amplitude}});
  }

  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  double prune_epsilon() const { return prune_epsilon_; }

  PureState with_prune_epsilon(double eps) const { return PureState(terms_, eps); }

  Complex amplitude(const BasisKet& ket) const {
    auto it = terms_.find(ket);
    return it == terms_.end() ? Complex{} : it->second;
  }

  double norm2() const {
    double s = 0.0;
    for (const auto& [ket, amp] : terms_) s += std::norm(amp);
    return s;
  }

  double norm() const { return std::sqrt(norm2()); }

  PureState scaled(Complex factor) const {
    TermMap out;
    for (const auto& [ket, amp] : terms_) out.emplace(ket, amp * factor);
    return PureState(std::move(out), prune_epsilon_);
  }

  // The zero state normalizes to itself.
  PureState normalized() const {
    const double n = norm();
    if (n == 0.0) return *this;
    return scaled(1.0 / n);
  }

  std::set<std::string> modes() const {
    std::set<std::string> out;
    for (const auto& [ket, amp] : terms_) {
      for (const auto& occ : ket.occupations()) out.insert(occ.first.mode);
    }
    return out;
  }

  std::set<SlotKey> slots() const {
    std::set<SlotKey> out;
    for (const auto& [ket, amp] : terms_) {
      for (const auto& occ : ket.occupations()) out.insert(occ.first);
    }
    return out;
  }

  // Common photon number of all terms; nullopt for the zero state or a
  // number-mixed superposition.
  std::optional<int> photon_number() const {
    std::optional<int> n;
    for (const auto& [ket, amp] : terms_) {
      const int t = ket.total();
      if (n && *n != t) return std::nullopt;
      n = t;
    }
    return n;
  }

  // One line per term: "amp_re amp_im | mode:pol:tbin^count ...", kets in
  // canonical order. Numbers use the shortest round-trip representation.
  std::string serialize() const {
    std::string out;
    for (const auto& [ket, amp] : terms_) {
      out += detail::format_double(amp.real());
      out += ' ';
      out += detail::format_double(amp.imag());
      out += " |";
      if (!ket.empty()) {
        out += ' ';
        out += ket.serialize();
      }
      out += '\n';
    }
    return out;
  }

  static PureState parse(std::string_view text, double prune_epsilon = kDefaultPruneEpsilon) {
    TermMap terms;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      std::string_view line = text.substr(pos, eol - pos);
      pos = eol + 1;
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      const auto bar = line.find('|');
      if (bar == std::string_view::npos) throw Error(Errc::kInvalidArgument, "missing '|' in state line");
      auto nums = detail::split_ws(line.substr(0, bar));
      if (nums.size() != 2) throw Error(Errc::kInvalidArgument, "expected 're im' before '|'");
      std::string_view rest = line.substr(bar + 1);
      if (!rest.empty() && rest.back() == '\r') rest.remove_suffix(1);
      terms[BasisKet::parse(rest)] += Complex(detail::parse_double(nums[0]), detail::parse_double(nums[1]));
    }
    return PureState(std::move(terms), prune_epsilon);
  }

 private:
  TermMap terms_;
  double prune_epsilon_ = kDefaultPruneEpsilon;
};

inline PureState vacuum() { return PureState::vacuum(); }

// Applies the creation operator for `slot`: a†|n> = sqrt(n+1)|n+1>. Operator
// semantics; the result is not renormalized.
inline PureState create(const PureState& state, const SlotKey& slot) {
  PureState::TermMap out;
  for (const auto& [ket, amp] : state.terms()) {
    const int n = ket.count(slot);
    out[ket.with_added(slot)] += amp * std::sqrt(static_cast<double>(n + 1));
  }
  return PureState(std::move(out), state.prune_epsilon());
}

inline PureState superpose(const std::vector<std::pair<Complex, PureState>>& parts) {
  PureState::TermMap out;
  double eps = PureState::kDefaultPruneEpsilon;
  bool first = true;
  for (const auto& [coef, st] : parts) {
    eps = first ? st.prune_epsilon() : std::min(eps, st.prune_epsilon());
    first = false;
    for (const auto& [ket, amp] : st.terms()) out[ket] += coef * amp;
  }
  return PureState(std::move(out), eps);
}

inline PureState tensor(const PureState& s1, const PureState& s2) {
  const auto m1 = s1.modes();
  for (const auto& m : s2.modes()) {
    if (m1.count(m)) throw Error(Errc::kOverlappingModes, "mode '" + m + "' appears in both factors");
  }
  PureState::TermMap out;
  for (const auto& [k1, a1] : s1.terms()) {
    for (const auto& [k2, a2] : s2.terms()) {
      std::vector<BasisKet::Occupation> occ = k1.occupations();
      occ.insert(occ.end(), k2.occupations().begin(), k2.occupations().end());
      out[BasisKet(std::move(occ))] += a1 * a2;
    }
  }
  return PureState(std::move(out), std::min(s1.prune_epsilon(), s2.prune_epsilon()));
}

// <s1|s2>, conjugate-linear in s1.
inline Complex inner_product(const PureState& s1, const PureState& s2) {
  Complex acc{};
  const auto& small = s1.size() <= s2.size() ? s1 : s2;
  const auto& large = s1.size() <= s2.size() ? s2 : s1;
  for (const auto& [ket, amp] : small.terms()) {
    auto it = large.terms().find(ket);
    if (it == large.terms().end()) continue;
    const Complex a1 = (&small == &s1) ? amp : it->second;
    const Complex a2 = (&small == &s1) ? it->second : amp;
    acc += std::conj(a1) * a2;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Linear maps on creation operators.

using SlotImage = std::vector<std::pair<SlotKey, Complex>>;
// slot -> linear combination of output slots. Slots absent from the map are
// left untouched.
using LinearModeMap = std::map<SlotKey, SlotImage>;

// Rewrites every creation operator through `map`, expands the products
// multinomially and recollects with bosonic normalization:
//   |n> = prod_s (s†)^{n_s} / sqrt(n_s!) |0>.
inline PureState apply_linear_map(const PureState& state, const LinearModeMap& map) {
  PureState::TermMap out;
  for (const auto& [ket, amp] : state.terms()) {
    Complex coef = amp;
    for (const auto& occ : ket.occupations()) coef /= detail::sqrt_factorial(occ.second);

    std::map<BasisKet, Complex> partial{{BasisKet{}, coef}};
    for (const auto& [slot, n] : ket.occupations()) {
      auto it = map.find(slot);
      const SlotImage identity{{slot, Complex(1.0, 0.0)}};
      const SlotImage& image = it == map.end() ? identity : it->second;
      for (int k = 0; k < n; ++k) {
        std::map<BasisKet, Complex> next;
        for (const auto& [mono, c] : partial) {
          for (const auto& [target, u] : image) {
            if (u == Complex{}) continue;
            next[mono.with_added(target)] += c * u;
          }
        }
        partial = std::move(next);
      }
    }
    for (const auto& [mono, c] : partial) {
      Complex a = c;
      for (const auto& occ : mono.occupations()) a *= detail::sqrt_factorial(occ.second);
      out[mono] += a;
    }
  }
  return PureState(std::move(out), state.prune_epsilon());
}

using Matrix2 = std::array<std::array<Complex, 2>, 2>;

// Frobenius norm of u†u - I.
inline double unitarity_defect(const Matrix2& u) {
  double s = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Complex g = std::conj(u[0][i]) * u[0][j] + std::conj(u[1][i]) * u[1][j];
      if (i == j) g -= 1.0;
      s += std::norm(g);
    }
  }
  return std::sqrt(s);
}

inline constexpr double kUnitarityTolerance = 1e-12;

// A family of slots addressed by a coupler: every time bin of one
// (mode, pol), or with `pol` unset, every polarization and time bin of a mode.
struct SlotFamily {
  std::string mode;
  std::optional<Polarization> pol;

  bool contains(const SlotKey& s) const { return s.mode == mode && (!pol || s.pol == *pol); }
};

struct CouplerPorts {
  SlotFamily in_a;
  SlotFamily in_b;
  SlotFamily out_a;
  SlotFamily out_b;
};

// Two-port coupler. Creation operators on the input families transform as
//   in_a† -> u[0][0] out_a† + u[0][1] out_b†
//   in_b† -> u[1][0] out_a† + u[1][1] out_b†
// slot by slot, pairing slots that share the free coordinates (time bin, and
// polarization when the families leave it open).
inline PureState apply_coupler(const PureState& state, const CouplerPorts& ports, const Matrix2& u) {
  if (unitarity_defect(u) > kUnitarityTolerance) {
    throw Error(Errc::kNonUnitary, "coupler matrix is not unitary within 1e-12");
  }
  const bool pol_free = !ports.in_a.pol.has_value();
  if (ports.in_b.pol.has_value() == pol_free || ports.out_a.pol.has_value() == pol_free ||
      ports.out_b.pol.has_value() == pol_free) {
    throw Error(Errc::kInvalidArgument, "coupler families must all fix polarization or all leave it open");
  }
  if (ports.in_a.mode == ports.in_b.mode && ports.in_a.pol == ports.in_b.pol) {
    throw Error(Errc::kInvalidArgument, "coupler inputs address the same slots");
  }

  std::set<std::pair<Polarization, std::uint8_t>> coords;
  for (const SlotKey& s : state.slots()) {
    if (ports.in_a.contains(s) || ports.in_b.contains(s)) coords.emplace(s.pol, s.tbin);
  }
  auto slot_in = [](const SlotFamily& f, Polarization p, std::uint8_t t) {
    return SlotKey{f.mode, f.pol ? *f.pol : p, t};
  };

  LinearModeMap map;
  for (const auto& [p, t] : coords) {
    const SlotKey sa = slot_in(ports.in_a, p, t);
    const SlotKey sb = slot_in(ports.in_b, p, t);
    const SlotKey oa = slot_in(ports.out_a, p, t);
    const SlotKey ob = slot_in(ports.out_b, p, t);
    map[sa] = {{oa, u[0][0]}, {ob, u[0][1]}};
    map[sb] = {{oa, u[1][0]}, {ob, u[1][1]}};
  }
  return apply_linear_map(state, map);
}

// In-place form: outputs occupy the input families.
inline PureState apply_coupler(const PureState& state, const SlotFamily& a, const SlotFamily& b,
                               const Matrix2& u) {
  return apply_coupler(state, CouplerPorts{a, b, a, b}, u);
}

// ---------------------------------------------------------------------------
// Projective post-selection.

struct SlotPattern {
  std::string mode;
  std::optional<Polarization> pol;  // unset: any polarization
  std::optional<std::uint8_t> tbin;  // unset: any time bin

  bool matches(const SlotKey& s) const {
    return s.mode == mode && (!pol || s.pol == *pol) && (!tbin || s.tbin == *tbin);
  }
};

// Conjunction of photon-count constraints. A ket is accepted when, for every
// constraint, the photons in the matching slots add up to the required count.
class ProjectionSpec {
 public:
  struct Constraint {
    SlotPattern pattern;
    int count = 1;
  };

  ProjectionSpec() = default;

  explicit ProjectionSpec(std::vector<Constraint> constraints) {
    for (auto& c : constraints) require(std::move(c.pattern), c.count);
  }

  // One photon of the given polarization in each listed mode.
  static ProjectionSpec one_each(const std::vector<std::pair<std::string, Polarization>>& modes) {
    ProjectionSpec spec;
    for (const auto& [m, p] : modes) spec.require(SlotPattern{m, p, std::nullopt}, 1);
    return spec;
  }

  ProjectionSpec& require(SlotPattern pattern, int count) {
    if (count < 0) throw Error(Errc::kInvalidArgument, "negative required count");
    for (const auto& c : constraints_) {
      const bool pols_overlap = !c.pattern.pol || !pattern.pol || *c.pattern.pol == *pattern.pol;
      if (c.pattern.mode == pattern.mode && pols_overlap) {
        throw Error(Errc::kInvalidArgument, "projection constrains mode '" + pattern.mode + "' twice");
      }
    }
    constraints_.push_back(Constraint{std::move(pattern), count});
    return *this;
  }

  const std::vector<Constraint>& constraints() const { return constraints_; }

  bool accepts(const BasisKet& ket) const {
    for (const auto& c : constraints_) {
      int n = 0;
      for (const auto& [slot, k] : ket.occupations()) {
        if (c.pattern.matches(slot)) n += k;
      }
      if (n != c.count) return false;
    }
    return true;
  }

 private:
  std::vector<Constraint> constraints_;
};

struct ProjectionResult {
  double probability = 0.0;
  PureState collapsed;
};

inline ProjectionResult project(const PureState& state, const ProjectionSpec& spec) {
  PureState::TermMap kept;
  double p = 0.0;
  for (const auto& [ket, amp] : state.terms()) {
    if (!spec.accepts(ket)) continue;
    kept.emplace(ket, amp);
    p += std::norm(amp);
  }
  if (p == 0.0) return {0.0, PureState(PureState::TermMap{}, state.prune_epsilon())};
  PureState collapsed(std::move(kept), state.prune_epsilon());
  return {p, collapsed.scaled(1.0 / std::sqrt(p))};
}

}  // namespace qnet
