#pragma once

// Type-II SPDC pair source: ideal singlet states for the analytic engine and
// a stochastic emission model (entangled pairs, unpolarized background pairs,
// uncorrelated singles) for Monte Carlo.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qnet/error.hpp"
#include "qnet/fock.hpp"
#include "qnet/optics.hpp"
#include "qnet/rng.hpp"

namespace qnet {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct SpdcSpec {
  double wavelength_nm = 1570.0;
  double bandwidth_fwhm_nm = 3.0;
  double pair_rate_hz = 6e3;  // entangled singlet pairs per second
  double entangled_fraction = 0.17;
  double background_singles_rate_hz = 3e4;
  double hom_visibility = 0.68;

  void validate() const {
    if (!(wavelength_nm > 0.0)) throw Error(Errc::kInvalidArgument, "wavelength_nm must be positive");
    if (!(bandwidth_fwhm_nm > 0.0)) throw Error(Errc::kInvalidArgument, "bandwidth_fwhm_nm must be positive");
    if (pair_rate_hz < 0.0 || background_singles_rate_hz < 0.0) {
      throw Error(Errc::kInvalidArgument, "rates must be non-negative");
    }
    if (entangled_fraction < 0.0 || entangled_fraction > 1.0) {
      throw Error(Errc::kInvalidArgument, "entangled_fraction must lie in [0, 1]");
    }
    if (hom_visibility < 0.0 || hom_visibility > 1.0) {
      throw Error(Errc::kInvalidArgument, "hom_visibility must lie in [0, 1]");
    }
  }
};

enum class SourceEventClass : std::uint8_t { kEntangledSinglet, kUnpolarizedBackgroundPair, kSingleOnly };

// (|H>_a|V>_b - |V>_a|H>_b) / sqrt(2)
inline PureState singlet_pair(const std::string& mode_a, const std::string& mode_b) {
  if (mode_a == mode_b) throw Error(Errc::kSameMode, "singlet modes must differ");
  const double r = 1.0 / std::sqrt(2.0);
  const BasisKet hv({{SlotKey{mode_a, Polarization::H}, 1}, {SlotKey{mode_b, Polarization::V}, 1}});
  const BasisKet vh({{SlotKey{mode_a, Polarization::V}, 1}, {SlotKey{mode_b, Polarization::H}, 1}});
  return PureState(PureState::TermMap{{hv, Complex(r)}, {vh, Complex(-r)}});
}

// One singlet on (a, b) and one on (c, d).
inline PureState dual_pair(const std::string& a, const std::string& b, const std::string& c, const std::string& d) {
  return tensor(singlet_pair(a, b), singlet_pair(c, d));
}

inline PureState product_pair(const std::string& mode_a, Polarization pa, const std::string& mode_b, Polarization pb) {
  if (mode_a == mode_b) throw Error(Errc::kSameMode, "pair modes must differ");
  return PureState::from_ket(BasisKet({{SlotKey{mode_a, pa}, 1}, {SlotKey{mode_b, pb}, 1}}));
}

// Δν = c Δλ / λ²
inline double spectral_bandwidth_hz(const SpdcSpec& spec) {
  const double lambda = spec.wavelength_nm * 1e-9;
  return kSpeedOfLight * spec.bandwidth_fwhm_nm * 1e-9 / (lambda * lambda);
}

// Transform-limited Gaussian: FWHM_t = 0.441 / Δν.
inline double coherence_fwhm_ps(const SpdcSpec& spec) {
  if (!(spec.bandwidth_fwhm_nm > 0.0)) throw Error(Errc::kInvalidArgument, "bandwidth must be positive");
  return 0.441 / spectral_bandwidth_hz(spec) * 1e12;
}

inline double coherence_sigma_t(const SpdcSpec& spec) {
  return coherence_fwhm_ps(spec) / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
}

// The measured HOM visibility V is the dip depth, which scales with the
// squared overlap, so the cap on the overlap itself is sqrt(V).
inline WavepacketModel wavepacket_model(const SpdcSpec& spec) {
  return WavepacketModel{coherence_sigma_t(spec), std::sqrt(spec.hom_visibility)};
}

// All pairs (entangled + background). pair_rate_hz counts singlets only, so
// the total is pair_rate / entangled_fraction; with a zero fraction the pair
// rate is taken as the background pair rate.
inline double total_pair_rate_hz(const SpdcSpec& spec) {
  return spec.entangled_fraction > 0.0 ? spec.pair_rate_hz / spec.entangled_fraction : spec.pair_rate_hz;
}

struct EmissionEvent {
  std::int64_t time_ps = 0;
  SourceEventClass cls = SourceEventClass::kEntangledSinglet;

  friend bool operator==(const EmissionEvent&, const EmissionEvent&) = default;
};

// Emission is generated in fixed 10 ms blocks, each keyed independently, so a
// block can be produced on any worker with identical results.
inline constexpr std::int64_t kEmissionBlockPs = 10'000'000'000;

inline std::int64_t duration_to_ps(double duration_s) {
  return duration_s > 0.0 ? static_cast<std::int64_t>(std::llround(duration_s * 1e12)) : 0;
}

inline std::size_t emission_block_count(double duration_s) {
  const std::int64_t total = duration_to_ps(duration_s);
  return static_cast<std::size_t>((total + kEmissionBlockPs - 1) / kEmissionBlockPs);
}

namespace detail {

// Sorted arrival times of a homogeneous Poisson process on [start, start+len).
inline std::vector<std::int64_t> poisson_times(double rate_hz, std::int64_t start_ps, std::int64_t len_ps,
                                               CounterRng& rng) {
  std::vector<std::int64_t> out;
  if (rate_hz <= 0.0 || len_ps <= 0) return out;
  std::poisson_distribution<long long> count(rate_hz * static_cast<double>(len_ps) * 1e-12);
  const long long n = count(rng);
  out.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    out.push_back(start_ps + static_cast<std::int64_t>(rng.uniform() * static_cast<double>(len_ps)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

inline std::vector<EmissionEvent> sample_emission_block(const SpdcSpec& spec, double duration_s, std::size_t block,
                                                        std::uint64_t seed, std::uint64_t stream) {
  const std::int64_t total = duration_to_ps(duration_s);
  const std::int64_t start = static_cast<std::int64_t>(block) * kEmissionBlockPs;
  const std::int64_t len = std::min(kEmissionBlockPs, total - start);
  std::vector<EmissionEvent> out;
  if (len <= 0) return out;

  CounterRng pair_rng{seed, stream, 1, block};
  for (std::int64_t t : detail::poisson_times(total_pair_rate_hz(spec), start, len, pair_rng)) {
    const bool entangled = pair_rng.uniform() < spec.entangled_fraction;
    out.push_back({t, entangled ? SourceEventClass::kEntangledSinglet : SourceEventClass::kUnpolarizedBackgroundPair});
  }
  CounterRng single_rng{seed, stream, 2, block};
  for (std::int64_t t : detail::poisson_times(spec.background_singles_rate_hz, start, len, single_rng)) {
    out.push_back({t, SourceEventClass::kSingleOnly});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.time_ps < b.time_ps; });
  return out;
}

// Time-ordered emission stream over [0, duration).
inline std::vector<EmissionEvent> sample_emission(const SpdcSpec& spec, double duration_s, std::uint64_t seed,
                                                  std::uint64_t stream = 0) {
  std::vector<EmissionEvent> out;
  const std::size_t blocks = emission_block_count(duration_s);
  for (std::size_t b = 0; b < blocks; ++b) {
    auto part = sample_emission_block(spec, duration_s, b, seed, stream);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace qnet
