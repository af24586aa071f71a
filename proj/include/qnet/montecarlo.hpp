#pragma once

// Time-tag Monte Carlo and coincidence analysis.
//
// Each source event (pair, fused pair-of-pairs, or stray single) is pushed
// through the experiment's circuit by the analytic engine once per distinct
// input configuration; the resulting photon-number distribution over the
// detectors is then sampled per event, followed by per-photon survival
// (route loss, insertion loss, efficiency), route delay, Gaussian jitter,
// dark counts and dead time.
//
// Randomness is keyed by (seed, stream, block, event), so the output is
// bit-identical for any worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qnet/error.hpp"
#include "qnet/fit.hpp"
#include "qnet/fock.hpp"
#include "qnet/netmodel.hpp"
#include "qnet/optics.hpp"
#include "qnet/protocol.hpp"
#include "qnet/rng.hpp"
#include "qnet/source.hpp"

namespace qnet {

struct DetectorSpec {
  std::string id;
  double efficiency = 1.0;
  double dark_rate_hz = 0.0;
  double jitter_fwhm_ps = 0.0;
  double dead_time_ps = 0.0;

  // Placement: the circuit output mode watched, optionally through an ideal
  // polarizer; the route key used for network loss and delay; extra
  // fiber-coupling loss in front of the detector.
  std::string mode;
  std::optional<Polarization> pol;
  std::string route;
  double insertion_loss_db = 0.0;

  bool watches(const SlotKey& s) const { return s.mode == mode && (!pol || s.pol == *pol); }
};

struct TimeTag {
  std::string detector_id;
  std::int64_t time_ps = 0;

  friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

// detector id -> sorted tag times (ps since run start)
using TagStreams = std::map<std::string, std::vector<std::int64_t>>;

// Single time-ordered list; ties broken by detector id.
inline std::vector<TimeTag> merge_tags(const TagStreams& streams) {
  std::vector<TimeTag> out;
  for (const auto& [id, times] : streams) {
    for (std::int64_t t : times) out.push_back({id, t});
  }
  std::sort(out.begin(), out.end(), [](const TimeTag& a, const TimeTag& b) {
    return a.time_ps != b.time_ps ? a.time_ps < b.time_ps : a.detector_id < b.detector_id;
  });
  return out;
}

struct CoincidenceSpec {
  int fold = 2;
  std::int64_t window_ps = 2000;
  std::map<std::string, std::int64_t> channel_offsets_ps;  // software gating
  std::int64_t histogram_bin_ps = 100;
};

// A named n-fold coincidence count over a set of detectors.
struct CountSpec {
  std::string name;
  std::vector<std::string> channels;
};

struct Coincidence {
  std::int64_t start_ps = 0;                          // earliest member, offsets applied
  std::vector<std::pair<std::size_t, std::int64_t>> members;  // (channel index, time)
};

// Greedy earliest-first matching after channel offsets: the earliest unused
// tag opens a window [t0, t0 + window]; if at least fold-1 other channels have
// their next unused tag inside it, the earliest fold-1 of those join and all
// members are consumed. Otherwise only the opening tag is discarded.
inline std::vector<Coincidence> find_coincidences(const TagStreams& streams, const std::vector<std::string>& channels,
                                                  const CoincidenceSpec& spec) {
  if (spec.window_ps <= 0) throw Error(Errc::kInvalidArgument, "coincidence window must be positive");
  if (spec.fold < 2 || static_cast<std::size_t>(spec.fold) > channels.size()) {
    throw Error(Errc::kInvalidArgument, "coincidence fold must lie in [2, number of channels]");
  }
  const std::size_t n = channels.size();
  std::vector<const std::vector<std::int64_t>*> tags(n, nullptr);
  std::vector<std::int64_t> offset(n, 0);
  static const std::vector<std::int64_t> kEmpty;
  for (std::size_t c = 0; c < n; ++c) {
    auto it = streams.find(channels[c]);
    tags[c] = it == streams.end() ? &kEmpty : &it->second;
    auto off = spec.channel_offsets_ps.find(channels[c]);
    if (off != spec.channel_offsets_ps.end()) offset[c] = off->second;
  }
  std::vector<std::size_t> head(n, 0);
  auto time_at = [&](std::size_t c) { return (*tags[c])[head[c]] + offset[c]; };

  std::vector<Coincidence> out;
  std::vector<std::pair<std::int64_t, std::size_t>> cand;
  for (;;) {
    std::size_t c0 = n;
    std::int64_t t0 = 0;
    for (std::size_t c = 0; c < n; ++c) {
      if (head[c] >= tags[c]->size()) continue;
      const std::int64_t t = time_at(c);
      if (c0 == n || t < t0) {
        c0 = c;
        t0 = t;
      }
    }
    if (c0 == n) break;
    cand.clear();
    for (std::size_t c = 0; c < n; ++c) {
      if (c == c0 || head[c] >= tags[c]->size()) continue;
      const std::int64_t t = time_at(c);
      if (t - t0 <= spec.window_ps) cand.emplace_back(t, c);
    }
    if (cand.size() + 1 >= static_cast<std::size_t>(spec.fold)) {
      std::sort(cand.begin(), cand.end());
      Coincidence co;
      co.start_ps = t0;
      co.members.emplace_back(c0, t0);
      for (std::size_t k = 0; k + 1 < static_cast<std::size_t>(spec.fold); ++k) {
        co.members.emplace_back(cand[k].second, cand[k].first);
        ++head[cand[k].second];
      }
      out.push_back(std::move(co));
    }
    ++head[c0];
  }
  return out;
}

inline std::size_t count_coincidences(const TagStreams& streams, const CountSpec& count, const CoincidenceSpec& spec) {
  CoincidenceSpec s = spec;
  s.fold = static_cast<int>(count.channels.size());
  return find_coincidences(streams, count.channels, s).size();
}

// Shifted-window accidental estimator: the coincidence count with the last
// channel delayed by offset_ps, divided by the acquisition time.
inline double accidental_estimate(const TagStreams& streams, const std::vector<std::string>& channels,
                                  const CoincidenceSpec& spec, std::int64_t offset_ps, double duration_s) {
  if (!(duration_s > 0.0)) throw Error(Errc::kInvalidArgument, "duration must be positive");
  if (channels.empty()) return 0.0;
  CoincidenceSpec shifted = spec;
  shifted.channel_offsets_ps[channels.back()] += offset_ps;
  return static_cast<double>(find_coincidences(streams, channels, shifted).size()) / duration_s;
}

// ---------------------------------------------------------------------------
// Histograms.

struct Histogram {
  std::int64_t bin_ps = 100;
  std::int64_t origin_ps = 0;  // left edge of bin 0
  std::vector<std::uint64_t> counts;

  double center(std::size_t i) const {
    return static_cast<double>(origin_ps) + (static_cast<double>(i) + 0.5) * static_cast<double>(bin_ps);
  }
  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
};

// Histogram of t_B - t_A over all tag pairs with the delay inside the range.
// Bins are centered on lo_ps, lo_ps + bin, ..., hi_ps.
inline Histogram g2_histogram(const std::vector<std::int64_t>& stream_a, const std::vector<std::int64_t>& stream_b,
                              std::int64_t lo_ps, std::int64_t hi_ps, std::int64_t bin_ps) {
  if (bin_ps <= 0) throw Error(Errc::kInvalidArgument, "bin width must be positive");
  if (hi_ps < lo_ps || (hi_ps - lo_ps) % bin_ps != 0) {
    throw Error(Errc::kInvalidArgument, "bin width must divide the histogram range");
  }
  Histogram h;
  h.bin_ps = bin_ps;
  h.origin_ps = lo_ps - bin_ps / 2;
  const std::size_t nbins = static_cast<std::size_t>((hi_ps - lo_ps) / bin_ps + 1);
  h.counts.assign(nbins, 0);
  const std::int64_t left = h.origin_ps;
  const std::int64_t right = h.origin_ps + static_cast<std::int64_t>(nbins) * bin_ps;  // exclusive
  std::size_t start = 0;
  for (std::int64_t ta : stream_a) {
    while (start < stream_b.size() && stream_b[start] - ta < left) ++start;
    for (std::size_t j = start; j < stream_b.size(); ++j) {
      const std::int64_t d = stream_b[j] - ta;
      if (d >= right) break;
      ++h.counts[static_cast<std::size_t>((d - left) / bin_ps)];
    }
  }
  return h;
}

// Center of the fullest bin; ties go to the smaller |tau|, then the earlier bin.
inline double relative_delay_estimate(const Histogram& h) {
  if (h.counts.empty() || h.total() == 0) throw Error(Errc::kEmptyHistogram, "histogram has no counts");
  std::size_t best = 0;
  for (std::size_t i = 1; i < h.counts.size(); ++i) {
    if (h.counts[i] > h.counts[best] ||
        (h.counts[i] == h.counts[best] && std::abs(h.center(i)) < std::abs(h.center(best)))) {
      best = i;
    }
  }
  return h.center(best);
}

// Gaussian fit to the bins within half_width_ps of the peak.
inline GaussianFit fit_histogram_peak(const Histogram& h, double half_width_ps) {
  const double peak = relative_delay_estimate(h);
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (std::abs(h.center(i) - peak) <= half_width_ps) {
      x.push_back(h.center(i));
      y.push_back(static_cast<double>(h.counts[i]));
    }
  }
  return fit_gaussian(x, y);
}

// ---------------------------------------------------------------------------
// CSV exchange formats.

inline void write_timetags_csv(std::ostream& os, const TagStreams& streams) {
  os << "detector_id,time_ps\n";
  for (const auto& t : merge_tags(streams)) os << t.detector_id << ',' << t.time_ps << '\n';
}

inline TagStreams read_timetags_csv(std::istream& is) {
  TagStreams out;
  std::string line;
  if (!std::getline(is, line) || line.rfind("detector_id,time_ps", 0) != 0) {
    throw Error(Errc::kInvalidArgument, "time-tag file must start with 'detector_id,time_ps'");
  }
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) throw Error(Errc::kInvalidArgument, "line " + std::to_string(lineno) + ": missing ','");
    try {
      std::size_t used = 0;
      const std::string num = line.substr(comma + 1);
      const long long t = std::stoll(num, &used);
      if (used != num.size()) throw std::invalid_argument("trailing");
      out[line.substr(0, comma)].push_back(t);
    } catch (const std::exception&) {
      throw Error(Errc::kInvalidArgument, "line " + std::to_string(lineno) + ": bad time value");
    }
  }
  for (auto& [id, v] : out) std::sort(v.begin(), v.end());
  return out;
}

inline void write_histogram_csv(std::ostream& os, const Histogram& h) {
  os << "bin_center_ps,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) os << detail::format_double(h.center(i)) << ',' << h.counts[i] << '\n';
}

// ---------------------------------------------------------------------------
// Experiments.

enum class EmissionUnit {
  kPair,  // one pair per event on input_modes[0..1]
  kDuo,   // two pairs arriving together after the splitter tree, on input_modes[0..3]
  kDegeneratePair,  // both photons of a pair in the single mode input_modes[0]
};

struct Experiment {
  SpdcSpec source;
  EmissionUnit unit = EmissionUnit::kPair;
  std::vector<std::string> input_modes{"a", "b"};
  double fusion_probability = 1.0 / 32.0;  // duo events only
  Circuit circuit;
  Topology topology;
  RoutePlan routes;
  std::vector<DetectorSpec> detectors;
  CoincidenceSpec coincidence;
  std::vector<CountSpec> counts;
  double duration_s = 1.0;
  std::int64_t accidental_offset_ps = 100'000;
};

inline void validate_experiment(const Experiment& ex) {
  auto fail = [](const std::string& path, const std::string& msg) { throw Error(Errc::kConfigInvalid, path + ": " + msg); };
  try {
    ex.source.validate();
  } catch (const Error& e) {
    fail("source", e.what());
  }
  const std::size_t want = ex.unit == EmissionUnit::kDuo ? 4 : ex.unit == EmissionUnit::kPair ? 2 : 1;
  if (ex.input_modes.size() != want) fail("input.modes", "expected " + std::to_string(want) + " modes");
  for (const auto& m : ex.input_modes) {
    if (!ex.circuit.modes().count(m)) fail("input.modes", "mode '" + m + "' not registered in the circuit");
  }
  if (ex.fusion_probability < 0.0 || ex.fusion_probability > 1.0) fail("input.fusion_probability", "must lie in [0, 1]");
  if (ex.duration_s < 0.0) fail("duration_s", "must be non-negative");
  try {
    validate_plan(ex.routes, ex.topology);
  } catch (const Error& e) {
    fail("routes", e.what());
  }
  std::map<std::string, std::size_t> ids;
  for (std::size_t i = 0; i < ex.detectors.size(); ++i) {
    const auto& d = ex.detectors[i];
    const std::string path = "detectors[" + std::to_string(i) + "]";
    if (d.id.empty()) fail(path + ".id", "must be non-empty");
    if (!ids.emplace(d.id, i).second) fail(path + ".id", "duplicate detector id '" + d.id + "'");
    if (d.efficiency < 0.0 || d.efficiency > 1.0) fail(path + ".efficiency", "must lie in [0, 1]");
    if (d.dark_rate_hz < 0.0) fail(path + ".dark_rate_hz", "must be non-negative");
    if (d.jitter_fwhm_ps < 0.0) fail(path + ".jitter_fwhm_ps", "must be non-negative");
    if (d.dead_time_ps < 0.0) fail(path + ".dead_time_ps", "must be non-negative");
    if (d.insertion_loss_db < 0.0) fail(path + ".insertion_loss_db", "must be non-negative");
    if (!ex.circuit.modes().count(d.mode)) fail(path + ".mode", "unknown circuit mode '" + d.mode + "'");
    if (!d.route.empty() && !ex.routes.path(d.route)) fail(path + ".route", "no route named '" + d.route + "'");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = ex.detectors[j];
      if (o.mode == d.mode && (!o.pol || !d.pol || *o.pol == *d.pol)) {
        fail(path + ".mode", "overlaps with detector '" + o.id + "'");
      }
    }
  }
  if (ex.coincidence.window_ps <= 0) fail("coincidence.window_ps", "must be positive");
  if (ex.coincidence.histogram_bin_ps <= 0) fail("coincidence.histogram_bin_ps", "must be positive");
  for (const auto& [id, off] : ex.coincidence.channel_offsets_ps) {
    if (!ids.count(id)) fail("coincidence.offsets_ps." + id, "unknown detector");
  }
  for (std::size_t i = 0; i < ex.counts.size(); ++i) {
    const auto& c = ex.counts[i];
    const std::string path = "counts[" + std::to_string(i) + "]";
    if (c.channels.size() < 2) fail(path + ".channels", "need at least two channels");
    for (const auto& ch : c.channels) {
      if (!ids.count(ch)) fail(path + ".channels", "unknown detector '" + ch + "'");
    }
  }
}

// Photon-number distribution over the detectors for one input configuration.
struct OutcomeTable {
  struct Outcome {
    double probability = 0.0;
    std::vector<std::uint8_t> photons;  // per detector, in experiment order
  };
  std::vector<Outcome> outcomes;
  std::vector<double> cumulative;

  std::size_t sample(double u) const {
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - cumulative.begin());
    return i < outcomes.size() ? i : outcomes.size() - 1;
  }
};

inline OutcomeTable build_outcome_table(const PureState& input, const Experiment& ex) {
  const PureState out = run_circuit(input, ex.circuit, wavepacket_model(ex.source));
  std::map<std::vector<std::uint8_t>, double> acc;
  for (const auto& [ket, amp] : out.terms()) {
    std::vector<std::uint8_t> n(ex.detectors.size(), 0);
    for (const auto& [slot, k] : ket.occupations()) {
      for (std::size_t d = 0; d < ex.detectors.size(); ++d) {
        if (ex.detectors[d].watches(slot)) {
          n[d] = static_cast<std::uint8_t>(n[d] + k);
          break;
        }
      }
    }
    acc[n] += std::norm(amp);
  }
  OutcomeTable t;
  double run = 0.0;
  for (auto& [n, p] : acc) {
    t.outcomes.push_back({p, n});
    run += p;
    t.cumulative.push_back(run);
  }
  // Normalize away rounding so sampling covers [0, 1).
  if (run > 0.0) {
    for (auto& c : t.cumulative) c /= run;
  }
  return t;
}

// Input configurations in a fixed order. Pair unit: 0 = singlet (for the
// degenerate unit, |1_H 1_V> in the one mode),
// 1..4 = product pair (pa, pb) in HH, HV, VH, VV order. Duo unit: 5 i + j for
// pair configurations i (on modes 0,1) and j (on modes 2,3) with the same
// 0..4 numbering. Singles follow: one per (input mode, polarization).
struct InputCatalog {
  std::vector<PureState> states;
  std::vector<double> unit_weights;  // per non-single configuration
  std::size_t single_base = 0;
};

inline InputCatalog build_input_catalog(const Experiment& ex) {
  const auto& m = ex.input_modes;
  const double f = ex.source.entangled_fraction;
  auto pair_config = [&](std::size_t k, const std::string& x, const std::string& y) {
    if (x == y) {
      // Orthogonally polarized photons sharing one spatial mode.
      if (k == 0) return PureState::from_ket(BasisKet({{SlotKey{x, Polarization::H}, 1}, {SlotKey{x, Polarization::V}, 1}}));
      const Polarization pa = (k - 1) & 2 ? Polarization::V : Polarization::H;
      const Polarization pb = (k - 1) & 1 ? Polarization::V : Polarization::H;
      return PureState::from_ket(BasisKet({{SlotKey{x, pa}, 1}, {SlotKey{x, pb}, 1}})).normalized();
    }
    if (k == 0) return singlet_pair(x, y);
    const Polarization pa = (k - 1) & 2 ? Polarization::V : Polarization::H;
    const Polarization pb = (k - 1) & 1 ? Polarization::V : Polarization::H;
    return product_pair(x, pa, y, pb);
  };
  auto pair_weight = [&](std::size_t k) { return k == 0 ? f : (1.0 - f) / 4.0; };
  InputCatalog cat;
  if (ex.unit != EmissionUnit::kDuo) {
    const std::string& second = ex.unit == EmissionUnit::kPair ? m[1] : m[0];
    for (std::size_t k = 0; k < 5; ++k) {
      cat.states.push_back(pair_config(k, m[0], second));
      cat.unit_weights.push_back(pair_weight(k));
    }
  } else {
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        cat.states.push_back(tensor(pair_config(i, m[0], m[1]), pair_config(j, m[2], m[3])));
        cat.unit_weights.push_back(pair_weight(i) * pair_weight(j));
      }
    }
  }
  cat.single_base = cat.states.size();
  for (const auto& mode : m) {
    for (Polarization p : {Polarization::H, Polarization::V}) {
      cat.states.push_back(PureState::from_ket(BasisKet({{SlotKey{mode, p}, 1}})));
    }
  }
  return cat;
}

template <typename F>
void parallel_for(std::size_t n, int workers, F&& fn) {
  std::size_t w = workers > 0 ? static_cast<std::size_t>(workers)
                              : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  w = std::min(w, n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t k = 0; k < w; ++k) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline constexpr double kFwhmPerSigma = 2.3548200450309493;  // 2 sqrt(2 ln 2)

inline TagStreams simulate_timetags(const Experiment& ex, std::uint64_t seed, int workers = 1,
                                    std::uint64_t stream = 0) {
  validate_experiment(ex);
  const InputCatalog cat = build_input_catalog(ex);
  std::vector<OutcomeTable> tables;
  tables.reserve(cat.states.size());
  for (const auto& s : cat.states) tables.push_back(build_outcome_table(s, ex));

  const std::size_t nd = ex.detectors.size();
  std::vector<double> eta(nd);
  std::vector<std::int64_t> delay(nd);
  std::vector<double> jitter_sigma(nd);
  for (std::size_t d = 0; d < nd; ++d) {
    const auto& det = ex.detectors[d];
    double loss = det.insertion_loss_db;
    double delay_us = 0.0;
    if (!det.route.empty()) {
      loss += path_loss_db(ex.routes, ex.topology, det.route);
      delay_us = mode_delay_us(ex.routes, ex.topology, det.route);
    }
    eta[d] = det.efficiency * db_to_transmission(loss);
    delay[d] = static_cast<std::int64_t>(std::llround(delay_us * 1e6));
    jitter_sigma[d] = det.jitter_fwhm_ps / kFwhmPerSigma;
  }

  const double f = ex.source.entangled_fraction;
  const double unit_rate = ex.unit == EmissionUnit::kDuo
                               ? total_pair_rate_hz(ex.source) / 2.0 * ex.fusion_probability
                               : total_pair_rate_hz(ex.source);
  const std::int64_t total_ps = duration_to_ps(ex.duration_s);
  const std::size_t blocks = emission_block_count(ex.duration_s);
  const std::size_t n_inputs = ex.input_modes.size();

  std::vector<std::vector<std::vector<std::int64_t>>> per_block(blocks, std::vector<std::vector<std::int64_t>>(nd));
  parallel_for(blocks, workers, [&](std::size_t b) {
    auto& out = per_block[b];
    const std::int64_t start = static_cast<std::int64_t>(b) * kEmissionBlockPs;
    const std::int64_t len = std::min(kEmissionBlockPs, total_ps - start);

    struct Event {
      std::int64_t t;
      std::size_t config;
    };
    std::vector<Event> events;
    CounterRng unit_rng{seed, stream, 1, b};
    auto sample_pair_config = [&](CounterRng& r) -> std::size_t {
      if (r.uniform() < f) return 0;
      return 1 + static_cast<std::size_t>(r() % 4);
    };
    for (std::int64_t t : detail::poisson_times(unit_rate, start, len, unit_rng)) {
      std::size_t cfg = sample_pair_config(unit_rng);
      if (ex.unit == EmissionUnit::kDuo) cfg = 5 * cfg + sample_pair_config(unit_rng);
      events.push_back({t, cfg});
    }
    CounterRng single_rng{seed, stream, 2, b};
    for (std::int64_t t : detail::poisson_times(ex.source.background_singles_rate_hz, start, len, single_rng)) {
      events.push_back({t, cat.single_base + static_cast<std::size_t>(single_rng() % (2 * n_inputs))});
    }

    for (std::size_t i = 0; i < events.size(); ++i) {
      CounterRng rng{seed, stream, 4, b, i};
      const OutcomeTable& table = tables[events[i].config];
      if (table.outcomes.empty()) continue;
      const auto& outcome = table.outcomes[table.sample(rng.uniform())];
      for (std::size_t d = 0; d < nd; ++d) {
        const int n = outcome.photons[d];
        if (n == 0) continue;
        const double p_click = 1.0 - std::pow(1.0 - eta[d], n);
        if (rng.uniform() >= p_click) continue;
        std::int64_t t = events[i].t + delay[d];
        if (jitter_sigma[d] > 0.0) {
          std::normal_distribution<double> jitter(0.0, jitter_sigma[d]);
          t += static_cast<std::int64_t>(std::llround(jitter(rng)));
        }
        out[d].push_back(t);
      }
    }
    for (std::size_t d = 0; d < nd; ++d) {
      CounterRng dark_rng{seed, stream, 5, b, d};
      auto darks = detail::poisson_times(ex.detectors[d].dark_rate_hz, start, len, dark_rng);
      out[d].insert(out[d].end(), darks.begin(), darks.end());
    }
  });

  TagStreams streams;
  for (std::size_t d = 0; d < nd; ++d) {
    std::vector<std::int64_t> all;
    for (std::size_t b = 0; b < blocks; ++b) all.insert(all.end(), per_block[b][d].begin(), per_block[b][d].end());
    std::sort(all.begin(), all.end());
    const double dead = ex.detectors[d].dead_time_ps;
    if (dead > 0.0) {
      std::vector<std::int64_t> kept;
      kept.reserve(all.size());
      for (std::int64_t t : all) {
        if (kept.empty() || static_cast<double>(t - kept.back()) >= dead) kept.push_back(t);
      }
      all.swap(kept);
    }
    streams[ex.detectors[d].id] = std::move(all);
  }
  return streams;
}

// ---------------------------------------------------------------------------
// Analytic predictions for the configured counts (ideal detection: unit
// efficiency, no loss, no noise).

struct Prediction {
  std::string count;
  double ideal = 0.0;  // singlet input (both pairs singlets for duo events)
  double mixed = 0.0;  // weighted over entangled and background inputs
};

inline std::vector<Prediction> predict(const Experiment& ex) {
  validate_experiment(ex);
  const InputCatalog cat = build_input_catalog(ex);
  std::map<std::string, std::size_t> index;
  for (std::size_t d = 0; d < ex.detectors.size(); ++d) index[ex.detectors[d].id] = d;
  std::vector<Prediction> out;
  std::vector<OutcomeTable> tables;
  for (std::size_t k = 0; k < cat.single_base; ++k) tables.push_back(build_outcome_table(cat.states[k], ex));
  for (const auto& count : ex.counts) {
    Prediction p;
    p.count = count.name;
    for (std::size_t k = 0; k < cat.single_base; ++k) {
      double prob = 0.0;
      for (const auto& o : tables[k].outcomes) {
        bool all = true;
        for (const auto& ch : count.channels) all = all && o.photons[index.at(ch)] > 0;
        if (all) prob += o.probability;
      }
      if (k == 0) p.ideal = prob;
      p.mixed += cat.unit_weights[k] * prob;
    }
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scans.

enum class ScanAxis { kVdlDelay, kLcvrPhase, kProjectionPattern };

inline const char* to_string(ScanAxis a) {
  switch (a) {
    case ScanAxis::kVdlDelay: return "vdl_delay";
    case ScanAxis::kLcvrPhase: return "lcvr_phase";
    case ScanAxis::kProjectionPattern: return "projection_pattern";
  }
  return "?";
}

struct ScanSpec {
  ScanAxis axis = ScanAxis::kVdlDelay;
  std::string element;                    // delay line / LCVR label
  std::vector<std::string> detectors;     // projection targets, in pattern order
  std::vector<double> values;             // delays (ps) or LCVR control values
  std::vector<std::string> patterns;      // "HVVH" ...
  LcvrCalibration calibration;            // empty: control value is the retardance in rad

  std::size_t size() const { return axis == ScanAxis::kProjectionPattern ? patterns.size() : values.size(); }

  std::string label(std::size_t i) const {
    return axis == ScanAxis::kProjectionPattern ? patterns.at(i) : detail::format_double(values.at(i));
  }
};

inline Experiment apply_scan_point(const Experiment& ex, const ScanSpec& scan, std::size_t i) {
  Experiment out = ex;
  if (scan.axis == ScanAxis::kProjectionPattern) {
    const std::string& pat = scan.patterns.at(i);
    if (pat.size() != scan.detectors.size()) {
      throw Error(Errc::kConfigInvalid, "scan.points[" + std::to_string(i) + "]: pattern length must match scan.detectors");
    }
    for (std::size_t k = 0; k < pat.size(); ++k) {
      auto pol = parse_polarization(std::string_view(&pat[k], 1));
      if (!pol) throw Error(Errc::kConfigInvalid, "scan.points[" + std::to_string(i) + "]: expected H or V");
      auto it = std::find_if(out.detectors.begin(), out.detectors.end(),
                             [&](const DetectorSpec& d) { return d.id == scan.detectors[k]; });
      if (it == out.detectors.end()) throw Error(Errc::kConfigInvalid, "scan.detectors: unknown detector '" + scan.detectors[k] + "'");
      it->pol = *pol;
    }
    return out;
  }
  const auto idx = ex.circuit.find(scan.element);
  if (!idx) throw Error(Errc::kConfigInvalid, "scan.element: no circuit element labelled '" + scan.element + "'");
  ElementSpec e = ex.circuit.elements()[*idx];
  const double v = scan.values.at(i);
  if (scan.axis == ScanAxis::kVdlDelay) {
    auto* dl = std::get_if<DelayLine>(&e);
    if (!dl) throw Error(Errc::kConfigInvalid, "scan.element: '" + scan.element + "' is not a delay line");
    dl->delay_ps = v;
  } else {
    auto* lc = std::get_if<Lcvr>(&e);
    if (!lc) throw Error(Errc::kConfigInvalid, "scan.element: '" + scan.element + "' is not an LCVR");
    lc->retardance_rad = scan.calibration.retardance(v);
  }
  out.circuit = ex.circuit.with_replaced(*idx, std::move(e));
  return out;
}

struct ScanRow {
  std::string scan_value;
  std::string count;
  std::uint64_t raw = 0;
  std::uint64_t accidental = 0;  // shifted-window count over the same acquisition
  double net = 0.0;              // raw - accidental
};

// Scan point i uses random stream i + 1.
inline std::vector<ScanRow> scan(const Experiment& ex, const ScanSpec& spec, std::uint64_t seed, int workers = 1) {
  std::vector<ScanRow> rows;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const Experiment point = apply_scan_point(ex, spec, i);
    const TagStreams streams = simulate_timetags(point, seed, workers, i + 1);
    for (const auto& count : point.counts) {
      ScanRow row;
      row.scan_value = spec.label(i);
      row.count = count.name;
      row.raw = count_coincidences(streams, count, point.coincidence);
      CoincidenceSpec shifted = point.coincidence;
      shifted.channel_offsets_ps[count.channels.back()] += point.accidental_offset_ps;
      row.accidental = count_coincidences(streams, count, shifted);
      row.net = static_cast<double>(row.raw) - static_cast<double>(row.accidental);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace qnet
