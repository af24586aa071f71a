#pragma once

// Experiment configs (JSON), validation with path-located diagnostics, and the
// predict / simulate / g2 / throughput runners behind the qnetsim tool.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qnet/error.hpp"
#include "qnet/fit.hpp"
#include "qnet/montecarlo.hpp"
#include "qnet/netmodel.hpp"
#include "qnet/optics.hpp"
#include "qnet/protocol.hpp"
#include "qnet/source.hpp"

namespace qnet::cli {

using json = nlohmann::json;

inline constexpr const char* kToolName = "qnetsim";
inline constexpr const char* kVersion = "0.3.0";

struct Diagnostic {
  std::string path;
  std::string message;

  std::string str() const { return (path.empty() ? std::string("<root>") : path) + ": " + message; }
};

enum class Mode { kPredict, kSimulate, kThroughput, kG2 };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::kPredict: return "predict";
    case Mode::kSimulate: return "simulate";
    case Mode::kThroughput: return "throughput";
    case Mode::kG2: return "g2";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(const std::string& s) {
  if (s == "predict") return Mode::kPredict;
  if (s == "simulate") return Mode::kSimulate;
  if (s == "throughput") return Mode::kThroughput;
  if (s == "g2") return Mode::kG2;
  return std::nullopt;
}

struct G2Spec {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::int64_t lo_ps = 0;
  std::int64_t hi_ps = 0;
  std::int64_t bin_ps = 100;
  double fit_half_width_ps = 3000.0;
};

struct ThroughputConfig {
  ThroughputSpec spec;
  std::vector<HeraldClass> heralds{HeraldClass::kNoonH};
  std::optional<double> target_rate_hz;
};

struct RunConfig {
  json effective;
  std::string name;
  Mode mode = Mode::kPredict;
  std::uint64_t seed = 1;
  Experiment experiment;
  std::optional<ScanSpec> scan;
  std::optional<G2Spec> g2;
  std::optional<ThroughputConfig> throughput;
};

struct LoadResult {
  std::optional<RunConfig> config;
  std::vector<Diagnostic> diagnostics;
};

// ---------------------------------------------------------------------------
// Raw JSON handling.

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kConfigInvalid, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::kConfigInvalid, path.string() + ": " + e.what());
  }
}

// A run manifest carries the effective config; rerunning from it is the same
// as rerunning from the original file.
inline json unwrap_manifest(const json& j) {
  if (j.is_object() && j.contains("config") && j.contains("config_hash") && j["config"].is_object()) return j["config"];
  return j;
}

// "a.b.0.c=value". The value is parsed as JSON when possible, else taken as a
// string.
inline void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(Errc::kConfigInvalid, "override '" + assignment + "' must look like key.path=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* cur = &root;
  std::stringstream ss(key);
  std::string seg;
  std::vector<std::string> segs;
  while (std::getline(ss, seg, '.')) segs.push_back(seg);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string& s = segs[i];
    if (s.empty()) throw Error(Errc::kConfigInvalid, "override '" + key + "' has an empty path segment");
    json* next = nullptr;
    if (cur->is_array()) {
      std::size_t idx = 0;
      try {
        std::size_t used = 0;
        idx = std::stoul(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
      } catch (const std::exception&) {
        throw Error(Errc::kConfigInvalid, "override '" + key + "': '" + s + "' is not an array index");
      }
      if (idx >= cur->size()) throw Error(Errc::kConfigInvalid, "override '" + key + "': index " + s + " out of range");
      next = &(*cur)[idx];
    } else {
      if (cur->is_null()) *cur = json::object();
      if (!cur->is_object()) throw Error(Errc::kConfigInvalid, "override '" + key + "': cannot descend into a scalar");
      next = &(*cur)[s];
    }
    cur = next;
  }
  *cur = std::move(value);
}

// Inlines "topology": "<file>" (relative to base_dir).
inline void inline_topology(json& cfg, const std::filesystem::path& base_dir) {
  if (cfg.is_object() && cfg.contains("topology") && cfg["topology"].is_string()) {
    std::filesystem::path p = cfg["topology"].get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    cfg["topology"] = read_json_file(p);
  }
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const json& effective) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(effective.dump())));
  return buf;
}

// ---------------------------------------------------------------------------
// Interpretation with diagnostics.

namespace detail {

class Reader {
 public:
  std::vector<Diagnostic> diags;

  void error(const std::string& path, const std::string& msg) { diags.push_back({path, msg}); }

  static std::string key(const std::string& p, const std::string& k) { return p.empty() ? k : p + "." + k; }
  static std::string at(const std::string& p, std::size_t i) { return p + "[" + std::to_string(i) + "]"; }

  bool expect_object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    error(path, "expected an object");
    return false;
  }

  bool expect_array(const json& j, const std::string& path) {
    if (j.is_array()) return true;
    error(path, "expected an array");
    return false;
  }

  void known(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool ok = false;
      for (const char* k : keys) ok = ok || it.key() == k;
      if (!ok) error(key(path, it.key()), "unknown key");
    }
  }

  double number(const json& obj, const std::string& path, const char* k, double def, double lo = -kInf,
                double hi = kInf, bool required = false) {
    if (!obj.contains(k)) {
      if (required) error(key(path, k), "required");
      return def;
    }
    const json& v = obj[k];
    if (!v.is_number()) {
      error(key(path, k), "expected a number");
      return def;
    }
    const double x = v.get<double>();
    if (x < lo || x > hi) {
      error(key(path, k), range_message(lo, hi));
      return def;
    }
    return x;
  }

  std::optional<double> optional_number(const json& obj, const std::string& path, const char* k, double lo = -kInf,
                                        double hi = kInf) {
    if (!obj.contains(k) || obj[k].is_null()) return std::nullopt;
    const std::size_t before = diags.size();
    const double x = number(obj, path, k, 0.0, lo, hi);
    return diags.size() == before ? std::optional<double>(x) : std::nullopt;
  }

  std::int64_t integer(const json& obj, const std::string& path, const char* k, std::int64_t def,
                       std::int64_t lo = std::numeric_limits<std::int64_t>::min(), bool required = false) {
    if (!obj.contains(k)) {
      if (required) error(key(path, k), "required");
      return def;
    }
    const json& v = obj[k];
    if (!v.is_number_integer()) {
      error(key(path, k), "expected an integer");
      return def;
    }
    const std::int64_t x = v.get<std::int64_t>();
    if (x < lo) {
      error(key(path, k), "must be >= " + std::to_string(lo));
      return def;
    }
    return x;
  }

  std::string string(const json& obj, const std::string& path, const char* k, const std::string& def = {},
                     bool required = false) {
    if (!obj.contains(k)) {
      if (required) error(key(path, k), "required");
      return def;
    }
    if (!obj[k].is_string()) {
      error(key(path, k), "expected a string");
      return def;
    }
    return obj[k].get<std::string>();
  }

  std::vector<std::string> strings(const json& obj, const std::string& path, const char* k, bool required = false) {
    std::vector<std::string> out;
    if (!obj.contains(k)) {
      if (required) error(key(path, k), "required");
      return out;
    }
    const json& v = obj[k];
    if (!expect_array(v, key(path, k))) return out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) {
        error(at(key(path, k), i), "expected a string");
        continue;
      }
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  static std::string range_message(double lo, double hi) {
    if (lo == 0.0 && hi == kInf) return "must be non-negative";
    if (hi == kInf) return "must be >= " + qnet::detail::format_double(lo);
    if (lo == -kInf) return "must be <= " + qnet::detail::format_double(hi);
    return "must lie in [" + qnet::detail::format_double(lo) + ", " + qnet::detail::format_double(hi) + "]";
  }
};

inline std::string link_name(const json& l) {
  const std::string from = l.is_object() && l.contains("from") && l["from"].is_string() ? l["from"].get<std::string>() : "?";
  const std::string to = l.is_object() && l.contains("to") && l["to"].is_string() ? l["to"].get<std::string>() : "?";
  return from + "-" + to;
}

inline Topology read_topology(Reader& r, const json& j, const std::string& path) {
  Topology topo;
  if (!r.expect_object(j, path)) return topo;
  r.known(j, path, {"name", "group_index", "nodes", "links"});
  topo.group_index = r.number(j, path, "group_index", kDefaultGroupIndex, 1.0);
  if (j.contains("nodes") && r.expect_array(j["nodes"], Reader::key(path, "nodes"))) {
    const std::string np = Reader::key(path, "nodes");
    for (std::size_t i = 0; i < j["nodes"].size(); ++i) {
      const json& n = j["nodes"][i];
      const std::string p = Reader::at(np, i);
      if (!r.expect_object(n, p)) continue;
      r.known(n, p, {"id", "role", "label"});
      Node node;
      node.id = r.string(n, p, "id", "", true);
      const std::string role = r.string(n, p, "role", "remote");
      if (role == "source_lab") {
        node.role = NodeRole::kSourceLab;
      } else if (role != "remote") {
        r.error(Reader::key(p, "role"), "expected 'source_lab' or 'remote'");
      }
      if (node.id.empty()) continue;
      if (topo.find_node(node.id)) {
        r.error(Reader::key(p, "id"), "duplicate node id '" + node.id + "'");
        continue;
      }
      topo.add_node(node);
    }
  } else if (!j.contains("nodes")) {
    r.error(Reader::key(path, "nodes"), "required");
  }
  if (j.contains("links") && r.expect_array(j["links"], Reader::key(path, "links"))) {
    const std::string lp = Reader::key(path, "links");
    for (std::size_t i = 0; i < j["links"].size(); ++i) {
      const json& l = j["links"][i];
      const std::string p = Reader::at(lp, i) + " (" + link_name(l) + ")";
      if (!r.expect_object(l, p)) continue;
      r.known(l, p, {"from", "to", "loss_db", "delay_us", "length_km", "label"});
      Link link;
      link.from = r.string(l, p, "from", "", true);
      link.to = r.string(l, p, "to", "", true);
      // A bad number is reported but the link is kept so routes over it do
      // not produce follow-on errors.
      link.loss_db = r.number(l, p, "loss_db", 0.0, 0.0, std::numeric_limits<double>::infinity(), true);
      link.delay_us = r.optional_number(l, p, "delay_us", 0.0);
      link.length_km = r.optional_number(l, p, "length_km", 0.0);
      if (!link.delay_us && !link.length_km) {
        if (!l.contains("delay_us") && !l.contains("length_km")) r.error(p, "needs delay_us or length_km");
        link.delay_us = 0.0;
      }
      bool ok = true;
      for (const std::string* end : {&link.from, &link.to}) {
        if (!end->empty() && !topo.find_node(*end)) {
          r.error(p, "unknown node '" + *end + "'");
          ok = false;
        }
      }
      if (!ok || link.from.empty() || link.to.empty()) continue;
      if (link.from == link.to) {
        r.error(p, "link endpoints must differ");
        continue;
      }
      if (topo.find_link(link.from, link.to)) {
        r.error(p, "duplicate link");
        continue;
      }
      topo.add_link(link);
    }
  }
  return topo;
}

inline RoutePlan read_routes(Reader& r, const json& j, const std::string& path, const Topology& topo) {
  RoutePlan plan;
  if (!r.expect_object(j, path)) return plan;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string p = Reader::key(path, it.key());
    if (!r.expect_array(it.value(), p)) continue;
    NodePath nodes;
    bool ok = true;
    for (std::size_t i = 0; i < it.value().size(); ++i) {
      const json& n = it.value()[i];
      if (!n.is_string()) {
        r.error(Reader::at(p, i), "expected a node id");
        ok = false;
        continue;
      }
      const std::string id = n.get<std::string>();
      if (!topo.find_node(id)) {
        r.error(Reader::at(p, i), "route '" + it.key() + "' references unknown node '" + id + "'");
        ok = false;
      }
      nodes.push_back(id);
    }
    if (!ok) continue;
    if (!nodes.empty()) {
      if (topo.find_node(nodes.front())->role != NodeRole::kSourceLab ||
          topo.find_node(nodes.back())->role != NodeRole::kSourceLab) {
        r.error(p, "route '" + it.key() + "' must start and end at a source_lab node");
        continue;
      }
      for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (!topo.find_link(nodes[i - 1], nodes[i])) {
          r.error(Reader::at(p, i), "route '" + it.key() + "': no link " + nodes[i - 1] + "-" + nodes[i]);
          ok = false;
        }
      }
    }
    if (ok) plan.assignments[it.key()] = nodes;
  }
  return plan;
}

inline SpdcSpec read_source(Reader& r, const json& j, const std::string& path) {
  SpdcSpec s;
  if (!r.expect_object(j, path)) return s;
  r.known(j, path, {"wavelength_nm", "bandwidth_fwhm_nm", "pair_rate_hz", "entangled_fraction",
                    "background_singles_rate_hz", "hom_visibility"});
  const double inf = std::numeric_limits<double>::infinity();
  s.wavelength_nm = r.number(j, path, "wavelength_nm", s.wavelength_nm, 1e-9);
  s.bandwidth_fwhm_nm = r.number(j, path, "bandwidth_fwhm_nm", s.bandwidth_fwhm_nm, 1e-9);
  s.pair_rate_hz = r.number(j, path, "pair_rate_hz", s.pair_rate_hz, 0.0, inf);
  s.entangled_fraction = r.number(j, path, "entangled_fraction", s.entangled_fraction, 0.0, 1.0);
  s.background_singles_rate_hz = r.number(j, path, "background_singles_rate_hz", s.background_singles_rate_hz, 0.0, inf);
  s.hom_visibility = r.number(j, path, "hom_visibility", s.hom_visibility, 0.0, 1.0);
  return s;
}

inline std::optional<ElementSpec> read_element(Reader& r, const json& j, const std::string& path) {
  if (!r.expect_object(j, path)) return std::nullopt;
  const std::string type = r.string(j, path, "type", "", true);
  const std::string id = r.string(j, path, "id");
  const std::size_t before = r.diags.size();
  ElementSpec e;
  if (type == "beam_splitter") {
    r.known(j, path, {"type", "id", "in", "out", "ratio"});
    const auto in = r.strings(j, path, "in", true);
    const auto out = r.strings(j, path, "out", true);
    if (j.contains("in") && in.size() != 2) r.error(Reader::key(path, "in"), "expected two modes");
    if (j.contains("out") && out.size() != 2) r.error(Reader::key(path, "out"), "expected two modes");
    const double ratio = r.number(j, path, "ratio", 0.5, 0.0, 1.0);
    if (ratio == 0.0 || ratio == 1.0) r.error(Reader::key(path, "ratio"), "must lie strictly inside (0, 1)");
    if (r.diags.size() != before) return std::nullopt;
    e = BeamSplitter{in[0], in[1], out[0], out[1], ratio, id};
  } else if (type == "pbs") {
    r.known(j, path, {"type", "id", "in", "out_h", "out_v", "slow_axis_deg", "misalignment_deg"});
    Pbs p;
    p.in = r.string(j, path, "in", "", true);
    p.out_h = r.string(j, path, "out_h", "", true);
    p.out_v = r.string(j, path, "out_v", "", true);
    p.slow_axis_deg = r.number(j, path, "slow_axis_deg", 0.0);
    p.misalignment_deg = r.number(j, path, "misalignment_deg", 0.0);
    p.label = id;
    e = p;
  } else if (type == "lcvr") {
    r.known(j, path, {"type", "id", "mode", "retardance_rad"});
    e = Lcvr{r.string(j, path, "mode", "", true), r.number(j, path, "retardance_rad", 0.0), id};
  } else if (type == "rotation") {
    r.known(j, path, {"type", "id", "mode", "angle_deg"});
    e = Rotation{r.string(j, path, "mode", "", true), r.number(j, path, "angle_deg", 0.0), id};
  } else if (type == "delay_line") {
    r.known(j, path, {"type", "id", "mode", "delay_ps"});
    e = DelayLine{r.string(j, path, "mode", "", true), r.number(j, path, "delay_ps", 0.0), id};
  } else {
    if (!type.empty()) r.error(Reader::key(path, "type"), "unknown element type '" + type + "'");
    return std::nullopt;
  }
  if (r.diags.size() != before) return std::nullopt;
  return e;
}

inline std::optional<Polarization> read_pol(Reader& r, const json& j, const std::string& path, const char* k) {
  if (!j.contains(k) || j[k].is_null()) return std::nullopt;
  const std::string s = r.string(j, path, k);
  auto p = parse_polarization(s);
  if (!p) r.error(Reader::key(path, k), "expected 'H' or 'V'");
  return p;
}

inline std::vector<double> read_points(Reader& r, const json& j, const std::string& path) {
  std::vector<double> out;
  if (j.contains("range")) {
    const std::string p = Reader::key(path, "range");
    const json& rg = j["range"];
    if (!r.expect_object(rg, p)) return out;
    r.known(rg, p, {"start", "stop", "step"});
    const double start = r.number(rg, p, "start", 0.0, -1e300, 1e300, true);
    const double stop = r.number(rg, p, "stop", 0.0, -1e300, 1e300, true);
    const double step = r.number(rg, p, "step", 1.0, 1e-300, 1e300, true);
    if (stop < start) {
      r.error(Reader::key(p, "stop"), "must be >= start");
      return out;
    }
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-6)) + 1;  // endpoint survives rounded decimals
    if (n > 100000) {
      r.error(p, "too many points");
      return out;
    }
    for (std::size_t k = 0; k < n; ++k) out.push_back(std::round((start + static_cast<double>(k) * step) * 1e9) / 1e9);
    return out;
  }
  if (!j.contains("points")) {
    r.error(Reader::key(path, "points"), "required (or give 'range')");
    return out;
  }
  const std::string p = Reader::key(path, "points");
  if (!r.expect_array(j["points"], p)) return out;
  for (std::size_t i = 0; i < j["points"].size(); ++i) {
    if (!j["points"][i].is_number()) {
      r.error(Reader::at(p, i), "expected a number");
      continue;
    }
    out.push_back(j["points"][i].get<double>());
  }
  return out;
}

}  // namespace detail

// Full schema and cross-reference check; a config is built only when no
// diagnostics were produced.
inline LoadResult interpret(const json& cfg) {
  detail::Reader r;
  LoadResult res;
  using detail::Reader;
  if (!r.expect_object(cfg, "")) {
    res.diagnostics = r.diags;
    return res;
  }
  r.known(cfg, "", {"name", "description", "mode", "seed", "workers", "duration_s", "source", "input", "modes", "circuit",
                    "topology", "routes", "detectors", "coincidence", "counts", "scan", "g2", "throughput",
                    "lcvr_calibration"});

  RunConfig rc;
  rc.name = r.string(cfg, "", "name", "experiment");
  const std::string mode = r.string(cfg, "", "mode", "predict");
  if (auto m = parse_mode(mode)) {
    rc.mode = *m;
  } else {
    r.error("mode", "expected predict, simulate, throughput or g2");
  }
  if (cfg.contains("seed")) {
    if (cfg["seed"].is_number_unsigned() || (cfg["seed"].is_number_integer() && cfg["seed"].get<std::int64_t>() >= 0)) {
      rc.seed = cfg["seed"].get<std::uint64_t>();
    } else {
      r.error("seed", "expected a non-negative integer");
    }
  }
  if (cfg.contains("workers") && !cfg["workers"].is_number_integer()) r.error("workers", "expected an integer");

  Experiment& ex = rc.experiment;
  const bool needs_experiment = rc.mode != Mode::kThroughput;
  ex.duration_s = r.number(cfg, "", "duration_s", 1.0, 0.0, 1e6);
  if ((rc.mode == Mode::kSimulate || rc.mode == Mode::kG2) && !(ex.duration_s > 0.0) && cfg.contains("duration_s")) {
    r.error("duration_s", "must be positive for Monte Carlo modes");
  }

  ex.topology = cfg.contains("topology") ? detail::read_topology(r, cfg["topology"], "topology") : Topology{};
  if (cfg.contains("routes")) ex.routes = detail::read_routes(r, cfg["routes"], "routes", ex.topology);

  if (needs_experiment || cfg.contains("source")) {
    ex.source = cfg.contains("source") ? detail::read_source(r, cfg["source"], "source") : SpdcSpec{};
  }

  // Input and circuit.
  std::set<std::string> circuit_modes;
  bool circuit_ok = true;
  if (needs_experiment || cfg.contains("input")) {
    if (!cfg.contains("input")) {
      r.error("input", "required");
      circuit_ok = false;
    } else if (r.expect_object(cfg["input"], "input")) {
      const json& in = cfg["input"];
      r.known(in, "input", {"kind", "modes", "fusion_probability"});
      const std::string kind = r.string(in, "input", "kind", "pair");
      std::size_t want = 2;
      if (kind == "pair") {
        ex.unit = EmissionUnit::kPair;
      } else if (kind == "dual_pair") {
        ex.unit = EmissionUnit::kDuo;
        want = 4;
      } else if (kind == "degenerate_pair") {
        ex.unit = EmissionUnit::kDegeneratePair;
        want = 1;
      } else {
        r.error("input.kind", "expected pair, dual_pair or degenerate_pair");
      }
      ex.input_modes = r.strings(in, "input", "modes", true);
      if (in.contains("modes") && ex.input_modes.size() != want) {
        r.error("input.modes", "expected " + std::to_string(want) + " modes for kind '" + kind + "'");
        circuit_ok = false;
      }
      std::set<std::string> uniq(ex.input_modes.begin(), ex.input_modes.end());
      if (uniq.size() != ex.input_modes.size()) {
        r.error("input.modes", "modes must be distinct");
        circuit_ok = false;
      }
      ex.fusion_probability = r.number(in, "input", "fusion_probability", splitter_tree_success().value(), 0.0, 1.0);
      circuit_modes.insert(ex.input_modes.begin(), ex.input_modes.end());
    } else {
      circuit_ok = false;
    }
    for (const auto& m : r.strings(cfg, "", "modes")) circuit_modes.insert(m);
    ex.circuit = Circuit(circuit_modes);
    if (cfg.contains("circuit") && r.expect_array(cfg["circuit"], "circuit")) {
      std::set<std::string> ids;
      for (std::size_t i = 0; i < cfg["circuit"].size(); ++i) {
        const std::string p = Reader::at("circuit", i);
        auto e = detail::read_element(r, cfg["circuit"][i], p);
        if (!e) {
          circuit_ok = false;
          continue;
        }
        const std::string& id = element_label(*e);
        if (!id.empty() && !ids.insert(id).second) r.error(Reader::key(p, "id"), "duplicate element id '" + id + "'");
        if (!circuit_ok) continue;
        try {
          ex.circuit.add(*e);
        } catch (const Error& err) {
          r.error(p, err.what());
          circuit_ok = false;
        }
      }
    }
  }

  // Detectors.
  std::map<std::string, const DetectorSpec*> detector_ids;
  if (cfg.contains("detectors") && r.expect_array(cfg["detectors"], "detectors")) {
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cfg["detectors"].size(); ++i) {
      const json& d = cfg["detectors"][i];
      const std::string p = Reader::at("detectors", i);
      if (!r.expect_object(d, p)) continue;
      r.known(d, p, {"id", "mode", "pol", "route", "efficiency", "dark_rate_hz", "jitter_fwhm_ps", "dead_time_ps",
                     "insertion_loss_db"});
      DetectorSpec det;
      det.id = r.string(d, p, "id", "", true);
      det.mode = r.string(d, p, "mode", "", true);
      det.pol = detail::read_pol(r, d, p, "pol");
      det.route = r.string(d, p, "route");
      det.efficiency = r.number(d, p, "efficiency", 1.0, 0.0, 1.0);
      det.dark_rate_hz = r.number(d, p, "dark_rate_hz", 0.0, 0.0, inf);
      det.jitter_fwhm_ps = r.number(d, p, "jitter_fwhm_ps", 0.0, 0.0, inf);
      det.dead_time_ps = r.number(d, p, "dead_time_ps", 0.0, 0.0, inf);
      det.insertion_loss_db = r.number(d, p, "insertion_loss_db", 0.0, 0.0, inf);
      if (circuit_ok && !det.mode.empty() && !ex.circuit.modes().count(det.mode)) {
        r.error(Reader::key(p, "mode"), "unknown circuit mode '" + det.mode + "'");
      }
      if (!det.route.empty() && !ex.routes.path(det.route) &&
          !(cfg.contains("routes") && cfg["routes"].is_object() && cfg["routes"].contains(det.route))) {
        r.error(Reader::key(p, "route"), "no route named '" + det.route + "'");
      }
      for (const auto& o : ex.detectors) {
        if (o.id == det.id && !det.id.empty()) r.error(Reader::key(p, "id"), "duplicate detector id '" + det.id + "'");
        if (o.mode == det.mode && (!o.pol || !det.pol || *o.pol == *det.pol)) {
          r.error(Reader::key(p, "mode"), "overlaps with detector '" + o.id + "'");
        }
      }
      ex.detectors.push_back(det);
    }
    for (const auto& d : ex.detectors) detector_ids[d.id] = &d;
  } else if (needs_experiment && !cfg.contains("detectors")) {
    r.error("detectors", "required");
  }

  // Coincidence settings.
  if (cfg.contains("coincidence") && r.expect_object(cfg["coincidence"], "coincidence")) {
    const json& c = cfg["coincidence"];
    r.known(c, "coincidence", {"window_ps", "offsets_ps", "histogram_bin_ps", "accidental_offset_ps"});
    ex.coincidence.window_ps = r.integer(c, "coincidence", "window_ps", 2000, 1);
    ex.coincidence.histogram_bin_ps = r.integer(c, "coincidence", "histogram_bin_ps", 100, 1);
    ex.accidental_offset_ps = r.integer(c, "coincidence", "accidental_offset_ps", 100'000);
    if (c.contains("offsets_ps")) {
      const json& o = c["offsets_ps"];
      if (o.is_string() && o.get<std::string>() == "auto") {
        // Software gating that undoes each detector's route delay.
        for (const auto& d : ex.detectors) {
          if (d.route.empty() || !ex.routes.path(d.route)) continue;
          ex.coincidence.channel_offsets_ps[d.id] =
              -static_cast<std::int64_t>(std::llround(mode_delay_us(ex.routes, ex.topology, d.route) * 1e6));
        }
      } else if (o.is_object()) {
        for (auto it = o.begin(); it != o.end(); ++it) {
          const std::string p = "coincidence.offsets_ps." + it.key();
          if (!detector_ids.count(it.key())) r.error(p, "unknown detector");
          if (!it.value().is_number_integer()) {
            r.error(p, "expected an integer");
            continue;
          }
          ex.coincidence.channel_offsets_ps[it.key()] = it.value().get<std::int64_t>();
        }
      } else {
        r.error("coincidence.offsets_ps", "expected an object or \"auto\"");
      }
    }
  }

  // Counts.
  if (cfg.contains("counts") && r.expect_array(cfg["counts"], "counts")) {
    std::set<std::string> names;
    for (std::size_t i = 0; i < cfg["counts"].size(); ++i) {
      const json& c = cfg["counts"][i];
      const std::string p = Reader::at("counts", i);
      if (!r.expect_object(c, p)) continue;
      r.known(c, p, {"name", "channels"});
      CountSpec cs;
      cs.name = r.string(c, p, "name", "", true);
      cs.channels = r.strings(c, p, "channels", true);
      if (!cs.name.empty() && !names.insert(cs.name).second) r.error(Reader::key(p, "name"), "duplicate count name");
      if (c.contains("channels") && cs.channels.size() < 2) r.error(Reader::key(p, "channels"), "need at least two channels");
      std::set<std::string> seen;
      for (std::size_t k = 0; k < cs.channels.size(); ++k) {
        if (!detector_ids.count(cs.channels[k])) {
          r.error(Reader::at(Reader::key(p, "channels"), k), "unknown detector '" + cs.channels[k] + "'");
        }
        if (!seen.insert(cs.channels[k]).second) r.error(Reader::at(Reader::key(p, "channels"), k), "repeated channel");
      }
      ex.counts.push_back(cs);
    }
  }
  if ((rc.mode == Mode::kPredict || rc.mode == Mode::kSimulate) && ex.counts.empty()) {
    r.error("counts", "at least one count is required in " + std::string(to_string(rc.mode)) + " mode");
  }

  // LCVR calibration.
  LcvrCalibration calibration;
  if (cfg.contains("lcvr_calibration") && r.expect_array(cfg["lcvr_calibration"], "lcvr_calibration")) {
    std::vector<std::pair<double, double>> pts;
    bool ok = true;
    for (std::size_t i = 0; i < cfg["lcvr_calibration"].size(); ++i) {
      const json& pt = cfg["lcvr_calibration"][i];
      if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
        r.error(Reader::at("lcvr_calibration", i), "expected [control_value, retardance_rad]");
        ok = false;
        continue;
      }
      pts.emplace_back(pt[0].get<double>(), pt[1].get<double>());
    }
    if (ok) {
      try {
        calibration = LcvrCalibration(pts);
      } catch (const Error& e) {
        r.error("lcvr_calibration", e.what());
      }
    }
  }

  // Scan.
  if (cfg.contains("scan") && r.expect_object(cfg["scan"], "scan")) {
    const json& s = cfg["scan"];
    r.known(s, "scan", {"axis", "element", "detectors", "points", "range"});
    ScanSpec scan;
    scan.calibration = calibration;
    const std::string axis = r.string(s, "scan", "axis", "", true);
    if (axis == "vdl_delay" || axis == "lcvr_phase") {
      scan.axis = axis == "vdl_delay" ? ScanAxis::kVdlDelay : ScanAxis::kLcvrPhase;
      scan.element = r.string(s, "scan", "element", "", true);
      scan.values = detail::read_points(r, s, "scan");
      if (circuit_ok && !scan.element.empty()) {
        const auto idx = ex.circuit.find(scan.element);
        if (!idx) {
          r.error("scan.element", "no circuit element with id '" + scan.element + "'");
        } else {
          const ElementSpec& e = ex.circuit.elements()[*idx];
          if (scan.axis == ScanAxis::kVdlDelay && !std::holds_alternative<DelayLine>(e)) {
            r.error("scan.element", "'" + scan.element + "' is not a delay_line");
          }
          if (scan.axis == ScanAxis::kLcvrPhase && !std::holds_alternative<Lcvr>(e)) {
            r.error("scan.element", "'" + scan.element + "' is not an lcvr");
          }
        }
      }
      if (scan.axis == ScanAxis::kLcvrPhase && !calibration.empty()) {
        for (std::size_t i = 0; i < scan.values.size(); ++i) {
          const auto& pts = calibration.points();
          if (scan.values[i] < pts.front().first || scan.values[i] > pts.back().first) {
            r.error(Reader::at("scan.points", i), "outside the lcvr_calibration range");
          }
        }
      }
    } else if (axis == "projection_pattern") {
      scan.axis = ScanAxis::kProjectionPattern;
      scan.detectors = r.strings(s, "scan", "detectors", true);
      for (std::size_t k = 0; k < scan.detectors.size(); ++k) {
        if (!detector_ids.count(scan.detectors[k])) {
          r.error(Reader::at("scan.detectors", k), "unknown detector '" + scan.detectors[k] + "'");
        }
      }
      const std::size_t n = scan.detectors.size();
      if (s.contains("points") && s["points"].is_string() && s["points"].get<std::string>() == "all") {
        for (std::size_t code = 0; code < (std::size_t{1} << n); ++code) {
          std::string pat;
          for (std::size_t k = 0; k < n; ++k) pat += ((code >> (n - 1 - k)) & 1) ? 'V' : 'H';
          scan.patterns.push_back(pat);
        }
      } else {
        scan.patterns = r.strings(s, "scan", "points", true);
        for (std::size_t i = 0; i < scan.patterns.size(); ++i) {
          const auto& pat = scan.patterns[i];
          if (pat.size() != n || pat.find_first_not_of("HV") != std::string::npos) {
            r.error(Reader::at("scan.points", i), "pattern must be " + std::to_string(n) + " letters of H/V");
          }
        }
      }
    } else if (!axis.empty()) {
      r.error("scan.axis", "expected vdl_delay, lcvr_phase or projection_pattern");
    }
    if (scan.size() == 0 && r.diags.empty()) r.error("scan", "no scan points");
    rc.scan = scan;
  }

  // G2.
  if (cfg.contains("g2") && r.expect_object(cfg["g2"], "g2")) {
    const json& g = cfg["g2"];
    r.known(g, "g2", {"pairs", "range_ps", "bin_ps", "fit_half_width_ps"});
    G2Spec spec;
    spec.bin_ps = r.integer(g, "g2", "bin_ps", ex.coincidence.histogram_bin_ps, 1);
    spec.fit_half_width_ps = r.number(g, "g2", "fit_half_width_ps", 3000.0, 1.0);
    if (!g.contains("range_ps") || !g["range_ps"].is_array() || g["range_ps"].size() != 2 ||
        !g["range_ps"][0].is_number_integer() || !g["range_ps"][1].is_number_integer()) {
      r.error("g2.range_ps", "expected [lo_ps, hi_ps] integers");
    } else {
      spec.lo_ps = g["range_ps"][0].get<std::int64_t>();
      spec.hi_ps = g["range_ps"][1].get<std::int64_t>();
      if (spec.hi_ps < spec.lo_ps) r.error("g2.range_ps", "hi must be >= lo");
      else if ((spec.hi_ps - spec.lo_ps) % spec.bin_ps != 0) r.error("g2.range_ps", "bin_ps must divide the range");
      else if ((spec.hi_ps - spec.lo_ps) / spec.bin_ps > 10'000'000) r.error("g2.range_ps", "too many bins");
    }
    if (!g.contains("pairs") || !g["pairs"].is_array()) {
      r.error("g2.pairs", "expected an array of [detector_a, detector_b]");
    } else {
      for (std::size_t i = 0; i < g["pairs"].size(); ++i) {
        const json& pr = g["pairs"][i];
        const std::string p = Reader::at("g2.pairs", i);
        if (!pr.is_array() || pr.size() != 2 || !pr[0].is_string() || !pr[1].is_string()) {
          r.error(p, "expected [detector_a, detector_b]");
          continue;
        }
        const std::string a = pr[0].get<std::string>();
        const std::string b = pr[1].get<std::string>();
        for (const auto& id : {a, b}) {
          if (!detector_ids.count(id)) r.error(p, "unknown detector '" + id + "'");
        }
        spec.pairs.emplace_back(a, b);
      }
    }
    rc.g2 = spec;
  } else if (rc.mode == Mode::kG2 && !cfg.contains("g2")) {
    r.error("g2", "required in g2 mode");
  }

  // Throughput.
  if (cfg.contains("throughput") && r.expect_object(cfg["throughput"], "throughput")) {
    const json& t = cfg["throughput"];
    const std::string p = "throughput";
    r.known(t, p, {"pair_rate_hz", "fusion_probability", "per_mode_loss_db", "insertion_loss_db", "detector_efficiency",
                   "heralds", "target_rate_hz"});
    const double inf = std::numeric_limits<double>::infinity();
    ThroughputConfig tc;
    tc.spec.pair_rate_hz = r.number(t, p, "pair_rate_hz", 6e3, 0.0, inf);
    tc.spec.fusion_probability = r.number(t, p, "fusion_probability", splitter_tree_success().value(), 0.0, 1.0);
    tc.spec.insertion_loss_db = r.number(t, p, "insertion_loss_db", 0.0, 0.0, inf);
    for (const char* k : {"per_mode_loss_db", "detector_efficiency"}) {
      if (!t.contains(k)) continue;
      const std::string kp = Reader::key(p, k);
      if (!r.expect_object(t[k], kp)) continue;
      const bool eff = std::string(k) == "detector_efficiency";
      for (auto it = t[k].begin(); it != t[k].end(); ++it) {
        const double v = r.number(t[k], kp, it.key().c_str(), 0.0, 0.0, eff ? 1.0 : inf, true);
        (eff ? tc.spec.detector_efficiency : tc.spec.per_mode_loss_db)[it.key()] = v;
      }
    }
    if (t.contains("heralds")) {
      tc.heralds.clear();
      const auto hs = r.strings(t, p, "heralds");
      for (std::size_t i = 0; i < hs.size(); ++i) {
        if (hs[i] == "bell") tc.heralds.push_back(HeraldClass::kBell);
        else if (hs[i] == "noon") tc.heralds.push_back(HeraldClass::kNoonH);
        else r.error(Reader::at("throughput.heralds", i), "expected 'bell' or 'noon'");
      }
    }
    tc.target_rate_hz = r.optional_number(t, p, "target_rate_hz", 1e-300);
    rc.throughput = tc;
  } else if (rc.mode == Mode::kThroughput && !cfg.contains("throughput")) {
    r.error("throughput", "required in throughput mode");
  }

  // Backstop: the library's own consistency checks.
  if (r.diags.empty() && needs_experiment) {
    try {
      validate_experiment(ex);
    } catch (const Error& e) {
      r.error("", e.what());
    }
  }

  res.diagnostics = r.diags;
  if (res.diagnostics.empty()) {
    json eff = cfg;
    eff.erase("workers");
    rc.effective = eff;
    res.config = std::move(rc);
  }
  return res;
}

// Load a config or manifest from disk, inline the topology file, apply
// overrides.
inline json load_config_json(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  json cfg = unwrap_manifest(read_json_file(path));
  inline_topology(cfg, path.parent_path());
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

// ---------------------------------------------------------------------------
// Results.

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

inline std::string format_cell(const json& v) {
  if (v.is_number_float()) return qnet::detail::format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

inline std::string render_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_cell(row[i]);
    out += '\n';
  }
  return out;
}

inline std::string render_json(const Table& t) {
  json arr = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < row.size() && i < t.columns.size(); ++i) obj[t.columns[i]] = row[i];
    arr.push_back(obj);
  }
  return arr.dump(2) + "\n";
}

struct OutputFile {
  std::string name;
  std::string content;
};

enum class Format { kCsv, kJson };

namespace detail {

inline std::size_t point_count(const RunConfig& rc) { return rc.scan ? rc.scan->size() : 1; }

inline Experiment point_experiment(const RunConfig& rc, std::size_t i) {
  return rc.scan ? apply_scan_point(rc.experiment, *rc.scan, i) : rc.experiment;
}

inline json point_label(const RunConfig& rc, std::size_t i) {
  if (!rc.scan) return "none";
  if (rc.scan->axis == ScanAxis::kProjectionPattern) return rc.scan->patterns[i];
  return rc.scan->values[i];
}

inline std::vector<Table> run_predict(const RunConfig& rc) {
  Table t{"predict", {"scan_value", "quantity", "value"}, {}};
  for (std::size_t i = 0; i < point_count(rc); ++i) {
    for (const auto& p : predict(point_experiment(rc, i))) {
      t.rows.push_back({point_label(rc, i), p.count + ".ideal", p.ideal});
      t.rows.push_back({point_label(rc, i), p.count + ".mixed", p.mixed});
    }
  }
  return {t};
}

inline std::vector<Table> run_simulate(const RunConfig& rc, int workers, std::vector<OutputFile>& extra) {
  Table t{"scan", {"scan_value", "count", "raw", "accidental", "net"}, {}};
  const Experiment& ex = rc.experiment;
  if (!rc.scan) {
    const TagStreams streams = simulate_timetags(ex, rc.seed, workers, 1);
    std::ostringstream tags;
    write_timetags_csv(tags, streams);
    extra.push_back({"timetags.csv", tags.str()});
    for (const auto& count : ex.counts) {
      const auto raw = count_coincidences(streams, count, ex.coincidence);
      CoincidenceSpec shifted = ex.coincidence;
      shifted.channel_offsets_ps[count.channels.back()] += ex.accidental_offset_ps;
      const auto acc = count_coincidences(streams, count, shifted);
      t.rows.push_back({"none", count.name, raw, acc, static_cast<double>(raw) - static_cast<double>(acc)});
    }
    return {t};
  }
  const auto rows = scan(ex, *rc.scan, rc.seed, workers);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t point = i / ex.counts.size();
    t.rows.push_back({point_label(rc, point), rows[i].count, rows[i].raw, rows[i].accidental, rows[i].net});
  }
  std::vector<Table> out{t};
  if (rc.scan->axis == ScanAxis::kVdlDelay && rc.scan->values.size() >= 4) {
    Table fit{"fit", {"count", "offset", "amplitude", "center_ps", "sigma_ps", "fwhm_ps", "visibility"}, {}};
    for (std::size_t c = 0; c < ex.counts.size(); ++c) {
      std::vector<double> x;
      std::vector<double> y;
      for (std::size_t i = 0; i < rc.scan->values.size(); ++i) {
        x.push_back(rc.scan->values[i]);
        y.push_back(rows[i * ex.counts.size() + c].net);
      }
      const GaussianFit g = fit_gaussian(x, y);
      fit.rows.push_back({ex.counts[c].name, g.offset, g.amplitude, g.center, g.sigma, g.fwhm(), g.relative_depth()});
    }
    out.push_back(fit);
  }
  return out;
}

inline std::vector<Table> run_g2(const RunConfig& rc, int workers) {
  const Experiment ex = point_experiment(rc, 0);
  const TagStreams streams = simulate_timetags(ex, rc.seed, workers, 1);
  std::vector<Table> out;
  Table summary{"g2_summary", {"detector_a", "detector_b", "entries", "peak_ps", "fit_center_ps", "fit_fwhm_ps"}, {}};
  static const std::vector<std::int64_t> kNone;
  for (const auto& [a, b] : rc.g2->pairs) {
    const auto ia = streams.find(a);
    const auto ib = streams.find(b);
    const Histogram h = g2_histogram(ia == streams.end() ? kNone : ia->second, ib == streams.end() ? kNone : ib->second,
                                     rc.g2->lo_ps, rc.g2->hi_ps, rc.g2->bin_ps);
    Table ht{"g2_" + a + "_" + b, {"bin_center_ps", "count"}, {}};
    for (std::size_t i = 0; i < h.counts.size(); ++i) ht.rows.push_back({h.center(i), h.counts[i]});
    out.push_back(std::move(ht));
    if (h.total() == 0) {
      summary.rows.push_back({a, b, 0, nullptr, nullptr, nullptr});
      continue;
    }
    json center = nullptr;
    json fwhm = nullptr;
    try {
      const GaussianFit g = fit_histogram_peak(h, rc.g2->fit_half_width_ps);
      center = g.center;
      fwhm = g.fwhm();
    } catch (const Error&) {
    }
    summary.rows.push_back({a, b, h.total(), relative_delay_estimate(h), center, fwhm});
  }
  out.push_back(summary);
  return out;
}

inline const char* herald_name(HeraldClass h) { return h == HeraldClass::kBell ? "bell" : "noon"; }

inline std::vector<Table> run_throughput(const RunConfig& rc) {
  const ThroughputConfig& tc = *rc.throughput;
  const Experiment& ex = rc.experiment;
  Table t{"throughput", {"quantity", "value"}, {}};
  t.rows.push_back({"local_fourfold_rate_hz", local_fourfold_rate(tc.spec)});
  for (HeraldClass h : tc.heralds) {
    const RateBudget b = rate_budget(tc.spec, ex.routes, ex.topology, h);
    const std::string pre = herald_name(h);
    for (const auto& p : b.photons) {
      t.rows.push_back({pre + ".photon_" + p.mode + ".path_loss_db", p.path_loss_db});
      t.rows.push_back({pre + ".photon_" + p.mode + ".extra_loss_db", p.extra_loss_db});
      t.rows.push_back({pre + ".photon_" + p.mode + ".insertion_share_db", p.insertion_share_db});
      t.rows.push_back({pre + ".photon_" + p.mode + ".transmission", p.transmission});
    }
    t.rows.push_back({pre + ".path_factor", b.path_factor});
    t.rows.push_back({pre + ".detector_factor", b.detector_factor});
    t.rows.push_back({pre + ".distributed_rate_hz", b.rate_hz});
    if (tc.target_rate_hz && b.rate_hz > 0.0) {
      t.rows.push_back({pre + ".unbudgeted_loss_db", unbudgeted_loss_db(b.rate_hz, *tc.target_rate_hz)});
    }
  }
  const double naive = single_application_rate(tc.spec, ex.routes, ex.topology);
  double total_loss = tc.spec.insertion_loss_db;
  for (const std::string& m : {fusion_modes::b, fusion_modes::d, fusion_modes::e, fusion_modes::f}) {
    total_loss += path_loss_db(ex.routes, ex.topology, m);
    auto it = tc.spec.per_mode_loss_db.find(m);
    if (it != tc.spec.per_mode_loss_db.end()) total_loss += it->second;
  }
  t.rows.push_back({"naive.total_loss_db", total_loss});
  t.rows.push_back({"naive.rate_hz", naive});
  if (tc.target_rate_hz) {
    t.rows.push_back({"target_rate_hz", *tc.target_rate_hz});
    if (naive > 0.0) t.rows.push_back({"naive.unbudgeted_loss_db", unbudgeted_loss_db(naive, *tc.target_rate_hz)});
  }
  return {t};
}

}  // namespace detail

// Produces every output file of a run (including the manifest) in memory.
inline std::vector<OutputFile> execute(const RunConfig& rc, Format format, int workers) {
  std::vector<OutputFile> files;
  std::vector<Table> tables;
  switch (rc.mode) {
    case Mode::kPredict: tables = detail::run_predict(rc); break;
    case Mode::kSimulate: tables = detail::run_simulate(rc, workers, files); break;
    case Mode::kG2: tables = detail::run_g2(rc, workers); break;
    case Mode::kThroughput: tables = detail::run_throughput(rc); break;
  }
  for (const auto& t : tables) {
    if (format == Format::kJson) {
      files.push_back({t.name + ".json", render_json(t)});
    } else {
      files.push_back({t.name + ".csv", render_csv(t)});
    }
  }
  json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kVersion;
  manifest["mode"] = to_string(rc.mode);
  manifest["seed"] = rc.seed;
  manifest["format"] = format == Format::kJson ? "json" : "csv";
  manifest["config_hash"] = config_hash(rc.effective);
  json names = json::array();
  for (const auto& f : files) names.push_back(f.name);
  manifest["outputs"] = names;
  manifest["config"] = rc.effective;
  files.push_back({"manifest.json", manifest.dump(2) + "\n"});
  return files;
}

inline void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files) {
  std::filesystem::create_directories(dir);
  for (const auto& f : files) {
    std::ofstream out(dir / f.name, std::ios::binary);
    if (!out) throw Error(Errc::kInvalidArgument, "cannot write '" + (dir / f.name).string() + "'");
    out << f.content;
  }
}

}  // namespace qnet::cli
