#pragma once

// Metro fiber topology: nodes, lossy links with propagation delay, round-trip
// routes for the logical modes, and the closed-form rate budget for
// distributing heralded states.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qnet/error.hpp"
#include "qnet/protocol.hpp"
#include "qnet/source.hpp"

namespace qnet {

enum class NodeRole { kSourceLab, kRemote };

struct Node {
  std::string id;
  NodeRole role = NodeRole::kRemote;
};

struct Link {
  std::string from;
  std::string to;
  double loss_db = 0.0;
  std::optional<double> delay_us;   // measured one-way delay; wins over length
  std::optional<double> length_km;
};

inline constexpr double kDefaultGroupIndex = 1.468;

inline double db_to_transmission(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

// Links are bidirectional; each traversal adds its loss and delay once.
class Topology {
 public:
  double group_index = kDefaultGroupIndex;

  Topology& add_node(Node node) {
    if (node.id.empty()) throw Error(Errc::kInvalidArgument, "node id must be non-empty");
    if (find_node(node.id)) throw Error(Errc::kInvalidArgument, "duplicate node id '" + node.id + "'");
    nodes_.push_back(std::move(node));
    return *this;
  }

  Topology& add_link(Link link) {
    if (!find_node(link.from) || !find_node(link.to)) {
      throw Error(Errc::kInvalidArgument, "link " + link.from + "-" + link.to + " references an unknown node");
    }
    if (link.loss_db < 0.0) throw Error(Errc::kInvalidArgument, "link " + link.from + "-" + link.to + ": negative loss_db");
    if (link.delay_us && *link.delay_us < 0.0) {
      throw Error(Errc::kInvalidArgument, "link " + link.from + "-" + link.to + ": negative delay_us");
    }
    if (link.length_km && *link.length_km < 0.0) {
      throw Error(Errc::kInvalidArgument, "link " + link.from + "-" + link.to + ": negative length_km");
    }
    if (!link.delay_us && !link.length_km) {
      throw Error(Errc::kInvalidArgument, "link " + link.from + "-" + link.to + " needs delay_us or length_km");
    }
    if (find_link(link.from, link.to)) {
      throw Error(Errc::kInvalidArgument, "duplicate link " + link.from + "-" + link.to);
    }
    links_.push_back(std::move(link));
    return *this;
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }

  const Node* find_node(const std::string& id) const {
    for (const auto& n : nodes_) {
      if (n.id == id) return &n;
    }
    return nullptr;
  }

  const Link* find_link(const std::string& a, const std::string& b) const {
    for (const auto& l : links_) {
      if ((l.from == a && l.to == b) || (l.from == b && l.to == a)) return &l;
    }
    return nullptr;
  }

  // One-way delay; length-derived delay uses t = L n_g / c.
  double link_delay_us(const Link& link) const {
    if (link.delay_us) return *link.delay_us;
    return *link.length_km * 1e3 * group_index / kSpeedOfLight * 1e6;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
};

using NodePath = std::vector<std::string>;

inline const Link& require_link(const Topology& topo, const std::string& a, const std::string& b) {
  const Link* l = topo.find_link(a, b);
  if (!l) throw Error(Errc::kMissingLink, "no link between '" + a + "' and '" + b + "'");
  return *l;
}

inline double path_loss_db(const Topology& topo, const NodePath& path) {
  double s = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) s += require_link(topo, path[i - 1], path[i]).loss_db;
  return s;
}

inline double path_delay_us(const Topology& topo, const NodePath& path) {
  double s = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) s += topo.link_delay_us(require_link(topo, path[i - 1], path[i]));
  return s;
}

// Logical mode -> round-trip node path. Modes without an entry stay local.
struct RoutePlan {
  std::map<std::string, NodePath> assignments;

  const NodePath* path(const std::string& mode) const {
    auto it = assignments.find(mode);
    return it == assignments.end() ? nullptr : &it->second;
  }
};

// Rejects unknown nodes, missing links and paths that do not start and end
// at a source-lab node.
inline void validate_plan(const RoutePlan& plan, const Topology& topo) {
  for (const auto& [mode, path] : plan.assignments) {
    if (path.empty()) continue;
    for (const auto& id : path) {
      if (!topo.find_node(id)) throw Error(Errc::kInvalidArgument, "route '" + mode + "': unknown node '" + id + "'");
    }
    for (const auto* end : {&path.front(), &path.back()}) {
      if (topo.find_node(*end)->role != NodeRole::kSourceLab) {
        throw Error(Errc::kInvalidArgument, "route '" + mode + "' must start and end at the source lab");
      }
    }
    for (std::size_t i = 1; i < path.size(); ++i) {
      if (!topo.find_link(path[i - 1], path[i])) {
        throw Error(Errc::kMissingLink, "route '" + mode + "': no link " + path[i - 1] + "-" + path[i]);
      }
    }
  }
}

inline double path_loss_db(const RoutePlan& plan, const Topology& topo, const std::string& mode) {
  const NodePath* p = plan.path(mode);
  return p ? path_loss_db(topo, *p) : 0.0;
}

inline double mode_delay_us(const RoutePlan& plan, const Topology& topo, const std::string& mode) {
  const NodePath* p = plan.path(mode);
  return p ? path_delay_us(topo, *p) : 0.0;
}

// ---------------------------------------------------------------------------
// Rate budget.

struct ThroughputSpec {
  double pair_rate_hz = 6e3;
  double fusion_probability = 1.0 / 32.0;
  std::map<std::string, double> per_mode_loss_db;  // extra loss per logical mode
  double insertion_loss_db = 0.0;                   // total, shared evenly by the four photons
  std::map<std::string, double> detector_efficiency;

  void validate() const {
    if (pair_rate_hz < 0.0) throw Error(Errc::kInvalidArgument, "pair_rate_hz must be non-negative");
    if (fusion_probability < 0.0 || fusion_probability > 1.0) {
      throw Error(Errc::kInvalidArgument, "fusion_probability must lie in [0, 1]");
    }
    if (insertion_loss_db < 0.0) throw Error(Errc::kInvalidArgument, "insertion_loss_db must be non-negative");
    for (const auto& [m, l] : per_mode_loss_db) {
      if (l < 0.0) throw Error(Errc::kInvalidArgument, "per_mode_loss_db." + m + " must be non-negative");
    }
    for (const auto& [d, e] : detector_efficiency) {
      if (e < 0.0 || e > 1.0) throw Error(Errc::kInvalidArgument, "detector_efficiency." + d + " must lie in [0, 1]");
    }
  }
};

// Consecutive pairs are grouped two at a time and each group fuses with
// fusion_probability.
inline double local_fourfold_rate(const ThroughputSpec& spec) {
  return spec.pair_rate_hz / 2.0 * spec.fusion_probability;
}

struct PhotonBudget {
  std::string mode;
  double path_loss_db = 0.0;
  double extra_loss_db = 0.0;
  double insertion_share_db = 0.0;
  double total_loss_db = 0.0;
  double transmission = 1.0;
};

struct RateBudget {
  double local_rate_hz = 0.0;
  std::vector<PhotonBudget> photons;  // b, d, e, f
  double detector_factor = 1.0;
  double path_factor = 1.0;  // product of photon transmissions (N00N: remote part averaged)
  double rate_hz = 0.0;
};

inline RateBudget rate_budget(const ThroughputSpec& spec, const RoutePlan& plan, const Topology& topo,
                              HeraldClass herald) {
  spec.validate();
  validate_plan(plan, topo);
  using namespace fusion_modes;
  RateBudget out;
  out.local_rate_hz = local_fourfold_rate(spec);
  const double share = spec.insertion_loss_db / 4.0;
  for (const std::string& m : {b, d, e, f}) {
    PhotonBudget pb;
    pb.mode = m;
    pb.path_loss_db = path_loss_db(plan, topo, m);
    auto it = spec.per_mode_loss_db.find(m);
    pb.extra_loss_db = it == spec.per_mode_loss_db.end() ? 0.0 : it->second;
    pb.insertion_share_db = share;
    pb.total_loss_db = pb.path_loss_db + pb.extra_loss_db + pb.insertion_share_db;
    pb.transmission = db_to_transmission(pb.total_loss_db);
    out.photons.push_back(pb);
  }
  for (const auto& [id, eff] : spec.detector_efficiency) out.detector_factor *= eff;

  const double t_b = out.photons[0].transmission;
  const double t_d = out.photons[1].transmission;
  const double t_e = out.photons[2].transmission;
  const double t_f = out.photons[3].transmission;
  if (herald == HeraldClass::kBell) {
    out.path_factor = t_b * t_d * t_e * t_f;
  } else {
    // Both remote photons share one arm; either arm with probability 1/2.
    out.path_factor = t_b * t_d * 0.5 * (t_e * t_e + t_f * t_f);
  }
  out.rate_hz = out.local_rate_hz * out.path_factor * out.detector_factor;
  return out;
}

inline double distributed_rate(const ThroughputSpec& spec, const RoutePlan& plan, const Topology& topo,
                               HeraldClass herald) {
  return rate_budget(spec, plan, topo, herald).rate_hz;
}

// Local rate attenuated once by the summed route losses of all photons plus
// the total insertion loss.
inline double single_application_rate(const ThroughputSpec& spec, const RoutePlan& plan, const Topology& topo) {
  using namespace fusion_modes;
  double loss = spec.insertion_loss_db;
  for (const std::string& m : {b, d, e, f}) {
    loss += path_loss_db(plan, topo, m);
    auto it = spec.per_mode_loss_db.find(m);
    if (it != spec.per_mode_loss_db.end()) loss += it->second;
  }
  double eff = 1.0;
  for (const auto& [id, e] : spec.detector_efficiency) eff *= e;
  return local_fourfold_rate(spec) * db_to_transmission(loss) * eff;
}

// Additional loss (dB) that would bring `rate_hz` down to `target_hz`.
inline double unbudgeted_loss_db(double rate_hz, double target_hz) {
  if (!(rate_hz > 0.0) || !(target_hz > 0.0)) throw Error(Errc::kInvalidArgument, "rates must be positive");
  return 10.0 * std::log10(rate_hz / target_hz);
}

}  // namespace qnet
