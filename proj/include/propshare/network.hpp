// Copyright 2026 The propshare Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PROPSHARE_NETWORK_HPP
#define PROPSHARE_NETWORK_HPP

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

namespace propshare {

/// Agents are identified by strings; lexicographic order is the canonical
/// tie-breaking order everywhere determinism matters.
using AgentId = std::string;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyNetworkError : Error {
  EmptyNetworkError() : Error("network has no agents besides the sponsor") {}
};

struct FirstLayerError : Error {
  FirstLayerError()
      : Error("the budget distribution scheme requires at least two agents "
              "in the first layer") {}
};

struct EdgeNotOwnedError : Error {
  using Error::Error;
};

struct NotSingleAgentLayerError : Error {
  using Error::Error;
};

struct NoAncestorError : Error {
  using Error::Error;
};

struct EnumerationCapError : Error {
  using Error::Error;
};

struct UnknownFixtureError : Error {
  using Error::Error;
};

struct InvalidParametersError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

enum class MechanismKind { starter, scheme, fixed_reward, uniform };

inline const char* to_string(MechanismKind k) {
  switch (k) {
    case MechanismKind::starter: return "starter";
    case MechanismKind::scheme: return "scheme";
    case MechanismKind::fixed_reward: return "fixed";
    case MechanismKind::uniform: return "uniform";
  }
  return "unknown";
}

/// One directed propagation event. Only the relative order of timestamps is
/// meaningful; when a file omits them, list position is used.
struct PropagationEvent {
  AgentId from;
  AgentId to;
  double t = 0.0;

  friend bool operator==(const PropagationEvent&,
                         const PropagationEvent&) = default;
};

inline bool event_before(const PropagationEvent& a, const PropagationEvent& b) {
  return std::tie(a.t, a.from, a.to) < std::tie(b.t, b.from, b.to);
}

/// A sponsor-rooted propagation graph. `agents` holds every non-sponsor
/// agent; the sponsor is tracked separately and must not appear in it.
struct Network {
  AgentId sponsor;
  std::set<AgentId> agents;
  std::vector<PropagationEvent> edges;

  friend bool operator==(const Network&, const Network&) = default;
};

enum class ValidationCode {
  empty_network,
  scheme_requires_two_first_layer_agents,
  sponsor_listed_as_agent,
  self_loop,
  duplicate_edge,
  undeclared_agent,
  nonfinite_timestamp,
};

struct ValidationMessage {
  ValidationCode code;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationMessage> errors;
  std::vector<std::string> warnings;

  bool ok() const { return errors.empty(); }
  bool has_error(ValidationCode code) const {
    for (const auto& m : errors)
      if (m.code == code) return true;
    return false;
  }
};

/// Breadth-first layering of a network. Layer l (1-based) is the set of
/// agents at shortest distance l from the sponsor. An edge is kept exactly
/// when it descends one layer; every other edge is recorded in `dropped`
/// and never carries reward. Unreachable agents are excluded from `depth`
/// and listed separately. All containers are canonically sorted, so two
/// layerings compare equal independently of input edge order.
struct Layering {
  std::map<AgentId, int> depth;  // sponsor at 0, reachable agents only
  std::vector<std::vector<AgentId>> layers;  // layers[l-1] = L_l, sorted by id
  std::vector<PropagationEvent> kept_edges;
  std::vector<PropagationEvent> dropped_edges;
  std::vector<AgentId> unreachable;

  std::map<AgentId, std::vector<PropagationEvent>> kept_out;  // by (t, to)
  std::map<AgentId, std::vector<PropagationEvent>> kept_in;   // by (t, from)

  int layer_count() const { return static_cast<int>(layers.size()); }

  bool reachable(const AgentId& id) const { return depth.count(id) > 0; }

  int depth_of(const AgentId& id) const {
    auto it = depth.find(id);
    return it == depth.end() ? -1 : it->second;
  }

  const std::vector<AgentId>& layer(int l) const {
    return layers.at(static_cast<std::size_t>(l) - 1);
  }

  /// Number of agents informed by `id` through kept edges (n_i).
  int informed_count(const AgentId& id) const {
    auto it = kept_out.find(id);
    return it == kept_out.end() ? 0 : static_cast<int>(it->second.size());
  }

  /// Kept edges informed by everyone else in id's layer (n_{-i}).
  int co_layer_informed_count(const AgentId& id) const {
    int l = depth_of(id);
    if (l <= 0) return 0;
    int total = 0;
    for (const AgentId& j : layer(l))
      if (j != id) total += informed_count(j);
    return total;
  }

  friend bool operator==(const Layering&, const Layering&) = default;
};

/// BFS layering. Works on any digraph: cycles, cross and back edges are
/// tolerated and end up in `dropped_edges`.
inline Layering compute_layering(const Network& net) {
  std::map<AgentId, std::vector<AgentId>> adjacency;
  for (const auto& e : net.edges) adjacency[e.from].push_back(e.to);

  Layering lay;
  lay.depth[net.sponsor] = 0;
  std::deque<AgentId> queue{net.sponsor};
  while (!queue.empty()) {
    AgentId cur = queue.front();
    queue.pop_front();
    int d = lay.depth[cur];
    auto it = adjacency.find(cur);
    if (it == adjacency.end()) continue;
    for (const AgentId& next : it->second) {
      if (lay.depth.count(next)) continue;
      lay.depth[next] = d + 1;
      queue.push_back(next);
    }
  }

  int max_depth = 0;
  for (const auto& [id, d] : lay.depth) max_depth = std::max(max_depth, d);
  lay.layers.assign(static_cast<std::size_t>(max_depth), {});
  for (const auto& [id, d] : lay.depth)
    if (d > 0) lay.layers[static_cast<std::size_t>(d) - 1].push_back(id);
  for (auto& layer : lay.layers) std::sort(layer.begin(), layer.end());

  for (const auto& e : net.edges) {
    auto from_it = lay.depth.find(e.from);
    auto to_it = lay.depth.find(e.to);
    bool kept = from_it != lay.depth.end() && to_it != lay.depth.end() &&
                to_it->second == from_it->second + 1;
    (kept ? lay.kept_edges : lay.dropped_edges).push_back(e);
  }
  std::sort(lay.kept_edges.begin(), lay.kept_edges.end(), event_before);
  std::sort(lay.dropped_edges.begin(), lay.dropped_edges.end(), event_before);

  for (const auto& e : lay.kept_edges) {
    lay.kept_out[e.from].push_back(e);
    lay.kept_in[e.to].push_back(e);
  }
  auto by_target = [](const PropagationEvent& a, const PropagationEvent& b) {
    return std::tie(a.t, a.to) < std::tie(b.t, b.to);
  };
  auto by_source = [](const PropagationEvent& a, const PropagationEvent& b) {
    return std::tie(a.t, a.from) < std::tie(b.t, b.from);
  };
  for (auto& [id, out] : lay.kept_out)
    std::sort(out.begin(), out.end(), by_target);
  for (auto& [id, in] : lay.kept_in)
    std::sort(in.begin(), in.end(), by_source);

  for (const AgentId& a : net.agents)
    if (!lay.depth.count(a)) lay.unreachable.push_back(a);
  std::sort(lay.unreachable.begin(), lay.unreachable.end());
  return lay;
}

/// Structural and per-mechanism validation. Unreachable agents and
/// non-descending edges are warnings (they are dropped from computation,
/// not rejected); a first layer smaller than two is fatal for the scheme.
inline ValidationReport validate_network(const Network& net,
                                         MechanismKind kind) {
  ValidationReport report;
  auto error = [&report](ValidationCode code, std::string detail) {
    report.errors.push_back({code, std::move(detail)});
  };

  if (net.sponsor.empty())
    error(ValidationCode::undeclared_agent, "sponsor id is empty");
  if (net.agents.empty()) error(ValidationCode::empty_network, "no agents");
  if (net.agents.count(net.sponsor))
    error(ValidationCode::sponsor_listed_as_agent,
          "sponsor '" + net.sponsor + "' also listed as an agent");

  std::set<std::pair<AgentId, AgentId>> seen;
  for (const auto& e : net.edges) {
    if (e.from == e.to)
      error(ValidationCode::self_loop, "self-loop at '" + e.from + "'");
    if (!seen.insert({e.from, e.to}).second)
      error(ValidationCode::duplicate_edge,
            "duplicate edge (" + e.from + "," + e.to + ")");
    for (const AgentId* end : {&e.from, &e.to})
      if (*end != net.sponsor && !net.agents.count(*end))
        error(ValidationCode::undeclared_agent,
              "edge endpoint '" + *end + "' is not a declared agent");
    if (!std::isfinite(e.t))
      error(ValidationCode::nonfinite_timestamp,
            "edge (" + e.from + "," + e.to + ") has a non-finite timestamp");
  }

  if (!report.ok()) return report;

  Layering lay = compute_layering(net);
  for (const AgentId& a : lay.unreachable)
    report.warnings.push_back("agent '" + a +
                              "' is unreachable from the sponsor; dropped");
  for (const auto& e : lay.dropped_edges)
    report.warnings.push_back("edge (" + e.from + "," + e.to +
                              ") does not descend one layer; ignored");
  if (kind == MechanismKind::scheme) {
    std::size_t first = lay.layers.empty() ? 0 : lay.layers.front().size();
    if (first < 2)
      error(ValidationCode::scheme_requires_two_first_layer_agents,
            "scheme requires at least two agents in the first layer, found " +
                std::to_string(first));
  }
  return report;
}

/// Deletes a subset of `owner`'s outgoing edges and restricts the result to
/// what the sponsor can still reach. The owner is always retained, even if
/// the deletion strands it; everything else that loses its last path from
/// the sponsor disappears together with its incident edges.
inline Network hide_edges(
    const Network& net, const AgentId& owner,
    const std::set<std::pair<AgentId, AgentId>>& hidden) {
  std::set<std::pair<AgentId, AgentId>> present;
  for (const auto& e : net.edges) present.insert({e.from, e.to});
  for (const auto& [from, to] : hidden) {
    if (from != owner)
      throw EdgeNotOwnedError("edge (" + from + "," + to +
                              ") does not originate at '" + owner + "'");
    if (!present.count({from, to}))
      throw EdgeNotOwnedError("edge (" + from + "," + to +
                              ") is not present in the network");
  }

  std::vector<PropagationEvent> remaining;
  remaining.reserve(net.edges.size());
  for (const auto& e : net.edges)
    if (!hidden.count({e.from, e.to})) remaining.push_back(e);

  std::map<AgentId, std::vector<AgentId>> adjacency;
  for (const auto& e : remaining) adjacency[e.from].push_back(e.to);
  std::set<AgentId> reached{net.sponsor};
  std::deque<AgentId> queue{net.sponsor};
  while (!queue.empty()) {
    AgentId cur = queue.front();
    queue.pop_front();
    auto it = adjacency.find(cur);
    if (it == adjacency.end()) continue;
    for (const AgentId& next : it->second)
      if (reached.insert(next).second) queue.push_back(next);
  }

  Network result;
  result.sponsor = net.sponsor;
  for (const AgentId& a : net.agents)
    if (reached.count(a) || a == owner) result.agents.insert(a);
  for (const auto& e : remaining) {
    bool from_ok = e.from == net.sponsor || result.agents.count(e.from);
    bool to_ok = e.to == net.sponsor || result.agents.count(e.to);
    if (from_ok && to_ok) result.edges.push_back(e);
  }
  return result;
}

inline Network hide_edges(const Network& net, const AgentId& owner,
                          const std::vector<PropagationEvent>& hidden) {
  std::set<std::pair<AgentId, AgentId>> keys;
  for (const auto& e : hidden) keys.insert({e.from, e.to});
  return hide_edges(net, owner, keys);
}

/// Taxation context for a layer that contains a single agent `i`.
///
/// When the layers above still contain agents with no kept outgoing edges
/// (other than i itself), those leaves are taxed like co-layer agents.
struct LeafTaxContext {
  std::vector<AgentId> leaves;  // sorted by id, never contains i
};

/// Otherwise the chain above i is walked until an agent with more than one
/// kept parent is found; that agent's parents are taxed with a divisor that
/// doubles for every singleton hop between i and the anchor.
struct AncestorTaxContext {
  AgentId anchor;
  int anchor_parent_count = 0;  // m, always >= 2
  int hops = 0;  // 1 when the anchor is i itself, +1 per hop above
};

using SingleLayerContext = std::variant<LeafTaxContext, AncestorTaxContext>;

inline SingleLayerContext single_layer_context(const Layering& lay,
                                               const AgentId& id) {
  int l = lay.depth_of(id);
  if (l < 1 || lay.layer(l).size() != 1 || lay.layer(l).front() != id)
    throw NotSingleAgentLayerError("agent '" + id +
                                   "' is not alone in its layer");
  if (lay.layers.front().size() < 2) throw FirstLayerError();

  LeafTaxContext leaf_ctx;
  for (const auto& [agent, d] : lay.depth) {
    if (d < 1 || d > l || agent == id) continue;
    if (lay.informed_count(agent) == 0) leaf_ctx.leaves.push_back(agent);
  }
  if (!leaf_ctx.leaves.empty()) return leaf_ctx;

  AgentId cur = id;
  while (true) {
    auto it = lay.kept_in.find(cur);
    std::size_t parents = it == lay.kept_in.end() ? 0 : it->second.size();
    if (parents > 1) {
      AncestorTaxContext ctx;
      ctx.anchor = cur;
      ctx.anchor_parent_count = static_cast<int>(parents);
      ctx.hops = l - lay.depth_of(cur) + 1;
      return ctx;
    }
    if (parents == 0)
      throw NoAncestorError("no multi-parent ancestor above '" + id + "'");
    const AgentId& parent = it->second.front().from;
    if (lay.depth_of(parent) == 0)
      throw NoAncestorError("no multi-parent ancestor above '" + id + "'");
    cur = parent;
  }
}

}  // namespace propshare

#endif  // PROPSHARE_NETWORK_HPP
