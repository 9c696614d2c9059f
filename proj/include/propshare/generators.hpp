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

#ifndef PROPSHARE_GENERATORS_HPP
#define PROPSHARE_GENERATORS_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "propshare/network.hpp"

namespace propshare {

inline std::vector<std::string> fixture_names() {
  return {"example1", "example2", "figure3"};
}

/// Small bundled demo networks. Timestamps follow listing order.
inline Network bundled_fixture(const std::string& name) {
  Network net;
  net.sponsor = "S";
  auto add = [&net](const AgentId& from, const AgentId& to) {
    PropagationEvent e{from, to, static_cast<double>(net.edges.size())};
    if (from != net.sponsor) net.agents.insert(from);
    if (to != net.sponsor) net.agents.insert(to);
    net.edges.push_back(e);
  };

  if (name == "example1") {
    // Two first-layer agents with uneven fan-out, one second-layer
    // propagator, one terminal layer.
    add("S", "A");
    add("S", "B");
    add("A", "C");
    add("A", "D");
    add("B", "F");
    add("B", "G");
    add("B", "H");
    add("C", "I");
  } else if (name == "example2") {
    add("S", "A");
    add("S", "B");
    add("S", "C");
    add("A", "D");
    add("B", "E");
  } else if (name == "figure3") {
    // Three first-layer agents funnel into one agent, which then extends
    // a single-agent chain.
    add("S", "A");
    add("S", "B");
    add("S", "D");
    add("A", "C");
    add("B", "C");
    add("D", "C");
    add("C", "E");
  } else {
    throw UnknownFixtureError("unknown fixture '" + name + "'");
  }
  return net;
}

/// Parameters for the random families. Generation is a pure function of
/// the fields, including the seed.
struct GraphFamily {
  std::string family;  // chain | star | layered-random | single-chain-tail
  int length = 0;      // chain: agents along the chain, head included
  int width = 0;       // star: spokes; single-chain-tail: anchor parents
  int tail = 0;        // single-chain-tail: singleton layers below the anchor
  int leaves = 0;      // single-chain-tail: extra first-layer leaf agents
  std::vector<int> widths;  // layered-random: agents per layer
  int max_out_degree = 4;   // layered-random: per-agent out-edge cap
  std::uint64_t seed = 0;
};

namespace detail {

// Spreadsheet-style names (A, B, ..., Z, AA, AB, ...), skipping the
// sponsor's reserved id.
class NameSequence {
 public:
  explicit NameSequence(AgentId sponsor) : sponsor_(std::move(sponsor)) {}

  AgentId next() {
    while (true) {
      AgentId name = spreadsheet(counter_++);
      if (name != sponsor_) return name;
    }
  }

 private:
  static AgentId spreadsheet(int index) {
    std::string name;
    int n = index;
    while (n >= 0) {
      name.insert(name.begin(), static_cast<char>('A' + n % 26));
      n = n / 26 - 1;
    }
    return name;
  }

  AgentId sponsor_;
  int counter_ = 0;
};

}  // namespace detail

/// Deterministic generator for the supported families.
///
/// chain: a two-agent first layer with a singleton chain hanging off the
/// first of them; length counts the chain head.
/// star: the sponsor informs `width` agents, nothing else happens.
/// layered-random: fixed layer widths, random descending edges within the
/// out-degree cap, plus occasional same-layer or backward edges that the
/// layering is expected to ignore.
/// single-chain-tail: `width` first-layer agents all informing one anchor,
/// `leaves` extra first-layer agents that never propagate, and a singleton
/// chain of `tail` agents below the anchor.
inline Network gen_graph(const GraphFamily& family) {
  Network net;
  net.sponsor = "S";
  detail::NameSequence names(net.sponsor);
  auto add = [&net](const AgentId& from, const AgentId& to) {
    PropagationEvent e{from, to, static_cast<double>(net.edges.size())};
    if (from != net.sponsor) net.agents.insert(from);
    if (to != net.sponsor) net.agents.insert(to);
    net.edges.push_back(e);
  };

  if (family.family == "chain") {
    if (family.length < 1)
      throw InvalidParametersError("chain length must be at least 1");
    AgentId head = names.next();
    AgentId companion = names.next();
    add(net.sponsor, head);
    add(net.sponsor, companion);
    AgentId prev = head;
    for (int k = 1; k < family.length; ++k) {
      AgentId next = names.next();
      add(prev, next);
      prev = next;
    }
  } else if (family.family == "star") {
    if (family.width < 1)
      throw InvalidParametersError("star width must be at least 1");
    for (int k = 0; k < family.width; ++k) add(net.sponsor, names.next());
  } else if (family.family == "layered-random") {
    if (family.widths.empty())
      throw InvalidParametersError("layered-random needs layer widths");
    if (family.widths.front() < 2)
      throw InvalidParametersError("first layer width must be at least 2");
    if (family.max_out_degree < 1)
      throw InvalidParametersError("max out-degree must be at least 1");
    for (std::size_t l = 0; l + 1 < family.widths.size(); ++l)
      if (family.widths[l + 1] < 1 ||
          family.widths[l + 1] > family.widths[l] * family.max_out_degree)
        throw InvalidParametersError(
            "layer widths exceed what the out-degree cap can connect");

    std::mt19937_64 rng(family.seed);
    auto unit = [&rng]() {
      return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };

    std::vector<std::vector<AgentId>> layers;
    for (int w : family.widths) {
      std::vector<AgentId> layer;
      for (int k = 0; k < w; ++k) layer.push_back(names.next());
      layers.push_back(layer);
    }
    std::map<AgentId, int> out_degree;

    for (const AgentId& a : layers.front()) add(net.sponsor, a);
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
      for (const AgentId& child : layers[l + 1]) {
        std::vector<AgentId> open;
        for (const AgentId& p : layers[l])
          if (out_degree[p] < family.max_out_degree) open.push_back(p);
        const AgentId& parent = open[rng() % open.size()];
        add(parent, child);
        ++out_degree[parent];
      }
      for (const AgentId& parent : layers[l]) {
        for (const AgentId& child : layers[l + 1]) {
          bool connected = false;
          for (const auto& e : net.edges)
            if (e.from == parent && e.to == child) connected = true;
          if (connected || out_degree[parent] >= family.max_out_degree)
            continue;
          if (unit() < 0.25) {
            add(parent, child);
            ++out_degree[parent];
          }
        }
      }
      // A sprinkle of non-descending edges; the layering must shrug them
      // off. Capacity still owed to the next layer's mandatory parents is
      // kept free.
      auto can_spend = [&](std::size_t layer_index) {
        int free_slots = 0;
        for (const AgentId& u : layers[layer_index])
          free_slots += family.max_out_degree - out_degree[u];
        int reserve = layer_index + 1 < layers.size()
                          ? family.widths[layer_index + 1]
                          : 0;
        return free_slots - 1 >= reserve;
      };
      for (const AgentId& a : layers[l + 1]) {
        if (out_degree[a] >= family.max_out_degree || !can_spend(l + 1))
          continue;
        if (layers[l + 1].size() > 1 && unit() < 0.08) {
          const AgentId& b = layers[l + 1][rng() % layers[l + 1].size()];
          bool duplicate = b == a;
          for (const auto& e : net.edges)
            if (e.from == a && e.to == b) duplicate = true;
          if (!duplicate) {
            add(a, b);
            ++out_degree[a];
          }
        }
        if (unit() < 0.05 && out_degree[a] < family.max_out_degree &&
            can_spend(l + 1)) {
          const AgentId& b = layers[l][rng() % layers[l].size()];
          bool duplicate = false;
          for (const auto& e : net.edges)
            if (e.from == a && e.to == b) duplicate = true;
          if (!duplicate) {
            add(a, b);
            ++out_degree[a];
          }
        }
      }
    }
  } else if (family.family == "single-chain-tail") {
    if (family.width < 1)
      throw InvalidParametersError("anchor needs at least one parent");
    if (family.leaves < 0 || family.tail < 0)
      throw InvalidParametersError("leaves and tail must be nonnegative");
    if (family.width + family.leaves < 2)
      throw InvalidParametersError("first layer needs at least two agents");
    if (family.leaves == 0 && family.width < 2)
      throw InvalidParametersError(
          "without leaf agents the anchor needs at least two parents");

    std::vector<AgentId> parents;
    for (int k = 0; k < family.width; ++k) parents.push_back(names.next());
    std::vector<AgentId> leaf_agents;
    for (int k = 0; k < family.leaves; ++k) leaf_agents.push_back(names.next());
    AgentId anchor = names.next();

    for (const AgentId& p : parents) add(net.sponsor, p);
    for (const AgentId& f : leaf_agents) add(net.sponsor, f);
    for (const AgentId& p : parents) add(p, anchor);
    AgentId prev = anchor;
    for (int k = 0; k < family.tail; ++k) {
      AgentId next = names.next();
      add(prev, next);
      prev = next;
    }
  } else {
    throw InvalidParametersError("unknown graph family '" + family.family +
                                 "'");
  }
  return net;
}

}  // namespace propshare

#endif  // PROPSHARE_GENERATORS_HPP
