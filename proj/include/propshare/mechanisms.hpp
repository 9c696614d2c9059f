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

#ifndef PROPSHARE_MECHANISMS_HPP
#define PROPSHARE_MECHANISMS_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "propshare/network.hpp"

namespace propshare {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Share weight applied to an agent's informed-count in the starter split.
enum class SplitFunction { identity, shifted, exponential };

inline double eval_split(SplitFunction f, int n) {
  switch (f) {
    case SplitFunction::identity: return static_cast<double>(n);
    case SplitFunction::shifted: return static_cast<double>(n) + 1.0;
    case SplitFunction::exponential: return std::ldexp(1.0, n);
  }
  return 0.0;
}

inline const char* to_string(SplitFunction f) {
  switch (f) {
    case SplitFunction::identity: return "identity";
    case SplitFunction::shifted: return "shifted";
    case SplitFunction::exponential: return "exp";
  }
  return "unknown";
}

/// Order in which the children of a layer are handled. Arrival order is the
/// default; it is what makes early propagation pay (see check_time_efficiency).
/// Seeded-random exists for order-invariance testing.
enum class ChildOrdering { arrival, identifier, seeded_random };

inline const char* to_string(ChildOrdering o) {
  switch (o) {
    case ChildOrdering::arrival: return "arrival";
    case ChildOrdering::identifier: return "id";
    case ChildOrdering::seeded_random: return "random";
  }
  return "unknown";
}

struct StarterConfig {
  double beta = 0.5;
  SplitFunction split = SplitFunction::shifted;
  double budget = 1.0;

  void validate() const {
    if (!(beta > 0.0 && beta < 1.0))
      throw ConfigError("beta must lie strictly between 0 and 1");
    if (!(budget > 0.0)) throw ConfigError("budget must be positive");
  }
};

struct SchemeConfig {
  double alpha = 0.2;
  double beta = 0.2;
  double budget = 1.0;
  ChildOrdering ordering = ChildOrdering::arrival;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw ConfigError("alpha must lie strictly between 0 and 1");
    if (!(beta > 0.0 && beta < 1.0))
      throw ConfigError("beta must lie strictly between 0 and 1");
    if (!(budget > 0.0)) throw ConfigError("budget must be positive");
  }
};

/// One config covering every mechanism; unused fields are ignored by the
/// mechanisms that do not read them.
struct MechanismConfig {
  MechanismKind kind = MechanismKind::scheme;
  double alpha = 0.2;
  double beta = 0.2;
  double budget = 1.0;
  SplitFunction split = SplitFunction::shifted;
  ChildOrdering ordering = ChildOrdering::arrival;
  std::uint64_t seed = 0;
  double fixed_reward = 1.0;

  StarterConfig starter() const { return {beta, split, budget}; }
  SchemeConfig scheme() const { return {alpha, beta, budget, ordering, seed}; }

  void validate() const {
    switch (kind) {
      case MechanismKind::starter: starter().validate(); break;
      case MechanismKind::scheme: scheme().validate(); break;
      case MechanismKind::fixed_reward:
        if (!(fixed_reward > 0.0))
          throw ConfigError("fixed reward must be positive");
        [[fallthrough]];
      case MechanismKind::uniform:
        if (!(budget > 0.0)) throw ConfigError("budget must be positive");
        break;
    }
  }
};

// ---------------------------------------------------------------------------
// Ledger and result types
// ---------------------------------------------------------------------------

/// Per-agent running account. `base` is the participation stake that
/// co-layer propagation taxes away; `bonus` accumulates the agent's own
/// propagation gains. The final reward is their sum, read only after every
/// layer has been handled: later layers may still tax `base` retroactively.
struct AgentLedger {
  double base = 0.0;
  double bonus = 0.0;

  double total() const { return base + bonus; }

  friend bool operator==(const AgentLedger&, const AgentLedger&) = default;
};

using LedgerMap = std::map<AgentId, AgentLedger>;

/// One atomic reward movement: `payer` loses `payer_loss` of its base,
/// split between the propagating `parent` (bonus) and the new `child`
/// (base). Gains are computed from the payer's pre-transfer base.
struct TransferRecord {
  AgentId child;
  AgentId parent;
  AgentId payer;
  double parent_gain = 0.0;
  double child_gain = 0.0;
  double payer_loss = 0.0;
};

/// Audit snapshot of one layer at the moment its distribution finished.
struct LayerAccount {
  int layer = 0;
  double incoming = 0.0;     // sum of base stakes when processing started
  double retained = 0.0;     // base+bonus held by the layer right afterwards
  double passed_down = 0.0;  // total child gains produced by this layer
  std::map<AgentId, double> entries;  // per-agent stake at processing start
};

struct RewardVector {
  std::map<AgentId, double> rewards;  // every non-sponsor agent of the input
  double sponsor_remainder = 0.0;
  std::vector<TransferRecord> trace;
  std::vector<LayerAccount> layers;

  double total() const {
    double sum = sponsor_remainder;
    for (const auto& [id, r] : rewards) sum += r;
    return sum;
  }
};

// ---------------------------------------------------------------------------
// Processing order
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t layer_rng_seed(std::uint64_t seed, int layer) {
  return seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(layer + 1);
}

// std::shuffle is implementation-defined; this one is pinned by mt19937_64.
template <typename T>
void deterministic_shuffle(std::vector<T>& values, std::mt19937_64& rng) {
  for (std::size_t i = values.size(); i > 1; --i)
    std::swap(values[i - 1], values[rng() % i]);
}

inline double arrival_time(const Layering& lay, const AgentId& id) {
  const auto& in = lay.kept_in.at(id);  // sorted by (t, from)
  return in.front().t;
}

}  // namespace detail

/// Children of layer `l` (the members of layer l+1) in processing order:
/// by earliest kept in-edge, by id, or deterministically shuffled.
inline std::vector<AgentId> child_processing_order(const Layering& lay, int l,
                                                   ChildOrdering ordering,
                                                   std::mt19937_64& rng) {
  if (l >= lay.layer_count()) return {};
  std::vector<AgentId> children = lay.layer(l + 1);  // sorted by id
  switch (ordering) {
    case ChildOrdering::identifier: break;
    case ChildOrdering::arrival:
      std::sort(children.begin(), children.end(),
                [&lay](const AgentId& a, const AgentId& b) {
                  return std::pair(detail::arrival_time(lay, a), a) <
                         std::pair(detail::arrival_time(lay, b), b);
                });
      break;
    case ChildOrdering::seeded_random:
      detail::deterministic_shuffle(children, rng);
      break;
  }
  return children;
}

/// Kept parents of `child` in processing order (same policies).
inline std::vector<AgentId> parent_processing_order(const Layering& lay,
                                                    const AgentId& child,
                                                    ChildOrdering ordering,
                                                    std::mt19937_64& rng) {
  std::vector<AgentId> parents;
  for (const auto& e : lay.kept_in.at(child))  // sorted by (t, from)
    parents.push_back(e.from);
  if (ordering == ChildOrdering::identifier)
    std::sort(parents.begin(), parents.end());
  else if (ordering == ChildOrdering::seeded_random)
    detail::deterministic_shuffle(parents, rng);
  return parents;
}

// ---------------------------------------------------------------------------
// Starter mechanism
// ---------------------------------------------------------------------------

/// Budget earmarked for layer l: beta^(l-1) * (1-beta) * B. The layer totals
/// form a geometric series summing to B in the limit; whatever the finite
/// graph cannot absorb stays with the sponsor.
inline double starter_layer_budget(int l, const StarterConfig& cfg) {
  if (l < 1) throw InvalidParametersError("layer index must be positive");
  return std::pow(cfg.beta, l - 1) * (1.0 - cfg.beta) * cfg.budget;
}

/// Splits each layer's budget proportionally to f(informed count). A layer
/// whose weights sum to zero cannot be split; its budget reverts to the
/// sponsor rather than being forced onto non-propagating agents.
inline RewardVector run_starter(const Network& net, const StarterConfig& cfg) {
  cfg.validate();
  Layering lay = compute_layering(net);

  RewardVector out;
  for (const AgentId& a : net.agents) out.rewards[a] = 0.0;

  double remainder = cfg.budget;
  for (int l = 1; l <= lay.layer_count(); ++l) {
    double layer_budget = starter_layer_budget(l, cfg);
    double denom = 0.0;
    for (const AgentId& a : lay.layer(l))
      denom += eval_split(cfg.split, lay.informed_count(a));

    LayerAccount account;
    account.layer = l;
    account.incoming = layer_budget;
    if (denom > 0.0) {
      for (const AgentId& a : lay.layer(l)) {
        double share =
            eval_split(cfg.split, lay.informed_count(a)) / denom * layer_budget;
        out.rewards[a] = share;
        account.entries[a] = share;
        account.retained += share;
      }
      remainder -= layer_budget;
    }
    out.layers.push_back(account);
  }
  out.sponsor_remainder = remainder;
  return out;
}

// ---------------------------------------------------------------------------
// Budget distribution scheme
// ---------------------------------------------------------------------------

/// Stakes the whole budget on the first layer, equally. Requires at least
/// two first-layer agents; a lone first contact could otherwise hold the
/// entire budget with no reason to propagate.
inline LedgerMap make_initial_ledger(const Layering& lay, double budget) {
  if (lay.layers.empty() || lay.layers.front().size() < 2)
    throw FirstLayerError();
  LedgerMap ledger;
  for (const auto& [id, d] : lay.depth)
    if (d > 0) ledger[id];
  double stake = budget / static_cast<double>(lay.layers.front().size());
  for (const AgentId& id : lay.layers.front()) ledger[id].base = stake;
  return ledger;
}

/// Distribution step for a layer with at least two agents. For every child
/// j of the layer, every kept parent i' collects from every co-layer agent:
/// the payer's base is taxed by alpha, of which beta goes to the parent's
/// bonus and 1-beta to the child's stake.
inline std::vector<TransferRecord> distribute_adjacent_layers(
    LedgerMap& ledger, const Layering& lay, int l, const SchemeConfig& cfg) {
  std::vector<TransferRecord> records;
  if (l >= lay.layer_count()) return records;

  std::mt19937_64 rng(detail::layer_rng_seed(cfg.seed, l));
  const std::vector<AgentId>& layer_agents = lay.layer(l);
  for (const AgentId& child :
       child_processing_order(lay, l, cfg.ordering, rng)) {
    for (const AgentId& parent :
         parent_processing_order(lay, child, cfg.ordering, rng)) {
      for (const AgentId& payer : layer_agents) {
        if (payer == parent) continue;
        double taken = cfg.alpha * ledger.at(payer).base;
        TransferRecord rec;
        rec.child = child;
        rec.parent = parent;
        rec.payer = payer;
        rec.parent_gain = taken * cfg.beta;
        rec.child_gain = taken * (1.0 - cfg.beta);
        rec.payer_loss = rec.parent_gain + rec.child_gain;
        ledger.at(parent).bonus += rec.parent_gain;
        ledger.at(child).base += rec.child_gain;
        ledger.at(payer).base -= rec.payer_loss;
        records.push_back(rec);
      }
    }
  }
  return records;
}

/// Distribution step for a layer holding a single agent, which has no
/// co-layer agents to tax. Leaves above it stand in as payers when any
/// exist; otherwise the parents of the nearest multi-parent ancestor pay,
/// damped by 1/(m * 2^hops) so that a chain of such layers can never drain
/// them by more than propagation would have cost among siblings.
inline std::vector<TransferRecord> distribute_single_agent_layer(
    LedgerMap& ledger, const Layering& lay, const AgentId& id,
    const SchemeConfig& cfg) {
  int l = lay.depth_of(id);
  if (l < 1 || lay.layer(l).size() != 1 || lay.layer(l).front() != id)
    throw NotSingleAgentLayerError("agent '" + id +
                                   "' is not alone in its layer");

  std::vector<TransferRecord> records;
  std::mt19937_64 rng(detail::layer_rng_seed(cfg.seed, l));
  std::vector<AgentId> children =
      child_processing_order(lay, l, cfg.ordering, rng);
  if (children.empty()) return records;

  SingleLayerContext ctx = single_layer_context(lay, id);

  std::vector<AgentId> payers;
  double rate = cfg.alpha;
  if (const auto* leaf = std::get_if<LeafTaxContext>(&ctx)) {
    payers = leaf->leaves;
  } else {
    const auto& chain = std::get<AncestorTaxContext>(ctx);
    rate = cfg.alpha / (chain.anchor_parent_count * std::ldexp(1.0, chain.hops));
    for (const auto& e : lay.kept_in.at(chain.anchor))
      payers.push_back(e.from);
  }

  for (const AgentId& child : children) {
    for (const AgentId& payer : payers) {
      double taken = rate * ledger.at(payer).base;
      TransferRecord rec;
      rec.child = child;
      rec.parent = id;
      rec.payer = payer;
      rec.parent_gain = taken * cfg.beta;
      rec.child_gain = taken * (1.0 - cfg.beta);
      rec.payer_loss = rec.parent_gain + rec.child_gain;
      ledger.at(id).bonus += rec.parent_gain;
      ledger.at(child).base += rec.child_gain;
      ledger.at(payer).base -= rec.payer_loss;
      records.push_back(rec);
    }
  }
  return records;
}

/// Runs the full scheme: stake the first layer, walk the layers in order
/// dispatching on layer size, and only then read the rewards off the
/// ledgers. The sponsor keeps nothing.
inline RewardVector run_scheme(const Network& net, const SchemeConfig& cfg) {
  cfg.validate();
  Layering lay = compute_layering(net);
  LedgerMap ledger = make_initial_ledger(lay, cfg.budget);

  RewardVector out;
  for (int l = 1; l <= lay.layer_count(); ++l) {
    LayerAccount account;
    account.layer = l;
    for (const AgentId& a : lay.layer(l)) {
      account.entries[a] = ledger.at(a).base;
      account.incoming += ledger.at(a).base;
    }
    std::vector<TransferRecord> records =
        lay.layer(l).size() >= 2
            ? distribute_adjacent_layers(ledger, lay, l, cfg)
            : distribute_single_agent_layer(ledger, lay, lay.layer(l).front(),
                                            cfg);
    for (const TransferRecord& rec : records)
      account.passed_down += rec.child_gain;
    for (const AgentId& a : lay.layer(l))
      account.retained += ledger.at(a).total();
    out.trace.insert(out.trace.end(), records.begin(), records.end());
    out.layers.push_back(account);
  }

  for (const AgentId& a : net.agents) out.rewards[a] = 0.0;
  for (const auto& [id, led] : ledger) out.rewards[id] = led.total();
  out.sponsor_remainder = 0.0;
  return out;
}

/// Closed-form totals for a multi-agent layer, next to the totals actually
/// measured from the ledgers. With k co-layer propagation events an agent's
/// stake ends at (1-alpha)^k of its entry value regardless of processing
/// order, so retained = beta*sum(b) + (1-beta)*sum((1-alpha)^k * b).
struct LayerTotals {
  double retained = 0.0;
  double passed_down = 0.0;
  double measured_retained = 0.0;
  double measured_passed_down = 0.0;
};

inline LayerTotals scheme_layer_total(const Layering& lay, int l,
                                      const LedgerMap& before,
                                      const LedgerMap& after,
                                      const SchemeConfig& cfg) {
  LayerTotals totals;
  double stake_sum = 0.0;
  for (const AgentId& i : lay.layer(l)) {
    double stake = before.at(i).base;
    double surviving =
        std::pow(1.0 - cfg.alpha, lay.co_layer_informed_count(i));
    stake_sum += stake;
    totals.retained += cfg.beta * stake + (1.0 - cfg.beta) * surviving * stake;
    totals.measured_retained +=
        after.at(i).total() - before.at(i).bonus;
  }
  totals.passed_down = stake_sum - totals.retained;
  if (l < lay.layer_count())
    for (const AgentId& j : lay.layer(l + 1))
      totals.measured_passed_down += after.at(j).base - before.at(j).base;
  return totals;
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

/// Pays every informed agent the same fixed amount, ignoring the budget.
/// The sponsor remainder goes negative as soon as enough agents join.
inline RewardVector baseline_fixed_reward(const Network& net, double reward,
                                          double budget) {
  if (!(reward > 0.0)) throw ConfigError("fixed reward must be positive");
  if (!(budget > 0.0)) throw ConfigError("budget must be positive");
  Layering lay = compute_layering(net);

  RewardVector out;
  int informed = 0;
  for (const AgentId& a : net.agents) {
    bool reached = lay.reachable(a);
    out.rewards[a] = reached ? reward : 0.0;
    informed += reached ? 1 : 0;
  }
  out.sponsor_remainder = budget - reward * informed;
  return out;
}

/// Divides the budget equally among all informed agents.
inline RewardVector baseline_uniform(const Network& net, double budget) {
  if (!(budget > 0.0)) throw ConfigError("budget must be positive");
  Layering lay = compute_layering(net);
  int informed = 0;
  for (const AgentId& a : net.agents) informed += lay.reachable(a) ? 1 : 0;
  if (informed == 0) throw EmptyNetworkError();

  RewardVector out;
  double share = budget / informed;
  for (const AgentId& a : net.agents)
    out.rewards[a] = lay.reachable(a) ? share : 0.0;
  out.sponsor_remainder = 0.0;
  return out;
}

inline RewardVector run_mechanism(const Network& net,
                                  const MechanismConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case MechanismKind::starter: return run_starter(net, cfg.starter());
    case MechanismKind::scheme: return run_scheme(net, cfg.scheme());
    case MechanismKind::fixed_reward:
      return baseline_fixed_reward(net, cfg.fixed_reward, cfg.budget);
    case MechanismKind::uniform: return baseline_uniform(net, cfg.budget);
  }
  throw ConfigError("unknown mechanism");
}

}  // namespace propshare

#endif  // PROPSHARE_MECHANISMS_HPP
