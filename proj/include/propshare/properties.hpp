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

#ifndef PROPSHARE_PROPERTIES_HPP
#define PROPSHARE_PROPERTIES_HPP

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "propshare/mechanisms.hpp"
#include "propshare/network.hpp"

namespace propshare {

enum class Verdict { pass, fail, vacuous };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::vacuous: return "vacuous";
  }
  return "unknown";
}

/// A reproducible counterexample: the deviating agent, what was changed,
/// and the agent's reward before and after the change.
struct Violation {
  AgentId agent;
  std::string description;
  double reward_before = 0.0;
  double reward_after = 0.0;
};

struct PropertyReport {
  std::string property;
  Verdict verdict = Verdict::vacuous;
  std::vector<Violation> violations;
  long long instances_checked = 0;
  double tolerance = 0.0;
};

namespace detail {

inline Verdict settle(long long instances, const std::vector<Violation>& v) {
  if (instances == 0) return Verdict::vacuous;
  return v.empty() ? Verdict::pass : Verdict::fail;
}

/// The part of a layering that the mechanisms actually consume. Hiding
/// edges that leaves this unchanged provably leaves every reward unchanged.
struct LayerSignature {
  std::map<AgentId, int> depth;
  std::set<std::pair<AgentId, AgentId>> kept;

  friend bool operator==(const LayerSignature&,
                         const LayerSignature&) = default;
};

inline LayerSignature layer_signature(const Layering& lay) {
  LayerSignature sig;
  sig.depth = lay.depth;
  for (const auto& e : lay.kept_edges) sig.kept.insert({e.from, e.to});
  return sig;
}

inline double unit_interval(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::string edge_set_label(
    const std::vector<PropagationEvent>& edges) {
  std::ostringstream out;
  out << "hid {";
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (k) out << ",";
    out << "(" << edges[k].from << "," << edges[k].to << ")";
  }
  out << "}";
  return out.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Accounting: feasibility, WBB, BB, IR
// ---------------------------------------------------------------------------

/// Exact bookkeeping checks on a single mechanism run, reported separately:
/// the budget is fully accounted for, the sponsor remainder is nonnegative
/// (WBB) and zero (BB), and no agent ends up negative (IR).
inline std::vector<PropertyReport> check_accounting(
    const Network& net, const MechanismConfig& cfg) {
  RewardVector rv = run_mechanism(net, cfg);
  double tol = 1e-9 * cfg.budget;

  PropertyReport feasibility{"feasibility", Verdict::pass, {}, 1, tol};
  if (std::abs(rv.total() - cfg.budget) > tol)
    feasibility.violations.push_back({net.sponsor,
                                      "rewards plus remainder miss the budget",
                                      rv.total(), cfg.budget});

  PropertyReport wbb{"wbb", Verdict::pass, {}, 1, tol};
  if (rv.sponsor_remainder < -tol)
    wbb.violations.push_back({net.sponsor, "sponsor remainder is negative",
                              rv.sponsor_remainder, 0.0});

  PropertyReport bb{"bb", Verdict::pass, {}, 1, tol};
  if (std::abs(rv.sponsor_remainder) > tol)
    bb.violations.push_back({net.sponsor, "sponsor remainder is not zero",
                             rv.sponsor_remainder, 0.0});

  PropertyReport ir{"ir", Verdict::pass, {}, 0, tol};
  for (const auto& [agent, reward] : rv.rewards) {
    ++ir.instances_checked;
    if (reward < -tol)
      ir.violations.push_back({agent, "negative reward", reward, 0.0});
  }

  for (PropertyReport* r : {&feasibility, &wbb, &bb, &ir})
    r->verdict = detail::settle(r->instances_checked, r->violations);
  return {feasibility, wbb, bb, ir};
}

// ---------------------------------------------------------------------------
// Propagation incentive compatibility
// ---------------------------------------------------------------------------

struct PicReports {
  PropertyReport weak;    // "pic": hiding any out-edge subset never pays
  PropertyReport strict;  // "spic": hiding that changes the kept structure
                          // must strictly cost the deviator
};

/// Enumerates, for every agent, every nonempty subset of its outgoing edges,
/// reruns the mechanism on the hidden counterfactual and compares the
/// agent's reward. Agents above the enumeration cap raise an error; the
/// checker never silently samples.
inline PicReports check_pic_detailed(const Network& net,
                                     const MechanismConfig& cfg,
                                     bool with_strict,
                                     int enumeration_cap = 12) {
  double weak_slack = 1e-9 * cfg.budget;
  double strict_gap = 1e-12 * cfg.budget;

  PicReports out;
  out.weak = {"pic", Verdict::vacuous, {}, 0, weak_slack};
  out.strict = {"spic", Verdict::vacuous, {}, 0, strict_gap};

  RewardVector base = run_mechanism(net, cfg);
  detail::LayerSignature base_sig =
      detail::layer_signature(compute_layering(net));

  for (const AgentId& agent : net.agents) {
    std::vector<PropagationEvent> out_edges;
    for (const auto& e : net.edges)
      if (e.from == agent) out_edges.push_back(e);
    if (out_edges.empty()) continue;
    if (static_cast<int>(out_edges.size()) > enumeration_cap)
      throw EnumerationCapError(
          "agent '" + agent + "' has " + std::to_string(out_edges.size()) +
          " outgoing edges; enumeration cap is " +
          std::to_string(enumeration_cap));

    std::uint32_t subsets = 1u << out_edges.size();
    for (std::uint32_t mask = 1; mask < subsets; ++mask) {
      std::vector<PropagationEvent> hidden;
      for (std::size_t bit = 0; bit < out_edges.size(); ++bit)
        if (mask & (1u << bit)) hidden.push_back(out_edges[bit]);

      Network counterfactual = hide_edges(net, agent, hidden);
      RewardVector alt = run_mechanism(counterfactual, cfg);
      double before = base.rewards.at(agent);
      double after = alt.rewards.at(agent);

      ++out.weak.instances_checked;
      if (before < after - weak_slack) {
        out.weak.violations.push_back({agent, detail::edge_set_label(hidden),
                                       before, after});
      }
      if (with_strict) {
        bool altered =
            detail::layer_signature(compute_layering(counterfactual)) !=
            base_sig;
        if (altered) {
          ++out.strict.instances_checked;
          if (before - after < strict_gap)
            out.strict.violations.push_back(
                {agent,
                 detail::edge_set_label(hidden) + " changed the kept "
                 "structure without strictly lowering the deviator's reward",
                 before, after});
        }
      }
    }
  }
  out.weak.verdict = detail::settle(out.weak.instances_checked,
                                    out.weak.violations);
  out.strict.verdict = detail::settle(out.strict.instances_checked,
                                      out.strict.violations);
  return out;
}

inline PropertyReport check_pic(const Network& net, const MechanismConfig& cfg,
                                bool strict, int enumeration_cap = 12) {
  PicReports both = check_pic_detailed(net, cfg, strict, enumeration_cap);
  if (!strict) return both.weak;

  PropertyReport merged = both.strict;
  merged.instances_checked = both.weak.instances_checked;
  merged.violations.insert(merged.violations.begin(),
                           both.weak.violations.begin(),
                           both.weak.violations.end());
  merged.verdict = detail::settle(merged.instances_checked, merged.violations);
  return merged;
}

// ---------------------------------------------------------------------------
// Time efficiency
// ---------------------------------------------------------------------------

/// Delaying all of one agent's outgoing edges must never raise that agent's
/// reward, and a strictly monotone re-timing of the whole network must leave
/// the reward vector bit-identical. Applies to the scheme under arrival
/// ordering; anything else is vacuous.
inline PropertyReport check_time_efficiency(const Network& net,
                                            const MechanismConfig& cfg,
                                            int perturbations,
                                            std::uint64_t seed) {
  PropertyReport report{"time_efficiency", Verdict::vacuous, {}, 0,
                        1e-9 * cfg.budget};
  if (cfg.kind != MechanismKind::scheme ||
      cfg.ordering != ChildOrdering::arrival)
    return report;

  RewardVector base = run_mechanism(net, cfg);

  Network retimed = net;
  for (auto& e : retimed.edges) e.t = 2.0 * e.t + 1.0;
  RewardVector retimed_rv = run_mechanism(retimed, cfg);
  ++report.instances_checked;
  for (const auto& [agent, reward] : base.rewards)
    if (retimed_rv.rewards.at(agent) != reward)
      report.violations.push_back({agent,
                                   "monotone re-timing changed the reward",
                                   reward, retimed_rv.rewards.at(agent)});

  std::vector<AgentId> senders;
  for (const AgentId& a : net.agents)
    for (const auto& e : net.edges)
      if (e.from == a) {
        senders.push_back(a);
        break;
      }

  if (!senders.empty()) {
    double t_min = net.edges.front().t, t_max = net.edges.front().t;
    for (const auto& e : net.edges) {
      t_min = std::min(t_min, e.t);
      t_max = std::max(t_max, e.t);
    }
    double span = t_max > t_min ? t_max - t_min : 1.0;

    std::mt19937_64 rng(seed);
    for (int k = 0; k < perturbations; ++k) {
      const AgentId& agent = senders[rng() % senders.size()];
      double delay = (0.001 + 1.999 * detail::unit_interval(rng)) * span;
      Network delayed = net;
      for (auto& e : delayed.edges)
        if (e.from == agent) e.t += delay;
      RewardVector alt = run_mechanism(delayed, cfg);
      double before = base.rewards.at(agent);
      double after = alt.rewards.at(agent);
      ++report.instances_checked;
      if (before < after - report.tolerance) {
        std::ostringstream desc;
        desc << "delayed all outgoing edges by " << delay;
        report.violations.push_back({agent, desc.str(), before, after});
      }
    }
  }

  report.verdict = detail::settle(report.instances_checked, report.violations);
  return report;
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

struct NamedNetwork {
  std::string name;
  Network net;
};

struct SuiteOptions {
  bool strict = false;
  int time_perturbations = 50;
  std::uint64_t seed = 0;
  int enumeration_cap = 12;
};

struct SuiteRow {
  std::string network;
  MechanismKind kind = MechanismKind::scheme;
  std::vector<PropertyReport> reports;
};

struct SuiteReport {
  std::vector<SuiteRow> rows;
};

/// The baselines exist to be refuted; their failures are expected output,
/// not suite failures, unless they are the mechanism under scrutiny.
inline bool is_baseline(MechanismKind k) {
  return k == MechanismKind::fixed_reward || k == MechanismKind::uniform;
}

/// Which properties a mechanism is on the hook for. The baselines carry
/// their naive selling point (a fixed reward "respects" the budget, an even
/// split "treats propagation fairly") precisely so that checking them
/// reports the refutation as a failure.
inline bool property_claimed(MechanismKind kind, std::string_view property) {
  if (property == "feasibility" || property == "ir") return true;
  if (property == "wbb") return true;  // fixed-reward's naive claim
  if (property == "bb")
    return kind == MechanismKind::scheme || kind == MechanismKind::uniform;
  if (property == "pic") return true;  // uniform's naive claim
  if (property == "spic" || property == "time_efficiency")
    return kind == MechanismKind::scheme;
  return false;
}

inline bool row_meets_claims(const SuiteRow& row) {
  for (const PropertyReport& r : row.reports)
    if (r.verdict == Verdict::fail && property_claimed(row.kind, r.property))
      return false;
  return true;
}

inline bool suite_meets_claims(const SuiteReport& suite,
                               bool include_baselines) {
  for (const SuiteRow& row : suite.rows) {
    if (!include_baselines && is_baseline(row.kind)) continue;
    if (!row_meets_claims(row)) return false;
  }
  return true;
}

/// Runs every checker for every (network, mechanism) pair. Deterministic
/// given the seed: rows, reports and violations come out in a fixed order.
inline SuiteReport run_property_suite(const std::vector<NamedNetwork>& nets,
                                      const std::vector<MechanismConfig>& cfgs,
                                      const SuiteOptions& opts = {}) {
  SuiteReport suite;
  for (const NamedNetwork& named : nets) {
    for (const MechanismConfig& cfg : cfgs) {
      SuiteRow row;
      row.network = named.name;
      row.kind = cfg.kind;
      for (PropertyReport& r : check_accounting(named.net, cfg))
        row.reports.push_back(std::move(r));
      PicReports pic = check_pic_detailed(named.net, cfg, opts.strict,
                                          opts.enumeration_cap);
      row.reports.push_back(std::move(pic.weak));
      if (opts.strict) row.reports.push_back(std::move(pic.strict));
      row.reports.push_back(check_time_efficiency(
          named.net, cfg, opts.time_perturbations, opts.seed));
      suite.rows.push_back(std::move(row));
    }
  }
  return suite;
}

}  // namespace propshare

#endif  // PROPSHARE_PROPERTIES_HPP
