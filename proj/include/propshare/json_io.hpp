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

#ifndef PROPSHARE_JSON_IO_HPP
#define PROPSHARE_JSON_IO_HPP

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "propshare/mechanisms.hpp"
#include "propshare/network.hpp"
#include "propshare/properties.hpp"

namespace propshare {

inline std::optional<MechanismKind> parse_mechanism_kind(
    const std::string& s) {
  if (s == "starter") return MechanismKind::starter;
  if (s == "scheme") return MechanismKind::scheme;
  if (s == "fixed") return MechanismKind::fixed_reward;
  if (s == "uniform") return MechanismKind::uniform;
  return std::nullopt;
}

inline std::optional<SplitFunction> parse_split_function(
    const std::string& s) {
  if (s == "identity") return SplitFunction::identity;
  if (s == "shifted") return SplitFunction::shifted;
  if (s == "exp") return SplitFunction::exponential;
  return std::nullopt;
}

inline std::optional<ChildOrdering> parse_child_ordering(
    const std::string& s) {
  if (s == "arrival") return ChildOrdering::arrival;
  if (s == "id") return ChildOrdering::identifier;
  if (s == "random") return ChildOrdering::seeded_random;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Network files
// ---------------------------------------------------------------------------

inline nlohmann::json network_to_json(const Network& net) {
  nlohmann::json j;
  j["sponsor"] = net.sponsor;
  j["agents"] = net.agents;  // std::set serializes sorted
  j["edges"] = nlohmann::json::array();
  for (const auto& e : net.edges)
    j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"t", e.t}});
  return j;
}

/// Parses the network file format. Timestamps are optional; an edge without
/// one gets its list position, so file order doubles as arrival order.
inline Network network_from_json(const nlohmann::json& j) {
  Network net;
  try {
    net.sponsor = j.at("sponsor").get<std::string>();
    for (const auto& a : j.at("agents"))
      net.agents.insert(a.get<std::string>());
    if (j.contains("edges")) {
      for (const auto& ej : j.at("edges")) {
        PropagationEvent e;
        e.from = ej.at("from").get<std::string>();
        e.to = ej.at("to").get<std::string>();
        e.t = ej.contains("t") ? ej.at("t").get<double>()
                               : static_cast<double>(net.edges.size());
        net.edges.push_back(e);
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("malformed network json: ") + ex.what());
  }
  return net;
}

inline Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError("cannot parse '" + path + "': " + ex.what());
  }
  return network_from_json(j);
}

inline void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path + "'");
  out << network_to_json(net).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Reward output
// ---------------------------------------------------------------------------

inline nlohmann::json config_to_json(const MechanismConfig& cfg) {
  nlohmann::json j;
  j["budget"] = cfg.budget;
  switch (cfg.kind) {
    case MechanismKind::starter:
      j["beta"] = cfg.beta;
      j["f"] = to_string(cfg.split);
      break;
    case MechanismKind::scheme:
      j["alpha"] = cfg.alpha;
      j["beta"] = cfg.beta;
      j["ordering"] = to_string(cfg.ordering);
      if (cfg.ordering == ChildOrdering::seeded_random) j["seed"] = cfg.seed;
      break;
    case MechanismKind::fixed_reward:
      j["reward"] = cfg.fixed_reward;
      break;
    case MechanismKind::uniform: break;
  }
  return j;
}

inline nlohmann::json reward_to_json(const RewardVector& rv,
                                     const MechanismConfig& cfg,
                                     bool include_trace) {
  nlohmann::json j;
  j["mechanism"] = to_string(cfg.kind);
  j["config"] = config_to_json(cfg);
  j["rewards"] = nlohmann::json::object();
  for (const auto& [agent, reward] : rv.rewards) j["rewards"][agent] = reward;
  j["sponsor_remainder"] = rv.sponsor_remainder;
  j["layers"] = nlohmann::json::array();
  for (const auto& account : rv.layers) {
    nlohmann::json lj;
    lj["layer"] = account.layer;
    lj["incoming"] = account.incoming;
    lj["retained"] = account.retained;
    lj["passed_down"] = account.passed_down;
    lj["entries"] = nlohmann::json::object();
    for (const auto& [agent, stake] : account.entries)
      lj["entries"][agent] = stake;
    j["layers"].push_back(lj);
  }
  if (include_trace) {
    j["trace"] = nlohmann::json::array();
    for (const auto& rec : rv.trace)
      j["trace"].push_back({{"event", "transfer"},
                            {"child", rec.child},
                            {"parent", rec.parent},
                            {"payer", rec.payer},
                            {"parent_gain", rec.parent_gain},
                            {"child_gain", rec.child_gain},
                            {"payer_loss", rec.payer_loss}});
  }
  return j;
}

// ---------------------------------------------------------------------------
// Property reports
// ---------------------------------------------------------------------------

inline nlohmann::json report_to_json(const PropertyReport& report) {
  nlohmann::json j;
  j["property"] = report.property;
  j["verdict"] = to_string(report.verdict);
  j["instances_checked"] = report.instances_checked;
  j["tolerance"] = report.tolerance;
  j["violations"] = nlohmann::json::array();
  for (const auto& v : report.violations)
    j["violations"].push_back({{"agent", v.agent},
                               {"description", v.description},
                               {"reward_before", v.reward_before},
                               {"reward_after", v.reward_after}});
  return j;
}

/// One JSON line per (network, mechanism, property).
inline std::string suite_to_jsonl(const SuiteReport& suite) {
  std::ostringstream out;
  for (const SuiteRow& row : suite.rows) {
    for (const PropertyReport& report : row.reports) {
      nlohmann::json j = report_to_json(report);
      j["network"] = row.network;
      j["mechanism"] = to_string(row.kind);
      out << j.dump() << "\n";
    }
  }
  return out.str();
}

}  // namespace propshare

#endif  // PROPSHARE_JSON_IO_HPP
