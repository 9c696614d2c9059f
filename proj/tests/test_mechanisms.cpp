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

#include <catch_amalgamated.hpp>

#include <cmath>

#include "propshare/generators.hpp"
#include "propshare/mechanisms.hpp"
#include "propshare/network.hpp"
#include "test_support.hpp"

using namespace propshare;
using Catch::Approx;

namespace {

double ledger_sum(const LedgerMap& ledger) {
  double sum = 0.0;
  for (const auto& [id, led] : ledger) sum += led.total();
  return sum;
}

// Walks the scheme layer by layer, handing each (layer, before, after,
// records) snapshot to the callback.
template <typename Callback>
RewardVector stepwise_scheme(const Network& net, const SchemeConfig& cfg,
                             Callback&& on_layer) {
  Layering lay = compute_layering(net);
  LedgerMap ledger = make_initial_ledger(lay, cfg.budget);
  for (int l = 1; l <= lay.layer_count(); ++l) {
    LedgerMap before = ledger;
    std::vector<TransferRecord> records =
        lay.layer(l).size() >= 2
            ? distribute_adjacent_layers(ledger, lay, l, cfg)
            : distribute_single_agent_layer(ledger, lay, lay.layer(l).front(),
                                            cfg);
    on_layer(lay, l, before, ledger, records);
  }
  RewardVector out;
  for (const AgentId& a : net.agents) out.rewards[a] = 0.0;
  for (const auto& [id, led] : ledger) out.rewards[id] = led.total();
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Starter mechanism
// ---------------------------------------------------------------------------

TEST_CASE("starter layer budgets decay geometrically") {
  StarterConfig cfg{0.5, SplitFunction::identity, 10.0};
  CHECK(starter_layer_budget(1, cfg) == Approx(5.0));
  CHECK(starter_layer_budget(2, cfg) == Approx(2.5));

  StarterConfig other{0.3, SplitFunction::shifted, 7.0};
  double series = 0.0;
  for (int l = 1; l <= 200; ++l) {
    series += starter_layer_budget(l, other);
    if (l > 1)
      CHECK(starter_layer_budget(l, other) /
                starter_layer_budget(l - 1, other) ==
            Approx(other.beta));
  }
  CHECK(series == Approx(other.budget));
}

TEST_CASE("starter on example1 reproduces the published split") {
  RewardVector rv = run_starter(bundled_fixture("example1"),
                                {0.5, SplitFunction::identity, 10.0});
  CHECK(rv.rewards.at("A") == Approx(2.0).margin(1e-12));
  CHECK(rv.rewards.at("B") == Approx(3.0).margin(1e-12));
  CHECK(rv.rewards.at("C") == Approx(2.5).margin(1e-12));
  CHECK(rv.rewards.at("D") == 0.0);
  CHECK(rv.rewards.at("F") == 0.0);
  CHECK(rv.rewards.at("I") == 0.0);
  // Geometric tail (1.25) plus the reverted terminal layer (1.25).
  CHECK(rv.sponsor_remainder == Approx(2.5).margin(1e-12));
  CHECK(rv.total() == Approx(10.0));

  REQUIRE(rv.layers.size() == 3);
  CHECK(rv.layers[2].incoming == Approx(1.25));
  CHECK(rv.layers[2].retained == 0.0);  // reverted to the sponsor
}

TEST_CASE("starter on a chain with the shifted split") {
  Network net = support::net_of({{"S", "A"}, {"A", "B"}});
  RewardVector rv = run_starter(net, {0.5, SplitFunction::shifted, 8.0});
  CHECK(rv.rewards.at("A") == Approx(4.0));
  CHECK(rv.rewards.at("B") == Approx(2.0));
  CHECK(rv.sponsor_remainder == Approx(2.0));
}

TEST_CASE("a zero-weight layer reverts its budget to the sponsor") {
  Network net = support::net_of({{"S", "A"}, {"S", "B"}});
  RewardVector rv = run_starter(net, {0.5, SplitFunction::identity, 10.0});
  CHECK(rv.rewards.at("A") == 0.0);
  CHECK(rv.rewards.at("B") == 0.0);
  CHECK(rv.sponsor_remainder == Approx(10.0));
}

TEST_CASE("starter matches the direct formula oracle") {
  for (const Network& net : support::mixed_corpus(24, 31)) {
    for (SplitFunction f : {SplitFunction::identity, SplitFunction::shifted,
                            SplitFunction::exponential}) {
      StarterConfig cfg{0.4, f, 12.0};
      RewardVector rv = run_starter(net, cfg);
      std::map<AgentId, double> oracle = support::starter_formula(net, cfg);
      REQUIRE(rv.rewards.size() == oracle.size());
      for (const auto& [agent, reward] : oracle)
        CHECK(rv.rewards.at(agent) == Approx(reward).margin(1e-9 * cfg.budget));
    }
  }
}

TEST_CASE("starter remainder is the geometric tail when no layer reverts") {
  for (const Network& net : support::mixed_corpus(16, 77)) {
    StarterConfig cfg{0.2, SplitFunction::shifted, 50.0};
    RewardVector rv = run_starter(net, cfg);
    int l_max = compute_layering(net).layer_count();
    CHECK(rv.sponsor_remainder ==
          Approx(std::pow(cfg.beta, l_max) * cfg.budget)
              .margin(1e-9 * cfg.budget));
  }
}

// ---------------------------------------------------------------------------
// Scheme: worked ledgers
// ---------------------------------------------------------------------------

TEST_CASE("scheme on example2 reproduces the worked ledger") {
  SchemeConfig cfg{0.2, 0.2, 30.0};
  RewardVector rv = run_scheme(bundled_fixture("example2"), cfg);

  CHECK(rv.rewards.at("A") == Approx(8.8).margin(1e-9));
  CHECK(rv.rewards.at("B") == Approx(8.72).margin(1e-9));
  CHECK(rv.rewards.at("C") == Approx(6.4).margin(1e-9));
  CHECK(rv.rewards.at("D") == Approx(3.2).margin(1e-9));
  CHECK(rv.rewards.at("E") == Approx(2.88).margin(1e-9));
  CHECK(rv.sponsor_remainder == 0.0);
  CHECK(rv.total() == Approx(30.0).margin(1e-9 * 30.0));

  REQUIRE(rv.layers.size() == 2);
  CHECK(rv.layers[0].incoming == Approx(30.0));
  CHECK(rv.layers[0].retained == Approx(23.92).margin(1e-9));
  CHECK(rv.layers[0].passed_down == Approx(6.08).margin(1e-9));
  CHECK(rv.layers[1].incoming == Approx(6.08).margin(1e-9));
  CHECK(rv.layers[1].passed_down == 0.0);
  for (const LayerAccount& account : rv.layers) {
    CHECK(account.retained <= account.incoming + 1e-12);
    CHECK(account.incoming ==
          Approx(account.retained + account.passed_down).margin(1e-9 * 30.0));
  }

  REQUIRE(rv.trace.size() == 4);
  const TransferRecord& first = rv.trace[0];
  CHECK(first.child == "D");
  CHECK(first.parent == "A");
  CHECK(first.payer == "B");
  CHECK(first.parent_gain == Approx(0.4));
  CHECK(first.child_gain == Approx(1.6));
  CHECK(rv.trace[1].payer == "C");
  const TransferRecord& third = rv.trace[2];
  CHECK(third.child == "E");
  CHECK(third.parent == "B");
  CHECK(third.payer == "A");
  CHECK(third.parent_gain == Approx(0.4));
  const TransferRecord& fourth = rv.trace[3];
  CHECK(fourth.payer == "C");
  CHECK(fourth.parent_gain == Approx(0.32));
  CHECK(fourth.child_gain == Approx(1.28));
}

TEST_CASE("scheme without propagation splits the stake evenly") {
  Network net = support::net_of({{"S", "A"}, {"S", "B"}});
  RewardVector rv = run_scheme(net, {0.37, 0.61, 10.0});
  CHECK(rv.rewards.at("A") == 5.0);
  CHECK(rv.rewards.at("B") == 5.0);
  CHECK(rv.sponsor_remainder == 0.0);
  CHECK(rv.trace.empty());
}

TEST_CASE("scheme on figure3 walks both distribution variants") {
  SchemeConfig cfg{0.2, 0.2, 30.0};
  Network net = bundled_fixture("figure3");

  int seen_layers = 0;
  stepwise_scheme(net, cfg,
                  [&](const Layering& lay, int l, const LedgerMap& before,
                      const LedgerMap& after,
                      const std::vector<TransferRecord>& records) {
                    ++seen_layers;
                    if (l == 1) {
                      CHECK(after.at("C").base == Approx(8.64).margin(1e-9));
                      for (const char* id : {"A", "B", "D"})
                        CHECK(after.at(id).base == Approx(6.4).margin(1e-9));
                      CHECK(after.at("A").bonus == Approx(0.8).margin(1e-9));
                      CHECK(after.at("B").bonus == Approx(0.72).margin(1e-9));
                      CHECK(after.at("D").bonus == Approx(0.64).margin(1e-9));
                    } else if (l == 2) {
                      CHECK(after.at("C").bonus == Approx(0.128).margin(1e-9));
                      CHECK(after.at("E").base == Approx(0.512).margin(1e-9));
                      double taxed = 6.4 - 6.4 * (0.2 / 6.0);
                      for (const char* id : {"A", "B", "D"})
                        CHECK(after.at(id).base ==
                              Approx(taxed).margin(1e-9));
                    } else {
                      // Terminal singleton layer: nothing to do.
                      CHECK(records.empty());
                      CHECK(before.at("E").base == after.at("E").base);
                    }
                  });
  CHECK(seen_layers == 3);

  RewardVector rv = run_scheme(net, cfg);
  double parent_base = 6.4 - 6.4 * (0.2 / 6.0);
  CHECK(rv.rewards.at("A") == Approx(parent_base + 0.8).margin(1e-9));
  CHECK(rv.rewards.at("B") == Approx(parent_base + 0.72).margin(1e-9));
  CHECK(rv.rewards.at("D") == Approx(parent_base + 0.64).margin(1e-9));
  CHECK(rv.rewards.at("C") == Approx(8.768).margin(1e-9));
  CHECK(rv.rewards.at("E") == Approx(0.512).margin(1e-9));
  CHECK(rv.total() == Approx(30.0).margin(1e-9 * 30.0));
}

TEST_CASE("leaf taxation pays a single-agent layer") {
  Network net =
      support::net_of({{"S", "P"}, {"S", "Q"}, {"P", "C"}, {"C", "E"}});
  RewardVector rv = run_scheme(net, {0.2, 0.2, 10.0});
  CHECK(rv.rewards.at("P") == Approx(5.2).margin(1e-9));
  CHECK(rv.rewards.at("Q") == Approx(3.2).margin(1e-9));
  CHECK(rv.rewards.at("C") == Approx(0.96).margin(1e-9));
  CHECK(rv.rewards.at("E") == Approx(0.64).margin(1e-9));
  CHECK(rv.total() == Approx(10.0).margin(1e-9 * 10.0));
}

TEST_CASE("adjacent-layer distribution, one child") {
  Network net = support::net_of({{"S", "P"}, {"S", "Q"}, {"P", "X"}});
  Layering lay = compute_layering(net);
  LedgerMap ledger = make_initial_ledger(lay, 10.0);
  SchemeConfig cfg{0.2, 0.2, 10.0};

  std::vector<TransferRecord> records =
      distribute_adjacent_layers(ledger, lay, 1, cfg);
  REQUIRE(records.size() == 1);
  CHECK(ledger.at("P").bonus == Approx(0.2));
  CHECK(ledger.at("X").base == Approx(0.8));
  CHECK(ledger.at("Q").base == Approx(4.0));
}

TEST_CASE("a layer without children moves nothing") {
  Network net = support::net_of({{"S", "A"}, {"S", "B"}});
  Layering lay = compute_layering(net);
  LedgerMap ledger = make_initial_ledger(lay, 6.0);
  LedgerMap before = ledger;
  CHECK(distribute_adjacent_layers(ledger, lay, 1, SchemeConfig{}).empty());
  CHECK(ledger == before);
}

TEST_CASE("single-agent distribution rejects multi-agent layers") {
  Network net = bundled_fixture("example2");
  Layering lay = compute_layering(net);
  LedgerMap ledger = make_initial_ledger(lay, 30.0);
  CHECK_THROWS_AS(
      distribute_single_agent_layer(ledger, lay, "D", SchemeConfig{}),
      NotSingleAgentLayerError);
}

TEST_CASE("the scheme requires two first-layer agents") {
  Network net = support::net_of({{"S", "A"}, {"A", "B"}});
  CHECK_THROWS_AS(run_scheme(net, SchemeConfig{}), FirstLayerError);
  CHECK_THROWS_AS(make_initial_ledger(compute_layering(net), 5.0),
                  FirstLayerError);
}

TEST_CASE("configs are range-checked") {
  CHECK_THROWS_AS((SchemeConfig{0.0, 0.2, 1.0}).validate(), ConfigError);
  CHECK_THROWS_AS((SchemeConfig{0.2, 1.0, 1.0}).validate(), ConfigError);
  CHECK_THROWS_AS((SchemeConfig{0.2, 0.2, 0.0}).validate(), ConfigError);
  CHECK_THROWS_AS((StarterConfig{1.0, SplitFunction::identity, 1.0}).validate(),
                  ConfigError);
}

// ---------------------------------------------------------------------------
// Layer totals
// ---------------------------------------------------------------------------

TEST_CASE("layer totals: closed form equals the measured ledger") {
  SchemeConfig cfg{0.2, 0.2, 30.0};
  stepwise_scheme(bundled_fixture("example2"), cfg,
                  [&](const Layering& lay, int l, const LedgerMap& before,
                      const LedgerMap& after,
                      const std::vector<TransferRecord>&) {
                    LayerTotals totals =
                        scheme_layer_total(lay, l, before, after, cfg);
                    if (l == 1) {
                      CHECK(totals.retained == Approx(23.92).margin(1e-9));
                      CHECK(totals.passed_down == Approx(6.08).margin(1e-9));
                    }
                    CHECK(totals.measured_retained ==
                          Approx(totals.retained).margin(1e-9 * cfg.budget));
                    CHECK(totals.measured_passed_down ==
                          Approx(totals.passed_down)
                              .margin(1e-9 * cfg.budget));
                  });
}

TEST_CASE("layer totals without propagation retain everything") {
  Network net = support::net_of({{"S", "A"}, {"S", "B"}});
  Layering lay = compute_layering(net);
  LedgerMap ledger = make_initial_ledger(lay, 10.0);
  SchemeConfig cfg{0.3, 0.6, 10.0};
  LayerTotals totals = scheme_layer_total(lay, 1, ledger, ledger, cfg);
  CHECK(totals.retained == Approx(10.0));
  CHECK(totals.passed_down == Approx(0.0).margin(1e-12));
}

TEST_CASE("layer totals approach beta*stake as alpha approaches one") {
  Network net = bundled_fixture("example2");
  Layering lay = compute_layering(net);
  LedgerMap ledger = make_initial_ledger(lay, 30.0);
  SchemeConfig cfg{1.0 - 1e-12, 0.2, 30.0};
  LayerTotals totals = scheme_layer_total(lay, 1, ledger, ledger, cfg);
  CHECK(totals.retained == Approx(0.2 * 30.0).margin(1e-6));
}

// ---------------------------------------------------------------------------
// Scheme invariants
// ---------------------------------------------------------------------------

TEST_CASE("conservation holds after every single transfer") {
  std::vector<Network> nets = support::small_corpus(20, 5);
  nets.push_back(bundled_fixture("example2"));
  nets.push_back(bundled_fixture("figure3"));
  for (const Network& net : nets) {
    SchemeConfig cfg{0.3, 0.4, 20.0};
    RewardVector rv = run_scheme(net, cfg);
    Layering lay = compute_layering(net);
    LedgerMap replay = make_initial_ledger(lay, cfg.budget);
    CHECK(ledger_sum(replay) == Approx(cfg.budget).margin(1e-9 * cfg.budget));
    for (const TransferRecord& rec : rv.trace) {
      replay.at(rec.payer).base -= rec.payer_loss;
      replay.at(rec.parent).bonus += rec.parent_gain;
      replay.at(rec.child).base += rec.child_gain;
      CHECK(ledger_sum(replay) ==
            Approx(cfg.budget).margin(1e-9 * cfg.budget));
    }
    for (const auto& [agent, led] : replay)
      CHECK(rv.rewards.at(agent) == Approx(led.total()).margin(1e-12));
  }
}

TEST_CASE("every transfer splits payer loss as beta to one minus beta") {
  for (const Network& net : support::small_corpus(15, 23)) {
    SchemeConfig cfg{0.25, 0.7, 12.0};
    RewardVector rv = run_scheme(net, cfg);
    for (const TransferRecord& rec : rv.trace) {
      CHECK(rec.parent_gain * (1.0 - cfg.beta) ==
            Approx(rec.child_gain * cfg.beta).margin(1e-12 * cfg.budget));
      CHECK(rec.payer_loss == rec.parent_gain + rec.child_gain);
    }
  }
}

TEST_CASE("multi-agent layers end at the closed-form base") {
  for (const Network& net : support::small_corpus(20, 41)) {
    SchemeConfig cfg{0.35, 0.55, 9.0};
    stepwise_scheme(net, cfg,
                    [&](const Layering& lay, int l, const LedgerMap& before,
                        const LedgerMap& after,
                        const std::vector<TransferRecord>&) {
                      if (lay.layer(l).size() < 2) return;
                      for (const AgentId& agent : lay.layer(l)) {
                        double expected =
                            std::pow(1.0 - cfg.alpha,
                                     lay.co_layer_informed_count(agent)) *
                            before.at(agent).base;
                        CHECK(after.at(agent).base ==
                              Approx(expected).margin(1e-9 * cfg.budget));
                      }
                    });
  }
}

// Reordering the children of a layer moves individual stakes and bonuses
// around but cannot move the layer's totals, as long as the layer starts
// from the same incoming stakes. (Upstream reordering redistributes the
// incoming stakes themselves, so the comparison is per layer.)
TEST_CASE("layer totals are invariant under child processing order") {
  for (const char* fixture : {"example1", "example2", "figure3"}) {
    Network net = bundled_fixture(fixture);
    Layering lay = compute_layering(net);
    SchemeConfig arrival_cfg{0.2, 0.2, 30.0, ChildOrdering::arrival, 0};

    std::map<int, LedgerMap> entry_state;
    std::map<int, LayerTotals> reference;
    stepwise_scheme(net, arrival_cfg,
                    [&](const Layering& layering, int l,
                        const LedgerMap& before, const LedgerMap& after,
                        const std::vector<TransferRecord>&) {
                      entry_state[l] = before;
                      reference[l] = scheme_layer_total(layering, l, before,
                                                        after, arrival_cfg);
                    });

    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      SchemeConfig cfg{0.2, 0.2, 30.0, ChildOrdering::seeded_random, seed};
      for (const auto& [l, before] : entry_state) {
        if (lay.layer(l).size() < 2) continue;
        LedgerMap ledger = before;
        distribute_adjacent_layers(ledger, lay, l, cfg);
        LayerTotals totals = scheme_layer_total(lay, l, before, ledger, cfg);
        CHECK(totals.measured_retained ==
              Approx(reference[l].retained).margin(1e-9 * cfg.budget));
        CHECK(totals.measured_passed_down ==
              Approx(reference[l].passed_down).margin(1e-9 * cfg.budget));
      }
    }
  }
}

TEST_CASE("rewards depend on timestamps only through their order") {
  std::vector<Network> nets = support::small_corpus(10, 67);
  nets.push_back(bundled_fixture("example2"));
  for (const Network& net : nets) {
    SchemeConfig cfg{0.2, 0.2, 30.0};
    RewardVector reference = run_scheme(net, cfg);
    for (double scale : {2.0, 10.0}) {
      Network retimed = net;
      for (auto& e : retimed.edges) e.t = scale * e.t + 3.0;
      RewardVector rv = run_scheme(retimed, cfg);
      CHECK(rv.rewards == reference.rewards);  // bit-identical
    }
  }
}

TEST_CASE("scheme is budget balanced and individually rational") {
  for (const Network& net : support::mixed_corpus(40, 11)) {
    for (double alpha : {0.1, 0.8}) {
      for (double beta : {0.1, 0.8}) {
        SchemeConfig cfg{alpha, beta, 25.0};
        RewardVector rv = run_scheme(net, cfg);
        CHECK(rv.sponsor_remainder == 0.0);
        CHECK(rv.total() == Approx(cfg.budget).margin(1e-9 * cfg.budget));
        for (const auto& [agent, reward] : rv.rewards) CHECK(reward >= 0.0);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

TEST_CASE("fixed reward overruns the budget once enough agents join") {
  GraphFamily star{.family = "star", .width = 4};
  RewardVector rv = baseline_fixed_reward(gen_graph(star), 3.0, 10.0);
  CHECK(rv.sponsor_remainder == Approx(-2.0));
  CHECK(rv.total() == Approx(10.0));

  Network empty;
  empty.sponsor = "S";
  CHECK(baseline_fixed_reward(empty, 3.0, 10.0).sponsor_remainder ==
        Approx(10.0));
}

TEST_CASE("uniform split divides the budget evenly") {
  GraphFamily star{.family = "star", .width = 5};
  RewardVector rv = baseline_uniform(gen_graph(star), 10.0);
  for (const auto& [agent, reward] : rv.rewards) CHECK(reward == Approx(2.0));
  CHECK(rv.sponsor_remainder == 0.0);

  Network empty;
  empty.sponsor = "S";
  CHECK_THROWS_AS(baseline_uniform(empty, 10.0), EmptyNetworkError);
}

TEST_CASE("unreachable agents are dropped from every mechanism") {
  Network net = bundled_fixture("example2");
  net.agents.insert("Z");

  MechanismConfig cfg;
  cfg.budget = 30.0;
  for (MechanismKind kind :
       {MechanismKind::starter, MechanismKind::scheme,
        MechanismKind::fixed_reward, MechanismKind::uniform}) {
    cfg.kind = kind;
    cfg.alpha = cfg.beta = 0.2;
    RewardVector rv = run_mechanism(net, cfg);
    CHECK(rv.rewards.at("Z") == 0.0);
  }
  cfg.kind = MechanismKind::uniform;
  CHECK(run_mechanism(net, cfg).rewards.at("A") == Approx(6.0));
}
