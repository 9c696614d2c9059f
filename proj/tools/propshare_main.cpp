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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "propshare/generators.hpp"
#include "propshare/json_io.hpp"
#include "propshare/mechanisms.hpp"
#include "propshare/network.hpp"
#include "propshare/properties.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPropertyFailure = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
  std::vector<std::string> inputs;
  std::string output;
  std::string mechanism;
  double alpha = 0.2;
  double beta = 0.2;
  double budget = 1.0;
  std::string split = "shifted";
  std::string ordering = "arrival";
  std::uint64_t seed = 0;
  double fixed_reward = 1.0;
  bool strict = false;
  bool trace = false;
  int perturbations = 50;
};

struct GenFlags {
  std::string fixture;
  std::string family;
  std::string output;
  int length = 0;
  int width = 0;
  int tail = 0;
  int leaves = 0;
  std::vector<int> widths;
  int max_out_degree = 4;
  std::uint64_t seed = 0;
};

void add_mechanism_flags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--mechanism", flags->mechanism,
                  "Mechanism: starter|scheme|fixed|uniform");
  cmd->add_option("--alpha", flags->alpha, "Division factor in (0,1)");
  cmd->add_option("--beta", flags->beta, "Discount factor in (0,1)");
  cmd->add_option("--budget", flags->budget, "Sponsor budget, positive");
  cmd->add_option("--f", flags->split,
                  "Starter split weight: identity|shifted|exp");
  cmd->add_option("--ordering", flags->ordering,
                  "Child processing order: arrival|id|random");
  cmd->add_option("--seed", flags->seed, "Seed for random ordering/checks");
  cmd->add_option("--reward", flags->fixed_reward,
                  "Per-agent amount for the fixed mechanism");
}

propshare::MechanismConfig build_config(const CommonFlags& flags,
                                        propshare::MechanismKind kind) {
  propshare::MechanismConfig cfg;
  cfg.kind = kind;
  cfg.alpha = flags.alpha;
  cfg.beta = flags.beta;
  cfg.budget = flags.budget;
  cfg.seed = flags.seed;
  cfg.fixed_reward = flags.fixed_reward;

  auto split = propshare::parse_split_function(flags.split);
  if (!split)
    throw propshare::ConfigError("unknown split function '" + flags.split +
                                 "'");
  cfg.split = *split;

  auto ordering = propshare::parse_child_ordering(flags.ordering);
  if (!ordering)
    throw propshare::ConfigError("unknown ordering '" + flags.ordering + "'");
  cfg.ordering = *ordering;

  cfg.validate();
  return cfg;
}

propshare::MechanismKind parse_kind_or_throw(const std::string& name) {
  auto kind = propshare::parse_mechanism_kind(name);
  if (!kind)
    throw propshare::ConfigError("unknown mechanism '" + name + "'");
  return *kind;
}

// Validation failures are usage errors: report every message and bail.
bool report_validation(const propshare::Network& net,
                       propshare::MechanismKind kind,
                       const std::string& label) {
  propshare::ValidationReport report = propshare::validate_network(net, kind);
  for (const std::string& w : report.warnings)
    std::cerr << label << ": warning: " << w << "\n";
  for (const auto& e : report.errors)
    std::cerr << label << ": error: " << e.detail << "\n";
  return report.ok();
}

void write_text(const std::string& output, const std::string& text) {
  if (output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(output);
  if (!out) throw propshare::ParseError("cannot write '" + output + "'");
  out << text;
}

int cmd_run(const CommonFlags& flags) {
  if (flags.inputs.size() != 1) {
    std::cerr << "run: exactly one --input network file is required\n";
    return kExitUsage;
  }
  propshare::MechanismKind kind = parse_kind_or_throw(
      flags.mechanism.empty() ? "scheme" : flags.mechanism);
  propshare::MechanismConfig cfg = build_config(flags, kind);
  propshare::Network net = propshare::load_network(flags.inputs.front());
  if (!report_validation(net, kind, flags.inputs.front())) return kExitUsage;

  propshare::RewardVector rv = propshare::run_mechanism(net, cfg);
  nlohmann::json j = propshare::reward_to_json(rv, cfg, flags.trace);
  write_text(flags.output, j.dump(2) + "\n");
  return kExitOk;
}

int cmd_check(const CommonFlags& flags) {
  std::vector<propshare::NamedNetwork> nets;
  bool explicit_mechanism = !flags.mechanism.empty();

  std::vector<propshare::MechanismConfig> cfgs;
  if (explicit_mechanism) {
    cfgs.push_back(build_config(flags, parse_kind_or_throw(flags.mechanism)));
  } else {
    for (propshare::MechanismKind kind :
         {propshare::MechanismKind::starter, propshare::MechanismKind::scheme,
          propshare::MechanismKind::fixed_reward,
          propshare::MechanismKind::uniform})
      cfgs.push_back(build_config(flags, kind));
  }

  for (const std::string& path : flags.inputs) {
    propshare::Network net = propshare::load_network(path);
    for (const propshare::MechanismConfig& cfg : cfgs)
      if (!report_validation(net, cfg.kind, path)) return kExitUsage;
    nets.push_back({std::filesystem::path(path).stem().string(), net});
  }

  propshare::SuiteOptions opts;
  opts.strict = flags.strict;
  opts.seed = flags.seed;
  opts.time_perturbations = flags.perturbations;
  propshare::SuiteReport suite = propshare::run_property_suite(nets, cfgs, opts);
  write_text(flags.output, propshare::suite_to_jsonl(suite));

  // With an explicitly chosen mechanism its own claims are the yardstick;
  // the default battery treats baseline failures as expected exhibits.
  bool ok = propshare::suite_meets_claims(suite, explicit_mechanism);
  return ok ? kExitOk : kExitPropertyFailure;
}

int cmd_gen(const GenFlags& flags) {
  if (flags.fixture.empty() == flags.family.empty()) {
    std::cerr << "gen: exactly one of --fixture or --family is required\n";
    return kExitUsage;
  }
  propshare::Network net;
  std::string default_name;
  if (!flags.fixture.empty()) {
    net = propshare::bundled_fixture(flags.fixture);
    default_name = flags.fixture + ".json";
  } else {
    propshare::GraphFamily family;
    family.family = flags.family;
    family.length = flags.length;
    family.width = flags.width;
    family.tail = flags.tail;
    family.leaves = flags.leaves;
    family.widths = flags.widths;
    family.max_out_degree = flags.max_out_degree;
    family.seed = flags.seed;
    net = propshare::gen_graph(family);
    default_name = flags.family + ".json";
  }
  std::string path = flags.output.empty() ? default_name : flags.output;
  propshare::save_network(net, path);
  return kExitOk;
}

int cmd_fixtures(const std::string& output_dir) {
  for (const std::string& name : propshare::fixture_names()) {
    propshare::Network net = propshare::bundled_fixture(name);
    propshare::Layering lay = propshare::compute_layering(net);
    std::cout << name << ": " << net.agents.size() << " agents, "
              << net.edges.size() << " edges, layers";
    for (int l = 1; l <= lay.layer_count(); ++l)
      std::cout << (l == 1 ? " " : "/") << lay.layer(l).size();
    std::cout << "\n";
    if (!output_dir.empty()) {
      std::filesystem::create_directories(output_dir);
      propshare::save_network(
          net, (std::filesystem::path(output_dir) / (name + ".json"))
                   .string());
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "propshare: budget-constrained propagation reward mechanisms and "
      "their property checks"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "Compute rewards for a network");
  run->add_option("--input", run_flags.inputs, "Network JSON file")
      ->required();
  run->add_option("--output", run_flags.output,
                  "Reward JSON destination (stdout when omitted)");
  run->add_flag("--trace", run_flags.trace,
                "Include the full transfer log in the output");
  add_mechanism_flags(run, &run_flags);

  CommonFlags check_flags;
  CLI::App* check =
      app.add_subcommand("check", "Certify or refute mechanism properties");
  check->add_option("--input", check_flags.inputs,
                    "Network JSON file(s)");
  check->add_option("--output", check_flags.output,
                    "JSON-lines report destination (stdout when omitted)");
  check->add_flag("--strict", check_flags.strict,
                  "Also require strict gains where hiding changes the "
                  "kept structure");
  check->add_option("--perturbations", check_flags.perturbations,
                    "Delay perturbations for the time-efficiency check");
  add_mechanism_flags(check, &check_flags);

  GenFlags gen_flags;
  CLI::App* gen = app.add_subcommand("gen", "Write a network file");
  gen->add_option("--fixture", gen_flags.fixture,
                  "Bundled network: example1|example2|figure3");
  gen->add_option("--family", gen_flags.family,
                  "Generated family: chain|star|layered-random|"
                  "single-chain-tail");
  gen->add_option("--output", gen_flags.output, "Destination path");
  gen->add_option("--length", gen_flags.length, "chain: agents in the chain");
  gen->add_option("--width", gen_flags.width,
                  "star: spokes; single-chain-tail: anchor parents");
  gen->add_option("--tail", gen_flags.tail,
                  "single-chain-tail: singleton layers below the anchor");
  gen->add_option("--leaves", gen_flags.leaves,
                  "single-chain-tail: extra non-propagating first-layer "
                  "agents");
  gen->add_option("--widths", gen_flags.widths,
                  "layered-random: comma-separated layer widths")
      ->delimiter(',');
  gen->add_option("--max-out-degree", gen_flags.max_out_degree,
                  "layered-random: per-agent out-edge cap");
  gen->add_option("--seed", gen_flags.seed, "Generation seed");

  std::string fixtures_output;
  CLI::App* fixtures =
      app.add_subcommand("fixtures", "List the bundled networks");
  fixtures->add_option("--output", fixtures_output,
                       "Directory to write every fixture into");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(run_flags);
    if (check->parsed()) return cmd_check(check_flags);
    if (gen->parsed()) return cmd_gen(gen_flags);
    if (fixtures->parsed()) return cmd_fixtures(fixtures_output);
  } catch (const propshare::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
