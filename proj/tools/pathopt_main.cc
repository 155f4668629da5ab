#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "pathopt/cli.h"

namespace cli = pathopt::cli;

int main(int argc, char** argv) {
  CLI::App app{"Path-based network optimization"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<uint64_t> seed;
  std::optional<int> select_number;
  std::optional<std::string> strategy;
  std::optional<double> gap;
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out-dir", out_dir, "artifact directory");
    sub->add_option("--seed", seed, "selection seed");
    sub->add_option("--select-number", select_number, "paths per class")->check(CLI::PositiveNumber);
    sub->add_option("--strategy", strategy, "shortest or random");
    sub->add_option("--gap", gap, "relative MILP gap")->check(CLI::NonNegativeNumber);
  };

  CLI::App* run = app.add_subcommand("run", "solve a configured instance");
  add_common(run);

  CLI::App* reopt = app.add_subcommand("reoptimize", "react to a failure or new traffic");
  add_common(reopt);
  std::optional<int> fail_node;
  std::vector<int> fail_link;
  std::string new_traffic;
  std::string prev_path;
  double churn_weight = 0;
  double theta = cli::kDefaultTheta;
  auto* fn = reopt->add_option("--fail-node", fail_node, "failed node id");
  auto* fl = reopt->add_option("--fail-link", fail_link, "failed link endpoints")->expected(2);
  auto* nt = reopt->add_option("--new-traffic", new_traffic, "replacement traffic file");
  fn->excludes(fl)->excludes(nt);
  fl->excludes(nt);
  reopt->add_option("--prev-solution", prev_path, "solution.json of the previous run")->required();
  reopt->add_option("--churn-weight", churn_weight, "weight of the churn term")
      ->check(CLI::Range(0.0, 1.0));
  reopt->add_option("--theta", theta, "tolerated relative objective loss before reselecting")
      ->check(CLI::NonNegativeNumber);

  CLI::App* bench = app.add_subcommand("bench", "objective and runtime against path count");
  add_common(bench);
  std::vector<int> select_numbers{1, 3, 5, 10};
  std::vector<std::string> strategies{"shortest", "random"};
  int trials = 1;
  bench->add_option("--select-numbers", select_numbers, "paths per class to try");
  bench->add_option("--strategies", strategies, "selection strategies");
  bench->add_option("--trials", trials, "seeds per setting")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    cli::RunConfig config = cli::LoadConfig(config_path);
    if (seed) config.seed = *seed;
    if (select_number) config.select_number = *select_number;
    if (strategy) config.strategy = *strategy;
    if (gap) config.gap = *gap;

    if (*run) return cli::CmdRun(config, out_dir);
    if (*reopt) {
      cli::Event event;
      if (fail_node) {
        event.kind = cli::Event::Kind::kFailNode;
        event.a = *fail_node;
      } else if (!fail_link.empty()) {
        event.kind = cli::Event::Kind::kFailLink;
        event.a = fail_link[0];
        event.b = fail_link[1];
      } else if (!new_traffic.empty()) {
        event.kind = cli::Event::Kind::kNewTraffic;
        try {
          event.traffic = pathopt::net::LoadTrafficFile(new_traffic);
        } catch (const std::exception& e) {
          throw cli::ConfigError(new_traffic + ": " + e.what());
        }
      } else {
        throw cli::ConfigError("reoptimize needs --fail-node, --fail-link or --new-traffic");
      }
      return cli::CmdReoptimize(config, event, prev_path, churn_weight, theta, out_dir);
    }
    return cli::CmdBench(config, select_numbers, strategies, trials, out_dir);
  } catch (const cli::ConfigError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const pathopt::paths::InfeasibleClassError& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}
