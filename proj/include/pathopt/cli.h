#ifndef PATHOPT_CLI_H
#define PATHOPT_CLI_H

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pathopt/apps.h"
#include "pathopt/optimization.h"
#include "pathopt/paths.h"
#include "pathopt/rules.h"
#include "pathopt/solver.h"
#include "pathopt/topology.h"
#include "pathopt/traffic.h"

namespace pathopt {
namespace cli {

// Bad or unreadable input; the CLI exits with status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultTheta = 0.1;

// JSON config. "topology" is a file (.json or .graphml) or
// {"fat_tree": {"k", "capacity"}}; "traffic" is a file or
// {"gravity": {"total", "seed"}} / {"uniform": {"volume"}}. Relative paths
// resolve against the config file's directory.
struct RunConfig {
  nlohmann::json topology;
  nlohmann::json traffic;
  std::string recipe = "te";
  nlohmann::json recipe_params = nlohmann::json::object();
  std::optional<int> select_number;  // recipe default when unset
  std::optional<std::string> strategy;
  uint64_t seed = 1;
  double gap = 1e-4;
  int64_t node_limit = 200000;
  double time_limit = 0;
  std::optional<int> max_len;
  std::optional<int> max_count;
  unsigned threads = 0;
  int split_depth = rules::kDefaultMaxDepth;
  double default_capacity = 1e9;  // GraphML edges without a capacity
  // Bench: skip the all-paths baseline above this many paths.
  size_t baseline_path_limit = 20000;
  std::string base_dir = ".";
};

RunConfig ParseConfig(const nlohmann::json& doc, const std::string& base_dir = ".");
RunConfig LoadConfig(const std::string& path);

net::Topology LoadTopology(const RunConfig& config);
net::TrafficMatrix LoadTraffic(const RunConfig& config, const net::Topology& topo);

// Recipe with the config's selection and enumeration overrides applied.
apps::Recipe ResolveRecipe(const RunConfig& config);

lp::SolverOptions SolverOptionsFor(const RunConfig& config);

struct Timing {
  double build_ms = 0;
  double solve_ms = 0;
};

struct Outcome {
  lp::Solution solution;
  double base_objective = 0;  // objective without the churn term
  lp::Sense sense = lp::Sense::kMinimize;  // of the base objective
  Timing timing;
  opt::SoundnessReport audit;
};

struct ChurnSpec {
  const opt::PrevSolution* prev = nullptr;
  double weight = 0;
};

// Builds the recipe's model over `selected` and solves it.
Outcome SolveSelected(const net::Topology& topo, const net::TrafficMatrix& tm,
                      const apps::Recipe& recipe, const paths::PathSet& selected,
                      const lp::SolverOptions& options, const ChurnSpec& churn = {});

// Text form of the recipe's model over `selected`.
std::string ModelText(const net::Topology& topo, const net::TrafficMatrix& tm,
                      const apps::Recipe& recipe, const paths::PathSet& selected);

struct Prepared {
  net::Topology topo;
  net::TrafficMatrix tm;
  apps::Recipe recipe;
  paths::PathSet all;
  paths::PathSet selected;
  double pathgen_ms = 0;
};

Prepared Prepare(const RunConfig& config);

struct Event {
  enum class Kind { kFailNode, kFailLink, kNewTraffic };
  Kind kind = Kind::kFailNode;
  net::NodeId a = 0;
  net::NodeId b = 0;
  std::optional<net::TrafficMatrix> traffic;
};

// Topology without the failed node (and its links) or without both
// directions of the failed link.
net::Topology ApplyFailure(const net::Topology& topo, const Event& event);

struct ReoptOptions {
  double theta = kDefaultTheta;
  double churn_weight = 0;
  lp::SolverOptions solver;
  paths::SelectionStrategy strategy = paths::SelectionStrategy::kRandom;
  int select_number = 5;
  uint64_t seed = 1;
  unsigned threads = 0;
};

struct ReoptResult {
  net::Topology topo;
  net::TrafficMatrix tm;
  paths::PathSet selected;
  Outcome outcome;
  int step = 1;                  // step that produced the result
  bool step2_triggered = false;
  std::string reason;            // why step 2 ran
  size_t dropped_paths = 0;      // impacted by the event
  double step1_objective = 0;    // NaN when step 1 could not be solved
  double churn = 0;              // max |x - prev| over paths, by identity
};

// Two-step reaction to an event. Step 1 re-solves over the previous
// selection minus impacted paths. Step 2 regenerates and reselects paths
// (keeping the survivors) when a class lost all its paths, step 1 failed,
// or its objective is worse than the previous one by more than theta and
// reselection changes the set. Throws paths::InfeasibleClassError when a
// class still has no path.
ReoptResult Reoptimize(const net::Topology& topo, const net::TrafficMatrix& tm,
                       const apps::Recipe& recipe, const paths::PathSet& prev_selected,
                       const lp::Solution& prev_solution, const Event& event,
                       const ReoptOptions& options);

// Largest |x - x_prev| over the union of both path sets.
double ChurnBetween(const opt::PrevSolution& before, const opt::PrevSolution& after);

struct BenchRow {
  std::string strategy;
  int select_number = 0;
  int trial = 0;
  lp::SolveStatus status = lp::SolveStatus::kOptimal;
  double objective = 0;
  std::optional<double> ratio;
  double build_ms = 0;
  double solve_ms = 0;
};

struct BenchResult {
  std::optional<double> baseline;
  bool baseline_skipped = false;
  std::vector<BenchRow> rows;
};

BenchResult Bench(const RunConfig& config, const std::vector<int>& select_numbers,
                  const std::vector<paths::SelectionStrategy>& strategies, int trials);

std::string BenchCsv(const BenchResult& result);

// Subcommands. Return the process exit status: 0 when the solve is
// optimal, 1 otherwise, 2 on bad input.
int CmdRun(const RunConfig& config, const std::string& out_dir);
int CmdReoptimize(const RunConfig& config, const Event& event,
                  const std::string& prev_solution_path, double churn_weight, double theta,
                  const std::string& out_dir);
int CmdBench(const RunConfig& config, const std::vector<int>& select_numbers,
             const std::vector<std::string>& strategies, int trials,
             const std::string& out_dir);

}  // namespace cli
}  // namespace pathopt

#endif
