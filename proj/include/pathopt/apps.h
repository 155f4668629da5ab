#ifndef PATHOPT_APPS_H
#define PATHOPT_APPS_H

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pathopt/optimization.h"
#include "pathopt/paths.h"

namespace pathopt {
namespace apps {

// A complete application: how to generate and select paths, and which
// templates and objective to install.
struct Recipe {
  std::string name;
  paths::PathPredicate predicate;
  paths::EnumerateOptions enumerate;
  paths::SelectionStrategy strategy = paths::SelectionStrategy::kRandom;
  int select_number = 5;
  // Installs templates and objective on a fresh builder.
  std::function<void(opt::OptBuilder&)> configure;
  // Resource used by re-optimization and reporting ("" if none).
  std::string load_resource;
};

// Allocate flow, route all, bandwidth utilization capped at 1 on every link
// with a finite bandwidth, minimize the largest utilization.
Recipe TrafficEngineering();

// Service chain: waypoint order (fw, ids by default) with two-position mbox
// expansion, bandwidth caps, normalized CPU load at chain nodes, one TCAM
// entry per enabled path and switch, minimize the largest CPU load.
Recipe Simple(std::vector<std::string> chain = {"fw", "ids"});

// Power-aware routing: path/node/edge binaries, activation of every element
// on an enabled path, bandwidth caps, minimize .75 SwitchPower + .25
// LinkPower. Missing power entries default to 1.
Recipe ElasticTree(std::map<net::NodeId, double> switch_power = {},
                   std::map<net::LinkKey, double> link_power = {});

// Elastic middlebox scaling: paths through one mbox, CPU capacity allocated
// by the optimizer, at most budget_fraction * |nodes| enabled nodes,
// minimize the largest CPU load.
Recipe ElasticScaling(double budget_fraction = 0.5);

class RecipeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Builds a recipe by name ("te", "simple", "elastictree",
// "elastic_scaling") with parameters from a JSON object.
Recipe MakeRecipe(std::string_view name, const nlohmann::json& params = nlohmann::json::object());

// CPU consumed by the class at `node` when it is one of the path's mbox
// nodes, divided by the node's cpu capacity when `normalize` is set.
opt::NodeCapFn MboxCpuFn(const net::Topology& topo, bool normalize);

}  // namespace apps
}  // namespace pathopt

#endif
