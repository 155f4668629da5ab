#include "pathopt/apps.h"

#include <algorithm>
#include <cmath>

namespace pathopt {
namespace apps {

using net::NodeId;
using opt::BinaryKind;
using opt::OptBuilder;

namespace {

constexpr const char* kBandwidth = "bandwidth";
constexpr const char* kCpu = "cpu";
constexpr const char* kTcam = "tcam";

opt::LinkCaps FiniteLinkCaps(const net::Topology& topo, double fixed = -1) {
  opt::LinkCaps caps;
  for (const net::Link& l : topo.links()) {
    const net::Capacity cap = l.Resource(kBandwidth);
    if (cap.tba() || cap.unbounded()) continue;
    caps[l.key()] = fixed >= 0 ? fixed : cap.value();
  }
  return caps;
}

std::vector<net::ClassId> ActiveClasses(const net::TrafficMatrix& tm) {
  std::vector<net::ClassId> out;
  for (const net::TrafficClass& tc : tm.classes()) {
    if (tc.vol_bytes > 0 || tc.vol_flows > 0) out.push_back(tc.id);
  }
  return out;
}

paths::EnumerateOptions Limits(int chain_len) {
  paths::EnumerateOptions o;
  o.max_len = 10;
  o.max_count = 1000;
  o.chain_len = chain_len;
  return o;
}

}  // namespace

opt::NodeCapFn MboxCpuFn(const net::Topology& topo, bool normalize) {
  return [&topo, normalize](NodeId v, const net::TrafficClass& tc,
                            const paths::AnnotatedPath& p, std::string_view) {
    if (!p.UsesMbox(v)) return 0.0;
    const double load = tc.vol_flows * tc.cpu_cost;
    if (!normalize) return load;
    const net::Capacity cap = topo.GetNode(v).Resource(kCpu);
    if (cap.tba() || cap.unbounded() || cap.value() <= 0) {
      throw opt::BuildError("node " + std::to_string(v) + " has no cpu capacity");
    }
    return load / cap.value();
  };
}

Recipe TrafficEngineering() {
  Recipe r;
  r.name = "te";
  r.predicate = paths::NullPredicate();
  r.enumerate = Limits(0);
  r.configure = [](OptBuilder& b) {
    b.AddAllocateFlow();
    b.AddRouteAll();
    b.AddLinkCapacity(kBandwidth, FiniteLinkCaps(b.topology(), 1.0),
                      opt::NormalizedLinkFn(b.topology()));
    b.SetPredefinedObjective(opt::ObjectiveKind::kMinMaxLinkLoad, kBandwidth);
  };
  return r;
}

Recipe Simple(std::vector<std::string> chain) {
  if (chain.empty()) throw RecipeError("service chain must not be empty");
  Recipe r;
  r.name = "simple";
  r.predicate = paths::WaypointPredicate(chain);
  r.enumerate = Limits(static_cast<int>(chain.size()));
  r.load_resource = kCpu;
  r.configure = [chain](OptBuilder& b) {
    const net::Topology& topo = b.topology();
    b.AddBinaryVariables({BinaryKind::kPath, BinaryKind::kNode});
    b.AddAllocateFlow();
    b.AddRouteAll();
    b.AddLinkCapacity(kBandwidth, FiniteLinkCaps(topo), opt::DefaultLinkFn());

    opt::NodeCaps cpu;
    std::map<NodeId, double> tcam;
    for (const net::Node& n : topo.nodes()) {
      const bool mbox = std::any_of(chain.begin(), chain.end(),
                                    [&](const std::string& s) { return n.HasService(s); });
      if (mbox) cpu.emplace(n.id, net::Capacity(1.0));
      const net::Capacity t = n.Resource(kTcam);
      if (!t.tba() && !t.unbounded()) tcam[n.id] = t.value();
    }
    b.AddNodeCapacity(kCpu, cpu, MboxCpuFn(topo, true));
    b.AddNodeCapacityPerPath(kTcam, tcam,
                             [](NodeId, const net::TrafficClass&, const paths::AnnotatedPath&,
                                std::string_view) { return 1.0; });
    b.AddPathDisable();
    b.SetPredefinedObjective(opt::ObjectiveKind::kMinMaxNodeLoad, kCpu);
  };
  return r;
}

Recipe ElasticTree(std::map<NodeId, double> switch_power,
                   std::map<net::LinkKey, double> link_power) {
  Recipe r;
  r.name = "elastictree";
  r.predicate = paths::NullPredicate();
  r.enumerate = Limits(0);
  r.configure = [switch_power, link_power](OptBuilder& b) {
    const net::Topology& topo = b.topology();
    b.AddBinaryVariables({BinaryKind::kPath, BinaryKind::kNode, BinaryKind::kEdge});
    b.AddAllocateFlow();
    b.AddRouteAll();
    b.AddLinkCapacity(kBandwidth, FiniteLinkCaps(topo), opt::DefaultLinkFn());
    const auto active = ActiveClasses(b.traffic());
    b.AddRequireAllNodes(active);
    b.AddRequireAllEdges(active);
    b.AddPathDisable(active);
    b.AddActivationCuts(active);

    std::map<std::string, double> sw, ln;
    for (const net::Node& n : topo.nodes()) {
      auto it = switch_power.find(n.id);
      sw[opt::BnName(n.id)] = it == switch_power.end() ? 1.0 : it->second;
    }
    for (const net::Link& l : topo.links()) {
      auto it = link_power.find(l.key());
      ln[opt::BeName(l.key())] = it == link_power.end() ? 1.0 : it->second;
    }
    b.DefineVar("SwitchPower", sw);
    b.DefineVar("LinkPower", ln);
    b.SetObjective({{"SwitchPower", .75}, {"LinkPower", .25}}, lp::Sense::kMinimize);
  };
  return r;
}

Recipe ElasticScaling(double budget_fraction) {
  if (!(budget_fraction >= 0)) throw RecipeError("budget fraction must be non-negative");
  Recipe r;
  r.name = "elastic_scaling";
  r.predicate = paths::HasMboxPredicate();
  r.enumerate = Limits(1);
  r.load_resource = kCpu;
  r.configure = [budget_fraction](OptBuilder& b) {
    const net::Topology& topo = b.topology();
    b.AddBinaryVariables({BinaryKind::kPath, BinaryKind::kNode});
    b.AddAllocateFlow();
    b.AddRouteAll();
    opt::NodeCaps cpu;
    for (const net::Node& n : topo.nodes()) cpu.emplace(n.id, net::Capacity::ToBeAllocated());
    b.AddNodeCapacity(kCpu, cpu, MboxCpuFn(topo, false));
    b.AddRequireSomeNodes();
    b.AddPathDisable();
    b.AddBudget([](NodeId) { return 1.0; },
                budget_fraction * static_cast<double>(topo.num_nodes()));
    b.SetPredefinedObjective(opt::ObjectiveKind::kMinMaxNodeLoad, kCpu);
  };
  return r;
}

Recipe MakeRecipe(std::string_view name, const nlohmann::json& params) {
  try {
    if (name == "te") return TrafficEngineering();
    if (name == "simple") {
      return Simple(params.value("chain", std::vector<std::string>{"fw", "ids"}));
    }
    if (name == "elastictree") {
      std::map<NodeId, double> sw;
      std::map<net::LinkKey, double> ln;
      if (params.contains("switch_power")) {
        for (const auto& [k, v] : params.at("switch_power").items()) {
          sw[std::stoi(k)] = v.get<double>();
        }
      }
      if (params.contains("link_power")) {
        for (const auto& e : params.at("link_power")) {
          ln[{e.at("src").get<NodeId>(), e.at("dst").get<NodeId>()}] =
              e.at("power").get<double>();
        }
      }
      return ElasticTree(sw, ln);
    }
    if (name == "elastic_scaling") {
      return ElasticScaling(params.value("budget_fraction", 0.5));
    }
  } catch (const nlohmann::json::exception& e) {
    throw RecipeError("bad parameters for recipe " + std::string(name) + ": " + e.what());
  } catch (const std::invalid_argument&) {
    throw RecipeError("bad node id in parameters for recipe " + std::string(name));
  }
  throw RecipeError("unknown recipe '" + std::string(name) + "'");
}

}  // namespace apps
}  // namespace pathopt
