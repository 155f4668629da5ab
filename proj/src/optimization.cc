#include "pathopt/optimization.h"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace pathopt {
namespace opt {

using lp::kInfinity;
using lp::Relation;
using lp::Term;

LinkCapFn DefaultLinkFn() {
  return [](const LinkKey&, const TrafficClass& tc, const AnnotatedPath&,
            std::string_view) { return tc.vol_bytes; };
}

LinkCapFn NormalizedLinkFn(const net::Topology& topo) {
  return [&topo](const LinkKey& l, const TrafficClass& tc, const AnnotatedPath&,
                 std::string_view resource) {
    const Capacity cap = topo.GetLink(l.src, l.dst).Resource(resource);
    if (cap.tba() || cap.unbounded() || cap.value() <= 0) {
      throw BuildError("link " + std::to_string(l.src) + "->" +
                       std::to_string(l.dst) + " has no finite " +
                       std::string(resource) + " capacity to normalize by");
    }
    return tc.vol_bytes / cap.value();
  };
}

RoutingCostFn HopCountFn() {
  return [](const TrafficClass&, const AnnotatedPath& p) {
    return static_cast<double>(p.hops());
  };
}

ObjectiveKind ParseObjective(std::string_view name) {
  std::string key;
  for (char ch : name) {
    if (ch != '_' && ch != '-') key += static_cast<char>(std::tolower(ch));
  }
  if (key == "maxallflow") return ObjectiveKind::kMaxAllFlow;
  if (key == "maxallflowweighted") return ObjectiveKind::kMaxAllFlowWeighted;
  if (key == "minmaxnodeload") return ObjectiveKind::kMinMaxNodeLoad;
  if (key == "minmaxlinkload") return ObjectiveKind::kMinMaxLinkLoad;
  if (key == "minroutingcost") return ObjectiveKind::kMinRoutingCost;
  throw BuildError("unknown objective " + std::string(name));
}

std::string XpName(ClassId c, int p) {
  return "xp_c" + std::to_string(c) + "_p" + std::to_string(p);
}
std::string BpName(ClassId c, int p) {
  return "bp_c" + std::to_string(c) + "_p" + std::to_string(p);
}
std::string AlName(ClassId c) { return "al_c" + std::to_string(c); }
std::string BnName(NodeId v) { return "bn_" + std::to_string(v); }
std::string BeName(const LinkKey& l) {
  return "be_" + std::to_string(l.src) + "_" + std::to_string(l.dst);
}
std::string NcName(NodeId v, std::string_view r) {
  return "nc_" + std::to_string(v) + "_" + std::string(r);
}
std::string NlName(NodeId v, std::string_view r) {
  return "nl_" + std::to_string(v) + "_" + std::string(r);
}
std::string ElName(const LinkKey& l, std::string_view r) {
  return "el_" + std::to_string(l.src) + "_" + std::to_string(l.dst) + "_" +
         std::string(r);
}
std::string EpsName(ClassId c, int p) {
  return "eps_c" + std::to_string(c) + "_p" + std::to_string(p);
}

namespace {

std::string PathTag(ClassId c, int p) {
  return "c" + std::to_string(c) + "_p" + std::to_string(p);
}

const char* KindName(BinaryKind kind) {
  switch (kind) {
    case BinaryKind::kPath:
      return "path";
    case BinaryKind::kNode:
      return "node";
    case BinaryKind::kEdge:
      return "edge";
  }
  return "?";
}

}  // namespace

PrevSolution PrevFromSolution(const paths::PathSet& pptc,
                              const lp::Solution& solution) {
  PrevSolution prev;
  for (const auto& [cid, list] : pptc.per_class()) {
    auto& entry = prev[cid];
    for (size_t p = 0; p < list.size(); ++p) {
      entry[list[p]] = solution.ValueOr(XpName(cid, static_cast<int>(p)), 0.0);
    }
  }
  return prev;
}

OptBuilder::OptBuilder(const net::Topology& topo, const net::TrafficMatrix& tm,
                       const paths::PathSet& pptc)
    : topo_(topo), tm_(tm), pptc_(pptc) {
  for (const TrafficClass& tc : tm.classes()) {
    const auto& list = pptc.Get(tc.id);
    if (list.empty()) throw paths::InfeasibleClassError(tc.id);
    for (size_t p = 0; p < list.size(); ++p) {
      model_.AddVariable(XpName(tc.id, static_cast<int>(p)), 0, 1);
    }
    model_.AddVariable(AlName(tc.id), 0, 1);
  }
}

void OptBuilder::Claim(const std::string& key) {
  if (!installed_.insert(key).second) {
    throw BuildError("template " + key + " installed twice");
  }
}

std::vector<ClassId> OptBuilder::Resolve(const Classes& classes) const {
  std::vector<ClassId> out;
  if (!classes) {
    for (const TrafficClass& tc : tm_.classes()) out.push_back(tc.id);
    return out;
  }
  for (ClassId c : *classes) {
    tm_.Get(c);
    out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int OptBuilder::Var(const std::string& name) const {
  auto index = model_.FindVariable(name);
  if (!index) throw BuildError("unknown variable " + name);
  return *index;
}

void OptBuilder::RequireBinaries(BinaryKind kind, const char* what) const {
  if (!binaries_.count(kind)) {
    throw BuildError(std::string(what) + " needs " + KindName(kind) +
                     " binary variables");
  }
}

const std::set<ClassId>& OptBuilder::Covered(const std::string& key) const {
  static const std::set<ClassId> kNone;
  auto it = covered_.find(key);
  return it == covered_.end() ? kNone : it->second;
}

void OptBuilder::AddBinaryVariables(const std::set<BinaryKind>& kinds) {
  for (BinaryKind kind : kinds) {
    if (binaries_.count(kind)) {
      throw BuildError(std::string(KindName(kind)) + " binaries registered twice");
    }
  }
  if (kinds.count(BinaryKind::kPath)) {
    for (const TrafficClass& tc : tm_.classes()) {
      const size_t count = pptc_.Get(tc.id).size();
      for (size_t p = 0; p < count; ++p) {
        model_.AddVariable(BpName(tc.id, static_cast<int>(p)), 0, 1,
                           lp::VarType::kBinary);
      }
    }
  }
  if (kinds.count(BinaryKind::kNode)) {
    for (const net::Node& n : topo_.nodes()) {
      model_.AddVariable(BnName(n.id), 0, 1, lp::VarType::kBinary);
    }
  }
  if (kinds.count(BinaryKind::kEdge)) {
    for (const net::Link& l : topo_.links()) {
      model_.AddVariable(BeName(l.key()), 0, 1, lp::VarType::kBinary);
    }
  }
  binaries_.insert(kinds.begin(), kinds.end());
  if (kinds.count(BinaryKind::kNode)) {
    for (const auto& [resource, entry] : node_caps_) LinkTba(resource);
  }
}

void OptBuilder::AddAllocateFlow() {
  Claim("allocate_flow");
  for (const TrafficClass& tc : tm_.classes()) {
    std::vector<Term> terms;
    const size_t count = pptc_.Get(tc.id).size();
    for (size_t p = 0; p < count; ++p) {
      terms.push_back({Var(XpName(tc.id, static_cast<int>(p))), 1});
    }
    terms.push_back({Var(AlName(tc.id)), -1});
    model_.AddConstraint("alloc_c" + std::to_string(tc.id), terms, Relation::kEqual, 0);
  }
}

void OptBuilder::AddRouteAll() {
  if (!Installed("allocate_flow")) {
    throw BuildError("route_all requires allocate_flow first");
  }
  Claim("route_all");
  for (const TrafficClass& tc : tm_.classes()) {
    model_.AddConstraint("routeall_c" + std::to_string(tc.id),
                         {{Var(AlName(tc.id)), 1}}, Relation::kEqual, 1);
  }
}

void OptBuilder::AddEnforceSinglePath(const Classes& classes) {
  RequireBinaries(BinaryKind::kPath, "enforce_single_path");
  Claim("single_path");
  for (ClassId c : Resolve(classes)) {
    covered_["single_path"].insert(c);
    std::vector<Term> sum;
    const int count = static_cast<int>(pptc_.Get(c).size());
    for (int p = 0; p < count; ++p) {
      const int bp = Var(BpName(c, p));
      sum.push_back({bp, 1});
      model_.AddConstraint("sp_" + PathTag(c, p), {{Var(XpName(c, p)), 1}, {bp, -1}},
                           Relation::kLessEqual, 0);
    }
    model_.AddConstraint("single_c" + std::to_string(c), sum, Relation::kLessEqual, 1);
  }
}

void OptBuilder::AddLinkCapacity(const std::string& resource, const LinkCaps& caps,
                                 const LinkCapFn& fn) {
  if (!fn) throw BuildError("link capacity function missing");
  for (const auto& [link, cap] : caps) {
    if (!topo_.HasLink(link.src, link.dst)) {
      throw BuildError("capacity for unknown link " + std::to_string(link.src) +
                       "->" + std::to_string(link.dst));
    }
    if (std::isnan(cap) || cap < 0) throw BuildError("negative link capacity");
  }
  Claim("link_capacity:" + resource);
  std::map<LinkKey, std::vector<Term>> load;
  for (const TrafficClass& tc : tm_.classes()) {
    const auto& list = pptc_.Get(tc.id);
    for (size_t p = 0; p < list.size(); ++p) {
      for (const LinkKey& l : list[p].links()) {
        if (!caps.count(l)) continue;
        const double amount = fn(l, tc, list[p], resource);
        if (amount != 0) {
          load[l].push_back({Var(XpName(tc.id, static_cast<int>(p))), -amount});
        }
      }
    }
  }
  for (const auto& [link, cap] : caps) {
    const int el = model_.AddVariable(ElName(link, resource), 0, cap);
    std::vector<Term> terms = load[link];
    terms.push_back({el, 1});
    model_.AddConstraint("eldef_" + std::to_string(link.src) + "_" +
                             std::to_string(link.dst) + "_" + resource,
                         terms, Relation::kEqual, 0);
  }
  link_caps_[resource] = {caps, fn};
}

void OptBuilder::AddNodeCapacity(const std::string& resource, const NodeCaps& caps,
                                 const NodeCapFn& fn) {
  if (!fn) throw BuildError("node capacity function missing");
  for (const auto& [node, cap] : caps) {
    if (!topo_.HasNode(node)) {
      throw BuildError("capacity for unknown node " + std::to_string(node));
    }
    if (!cap.tba() && (std::isnan(cap.value()) || cap.value() < 0)) {
      throw BuildError("negative node capacity");
    }
  }
  Claim("node_capacity:" + resource);
  std::map<NodeId, std::vector<Term>> load;
  std::map<NodeId, double>& bound = tba_bound_[resource];
  for (const TrafficClass& tc : tm_.classes()) {
    const auto& list = pptc_.Get(tc.id);
    std::map<NodeId, double> largest;
    for (size_t p = 0; p < list.size(); ++p) {
      for (NodeId v : list[p].nodes()) {
        if (!caps.count(v)) continue;
        const double amount = fn(v, tc, list[p], resource);
        if (!std::isfinite(amount) || amount < 0) {
          throw BuildError("node capacity function returned " + std::to_string(amount));
        }
        if (amount != 0) {
          load[v].push_back({Var(XpName(tc.id, static_cast<int>(p))), -amount});
        }
        largest[v] = std::max(largest[v], amount);
      }
    }
    for (const auto& [v, amount] : largest) bound[v] += amount;
  }
  for (const auto& [node, cap] : caps) {
    const int nl = model_.AddVariable(NlName(node, resource), 0, kInfinity);
    std::vector<Term> terms = load[node];
    terms.push_back({nl, 1});
    const std::string tag = std::to_string(node) + "_" + resource;
    model_.AddConstraint("nldef_" + tag, terms, Relation::kEqual, 0);
    if (cap.unbounded()) continue;
    const double ub = cap.tba() ? kInfinity : cap.value();
    const double lb = cap.tba() ? 0 : cap.value();
    const int nc = model_.AddVariable(NcName(node, resource), lb, ub);
    model_.AddConstraint("nlcap_" + tag, {{nl, 1}, {nc, -1}}, Relation::kLessEqual, 0);
  }
  node_caps_[resource] = {caps, fn, false};
  if (binaries_.count(BinaryKind::kNode)) LinkTba(resource);
}

void OptBuilder::LinkTba(const std::string& resource) {
  auto it = node_caps_.find(resource);
  if (it == node_caps_.end() || it->second.per_path) return;
  for (const auto& [node, cap] : it->second.caps) {
    if (!cap.tba()) continue;
    const std::string name = "tba_" + std::to_string(node) + "_" + resource;
    if (model_.FindConstraint(name)) continue;
    const double u = tba_bound_[resource][node];
    model_.AddConstraint(name, {{Var(NcName(node, resource)), 1}, {Var(BnName(node)), -u}},
                         Relation::kLessEqual, 0);
  }
}

void OptBuilder::AddNodeCapacityPerPath(const std::string& resource,
                                        const std::map<NodeId, double>& caps,
                                        const NodeCapFn& fn) {
  if (!fn) throw BuildError("node capacity function missing");
  RequireBinaries(BinaryKind::kPath, "node_capacity_per_path");
  for (const auto& [node, cap] : caps) {
    if (!topo_.HasNode(node)) {
      throw BuildError("capacity for unknown node " + std::to_string(node));
    }
    if (std::isnan(cap) || cap < 0) throw BuildError("negative node capacity");
  }
  Claim("node_capacity:" + resource);
  std::map<NodeId, std::vector<Term>> load;
  for (const TrafficClass& tc : tm_.classes()) {
    const auto& list = pptc_.Get(tc.id);
    for (size_t p = 0; p < list.size(); ++p) {
      for (NodeId v : list[p].nodes()) {
        if (!caps.count(v)) continue;
        const double amount = fn(v, tc, list[p], resource);
        if (amount != 0) {
          load[v].push_back({Var(BpName(tc.id, static_cast<int>(p))), -amount});
        }
      }
    }
  }
  NodeCaps recorded;
  for (const auto& [node, cap] : caps) {
    const int nl = model_.AddVariable(NlName(node, resource), 0, kInfinity);
    std::vector<Term> terms = load[node];
    terms.push_back({nl, 1});
    const std::string tag = std::to_string(node) + "_" + resource;
    model_.AddConstraint("nldef_" + tag, terms, Relation::kEqual, 0);
    const int nc = model_.AddVariable(NcName(node, resource), cap, cap);
    model_.AddConstraint("nlcap_" + tag, {{nl, 1}, {nc, -1}}, Relation::kLessEqual, 0);
    recorded.emplace(node, Capacity(cap));
  }
  node_caps_[resource] = {recorded, fn, true};
}

void OptBuilder::AddCapacityBudget(const std::string& resource,
                                   const std::vector<NodeId>& nodes, double total) {
  std::vector<Term> terms;
  for (NodeId v : nodes) {
    auto nc = model_.FindVariable(NcName(v, resource));
    if (!nc) throw BuildError("no allocated capacity " + NcName(v, resource));
    terms.push_back({*nc, 1});
  }
  Claim("capacity_budget:" + resource);
  model_.AddConstraint("capbudget_" + resource, terms, Relation::kLessEqual, total);
}

void OptBuilder::AddRequireAllNodes(const Classes& classes) {
  RequireBinaries(BinaryKind::kPath, "require_all_nodes");
  RequireBinaries(BinaryKind::kNode, "require_all_nodes");
  Claim("require_all_nodes");
  for (ClassId c : Resolve(classes)) {
    covered_["require_all_nodes"].insert(c);
    const auto& list = pptc_.Get(c);
    for (size_t p = 0; p < list.size(); ++p) {
      const int bp = Var(BpName(c, static_cast<int>(p)));
      for (NodeId v : list[p].nodes()) {
        model_.AddConstraint("ran_" + PathTag(c, static_cast<int>(p)) + "_n" +
                                 std::to_string(v),
                             {{bp, 1}, {Var(BnName(v)), -1}}, Relation::kLessEqual, 0);
      }
    }
  }
}

void OptBuilder::AddRequireSomeNodes(const Classes& classes) {
  RequireBinaries(BinaryKind::kPath, "require_some_nodes");
  RequireBinaries(BinaryKind::kNode, "require_some_nodes");
  Claim("require_some_nodes");
  for (ClassId c : Resolve(classes)) {
    covered_["require_some_nodes"].insert(c);
    const auto& list = pptc_.Get(c);
    for (size_t p = 0; p < list.size(); ++p) {
      std::vector<Term> terms{{Var(BpName(c, static_cast<int>(p))), 1}};
      for (NodeId v : list[p].nodes()) terms.push_back({Var(BnName(v)), -1});
      model_.AddConstraint("rsn_" + PathTag(c, static_cast<int>(p)), terms,
                           Relation::kLessEqual, 0);
    }
  }
}

void OptBuilder::AddRequireAllEdges(const Classes& classes) {
  RequireBinaries(BinaryKind::kPath, "require_all_edges");
  RequireBinaries(BinaryKind::kEdge, "require_all_edges");
  Claim("require_all_edges");
  for (ClassId c : Resolve(classes)) {
    covered_["require_all_edges"].insert(c);
    const auto& list = pptc_.Get(c);
    for (size_t p = 0; p < list.size(); ++p) {
      const int bp = Var(BpName(c, static_cast<int>(p)));
      for (const LinkKey& l : list[p].links()) {
        model_.AddConstraint("rae_" + PathTag(c, static_cast<int>(p)) + "_e" +
                                 std::to_string(l.src) + "_" + std::to_string(l.dst),
                             {{bp, 1}, {Var(BeName(l)), -1}}, Relation::kLessEqual, 0);
      }
    }
  }
}

void OptBuilder::AddPathDisable(const Classes& classes) {
  RequireBinaries(BinaryKind::kPath, "path_disable");
  Claim("path_disable");
  for (ClassId c : Resolve(classes)) {
    covered_["path_disable"].insert(c);
    const int count = static_cast<int>(pptc_.Get(c).size());
    for (int p = 0; p < count; ++p) {
      model_.AddConstraint("pd_" + PathTag(c, p),
                           {{Var(XpName(c, p)), 1}, {Var(BpName(c, p)), -1}},
                           Relation::kLessEqual, 0);
    }
  }
}

void OptBuilder::AddBudget(const NodeBudgetFn& fn, double k) {
  if (!fn) throw BuildError("node budget function missing");
  RequireBinaries(BinaryKind::kNode, "budget");
  Claim("budget");
  std::vector<Term> terms;
  for (const net::Node& n : topo_.nodes()) {
    terms.push_back({Var(BnName(n.id)), fn(n.id)});
  }
  model_.AddConstraint("budget", terms, Relation::kLessEqual, k);
}

void OptBuilder::AddActivationCuts(const Classes& classes) {
  if (!Installed("path_disable") ||
      (!Installed("require_all_nodes") && !Installed("require_all_edges"))) {
    throw BuildError("activation cuts need path_disable and require_all_*");
  }
  Claim("activation_cuts");
  for (ClassId c : Resolve(classes)) {
    if (!Covered("path_disable").count(c)) continue;
    const auto& list = pptc_.Get(c);
    std::map<NodeId, std::vector<Term>> by_node;
    std::map<LinkKey, std::vector<Term>> by_link;
    for (size_t p = 0; p < list.size(); ++p) {
      const int x = Var(XpName(c, static_cast<int>(p)));
      for (NodeId v : list[p].nodes()) by_node[v].push_back({x, 1});
      for (const LinkKey& l : list[p].links()) by_link[l].push_back({x, 1});
    }
    const std::string tag = "cut_c" + std::to_string(c);
    if (Covered("require_all_nodes").count(c)) {
      for (auto& [v, terms] : by_node) {
        terms.push_back({Var(BnName(v)), -1});
        model_.AddConstraint(tag + "_n" + std::to_string(v), terms,
                             Relation::kLessEqual, 0);
      }
    }
    if (Covered("require_all_edges").count(c)) {
      for (auto& [l, terms] : by_link) {
        terms.push_back({Var(BeName(l)), -1});
        model_.AddConstraint(tag + "_e" + std::to_string(l.src) + "_" +
                                 std::to_string(l.dst),
                             terms, Relation::kLessEqual, 0);
      }
    }
  }
}

int OptBuilder::MaxOf(const std::string& name, const std::vector<int>& vars) {
  if (auto existing = model_.FindVariable(name)) return *existing;
  const int m = model_.AddVariable(name, -kInfinity, kInfinity);
  for (int v : vars) {
    model_.AddConstraint(name + "_ge_" + model_.variables()[v].name,
                         {{m, 1}, {v, -1}}, Relation::kGreaterEqual, 0);
  }
  return m;
}

void OptBuilder::SetPredefinedObjective(ObjectiveKind kind, const std::string& resource,
                                        const RoutingCostFn& cost) {
  std::vector<Term> terms;
  lp::Sense sense = lp::Sense::kMinimize;
  switch (kind) {
    case ObjectiveKind::kMaxAllFlow:
    case ObjectiveKind::kMaxAllFlowWeighted:
      sense = lp::Sense::kMaximize;
      for (const TrafficClass& tc : tm_.classes()) {
        const double w = kind == ObjectiveKind::kMaxAllFlow ? 1.0 : tc.priority;
        terms.push_back({Var(AlName(tc.id)), w});
      }
      break;
    case ObjectiveKind::kMinMaxNodeLoad: {
      auto it = node_caps_.find(resource);
      if (it == node_caps_.end()) {
        throw BuildError("no node loads for resource '" + resource + "'");
      }
      std::vector<int> loads;
      for (const auto& [node, cap] : it->second.caps) {
        loads.push_back(Var(NlName(node, resource)));
      }
      terms.push_back({MaxOf("maxload_nl_" + resource, loads), 1});
      break;
    }
    case ObjectiveKind::kMinMaxLinkLoad: {
      auto it = link_caps_.find(resource);
      if (it == link_caps_.end()) {
        throw BuildError("no link loads for resource '" + resource + "'");
      }
      std::vector<int> loads;
      for (const auto& [link, cap] : it->second.caps) {
        loads.push_back(Var(ElName(link, resource)));
      }
      terms.push_back({MaxOf("maxload_el_" + resource, loads), 1});
      break;
    }
    case ObjectiveKind::kMinRoutingCost:
      if (!cost) throw BuildError("minRoutingCost needs a routing cost function");
      for (const TrafficClass& tc : tm_.classes()) {
        const auto& list = pptc_.Get(tc.id);
        for (size_t p = 0; p < list.size(); ++p) {
          terms.push_back({Var(XpName(tc.id, static_cast<int>(p))), cost(tc, list[p])});
        }
      }
      break;
  }
  model_.SetObjective(terms, sense);
}

int OptBuilder::DefineVar(const std::string& name,
                          const std::map<std::string, double>& coeffs, double lb,
                          double ub) {
  if (model_.HasVariable(name)) throw BuildError("variable " + name + " already defined");
  std::vector<Term> terms;
  for (const auto& [ref, coeff] : coeffs) terms.push_back({Var(ref), -coeff});
  const int v = model_.AddVariable(name, lb, ub);
  terms.push_back({v, 1});
  model_.AddConstraint("def_" + name, terms, Relation::kEqual, 0);
  return v;
}

void OptBuilder::SetObjective(const std::map<std::string, double>& coeffs,
                              lp::Sense sense) {
  std::vector<Term> terms;
  for (const auto& [ref, coeff] : coeffs) terms.push_back({Var(ref), coeff});
  model_.SetObjective(terms, sense);
}

void OptBuilder::AddMinChurn(const PrevSolution& prev, double w, ChurnMode mode) {
  if (!(w >= 0 && w <= 1)) throw BuildError("churn weight must lie in [0, 1]");
  if (model_.objective().terms.empty()) {
    throw BuildError("churn term needs an objective to combine with");
  }
  Claim("min_churn");
  churn_base_ = model_.objective();
  const int diff = model_.AddVariable(std::string(kDiffName), 0, kInfinity);
  std::vector<Term> sum{{diff, 1}};
  for (const TrafficClass& tc : tm_.classes()) {
    const auto& list = pptc_.Get(tc.id);
    const auto prev_class = prev.find(tc.id);
    for (size_t p = 0; p < list.size(); ++p) {
      const int pi = static_cast<int>(p);
      double before = 0;
      if (prev_class != prev.end()) {
        auto hit = prev_class->second.find(list[p]);
        if (hit != prev_class->second.end()) before = hit->second;
      }
      const int x = Var(XpName(tc.id, pi));
      const int eps = model_.AddVariable(EpsName(tc.id, pi), 0, kInfinity);
      model_.AddConstraint("chlo_" + PathTag(tc.id, pi), {{x, 1}, {eps, 1}},
                           Relation::kGreaterEqual, before);
      model_.AddConstraint("chhi_" + PathTag(tc.id, pi), {{x, 1}, {eps, -1}},
                           Relation::kLessEqual, before);
      if (mode == ChurnMode::kMax) {
        model_.AddConstraint("chmax_" + PathTag(tc.id, pi), {{diff, 1}, {eps, -1}},
                             Relation::kGreaterEqual, 0);
      } else {
        sum.push_back({eps, -1});
      }
    }
  }
  if (mode == ChurnMode::kSum) {
    model_.AddConstraint("chsum", sum, Relation::kEqual, 0);
  }
  const double sign = churn_base_->sense == lp::Sense::kMaximize ? -1 : 1;
  std::vector<Term> objective;
  if (w < 1) {
    for (const Term& t : churn_base_->terms) objective.push_back({t.var, sign * (1 - w) * t.coeff});
  }
  if (w > 0) objective.push_back({diff, w});
  model_.SetObjective(objective, lp::Sense::kMinimize);
}

double OptBuilder::BaseObjective(const lp::Solution& s) const {
  const lp::Objective& base = churn_base_ ? *churn_base_ : model_.objective();
  double total = 0;
  for (const Term& t : base.terms) {
    total += t.coeff * s.ValueOr(model_.variables()[t.var].name, 0.0);
  }
  return total;
}

std::map<ClassId, std::vector<double>> OptBuilder::PathFractions(
    const lp::Solution& s) const {
  std::map<ClassId, std::vector<double>> out;
  for (const TrafficClass& tc : tm_.classes()) {
    const int count = static_cast<int>(pptc_.Get(tc.id).size());
    auto& list = out[tc.id];
    for (int p = 0; p < count; ++p) list.push_back(s.ValueOr(XpName(tc.id, p), 0.0));
  }
  return out;
}

SoundnessReport Audit(const OptBuilder& b, const lp::Solution& s) {
  SoundnessReport r;
  const auto& tm = b.traffic();
  const auto& pptc = b.pptc();
  auto value = [&](const std::string& name) { return s.ValueOr(name, 0.0); };

  if (b.Installed("allocate_flow")) {
    for (const TrafficClass& tc : tm.classes()) {
      double total = 0;
      const int count = static_cast<int>(pptc.Get(tc.id).size());
      for (int p = 0; p < count; ++p) total += value(XpName(tc.id, p));
      r.flow_conservation =
          std::max(r.flow_conservation, std::abs(total - value(AlName(tc.id))));
    }
  }

  for (const auto& [resource, entry] : b.link_capacities()) {
    std::map<LinkKey, double> load;
    for (const TrafficClass& tc : tm.classes()) {
      const auto& list = pptc.Get(tc.id);
      for (size_t p = 0; p < list.size(); ++p) {
        const double x = value(XpName(tc.id, static_cast<int>(p)));
        for (const LinkKey& l : list[p].links()) {
          if (entry.caps.count(l)) load[l] += x * entry.fn(l, tc, list[p], resource);
        }
      }
    }
    for (const auto& [l, amount] : load) {
      r.capacity = std::max(r.capacity, amount - entry.caps.at(l));
    }
  }

  for (const auto& [resource, entry] : b.node_capacities()) {
    std::map<NodeId, double> load;
    for (const TrafficClass& tc : tm.classes()) {
      const auto& list = pptc.Get(tc.id);
      for (size_t p = 0; p < list.size(); ++p) {
        const int pi = static_cast<int>(p);
        const double weight =
            entry.per_path ? value(BpName(tc.id, pi)) : value(XpName(tc.id, pi));
        for (NodeId v : list[p].nodes()) {
          if (entry.caps.count(v)) load[v] += weight * entry.fn(v, tc, list[p], resource);
        }
      }
    }
    for (const auto& [v, cap] : entry.caps) {
      if (cap.unbounded()) continue;
      const double limit = cap.tba() ? value(NcName(v, resource)) : cap.value();
      r.capacity = std::max(r.capacity, load[v] - limit);
      if (cap.tba() && b.model().HasVariable(BnName(v)) && value(BnName(v)) < 0.5) {
        r.tba_disabled = std::max(r.tba_disabled, value(NcName(v, resource)));
      }
    }
  }

  for (const TrafficClass& tc : tm.classes()) {
    const auto& list = pptc.Get(tc.id);
    double enabled = 0;
    for (size_t p = 0; p < list.size(); ++p) {
      const int pi = static_cast<int>(p);
      const double x = value(XpName(tc.id, pi));
      const double bp = value(BpName(tc.id, pi));
      enabled += bp;
      if (b.Covered("path_disable").count(tc.id) || b.Covered("single_path").count(tc.id)) {
        r.activation = std::max(r.activation, x - bp);
      }
      if (b.Covered("require_all_nodes").count(tc.id)) {
        for (NodeId v : list[p].nodes()) {
          r.activation = std::max(r.activation, bp - value(BnName(v)));
        }
      }
      if (b.Covered("require_all_edges").count(tc.id)) {
        for (const LinkKey& l : list[p].links()) {
          r.activation = std::max(r.activation, bp - value(BeName(l)));
        }
      }
      if (b.Covered("require_some_nodes").count(tc.id)) {
        double some = 0;
        for (NodeId v : list[p].nodes()) some += value(BnName(v));
        r.activation = std::max(r.activation, bp - some);
      }
    }
    if (b.Covered("single_path").count(tc.id)) {
      r.activation = std::max(r.activation, enabled - 1);
    }
  }
  return r;
}

}  // namespace opt
}  // namespace pathopt
