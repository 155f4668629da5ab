#ifndef PATHOPT_OPTIMIZATION_H
#define PATHOPT_OPTIMIZATION_H

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pathopt/model.h"
#include "pathopt/paths.h"
#include "pathopt/solver.h"
#include "pathopt/topology.h"
#include "pathopt/traffic.h"

namespace pathopt {
namespace opt {

using net::Capacity;
using net::ClassId;
using net::LinkKey;
using net::NodeId;
using net::TrafficClass;
using paths::AnnotatedPath;

// Resource consumed on link/node if all of the class traffic used the path.
using LinkCapFn = std::function<double(const LinkKey&, const TrafficClass&,
                                       const AnnotatedPath&, std::string_view)>;
using NodeCapFn = std::function<double(NodeId, const TrafficClass&,
                                       const AnnotatedPath&, std::string_view)>;
using NodeBudgetFn = std::function<double(NodeId)>;
using RoutingCostFn =
    std::function<double(const TrafficClass&, const AnnotatedPath&)>;

// vol_bytes of the class.
LinkCapFn DefaultLinkFn();
// vol_bytes divided by the link's capacity for `resource` in `topo`, so a
// cap of 1 means full utilization. The topology must outlive the function.
LinkCapFn NormalizedLinkFn(const net::Topology& topo);
// Hop count of the path.
RoutingCostFn HopCountFn();

using LinkCaps = std::map<LinkKey, double>;
using NodeCaps = std::map<NodeId, Capacity>;
// Subset of classes; nullopt selects every class.
using Classes = std::optional<std::vector<ClassId>>;

enum class BinaryKind { kPath, kNode, kEdge };

enum class ObjectiveKind {
  kMaxAllFlow,
  kMaxAllFlowWeighted,  // priorities as weights
  kMinMaxNodeLoad,
  kMinMaxLinkLoad,
  kMinRoutingCost,
};

ObjectiveKind ParseObjective(std::string_view name);

enum class ChurnMode { kMax, kSum };

// Previous flow fractions keyed by path identity, so they survive a
// re-selection that reorders or replaces paths.
using PrevSolution = std::map<ClassId, std::map<AnnotatedPath, double>>;

PrevSolution PrevFromSolution(const paths::PathSet& pptc,
                              const lp::Solution& solution);

class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Variable names. These are the contract for DefineVar/SetObjective.
std::string XpName(ClassId c, int p);
std::string BpName(ClassId c, int p);
std::string AlName(ClassId c);
std::string BnName(NodeId v);
std::string BeName(const LinkKey& l);
std::string NcName(NodeId v, std::string_view resource);
std::string NlName(NodeId v, std::string_view resource);
std::string ElName(const LinkKey& l, std::string_view resource);
std::string EpsName(ClassId c, int p);
inline constexpr std::string_view kDiffName = "churn_diff";

// Assembles a path-based program from constraint templates. Each template
// may be installed once (per resource for capacity templates); a second
// call throws BuildError.
class OptBuilder {
 public:
  // Registers xp and al for every class. Throws
  // paths::InfeasibleClassError if a class has no path.
  OptBuilder(const net::Topology& topo, const net::TrafficMatrix& tm,
             const paths::PathSet& pptc);
  OptBuilder(const OptBuilder&) = delete;
  OptBuilder& operator=(const OptBuilder&) = delete;

  void AddBinaryVariables(const std::set<BinaryKind>& kinds);

  void AddAllocateFlow();
  void AddRouteAll();
  void AddEnforceSinglePath(const Classes& classes = std::nullopt);

  void AddLinkCapacity(const std::string& resource, const LinkCaps& caps,
                       const LinkCapFn& fn);
  void AddNodeCapacity(const std::string& resource, const NodeCaps& caps,
                       const NodeCapFn& fn);
  void AddNodeCapacityPerPath(const std::string& resource,
                              const std::map<NodeId, double>& caps,
                              const NodeCapFn& fn);
  void AddCapacityBudget(const std::string& resource,
                         const std::vector<NodeId>& nodes, double total);

  void AddRequireAllNodes(const Classes& classes = std::nullopt);
  void AddRequireSomeNodes(const Classes& classes = std::nullopt);
  void AddRequireAllEdges(const Classes& classes = std::nullopt);
  void AddPathDisable(const Classes& classes = std::nullopt);
  void AddBudget(const NodeBudgetFn& fn, double k);

  // Valid inequalities sum_{p through e} x_cp <= b(e) per class and
  // element; they need RequireAllNodes/Edges and PathDisable and tighten
  // the relaxation considerably.
  void AddActivationCuts(const Classes& classes = std::nullopt);

  void SetPredefinedObjective(ObjectiveKind kind, const std::string& resource = "",
                              const RoutingCostFn& cost = nullptr);

  // New continuous variable equal to the combination, within [lb, ub].
  int DefineVar(const std::string& name, const std::map<std::string, double>& coeffs,
                double lb = -lp::kInfinity, double ub = lp::kInfinity);
  void SetObjective(const std::map<std::string, double>& coeffs, lp::Sense sense);

  // Replaces the installed objective f with (1 - w) * f + w * Diff, where
  // Diff >= |x - prev| per path (or their sum). A maximized f enters
  // negated. Paths missing from prev count as previously unused.
  void AddMinChurn(const PrevSolution& prev, double w, ChurnMode mode = ChurnMode::kMax);

  // Value of the objective that AddMinChurn wrapped (the installed one if
  // no churn term was added).
  double BaseObjective(const lp::Solution& s) const;

  const lp::ProgramModel& model() const { return model_; }
  const net::Topology& topology() const { return topo_; }
  const net::TrafficMatrix& traffic() const { return tm_; }
  const paths::PathSet& pptc() const { return pptc_; }

  bool Installed(std::string_view key) const {
    return installed_.count(std::string(key)) > 0;
  }

  lp::Solution Solve(const lp::SolverOptions& options = {}) const {
    return lp::Solve(model_, options);
  }

  // x values per class, aligned with the class's path list.
  std::map<ClassId, std::vector<double>> PathFractions(const lp::Solution& s) const;

  // What the templates installed, for auditing.
  struct LinkCapacity {
    LinkCaps caps;
    LinkCapFn fn;
  };
  struct NodeCapacity {
    NodeCaps caps;
    NodeCapFn fn;
    bool per_path = false;
  };
  const std::map<std::string, LinkCapacity>& link_capacities() const {
    return link_caps_;
  }
  const std::map<std::string, NodeCapacity>& node_capacities() const {
    return node_caps_;
  }
  // Classes covered by an activation template ("path_disable",
  // "require_all_nodes", "require_some_nodes", "require_all_edges",
  // "single_path").
  const std::set<ClassId>& Covered(const std::string& key) const;

 private:
  void Claim(const std::string& key);
  std::vector<ClassId> Resolve(const Classes& classes) const;
  int Var(const std::string& name) const;
  void RequireBinaries(BinaryKind kind, const char* what) const;
  void LinkTba(const std::string& resource);
  // Aux M with M >= each of vars; returns M.
  int MaxOf(const std::string& name, const std::vector<int>& vars);

  const net::Topology topo_;
  const net::TrafficMatrix tm_;
  const paths::PathSet pptc_;
  lp::ProgramModel model_;
  std::set<std::string> installed_;
  std::set<BinaryKind> binaries_;
  std::map<std::string, LinkCapacity> link_caps_;
  std::map<std::string, NodeCapacity> node_caps_;
  std::map<std::string, std::set<ClassId>> covered_;
  // per resource: node -> sum over classes of the largest fn value
  std::map<std::string, std::map<NodeId, double>> tba_bound_;
  std::optional<lp::Objective> churn_base_;
};

// Audits a solved instance against the installed templates.
struct SoundnessReport {
  double flow_conservation = 0;  // max |sum x - a|
  double capacity = 0;           // max (load - cap), loads recomputed
  double activation = 0;         // max (x - b_p), (b_p - b_n), (b_p - b_e)
  double tba_disabled = 0;       // max nc over disabled nodes
  bool ok(double tol) const {
    return flow_conservation <= tol && capacity <= tol && activation <= tol &&
           tba_disabled <= tol;
  }
};

// Loads are recomputed from x (or b_p) and the template cost functions,
// not read from the el/nl variables.
SoundnessReport Audit(const OptBuilder& builder, const lp::Solution& solution);

}  // namespace opt
}  // namespace pathopt

#endif
