#ifndef PATHOPT_PATHS_H
#define PATHOPT_PATHS_H

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pathopt/topology.h"
#include "pathopt/traffic.h"

namespace pathopt {
namespace paths {

using net::ClassId;
using net::LinkKey;
using net::NodeId;

// A loop-free node sequence together with the ordered subset of its nodes
// that perform middlebox processing for the flows routed along it.
class AnnotatedPath {
 public:
  AnnotatedPath() = default;
  // Throws std::invalid_argument if nodes repeat or mbox_nodes is not an
  // ordered subsequence of nodes.
  AnnotatedPath(std::vector<NodeId> nodes, std::vector<NodeId> mbox_nodes = {});

  const std::vector<NodeId>& nodes() const { return nodes_; }
  const std::vector<NodeId>& mbox_nodes() const { return mbox_nodes_; }
  std::vector<LinkKey> links() const;

  NodeId ingress() const { return nodes_.front(); }
  NodeId egress() const { return nodes_.back(); }
  size_t hops() const { return nodes_.empty() ? 0 : nodes_.size() - 1; }

  bool Contains(NodeId node) const;
  bool ContainsLink(const LinkKey& link) const;
  bool UsesMbox(NodeId node) const;

  friend bool operator==(const AnnotatedPath&, const AnnotatedPath&) = default;
  friend auto operator<=>(const AnnotatedPath&, const AnnotatedPath&) = default;

 private:
  std::vector<NodeId> nodes_;
  std::vector<NodeId> mbox_nodes_;
};

std::string ToString(const AnnotatedPath& path);

// Must be pure and deterministic.
using PathPredicate =
    std::function<bool(const AnnotatedPath&, const net::Topology&)>;

PathPredicate NullPredicate();
PathPredicate RejectAllPredicate();

// Accepts a path iff the service types of its mbox nodes contain `order` as
// a (not necessarily contiguous) subsequence.
PathPredicate WaypointPredicate(std::vector<std::string> order);

// Accepts a path iff it designates at least one mbox node.
PathPredicate HasMboxPredicate();

// A node can host middlebox processing if it offers a service other than
// plain forwarding ("switch" and the fat-tree tier names).
bool IsMiddlebox(const net::Node& node);

class PathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a class has no usable path.
class InfeasibleClassError : public PathError {
 public:
  explicit InfeasibleClassError(ClassId id)
      : PathError("traffic class " + std::to_string(id) +
                  " has no valid paths"),
        class_id_(id) {}
  ClassId class_id() const { return class_id_; }

 private:
  ClassId class_id_;
};

struct EnumerateOptions {
  int max_len = 10;       // nodes per path
  int max_count = 1000;   // surviving paths per class
  int chain_len = 0;      // mbox positions per path; 0 disables expansion
  // Let one node fill consecutive chain positions when it offers each of
  // the required services.
  bool allow_colocated = false;
};

// Depth-first enumeration of simple ingress->egress paths, neighbours in
// ascending id order. With chain_len > 0 every raw path is expanded into
// one annotated path per in-order placement of the chain on its nodes.
// Stops after max_count paths pass the predicate.
std::vector<AnnotatedPath> EnumeratePaths(const net::Topology& topo,
                                          const net::TrafficClass& tc,
                                          const PathPredicate& predicate,
                                          const EnumerateOptions& options);

class PathSet {
 public:
  PathSet() = default;

  void Set(ClassId id, std::vector<AnnotatedPath> paths);
  bool Has(ClassId id) const { return per_class_.count(id) > 0; }

  // Empty list for unknown classes.
  const std::vector<AnnotatedPath>& Get(ClassId id) const;

  const std::map<ClassId, std::vector<AnnotatedPath>>& per_class() const {
    return per_class_;
  }
  size_t TotalPaths() const;

  friend bool operator==(const PathSet&, const PathSet&) = default;

 private:
  std::map<ClassId, std::vector<AnnotatedPath>> per_class_;
};

// Runs EnumeratePaths for every class, on up to `threads` worker threads
// (0 = hardware concurrency). Output is independent of the thread count.
PathSet GeneratePaths(const net::Topology& topo, const net::TrafficMatrix& tm,
                      const PathPredicate& predicate,
                      const EnumerateOptions& options, unsigned threads = 0);

enum class SelectionStrategy { kShortest, kRandom };

SelectionStrategy ParseStrategy(std::string_view name);
std::string_view StrategyName(SelectionStrategy strategy);

// Picks at most `select_number` paths per class. Shortest: ascending hop
// count, ties broken lexicographically. Random: a per-class shuffle seeded
// by (seed, class id); the first select_number survive in generation order,
// so larger selections are supersets of smaller ones. Paths of `sticky`
// that are still present in `all` are kept first. Throws
// InfeasibleClassError for a class without any path.
PathSet SelectPaths(const PathSet& all, SelectionStrategy strategy,
                    int select_number, uint64_t seed,
                    const PathSet* sticky = nullptr);

// Identifies a node or a directed link.
struct Element {
  bool is_link = false;
  NodeId a = 0;
  NodeId b = 0;

  static Element OfNode(NodeId n) { return {false, n, 0}; }
  static Element OfLink(NodeId s, NodeId d) { return {true, s, d}; }

  friend auto operator<=>(const Element&, const Element&) = default;
};

struct PathRef {
  ClassId class_id = 0;
  int path_index = 0;

  friend auto operator<=>(const PathRef&, const PathRef&) = default;
};

// Element -> selected paths traversing it.
class DependencyIndex {
 public:
  explicit DependencyIndex(const PathSet& selected);

  // Sorted; empty when no path uses the element.
  const std::vector<PathRef>& PathsThrough(const Element& element) const;

  const std::map<Element, std::vector<PathRef>>& entries() const {
    return entries_;
  }

 private:
  std::map<Element, std::vector<PathRef>> entries_;
};

// Cache file: { "<class id>": [ {"nodes": [...], "mbox": [...]}, ... ] }.
std::string SavePathSetJson(const PathSet& paths);
PathSet LoadPathSetJson(std::string_view document);

}  // namespace paths
}  // namespace pathopt

#endif
