#ifndef PATHOPT_TOPOLOGY_H
#define PATHOPT_TOPOLOGY_H

#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pathopt {
namespace net {

using NodeId = int;

// A directed (src, dst) pair. Ordered lexicographically.
struct LinkKey {
  NodeId src = 0;
  NodeId dst = 0;

  friend auto operator<=>(const LinkKey&, const LinkKey&) = default;
};

struct LinkKeyHash {
  size_t operator()(const LinkKey& key) const noexcept {
    return std::hash<uint64_t>()((static_cast<uint64_t>(
                                      static_cast<uint32_t>(key.src))
                                  << 32) |
                                 static_cast<uint32_t>(key.dst));
  }
};

// Resource capacity. Either a concrete non-negative amount or the
// to-be-allocated sentinel, in which case the optimizer picks the amount.
class Capacity {
 public:
  static Capacity Unbounded() {
    return Capacity(std::numeric_limits<double>::infinity());
  }
  static Capacity ToBeAllocated() {
    Capacity c(0);
    c.tba_ = true;
    return c;
  }

  explicit Capacity(double value) : value_(value) {}

  bool tba() const { return tba_; }
  bool unbounded() const { return !tba_ && value_ == kInf; }

  // Only meaningful when !tba().
  double value() const { return value_; }

  friend bool operator==(const Capacity&, const Capacity&) = default;

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  double value_;
  bool tba_ = false;
};

using ResourceMap = std::map<std::string, Capacity>;

struct Node {
  NodeId id = 0;
  std::string name;
  std::set<std::string> service_types;
  ResourceMap resources;

  bool HasService(std::string_view type) const {
    return service_types.find(std::string(type)) != service_types.end();
  }

  // Capacity for a resource; absent resources are unbounded.
  Capacity Resource(std::string_view resource) const;
};

struct Link {
  NodeId src = 0;
  NodeId dst = 0;
  ResourceMap resources;

  LinkKey key() const { return {src, dst}; }
  Capacity Resource(std::string_view resource) const;
};

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Directed network graph. Immutable once built; construct through
// TopologyBuilder or one of the loaders below.
class Topology {
 public:
  Topology() = default;

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }

  size_t num_nodes() const { return nodes_.size(); }
  size_t num_links() const { return links_.size(); }

  bool HasNode(NodeId id) const { return node_index_.count(id) > 0; }
  bool HasLink(NodeId src, NodeId dst) const {
    return link_index_.count({src, dst}) > 0;
  }

  // Throws TopologyError if absent.
  const Node& GetNode(NodeId id) const;
  const Link& GetLink(NodeId src, NodeId dst) const;

  // Outgoing neighbours of a node in ascending id order.
  const std::vector<NodeId>& Neighbors(NodeId id) const;

  // Ids of all nodes in ascending order.
  std::vector<NodeId> NodeIds() const;

 private:
  friend class TopologyBuilder;

  std::vector<Node> nodes_;  // sorted by id
  std::vector<Link> links_;  // sorted by (src, dst)
  std::unordered_map<NodeId, size_t> node_index_;
  std::unordered_map<LinkKey, size_t, LinkKeyHash> link_index_;
  std::vector<std::vector<NodeId>> adjacency_;  // parallel to nodes_
};

class TopologyBuilder {
 public:
  // Throws on duplicate id.
  TopologyBuilder& AddNode(Node node);

  // Adds a single directed link. Endpoints are checked in Build().
  TopologyBuilder& AddLink(Link link);

  // Adds the link in both directions with the same resources.
  TopologyBuilder& AddBidirectionalLink(NodeId a, NodeId b,
                                        const ResourceMap& resources = {});

  // Validates referential integrity, self loops, duplicate links and
  // negative capacities.
  Topology Build() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
};

// JSON topology document. Links in the document are undirected unless they
// carry "directed": true.
Topology LoadTopologyJson(std::string_view document);
Topology LoadTopologyFile(const std::string& path);

// Canonical form: nodes by id, symmetric link pairs collapsed to one
// undirected entry with src < dst, remaining links marked directed.
std::string SaveTopologyJson(const Topology& topo);

// Reads the node/edge subset of GraphML. Edge capacities come from the data
// key whose attr.name is "capacity"; edges without it get
// `default_capacity` as their "bandwidth" resource.
Topology LoadGraphMl(std::string_view document, double default_capacity);

// Three-tier k-ary fat-tree without hosts: (k/2)^2 core switches, and per
// pod k/2 aggregation plus k/2 edge switches. Every link gets
// `link_capacity` as its "bandwidth" resource. Node services are "switch"
// plus one of "core", "aggregation", "edge".
Topology FatTree(int k, double link_capacity = 1e9);

}  // namespace net
}  // namespace pathopt

#endif
