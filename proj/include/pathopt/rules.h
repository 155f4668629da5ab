#ifndef PATHOPT_RULES_H
#define PATHOPT_RULES_H

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pathopt/paths.h"
#include "pathopt/solver.h"
#include "pathopt/topology.h"
#include "pathopt/traffic.h"

namespace pathopt {
namespace rules {

using net::ClassId;
using net::NodeId;

class RuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// IPv4 prefix. Host bits are always zero.
class Cidr {
 public:
  Cidr() = default;
  // Throws RuleError on a bad length or non-zero host bits.
  Cidr(uint32_t address, int length);

  // "a.b.c.d/len"
  static Cidr Parse(std::string_view text);

  uint32_t address() const { return address_; }
  int length() const { return length_; }
  bool Contains(uint32_t address) const;
  // i-th of the 2^extra equal sub-prefixes.
  Cidr Child(int extra, uint32_t index) const;
  uint32_t size() const;  // addresses covered, saturating at 2^32 - 1

  std::string ToString() const;

  friend auto operator<=>(const Cidr&, const Cidr&) = default;

 private:
  uint32_t address_ = 0;
  int length_ = 0;
};

std::string FormatAddress(uint32_t address);

struct PrefixShare {
  Cidr prefix;
  int path_index = 0;
  double fraction = 0;  // of the base prefix
};

struct PrefixSplit {
  int depth = 0;
  std::vector<PrefixShare> shares;  // ascending prefix order

  // Achieved fraction per path index.
  std::map<int, double> Achieved() const;
};

inline constexpr int kDefaultMaxDepth = 8;

// Splits `base` into 2^d equal sub-prefixes. d is the smallest depth at
// which every fraction is represented exactly, else max_depth. Slots go
// greedily to the path with the largest remaining fraction; each path then
// gets a contiguous run, in path order. Fractions below 2^-max_depth / 2
// are dropped and the rest renormalized.
PrefixSplit SplitPrefixes(const std::map<int, double>& fractions, const Cidr& base,
                          int max_depth = kDefaultMaxDepth);

struct FlowRule {
  NodeId node = 0;
  Cidr src;
  Cidr dst;
  NodeId next_hop = 0;
  ClassId class_id = 0;
  int path_index = 0;

  friend auto operator<=>(const FlowRule&, const FlowRule&) = default;
};

struct ClassPrefixes {
  Cidr src;
  Cidr dst;
};

// src 10.h.l.0/24 and dst 11.h.l.0/24 from the class id.
std::map<ClassId, ClassPrefixes> DefaultPrefixes(const net::TrafficMatrix& tm);

// Per class, splits the source prefix over the positive path fractions
// (normalized by their sum) and emits one rule per non-terminal node of each
// assigned path. Classes carrying no flow get no rules.
std::vector<FlowRule> GenerateRules(const net::Topology& topo,
                                    const net::TrafficMatrix& tm,
                                    const paths::PathSet& selected,
                                    const std::map<ClassId, std::vector<double>>& fractions,
                                    const std::map<ClassId, ClassPrefixes>& prefixes,
                                    int max_depth = kDefaultMaxDepth);

// Same, reading x values from a solution.
std::vector<FlowRule> GenerateRules(const net::Topology& topo,
                                    const net::TrafficMatrix& tm,
                                    const paths::PathSet& selected,
                                    const lp::Solution& solution,
                                    const std::map<ClassId, ClassPrefixes>& prefixes,
                                    int max_depth = kDefaultMaxDepth);

// Rules per node.
std::map<NodeId, int> RuleCounts(const std::vector<FlowRule>& rules);
// Distinct (class, path) pairs per node; a path split over several
// sub-prefixes counts once.
std::map<NodeId, int> PathEntryCounts(const std::vector<FlowRule>& rules);

// Follows rules hop by hop from `ingress`, using the most specific source
// match at each node. Stops at `egress`, at a node without a matching rule,
// or on a revisit.
std::vector<NodeId> Simulate(const std::vector<FlowRule>& rules, NodeId ingress,
                             NodeId egress, uint32_t src, uint32_t dst);

// [{node, match:{src,dst}, action:{forward}, class, path}]
std::string RulesToJson(const std::vector<FlowRule>& rules);
std::vector<FlowRule> RulesFromJson(std::string_view document);

// Flow-programming request body as a controller REST API would take it:
// {"flows": [{"switch", "priority", "match": {...}, "actions": [...]}]}.
std::string ControllerPayload(const net::Topology& topo, const std::vector<FlowRule>& rules);

// Stand-in controller client: "pushes" a payload by writing it to a file.
class MockController {
 public:
  explicit MockController(std::string path) : path_(std::move(path)) {}
  void Push(const net::Topology& topo, const std::vector<FlowRule>& rules) const;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace rules
}  // namespace pathopt

#endif
