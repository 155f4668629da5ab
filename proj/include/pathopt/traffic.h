#ifndef PATHOPT_TRAFFIC_H
#define PATHOPT_TRAFFIC_H

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pathopt/topology.h"

namespace pathopt {
namespace net {

using ClassId = int;

struct TrafficClass {
  ClassId id = 0;
  NodeId ingress = 0;
  NodeId egress = 0;
  double vol_flows = 0;  // flows/sec
  double vol_bytes = 0;  // bytes/sec
  double cpu_cost = 1;   // abstract CPU units per flow
  std::vector<std::string> chain;  // required service types, in order
  double priority = 1;

  friend bool operator==(const TrafficClass&, const TrafficClass&) = default;
};

class TrafficError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrafficMatrix {
 public:
  TrafficMatrix() = default;

  // Validates ids, endpoints and volumes.
  explicit TrafficMatrix(std::vector<TrafficClass> classes);

  const std::vector<TrafficClass>& classes() const { return classes_; }
  size_t size() const { return classes_.size(); }
  bool empty() const { return classes_.empty(); }

  // Throws TrafficError if absent.
  const TrafficClass& Get(ClassId id) const;

  // Checks that every ingress/egress exists in `topo`.
  void CheckAgainst(const Topology& topo) const;

 private:
  std::vector<TrafficClass> classes_;  // sorted by id
};

// Bytes per flow used to derive vol_flows from vol_bytes in the generators.
inline constexpr double kDefaultBytesPerFlow = 1000.0;

struct GravityOptions {
  double lognormal_mu = 0.0;
  double lognormal_sigma = 1.0;
  double bytes_per_flow = kDefaultBytesPerFlow;
};

// One class per ordered node pair, volume proportional to the product of
// log-normally distributed node populations and normalized to
// `total_volume`.
TrafficMatrix GravityMatrix(const Topology& topo, double total_volume,
                            uint64_t seed, const GravityOptions& options = {});

// One class per ordered pair of edge switches (nodes with the "edge"
// service); when no node carries it, every node counts as an edge switch.
TrafficMatrix UniformMatrix(const Topology& topo, double per_pair_volume,
                            double bytes_per_flow = kDefaultBytesPerFlow);

TrafficMatrix LoadTrafficJson(std::string_view document);
TrafficMatrix LoadTrafficFile(const std::string& path);
std::string SaveTrafficJson(const TrafficMatrix& tm);

}  // namespace net
}  // namespace pathopt

#endif
