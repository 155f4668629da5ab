#ifndef PATHOPT_TESTS_FIXTURES_H
#define PATHOPT_TESTS_FIXTURES_H

#include <fstream>
#include <sstream>
#include <string>

#include "pathopt/topology.h"
#include "pathopt/traffic.h"

namespace testing_support {

inline std::string DataPath(const std::string& name) {
  return std::string(PATHOPT_TEST_DATA) + "/" + name;
}

inline std::string ReadData(const std::string& name) {
  std::ifstream in(DataPath(name));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline pathopt::net::Topology LoadTopo(const std::string& name) {
  return pathopt::net::LoadTopologyFile(DataPath(name));
}

inline pathopt::net::TrafficMatrix LoadTm(const std::string& name) {
  return pathopt::net::LoadTrafficFile(DataPath(name));
}

// A=0 B=1 C=2 D=3, arms A-B-D and A-C-D, bandwidth 10 both ways.
inline pathopt::net::Topology Diamond(double cap = 10) {
  pathopt::net::TopologyBuilder b;
  for (int i = 0; i < 4; ++i) {
    b.AddNode({i, std::string(1, static_cast<char>('A' + i)), {"switch"}, {}});
  }
  pathopt::net::ResourceMap r{{"bandwidth", pathopt::net::Capacity(cap)}};
  b.AddBidirectionalLink(0, 1, r);
  b.AddBidirectionalLink(0, 2, r);
  b.AddBidirectionalLink(1, 3, r);
  b.AddBidirectionalLink(2, 3, r);
  return b.Build();
}

inline pathopt::net::TrafficClass Class(int id, int in, int out, double bytes,
                                        double flows = -1) {
  pathopt::net::TrafficClass tc;
  tc.id = id;
  tc.ingress = in;
  tc.egress = out;
  tc.vol_bytes = bytes;
  tc.vol_flows = flows < 0 ? bytes : flows;
  return tc;
}

}  // namespace testing_support

#endif
