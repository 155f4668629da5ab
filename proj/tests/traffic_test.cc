#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pathopt/traffic.h"
#include "support/fixtures.h"

using namespace pathopt::net;

namespace {

Topology Nodes(int n) {
  TopologyBuilder b;
  for (int i = 0; i < n; ++i) b.AddNode({i, "n" + std::to_string(i), {"switch"}, {}});
  return b.Build();
}

double Sum(const TrafficMatrix& tm) {
  double s = 0;
  for (const auto& tc : tm.classes()) s += tc.vol_bytes;
  return s;
}

}  // namespace

TEST(Gravity, TwoNodesNormalize) {
  TrafficMatrix tm = GravityMatrix(Nodes(2), 100, 3);
  ASSERT_EQ(tm.size(), 2u);
  EXPECT_NEAR(Sum(tm), 100, 1e-9 * 100);
}

TEST(Gravity, Deterministic) {
  Topology t = Nodes(6);
  EXPECT_EQ(SaveTrafficJson(GravityMatrix(t, 1e6, 42)), SaveTrafficJson(GravityMatrix(t, 1e6, 42)));
  EXPECT_NE(SaveTrafficJson(GravityMatrix(t, 1e6, 42)), SaveTrafficJson(GravityMatrix(t, 1e6, 43)));
}

TEST(Gravity, FourNodesSeedSevenMatchesFrozenFixture) {
  TrafficMatrix tm = GravityMatrix(Nodes(4), 1000, 7);
  TrafficMatrix frozen = testing_support::LoadTm("gravity4_seed7.json");
  ASSERT_EQ(tm.size(), 12u);
  ASSERT_EQ(frozen.size(), 12u);
  for (size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(tm.classes()[i].ingress, frozen.classes()[i].ingress);
    EXPECT_EQ(tm.classes()[i].egress, frozen.classes()[i].egress);
    EXPECT_NEAR(tm.classes()[i].vol_bytes, frozen.classes()[i].vol_bytes, 1e-9);
  }
}

TEST(Gravity, VolumesFollowPopulationProducts) {
  // Recompute the model from the population draws directly.
  const uint64_t seed = 19;
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> dist(0.0, 1.0);
  std::vector<double> pop(5);
  for (double& p : pop) p = dist(rng);
  double z = 0;
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      if (a != b) z += pop[a] * pop[b];
  TrafficMatrix tm = GravityMatrix(Nodes(5), 500, seed);
  for (const auto& tc : tm.classes()) {
    EXPECT_NEAR(tc.vol_bytes, 500 * pop[tc.ingress] * pop[tc.egress] / z, 1e-9);
    EXPECT_GE(tc.vol_bytes, 0);
    EXPECT_NEAR(tc.vol_flows, tc.vol_bytes / kDefaultBytesPerFlow, 1e-12);
  }
  EXPECT_NEAR(Sum(tm), 500, 500 * 1e-9);
}

TEST(Gravity, Errors) {
  EXPECT_THROW(GravityMatrix(Nodes(1), 10, 1), TrafficError);
  EXPECT_THROW(GravityMatrix(Nodes(3), 0, 1), TrafficError);
}

TEST(Uniform, FatTreeEdgePairs) {
  TrafficMatrix tm = UniformMatrix(FatTree(4), 10);
  EXPECT_EQ(tm.size(), 56u);
  for (const auto& tc : tm.classes()) EXPECT_DOUBLE_EQ(tc.vol_bytes, 10);
}

TEST(Uniform, ZeroVolumeAndSingleSwitch) {
  TrafficMatrix tm = UniformMatrix(FatTree(2), 0);
  for (const auto& tc : tm.classes()) EXPECT_EQ(tc.vol_bytes, 0);
  EXPECT_TRUE(UniformMatrix(Nodes(1), 5).empty());
}

TEST(TrafficFile, RoundTripAndValidation) {
  TrafficMatrix tm = testing_support::LoadTm("simple_chain_traffic.json");
  EXPECT_EQ(tm.size(), 4u);
  EXPECT_EQ(tm.Get(0).chain, (std::vector<std::string>{"fw", "ids"}));
  EXPECT_EQ(SaveTrafficJson(LoadTrafficJson(SaveTrafficJson(tm))), SaveTrafficJson(tm));
  EXPECT_THROW(LoadTrafficJson(R"([{"id":0,"ingress":1,"egress":1}])"), TrafficError);
  EXPECT_THROW(LoadTrafficJson(R"([{"id":0,"ingress":0,"egress":1},{"id":0,"ingress":1,"egress":0}])"),
               TrafficError);
  EXPECT_THROW(LoadTrafficJson(R"([{"id":0,"ingress":0,"egress":1,"vol_bytes":-3}])"), TrafficError);
  EXPECT_THROW(LoadTrafficJson("{}"), TrafficError);
}
