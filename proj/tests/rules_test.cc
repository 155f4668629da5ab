#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "json.hpp"
#include "pathopt/optimization.h"
#include "pathopt/rules.h"
#include "support/fixtures.h"

using namespace pathopt;
using namespace pathopt::rules;
using paths::AnnotatedPath;
using paths::PathSet;
using testing_support::Class;

namespace {

std::vector<std::string> Prefixes(const PrefixSplit& s, int path) {
  std::vector<std::string> out;
  for (const auto& share : s.shares) {
    if (share.path_index == path) out.push_back(share.prefix.ToString());
  }
  return out;
}

// every address of base lies in exactly one share
void ExpectExactCover(const PrefixSplit& s, const Cidr& base) {
  uint64_t covered = 0;
  for (size_t i = 0; i < s.shares.size(); ++i) {
    const Cidr& a = s.shares[i].prefix;
    EXPECT_TRUE(base.Contains(a.address()));
    EXPECT_GE(a.length(), base.length());
    covered += a.size();
    for (size_t j = i + 1; j < s.shares.size(); ++j) {
      const Cidr& b = s.shares[j].prefix;
      EXPECT_FALSE(a.Contains(b.address()) || b.Contains(a.address()))
          << a.ToString() << " overlaps " << b.ToString();
    }
  }
  EXPECT_EQ(covered, base.size());
}

}  // namespace

TEST(Cidr, ParseFormatContains) {
  Cidr c = Cidr::Parse("10.128.0.0/9");
  EXPECT_EQ(c.ToString(), "10.128.0.0/9");
  EXPECT_TRUE(c.Contains((10u << 24) | (200u << 16)));
  EXPECT_FALSE(c.Contains((10u << 24) | (1u << 16)));
  EXPECT_EQ(Cidr::Parse("0.0.0.0/0").size(), ~uint32_t{0});
  EXPECT_EQ(Cidr::Parse("10.0.0.0/8").Child(2, 3).ToString(), "10.192.0.0/10");
  EXPECT_THROW(Cidr::Parse("10.0.0.1/8"), RuleError);
  EXPECT_THROW(Cidr::Parse("10.0.0/8"), RuleError);
  EXPECT_THROW(Cidr::Parse("300.0.0.0/8"), RuleError);
  EXPECT_THROW(Cidr::Parse("10.0.0.0/33"), RuleError);
}

TEST(SplitPrefixes, ExactHalves) {
  const Cidr base = Cidr::Parse("10.0.0.0/8");
  PrefixSplit s = SplitPrefixes({{0, .5}, {1, .5}}, base);
  EXPECT_EQ(s.depth, 1);
  EXPECT_EQ(Prefixes(s, 0), std::vector<std::string>{"10.0.0.0/9"});
  EXPECT_EQ(Prefixes(s, 1), std::vector<std::string>{"10.128.0.0/9"});
}

TEST(SplitPrefixes, ThreeQuarters) {
  const Cidr base = Cidr::Parse("10.0.0.0/8");
  PrefixSplit s = SplitPrefixes({{0, .75}, {1, .25}}, base, 2);
  EXPECT_EQ(s.depth, 2);
  // two bits below /8: 10.0, 10.64, 10.128, 10.192
  std::vector<std::string> p0, p1;
  for (uint32_t i = 0; i < 4; ++i) {
    const std::string text = "10." + std::to_string(i * 64) + ".0.0/10";
    (i < 3 ? p0 : p1).push_back(text);
  }
  EXPECT_EQ(Prefixes(s, 0), p0);
  EXPECT_EQ(Prefixes(s, 1), p1);
  EXPECT_DOUBLE_EQ(s.Achieved()[0], .75);
}

TEST(SplitPrefixes, WholeBase) {
  const Cidr base = Cidr::Parse("10.1.2.0/24");
  PrefixSplit s = SplitPrefixes({{3, 1.0}}, base);
  EXPECT_EQ(s.depth, 0);
  ASSERT_EQ(s.shares.size(), 1u);
  EXPECT_EQ(s.shares[0].prefix, base);
  EXPECT_EQ(s.shares[0].path_index, 3);
}

TEST(SplitPrefixes, Errors) {
  const Cidr base = Cidr::Parse("10.0.0.0/8");
  EXPECT_THROW(SplitPrefixes({{0, .25}, {1, .25}, {2, .25}, {3, .25}}, base, 1), RuleError);
  EXPECT_THROW(SplitPrefixes({{0, .5}, {1, .4}}, base), RuleError);
  EXPECT_THROW(SplitPrefixes({{0, 1.2}, {1, -.2}}, base), RuleError);
  EXPECT_THROW(SplitPrefixes({{0, 1}}, base, -1), RuleError);
  EXPECT_THROW(SplitPrefixes({{0, .5}, {1, .5}}, Cidr::Parse("1.2.3.4/32")), RuleError);
}

TEST(SplitPrefixes, SliverIsDropped) {
  const Cidr base = Cidr::Parse("10.0.0.0/8");
  PrefixSplit s = SplitPrefixes({{0, 0.999}, {1, 0.001}}, base, 4);
  EXPECT_EQ(s.Achieved().count(1), 0u);
  EXPECT_DOUBLE_EQ(s.Achieved()[0], 1.0);
  ExpectExactCover(s, base);
}

TEST(SplitPrefixes, RandomFractionsProperties) {
  std::mt19937_64 rng(42);
  const Cidr base = Cidr::Parse("10.0.0.0/8");
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 6);
    const int max_depth = 3 + static_cast<int>(rng() % 6);
    std::vector<double> raw(k);
    double total = 0;
    for (double& r : raw) total += (r = 0.05 + std::uniform_real_distribution<>(0, 1)(rng));
    std::map<int, double> f;
    for (int p = 0; p < k; ++p) f[p] = raw[p] / total;
    PrefixSplit s = SplitPrefixes(f, base, max_depth);
    ExpectExactCover(s, base);
    EXPECT_LE(s.depth, max_depth);
    const double tol = std::ldexp(1.0, -s.depth);
    auto achieved = s.Achieved();
    double sum = 0;
    for (const auto& [p, target] : f) {
      sum += achieved[p];
      EXPECT_LE(std::abs(achieved[p] - target), tol + 1e-12) << trial;
    }
    EXPECT_NEAR(sum, 1, 1e-12);
    // each path gets a contiguous run in path order
    for (size_t i = 1; i < s.shares.size(); ++i) {
      EXPECT_LE(s.shares[i - 1].path_index, s.shares[i].path_index);
      EXPECT_LT(s.shares[i - 1].prefix.address(), s.shares[i].prefix.address());
    }
  }
}

TEST(SplitPrefixes, MinimalDepth) {
  const Cidr base = Cidr::Parse("10.0.0.0/8");
  EXPECT_EQ(SplitPrefixes({{0, .375}, {1, .625}}, base).depth, 3);
  EXPECT_EQ(SplitPrefixes({{0, .25}, {1, .25}, {2, .5}}, base).depth, 2);
  // a third is never exact
  EXPECT_EQ(SplitPrefixes({{0, 1.0 / 3}, {1, 2.0 / 3}}, base, 6).depth, 6);
}

TEST(DefaultPrefixes, FromClassId) {
  net::TrafficMatrix tm({Class(0, 0, 1, 1), Class(258, 0, 1, 1)});
  auto p = DefaultPrefixes(tm);
  EXPECT_EQ(p[0].src.ToString(), "10.0.0.0/24");
  EXPECT_EQ(p[258].src.ToString(), "10.1.2.0/24");
  EXPECT_EQ(p[258].dst.ToString(), "11.1.2.0/24");
  EXPECT_THROW(DefaultPrefixes(net::TrafficMatrix({Class(70000, 0, 1, 1)})), RuleError);
}

TEST(GenerateRules, SinglePathHasHopCountMinusOne) {
  net::TopologyBuilder b;
  for (int i = 0; i < 3; ++i) b.AddNode({i, std::string(1, 'A' + i), {"switch"}, {}});
  b.AddBidirectionalLink(0, 1, {});
  b.AddBidirectionalLink(1, 2, {});
  net::Topology t = b.Build();
  net::TrafficMatrix tm({Class(0, 0, 2, 1)});
  PathSet s;
  s.Set(0, {AnnotatedPath({0, 1, 2})});
  auto rules = GenerateRules(t, tm, s, {{0, {1.0}}}, DefaultPrefixes(tm));
  ASSERT_EQ(rules.size(), 2u);
  EXPECT_EQ(rules[0].node, 0);
  EXPECT_EQ(rules[0].next_hop, 1);
  EXPECT_EQ(rules[1].node, 1);
  EXPECT_EQ(rules[1].next_hop, 2);
  EXPECT_EQ(rules[0].src.ToString(), "10.0.0.0/24");
}

TEST(GenerateRules, DiamondHalves) {
  net::Topology t = testing_support::Diamond();
  net::TrafficMatrix tm({Class(0, 0, 3, 10)});
  PathSet s;
  s.Set(0, {AnnotatedPath({0, 1, 3}), AnnotatedPath({0, 2, 3})});
  auto rules = GenerateRules(t, tm, s, {{0, {.5, .5}}}, DefaultPrefixes(tm));
  // hand-built table
  const Cidr lo = Cidr::Parse("10.0.0.0/25"), hi = Cidr::Parse("10.0.0.128/25");
  const Cidr dst = Cidr::Parse("11.0.0.0/24");
  std::vector<FlowRule> expected{{0, lo, dst, 1, 0, 0}, {1, lo, dst, 3, 0, 0},
                                 {0, hi, dst, 2, 0, 1}, {2, hi, dst, 3, 0, 1}};
  std::sort(rules.begin(), rules.end());
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(rules, expected);
  // only the branching node holds two different next hops
  std::map<net::NodeId, std::set<net::NodeId>> hops;
  for (const auto& r : rules) hops[r.node].insert(r.next_hop);
  EXPECT_EQ(hops[0].size(), 2u);
  EXPECT_EQ(hops[1].size(), 1u);
  EXPECT_EQ(hops[2].size(), 1u);
}

TEST(GenerateRules, StarvedClassGetsNone) {
  net::Topology t = testing_support::Diamond();
  net::TrafficMatrix tm({Class(0, 0, 3, 10), Class(1, 0, 3, 10)});
  PathSet s;
  s.Set(0, {AnnotatedPath({0, 1, 3}), AnnotatedPath({0, 2, 3})});
  s.Set(1, {AnnotatedPath({0, 1, 3})});
  auto rules = GenerateRules(t, tm, s, {{0, {1, 0}}, {1, {0}}}, DefaultPrefixes(tm));
  EXPECT_EQ(rules.size(), 2u);
  for (const auto& r : rules) {
    EXPECT_EQ(r.class_id, 0);
    EXPECT_EQ(r.path_index, 0);
  }
}

TEST(GenerateRules, PartialFlowIsNormalized) {
  net::Topology t = testing_support::Diamond();
  net::TrafficMatrix tm({Class(0, 0, 3, 10)});
  PathSet s;
  s.Set(0, {AnnotatedPath({0, 1, 3}), AnnotatedPath({0, 2, 3})});
  auto rules = GenerateRules(t, tm, s, {{0, {.2, .2}}}, DefaultPrefixes(tm));
  EXPECT_EQ(rules.size(), 4u);
}

TEST(GenerateRules, Errors) {
  net::Topology t = testing_support::Diamond();
  net::TrafficMatrix tm({Class(0, 0, 3, 10)});
  PathSet s;
  s.Set(0, {AnnotatedPath({0, 1, 3})});
  EXPECT_THROW(GenerateRules(t, tm, s, {{0, {1.0}}}, {}), RuleError);
  EXPECT_THROW(GenerateRules(t, tm, s, {{0, {.5, .5}}}, DefaultPrefixes(tm)), RuleError);
  PathSet bad;
  bad.Set(0, {AnnotatedPath({0, 3})});
  EXPECT_THROW(GenerateRules(t, tm, bad, {{0, {1.0}}}, DefaultPrefixes(tm)), RuleError);
  lp::Solution empty;
  EXPECT_THROW(GenerateRules(t, tm, s, empty, DefaultPrefixes(tm)), RuleError);
}

TEST(Simulate, WalksReproduceAssignedPaths) {
  net::Topology t = net::FatTree(4);
  const auto gravity = net::GravityMatrix(t, 1e6, 3).classes();
  net::TrafficMatrix tm(std::vector<net::TrafficClass>(gravity.begin(), gravity.begin() + 12));
  PathSet sel = paths::SelectPaths(paths::GeneratePaths(t, tm, paths::NullPredicate(), {}, 1),
                                   paths::SelectionStrategy::kRandom, 4, 9);
  std::mt19937_64 rng(5);
  std::map<net::ClassId, std::vector<double>> fractions;
  for (const auto& tc : tm.classes()) {
    auto& xs = fractions[tc.id];
    double total = 0;
    for (size_t p = 0; p < sel.Get(tc.id).size(); ++p) {
      xs.push_back(std::uniform_real_distribution<>(0, 1)(rng));
      total += xs.back();
    }
    for (double& x : xs) x /= total;
  }
  const auto prefixes = DefaultPrefixes(tm);
  auto rules = GenerateRules(t, tm, sel, fractions, prefixes, 5);
  for (const auto& tc : tm.classes()) {
    std::map<int, double> share;
    for (size_t p = 0; p < fractions[tc.id].size(); ++p) share[p] = fractions[tc.id][p];
    const PrefixSplit split = SplitPrefixes(share, prefixes.at(tc.id).src, 5);
    for (const auto& s : split.shares) {
      // first, last and middle address of the sub-prefix
      for (uint32_t offset : {0u, s.prefix.size() / 2, s.prefix.size() - 1}) {
        auto walk = Simulate(rules, tc.ingress, tc.egress, s.prefix.address() + offset,
                             prefixes.at(tc.id).dst.address() + 7);
        EXPECT_EQ(walk, sel.Get(tc.id)[s.path_index].nodes()) << tc.id;
      }
    }
  }
  for (const auto& r : rules) EXPECT_TRUE(t.HasLink(r.node, r.next_hop));
}

TEST(RulesJson, RoundTripAndShape) {
  net::Topology t = testing_support::Diamond();
  net::TrafficMatrix tm({Class(0, 0, 3, 10)});
  PathSet s;
  s.Set(0, {AnnotatedPath({0, 1, 3}), AnnotatedPath({0, 2, 3})});
  auto rules = GenerateRules(t, tm, s, {{0, {.75, .25}}}, DefaultPrefixes(tm));
  const std::string text = RulesToJson(rules);
  EXPECT_EQ(RulesFromJson(text), rules);
  auto doc = nlohmann::json::parse(text);
  ASSERT_TRUE(doc.is_array());
  EXPECT_EQ(doc[0]["match"]["src"], rules[0].src.ToString());
  EXPECT_EQ(doc[0]["action"]["forward"], rules[0].next_hop);
  EXPECT_THROW(RulesFromJson("[{\"node\": 1}]"), RuleError);
  EXPECT_THROW(RulesFromJson("nope"), RuleError);
}

TEST(ControllerPayload, MockPushWritesRequestBody) {
  net::Topology t = testing_support::Diamond();
  net::TrafficMatrix tm({Class(0, 0, 3, 10)});
  PathSet s;
  s.Set(0, {AnnotatedPath({0, 1, 3})});
  auto rules = GenerateRules(t, tm, s, {{0, {1.0}}}, DefaultPrefixes(tm));
  const auto path = std::filesystem::temp_directory_path() / "pathopt_payload_test.json";
  MockController(path.string()).Push(t, rules);
  std::ifstream in(path);
  auto doc = nlohmann::json::parse(in);
  ASSERT_EQ(doc["flows"].size(), 2u);
  const auto& f = doc["flows"][0];
  EXPECT_EQ(f["switch"], "A");
  EXPECT_EQ(f["match"]["ipv4_src"], "10.0.0.0/24");
  EXPECT_EQ(f["match"]["ipv4_dst"], "11.0.0.0/24");
  EXPECT_EQ(f["actions"][0]["port"], 1);
  EXPECT_EQ(f["priority"], 1024);
  std::filesystem::remove(path);
}

TEST(RuleCounts, MatchTcamLoad) {
  // three arms between 0 and 4, two classes sharing them
  net::TopologyBuilder b;
  for (int i = 0; i < 5; ++i) b.AddNode({i, "n" + std::to_string(i), {"switch"}, {{"tcam", net::Capacity(2)}}});
  for (int m : {1, 2, 3}) {
    b.AddBidirectionalLink(0, m, {{"bandwidth", net::Capacity(10)}});
    b.AddBidirectionalLink(m, 4, {{"bandwidth", net::Capacity(10)}});
  }
  net::Topology t = b.Build();
  net::TrafficMatrix tm({Class(0, 0, 4, 12), Class(1, 0, 4, 9)});
  PathSet s;
  for (int c = 0; c < 2; ++c) {
    s.Set(c, {AnnotatedPath({0, 1, 4}), AnnotatedPath({0, 2, 4}), AnnotatedPath({0, 3, 4})});
  }
  opt::OptBuilder ob(t, tm, s);
  ob.AddBinaryVariables({opt::BinaryKind::kPath});
  ob.AddAllocateFlow();
  ob.AddRouteAll();
  opt::LinkCaps caps;
  for (const auto& l : t.links()) caps[l.key()] = 10;
  ob.AddLinkCapacity("bandwidth", caps, opt::DefaultLinkFn());
  std::map<net::NodeId, double> tcam;
  for (int v = 0; v < 5; ++v) tcam[v] = 4;
  ob.AddNodeCapacityPerPath("tcam", tcam,
                            [](net::NodeId, const net::TrafficClass&, const AnnotatedPath&,
                               std::string_view) { return 1.0; });
  ob.AddPathDisable();
  std::map<std::string, double> obj;
  for (int v = 0; v < 5; ++v) obj[opt::NlName(v, "tcam")] = 1;
  ob.SetObjective(obj, lp::Sense::kMinimize);
  lp::Solution sol = ob.Solve();
  ASSERT_TRUE(sol.optimal());
  auto rules = GenerateRules(t, tm, s, sol, DefaultPrefixes(tm));
  auto entries = PathEntryCounts(rules);
  for (int v = 0; v < 4; ++v) {
    const double nl = sol.ValueOr(opt::NlName(v, "tcam"), 0.0);
    EXPECT_EQ(entries.count(v) ? entries[v] : 0, static_cast<int>(std::lround(nl))) << v;
  }
  auto physical = RuleCounts(rules);
  for (const auto& [v, n] : entries) EXPECT_GE(physical[v], n);
}
