#include "pathopt/rules.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <tuple>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "pathopt/optimization.h"

namespace pathopt {
namespace rules {

using json = nlohmann::ordered_json;

namespace {

uint32_t Mask(int length) {
  return length == 0 ? 0 : ~uint32_t{0} << (32 - length);
}

constexpr double kExactTol = 1e-6;

}  // namespace

Cidr::Cidr(uint32_t address, int length) : address_(address), length_(length) {
  if (length < 0 || length > 32) {
    throw RuleError("prefix length " + std::to_string(length) + " out of range");
  }
  if ((address & ~Mask(length)) != 0) {
    throw RuleError("host bits set in " + FormatAddress(address) + "/" +
                    std::to_string(length));
  }
}

Cidr Cidr::Parse(std::string_view text) {
  const std::string s(text);
  unsigned a, b, c, d;
  int len;
  char tail;
  if (std::sscanf(s.c_str(), "%u.%u.%u.%u/%d%c", &a, &b, &c, &d, &len, &tail) != 5 ||
      a > 255 || b > 255 || c > 255 || d > 255) {
    throw RuleError("malformed prefix '" + s + "'");
  }
  return Cidr((a << 24) | (b << 16) | (c << 8) | d, len);
}

bool Cidr::Contains(uint32_t address) const {
  return (address & Mask(length_)) == address_;
}

Cidr Cidr::Child(int extra, uint32_t index) const {
  if (extra < 0 || length_ + extra > 32) throw RuleError("prefix split too deep");
  if (extra < 32 && index >= (uint64_t{1} << extra)) throw RuleError("sub-prefix index out of range");
  if (extra == 0) return *this;
  const int shift = 32 - length_ - extra;
  return Cidr(address_ | (index << shift), length_ + extra);
}

uint32_t Cidr::size() const {
  return length_ == 0 ? ~uint32_t{0} : uint32_t{1} << (32 - length_);
}

std::string FormatAddress(uint32_t a) {
  return std::to_string(a >> 24) + "." + std::to_string((a >> 16) & 255) + "." +
         std::to_string((a >> 8) & 255) + "." + std::to_string(a & 255);
}

std::string Cidr::ToString() const {
  return FormatAddress(address_) + "/" + std::to_string(length_);
}

std::map<int, double> PrefixSplit::Achieved() const {
  std::map<int, double> out;
  for (const PrefixShare& s : shares) out[s.path_index] += s.fraction;
  return out;
}

PrefixSplit SplitPrefixes(const std::map<int, double>& fractions, const Cidr& base,
                          int max_depth) {
  if (max_depth < 0) throw RuleError("negative split depth");
  double total = 0;
  for (const auto& [p, f] : fractions) {
    if (!std::isfinite(f) || f < -kExactTol) {
      throw RuleError("invalid fraction for path " + std::to_string(p));
    }
    total += std::max(f, 0.0);
  }
  if (std::abs(total - 1) > kExactTol) {
    throw RuleError("fractions sum to " + std::to_string(total) + ", not 1");
  }

  const double sliver = std::ldexp(1.0, -max_depth) / 2;
  std::map<int, double> target;
  double kept = 0;
  for (const auto& [p, f] : fractions) {
    if (f <= kExactTol * 1e-3) continue;
    if (f < sliver) {
      spdlog::warn("path {} fraction {:.3g} is below the split resolution; dropped", p, f);
      continue;
    }
    target[p] = f;
    kept += f;
  }
  for (auto& [p, f] : target) f /= kept;

  const size_t k = target.size();
  int depth = 0;
  while ((size_t{1} << depth) < k) ++depth;
  if (depth > max_depth) {
    throw RuleError(std::to_string(k) + " paths cannot be split within depth " +
                    std::to_string(max_depth));
  }
  for (;; ++depth) {
    const double slots = std::ldexp(1.0, depth);
    bool exact = true;
    for (const auto& [p, f] : target) {
      if (std::abs(f * slots - std::round(f * slots)) > kExactTol * slots) exact = false;
    }
    if (exact || depth == max_depth) break;
  }
  if (base.length() + depth > 32) throw RuleError("split exceeds 32 prefix bits");

  const int slots = 1 << depth;
  std::map<int, int> count;
  for (int s = 0; s < slots; ++s) {
    int best = -1;
    double best_rem = -lp::kInfinity;
    for (const auto& [p, f] : target) {
      const double rem = f - static_cast<double>(count[p]) / slots;
      if (rem > best_rem + 1e-12) {
        best = p;
        best_rem = rem;
      }
    }
    ++count[best];
  }

  PrefixSplit out;
  out.depth = depth;
  uint32_t next = 0;
  const double unit = 1.0 / slots;
  for (const auto& [p, n] : count) {
    for (int i = 0; i < n; ++i) out.shares.push_back({base.Child(depth, next++), p, unit});
  }
  return out;
}

std::map<ClassId, ClassPrefixes> DefaultPrefixes(const net::TrafficMatrix& tm) {
  std::map<ClassId, ClassPrefixes> out;
  for (const net::TrafficClass& tc : tm.classes()) {
    if (tc.id < 0 || tc.id > 0xffff) {
      throw RuleError("class id " + std::to_string(tc.id) + " has no default prefix");
    }
    const uint32_t low = static_cast<uint32_t>(tc.id) << 8;
    out[tc.id] = {Cidr((10u << 24) | low, 24), Cidr((11u << 24) | low, 24)};
  }
  return out;
}

std::vector<FlowRule> GenerateRules(const net::Topology& topo, const net::TrafficMatrix& tm,
                                    const paths::PathSet& selected,
                                    const std::map<ClassId, std::vector<double>>& fractions,
                                    const std::map<ClassId, ClassPrefixes>& prefixes,
                                    int max_depth) {
  std::vector<FlowRule> out;
  for (const net::TrafficClass& tc : tm.classes()) {
    auto pf = prefixes.find(tc.id);
    if (pf == prefixes.end()) {
      throw RuleError("no prefixes for class " + std::to_string(tc.id));
    }
    auto fr = fractions.find(tc.id);
    if (fr == fractions.end()) continue;
    const auto& list = selected.Get(tc.id);
    if (fr->second.size() != list.size()) {
      throw RuleError("fractions of class " + std::to_string(tc.id) +
                      " do not match its paths");
    }
    double total = 0;
    for (double x : fr->second) total += std::max(x, 0.0);
    if (total <= 1e-9) continue;
    std::map<int, double> share;
    for (size_t p = 0; p < list.size(); ++p) {
      if (fr->second[p] > 0) share[static_cast<int>(p)] = fr->second[p] / total;
    }
    const PrefixSplit split = SplitPrefixes(share, pf->second.src, max_depth);
    for (const PrefixShare& s : split.shares) {
      const auto& nodes = list[s.path_index].nodes();
      for (size_t i = 0; i + 1 < nodes.size(); ++i) {
        if (!topo.HasLink(nodes[i], nodes[i + 1])) {
          throw RuleError("path of class " + std::to_string(tc.id) +
                          " uses a missing link");
        }
        out.push_back({nodes[i], s.prefix, pf->second.dst, nodes[i + 1], tc.id,
                       s.path_index});
      }
    }
  }
  return out;
}

std::vector<FlowRule> GenerateRules(const net::Topology& topo, const net::TrafficMatrix& tm,
                                    const paths::PathSet& selected,
                                    const lp::Solution& solution,
                                    const std::map<ClassId, ClassPrefixes>& prefixes,
                                    int max_depth) {
  if (!solution.has_values()) throw RuleError("solution carries no values");
  std::map<ClassId, std::vector<double>> fractions;
  for (const net::TrafficClass& tc : tm.classes()) {
    const int count = static_cast<int>(selected.Get(tc.id).size());
    auto& list = fractions[tc.id];
    for (int p = 0; p < count; ++p) {
      list.push_back(solution.ValueOr(opt::XpName(tc.id, p), 0.0));
    }
  }
  return GenerateRules(topo, tm, selected, fractions, prefixes, max_depth);
}

std::map<NodeId, int> RuleCounts(const std::vector<FlowRule>& rules) {
  std::map<NodeId, int> out;
  for (const FlowRule& r : rules) ++out[r.node];
  return out;
}

std::map<NodeId, int> PathEntryCounts(const std::vector<FlowRule>& rules) {
  std::set<std::tuple<NodeId, ClassId, int>> seen;
  for (const FlowRule& r : rules) seen.insert({r.node, r.class_id, r.path_index});
  std::map<NodeId, int> out;
  for (const auto& [node, cid, p] : seen) ++out[node];
  return out;
}

std::vector<NodeId> Simulate(const std::vector<FlowRule>& rules, NodeId ingress,
                             NodeId egress, uint32_t src, uint32_t dst) {
  std::map<NodeId, std::vector<const FlowRule*>> table;
  for (const FlowRule& r : rules) table[r.node].push_back(&r);
  std::vector<NodeId> walk{ingress};
  std::set<NodeId> seen{ingress};
  NodeId at = ingress;
  while (at != egress) {
    const FlowRule* hit = nullptr;
    for (const FlowRule* r : table[at]) {
      if (!r->src.Contains(src) || !r->dst.Contains(dst)) continue;
      if (!hit || r->src.length() > hit->src.length() ||
          (r->src.length() == hit->src.length() && r->dst.length() > hit->dst.length())) {
        hit = r;
      }
    }
    if (!hit) break;
    at = hit->next_hop;
    walk.push_back(at);
    if (!seen.insert(at).second) break;
  }
  return walk;
}

std::string RulesToJson(const std::vector<FlowRule>& rules) {
  json doc = json::array();
  for (const FlowRule& r : rules) {
    doc.push_back({{"node", r.node},
                   {"match", {{"src", r.src.ToString()}, {"dst", r.dst.ToString()}}},
                   {"action", {{"forward", r.next_hop}}},
                   {"class", r.class_id},
                   {"path", r.path_index}});
  }
  return doc.dump(2);
}

std::vector<FlowRule> RulesFromJson(std::string_view document) {
  std::vector<FlowRule> out;
  try {
    const json doc = json::parse(document);
    for (const json& j : doc) {
      FlowRule r;
      r.node = j.at("node").get<NodeId>();
      r.src = Cidr::Parse(j.at("match").at("src").get<std::string>());
      r.dst = Cidr::Parse(j.at("match").at("dst").get<std::string>());
      r.next_hop = j.at("action").at("forward").get<NodeId>();
      r.class_id = j.value("class", 0);
      r.path_index = j.value("path", 0);
      out.push_back(r);
    }
  } catch (const json::exception& e) {
    throw RuleError(std::string("bad rules document: ") + e.what());
  }
  return out;
}

std::string ControllerPayload(const net::Topology& topo, const std::vector<FlowRule>& rules) {
  json flows = json::array();
  for (const FlowRule& r : rules) {
    flows.push_back(
        {{"switch", topo.HasNode(r.node) ? topo.GetNode(r.node).name : std::to_string(r.node)},
         {"dpid", r.node},
         {"priority", 1000 + r.src.length()},
         {"match",
          {{"eth_type", 2048}, {"ipv4_src", r.src.ToString()}, {"ipv4_dst", r.dst.ToString()}}},
         {"actions", json::array({{{"type", "OUTPUT"}, {"port", r.next_hop}}})},
         {"cookie", (static_cast<uint64_t>(r.class_id) << 16) | static_cast<uint64_t>(r.path_index)}});
  }
  json doc;
  doc["flows"] = std::move(flows);
  return doc.dump(2);
}

void MockController::Push(const net::Topology& topo, const std::vector<FlowRule>& rules) const {
  std::ofstream out(path_);
  if (!out) throw RuleError("cannot write " + path_);
  out << ControllerPayload(topo, rules) << "\n";
  spdlog::info("pushed {} flow entries to {}", rules.size(), path_);
}

}  // namespace rules
}  // namespace pathopt
