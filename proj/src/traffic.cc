#include "pathopt/traffic.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace pathopt {
namespace net {

using nlohmann::json;

TrafficMatrix::TrafficMatrix(std::vector<TrafficClass> classes)
    : classes_(std::move(classes)) {
  std::sort(classes_.begin(), classes_.end(),
            [](const TrafficClass& a, const TrafficClass& b) {
              return a.id < b.id;
            });
  for (size_t i = 0; i < classes_.size(); ++i) {
    const TrafficClass& tc = classes_[i];
    std::string where = "traffic class " + std::to_string(tc.id);
    if (i > 0 && classes_[i - 1].id == tc.id) {
      throw TrafficError("duplicate " + where);
    }
    if (tc.ingress == tc.egress) {
      throw TrafficError(where + " has ingress == egress");
    }
    if (!(tc.vol_flows >= 0) || !(tc.vol_bytes >= 0) || !(tc.cpu_cost >= 0) ||
        !(tc.priority >= 0)) {
      throw TrafficError(where + " has a negative volume or cost");
    }
  }
}

const TrafficClass& TrafficMatrix::Get(ClassId id) const {
  auto it = std::lower_bound(
      classes_.begin(), classes_.end(), id,
      [](const TrafficClass& tc, ClassId value) { return tc.id < value; });
  if (it == classes_.end() || it->id != id) {
    throw TrafficError("unknown traffic class " + std::to_string(id));
  }
  return *it;
}

void TrafficMatrix::CheckAgainst(const Topology& topo) const {
  for (const TrafficClass& tc : classes_) {
    if (!topo.HasNode(tc.ingress) || !topo.HasNode(tc.egress)) {
      throw TrafficError("traffic class " + std::to_string(tc.id) +
                         " references a node outside the topology");
    }
  }
}

TrafficMatrix GravityMatrix(const Topology& topo, double total_volume,
                            uint64_t seed, const GravityOptions& options) {
  if (topo.num_nodes() < 2) {
    throw TrafficError("gravity model needs at least 2 nodes");
  }
  if (!(total_volume > 0)) {
    throw TrafficError("gravity model needs a positive total volume");
  }
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> dist(options.lognormal_mu,
                                           options.lognormal_sigma);
  std::vector<NodeId> ids = topo.NodeIds();
  std::vector<double> population(ids.size());
  for (double& p : population) p = dist(rng);

  double normalizer = 0;
  for (size_t a = 0; a < ids.size(); ++a) {
    for (size_t b = 0; b < ids.size(); ++b) {
      if (a != b) normalizer += population[a] * population[b];
    }
  }

  std::vector<TrafficClass> classes;
  for (size_t a = 0; a < ids.size(); ++a) {
    for (size_t b = 0; b < ids.size(); ++b) {
      if (a == b) continue;
      TrafficClass tc;
      tc.id = static_cast<ClassId>(classes.size());
      tc.ingress = ids[a];
      tc.egress = ids[b];
      tc.vol_bytes =
          total_volume * population[a] * population[b] / normalizer;
      tc.vol_flows = tc.vol_bytes / options.bytes_per_flow;
      classes.push_back(std::move(tc));
    }
  }
  return TrafficMatrix(std::move(classes));
}

TrafficMatrix UniformMatrix(const Topology& topo, double per_pair_volume,
                            double bytes_per_flow) {
  if (!(per_pair_volume >= 0)) {
    throw TrafficError("uniform volume must be non-negative");
  }
  std::vector<NodeId> edges;
  for (const Node& node : topo.nodes()) {
    if (node.HasService("edge")) edges.push_back(node.id);
  }
  if (edges.empty()) edges = topo.NodeIds();

  std::vector<TrafficClass> classes;
  for (NodeId src : edges) {
    for (NodeId dst : edges) {
      if (src == dst) continue;
      TrafficClass tc;
      tc.id = static_cast<ClassId>(classes.size());
      tc.ingress = src;
      tc.egress = dst;
      tc.vol_bytes = per_pair_volume;
      tc.vol_flows = per_pair_volume / bytes_per_flow;
      classes.push_back(std::move(tc));
    }
  }
  return TrafficMatrix(std::move(classes));
}

TrafficMatrix LoadTrafficJson(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw TrafficError(std::string("traffic parse failure: ") + e.what());
  }
  if (!doc.is_array()) {
    throw TrafficError("traffic document must be a JSON array");
  }
  std::vector<TrafficClass> classes;
  try {
    for (const json& jc : doc) {
      TrafficClass tc;
      tc.id = jc.at("id").get<ClassId>();
      tc.ingress = jc.at("ingress").get<NodeId>();
      tc.egress = jc.at("egress").get<NodeId>();
      tc.vol_bytes = jc.value("vol_bytes", 0.0);
      tc.vol_flows =
          jc.value("vol_flows", tc.vol_bytes / kDefaultBytesPerFlow);
      tc.cpu_cost = jc.value("cpu_cost", 1.0);
      tc.chain = jc.value("chain", std::vector<std::string>{});
      tc.priority = jc.value("priority", 1.0);
      classes.push_back(std::move(tc));
    }
  } catch (const json::exception& e) {
    throw TrafficError(std::string("malformed traffic document: ") +
                       e.what());
  }
  return TrafficMatrix(std::move(classes));
}

TrafficMatrix LoadTrafficFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TrafficError("cannot open traffic file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return LoadTrafficJson(buffer.str());
}

std::string SaveTrafficJson(const TrafficMatrix& tm) {
  json doc = json::array();
  for (const TrafficClass& tc : tm.classes()) {
    doc.push_back({{"id", tc.id},
                   {"ingress", tc.ingress},
                   {"egress", tc.egress},
                   {"vol_flows", tc.vol_flows},
                   {"vol_bytes", tc.vol_bytes},
                   {"cpu_cost", tc.cpu_cost},
                   {"chain", tc.chain},
                   {"priority", tc.priority}});
  }
  return doc.dump(2);
}

}  // namespace net
}  // namespace pathopt
