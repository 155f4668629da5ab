#include "pathopt/topology.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "json.hpp"

namespace pathopt {
namespace net {

using nlohmann::json;

namespace {

Capacity LookupResource(const ResourceMap& resources,
                        std::string_view resource) {
  auto it = resources.find(std::string(resource));
  if (it == resources.end()) return Capacity::Unbounded();
  return it->second;
}

void CheckCapacities(const ResourceMap& resources, const std::string& where) {
  for (const auto& [name, cap] : resources) {
    if (cap.tba()) continue;
    if (std::isnan(cap.value()) || cap.value() < 0) {
      throw TopologyError("negative capacity for resource '" + name +
                          "' on " + where);
    }
  }
}

ResourceMap ParseResources(const json& obj, bool allow_tba,
                           const std::string& where) {
  ResourceMap out;
  if (obj.is_null()) return out;
  if (!obj.is_object()) {
    throw TopologyError("resources of " + where + " must be an object");
  }
  for (const auto& [name, value] : obj.items()) {
    if (value.is_string()) {
      if (!allow_tba || value.get<std::string>() != "TBA") {
        throw TopologyError("invalid capacity for '" + name + "' on " + where);
      }
      out.emplace(name, Capacity::ToBeAllocated());
    } else if (value.is_number()) {
      out.emplace(name, Capacity(value.get<double>()));
    } else {
      throw TopologyError("invalid capacity for '" + name + "' on " + where);
    }
  }
  return out;
}

json ResourcesToJson(const ResourceMap& resources) {
  json out = json::object();
  for (const auto& [name, cap] : resources) {
    if (cap.tba()) {
      out[name] = "TBA";
    } else if (!cap.unbounded()) {
      out[name] = cap.value();
    }
  }
  return out;
}

std::string LinkName(NodeId src, NodeId dst) {
  return "link (" + std::to_string(src) + "," + std::to_string(dst) + ")";
}

}  // namespace

Capacity Node::Resource(std::string_view resource) const {
  return LookupResource(resources, resource);
}

Capacity Link::Resource(std::string_view resource) const {
  return LookupResource(resources, resource);
}

const Node& Topology::GetNode(NodeId id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) {
    throw TopologyError("unknown node " + std::to_string(id));
  }
  return nodes_[it->second];
}

const Link& Topology::GetLink(NodeId src, NodeId dst) const {
  auto it = link_index_.find({src, dst});
  if (it == link_index_.end()) {
    throw TopologyError("unknown " + LinkName(src, dst));
  }
  return links_[it->second];
}

const std::vector<NodeId>& Topology::Neighbors(NodeId id) const {
  auto it = node_index_.find(id);
  if (it == node_index_.end()) {
    throw TopologyError("unknown node " + std::to_string(id));
  }
  return adjacency_[it->second];
}

std::vector<NodeId> Topology::NodeIds() const {
  std::vector<NodeId> out;
  out.reserve(nodes_.size());
  for (const Node& node : nodes_) out.push_back(node.id);
  return out;
}

TopologyBuilder& TopologyBuilder::AddNode(Node node) {
  for (const Node& existing : nodes_) {
    if (existing.id == node.id) {
      throw TopologyError("duplicate node id " + std::to_string(node.id));
    }
  }
  nodes_.push_back(std::move(node));
  return *this;
}

TopologyBuilder& TopologyBuilder::AddLink(Link link) {
  links_.push_back(std::move(link));
  return *this;
}

TopologyBuilder& TopologyBuilder::AddBidirectionalLink(
    NodeId a, NodeId b, const ResourceMap& resources) {
  AddLink({a, b, resources});
  AddLink({b, a, resources});
  return *this;
}

Topology TopologyBuilder::Build() const {
  Topology topo;
  topo.nodes_ = nodes_;
  std::sort(topo.nodes_.begin(), topo.nodes_.end(),
            [](const Node& a, const Node& b) { return a.id < b.id; });
  for (size_t i = 0; i < topo.nodes_.size(); ++i) {
    const Node& node = topo.nodes_[i];
    CheckCapacities(node.resources, "node " + std::to_string(node.id));
    topo.node_index_.emplace(node.id, i);
  }

  topo.links_ = links_;
  std::sort(topo.links_.begin(), topo.links_.end(),
            [](const Link& a, const Link& b) { return a.key() < b.key(); });
  topo.adjacency_.resize(topo.nodes_.size());
  for (size_t i = 0; i < topo.links_.size(); ++i) {
    const Link& link = topo.links_[i];
    std::string where = LinkName(link.src, link.dst);
    if (link.src == link.dst) {
      throw TopologyError("self loop " + where);
    }
    if (!topo.HasNode(link.src) || !topo.HasNode(link.dst)) {
      throw TopologyError("dangling endpoint on " + where);
    }
    for (const auto& [name, cap] : link.resources) {
      if (cap.tba()) throw TopologyError("TBA capacity on " + where);
    }
    CheckCapacities(link.resources, where);
    if (!topo.link_index_.emplace(link.key(), i).second) {
      throw TopologyError("duplicate " + where);
    }
    topo.adjacency_[topo.node_index_.at(link.src)].push_back(link.dst);
  }
  // Links are sorted by (src, dst) so adjacency lists are already ascending.
  return topo;
}

Topology LoadTopologyJson(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw TopologyError(std::string("topology parse failure: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes")) {
    throw TopologyError("topology document must have a \"nodes\" array");
  }

  TopologyBuilder builder;
  try {
    for (const json& jn : doc.at("nodes")) {
      Node node;
      node.id = jn.at("id").get<NodeId>();
      node.name = jn.value("name", std::to_string(node.id));
      if (jn.contains("services")) {
        for (const json& s : jn.at("services")) {
          node.service_types.insert(s.get<std::string>());
        }
      }
      node.resources = ParseResources(jn.value("resources", json()), true,
                                      "node " + std::to_string(node.id));
      builder.AddNode(std::move(node));
    }
    if (doc.contains("links")) {
      for (const json& jl : doc.at("links")) {
        NodeId src = jl.at("src").get<NodeId>();
        NodeId dst = jl.at("dst").get<NodeId>();
        ResourceMap resources = ParseResources(jl.value("resources", json()),
                                               false, LinkName(src, dst));
        if (jl.value("directed", false)) {
          builder.AddLink({src, dst, resources});
        } else {
          builder.AddBidirectionalLink(src, dst, resources);
        }
      }
    }
  } catch (const json::exception& e) {
    throw TopologyError(std::string("malformed topology document: ") +
                        e.what());
  }
  return builder.Build();
}

Topology LoadTopologyFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TopologyError("cannot open topology file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (path.size() >= 8 && path.substr(path.size() - 8) == ".graphml") {
    return LoadGraphMl(buffer.str(), 1e9);
  }
  return LoadTopologyJson(buffer.str());
}

std::string SaveTopologyJson(const Topology& topo) {
  json doc;
  doc["nodes"] = json::array();
  for (const Node& node : topo.nodes()) {
    json jn;
    jn["id"] = node.id;
    jn["name"] = node.name;
    jn["services"] = node.service_types;
    jn["resources"] = ResourcesToJson(node.resources);
    doc["nodes"].push_back(std::move(jn));
  }
  doc["links"] = json::array();
  for (const Link& link : topo.links()) {
    bool has_reverse = topo.HasLink(link.dst, link.src);
    bool symmetric =
        has_reverse &&
        topo.GetLink(link.dst, link.src).resources == link.resources;
    if (symmetric && link.src > link.dst) continue;
    json jl;
    jl["src"] = link.src;
    jl["dst"] = link.dst;
    jl["resources"] = ResourcesToJson(link.resources);
    if (!symmetric) jl["directed"] = true;
    doc["links"].push_back(std::move(jl));
  }
  return doc.dump(2);
}

Topology LoadGraphMl(std::string_view document, double default_capacity) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(document)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw TopologyError(std::string("graphml parse failure: ") + e.what());
  }

  const pt::ptree* root = nullptr;
  try {
    root = &tree.get_child("graphml");
  } catch (const pt::ptree_error&) {
    throw TopologyError("graphml document lacks <graphml> root");
  }

  std::string capacity_key;
  std::string label_key;
  for (const auto& [tag, child] : *root) {
    if (tag != "key") continue;
    // the attribute name itself contains a dot
    std::string attr =
        child.get(pt::ptree::path_type("<xmlattr>/attr.name", '/'), "");
    std::string id = child.get("<xmlattr>.id", "");
    std::string domain = child.get("<xmlattr>.for", "");
    if (attr == "capacity" && domain != "node") capacity_key = id;
    if (attr == "label" && domain != "edge") label_key = id;
  }

  const pt::ptree* graph = nullptr;
  try {
    graph = &root->get_child("graph");
  } catch (const pt::ptree_error&) {
    throw TopologyError("graphml document lacks <graph>");
  }
  bool directed = graph->get("<xmlattr>.edgedefault", "undirected") ==
                  "directed";

  std::map<std::string, NodeId> ids;
  TopologyBuilder builder;
  for (const auto& [tag, child] : *graph) {
    if (tag != "node") continue;
    std::string key = child.get<std::string>("<xmlattr>.id");
    NodeId id = static_cast<NodeId>(ids.size());
    if (!ids.emplace(key, id).second) {
      throw TopologyError("duplicate graphml node " + key);
    }
    Node node;
    node.id = id;
    node.name = key;
    node.service_types.insert("switch");
    for (const auto& [dtag, data] : child) {
      if (dtag == "data" && !label_key.empty() &&
          data.get("<xmlattr>.key", "") == label_key) {
        node.name = data.get_value<std::string>();
      }
    }
    builder.AddNode(std::move(node));
  }

  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& [tag, child] : *graph) {
    if (tag != "edge") continue;
    std::string source = child.get<std::string>("<xmlattr>.source");
    std::string target = child.get<std::string>("<xmlattr>.target");
    auto s = ids.find(source);
    auto t = ids.find(target);
    if (s == ids.end() || t == ids.end()) {
      throw TopologyError("dangling graphml edge " + source + "->" + target);
    }
    double capacity = default_capacity;
    for (const auto& [dtag, data] : child) {
      if (dtag == "data" && !capacity_key.empty() &&
          data.get("<xmlattr>.key", "") == capacity_key) {
        capacity = data.get_value<double>();
      }
    }
    // TopologyZoo files occasionally repeat an edge; keep the first.
    if (s->second == t->second) continue;
    std::pair<NodeId, NodeId> key{s->second, t->second};
    if (!directed && key.first > key.second) std::swap(key.first, key.second);
    if (!seen.insert(key).second) continue;
    ResourceMap resources{{"bandwidth", Capacity(capacity)}};
    if (directed) {
      builder.AddLink({s->second, t->second, resources});
    } else {
      builder.AddBidirectionalLink(s->second, t->second, resources);
    }
  }
  return builder.Build();
}

Topology FatTree(int k, double link_capacity) {
  if (k < 2 || k % 2 != 0) {
    throw TopologyError("fat-tree arity must be even and >= 2, got " +
                        std::to_string(k));
  }
  const int half = k / 2;
  const int num_core = half * half;
  TopologyBuilder builder;
  auto add = [&](NodeId id, const std::string& name, const char* tier) {
    Node node;
    node.id = id;
    node.name = name;
    node.service_types = {"switch", tier};
    builder.AddNode(std::move(node));
  };

  for (int c = 0; c < num_core; ++c) {
    add(c, "core" + std::to_string(c), "core");
  }
  // Pod p: aggregation ids then edge ids.
  auto agg_id = [&](int pod, int i) { return num_core + pod * k + i; };
  auto edge_id = [&](int pod, int i) { return num_core + pod * k + half + i; };
  ResourceMap resources{{"bandwidth", Capacity(link_capacity)}};
  for (int pod = 0; pod < k; ++pod) {
    for (int i = 0; i < half; ++i) {
      add(agg_id(pod, i),
          "agg" + std::to_string(pod) + "_" + std::to_string(i),
          "aggregation");
    }
    for (int i = 0; i < half; ++i) {
      add(edge_id(pod, i),
          "edge" + std::to_string(pod) + "_" + std::to_string(i), "edge");
    }
    for (int a = 0; a < half; ++a) {
      for (int e = 0; e < half; ++e) {
        builder.AddBidirectionalLink(agg_id(pod, a), edge_id(pod, e),
                                     resources);
      }
      // Aggregation switch a connects to the a-th group of core switches.
      for (int j = 0; j < half; ++j) {
        builder.AddBidirectionalLink(agg_id(pod, a), a * half + j, resources);
      }
    }
  }
  return builder.Build();
}

}  // namespace net
}  // namespace pathopt
