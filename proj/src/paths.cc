#include "pathopt/paths.h"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "json.hpp"

namespace pathopt {
namespace paths {

using nlohmann::json;

AnnotatedPath::AnnotatedPath(std::vector<NodeId> nodes,
                             std::vector<NodeId> mbox_nodes)
    : nodes_(std::move(nodes)), mbox_nodes_(std::move(mbox_nodes)) {
  if (nodes_.empty()) throw std::invalid_argument("empty path");
  std::vector<NodeId> sorted = nodes_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("path repeats a node: " + ToString(*this));
  }
  size_t next = 0;
  for (size_t i = 0; i < mbox_nodes_.size(); ++i) {
    // A node may appear in consecutive positions when colocated.
    if (i > 0 && mbox_nodes_[i] == mbox_nodes_[i - 1]) continue;
    while (next < nodes_.size() && nodes_[next] != mbox_nodes_[i]) ++next;
    if (next == nodes_.size()) {
      throw std::invalid_argument("mbox nodes out of path order: " +
                                  ToString(*this));
    }
    ++next;
  }
}

std::vector<LinkKey> AnnotatedPath::links() const {
  std::vector<LinkKey> out;
  for (size_t i = 0; i + 1 < nodes_.size(); ++i) {
    out.push_back({nodes_[i], nodes_[i + 1]});
  }
  return out;
}

bool AnnotatedPath::Contains(NodeId node) const {
  return std::find(nodes_.begin(), nodes_.end(), node) != nodes_.end();
}

bool AnnotatedPath::ContainsLink(const LinkKey& link) const {
  for (size_t i = 0; i + 1 < nodes_.size(); ++i) {
    if (nodes_[i] == link.src && nodes_[i + 1] == link.dst) return true;
  }
  return false;
}

bool AnnotatedPath::UsesMbox(NodeId node) const {
  return std::find(mbox_nodes_.begin(), mbox_nodes_.end(), node) !=
         mbox_nodes_.end();
}

std::string ToString(const AnnotatedPath& path) {
  std::ostringstream out;
  out << "[";
  for (size_t i = 0; i < path.nodes().size(); ++i) {
    if (i) out << ",";
    out << path.nodes()[i];
    if (path.UsesMbox(path.nodes()[i])) out << "*";
  }
  out << "]";
  return out.str();
}

PathPredicate NullPredicate() {
  return [](const AnnotatedPath&, const net::Topology&) { return true; };
}

PathPredicate RejectAllPredicate() {
  return [](const AnnotatedPath&, const net::Topology&) { return false; };
}

PathPredicate WaypointPredicate(std::vector<std::string> order) {
  if (order.empty()) {
    throw std::invalid_argument("waypoint order must not be empty");
  }
  return [order = std::move(order)](const AnnotatedPath& path,
                                    const net::Topology& topo) {
    size_t matched = 0;
    for (NodeId id : path.mbox_nodes()) {
      if (matched == order.size()) break;
      if (topo.GetNode(id).HasService(order[matched])) ++matched;
    }
    return matched == order.size();
  };
}

PathPredicate HasMboxPredicate() {
  return [](const AnnotatedPath& path, const net::Topology&) {
    return !path.mbox_nodes().empty();
  };
}

bool IsMiddlebox(const net::Node& node) {
  static const std::set<std::string> kForwarding = {"switch", "core",
                                                    "aggregation", "edge"};
  for (const std::string& type : node.service_types) {
    if (kForwarding.count(type) == 0) return true;
  }
  return false;
}

namespace {

class Enumerator {
 public:
  Enumerator(const net::Topology& topo, const net::TrafficClass& tc,
             const PathPredicate& predicate, const EnumerateOptions& options)
      : topo_(topo), tc_(tc), predicate_(predicate), options_(options) {
    const auto& nodes = topo.nodes();
    for (size_t i = 0; i < nodes.size(); ++i) dense_[nodes[i].id] = i;
    on_path_.assign(nodes.size(), 0);
  }

  std::vector<AnnotatedPath> Run() {
    if (options_.max_len < 1 || options_.max_count < 1 ||
        options_.chain_len < 0) {
      throw PathError("invalid enumeration limits");
    }
    if (!topo_.HasNode(tc_.ingress) || !topo_.HasNode(tc_.egress)) {
      throw PathError("traffic class " + std::to_string(tc_.id) +
                      " has an endpoint outside the topology");
    }
    stack_.push_back(tc_.ingress);
    on_path_[dense_.at(tc_.ingress)] = 1;
    Visit(tc_.ingress);
    return std::move(out_);
  }

 private:
  bool Full() const {
    return out_.size() >= static_cast<size_t>(options_.max_count);
  }

  void Visit(NodeId at) {
    if (at == tc_.egress) {
      Emit();
      return;
    }
    if (stack_.size() >= static_cast<size_t>(options_.max_len)) return;
    for (NodeId next : topo_.Neighbors(at)) {
      if (Full()) return;
      size_t d = dense_.at(next);
      if (on_path_[d]) continue;
      on_path_[d] = 1;
      stack_.push_back(next);
      Visit(next);
      stack_.pop_back();
      on_path_[d] = 0;
    }
  }

  void Emit() {
    if (options_.chain_len == 0) {
      Offer(AnnotatedPath(stack_));
      return;
    }
    placement_.clear();
    Place(0, 0);
  }

  // Whether the node at stack_[pos] may serve chain position `slot`.
  bool Eligible(size_t pos, int slot) const {
    const net::Node& node = topo_.GetNode(stack_[pos]);
    if (static_cast<size_t>(slot) < tc_.chain.size()) {
      return node.HasService(tc_.chain[slot]);
    }
    return IsMiddlebox(node);
  }

  void Place(size_t from, int slot) {
    if (Full()) return;
    if (slot == options_.chain_len) {
      std::vector<NodeId> mbox;
      for (size_t pos : placement_) mbox.push_back(stack_[pos]);
      Offer(AnnotatedPath(stack_, std::move(mbox)));
      return;
    }
    for (size_t pos = from; pos < stack_.size(); ++pos) {
      if (!Eligible(pos, slot)) continue;
      placement_.push_back(pos);
      Place(options_.allow_colocated ? pos : pos + 1, slot + 1);
      placement_.pop_back();
      if (Full()) return;
    }
  }

  void Offer(AnnotatedPath path) {
    if (predicate_(path, topo_)) out_.push_back(std::move(path));
  }

  const net::Topology& topo_;
  const net::TrafficClass& tc_;
  const PathPredicate& predicate_;
  const EnumerateOptions& options_;
  std::unordered_map<NodeId, size_t> dense_;
  std::vector<char> on_path_;
  std::vector<NodeId> stack_;
  std::vector<size_t> placement_;
  std::vector<AnnotatedPath> out_;
};

}  // namespace

std::vector<AnnotatedPath> EnumeratePaths(const net::Topology& topo,
                                          const net::TrafficClass& tc,
                                          const PathPredicate& predicate,
                                          const EnumerateOptions& options) {
  return Enumerator(topo, tc, predicate, options).Run();
}

void PathSet::Set(ClassId id, std::vector<AnnotatedPath> paths) {
  per_class_[id] = std::move(paths);
}

const std::vector<AnnotatedPath>& PathSet::Get(ClassId id) const {
  static const std::vector<AnnotatedPath> kEmpty;
  auto it = per_class_.find(id);
  return it == per_class_.end() ? kEmpty : it->second;
}

size_t PathSet::TotalPaths() const {
  size_t total = 0;
  for (const auto& [id, list] : per_class_) total += list.size();
  return total;
}

PathSet GeneratePaths(const net::Topology& topo, const net::TrafficMatrix& tm,
                      const PathPredicate& predicate,
                      const EnumerateOptions& options, unsigned threads) {
  const auto& classes = tm.classes();
  std::vector<std::vector<AnnotatedPath>> results(classes.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<size_t>(1, classes.size()));

  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned worker) {
    try {
      for (size_t i = next++; i < classes.size(); i = next++) {
        results[i] = EnumeratePaths(topo, classes[i], predicate, options);
      }
    } catch (...) {
      errors[worker] = std::current_exception();
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }

  PathSet out;
  for (size_t i = 0; i < classes.size(); ++i) {
    out.Set(classes[i].id, std::move(results[i]));
  }
  return out;
}

SelectionStrategy ParseStrategy(std::string_view name) {
  if (name == "shortest") return SelectionStrategy::kShortest;
  if (name == "random") return SelectionStrategy::kRandom;
  throw std::invalid_argument("unknown selection strategy '" +
                              std::string(name) + "'");
}

std::string_view StrategyName(SelectionStrategy strategy) {
  return strategy == SelectionStrategy::kShortest ? "shortest" : "random";
}

namespace {

// Indices into `candidates` chosen by the strategy, in output order.
std::vector<size_t> Choose(const std::vector<AnnotatedPath>& candidates,
                           SelectionStrategy strategy, size_t count,
                           uint64_t seed, ClassId id) {
  std::vector<size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  if (count >= candidates.size()) return order;

  if (strategy == SelectionStrategy::kShortest) {
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      const AnnotatedPath& pa = candidates[a];
      const AnnotatedPath& pb = candidates[b];
      if (pa.hops() != pb.hops()) return pa.hops() < pb.hops();
      return pa < pb;
    });
    order.resize(count);
    return order;
  }

  std::seed_seq seq{static_cast<uint32_t>(seed),
                    static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(id)};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(count);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace

PathSet SelectPaths(const PathSet& all, SelectionStrategy strategy,
                    int select_number, uint64_t seed, const PathSet* sticky) {
  if (select_number < 1) {
    throw std::invalid_argument("select_number must be >= 1");
  }
  const size_t limit = static_cast<size_t>(select_number);
  PathSet out;
  for (const auto& [id, candidates] : all.per_class()) {
    if (candidates.empty()) throw InfeasibleClassError(id);

    std::vector<AnnotatedPath> chosen;
    std::vector<AnnotatedPath> rest;
    if (sticky != nullptr) {
      const auto& previous = sticky->Get(id);
      for (const AnnotatedPath& path : previous) {
        if (chosen.size() < limit &&
            std::find(candidates.begin(), candidates.end(), path) !=
                candidates.end() &&
            std::find(chosen.begin(), chosen.end(), path) == chosen.end()) {
          chosen.push_back(path);
        }
      }
      for (const AnnotatedPath& path : candidates) {
        if (std::find(chosen.begin(), chosen.end(), path) == chosen.end()) {
          rest.push_back(path);
        }
      }
    } else {
      rest = candidates;
    }

    for (size_t index :
         Choose(rest, strategy, limit - chosen.size(), seed, id)) {
      chosen.push_back(rest[index]);
    }
    out.Set(id, std::move(chosen));
  }
  return out;
}

DependencyIndex::DependencyIndex(const PathSet& selected) {
  for (const auto& [id, list] : selected.per_class()) {
    for (size_t p = 0; p < list.size(); ++p) {
      PathRef ref{id, static_cast<int>(p)};
      for (NodeId node : list[p].nodes()) {
        entries_[Element::OfNode(node)].push_back(ref);
      }
      for (const LinkKey& link : list[p].links()) {
        entries_[Element::OfLink(link.src, link.dst)].push_back(ref);
      }
    }
  }
}

const std::vector<PathRef>& DependencyIndex::PathsThrough(
    const Element& element) const {
  static const std::vector<PathRef> kEmpty;
  auto it = entries_.find(element);
  return it == entries_.end() ? kEmpty : it->second;
}

std::string SavePathSetJson(const PathSet& paths) {
  json doc = json::object();
  for (const auto& [id, list] : paths.per_class()) {
    json arr = json::array();
    for (const AnnotatedPath& path : list) {
      arr.push_back({{"nodes", path.nodes()}, {"mbox", path.mbox_nodes()}});
    }
    doc[std::to_string(id)] = std::move(arr);
  }
  return doc.dump();
}

PathSet LoadPathSetJson(std::string_view document) {
  PathSet out;
  try {
    json doc = json::parse(document);
    for (const auto& [key, arr] : doc.items()) {
      std::vector<AnnotatedPath> list;
      for (const json& jp : arr) {
        list.emplace_back(jp.at("nodes").get<std::vector<NodeId>>(),
                          jp.value("mbox", std::vector<NodeId>{}));
      }
      out.Set(std::stoi(key), std::move(list));
    }
  } catch (const json::exception& e) {
    throw PathError(std::string("malformed path cache: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw PathError(std::string("malformed path cache: ") + e.what());
  }
  return out;
}

}  // namespace paths
}  // namespace pathopt
