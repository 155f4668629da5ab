#include "pathopt/cli.h"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "pathopt/lp_format.h"

namespace pathopt {
namespace cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double MsSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string Resolve(const RunConfig& config, const std::string& path) {
  fs::path p(path);
  if (p.is_relative()) p = fs::path(config.base_dir) / p;
  return p.string();
}

std::string Num(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool Worse(double now, double before, lp::Sense sense, double theta) {
  const double slack = theta * std::abs(before);
  return sense == lp::Sense::kMinimize ? now > before + slack : now < before - slack;
}

}  // namespace

RunConfig ParseConfig(const json& doc, const std::string& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  try {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    if (!doc.contains("topology")) throw ConfigError("config lacks \"topology\"");
    if (!doc.contains("traffic")) throw ConfigError("config lacks \"traffic\"");
    c.topology = doc.at("topology");
    c.traffic = doc.at("traffic");
    c.recipe = doc.value("recipe", c.recipe);
    if (doc.contains("recipe_params")) c.recipe_params = doc.at("recipe_params");
    if (doc.contains("select_number")) c.select_number = doc.at("select_number").get<int>();
    if (doc.contains("strategy")) c.strategy = doc.at("strategy").get<std::string>();
    c.seed = doc.value("seed", c.seed);
    c.gap = doc.value("gap", c.gap);
    c.node_limit = doc.value("node_limit", c.node_limit);
    c.time_limit = doc.value("time_limit", c.time_limit);
    if (doc.contains("max_len")) c.max_len = doc.at("max_len").get<int>();
    if (doc.contains("max_count")) c.max_count = doc.at("max_count").get<int>();
    c.threads = doc.value("threads", c.threads);
    c.split_depth = doc.value("split_depth", c.split_depth);
    c.default_capacity = doc.value("default_capacity", c.default_capacity);
    c.baseline_path_limit = doc.value("baseline_path_limit", c.baseline_path_limit);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  }
  if (c.select_number && *c.select_number < 1) throw ConfigError("select_number must be positive");
  if (c.gap < 0) throw ConfigError("gap must be non-negative");
  return c;
}

RunConfig LoadConfig(const std::string& path) {
  json doc;
  try {
    doc = json::parse(ReadFile(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return ParseConfig(doc, fs::path(path).parent_path().string().empty()
                              ? "."
                              : fs::path(path).parent_path().string());
}

net::Topology LoadTopology(const RunConfig& config) {
  const json& spec = config.topology;
  if (spec.is_object() && spec.contains("fat_tree")) {
    const json& ft = spec.at("fat_tree");
    return net::FatTree(ft.value("k", 4), ft.value("capacity", 1e9));
  }
  if (!spec.is_string()) throw ConfigError("topology must be a file name or generator");
  const std::string path = Resolve(config, spec.get<std::string>());
  if (!fs::exists(path)) throw ConfigError("topology file not found: " + path);
  try {
    if (fs::path(path).extension() == ".graphml") {
      return net::LoadGraphMl(ReadFile(path), config.default_capacity);
    }
    return net::LoadTopologyFile(path);
  } catch (const net::TopologyError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

net::TrafficMatrix LoadTraffic(const RunConfig& config, const net::Topology& topo) {
  const json& spec = config.traffic;
  net::TrafficMatrix tm;
  if (spec.is_object() && spec.contains("gravity")) {
    const json& g = spec.at("gravity");
    tm = net::GravityMatrix(topo, g.value("total", 1e9), g.value("seed", config.seed));
  } else if (spec.is_object() && spec.contains("uniform")) {
    tm = net::UniformMatrix(topo, spec.at("uniform").value("volume", 1e6));
  } else if (spec.is_string()) {
    const std::string path = Resolve(config, spec.get<std::string>());
    if (!fs::exists(path)) throw ConfigError("traffic file not found: " + path);
    try {
      tm = net::LoadTrafficFile(path);
    } catch (const net::TrafficError& e) {
      throw ConfigError(path + ": " + e.what());
    }
  } else {
    throw ConfigError("traffic must be a file name or generator");
  }
  try {
    tm.CheckAgainst(topo);
  } catch (const net::TrafficError& e) {
    throw ConfigError(e.what());
  }
  return tm;
}

apps::Recipe ResolveRecipe(const RunConfig& config) {
  apps::Recipe r;
  try {
    r = apps::MakeRecipe(config.recipe, config.recipe_params);
  } catch (const apps::RecipeError& e) {
    throw ConfigError(e.what());
  }
  if (config.select_number) r.select_number = *config.select_number;
  if (config.strategy) {
    try {
      r.strategy = paths::ParseStrategy(*config.strategy);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
  if (config.max_len) r.enumerate.max_len = *config.max_len;
  if (config.max_count) r.enumerate.max_count = *config.max_count;
  return r;
}

lp::SolverOptions SolverOptionsFor(const RunConfig& config) {
  lp::SolverOptions o;
  o.gap = config.gap;
  o.node_limit = config.node_limit;
  o.time_limit = config.time_limit;
  return o;
}

Outcome SolveSelected(const net::Topology& topo, const net::TrafficMatrix& tm,
                      const apps::Recipe& recipe, const paths::PathSet& selected,
                      const lp::SolverOptions& options, const ChurnSpec& churn) {
  Outcome out;
  auto start = Clock::now();
  opt::OptBuilder b(topo, tm, selected);
  recipe.configure(b);
  out.sense = b.model().objective().sense;
  if (churn.prev) b.AddMinChurn(*churn.prev, churn.weight);
  out.timing.build_ms = MsSince(start);
  start = Clock::now();
  out.solution = b.Solve(options);
  out.timing.solve_ms = MsSince(start);
  if (out.solution.has_values()) {
    out.base_objective = b.BaseObjective(out.solution);
    out.audit = opt::Audit(b, out.solution);
  } else {
    out.base_objective = std::nan("");
  }
  return out;
}

std::string ModelText(const net::Topology& topo, const net::TrafficMatrix& tm,
                      const apps::Recipe& recipe, const paths::PathSet& selected) {
  opt::OptBuilder b(topo, tm, selected);
  recipe.configure(b);
  return lp::ExportLpText(b.model());
}

Prepared Prepare(const RunConfig& config) {
  net::Topology topo = LoadTopology(config);
  net::TrafficMatrix tm = LoadTraffic(config, topo);
  apps::Recipe recipe = ResolveRecipe(config);
  const auto start = Clock::now();
  paths::PathSet all =
      paths::GeneratePaths(topo, tm, recipe.predicate, recipe.enumerate, config.threads);
  const double ms = MsSince(start);
  paths::PathSet selected =
      paths::SelectPaths(all, recipe.strategy, recipe.select_number, config.seed);
  return {std::move(topo), std::move(tm), std::move(recipe), std::move(all),
          std::move(selected), ms};
}

net::Topology ApplyFailure(const net::Topology& topo, const Event& event) {
  net::TopologyBuilder builder;
  for (const net::Node& n : topo.nodes()) {
    if (event.kind == Event::Kind::kFailNode && n.id == event.a) continue;
    builder.AddNode(n);
  }
  for (const net::Link& l : topo.links()) {
    if (event.kind == Event::Kind::kFailNode && (l.src == event.a || l.dst == event.a)) {
      continue;
    }
    if (event.kind == Event::Kind::kFailLink &&
        ((l.src == event.a && l.dst == event.b) || (l.src == event.b && l.dst == event.a))) {
      continue;
    }
    builder.AddLink(l);
  }
  return builder.Build();
}

double ChurnBetween(const opt::PrevSolution& before, const opt::PrevSolution& after) {
  double worst = 0;
  auto visit = [&](const opt::PrevSolution& a, const opt::PrevSolution& b) {
    for (const auto& [cid, per_path] : a) {
      auto other = b.find(cid);
      for (const auto& [path, x] : per_path) {
        double y = 0;
        if (other != b.end()) {
          auto hit = other->second.find(path);
          if (hit != other->second.end()) y = hit->second;
        }
        worst = std::max(worst, std::abs(x - y));
      }
    }
  };
  visit(before, after);
  visit(after, before);
  return worst;
}

ReoptResult Reoptimize(const net::Topology& topo, const net::TrafficMatrix& tm,
                       const apps::Recipe& recipe, const paths::PathSet& prev_selected,
                       const lp::Solution& prev_solution, const Event& event,
                       const ReoptOptions& options) {
  ReoptResult r;
  r.topo = event.kind == Event::Kind::kNewTraffic ? topo : ApplyFailure(topo, event);
  r.tm = event.kind == Event::Kind::kNewTraffic ? *event.traffic : tm;
  const opt::PrevSolution prev = opt::PrevFromSolution(prev_selected, prev_solution);

  std::set<paths::PathRef> impacted;
  const paths::DependencyIndex index(prev_selected);
  auto mark = [&](const paths::Element& e) {
    for (const paths::PathRef& ref : index.PathsThrough(e)) impacted.insert(ref);
  };
  if (event.kind == Event::Kind::kFailNode) mark(paths::Element::OfNode(event.a));
  if (event.kind == Event::Kind::kFailLink) {
    mark(paths::Element::OfLink(event.a, event.b));
    mark(paths::Element::OfLink(event.b, event.a));
  }
  r.dropped_paths = impacted.size();

  paths::PathSet survivors;
  std::vector<net::ClassId> starved;
  for (const net::TrafficClass& tc : r.tm.classes()) {
    std::vector<paths::AnnotatedPath> keep;
    const auto& list = prev_selected.Get(tc.id);
    for (size_t p = 0; p < list.size(); ++p) {
      if (impacted.count({tc.id, static_cast<int>(p)})) continue;
      if (list[p].ingress() != tc.ingress || list[p].egress() != tc.egress) continue;
      keep.push_back(list[p]);
    }
    if (keep.empty()) starved.push_back(tc.id);
    survivors.Set(tc.id, std::move(keep));
  }
  spdlog::info("step 1: {} selected paths impacted, {} classes without paths",
               r.dropped_paths, starved.size());

  const ChurnSpec churn{options.churn_weight > 0 ? &prev : nullptr, options.churn_weight};
  r.step1_objective = std::nan("");
  bool need_step2 = false;
  if (starved.empty()) {
    r.outcome = SolveSelected(r.topo, r.tm, recipe, survivors, options.solver, churn);
    r.selected = survivors;
    if (!r.outcome.solution.optimal()) {
      need_step2 = true;
      r.reason = "step 1 " + std::string(lp::StatusName(r.outcome.solution.status));
    } else {
      r.step1_objective = r.outcome.base_objective;
      if (Worse(r.step1_objective, prev_solution.objective, r.outcome.sense, options.theta)) {
        need_step2 = true;
        r.reason = "objective " + Num(r.step1_objective) + " vs previous " +
                   Num(prev_solution.objective);
      }
    }
  } else {
    need_step2 = true;
    r.reason = std::to_string(starved.size()) + " classes lost every selected path";
  }

  if (need_step2) {
    for (const net::TrafficClass& tc : r.tm.classes()) {
      if (!r.topo.HasNode(tc.ingress) || !r.topo.HasNode(tc.egress)) {
        throw paths::InfeasibleClassError(tc.id);
      }
    }
    paths::PathSet all = paths::GeneratePaths(r.topo, r.tm, recipe.predicate,
                                              recipe.enumerate, options.threads);
    paths::PathSet reselected = paths::SelectPaths(all, options.strategy, options.select_number,
                                                   options.seed, &survivors);
    if (starved.empty() && r.outcome.solution.optimal() && reselected == survivors) {
      spdlog::info("step 2 skipped: reselection keeps the same paths ({})", r.reason);
    } else {
      spdlog::warn("step 2: reselecting paths ({})", r.reason);
      r.step2_triggered = true;
      r.step = 2;
      r.selected = std::move(reselected);
      r.outcome = SolveSelected(r.topo, r.tm, recipe, r.selected, options.solver, churn);
    }
  }
  if (r.outcome.solution.has_values()) {
    r.churn = ChurnBetween(prev, opt::PrevFromSolution(r.selected, r.outcome.solution));
  }
  return r;
}

BenchResult Bench(const RunConfig& config, const std::vector<int>& select_numbers,
                  const std::vector<paths::SelectionStrategy>& strategies, int trials) {
  const Prepared p = Prepare(config);
  const lp::SolverOptions options = SolverOptionsFor(config);
  BenchResult result;
  if (p.all.TotalPaths() <= config.baseline_path_limit) {
    Outcome base = SolveSelected(p.topo, p.tm, p.recipe, p.all, options);
    if (base.solution.optimal()) result.baseline = base.base_objective;
  } else {
    result.baseline_skipped = true;
    spdlog::warn("baseline skipped: {} paths exceed the limit of {}", p.all.TotalPaths(),
                 config.baseline_path_limit);
  }
  for (paths::SelectionStrategy strategy : strategies) {
    for (int n : select_numbers) {
      for (int t = 0; t < trials; ++t) {
        const paths::PathSet selected =
            paths::SelectPaths(p.all, strategy, n, config.seed + static_cast<uint64_t>(t));
        Outcome o = SolveSelected(p.topo, p.tm, p.recipe, selected, options);
        BenchRow row;
        row.strategy = std::string(paths::StrategyName(strategy));
        row.select_number = n;
        row.trial = t;
        row.status = o.solution.status;
        row.objective = o.base_objective;
        if (result.baseline && o.solution.optimal()) {
          const double b = *result.baseline;
          if (std::abs(b) > 1e-12) {
            row.ratio = o.base_objective / b;
          } else if (std::abs(o.base_objective) <= 1e-12) {
            row.ratio = 1.0;
          }
        }
        row.build_ms = o.timing.build_ms;
        row.solve_ms = o.timing.solve_ms;
        result.rows.push_back(row);
      }
    }
  }
  return result;
}

std::string BenchCsv(const BenchResult& result) {
  std::string out =
      "strategy,select_number,trial,objective,objective_ratio_vs_all_paths,build_ms,solve_ms,"
      "status\n";
  for (const BenchRow& r : result.rows) {
    out += r.strategy + "," + std::to_string(r.select_number) + "," +
           std::to_string(r.trial) + "," + Num(r.objective) + "," +
           (r.ratio ? Num(*r.ratio) : std::string()) + "," + Num(r.build_ms) + "," +
           Num(r.solve_ms) + "," + std::string(lp::StatusName(r.status)) + "\n";
  }
  return out;
}

namespace {

void WriteArtifacts(const fs::path& dir, const net::Topology& topo,
                    const net::TrafficMatrix& tm, const paths::PathSet& selected,
                    const Outcome& o, int split_depth) {
  WriteFile(dir / "solution.json", lp::SolutionToJson(o.solution) + "\n");
  WriteFile(dir / "selected_paths.json", paths::SavePathSetJson(selected) + "\n");
  std::vector<rules::FlowRule> flow_rules;
  if (o.solution.has_values()) {
    flow_rules = rules::GenerateRules(topo, tm, selected, o.solution,
                                      rules::DefaultPrefixes(tm), split_depth);
  }
  WriteFile(dir / "rules.json", rules::RulesToJson(flow_rules) + "\n");
  rules::MockController((dir / "controller_payload.json").string()).Push(topo, flow_rules);
}

int ExitFor(const lp::Solution& s) {
  if (s.optimal()) return 0;
  spdlog::error("solver finished with status {}", lp::StatusName(s.status));
  return 1;
}

}  // namespace

int CmdRun(const RunConfig& config, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const Prepared p = Prepare(config);
  spdlog::info("{} classes, {} generated paths, {} selected", p.tm.size(), p.all.TotalPaths(),
               p.selected.TotalPaths());
  const Outcome o = SolveSelected(p.topo, p.tm, p.recipe, p.selected, SolverOptionsFor(config));
  WriteArtifacts(out_dir, p.topo, p.tm, p.selected, o, config.split_depth);
  std::string csv =
      "recipe,status,objective,build_ms,solve_ms,pathgen_ms,classes,generated_paths,"
      "selected_paths,iterations,nodes\n";
  csv += p.recipe.name + "," + std::string(lp::StatusName(o.solution.status)) + "," +
         Num(o.base_objective) + "," + Num(o.timing.build_ms) + "," + Num(o.timing.solve_ms) +
         "," + Num(p.pathgen_ms) + "," + std::to_string(p.tm.size()) + "," +
         std::to_string(p.all.TotalPaths()) + "," + std::to_string(p.selected.TotalPaths()) +
         "," + std::to_string(o.solution.iterations) + "," + std::to_string(o.solution.nodes) +
         "\n";
  WriteFile(fs::path(out_dir) / "metrics.csv", csv);
  spdlog::info("status {} objective {}", lp::StatusName(o.solution.status), o.base_objective);
  return ExitFor(o.solution);
}

int CmdReoptimize(const RunConfig& config, const Event& event,
                  const std::string& prev_solution_path, double churn_weight, double theta,
                  const std::string& out_dir) {
  if (!(churn_weight >= 0 && churn_weight <= 1)) {
    throw ConfigError("churn weight must lie in [0, 1]");
  }
  fs::create_directories(out_dir);
  const Prepared p = Prepare(config);
  lp::Solution prev;
  try {
    prev = lp::SolutionFromJson(ReadFile(prev_solution_path));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(prev_solution_path + ": " + e.what());
  }
  for (const auto& [cid, list] : p.selected.per_class()) {
    if (!list.empty() && !prev.Value(opt::XpName(cid, 0))) {
      throw ConfigError(prev_solution_path + " does not match the configured instance");
    }
  }
  ReoptOptions o;
  o.theta = theta;
  o.churn_weight = churn_weight;
  o.solver = SolverOptionsFor(config);
  o.strategy = p.recipe.strategy;
  o.select_number = p.recipe.select_number;
  o.seed = config.seed;
  o.threads = config.threads;
  const ReoptResult r = Reoptimize(p.topo, p.tm, p.recipe, p.selected, prev, event, o);
  WriteArtifacts(out_dir, r.topo, r.tm, r.selected, r.outcome, config.split_depth);
  std::string csv =
      "step,step2_triggered,status,objective,step1_objective,previous_objective,churn,"
      "dropped_paths,build_ms,solve_ms,reason\n";
  csv += std::to_string(r.step) + "," + (r.step2_triggered ? "1" : "0") + "," +
         std::string(lp::StatusName(r.outcome.solution.status)) + "," +
         Num(r.outcome.base_objective) + "," + Num(r.step1_objective) + "," +
         Num(prev.objective) + "," + Num(r.churn) + "," + std::to_string(r.dropped_paths) +
         "," + Num(r.outcome.timing.build_ms) + "," + Num(r.outcome.timing.solve_ms) + ",\"" +
         r.reason + "\"\n";
  WriteFile(fs::path(out_dir) / "metrics.csv", csv);
  spdlog::info("re-optimized in step {} with objective {} and churn {}", r.step,
               r.outcome.base_objective, r.churn);
  return ExitFor(r.outcome.solution);
}

int CmdBench(const RunConfig& config, const std::vector<int>& select_numbers,
             const std::vector<std::string>& strategies, int trials,
             const std::string& out_dir) {
  if (trials < 1) throw ConfigError("trials must be positive");
  if (select_numbers.empty()) throw ConfigError("no select numbers given");
  std::vector<paths::SelectionStrategy> parsed;
  for (const std::string& s : strategies) {
    try {
      parsed.push_back(paths::ParseStrategy(s));
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
  fs::create_directories(out_dir);
  const BenchResult result = Bench(config, select_numbers, parsed, trials);
  WriteFile(fs::path(out_dir) / "bench.csv", BenchCsv(result));
  bool all_ok = true;
  for (const BenchRow& r : result.rows) all_ok = all_ok && r.status == lp::SolveStatus::kOptimal;
  return all_ok ? 0 : 1;
}

}  // namespace cli
}  // namespace pathopt
