#include "pathopt/solver.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <set>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "json.hpp"
#include "simplex.h"

namespace pathopt {
namespace lp {

using internal::LpOutcome;
using internal::SimplexEngine;
using internal::StandardForm;

std::string_view StatusName(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
    case SolveStatus::kNumericFailure:
      return "numeric_failure";
    case SolveStatus::kIterationLimit:
      return "iteration_limit";
    case SolveStatus::kNodeLimit:
      return "node_limit";
    case SolveStatus::kFeasible:
      return "feasible";
  }
  return "unknown";
}

SolveStatus ParseStatus(std::string_view name) {
  for (SolveStatus s :
       {SolveStatus::kOptimal, SolveStatus::kInfeasible, SolveStatus::kUnbounded,
        SolveStatus::kNumericFailure, SolveStatus::kIterationLimit,
        SolveStatus::kNodeLimit, SolveStatus::kFeasible}) {
    if (StatusName(s) == name) return s;
  }
  throw std::invalid_argument("unknown solve status: " + std::string(name));
}

std::optional<double> Solution::Value(std::string_view name) const {
  if (index_.size() == var_names.size()) {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return values[it->second];
  }
  for (size_t j = 0; j < var_names.size(); ++j) {
    if (var_names[j] == name) return values[j];
  }
  return std::nullopt;
}

double Solution::ValueOr(std::string_view name, double fallback) const {
  return Value(name).value_or(fallback);
}

void Solution::Reindex() {
  index_.clear();
  for (size_t j = 0; j < var_names.size(); ++j) {
    index_.emplace(var_names[j], static_cast<int>(j));
  }
}

namespace {

SolveStatus FromOutcome(LpOutcome outcome) {
  switch (outcome) {
    case LpOutcome::kOptimal:
      return SolveStatus::kOptimal;
    case LpOutcome::kInfeasible:
      return SolveStatus::kInfeasible;
    case LpOutcome::kUnbounded:
      return SolveStatus::kUnbounded;
    case LpOutcome::kIterationLimit:
      return SolveStatus::kIterationLimit;
    case LpOutcome::kNumericFailure:
      return SolveStatus::kNumericFailure;
  }
  return SolveStatus::kNumericFailure;
}

int64_t IterationLimit(const StandardForm& form, const SolverOptions& options) {
  if (options.iteration_limit > 0) return options.iteration_limit;
  return 100LL * (form.num_cols + form.num_rows) + 10000;
}

// Accepted residual of a returned point.
double ViolationLimit(const SolverOptions& options) {
  return 10 * options.tol_feas;
}

Solution Skeleton(const ProgramModel& model) {
  Solution s;
  s.var_names.reserve(model.num_variables());
  for (const Variable& v : model.variables()) s.var_names.push_back(v.name);
  s.row_names.reserve(model.num_constraints());
  for (const Constraint& c : model.constraints()) s.row_names.push_back(c.name);
  s.Reindex();
  return s;
}

void StoreBasis(const SimplexEngine& engine, int n, Solution& s) {
  const std::vector<BasisStatus> all = engine.Statuses();
  s.col_basis.assign(all.begin(), all.begin() + n);
  s.row_basis.assign(all.begin() + n, all.end());
}

std::vector<BasisStatus> MapBasis(const ProgramModel& model, const Solution& prev) {
  const int n = static_cast<int>(model.num_variables());
  const int m = static_cast<int>(model.num_constraints());
  // Unknown entries: structurals nonbasic, logicals basic.
  std::vector<BasisStatus> status(n + m, BasisStatus::kAtLower);
  for (int j = 0; j < n; ++j) {
    const Variable& v = model.variables()[j];
    status[j] = std::isfinite(v.lb)   ? BasisStatus::kAtLower
                : std::isfinite(v.ub) ? BasisStatus::kAtUpper
                                      : BasisStatus::kFree;
  }
  for (int i = 0; i < m; ++i) status[n + i] = BasisStatus::kBasic;
  for (size_t j = 0; j < prev.col_basis.size() && j < prev.var_names.size(); ++j) {
    if (auto index = model.FindVariable(prev.var_names[j])) {
      status[*index] = prev.col_basis[j];
    }
  }
  for (size_t i = 0; i < prev.row_basis.size() && i < prev.row_names.size(); ++i) {
    if (auto index = model.FindConstraint(prev.row_names[i])) {
      status[n + *index] = prev.row_basis[i];
    }
  }
  return status;
}

Solution RunLp(const ProgramModel& model, const StandardForm& form,
               const SolverOptions& options,
               const std::vector<BasisStatus>* start) {
  Solution s = Skeleton(model);
  const int n = form.num_cols;
  SimplexEngine engine(form, options);
  if (start) engine.SetStatuses(*start);
  LpOutcome outcome = engine.Solve(IterationLimit(form, options));

  auto extract = [&] {
    s.values.assign(engine.values().begin(), engine.values().begin() + n);
  };
  extract();
  if (outcome == LpOutcome::kOptimal &&
      model.MaxViolation(s.values) > ViolationLimit(options)) {
    spdlog::debug("simplex residual too large, restarting from slack basis");
    engine.SlackBasis();
    outcome = engine.Solve(IterationLimit(form, options));
    extract();
    if (outcome == LpOutcome::kOptimal &&
        model.MaxViolation(s.values) > ViolationLimit(options)) {
      outcome = LpOutcome::kNumericFailure;
    }
  }

  s.status = FromOutcome(outcome);
  s.iterations = engine.iterations();
  StoreBasis(engine, n, s);
  if (outcome == LpOutcome::kOptimal) {
    s.objective = model.EvaluateObjective(s.values);
    s.best_bound = s.objective;
    s.duals = engine.Duals();
    for (double& y : s.duals) y *= form.sign;
  } else {
    s.values.clear();
  }
  return s;
}

struct BbNode {
  double bound = 0;
  int depth = 0;
  int64_t id = 0;
  std::vector<std::pair<int, double>> fixes;
  std::shared_ptr<const std::vector<BasisStatus>> basis;
};

struct NodeOrder {
  bool operator()(const BbNode& a, const BbNode& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    if (a.depth != b.depth) return a.depth > b.depth;
    return a.id < b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const ProgramModel& model, const StandardForm& form,
                 const SolverOptions& options)
      : model_(model),
        form_(form),
        options_(options),
        engine_(form, options),
        limit_(IterationLimit(form, options)) {
    for (int j = 0; j < form.num_cols; ++j) {
      if (form.binary[j]) binaries_.push_back(j);
    }
  }

  void SetRootBasis(std::vector<BasisStatus> basis) {
    root_basis_ = std::move(basis);
  }

  // Offers an assignment as a starting incumbent after re-solving the
  // continuous part with its binaries fixed.
  void OfferStart(const std::vector<double>& values) {
    std::vector<double> fixed(form_.num_cols);
    for (int j : binaries_) fixed[j] = std::round(values[j]);
    TryFixed(fixed);
  }

  Solution Run();

 private:
  // Solves with every binary fixed; updates the incumbent when feasible.
  bool TryFixed(const std::vector<double>& fixed);
  void ApplyFixes(const std::vector<std::pair<int, double>>& fixes);
  void RestoreBounds();
  double Margin() const {
    return std::max(options_.gap * std::abs(incumbent_obj_), 1e-9);
  }
  void Rounding(const std::vector<double>& x);

  const ProgramModel& model_;
  const StandardForm& form_;
  SolverOptions options_;
  SimplexEngine engine_;
  int64_t limit_;
  std::vector<int> binaries_;
  std::vector<int> applied_;
  std::optional<std::vector<BasisStatus>> root_basis_;

  bool has_incumbent_ = false;
  double incumbent_obj_ = kInfinity;
  std::vector<double> incumbent_;
  int64_t iterations_ = 0;
};

void BranchAndBound::RestoreBounds() {
  for (int j : applied_) engine_.SetBounds(j, form_.lb[j], form_.ub[j]);
  applied_.clear();
}

void BranchAndBound::ApplyFixes(const std::vector<std::pair<int, double>>& fixes) {
  RestoreBounds();
  for (const auto& [var, value] : fixes) {
    engine_.SetBounds(var, value, value);
    applied_.push_back(var);
  }
}

bool BranchAndBound::TryFixed(const std::vector<double>& fixed) {
  std::vector<std::pair<int, double>> fixes;
  for (int j : binaries_) {
    if (fixed[j] < form_.lb[j] || fixed[j] > form_.ub[j]) return false;
    fixes.emplace_back(j, fixed[j]);
  }
  ApplyFixes(fixes);
  const int64_t before = engine_.iterations();
  const LpOutcome outcome = engine_.Solve(limit_);
  iterations_ += engine_.iterations() - before;
  if (outcome != LpOutcome::kOptimal) return false;
  std::vector<double> x(engine_.values().begin(),
                        engine_.values().begin() + form_.num_cols);
  if (model_.MaxViolation(x) > ViolationLimit(options_)) return false;
  const double obj = engine_.Objective();
  if (has_incumbent_ && obj >= incumbent_obj_ - 1e-12) return false;
  has_incumbent_ = true;
  incumbent_obj_ = obj;
  incumbent_ = std::move(x);
  return true;
}

void BranchAndBound::Rounding(const std::vector<double>& x) {
  std::vector<double> fixed(form_.num_cols);
  for (int j : binaries_) fixed[j] = std::ceil(x[j] - options_.tol_int);
  if (TryFixed(fixed)) return;
  for (int j : binaries_) fixed[j] = std::round(x[j]);
  TryFixed(fixed);
}

Solution BranchAndBound::Run() {
  Solution s = Skeleton(model_);
  const int n = form_.num_cols;

  std::set<BbNode, NodeOrder> open;
  int64_t next_id = 0;
  BbNode root;
  root.bound = -kInfinity;
  root.id = next_id++;
  if (root_basis_) {
    root.basis = std::make_shared<const std::vector<BasisStatus>>(*root_basis_);
  }
  open.insert(root);

  const std::vector<BasisStatus>* loaded = nullptr;
  bool incomplete = false;
  bool stopped_by_limit = false;
  int64_t nodes = 0;
  const auto started = std::chrono::steady_clock::now();
  auto out_of_time = [&] {
    if (options_.time_limit <= 0) return false;
    std::chrono::duration<double> spent = std::chrono::steady_clock::now() - started;
    return spent.count() >= options_.time_limit;
  };

  while (!open.empty()) {
    if (has_incumbent_ && open.begin()->bound >= incumbent_obj_ - Margin()) {
      open.clear();
      break;
    }
    if (nodes >= options_.node_limit || out_of_time()) {
      stopped_by_limit = true;
      break;
    }
    BbNode node = std::move(open.extract(open.begin()).value());
    ++nodes;

    ApplyFixes(node.fixes);
    if (node.basis && node.basis.get() != loaded) engine_.SetStatuses(*node.basis);

    const int64_t before = engine_.iterations();
    const LpOutcome outcome = engine_.Solve(limit_);
    iterations_ += engine_.iterations() - before;
    auto basis = std::make_shared<const std::vector<BasisStatus>>(engine_.Statuses());
    loaded = basis.get();

    if (node.id == 0) {
      s.col_basis.assign(basis->begin(), basis->begin() + n);
      s.row_basis.assign(basis->begin() + n, basis->end());
      if (outcome == LpOutcome::kUnbounded) {
        s.status = SolveStatus::kUnbounded;
        s.iterations = iterations_;
        s.nodes = nodes;
        return s;
      }
      if (outcome == LpOutcome::kIterationLimit ||
          outcome == LpOutcome::kNumericFailure) {
        if (!has_incumbent_) {
          s.status = FromOutcome(outcome);
          s.iterations = iterations_;
          s.nodes = nodes;
          return s;
        }
      }
    }
    if (outcome == LpOutcome::kInfeasible) continue;
    if (outcome != LpOutcome::kOptimal) {
      incomplete = true;
      continue;
    }

    const double obj = engine_.Objective();
    if (has_incumbent_ && obj >= incumbent_obj_ - Margin()) continue;

    const std::vector<double>& x = engine_.values();
    int branch = -1;
    double worst = options_.tol_int;
    for (int j : binaries_) {
      const double f = x[j] - std::floor(x[j]);
      const double frac = std::min(f, 1 - f);
      if (frac > worst) {
        worst = frac;
        branch = j;
      }
    }
    if (branch < 0) {
      std::vector<double> point(x.begin(), x.begin() + n);
      for (int j : binaries_) point[j] = std::round(point[j]);
      if (model_.MaxViolation(point) <= ViolationLimit(options_)) {
        has_incumbent_ = true;
        incumbent_obj_ = obj;
        incumbent_ = std::move(point);
      } else {
        // snapping broke feasibility; re-solve the continuous part
        TryFixed(point);
        loaded = nullptr;
      }
      continue;
    }

    if (node.id == 0 || nodes % 50 == 0) {
      const std::vector<double> lp_point(x.begin(), x.begin() + n);
      Rounding(lp_point);
      loaded = nullptr;
    }

    for (double value : {1.0, 0.0}) {
      BbNode child;
      child.bound = obj;
      child.depth = node.depth + 1;
      child.id = next_id++;
      child.fixes = node.fixes;
      child.fixes.emplace_back(branch, value);
      child.basis = basis;
      open.insert(std::move(child));
    }
  }
  RestoreBounds();

  s.iterations = iterations_;
  s.nodes = nodes;
  double bound = has_incumbent_ ? incumbent_obj_ : kInfinity;
  if (!open.empty()) bound = std::min(bound, open.begin()->bound);

  if (!has_incumbent_) {
    s.status = stopped_by_limit ? SolveStatus::kNodeLimit
               : incomplete     ? SolveStatus::kNumericFailure
                                : SolveStatus::kInfeasible;
    return s;
  }
  s.values = incumbent_;
  s.objective = model_.EvaluateObjective(s.values);
  s.best_bound = form_.sign * bound;
  const double diff = incumbent_obj_ - bound;
  s.gap = diff <= 1e-9 ? 0.0 : diff / std::max(std::abs(incumbent_obj_), 1e-10);
  s.status = (stopped_by_limit && s.gap > options_.gap) || incomplete
                 ? SolveStatus::kFeasible
                 : SolveStatus::kOptimal;
  return s;
}

}  // namespace

Solution SolveLp(const ProgramModel& model, const SolverOptions& options) {
  const StandardForm form = StandardForm::FromModel(model);
  return RunLp(model, form, options, nullptr);
}

Solution SolveMilp(const ProgramModel& model, const SolverOptions& options) {
  if (options.gap < 0) throw std::invalid_argument("gap must be non-negative");
  const StandardForm form = StandardForm::FromModel(model);
  BranchAndBound bb(model, form, options);
  return bb.Run();
}

Solution Solve(const ProgramModel& model, const SolverOptions& options) {
  if (model.HasBinaries() && !options.relax_integrality) {
    return SolveMilp(model, options);
  }
  return SolveLp(model, options);
}

Solution ResolveWarm(const ProgramModel& model, const Solution& prev,
                     const SolverOptions& options) {
  const StandardForm form = StandardForm::FromModel(model);
  const std::vector<BasisStatus> basis = MapBasis(model, prev);
  const bool have_basis = !prev.col_basis.empty() || !prev.row_basis.empty();

  if (!model.HasBinaries() || options.relax_integrality) {
    return RunLp(model, form, options, have_basis ? &basis : nullptr);
  }
  if (options.gap < 0) throw std::invalid_argument("gap must be non-negative");
  BranchAndBound bb(model, form, options);
  if (have_basis) bb.SetRootBasis(basis);
  if (prev.has_values()) {
    std::vector<double> start(form.num_cols, 0.0);
    for (int j = 0; j < form.num_cols; ++j) {
      start[j] = prev.ValueOr(model.variables()[j].name, 0.0);
    }
    bb.OfferStart(start);
  }
  return bb.Run();
}

std::string SolutionToJson(const Solution& solution) {
  nlohmann::ordered_json doc;
  doc["status"] = StatusName(solution.status);
  doc["objective"] = solution.objective;
  doc["best_bound"] = solution.best_bound;
  doc["gap"] = solution.gap;
  doc["iterations"] = solution.iterations;
  doc["nodes"] = solution.nodes;
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  for (size_t j = 0; j < solution.values.size() && j < solution.var_names.size(); ++j) {
    values[solution.var_names[j]] = solution.values[j];
  }
  doc["values"] = std::move(values);
  return doc.dump(2);
}

Solution SolutionFromJson(std::string_view document) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad solution document: ") + e.what());
  }
  Solution s;
  s.status = ParseStatus(doc.at("status").get<std::string>());
  s.objective = doc.value("objective", 0.0);
  s.best_bound = doc.value("best_bound", s.objective);
  s.gap = doc.value("gap", 0.0);
  s.iterations = doc.value("iterations", int64_t{0});
  s.nodes = doc.value("nodes", int64_t{0});
  if (doc.contains("values")) {
    for (const auto& [name, value] : doc.at("values").items()) {
      s.var_names.push_back(name);
      s.values.push_back(value.get<double>());
    }
  }
  s.Reindex();
  return s;
}

}  // namespace lp
}  // namespace pathopt
