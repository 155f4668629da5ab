#ifndef PATHOPT_SOLVER_H
#define PATHOPT_SOLVER_H

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pathopt/model.h"

namespace pathopt {
namespace lp {

enum class SolveStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kNumericFailure,
  kIterationLimit,
  // Branch-and-bound stopped at the node limit without an incumbent.
  kNodeLimit,
  // Branch-and-bound stopped at the node limit with an incumbent whose gap
  // exceeds the requested one.
  kFeasible,
};

std::string_view StatusName(SolveStatus status);
SolveStatus ParseStatus(std::string_view name);

enum class BasisStatus : uint8_t { kBasic, kAtLower, kAtUpper, kFree };

struct SolverOptions {
  double tol_feas = 1e-6;
  double tol_opt = 1e-6;
  double tol_int = 1e-6;
  // Relative optimality gap at which branch-and-bound stops.
  double gap = 1e-4;
  int64_t node_limit = 200000;
  // Wall-clock seconds; 0 means none. Branch-and-bound reports it like the
  // node limit, an LP that runs out reports the iteration limit.
  double time_limit = 0;
  // 0 picks a limit from the problem size.
  int64_t iteration_limit = 0;
  // Solve the LP relaxation even if the model has binaries.
  bool relax_integrality = false;
  // Pivots between basis reinversions.
  int refactor_interval = 100;
};

class Solution {
 public:
  SolveStatus status = SolveStatus::kNumericFailure;
  double objective = 0;
  // Best proven bound and relative gap (branch-and-bound); equal to the
  // objective and 0 for pure LPs.
  double best_bound = 0;
  double gap = 0;
  int64_t iterations = 0;
  int64_t nodes = 0;

  std::vector<std::string> var_names;
  std::vector<double> values;
  std::vector<std::string> row_names;
  // Row duals y with reduced costs c - A^T y (pure LP solves only).
  std::vector<double> duals;
  // Final basis (LP) or root relaxation basis (MILP), for warm starts.
  std::vector<BasisStatus> col_basis;
  std::vector<BasisStatus> row_basis;

  bool optimal() const { return status == SolveStatus::kOptimal; }
  bool has_values() const {
    return status == SolveStatus::kOptimal ||
           status == SolveStatus::kFeasible;
  }

  std::optional<double> Value(std::string_view name) const;
  double ValueOr(std::string_view name, double fallback) const;

  // Rebuilds the name index after var_names changed.
  void Reindex();

 private:
  std::unordered_map<std::string, int> index_;
};

// Bounded primal simplex (revised, product-form basis inverse). Binary
// marks are ignored.
Solution SolveLp(const ProgramModel& model, const SolverOptions& options = {});

// Best-bound branch-and-bound over the binary variables with an LP
// relaxation per node and most-fractional branching.
Solution SolveMilp(const ProgramModel& model,
                   const SolverOptions& options = {});

// SolveMilp when the model has binaries (and relaxation is not requested),
// SolveLp otherwise.
Solution Solve(const ProgramModel& model, const SolverOptions& options = {});

// Re-solves starting from `prev`: its basis seeds the simplex and, for
// models with binaries, its assignment is offered as the first incumbent.
// Entries of `prev` naming unknown variables or rows are ignored.
Solution ResolveWarm(const ProgramModel& model, const Solution& prev,
                     const SolverOptions& options = {});

// Interface for plugging in other solvers.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual Solution Solve(const ProgramModel& model,
                         const SolverOptions& options) = 0;
};

class BundledSolver : public SolverBackend {
 public:
  Solution Solve(const ProgramModel& model,
                 const SolverOptions& options) override {
    return lp::Solve(model, options);
  }
};

// {"status": ..., "objective": ..., "values": {name: value}}
std::string SolutionToJson(const Solution& solution);
Solution SolutionFromJson(std::string_view document);

}  // namespace lp
}  // namespace pathopt

#endif
