#ifndef PATHOPT_SRC_SIMPLEX_H
#define PATHOPT_SRC_SIMPLEX_H

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "pathopt/model.h"
#include "pathopt/solver.h"

namespace pathopt {
namespace lp {
namespace internal {

// min cost^T x  s.t.  A x - r = 0,  lb <= (x, r) <= ub.
// Columns 0..n-1 are structural, n..n+m-1 are the row logicals r.
struct StandardForm {
  int num_cols = 0;
  int num_rows = 0;
  std::vector<int> col_start;  // CSC, size num_cols + 1
  std::vector<int> row_index;
  std::vector<double> value;
  std::vector<int> row_count;  // nonzeros per row
  std::vector<double> cost;    // size num_cols, already sign-adjusted
  std::vector<double> lb;      // size num_cols + num_rows
  std::vector<double> ub;
  std::vector<char> binary;    // size num_cols
  double sign = 1;             // +1 minimize, -1 maximize

  static StandardForm FromModel(const ProgramModel& model);
};

enum class LpOutcome {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kIterationLimit,
  kNumericFailure,
};

// Works on a row- and column-scaled copy of the form. Bounds, values and
// duals cross the interface unscaled.
class SimplexEngine {
 public:
  SimplexEngine(const StandardForm& form, const SolverOptions& options);

  void SetBounds(int var, double lb, double ub);
  double lb(int var) const { return lb_[var] * scale_[var]; }
  double ub(int var) const { return ub_[var] * scale_[var]; }

  // Statuses for all num_cols + num_rows variables. Missing or
  // inconsistent entries are repaired at the next reinversion.
  void SetStatuses(const std::vector<BasisStatus>& status);
  std::vector<BasisStatus> Statuses() const { return status_; }
  void SlackBasis();

  LpOutcome Solve(int64_t iteration_limit);

  const std::vector<double>& values() const;
  // Internal (minimization) objective.
  double Objective() const;
  std::vector<double> Duals() const;
  int64_t iterations() const { return iterations_; }

 private:
  struct Ratio {
    double step = 0;
    int position = -1;  // -1: entering variable flips bound
    bool to_upper = false;
  };

  int total() const { return n_ + m_; }
  double CostOf(int var) const { return var < n_ ? form_.cost[var] : 0.0; }
  double DotColumn(const std::vector<double>& y, int var) const;
  double NonbasicValue(int var) const;
  BasisStatus DefaultNonbasic(int var) const;

  void Ftran(int var, std::vector<double>& out) const;
  void FtranDense(std::vector<double>& work) const;
  void Btran(std::vector<double>& work) const;
  void AddEta(int position, const std::vector<double>& alpha);

  void Reinvert();
  void ComputeBasicValues();
  double BasicInfeasibility(int var) const;
  double MaxInfeasibility() const;

  int Price(const std::vector<double>& y, bool phase1, double* reduced) const;
  Ratio RatioTest(int entering, int direction,
                  const std::vector<double>& alpha, bool phase1) const;

  void Scale();
  void Perturb();
  LpOutcome Iterate(int64_t iteration_limit);

  StandardForm form_;
  SolverOptions options_;
  int n_;
  int m_;

  std::vector<double> lb_;
  std::vector<double> ub_;
  std::vector<double> x_;
  // original value = scaled value * scale_, per structural and logical
  std::vector<double> scale_;
  std::vector<double> row_scale_;
  std::vector<BasisStatus> status_;
  std::vector<int> head_;  // variable at each basis position
  bool need_reinvert_ = true;
  bool need_values_ = true;
  bool bland_ = false;
  int64_t iterations_ = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline_;

  // Eta file of the product-form inverse.
  std::vector<int> eta_position_;
  std::vector<double> eta_pivot_;
  std::vector<int> eta_start_{0};
  std::vector<int> eta_index_;
  std::vector<double> eta_value_;
  int etas_since_reinvert_ = 0;

  mutable std::vector<double> work_;
  mutable std::vector<double> unscaled_;
};

}  // namespace internal
}  // namespace lp
}  // namespace pathopt

#endif
