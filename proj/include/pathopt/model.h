#ifndef PATHOPT_MODEL_H
#define PATHOPT_MODEL_H

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pathopt {
namespace lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VarType { kContinuous, kBinary };
enum class Relation { kLessEqual, kEqual, kGreaterEqual };
enum class Sense { kMinimize, kMaximize };

struct Variable {
  std::string name;
  double lb = 0;
  double ub = kInfinity;
  VarType type = VarType::kContinuous;
};

struct Term {
  int var = 0;
  double coeff = 0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;  // sorted by var, no duplicates
  Relation relation = Relation::kLessEqual;
  double rhs = 0;
};

struct Objective {
  std::vector<Term> terms;
  Sense sense = Sense::kMinimize;
};

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Linear (mixed-binary) program: variable table, rows and objective. Rows
// and variables keep insertion order, which fixes the canonical text form.
class ProgramModel {
 public:
  // Throws ModelError on a duplicate name or inverted/NaN bounds. Binary
  // variables are clamped to [0, 1].
  int AddVariable(std::string name, double lb, double ub,
                  VarType type = VarType::kContinuous);

  // Terms referencing the same variable are merged; zero coefficients are
  // dropped. Throws ModelError on unknown variables or non-finite values.
  int AddConstraint(std::string name, std::vector<Term> terms,
                    Relation relation, double rhs);

  void SetObjective(std::vector<Term> terms, Sense sense);

  void SetBounds(int var, double lb, double ub);

  std::optional<int> FindVariable(std::string_view name) const;
  // Throws ModelError when absent.
  int VariableIndex(std::string_view name) const;
  bool HasVariable(std::string_view name) const {
    return FindVariable(name).has_value();
  }
  std::optional<int> FindConstraint(std::string_view name) const;

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Objective& objective() const { return objective_; }

  size_t num_variables() const { return variables_.size(); }
  size_t num_constraints() const { return constraints_.size(); }
  bool HasBinaries() const;

  // Objective value of an assignment aligned with variables().
  double EvaluateObjective(const std::vector<double>& values) const;
  double RowActivity(int row, const std::vector<double>& values) const;
  // Largest bound or row violation of an assignment.
  double MaxViolation(const std::vector<double>& values) const;

 private:
  std::vector<Term> Normalize(std::vector<Term> terms) const;

  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  Objective objective_;
  std::unordered_map<std::string, int> var_index_;
  std::unordered_map<std::string, int> row_index_;
};

}  // namespace lp
}  // namespace pathopt

#endif
