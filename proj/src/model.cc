#include "pathopt/model.h"

#include <algorithm>
#include <cmath>

namespace pathopt {
namespace lp {

int ProgramModel::AddVariable(std::string name, double lb, double ub,
                              VarType type) {
  if (name.empty()) throw ModelError("variable name must not be empty");
  if (std::isnan(lb) || std::isnan(ub) || lb > ub) {
    throw ModelError("invalid bounds for variable " + name);
  }
  if (type == VarType::kBinary) {
    lb = std::max(lb, 0.0);
    ub = std::min(ub, 1.0);
    if (lb > ub) throw ModelError("empty binary domain for " + name);
  }
  int index = static_cast<int>(variables_.size());
  if (!var_index_.emplace(name, index).second) {
    throw ModelError("duplicate variable " + name);
  }
  variables_.push_back({std::move(name), lb, ub, type});
  return index;
}

std::vector<Term> ProgramModel::Normalize(std::vector<Term> terms) const {
  for (const Term& t : terms) {
    if (t.var < 0 || static_cast<size_t>(t.var) >= variables_.size()) {
      throw ModelError("term references unknown variable index " +
                       std::to_string(t.var));
    }
    if (!std::isfinite(t.coeff)) {
      throw ModelError("non-finite coefficient on " + variables_[t.var].name);
    }
  }
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  for (const Term& t : terms) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coeff += t.coeff;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coeff == 0.0; });
  return merged;
}

int ProgramModel::AddConstraint(std::string name, std::vector<Term> terms,
                                Relation relation, double rhs) {
  if (!std::isfinite(rhs)) {
    throw ModelError("non-finite right-hand side in row " + name);
  }
  int index = static_cast<int>(constraints_.size());
  if (name.empty()) name = "r" + std::to_string(index);
  if (!row_index_.emplace(name, index).second) {
    throw ModelError("duplicate constraint " + name);
  }
  constraints_.push_back({std::move(name), Normalize(std::move(terms)),
                          relation, rhs});
  return index;
}

void ProgramModel::SetObjective(std::vector<Term> terms, Sense sense) {
  objective_ = {Normalize(std::move(terms)), sense};
}

void ProgramModel::SetBounds(int var, double lb, double ub) {
  if (var < 0 || static_cast<size_t>(var) >= variables_.size()) {
    throw ModelError("unknown variable index " + std::to_string(var));
  }
  if (std::isnan(lb) || std::isnan(ub) || lb > ub) {
    throw ModelError("invalid bounds for variable " + variables_[var].name);
  }
  variables_[var].lb = lb;
  variables_[var].ub = ub;
}

std::optional<int> ProgramModel::FindVariable(std::string_view name) const {
  auto it = var_index_.find(std::string(name));
  if (it == var_index_.end()) return std::nullopt;
  return it->second;
}

int ProgramModel::VariableIndex(std::string_view name) const {
  auto index = FindVariable(name);
  if (!index) throw ModelError("unknown variable " + std::string(name));
  return *index;
}

std::optional<int> ProgramModel::FindConstraint(std::string_view name) const {
  auto it = row_index_.find(std::string(name));
  if (it == row_index_.end()) return std::nullopt;
  return it->second;
}

bool ProgramModel::HasBinaries() const {
  return std::any_of(variables_.begin(), variables_.end(),
                     [](const Variable& v) {
                       return v.type == VarType::kBinary;
                     });
}

double ProgramModel::EvaluateObjective(const std::vector<double>& values) const {
  double total = 0;
  for (const Term& t : objective_.terms) total += t.coeff * values[t.var];
  return total;
}

double ProgramModel::RowActivity(int row,
                                 const std::vector<double>& values) const {
  double total = 0;
  for (const Term& t : constraints_[row].terms) total += t.coeff * values[t.var];
  return total;
}

double ProgramModel::MaxViolation(const std::vector<double>& values) const {
  double worst = 0;
  for (size_t j = 0; j < variables_.size(); ++j) {
    worst = std::max(worst, variables_[j].lb - values[j]);
    worst = std::max(worst, values[j] - variables_[j].ub);
  }
  for (size_t i = 0; i < constraints_.size(); ++i) {
    const Constraint& row = constraints_[i];
    double activity = RowActivity(static_cast<int>(i), values);
    switch (row.relation) {
      case Relation::kLessEqual:
        worst = std::max(worst, activity - row.rhs);
        break;
      case Relation::kGreaterEqual:
        worst = std::max(worst, row.rhs - activity);
        break;
      case Relation::kEqual:
        worst = std::max(worst, std::abs(activity - row.rhs));
        break;
    }
  }
  return worst;
}

}  // namespace lp
}  // namespace pathopt
