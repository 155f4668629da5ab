#ifndef PATHOPT_TESTS_RATIONAL_LP_H
#define PATHOPT_TESTS_RATIONAL_LP_H

// Exact dense-tableau simplex over GMP rationals with Bland's rule. Slow,
// small and independent of the library solver; used as a reference.

#include <gmpxx.h>

#include <cmath>
#include <optional>
#include <vector>

#include "pathopt/model.h"

namespace testing_support {

enum class RationalStatus { kOptimal, kInfeasible, kUnbounded };

struct RationalResult {
  RationalStatus status = RationalStatus::kInfeasible;
  mpq_class objective;  // in the model's own sense
  std::vector<double> values;
};

class RationalLp {
 public:
  // Every finite bound and coefficient is converted exactly from double.
  static RationalResult Solve(const pathopt::lp::ProgramModel& model,
                              const std::vector<std::optional<double>>& fixed = {}) {
    RationalLp lp;
    return lp.Run(model, fixed);
  }

 private:
  // Original var j = offset_j + sign_j * (col_pos[j] - col_neg[j]).
  struct Mapping {
    mpq_class offset;
    int sign = 1;
    int pos = -1;
    int neg = -1;
  };

  RationalResult Run(const pathopt::lp::ProgramModel& model,
                     const std::vector<std::optional<double>>& fixed) {
    using namespace pathopt::lp;
    const auto& vars = model.variables();
    const int n = static_cast<int>(vars.size());
    std::vector<Mapping> map(n);
    int cols = 0;
    struct Row {
      std::vector<std::pair<int, mpq_class>> terms;
      int rel;  // -1 <=, 0 =, 1 >=
      mpq_class rhs;
    };
    std::vector<Row> rows;

    for (int j = 0; j < n; ++j) {
      double lb = vars[j].lb, ub = vars[j].ub;
      if (j < static_cast<int>(fixed.size()) && fixed[j]) lb = ub = *fixed[j];
      Mapping& mp = map[j];
      if (std::isfinite(lb)) {
        mp.offset = lb;
        mp.pos = cols++;
        if (std::isfinite(ub)) {
          rows.push_back({{{mp.pos, 1}}, -1, mpq_class(ub) - mpq_class(lb)});
        }
      } else if (std::isfinite(ub)) {
        mp.offset = ub;
        mp.sign = -1;
        mp.pos = cols++;
      } else {
        mp.pos = cols++;
        mp.neg = cols++;
      }
    }
    for (const Constraint& c : model.constraints()) {
      Row row;
      row.rel = c.relation == Relation::kLessEqual ? -1
                : c.relation == Relation::kEqual   ? 0
                                                   : 1;
      row.rhs = c.rhs;
      for (const Term& t : c.terms) {
        const Mapping& mp = map[t.var];
        mpq_class a(t.coeff);
        row.rhs -= a * mp.offset;
        row.terms.push_back({mp.pos, a * mp.sign});
        if (mp.neg >= 0) row.terms.push_back({mp.neg, -a * mp.sign});
      }
      rows.push_back(std::move(row));
    }

    const int m = static_cast<int>(rows.size());
    // columns: structural | slack per inequality | artificial per row
    int slack_count = 0;
    for (const Row& r : rows) slack_count += r.rel != 0;
    const int first_slack = cols;
    const int first_art = cols + slack_count;
    const int width = first_art + m;
    tab_.assign(m, std::vector<mpq_class>(width + 1));
    basis_.assign(m, -1);
    int slack = first_slack;
    for (int i = 0; i < m; ++i) {
      Row& r = rows[i];
      for (auto& [col, a] : r.terms) tab_[i][col] += a;
      if (r.rel != 0) tab_[i][slack++] = r.rel < 0 ? 1 : -1;
      tab_[i][width] = r.rhs;
      if (r.rhs < 0) {
        for (auto& e : tab_[i]) e = -e;
      }
      tab_[i][first_art + i] = 1;
      basis_[i] = first_art + i;
    }
    width_ = width;

    // phase 1
    std::vector<mpq_class> cost(width, 0);
    for (int i = 0; i < m; ++i) cost[first_art + i] = 1;
    allowed_.assign(width, true);
    Optimize(cost);
    mpq_class infeas = 0;
    for (int i = 0; i < m; ++i) {
      if (basis_[i] >= first_art) infeas += tab_[i][width];
    }
    RationalResult result;
    if (infeas > 0) {
      result.status = RationalStatus::kInfeasible;
      return result;
    }
    for (int i = 0; i < m; ++i) {
      if (basis_[i] < first_art) continue;
      for (int k = 0; k < first_art; ++k) {
        if (tab_[i][k] != 0) {
          Pivot(i, k);
          break;
        }
      }
    }
    for (int k = first_art; k < width; ++k) allowed_[k] = false;

    // phase 2, minimization of the sign-adjusted objective
    const bool maximize = model.objective().sense == Sense::kMaximize;
    std::fill(cost.begin(), cost.end(), 0);
    mpq_class constant = 0;
    for (const Term& t : model.objective().terms) {
      const Mapping& mp = map[t.var];
      mpq_class a(t.coeff);
      if (maximize) a = -a;
      constant += a * mp.offset;
      cost[mp.pos] += a * mp.sign;
      if (mp.neg >= 0) cost[mp.neg] -= a * mp.sign;
    }
    if (!Optimize(cost)) {
      result.status = RationalStatus::kUnbounded;
      return result;
    }
    std::vector<mpq_class> col_value(width, 0);
    for (int i = 0; i < m; ++i) col_value[basis_[i]] = tab_[i][width];
    mpq_class obj = constant;
    for (int k = 0; k < width; ++k) obj += cost[k] * col_value[k];
    result.status = RationalStatus::kOptimal;
    result.objective = maximize ? mpq_class(-obj) : obj;
    result.values.resize(n);
    for (int j = 0; j < n; ++j) {
      const Mapping& mp = map[j];
      mpq_class v = col_value[mp.pos];
      if (mp.neg >= 0) v -= col_value[mp.neg];
      result.values[j] = mpq_class(mp.offset + mp.sign * v).get_d();
    }
    return result;
  }

  void Pivot(int r, int k) {
    mpq_class p = tab_[r][k];
    for (auto& e : tab_[r]) e /= p;
    for (size_t i = 0; i < tab_.size(); ++i) {
      if (static_cast<int>(i) == r || tab_[i][k] == 0) continue;
      mpq_class f = tab_[i][k];
      for (int c = 0; c <= width_; ++c) {
        if (tab_[r][c] != 0) tab_[i][c] -= f * tab_[r][c];
      }
    }
    basis_[r] = k;
  }

  // false when unbounded
  bool Optimize(const std::vector<mpq_class>& cost) {
    const int m = static_cast<int>(tab_.size());
    while (true) {
      int enter = -1;
      for (int k = 0; k < width_ && enter < 0; ++k) {
        if (!allowed_[k]) continue;
        bool basic = false;
        for (int i = 0; i < m; ++i) basic |= basis_[i] == k;
        if (basic) continue;
        mpq_class d = cost[k];
        for (int i = 0; i < m; ++i) d -= cost[basis_[i]] * tab_[i][k];
        if (d < 0) enter = k;
      }
      if (enter < 0) return true;
      int leave = -1;
      mpq_class best;
      for (int i = 0; i < m; ++i) {
        if (tab_[i][enter] <= 0) continue;
        mpq_class ratio = tab_[i][width_] / tab_[i][enter];
        if (leave < 0 || ratio < best ||
            (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      Pivot(leave, enter);
    }
  }

  std::vector<std::vector<mpq_class>> tab_;
  std::vector<int> basis_;
  std::vector<bool> allowed_;
  int width_ = 0;
};

}  // namespace testing_support

#endif
