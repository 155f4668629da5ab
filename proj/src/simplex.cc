#include "simplex.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pathopt {
namespace lp {
namespace internal {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kDropTol = 1e-13;
constexpr int kStallLimit = 100;

}  // namespace

StandardForm StandardForm::FromModel(const ProgramModel& model) {
  StandardForm f;
  f.num_cols = static_cast<int>(model.num_variables());
  f.num_rows = static_cast<int>(model.num_constraints());
  f.sign = model.objective().sense == Sense::kMaximize ? -1.0 : 1.0;

  f.cost.assign(f.num_cols, 0.0);
  for (const Term& t : model.objective().terms) f.cost[t.var] = f.sign * t.coeff;

  std::vector<int> count(f.num_cols, 0);
  f.row_count.assign(f.num_rows, 0);
  for (int i = 0; i < f.num_rows; ++i) {
    for (const Term& t : model.constraints()[i].terms) ++count[t.var];
    f.row_count[i] = static_cast<int>(model.constraints()[i].terms.size());
  }
  f.col_start.assign(f.num_cols + 1, 0);
  for (int j = 0; j < f.num_cols; ++j) f.col_start[j + 1] = f.col_start[j] + count[j];
  f.row_index.resize(f.col_start.back());
  f.value.resize(f.col_start.back());
  std::vector<int> fill(f.col_start.begin(), f.col_start.end() - 1);
  for (int i = 0; i < f.num_rows; ++i) {
    for (const Term& t : model.constraints()[i].terms) {
      f.row_index[fill[t.var]] = i;
      f.value[fill[t.var]] = t.coeff;
      ++fill[t.var];
    }
  }

  f.lb.resize(f.num_cols + f.num_rows);
  f.ub.resize(f.num_cols + f.num_rows);
  f.binary.assign(f.num_cols, 0);
  for (int j = 0; j < f.num_cols; ++j) {
    const Variable& v = model.variables()[j];
    f.lb[j] = v.lb;
    f.ub[j] = v.ub;
    f.binary[j] = v.type == VarType::kBinary;
  }
  for (int i = 0; i < f.num_rows; ++i) {
    const Constraint& c = model.constraints()[i];
    double lo = -kInfinity, hi = kInfinity;
    if (c.relation != Relation::kLessEqual) lo = c.rhs;
    if (c.relation != Relation::kGreaterEqual) hi = c.rhs;
    f.lb[f.num_cols + i] = lo;
    f.ub[f.num_cols + i] = hi;
  }
  return f;
}

SimplexEngine::SimplexEngine(const StandardForm& form,
                             const SolverOptions& options)
    : form_(form),
      options_(options),
      n_(form.num_cols),
      m_(form.num_rows),
      x_(form.num_cols + form.num_rows, 0.0),
      scale_(form.num_cols + form.num_rows, 1.0),
      row_scale_(form.num_rows, 1.0),
      status_(form.num_cols + form.num_rows, BasisStatus::kBasic),
      head_(form.num_rows),
      work_(form.num_rows) {
  Scale();
  lb_ = form_.lb;
  ub_ = form_.ub;
  SlackBasis();
  if (options_.time_limit > 0) {
    deadline_ = std::chrono::steady_clock::now() +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(options_.time_limit));
  }
}

// Geometric-mean passes over rows and columns, rounded to powers of two so
// scaling itself adds no rounding error.
void SimplexEngine::Scale() {
  std::vector<double> col(n_, 1.0);
  auto pow2 = [](double v) { return std::exp2(std::round(std::log2(v))); };
  for (int pass = 0; pass < 4; ++pass) {
    std::vector<double> lo(m_, kInfinity), hi(m_, 0.0);
    for (int j = 0; j < n_; ++j) {
      for (int k = form_.col_start[j]; k < form_.col_start[j + 1]; ++k) {
        const double a = std::abs(form_.value[k]) * col[j];
        const int i = form_.row_index[k];
        lo[i] = std::min(lo[i], a);
        hi[i] = std::max(hi[i], a);
      }
    }
    for (int i = 0; i < m_; ++i) {
      if (hi[i] > 0) row_scale_[i] = pow2(1.0 / std::sqrt(lo[i] * hi[i]));
    }
    for (int j = 0; j < n_; ++j) {
      double clo = kInfinity, chi = 0;
      for (int k = form_.col_start[j]; k < form_.col_start[j + 1]; ++k) {
        const double a = std::abs(form_.value[k]) * row_scale_[form_.row_index[k]];
        clo = std::min(clo, a);
        chi = std::max(chi, a);
      }
      if (chi > 0) col[j] = pow2(1.0 / std::sqrt(clo * chi));
    }
  }
  for (int j = 0; j < n_; ++j) {
    for (int k = form_.col_start[j]; k < form_.col_start[j + 1]; ++k) {
      form_.value[k] *= row_scale_[form_.row_index[k]] * col[j];
    }
    form_.cost[j] *= col[j];
    scale_[j] = col[j];
  }
  for (int i = 0; i < m_; ++i) scale_[n_ + i] = 1.0 / row_scale_[i];
  for (int k = 0; k < n_ + m_; ++k) {
    form_.lb[k] /= scale_[k];
    form_.ub[k] /= scale_[k];
  }
}

const std::vector<double>& SimplexEngine::values() const {
  unscaled_.resize(x_.size());
  for (size_t k = 0; k < x_.size(); ++k) unscaled_[k] = x_[k] * scale_[k];
  return unscaled_;
}

BasisStatus SimplexEngine::DefaultNonbasic(int var) const {
  if (std::isfinite(lb_[var])) return BasisStatus::kAtLower;
  if (std::isfinite(ub_[var])) return BasisStatus::kAtUpper;
  return BasisStatus::kFree;
}

double SimplexEngine::NonbasicValue(int var) const {
  switch (status_[var]) {
    case BasisStatus::kAtLower:
      return lb_[var];
    case BasisStatus::kAtUpper:
      return ub_[var];
    default:
      return 0.0;
  }
}

void SimplexEngine::SlackBasis() {
  for (int j = 0; j < n_; ++j) status_[j] = DefaultNonbasic(j);
  for (int i = 0; i < m_; ++i) status_[n_ + i] = BasisStatus::kBasic;
  need_reinvert_ = true;
}

void SimplexEngine::SetStatuses(const std::vector<BasisStatus>& status) {
  for (int j = 0; j < total() && j < static_cast<int>(status.size()); ++j) {
    status_[j] = status[j];
  }
  need_reinvert_ = true;
}

void SimplexEngine::SetBounds(int var, double lb, double ub) {
  lb /= scale_[var];
  ub /= scale_[var];
  lb_[var] = lb;
  ub_[var] = ub;
  if (status_[var] != BasisStatus::kBasic) {
    if ((status_[var] == BasisStatus::kAtLower && !std::isfinite(lb)) ||
        (status_[var] == BasisStatus::kAtUpper && !std::isfinite(ub)) ||
        (status_[var] == BasisStatus::kFree &&
         (std::isfinite(lb) || std::isfinite(ub)))) {
      status_[var] = DefaultNonbasic(var);
    }
  }
  need_values_ = true;
}

double SimplexEngine::DotColumn(const std::vector<double>& y, int var) const {
  if (var >= n_) return -y[var - n_];
  double s = 0;
  for (int k = form_.col_start[var]; k < form_.col_start[var + 1]; ++k) {
    s += form_.value[k] * y[form_.row_index[k]];
  }
  return s;
}

// B^-1 = E_k ... E_1 (-I).
void SimplexEngine::FtranDense(std::vector<double>& v) const {
  for (double& e : v) e = -e;
  const int count = static_cast<int>(eta_position_.size());
  for (int k = 0; k < count; ++k) {
    const int r = eta_position_[k];
    if (v[r] == 0.0) continue;
    v[r] /= eta_pivot_[k];
    const double vr = v[r];
    for (int p = eta_start_[k]; p < eta_start_[k + 1]; ++p) {
      v[eta_index_[p]] -= eta_value_[p] * vr;
    }
  }
}

void SimplexEngine::Ftran(int var, std::vector<double>& out) const {
  out.assign(m_, 0.0);
  if (var >= n_) {
    out[var - n_] = -1.0;
  } else {
    for (int k = form_.col_start[var]; k < form_.col_start[var + 1]; ++k) {
      out[form_.row_index[k]] = form_.value[k];
    }
  }
  FtranDense(out);
}

// y^T = c_B^T B^-1.
void SimplexEngine::Btran(std::vector<double>& w) const {
  for (int k = static_cast<int>(eta_position_.size()) - 1; k >= 0; --k) {
    const int r = eta_position_[k];
    double s = w[r];
    for (int p = eta_start_[k]; p < eta_start_[k + 1]; ++p) {
      s -= eta_value_[p] * w[eta_index_[p]];
    }
    w[r] = s / eta_pivot_[k];
  }
  for (double& e : w) e = -e;
}

void SimplexEngine::AddEta(int position, const std::vector<double>& alpha) {
  eta_position_.push_back(position);
  eta_pivot_.push_back(alpha[position]);
  for (int i = 0; i < m_; ++i) {
    if (i != position && std::abs(alpha[i]) > kDropTol) {
      eta_index_.push_back(i);
      eta_value_.push_back(alpha[i]);
    }
  }
  eta_start_.push_back(static_cast<int>(eta_index_.size()));
}

void SimplexEngine::Reinvert() {
  eta_position_.clear();
  eta_pivot_.clear();
  eta_start_.assign(1, 0);
  eta_index_.clear();
  eta_value_.clear();

  for (int i = 0; i < m_; ++i) head_[i] = n_ + i;
  std::vector<char> open(m_);
  for (int i = 0; i < m_; ++i) open[i] = status_[n_ + i] != BasisStatus::kBasic;

  std::vector<int> cols;
  for (int j = 0; j < n_; ++j) {
    if (status_[j] == BasisStatus::kBasic) cols.push_back(j);
  }
  std::stable_sort(cols.begin(), cols.end(), [&](int a, int b) {
    return form_.col_start[a + 1] - form_.col_start[a] <
           form_.col_start[b + 1] - form_.col_start[b];
  });

  std::vector<double> alpha;
  for (int j : cols) {
    Ftran(j, alpha);
    double best = 0;
    for (int i = 0; i < m_; ++i) {
      if (open[i]) best = std::max(best, std::abs(alpha[i]));
    }
    if (best <= 1e-7) {
      status_[j] = DefaultNonbasic(j);
      continue;
    }
    int pick = -1;
    for (int i = 0; i < m_; ++i) {
      if (!open[i] || std::abs(alpha[i]) < 0.1 * best) continue;
      if (pick < 0 || form_.row_count[i] < form_.row_count[pick] ||
          (form_.row_count[i] == form_.row_count[pick] &&
           std::abs(alpha[i]) > std::abs(alpha[pick]))) {
        pick = i;
      }
    }
    AddEta(pick, alpha);
    head_[pick] = j;
    open[pick] = 0;
  }
  for (int i = 0; i < m_; ++i) {
    if (open[i]) status_[n_ + i] = BasisStatus::kBasic;
  }

  for (int j = 0; j < total(); ++j) {
    const BasisStatus s = status_[j];
    if (s == BasisStatus::kBasic) continue;
    if ((s == BasisStatus::kAtLower && !std::isfinite(lb_[j])) ||
        (s == BasisStatus::kAtUpper && !std::isfinite(ub_[j])) ||
        (s == BasisStatus::kFree &&
         (std::isfinite(lb_[j]) || std::isfinite(ub_[j])))) {
      status_[j] = DefaultNonbasic(j);
    }
  }
  // A basic logical whose row was claimed by a structural must leave.
  std::vector<char> in_basis(total(), 0);
  for (int i = 0; i < m_; ++i) in_basis[head_[i]] = 1;
  for (int j = 0; j < total(); ++j) {
    if (status_[j] == BasisStatus::kBasic && !in_basis[j]) {
      status_[j] = DefaultNonbasic(j);
    }
  }

  etas_since_reinvert_ = 0;
  need_reinvert_ = false;
  need_values_ = true;
}

void SimplexEngine::ComputeBasicValues() {
  std::vector<double>& v = work_;
  v.assign(m_, 0.0);
  for (int j = 0; j < total(); ++j) {
    if (status_[j] == BasisStatus::kBasic) continue;
    const double val = NonbasicValue(j);
    x_[j] = val;
    if (val == 0.0) continue;
    if (j >= n_) {
      v[j - n_] -= val;
    } else {
      for (int k = form_.col_start[j]; k < form_.col_start[j + 1]; ++k) {
        v[form_.row_index[k]] += form_.value[k] * val;
      }
    }
  }
  FtranDense(v);
  for (int i = 0; i < m_; ++i) x_[head_[i]] = -v[i];
  need_values_ = false;
}

double SimplexEngine::BasicInfeasibility(int var) const {
  if (x_[var] < lb_[var]) return lb_[var] - x_[var];
  if (x_[var] > ub_[var]) return x_[var] - ub_[var];
  return 0.0;
}

double SimplexEngine::MaxInfeasibility() const {
  double worst = 0;
  for (int i = 0; i < m_; ++i) worst = std::max(worst, BasicInfeasibility(head_[i]));
  return worst;
}

double SimplexEngine::Objective() const {
  double s = 0;
  for (int j = 0; j < n_; ++j) s += form_.cost[j] * x_[j];
  return s;
}

std::vector<double> SimplexEngine::Duals() const {
  std::vector<double> y(m_);
  for (int i = 0; i < m_; ++i) y[i] = CostOf(head_[i]);
  Btran(y);
  for (int i = 0; i < m_; ++i) y[i] *= row_scale_[i];
  return y;
}

int SimplexEngine::Price(const std::vector<double>& y, bool phase1,
                         double* reduced) const {
  const double tol = options_.tol_opt;
  int best = -1;
  double best_score = 0;
  for (int j = 0; j < total(); ++j) {
    const BasisStatus s = status_[j];
    if (s == BasisStatus::kBasic || lb_[j] == ub_[j]) continue;
    const double d = (phase1 ? 0.0 : CostOf(j)) - DotColumn(y, j);
    bool eligible = false;
    switch (s) {
      case BasisStatus::kAtLower:
        eligible = d < -tol;
        break;
      case BasisStatus::kAtUpper:
        eligible = d > tol;
        break;
      default:
        eligible = std::abs(d) > tol;
        break;
    }
    if (!eligible) continue;
    if (bland_) {
      *reduced = d;
      return j;
    }
    if (std::abs(d) > best_score) {
      best_score = std::abs(d);
      best = j;
      *reduced = d;
    }
  }
  return best;
}

SimplexEngine::Ratio SimplexEngine::RatioTest(
    int entering, int direction, const std::vector<double>& alpha,
    bool phase1) const {
  const double tol = options_.tol_feas * 0.1;
  const double infeasible = options_.tol_feas;
  const double range = ub_[entering] - lb_[entering];

  // Target bound for each candidate row, or NaN when it does not block.
  auto target = [&](int i, double rate, bool* upper) {
    const int var = head_[i];
    const double x = x_[var], l = lb_[var], u = ub_[var];
    if (rate > 0) {
      if (phase1 && x < l - infeasible) {
        *upper = false;
        return l;
      }
      if (phase1 && x > u + infeasible) return kInfinity;
      *upper = true;
      return u;
    }
    if (phase1 && x > u + infeasible) {
      *upper = true;
      return u;
    }
    if (phase1 && x < l - infeasible) return -kInfinity;
    *upper = false;
    return l;
  };

  double theta_max = range;
  for (int i = 0; i < m_; ++i) {
    if (std::abs(alpha[i]) < kPivotTol) continue;
    const double rate = -direction * alpha[i];
    bool upper = false;
    const double bound = target(i, rate, &upper);
    if (!std::isfinite(bound)) continue;
    const double x = x_[head_[i]];
    const double relaxed =
        rate > 0 ? (bound + tol - x) / rate : (bound - tol - x) / rate;
    theta_max = std::min(theta_max, relaxed);
  }

  // slightly infeasible basics can push the relaxed bound below zero
  theta_max = std::max(theta_max, 0.0);

  Ratio result;
  if (!std::isfinite(theta_max)) {
    result.step = kInfinity;
    return result;
  }
  if (std::isfinite(range) && range <= theta_max) {
    result.step = range;
    return result;
  }

  double best_alpha = 0;
  for (int i = 0; i < m_; ++i) {
    const double a = std::abs(alpha[i]);
    if (a < kPivotTol) continue;
    const double rate = -direction * alpha[i];
    bool upper = false;
    const double bound = target(i, rate, &upper);
    if (!std::isfinite(bound)) continue;
    const double t = std::max((bound - x_[head_[i]]) / rate, 0.0);
    if (t > theta_max) continue;
    bool better = a > best_alpha;
    if (bland_ && result.position >= 0) {
      // smallest exact ratio, then smallest variable index
      better = t < result.step - 1e-12 ||
               (t <= result.step + 1e-12 &&
                head_[i] < head_[result.position]);
    }
    if (result.position < 0 || better) {
      result.position = i;
      result.step = t;
      result.to_upper = upper;
      best_alpha = a;
    }
  }
  return result;
}

// Widens every non-fixed bound by a small pseudo-random amount, so that
// ties in the ratio test become rare.
void SimplexEngine::Perturb() {
  uint64_t state = 0x9e3779b97f4a7c15ULL;
  auto next = [&state] {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  const double base = 5 * options_.tol_feas;
  for (int j = 0; j < total(); ++j) {
    if (lb_[j] == ub_[j]) continue;
    if (std::isfinite(lb_[j])) lb_[j] -= base * (1 + std::abs(lb_[j])) * (1 + next());
    if (std::isfinite(ub_[j])) ub_[j] += base * (1 + std::abs(ub_[j])) * (1 + next());
  }
  need_values_ = true;
}

LpOutcome SimplexEngine::Solve(int64_t iteration_limit) {
  const int64_t start = iterations_;
  const std::vector<double> lb = lb_, ub = ub_;
  Perturb();
  LpOutcome out = Iterate(iteration_limit);
  lb_ = lb;
  ub_ = ub;
  need_values_ = true;
  // widened bounds relax the problem, so infeasibility carries over
  if (out == LpOutcome::kInfeasible || out == LpOutcome::kIterationLimit) {
    ComputeBasicValues();
    return out;
  }
  return Iterate(iteration_limit - (iterations_ - start));
}

LpOutcome SimplexEngine::Iterate(int64_t iteration_limit) {
  if (need_reinvert_) Reinvert();
  if (need_values_) ComputeBasicValues();

  // above the ratio test's relaxation, so its overshoot never reopens phase 1
  const double tol = options_.tol_feas;
  const int interval = std::max(1, options_.refactor_interval);
  const int64_t start = iterations_;
  int stall = 0;
  int unbounded_retries = 0;
  bland_ = false;

  std::vector<double> y(m_), alpha(m_);
  while (true) {
    if (etas_since_reinvert_ >= interval) {
      Reinvert();
      ComputeBasicValues();
    }
    bool phase1 = false;
    for (int i = 0; i < m_; ++i) {
      const int var = head_[i];
      double c = CostOf(var);
      y[i] = c;
      if (x_[var] < lb_[var] - tol || x_[var] > ub_[var] + tol) phase1 = true;
    }
    if (phase1) {
      for (int i = 0; i < m_; ++i) {
        const int var = head_[i];
        y[i] = x_[var] < lb_[var] - tol ? -1.0
               : x_[var] > ub_[var] + tol ? 1.0
                                          : 0.0;
      }
    }
    Btran(y);
    double d = 0;
    const int q = Price(y, phase1, &d);
    if (q < 0) {
      if (etas_since_reinvert_ > 0) {
        Reinvert();
        ComputeBasicValues();
        continue;
      }
      return phase1 ? LpOutcome::kInfeasible : LpOutcome::kOptimal;
    }
    if (iterations_ - start >= iteration_limit) return LpOutcome::kIterationLimit;
    if (deadline_ && (iterations_ & 63) == 0 &&
        std::chrono::steady_clock::now() >= *deadline_) {
      return LpOutcome::kIterationLimit;
    }

    const int direction = d < 0 ? 1 : -1;
    Ftran(q, alpha);
    const Ratio rt = RatioTest(q, direction, alpha, phase1);
    if (!std::isfinite(rt.step)) {
      if (!phase1 && etas_since_reinvert_ == 0) return LpOutcome::kUnbounded;
      if (++unbounded_retries > 3) {
        return phase1 ? LpOutcome::kNumericFailure : LpOutcome::kUnbounded;
      }
      Reinvert();
      ComputeBasicValues();
      continue;
    }

    const double t = rt.step;
    if (t != 0.0) {
      for (int i = 0; i < m_; ++i) {
        if (alpha[i] != 0.0) x_[head_[i]] -= direction * t * alpha[i];
      }
      x_[q] += direction * t;
    }
    ++iterations_;
    if (rt.position < 0) {
      status_[q] = direction > 0 ? BasisStatus::kAtUpper : BasisStatus::kAtLower;
      x_[q] = direction > 0 ? ub_[q] : lb_[q];
    } else {
      const int leave = head_[rt.position];
      status_[leave] = rt.to_upper ? BasisStatus::kAtUpper : BasisStatus::kAtLower;
      x_[leave] = rt.to_upper ? ub_[leave] : lb_[leave];
      AddEta(rt.position, alpha);
      head_[rt.position] = q;
      status_[q] = BasisStatus::kBasic;
      ++etas_since_reinvert_;
    }

    if (t * std::abs(d) < 1e-12) {
      if (++stall > kStallLimit) bland_ = true;
    } else {
      stall = 0;
      bland_ = false;
    }
  }
}

}  // namespace internal
}  // namespace lp
}  // namespace pathopt
