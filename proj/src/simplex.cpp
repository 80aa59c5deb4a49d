#include "simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace ihtp::milp::detail {

namespace {
constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr int kRefactorInterval = 100;
constexpr int kBlandTrigger = 300;  // consecutive degenerate pivots before Bland's rule
}  // namespace

SimplexSolver::SimplexSolver(int num_structural, const std::vector<double>& cost,
                             const std::vector<Constraint>& rows)
    : n_(num_structural), m_(static_cast<int>(rows.size())) {
  cols_.assign(n_ + m_, {});
  cost_.assign(n_ + m_, 0.0);
  for (int j = 0; j < n_; ++j) cost_[j] = cost[j];
  rhs_.resize(m_);
  slack_lower_.resize(m_);
  slack_upper_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    const Constraint& row = rows[i];
    rhs_[i] = row.rhs;
    for (const LinearTerm& term : row.terms)
      if (term.coef != 0.0) cols_[term.var].push_back({i, term.coef});
    cols_[n_ + i].push_back({i, 1.0});
    switch (row.sense) {
      case RowSense::LessEqual:
        slack_lower_[i] = 0.0;
        slack_upper_[i] = kInfinity;
        break;
      case RowSense::Equal:
        slack_lower_[i] = 0.0;
        slack_upper_[i] = 0.0;
        break;
      case RowSense::GreaterEqual:
        slack_lower_[i] = -kInfinity;
        slack_upper_[i] = 0.0;
        break;
    }
  }
}

void SimplexSolver::reset_basis() {
  basis_.resize(m_);
  basis_pos_.assign(n_ + m_, -1);
  for (int i = 0; i < m_; ++i) {
    basis_[i] = n_ + i;
    basis_pos_[n_ + i] = i;
  }
  binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
  for (int i = 0; i < m_; ++i) binv_[static_cast<std::size_t>(i) * m_ + i] = 1.0;

  x_.assign(n_ + m_, 0.0);
  for (int j = 0; j < n_ + m_; ++j) {
    if (basis_pos_[j] >= 0) continue;
    if (std::isfinite(lower_[j]))
      x_[j] = lower_[j];
    else if (std::isfinite(upper_[j]))
      x_[j] = upper_[j];
    else
      x_[j] = 0.0;
  }
  compute_basic_values();
}

void SimplexSolver::refactorize() {
  Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(m_, m_);
  for (int k = 0; k < m_; ++k)
    for (const LinearTerm& entry : cols_[basis_[k]]) basis_matrix(entry.var, k) = entry.coef;
  Eigen::MatrixXd inverse = basis_matrix.partialPivLu().inverse();
  for (int i = 0; i < m_; ++i)
    for (int k = 0; k < m_; ++k) binv_[static_cast<std::size_t>(i) * m_ + k] = inverse(i, k);
  compute_basic_values();
}

void SimplexSolver::compute_basic_values() {
  std::vector<double> residual = rhs_;
  for (int j = 0; j < n_ + m_; ++j) {
    if (basis_pos_[j] >= 0 || x_[j] == 0.0) continue;
    for (const LinearTerm& entry : cols_[j]) residual[entry.var] -= entry.coef * x_[j];
  }
  for (int i = 0; i < m_; ++i) {
    double value = 0.0;
    const double* row = &binv_[static_cast<std::size_t>(i) * m_];
    for (int k = 0; k < m_; ++k) value += row[k] * residual[k];
    x_[basis_[i]] = value;
  }
}

double SimplexSolver::column_dot(int var, const std::vector<double>& y) const {
  double sum = 0.0;
  for (const LinearTerm& entry : cols_[var]) sum += y[entry.var] * entry.coef;
  return sum;
}

void SimplexSolver::ftran(int var, std::vector<double>* alpha) const {
  alpha->assign(m_, 0.0);
  for (const LinearTerm& entry : cols_[var]) {
    const double coef = entry.coef;
    const int k = entry.var;
    for (int i = 0; i < m_; ++i)
      (*alpha)[i] += binv_[static_cast<std::size_t>(i) * m_ + k] * coef;
  }
}

void SimplexSolver::pivot(int entering, int leaving_row, const std::vector<double>& alpha) {
  const double piv = alpha[leaving_row];
  double* pivot_row = &binv_[static_cast<std::size_t>(leaving_row) * m_];
  for (int k = 0; k < m_; ++k) pivot_row[k] /= piv;
  for (int i = 0; i < m_; ++i) {
    if (i == leaving_row || alpha[i] == 0.0) continue;
    double* row = &binv_[static_cast<std::size_t>(i) * m_];
    const double factor = alpha[i];
    for (int k = 0; k < m_; ++k) row[k] -= factor * pivot_row[k];
  }
  basis_pos_[basis_[leaving_row]] = -1;
  basis_[leaving_row] = entering;
  basis_pos_[entering] = leaving_row;
}

double SimplexSolver::infeasibility() const {
  double total = 0.0;
  for (int i = 0; i < m_; ++i) {
    const int j = basis_[i];
    if (x_[j] < lower_[j] - kTol) total += lower_[j] - x_[j];
    if (x_[j] > upper_[j] + kTol) total += x_[j] - upper_[j];
  }
  return total;
}

bool SimplexSolver::iterate(bool phase1, bool* hit_limit, bool* unbounded) {
  *hit_limit = false;
  *unbounded = false;

  // Pricing vector y; phase 1 prices the composite infeasibility objective.
  std::vector<double> weights(m_, 0.0);
  bool any_weight = false;
  for (int i = 0; i < m_; ++i) {
    const int j = basis_[i];
    if (phase1) {
      if (x_[j] < lower_[j] - kTol) {
        weights[i] = -1.0;
        any_weight = true;
      } else if (x_[j] > upper_[j] + kTol) {
        weights[i] = 1.0;
        any_weight = true;
      }
    } else {
      if (cost_[j] != 0.0) {
        weights[i] = cost_[j];
        any_weight = true;
      }
    }
  }
  std::vector<double> y(m_, 0.0);
  if (any_weight)
    for (int i = 0; i < m_; ++i) {
      if (weights[i] == 0.0) continue;
      const double* row = &binv_[static_cast<std::size_t>(i) * m_];
      const double w = weights[i];
      for (int k = 0; k < m_; ++k) y[k] += w * row[k];
    }

  int entering = -1;
  double entering_dir = 0.0;
  double best_score = phase1 ? -kTol : -kTol;
  for (int j = 0; j < n_ + m_; ++j) {
    if (basis_pos_[j] >= 0) continue;
    if (lower_[j] == upper_[j]) continue;  // fixed
    const double reduced = (phase1 ? 0.0 : cost_[j]) - column_dot(j, y);
    double score = 0.0, dir = 0.0;
    const bool at_lower = std::isfinite(lower_[j]) && x_[j] <= lower_[j] + kTol;
    const bool at_upper = std::isfinite(upper_[j]) && x_[j] >= upper_[j] - kTol;
    if ((at_lower || (!at_lower && !at_upper)) && reduced < -kTol) {
      score = -reduced;
      dir = 1.0;
    }
    if ((at_upper || (!at_lower && !at_upper)) && reduced > kTol && reduced > score) {
      score = reduced;
      dir = -1.0;
    }
    if (dir == 0.0) continue;
    if (bland_) {
      entering = j;
      entering_dir = dir;
      break;
    }
    if (score > best_score) {
      best_score = score;
      entering = j;
      entering_dir = dir;
    }
  }
  if (entering < 0) return false;

  std::vector<double> alpha;
  ftran(entering, &alpha);

  // Ratio test. Basic i moves at rate delta_i = -dir * alpha_i per unit step.
  double best_t = kInfinity;
  int leaving_row = -1;
  double leaving_bound = 0.0;
  for (int i = 0; i < m_; ++i) {
    const double delta = -entering_dir * alpha[i];
    if (std::abs(delta) < kPivotTol) continue;
    const int j = basis_[i];
    double t = kInfinity, bound = 0.0;
    const bool below = x_[j] < lower_[j] - kTol;
    const bool above = x_[j] > upper_[j] + kTol;
    if (below) {
      // Infeasible basic: blocks only when it regains its lower bound.
      if (delta > 0.0) {
        t = (lower_[j] - x_[j]) / delta;
        bound = lower_[j];
      }
    } else if (above) {
      if (delta < 0.0) {
        t = (x_[j] - upper_[j]) / (-delta);
        bound = upper_[j];
      }
    } else if (delta < 0.0 && std::isfinite(lower_[j])) {
      t = (x_[j] - lower_[j]) / (-delta);
      bound = lower_[j];
    } else if (delta > 0.0 && std::isfinite(upper_[j])) {
      t = (upper_[j] - x_[j]) / delta;
      bound = upper_[j];
    }
    if (t == kInfinity) continue;
    if (t < 0.0) t = 0.0;
    if (t < best_t - 1e-9 ||
        (t < best_t + 1e-9 &&
         (leaving_row < 0 || std::abs(alpha[i]) > std::abs(alpha[leaving_row])))) {
      if (t < best_t) best_t = t;
      leaving_row = i;
      leaving_bound = bound;
    }
  }
  // The entering variable's own opposite bound may block first.
  double own_span = kInfinity;
  if (std::isfinite(lower_[entering]) && std::isfinite(upper_[entering]))
    own_span = upper_[entering] - lower_[entering];
  if (own_span < best_t - 1e-12 || (leaving_row < 0 && own_span < kInfinity)) {
    const double t = own_span;
    for (int i = 0; i < m_; ++i) x_[basis_[i]] -= entering_dir * alpha[i] * t;
    x_[entering] = (entering_dir > 0.0) ? upper_[entering] : lower_[entering];
    degenerate_streak_ = 0;
    return true;
  }
  if (leaving_row < 0) {
    if (phase1) {
      // Bounded-below objective cannot decrease forever; numerical trouble.
      *hit_limit = true;
      return false;
    }
    *unbounded = true;
    return false;
  }

  const double t = best_t;
  for (int i = 0; i < m_; ++i) x_[basis_[i]] -= entering_dir * alpha[i] * t;
  x_[basis_[leaving_row]] = leaving_bound;  // snap to bound, kills drift
  x_[entering] += entering_dir * t;
  pivot(entering, leaving_row, alpha);

  if (t < 1e-12) {
    if (++degenerate_streak_ >= kBlandTrigger) bland_ = true;
  } else {
    degenerate_streak_ = 0;
    bland_ = false;
  }
  return true;
}

LpResult SimplexSolver::solve(const std::vector<double>& lower, const std::vector<double>& upper) {
  lower_.assign(n_ + m_, 0.0);
  upper_.assign(n_ + m_, 0.0);
  for (int j = 0; j < n_; ++j) {
    lower_[j] = lower[j];
    upper_[j] = upper[j];
  }
  for (int i = 0; i < m_; ++i) {
    lower_[n_ + i] = slack_lower_[i];
    upper_[n_ + i] = slack_upper_[i];
  }
  for (int j = 0; j < n_; ++j)
    if (lower_[j] > upper_[j] + 1e-12) return {LpStatus::Infeasible, 0.0, {}};

  reset_basis();
  iterations_ = 0;
  iteration_limit_ = 400 + 40L * (n_ + m_);
  degenerate_streak_ = 0;
  bland_ = false;

  LpResult result;
  bool hit_limit = false, unbounded = false;

  // Phase 1: drive basic bound violations to zero.
  while (infeasibility() > kTol) {
    if (++iterations_ > iteration_limit_) return {LpStatus::IterLimit, 0.0, {}};
    if (iterations_ % kRefactorInterval == 0) refactorize();
    if (!iterate(/*phase1=*/true, &hit_limit, &unbounded)) {
      if (hit_limit) return {LpStatus::IterLimit, 0.0, {}};
      refactorize();  // re-check with a clean inverse before declaring infeasible
      if (infeasibility() > kTol) return {LpStatus::Infeasible, 0.0, {}};
      break;
    }
  }

  // Phase 2: optimize the true objective.
  while (true) {
    if (++iterations_ > iteration_limit_) return {LpStatus::IterLimit, 0.0, {}};
    if (iterations_ % kRefactorInterval == 0) refactorize();
    if (!iterate(/*phase1=*/false, &hit_limit, &unbounded)) {
      if (unbounded) return {LpStatus::Unbounded, 0.0, {}};
      break;
    }
    if (infeasibility() > 1e-5) {
      // Numerical drift pushed a basic variable out of bounds; restore.
      refactorize();
      while (infeasibility() > kTol) {
        if (++iterations_ > iteration_limit_) return {LpStatus::IterLimit, 0.0, {}};
        if (!iterate(/*phase1=*/true, &hit_limit, &unbounded))
          return {LpStatus::IterLimit, 0.0, {}};
      }
    }
  }

  refactorize();
  if (infeasibility() > 1e-5) return {LpStatus::IterLimit, 0.0, {}};

  result.status = LpStatus::Optimal;
  result.x.assign(x_.begin(), x_.begin() + n_);
  double objective = 0.0;
  for (int j = 0; j < n_; ++j) objective += cost_[j] * result.x[j];
  result.objective = objective;
  return result;
}

}  // namespace ihtp::milp::detail
