#pragma once

#include <limits>
#include <vector>

#include "ihtp/milp.hpp"

// Dense bounded-variable revised primal simplex with an explicit basis
// inverse, product-form updates and periodic Eigen refactorization. Sized for
// the small node LPs of the builtin branch-and-bound backend.
namespace ihtp::milp::detail {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

struct LpResult {
  LpStatus status = LpStatus::IterLimit;
  double objective = 0.0;
  std::vector<double> x;  // structural values, size n
};

class SimplexSolver {
 public:
  SimplexSolver(int num_structural, const std::vector<double>& cost,
                const std::vector<Constraint>& rows);

  // Solves min c'x s.t. rows, lower <= x <= upper (structural bounds only;
  // row senses were fixed at construction).
  LpResult solve(const std::vector<double>& lower, const std::vector<double>& upper);

 private:
  static constexpr double kTol = 1e-7;       // feasibility / pricing tolerance
  static constexpr double kPivotTol = 1e-9;  // smallest acceptable pivot

  int n_ = 0;  // structural variables
  int m_ = 0;  // rows
  std::vector<std::vector<LinearTerm>> cols_;  // sparse columns incl. slacks (size n+m)
  std::vector<double> cost_;                   // size n+m
  std::vector<double> rhs_;
  std::vector<double> slack_lower_, slack_upper_;

  // Per-solve state.
  std::vector<double> lower_, upper_;  // size n+m
  std::vector<double> x_;
  std::vector<int> basis_;      // row -> variable
  std::vector<int> basis_pos_;  // variable -> row or -1
  std::vector<double> binv_;    // m*m row-major
  long iterations_ = 0;
  long iteration_limit_ = 0;
  int degenerate_streak_ = 0;
  bool bland_ = false;

  void reset_basis();
  void refactorize();
  void compute_basic_values();
  double column_dot(int var, const std::vector<double>& y) const;
  void ftran(int var, std::vector<double>* alpha) const;  // alpha = Binv * a_var
  void pivot(int entering, int leaving_row, const std::vector<double>& alpha);
  double infeasibility() const;

  // One priced iteration; phase1 selects the infeasibility-reducing objective.
  // Returns false when no eligible entering variable remains.
  bool iterate(bool phase1, bool* hit_limit, bool* unbounded);
};

}  // namespace ihtp::milp::detail
