#include "ihtp/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include "simplex.hpp"

namespace ihtp::milp {

int MilpModel::add_binary(std::string name) {
  variables.push_back({std::move(name), VarKind::Binary, 0.0, 1.0});
  return static_cast<int>(variables.size()) - 1;
}

int MilpModel::add_integer(std::string name, double lower, double upper) {
  variables.push_back({std::move(name), VarKind::Integer, lower, upper});
  return static_cast<int>(variables.size()) - 1;
}

int MilpModel::add_continuous(std::string name, double lower, double upper) {
  variables.push_back({std::move(name), VarKind::Continuous, lower, upper});
  return static_cast<int>(variables.size()) - 1;
}

void MilpModel::add_row(std::string name, std::vector<LinearTerm> terms, RowSense sense,
                        double rhs) {
  std::erase_if(terms, [](const LinearTerm& t) { return t.coef == 0.0; });
  constraints.push_back({std::move(name), std::move(terms), sense, rhs});
}

void MilpModel::set_objective_term(int var, double coef) {
  for (LinearTerm& term : objective)
    if (term.var == var) {
      term.coef = coef;
      return;
    }
  if (coef != 0.0) objective.push_back({var, coef});
}

bool MilpModel::valid_references() const {
  const int n = static_cast<int>(variables.size());
  for (const Constraint& row : constraints)
    for (const LinearTerm& term : row.terms)
      if (term.var < 0 || term.var >= n) return false;
  for (const LinearTerm& term : objective)
    if (term.var < 0 || term.var >= n) return false;
  for (const Variable& var : variables)
    if (var.kind == VarKind::Binary && (var.lower < 0.0 || var.upper > 1.0)) return false;
  return true;
}

std::string SolveHints::serialize() const {
  return prefer_interior_point_root ? "root-relaxation=interior-point" : "root-relaxation=default";
}

SolveHints SolveHints::deserialize(const std::string& token) {
  SolveHints hints;
  hints.prefer_interior_point_root = token == "root-relaxation=interior-point";
  return hints;
}

SolveHints solve_root_relaxation_barrier_hint(const MilpModel&) {
  SolveHints hints;
  hints.prefer_interior_point_root = true;
  return hints;
}

double evaluate_objective(const MilpModel& model, const std::vector<double>& values) {
  double total = model.objective_offset;
  for (const LinearTerm& term : model.objective) total += term.coef * values[term.var];
  return total;
}

namespace {

using Clock = std::chrono::steady_clock;

bool is_integer_kind(VarKind kind) { return kind != VarKind::Continuous; }

// Node bounds are stored as diffs against the root to keep the tree light.
struct BranchNode {
  double bound;
  int depth;
  std::int64_t seq;
  std::vector<std::pair<int, double>> lower_changes;
  std::vector<std::pair<int, double>> upper_changes;
};

struct NodeOrder {
  bool operator()(const BranchNode& a, const BranchNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // smaller bound first
    if (a.depth != b.depth) return a.depth < b.depth;  // then deeper (plunge)
    return a.seq > b.seq;
  }
};

bool satisfies_rows(const MilpModel& model, const std::vector<double>& values, double tol) {
  for (const Constraint& row : model.constraints) {
    double activity = 0.0;
    double scale = 1.0;
    for (const LinearTerm& term : row.terms) {
      activity += term.coef * values[term.var];
      scale += std::abs(term.coef);
    }
    const double slack = activity - row.rhs;
    switch (row.sense) {
      case RowSense::LessEqual:
        if (slack > tol * scale) return false;
        break;
      case RowSense::Equal:
        if (std::abs(slack) > tol * scale) return false;
        break;
      case RowSense::GreaterEqual:
        if (slack < -tol * scale) return false;
        break;
    }
  }
  return true;
}

class BranchAndBoundBackend : public MilpBackend {
 public:
  std::string name() const override { return "builtin-bb"; }

  MilpOutcome solve(const MilpModel& model, const MilpLimits& limits,
                    const IncumbentCallback& on_incumbent) override {
    if (!model.valid_references()) throw std::invalid_argument("milp model references invalid");
    const int n = static_cast<int>(model.variables.size());
    const auto start = Clock::now();
    const auto deadline =
        std::isfinite(limits.wall_time_s)
            ? start + std::chrono::duration_cast<Clock::duration>(
                          std::chrono::duration<double>(limits.wall_time_s))
            : Clock::time_point::max();

    std::vector<double> cost(n, 0.0);
    for (const LinearTerm& term : model.objective) cost[term.var] += term.coef;
    detail::SimplexSolver simplex(n, cost, model.constraints);

    std::vector<double> root_lower(n), root_upper(n);
    for (int j = 0; j < n; ++j) {
      root_lower[j] = model.variables[j].lower;
      root_upper[j] = model.variables[j].upper;
      if (is_integer_kind(model.variables[j].kind)) {
        if (std::isfinite(root_lower[j])) root_lower[j] = std::ceil(root_lower[j] - 1e-9);
        if (std::isfinite(root_upper[j])) root_upper[j] = std::floor(root_upper[j] + 1e-9);
      }
    }

    MilpOutcome outcome;
    double incumbent_obj = kInf;
    std::set<std::vector<long long>> seen_assignments;

    auto integer_signature = [&](const std::vector<double>& values) {
      std::vector<long long> key;
      key.reserve(n);
      for (int j = 0; j < n; ++j)
        if (is_integer_kind(model.variables[j].kind)) key.push_back(std::llround(values[j]));
      return key;
    };

    auto record_solution = [&](std::vector<double> values) {
      for (int j = 0; j < n; ++j)
        if (is_integer_kind(model.variables[j].kind)) values[j] = std::llround(values[j]);
      double obj = evaluate_objective(model, values);
      if (model.integral_objective) obj = std::llround(obj);
      if (obj >= incumbent_obj - 1e-9) return;  // improving incumbents only
      auto key = integer_signature(values);
      if (!seen_assignments.insert(std::move(key)).second) return;
      incumbent_obj = obj;
      outcome.incumbents.push_back({std::move(values), obj});
      if (on_incumbent) on_incumbent(outcome.incumbents.back());
    };

    // Warm start: a feasible full assignment seeds the incumbent.
    if (!model.warm_start.empty()) {
      std::vector<double> values(n, 0.0);
      std::vector<bool> provided(n, false);
      for (const auto& [var, value] : model.warm_start) {
        values[var] = value;
        provided[var] = true;
      }
      bool complete = true;
      for (int j = 0; j < n; ++j) {
        if (!provided[j]) values[j] = std::clamp(0.0, root_lower[j], root_upper[j]);
        if (values[j] < root_lower[j] - 1e-6 || values[j] > root_upper[j] + 1e-6) complete = false;
        if (is_integer_kind(model.variables[j].kind) &&
            std::abs(values[j] - std::llround(values[j])) > kIntegralityTol)
          complete = false;
      }
      if (complete && satisfies_rows(model, values, 1e-6)) record_solution(std::move(values));
    }

    std::priority_queue<BranchNode, std::vector<BranchNode>, NodeOrder> open;
    open.push({-kInf, 0, 0, {}, {}});
    std::int64_t seq = 0;
    bool stopped = false;
    auto cutoff = [&]() {
      return model.integral_objective ? incumbent_obj - 1.0 + 1e-6 : incumbent_obj - 1e-9;
    };

    std::vector<double> lower(n), upper(n);
    while (!open.empty()) {
      if ((limits.cancel && limits.cancel->cancelled()) || Clock::now() >= deadline ||
          (limits.node_limit >= 0 && outcome.nodes_explored >= limits.node_limit)) {
        stopped = true;
        break;
      }
      BranchNode node = open.top();
      open.pop();
      if (incumbent_obj < kInf && node.bound >= cutoff()) continue;

      ++outcome.nodes_explored;
      lower = root_lower;
      upper = root_upper;
      for (const auto& [var, value] : node.lower_changes) lower[var] = value;
      for (const auto& [var, value] : node.upper_changes) upper[var] = value;

      detail::LpResult lp = simplex.solve(lower, upper);
      if (lp.status == detail::LpStatus::Infeasible) continue;
      if (lp.status == detail::LpStatus::Unbounded)
        throw std::runtime_error("milp backend: relaxation unbounded");

      double bound = node.bound;
      int branch_var = -1;
      if (lp.status == detail::LpStatus::Optimal) {
        bound = std::max(bound, lp.objective + model.objective_offset);
        if (incumbent_obj < kInf && bound >= cutoff()) continue;
        // Most-fractional branching.
        double best_score = -1.0;
        for (int j = 0; j < n; ++j) {
          if (!is_integer_kind(model.variables[j].kind)) continue;
          const double frac = std::abs(lp.x[j] - std::round(lp.x[j]));
          if (frac <= kIntegralityTol) continue;
          const double score = 0.5 - std::abs(frac - 0.5);
          if (score > best_score) {
            best_score = score;
            branch_var = j;
          }
        }
        if (branch_var < 0) {
          record_solution(lp.x);
          continue;
        }
      } else {
        // LP iteration limit: keep the parent's bound and branch blindly on
        // the first non-fixed integer; correctness is preserved, just slower.
        for (int j = 0; j < n && branch_var < 0; ++j)
          if (is_integer_kind(model.variables[j].kind) && upper[j] - lower[j] > 0.5)
            branch_var = j;
        if (branch_var < 0) continue;  // cannot certify anything for this node
      }

      const double pivot = (lp.status == detail::LpStatus::Optimal)
                               ? lp.x[branch_var]
                               : 0.5 * (lower[branch_var] + upper[branch_var]);
      const double floor_value = std::floor(pivot + 1e-9);
      BranchNode down{bound, node.depth + 1, ++seq, node.lower_changes, node.upper_changes};
      down.upper_changes.emplace_back(branch_var, floor_value);
      BranchNode up{bound, node.depth + 1, ++seq, std::move(node.lower_changes),
                    std::move(node.upper_changes)};
      up.lower_changes.emplace_back(branch_var, floor_value + 1.0);
      if (floor_value >= lower[branch_var] - 1e-9) open.push(std::move(down));
      if (floor_value + 1.0 <= upper[branch_var] + 1e-9) open.push(std::move(up));
    }

    const bool exhausted = !stopped;

    // Dual bound: min over still-open subtrees, or the incumbent on exhaustion.
    double dual = kInf;
    if (!exhausted) {
      dual = open.empty() ? incumbent_obj : open.top().bound;
    } else if (incumbent_obj < kInf) {
      dual = incumbent_obj;
    }

    if (incumbent_obj < kInf) {
      outcome.status = exhausted ? MilpStatus::Optimal : MilpStatus::Feasible;
      double bound_value = std::min(dual, incumbent_obj);
      if (model.integral_objective && std::isfinite(bound_value))
        bound_value = std::ceil(bound_value - 1e-6);
      if (bound_value != -kInf) outcome.dual_bound = bound_value;
    } else if (exhausted) {
      outcome.status = MilpStatus::Infeasible;
    } else {
      outcome.status = MilpStatus::LimitNoSolution;
      if (dual != -kInf && dual != kInf)
        outcome.dual_bound = model.integral_objective ? std::ceil(dual - 1e-6) : dual;
    }
    return outcome;
  }
};

std::shared_ptr<MilpBackend>& backend_slot() {
  static std::shared_ptr<MilpBackend> backend = std::make_shared<BranchAndBoundBackend>();
  return backend;
}
std::mutex backend_mutex;

}  // namespace

MilpBackend& default_backend() {
  std::lock_guard<std::mutex> lock(backend_mutex);
  return *backend_slot();
}

void set_default_backend(std::shared_ptr<MilpBackend> backend) {
  std::lock_guard<std::mutex> lock(backend_mutex);
  backend_slot() = std::move(backend);
}

MilpOutcome solve(const MilpModel& model, const MilpLimits& limits,
                  const IncumbentCallback& on_incumbent) {
  std::shared_ptr<MilpBackend> backend;
  {
    std::lock_guard<std::mutex> lock(backend_mutex);
    backend = backend_slot();
  }
  return backend->solve(model, limits, on_incumbent);
}

namespace {

std::string lp_number(double value) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(6);
  out << value;
  return out.str();
}

void write_terms(std::ostream& out, const std::vector<LinearTerm>& terms) {
  std::map<int, double> merged;
  for (const LinearTerm& term : terms) merged[term.var] += term.coef;
  bool first = true;
  for (const auto& [var, coef] : merged) {
    if (coef == 0.0) continue;
    if (first) {
      out << (coef < 0 ? "- " : "");
    } else {
      out << (coef < 0 ? " - " : " + ");
    }
    out << lp_number(std::abs(coef)) << " v" << var;
    first = false;
  }
  if (first) out << "0 v0";
}

}  // namespace

void write_lp_file(const MilpModel& model, std::ostream& out) {
  out << "\\ exported model: " << model.variables.size() << " variables, "
      << model.constraints.size() << " rows\n";
  out << "Minimize\n obj: ";
  write_terms(out, model.objective);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < model.constraints.size(); ++i) {
    const Constraint& row = model.constraints[i];
    out << " c" << i << ": ";
    write_terms(out, row.terms);
    switch (row.sense) {
      case RowSense::LessEqual: out << " <= "; break;
      case RowSense::Equal: out << " = "; break;
      case RowSense::GreaterEqual: out << " >= "; break;
    }
    out << lp_number(row.rhs) << "\n";
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < model.variables.size(); ++j) {
    const Variable& var = model.variables[j];
    if (std::isfinite(var.lower) && std::isfinite(var.upper))
      out << " " << lp_number(var.lower) << " <= v" << j << " <= " << lp_number(var.upper) << "\n";
    else if (std::isfinite(var.lower))
      out << " v" << j << " >= " << lp_number(var.lower) << "\n";
    else if (std::isfinite(var.upper))
      out << " -inf <= v" << j << " <= " << lp_number(var.upper) << "\n";
    else
      out << " v" << j << " free\n";
  }
  bool any_int = false;
  for (const Variable& var : model.variables) any_int |= is_integer_kind(var.kind);
  if (any_int) {
    out << "Generals\n";
    for (std::size_t j = 0; j < model.variables.size(); ++j)
      if (is_integer_kind(model.variables[j].kind)) out << " v" << j << "\n";
  }
  out << "End\n";
}

}  // namespace ihtp::milp
