#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

// Backend-agnostic mixed-integer linear model description plus a pluggable
// solve interface (time limits, incumbent callbacks, dual bounds, cooperative
// cancellation). The builtin backend is an exact LP-relaxation branch-and-bound.
namespace ihtp::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kIntegralityTol = 1e-6;

enum class VarKind { Binary, Integer, Continuous };
enum class RowSense { LessEqual, Equal, GreaterEqual };

struct LinearTerm {
  int var = -1;
  double coef = 0.0;
};

struct Variable {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lower = 0.0;
  double upper = kInf;
};

struct Constraint {
  std::string name;
  std::vector<LinearTerm> terms;
  RowSense sense = RowSense::LessEqual;
  double rhs = 0.0;
};

struct MilpModel {
  std::vector<Variable> variables;
  std::vector<Constraint> constraints;
  std::vector<LinearTerm> objective;  // minimize
  double objective_offset = 0.0;
  std::vector<std::pair<int, double>> warm_start;  // (var, value), may be partial? must be full
  // Builder-asserted: every integer-feasible point has an integral objective
  // value (allows ceil-rounding of dual bounds and tight pruning).
  bool integral_objective = false;

  int add_binary(std::string name);
  int add_integer(std::string name, double lower, double upper);
  int add_continuous(std::string name, double lower, double upper);
  // Row helpers; terms with zero coefficient are dropped.
  void add_row(std::string name, std::vector<LinearTerm> terms, RowSense sense, double rhs);
  void set_objective_term(int var, double coef);
  bool valid_references() const;
};

enum class MilpStatus { Optimal, Feasible, Infeasible, LimitNoSolution };

struct MilpIncumbent {
  std::vector<double> values;  // integer variables already rounded
  double objective = 0.0;
};

struct MilpOutcome {
  MilpStatus status = MilpStatus::LimitNoSolution;
  std::vector<MilpIncumbent> incumbents;  // discovery order
  std::optional<double> dual_bound;
  std::int64_t nodes_explored = 0;

  const MilpIncumbent* best() const {
    const MilpIncumbent* result = nullptr;
    for (const MilpIncumbent& inc : incumbents)
      if (!result || inc.objective < result->objective) result = &inc;
    return result;
  }
};

// Advisory backend configuration. Tokens are semantics-preserving; backends
// may ignore any of them.
struct SolveHints {
  bool prefer_interior_point_root = false;

  std::string serialize() const;
  static SolveHints deserialize(const std::string& token);
  bool operator==(const SolveHints&) const = default;
};

// Advises the backend to solve the initial relaxation with an interior-point
// method when it has one.
SolveHints solve_root_relaxation_barrier_hint(const MilpModel& model);

class CancelToken {
 public:
  void request_cancel() { cancelled_.store(true, std::memory_order_relaxed); }
  bool cancelled() const { return cancelled_.load(std::memory_order_relaxed); }
  void reset() { cancelled_.store(false, std::memory_order_relaxed); }

 private:
  std::atomic<bool> cancelled_{false};
};

struct MilpLimits {
  double wall_time_s = kInf;
  int worker_count = 1;
  std::int64_t node_limit = -1;  // <0: unlimited
  const CancelToken* cancel = nullptr;
  SolveHints hints;
};

using IncumbentCallback = std::function<void(const MilpIncumbent&)>;

// Narrow backend interface: build/solve/cancel. Cancellation is cooperative
// via MilpLimits::cancel; the backend returns its best incumbent so far.
class MilpBackend {
 public:
  virtual ~MilpBackend() = default;
  virtual MilpOutcome solve(const MilpModel& model, const MilpLimits& limits,
                            const IncumbentCallback& on_incumbent) = 0;
  virtual std::string name() const = 0;
};

MilpBackend& default_backend();
void set_default_backend(std::shared_ptr<MilpBackend> backend);

MilpOutcome solve(const MilpModel& model, const MilpLimits& limits = {},
                  const IncumbentCallback& on_incumbent = {});

// Deterministic LP-file export (fixed-point decimals, variable order by index).
void write_lp_file(const MilpModel& model, std::ostream& out);

// Exact objective of an assignment, using the model's coefficients.
double evaluate_objective(const MilpModel& model, const std::vector<double>& values);

}  // namespace ihtp::milp
