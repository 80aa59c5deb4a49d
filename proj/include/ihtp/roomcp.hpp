#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ihtp/admission.hpp"
#include "ihtp/milp.hpp"
#include "ihtp/model.hpp"

namespace ihtp {

// Fixed patient-day plus patient-room decisions, the input contract of the
// nurse stages.
struct RoomAssignment {
  std::vector<std::optional<int>> admission;  // per patient
  std::vector<int> room;                      // per patient, -1 when absent
};

struct RoomSolution {
  std::vector<int> room;  // per patient, -1 when absent
  std::int64_t age_mix_cost = 0;  // weighted, equals the evaluator's age-mix term
};

enum class RoomSearchStatus { Feasible, Infeasible, Timeout };

struct RoomSearchResult {
  RoomSearchStatus status = RoomSearchStatus::Timeout;
  std::vector<RoomSolution> solutions;  // improving order; last is the best found
  bool proved_optimal = false;          // search exhausted with a solution in hand
};

struct RoomSearchLimits {
  double wall_time_s = 5.0;
  int workers = 2;              // one systematic + randomized-restart helpers
  int max_solutions = 8;        // emission cap per admission solution
  std::uint64_t seed = 0;
  long restart_node_budget = 50000;  // failed nodes before a randomized restart
  const milp::CancelToken* cancel = nullptr;
};

// Backtracking search with gender/capacity/incompatibility propagation and
// branch-and-bound on the age-mix objective. Fail-first variable order;
// same-gender-then-empty value order. "Infeasible" is returned only after the
// systematic worker exhausts the search space.
RoomSearchResult solve_rooms(const Instance& inst, const AdmissionSolution& admission,
                             const RoomSearchLimits& limits,
                             const std::function<void(const RoomSolution&)>& sink = {});

}  // namespace ihtp
