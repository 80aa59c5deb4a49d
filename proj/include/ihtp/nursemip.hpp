#pragma once

#include <cstdint>
#include <vector>

#include "ihtp/milp.hpp"
#include "ihtp/model.hpp"
#include "ihtp/nursesa.hpp"
#include "ihtp/roomcp.hpp"

namespace ihtp {

struct NurseMipVars {
  // assign[(slot index into cost model slots)][k] -> x_{n,d,s,r} for the k-th
  // available nurse of that slot.
  std::vector<std::vector<int>> assign;
  std::vector<std::vector<int>> cares;   // [nurse][present patient pos] -> y_{n,p}
  std::vector<int> present_patients;
  std::vector<std::vector<int>> excess;  // [nurse][(d-1)*3+s] -> eps or -1
};

// Exact nurse-assignment MIP on a fixed room solution: skill gaps per
// assignment, continuity both aggregated (big-M = per-(nurse, patient)
// variable count) and disaggregated, per-nurse excess workload rows, and a
// coverage equality per occupied room-shift.
milp::MilpModel build_nurse_model(const Instance& inst, const RoomAssignment& fixed,
                                  const Roster* warm_start, NurseMipVars* vars);

struct PolishResult {
  Roster roster;
  std::int64_t cost = 0;  // three nurse terms, evaluator semantics
  bool improved = false;
};

// Returns the better of the input roster and the best MIP incumbent; never
// worse than the input.
PolishResult polish(const Instance& inst, const RoomAssignment& fixed, const Roster& roster,
                    const milp::MilpLimits& limits);

}  // namespace ihtp
