#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <vector>

#include "ihtp/carebounds.hpp"
#include "ihtp/milp.hpp"
#include "ihtp/model.hpp"
#include "ihtp/preprocess.hpp"

namespace ihtp {

struct DegenerateCapacityError : std::runtime_error {
  explicit DegenerateCapacityError(const std::string& what) : std::runtime_error(what) {}
};

// One admission-stage solution: day choices for flexible patients plus the
// model's own theater-opening and bound accounting, tagged with the rho that
// was active when it was found.
struct AdmissionSolution {
  std::vector<std::optional<int>> admitted;     // per patient; occupants day 1
  std::vector<std::vector<int>> opened_theaters;  // [day-1] -> theater indices
  std::int64_t bound_contribution = 0;          // admission objective value
  int rho = 0;

  // Dedup key over flexible patients: admission day, or 0 when postponed.
  std::vector<int> admission_key(const Instance& inst) const {
    std::vector<int> key;
    key.reserve(inst.flexible_patients.size());
    for (int p : inst.flexible_patients) key.push_back(admitted[p] ? *admitted[p] : 0);
    return key;
  }
};

struct AdmissionModel {
  milp::MilpModel model;
  // Variable lookup tables; -1 when absent.
  std::vector<std::vector<int>> admit_var;  // [patient][day-1] -> x_{p,d}
  std::vector<int> postpone_var;            // [patient] -> pi_p (optional only)
  std::vector<std::vector<int>> presence_var;  // [patient][day-1] -> z_{p,d} (flexible)
  std::vector<int> excess_var;              // [(d-1)*3+s] -> eps_{d,s}
  std::vector<std::vector<int>> theater_var;   // [theater][day-1] -> theta_{o,d}
};

// Builds the admission MIP: delay-plus-care objective, postpone-or-admit
// rows, surgeon capacity, aggregated theater opening, aggregated bed capacity
// reduced by rho, and aggregated nurse-excess lower bounds.
AdmissionModel build_admission_model(const Instance& inst, const AdmissionWindows& windows,
                                     const CareBoundTable& care_bounds, int rho);

// Extracts the admission choices of a solved incumbent.
AdmissionSolution extract_admission_solution(const Instance& inst, const AdmissionModel& model,
                                             const milp::MilpIncumbent& incumbent, int rho);

// Fills the model's warm-start assignment from a previous solution.
void warm_start_admission(const Instance& inst, const AdmissionModel& model,
                          const AdmissionSolution& solution, milp::MilpModel* target);

// Appends a no-good row excluding exactly this admitted-day vector.
void exclude_admission_vector(const Instance& inst, const AdmissionModel& model,
                              const AdmissionSolution& solution, milp::MilpModel* target);

enum class AdmissionRunStatus { Optimal, FeasibleLimit, Infeasible, NoSolution };

struct AdmissionRunResult {
  AdmissionRunStatus status = AdmissionRunStatus::NoSolution;
  std::optional<double> dual_bound;
  int emitted = 0;
};

using AdmissionSink = std::function<void(const AdmissionSolution&)>;

// Streams deduplicated incumbents to the sink in discovery order and returns
// the model's final dual bound. `exclude` seeds both the dedup filter and
// no-good cuts (used by orchestrator refills; such runs carry no valid
// dual bound for the original model).
AdmissionRunResult run_admission(const Instance& inst, const AdmissionWindows& windows,
                                 const CareBoundTable& care_bounds, int rho,
                                 const milp::MilpLimits& limits, const AdmissionSink& sink,
                                 const AdmissionSolution* warm_start = nullptr,
                                 const std::set<std::vector<int>>* exclude = nullptr);

}  // namespace ihtp
