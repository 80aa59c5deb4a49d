#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "ihtp/admission.hpp"
#include "ihtp/milp.hpp"
#include "ihtp/model.hpp"

namespace ihtp {

struct TheaterDaySolution {
  int day = 0;
  std::vector<std::pair<int, int>> assignment;  // (patient, theater)
  std::vector<int> opened;                      // theater indices, ascending
  std::int64_t objective = 0;  // w_thea * |opened| + w_surg * surgeon-theater incidences
  bool optimal = false;
};

// Per-day assignment MIP: minimize opened theaters plus surgeon-theater
// incidences subject to per-theater capacity. Days are independent.
// Throws HardInfeasibleError when the aggregate capacity cannot host the
// day's surgeries (the admission stage rules this out; internal error).
TheaterDaySolution solve_day(const Instance& inst, int day,
                             const std::vector<int>& patients_on_day,
                             const milp::MilpLimits& limits);

// Solves every day with at least one surgery, a small worker pool splitting
// the days. The same plan is attached to every room solution of an admission.
std::map<int, TheaterDaySolution> solve_all_days(const Instance& inst,
                                                 const AdmissionSolution& admission,
                                                 double per_day_time_s, int workers,
                                                 const milp::CancelToken* cancel = nullptr);

}  // namespace ihtp
