#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ihtp/milp.hpp"
#include "ihtp/model.hpp"
#include "ihtp/preprocess.hpp"

namespace ihtp {

// Lower bounds on the skill + continuity-of-care cost attributable to a
// patient if admitted on a given day.
struct CareBoundTable {
  static constexpr std::int64_t kUncoverable = std::numeric_limits<std::int64_t>::max();

  std::vector<std::map<int, std::int64_t>> bounds;  // [patient] day -> bound

  bool contains(int patient, int day) const {
    return patient < static_cast<int>(bounds.size()) && bounds[patient].count(day) > 0;
  }
  std::int64_t get(int patient, int day) const { return bounds[patient].at(day); }
  void set(int patient, int day, std::int64_t value) {
    if (patient >= static_cast<int>(bounds.size())) bounds.resize(patient + 1);
    bounds[patient][day] = value;
  }
};

// Cheap valid bound: one nurse covers at most m slots of the stay, where m is
// the best single-nurse coverage, so at least ceil(slots / m) distinct nurses
// are needed. Equals 3 * w_coc on one-shift-per-day rosters. kUncoverable when
// some slot of the stay has no working nurse at all.
std::int64_t trivial_care_bound(const Instance& instance, int patient, int day);

CareBoundTable trivial_table(const Instance& instance, const AdmissionWindows& windows);

// Optimal value of the per-pair MIP: cover every (day, shift) slot of the
// stay, paying w_skill per unit of skill gap and w_coc per distinct nurse.
// Returns CareBoundTable::kUncoverable when the stay cannot be covered.
std::int64_t bound_pair(const Instance& instance, int patient, int day,
                        const milp::MilpLimits& limits = {});

struct CareBoundStats {
  int pairs_total = 0;
  int pairs_solved = 0;
  int pairs_fallback = 0;  // deadline or limit hit; trivial bound used
};

// Solves one MIP per (patient, admissible day) on a small work-stealing pool,
// cheapest windows first. Pairs unfinished at the deadline keep the trivial
// bound.
CareBoundTable bound_all(const Instance& instance, const AdmissionWindows& windows,
                         double wall_time_s, int workers,
                         const milp::CancelToken* cancel = nullptr,
                         CareBoundStats* stats = nullptr);

// Cache file keyed by an instance digest so repeated runs can skip Phase 1.
std::string serialize_care_bounds(const Instance& instance, const CareBoundTable& table);
bool deserialize_care_bounds(const std::string& bytes, const Instance& instance,
                             CareBoundTable* table);
std::string instance_digest(const Instance& instance);

}  // namespace ihtp
