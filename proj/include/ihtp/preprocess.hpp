#pragma once

#include <vector>

#include "ihtp/model.hpp"

namespace ihtp {

struct CareBoundTable;  // carebounds.hpp

// Candidate admission-day sets per patient. Empty for occupants; an optional
// patient's set may be empty (always postponed), a mandatory patient's never.
struct AdmissionWindows {
  std::vector<std::vector<int>> days;  // indexed by patient, ascending days

  const std::vector<int>& of(int patient) const { return days[patient]; }
};

// Window construction: release/deadline clipping, surgeon-capacity filtering,
// stay-coverability filtering, and the delay-plus-care vs. postponement
// pruning for optional patients (>= drops on ties). Without a table the
// trivial care bound is used. Throws InfeasibleInstanceError when a mandatory
// patient ends up with an empty window.
AdmissionWindows compute_windows(const Instance& instance,
                                 const CareBoundTable* care_bounds = nullptr);

}  // namespace ihtp
