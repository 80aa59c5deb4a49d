#include "ihtp/preprocess.hpp"

#include "ihtp/carebounds.hpp"

namespace ihtp {

AdmissionWindows compute_windows(const Instance& inst, const CareBoundTable* care_bounds) {
  AdmissionWindows windows;
  windows.days.assign(inst.patients.size(), {});

  for (int p : inst.flexible_patients) {
    const Patient& pat = inst.patients[p];
    const int last = pat.deadline ? *pat.deadline : inst.horizon_days;
    std::vector<int>& days = windows.days[p];
    for (int d = pat.release_day; d <= last; ++d) {
      if (inst.surgeons[pat.surgeon].capacity_by_day[d - 1] < pat.surgery_duration) continue;

      std::int64_t care = trivial_care_bound(inst, p, d);
      if (care_bounds && care_bounds->contains(p, d))
        care = std::max(care, care_bounds->get(p, d));
      if (care == CareBoundTable::kUncoverable) continue;  // stay cannot be nursed

      if (!pat.mandatory()) {
        // Postponing is at least as cheap once delay plus the care bound
        // reaches the unscheduled penalty; drop on ties.
        const std::int64_t committed =
            care + inst.weights.delay * static_cast<std::int64_t>(d - pat.release_day);
        if (committed >= inst.weights.unscheduled) continue;
      }
      days.push_back(d);
    }
    if (pat.mandatory() && days.empty())
      throw InfeasibleInstanceError("mandatory patient \"" + pat.id +
                                    "\" has no feasible admission day");
  }
  return windows;
}

}  // namespace ihtp
