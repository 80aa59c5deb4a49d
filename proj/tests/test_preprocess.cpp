#include <algorithm>
#include <random>

#include "doctest.h"
#include "ihtp/carebounds.hpp"
#include "ihtp/instance_gen.hpp"
#include "ihtp/preprocess.hpp"
#include "oracles.hpp"

using namespace ihtp;

namespace {

std::string one_patient_shell(bool mandatory, int unscheduled_weight, int surgeon_cap) {
  std::string mand = mandatory ? "true" : "false";
  std::string deadline = mandatory ? R"("deadline": 3,)" : "";
  return std::string(R"({
    "days": 3, "skill_levels": 1, "shift_types": ["early","late","night"],
    "age_groups": ["age0"],
    "weights": {"unscheduled": )") +
         std::to_string(unscheduled_weight) +
         R"(, "delay": 1, "open_theater": 1, "surgeon_transfer": 1,
             "age_mix": 1, "excess_workload": 1, "continuity": 1, "skill": 1},
    "surgeons": [{"id":"s0","capacity":[)" +
         std::to_string(surgeon_cap) + "," + std::to_string(surgeon_cap) + "," +
         std::to_string(surgeon_cap) +
         R"(]}],
    "operating_theaters": [{"id":"t0","capacity":[480,480,480]}],
    "rooms": [{"id":"r0","capacity":2}],
    "nurses": [{"id":"n0","skill":0,"shifts":[
      {"day":1,"shift":"early","capacity":480},{"day":1,"shift":"late","capacity":480},
      {"day":1,"shift":"night","capacity":480},{"day":2,"shift":"early","capacity":480},
      {"day":2,"shift":"late","capacity":480},{"day":2,"shift":"night","capacity":480},
      {"day":3,"shift":"early","capacity":480},{"day":3,"shift":"late","capacity":480},
      {"day":3,"shift":"night","capacity":480}]}],
    "occupants": [],
    "patients": [{"id":"p0","mandatory":)" +
         mand + "," + deadline +
         R"("gender":"female","age_group":"age0","surgeon":"s0",
         "release_day":1,"length_of_stay":1,"surgery_duration":60,
         "workload_profile":[0,0,0],"skill_profile":[0,0,0]}]
  })";
}

}  // namespace

TEST_CASE("zero surgeon capacity empties the window; mandatory patient errors") {
  Instance optional_inst = parse_instance(one_patient_shell(false, 999, 0));
  AdmissionWindows windows = compute_windows(optional_inst);
  CHECK(windows.of(optional_inst.patient_index("p0")).empty());

  Instance mandatory_inst = parse_instance(one_patient_shell(true, 999, 0));
  CHECK_THROWS_WITH_AS(compute_windows(mandatory_inst), doctest::Contains("p0"),
                       InfeasibleInstanceError);
}

TEST_CASE("zero unscheduled weight prunes every optional day") {
  Instance inst = parse_instance(one_patient_shell(false, 0, 480));
  AdmissionWindows windows = compute_windows(inst);
  CHECK(windows.of(inst.patient_index("p0")).empty());
}

TEST_CASE("windows respect release, deadline and surgeon capacity") {
  Instance inst = parse_instance(one_patient_shell(true, 999, 480));
  AdmissionWindows windows = compute_windows(inst);
  const std::vector<int> expected{1, 2, 3};
  CHECK(windows.of(inst.patient_index("p0")) == expected);
}

TEST_CASE("windows are monotone in the unscheduled weight") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Instance inst = generate_instance(oracle::tiny_params(seed));
    AdmissionWindows low = compute_windows(inst);
    Instance raised = inst;
    raised.weights.unscheduled += 500;
    AdmissionWindows high = compute_windows(raised);
    for (int p : inst.flexible_patients)
      for (int d : low.of(p))
        CHECK(std::find(high.of(p).begin(), high.of(p).end(), d) != high.of(p).end());
  }
}

TEST_CASE("pruning preserves the exhaustive optimum on tiny instances") {
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 25 && seed < 300; ++seed) {
    Instance inst = generate_instance(oracle::micro_params(seed));
    const auto unrestricted = oracle::exhaustive_optimum(inst);
    if (!unrestricted.feasible) continue;
    AdmissionWindows windows = compute_windows(inst);
    const auto restricted = oracle::exhaustive_optimum(inst, &windows);
    REQUIRE(restricted.feasible);  // windows keep at least one optimal vector
    CHECK(restricted.total == unrestricted.total);
    ++checked;
  }
  CHECK(checked == 25);
}

TEST_CASE("force-admitting on a pruned day never beats postponement") {
  int pruned_days_checked = 0;
  for (std::uint64_t seed = 0; pruned_days_checked < 10 && seed < 400; ++seed) {
    Instance inst = generate_instance(oracle::micro_params(seed));
    if (inst.flexible_patients.empty()) continue;
    // Make postponement cheap enough that late days actually get pruned.
    inst.weights.unscheduled = inst.weights.continuity + inst.weights.delay + 1;
    AdmissionWindows windows = compute_windows(inst);

    for (int p : inst.flexible_patients) {
      const Patient& pat = inst.patients[p];
      if (pat.mandatory()) continue;
      for (int d = pat.release_day; d <= inst.horizon_days; ++d) {
        if (inst.surgeons[pat.surgeon].capacity_by_day[d - 1] < pat.surgery_duration) continue;
        if (std::find(windows.of(p).begin(), windows.of(p).end(), d) != windows.of(p).end())
          continue;
        if (trivial_care_bound(inst, p, d) == CareBoundTable::kUncoverable) continue;

        // Optimum with p pinned to day d vs optimum with p removed plus the
        // postponement fee (the cost of the always-available alternative).
        Instance forced = inst;
        forced.patients[p].kind = PatientKind::Mandatory;
        forced.patients[p].release_day = d;
        forced.patients[p].deadline = d;
        forced.finalize();
        const auto with_day = oracle::exhaustive_optimum(forced);
        if (!with_day.feasible) continue;  // pinning may be room-infeasible

        Instance without = inst;
        without.patients.erase(without.patients.begin() + p);
        without.finalize();
        const auto postponed = oracle::exhaustive_optimum(without);
        REQUIRE(postponed.feasible);
        // Pinning moved the release day, so re-add the original delay fee.
        const std::int64_t delay_fee = inst.weights.delay * (d - pat.release_day);
        CHECK(with_day.total + delay_fee >= postponed.total + inst.weights.unscheduled);
        ++pruned_days_checked;
      }
    }
  }
  CHECK(pruned_days_checked >= 10);
}
