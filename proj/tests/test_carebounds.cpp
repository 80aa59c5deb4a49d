#include <random>

#include "doctest.h"
#include "ihtp/carebounds.hpp"
#include "ihtp/instance_gen.hpp"
#include "ihtp/preprocess.hpp"
#include "oracles.hpp"

using namespace ihtp;

namespace {

// One patient staying one day; nurse roster shaped per test.
std::string care_shell(const std::string& nurses_json) {
  return std::string(R"({
    "days": 1, "skill_levels": 2, "shift_types": ["early","late","night"],
    "age_groups": ["age0"],
    "weights": {"unscheduled": 999, "delay": 1, "open_theater": 1, "surgeon_transfer": 1,
                "age_mix": 1, "excess_workload": 1, "continuity": 7, "skill": 3},
    "surgeons": [{"id":"s0","capacity":[480]}],
    "operating_theaters": [{"id":"t0","capacity":[480]}],
    "rooms": [{"id":"r0","capacity":1}],
    "nurses": )") +
         nurses_json + R"(,
    "occupants": [],
    "patients": [{"id":"p0","mandatory":true,"gender":"female","age_group":"age0",
      "surgeon":"s0","release_day":1,"deadline":1,"length_of_stay":1,"surgery_duration":30,
      "workload_profile":[10,10,10],"skill_profile":[1,1,1]}]
  })";
}

}  // namespace

TEST_CASE("single nurse covering all three shifts costs one continuity unit") {
  Instance inst = parse_instance(care_shell(R"([
    {"id":"n0","skill":1,"shifts":[
      {"day":1,"shift":"early","capacity":480},
      {"day":1,"shift":"late","capacity":480},
      {"day":1,"shift":"night","capacity":480}]}])"));
  const int p = inst.patient_index("p0");
  CHECK(bound_pair(inst, p, 1) == inst.weights.continuity);
  // The coverage-count trivial bound also collapses to one nurse here.
  CHECK(trivial_care_bound(inst, p, 1) == inst.weights.continuity);
}

TEST_CASE("three disjoint single-shift nurses force three continuity units") {
  Instance inst = parse_instance(care_shell(R"([
    {"id":"n0","skill":1,"shifts":[{"day":1,"shift":"early","capacity":480}]},
    {"id":"n1","skill":1,"shifts":[{"day":1,"shift":"late","capacity":480}]},
    {"id":"n2","skill":1,"shifts":[{"day":1,"shift":"night","capacity":480}]}])"));
  const int p = inst.patient_index("p0");
  CHECK(bound_pair(inst, p, 1) == 3 * inst.weights.continuity);
  CHECK(trivial_care_bound(inst, p, 1) == 3 * inst.weights.continuity);
}

TEST_CASE("uncoverable stay yields the sentinel") {
  Instance inst = parse_instance(care_shell(R"([
    {"id":"n0","skill":1,"shifts":[{"day":1,"shift":"early","capacity":480}]}])"));
  const int p = inst.patient_index("p0");
  CHECK(bound_pair(inst, p, 1) == CareBoundTable::kUncoverable);
  CHECK(trivial_care_bound(inst, p, 1) == CareBoundTable::kUncoverable);
}

TEST_CASE("skill gaps price into the bound") {
  // Only a low-skill nurse is available; each of the three shifts needs level
  // 1 care from a level-0 nurse.
  Instance inst = parse_instance(care_shell(R"([
    {"id":"n0","skill":0,"shifts":[
      {"day":1,"shift":"early","capacity":480},
      {"day":1,"shift":"late","capacity":480},
      {"day":1,"shift":"night","capacity":480}]}])"));
  const int p = inst.patient_index("p0");
  CHECK(bound_pair(inst, p, 1) == inst.weights.continuity + 3 * inst.weights.skill);
}

TEST_CASE("pair MIP equals exhaustive per-shift enumeration on random micro stays") {
  int compared = 0;
  for (std::uint64_t seed = 0; compared < 60 && seed < 200; ++seed) {
    GenParams params = oracle::micro_params(seed);
    params.nurses = 2 + static_cast<int>(seed % 3);  // 2..4 nurses
    Instance inst = generate_instance(params);
    for (int p : inst.flexible_patients) {
      const Patient& pat = inst.patients[p];
      for (int d = pat.release_day; d <= (pat.deadline ? *pat.deadline : inst.horizon_days);
           ++d) {
        const auto expected = oracle::care_oracle(inst, p, d);
        const std::int64_t actual = bound_pair(inst, p, d);
        if (!expected)
          CHECK(actual == CareBoundTable::kUncoverable);
        else
          CHECK(actual == *expected);
        ++compared;
      }
    }
  }
  CHECK(compared >= 60);
}

TEST_CASE("bound_all covers every window pair and respects the trivial floor") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Instance inst = generate_instance(oracle::tiny_params(seed));
    AdmissionWindows windows = compute_windows(inst);
    CareBoundStats stats;
    CareBoundTable table = bound_all(inst, windows, 10.0, 3, nullptr, &stats);
    int pairs = 0;
    for (int p : inst.flexible_patients)
      for (int d : windows.of(p)) {
        REQUIRE(table.contains(p, d));
        const std::int64_t trivial = trivial_care_bound(inst, p, d);
        if (table.get(p, d) != CareBoundTable::kUncoverable) CHECK(table.get(p, d) >= trivial);
        ++pairs;
      }
    CHECK(stats.pairs_total == pairs);
    CHECK(stats.pairs_solved == pairs);
  }
}

TEST_CASE("bound_all with zero flexible patients is empty") {
  GenParams params;
  params.patients = 0;
  params.occupants = 2;
  params.seed = 5;
  Instance inst = generate_instance(params);
  AdmissionWindows windows = compute_windows(inst);
  CareBoundStats stats;
  CareBoundTable table = bound_all(inst, windows, 5.0, 3, nullptr, &stats);
  CHECK(stats.pairs_total == 0);
  for (const auto& per_patient : table.bounds) CHECK(per_patient.empty());
}

TEST_CASE("care bound is a true lower bound on any completion's attributable care") {
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 20 && seed < 200; ++seed) {
    Instance inst = generate_instance(oracle::micro_params(seed));
    if (inst.flexible_patients.empty()) continue;
    bool any = false;
    for (const auto& admission : oracle::enumerate_admissions(inst)) {
      const auto attributable = oracle::min_attributable_care(inst, admission);
      for (const auto& [p, care] : attributable) {
        if (!admission[p] || !inst.patients[p].flexible()) continue;
        const std::int64_t bound = bound_pair(inst, p, *admission[p]);
        REQUIRE(bound != CareBoundTable::kUncoverable);
        CHECK(bound <= care);
        any = true;
      }
    }
    if (any) ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("care-bound cache round-trips against the instance digest") {
  Instance inst = generate_instance(oracle::tiny_params(3));
  AdmissionWindows windows = compute_windows(inst);
  CareBoundTable table = bound_all(inst, windows, 5.0, 2);
  const std::string bytes = serialize_care_bounds(inst, table);
  CareBoundTable loaded;
  REQUIRE(deserialize_care_bounds(bytes, inst, &loaded));
  CHECK(loaded.bounds == table.bounds);
  // A different instance rejects the cache.
  Instance other = generate_instance(oracle::tiny_params(4));
  CareBoundTable reject;
  CHECK_FALSE(deserialize_care_bounds(bytes, other, &reject));
}
