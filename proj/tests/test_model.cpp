#include <random>

#include "doctest.h"
#include "ihtp/ihtc_format.hpp"
#include "ihtp/instance_gen.hpp"
#include "ihtp/model.hpp"
#include "oracles.hpp"

using namespace ihtp;

namespace {

const char* kMinimalInstance = R"({
  "days": 1,
  "skill_levels": 1,
  "shift_types": ["early", "late", "night"],
  "age_groups": ["adult"],
  "weights": {"unscheduled": 100, "delay": 1, "open_theater": 10, "surgeon_transfer": 1,
              "age_mix": 1, "excess_workload": 1, "continuity": 1, "skill": 1},
  "surgeons": [],
  "operating_theaters": [],
  "rooms": [{"id": "r0", "capacity": 1}],
  "nurses": [{"id": "n0", "skill": 0, "shifts": [
    {"day": 1, "shift": "early", "capacity": 480},
    {"day": 1, "shift": "late", "capacity": 480},
    {"day": 1, "shift": "night", "capacity": 480}]}],
  "occupants": [],
  "patients": []
})";

}  // namespace

TEST_CASE("minimal instance parses with horizon 1") {
  Instance inst = parse_instance(kMinimalInstance);
  CHECK(inst.horizon_days == 1);
  CHECK(inst.patients.empty());
  CHECK(inst.rooms.size() == 1);
  CHECK(inst.available_nurses(1, 0).size() == 1);
}

TEST_CASE("unknown surgeon reference is a semantic error naming the id") {
  std::string text = kMinimalInstance;
  text.replace(text.find("\"patients\": []"), 14, R"("patients": [{
    "id": "p0", "mandatory": false, "gender": "female", "age_group": "adult",
    "surgeon": "s9", "release_day": 1, "length_of_stay": 1, "surgery_duration": 30,
    "workload_profile": [0,0,0], "skill_profile": [0,0,0]}])");
  CHECK_THROWS_WITH_AS(parse_instance(text), doctest::Contains("s9"), SemanticError);
}

TEST_CASE("instance serialization round-trips semantically and bytewise") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    GenParams params;
    params.seed = seed;
    params.occupants = 2;
    const std::string bytes = generate_instance_json(params);
    Instance inst = parse_instance(bytes);
    const std::string again = serialize_instance(inst);
    Instance reparsed = parse_instance(again);
    CHECK(serialize_instance(reparsed) == again);  // canonical form is a fixed point
    CHECK(reparsed.patients.size() == inst.patients.size());
    CHECK(reparsed.horizon_days == inst.horizon_days);
    for (std::size_t p = 0; p < inst.patients.size(); ++p) {
      CHECK(reparsed.patients[p].id == inst.patients[p].id);
      CHECK(reparsed.patients[p].workload == inst.patients[p].workload);
      CHECK(reparsed.patients[p].kind == inst.patients[p].kind);
    }
  }
}

TEST_CASE("official schema adapter maps onto the canonical form") {
  const char* official = R"({
    "days": 2, "skill_levels": 2, "shift_types": ["early","late","night"],
    "age_groups": ["young","old"],
    "weights": {"room_mixed_age": 3, "room_nurse_skill": 4, "continuity_of_care": 5,
                "nurse_eccessive_workload": 6, "open_operating_theater": 7,
                "surgeon_transfer": 8, "patient_delay": 9, "unscheduled_optional": 10},
    "surgeons": [{"id":"s0","max_surgery_time":[120,0]}],
    "operating_theaters": [{"id":"t0","availability":[240,240]}],
    "rooms": [{"id":"r0","capacity":2}],
    "nurses": [{"id":"n0","skill_level":1,
                "working_shifts":[{"day":0,"shift":"early","max_load":300}]}],
    "occupants": [{"id":"a0","gender":"A","age_group":"old","length_of_stay":1,
                   "workload_produced":[10,10,10],"skill_level_required":[0,0,0],
                   "room_id":"r0"}],
    "patients": [{"id":"p0","mandatory":true,"gender":"B","age_group":"young",
                  "surgery_release_day":0,"surgery_due_day":1,"length_of_stay":1,
                  "surgery_duration":60,"surgeon_id":"s0",
                  "workload_produced":[5,5,5],"skill_level_required":[1,1,1],
                  "incompatible_room_ids":[]}]
  })";
  CHECK(looks_like_official_instance(official));
  Instance inst = parse_instance_auto(official);
  CHECK(inst.weights.age_mix == 3);
  CHECK(inst.weights.skill == 4);
  CHECK(inst.weights.continuity == 5);
  CHECK(inst.weights.excess_workload == 6);
  CHECK(inst.weights.open_theater == 7);
  CHECK(inst.weights.delay == 9);
  CHECK(inst.weights.unscheduled == 10);
  const Patient& p0 = inst.patients[inst.patient_index("p0")];
  CHECK(p0.release_day == 1);   // 0-based day shifted
  CHECK(*p0.deadline == 2);
  CHECK(inst.nurses[0].works(1, 0));
  CHECK_FALSE(looks_like_official_instance(kMinimalInstance));
}

TEST_CASE("published component row sums to its published objective") {
  const CostBreakdown row = CostBreakdown::from_components(129, 2800, 10, 240, 470, 15, 210, 0);
  CHECK(row.total == 3874);
  CHECK(row.total == row.component_sum());
}

TEST_CASE("empty schedule evaluates to all-zero breakdown") {
  GenParams params;
  params.patients = 3;
  params.occupants = 0;
  params.optional_fraction = 1.0;  // everyone optional
  params.seed = 11;
  Instance inst = generate_instance(params);
  REQUIRE(inst.flexible_patients.size() == 3);
  Schedule schedule = Schedule::empty_for(inst);
  CHECK(check_hard(inst, schedule).empty());
  const CostBreakdown b = evaluate(inst, schedule);
  CHECK(b.coc == 0);
  CHECK(b.excess_workload == 0);
  CHECK(b.open_theaters == 0);
  CHECK(b.delay == 0);
  CHECK(b.age_mix == 0);
  CHECK(b.skill_mismatch == 0);
  CHECK(b.surgeon_transfer == 0);
  CHECK(b.unscheduled == 3 * inst.weights.unscheduled);
  CHECK(b.total == b.unscheduled);
}

TEST_CASE("gender clash raises exactly one gender violation per room-day") {
  const char* text = R"({
    "days": 1, "skill_levels": 1, "shift_types": ["early","late","night"],
    "age_groups": ["age0"],
    "weights": {"unscheduled": 10, "delay": 1, "open_theater": 1, "surgeon_transfer": 1,
                "age_mix": 1, "excess_workload": 1, "continuity": 1, "skill": 1},
    "surgeons": [{"id":"s0","capacity":[480]}],
    "operating_theaters": [{"id":"t0","capacity":[480]}],
    "rooms": [{"id":"r0","capacity":2}],
    "nurses": [{"id":"n0","skill":0,"shifts":[
      {"day":1,"shift":"early","capacity":480},
      {"day":1,"shift":"late","capacity":480},
      {"day":1,"shift":"night","capacity":480}]}],
    "occupants": [],
    "patients": [
      {"id":"pa","mandatory":false,"gender":"female","age_group":"age0","surgeon":"s0",
       "release_day":1,"length_of_stay":1,"surgery_duration":0,
       "workload_profile":[0,0,0],"skill_profile":[0,0,0]},
      {"id":"pb","mandatory":false,"gender":"male","age_group":"age0","surgeon":"s0",
       "release_day":1,"length_of_stay":1,"surgery_duration":0,
       "workload_profile":[0,0,0],"skill_profile":[0,0,0]}]
  })";
  Instance clash = parse_instance(text);
  REQUIRE(clash.rooms[0].capacity >= 2);
  Schedule schedule = Schedule::empty_for(clash);
  const int pa = clash.patient_index("pa"), pb = clash.patient_index("pb");
  schedule.admission[pa] = 1;
  schedule.admission[pb] = 1;
  schedule.room[pa] = 0;
  schedule.room[pb] = 0;
  schedule.theater[pa] = 0;
  schedule.theater[pb] = 0;
  for (int s = 0; s < kNumShifts; ++s)
    schedule.set_roster(clash, 0, 1, s, clash.available_nurses(1, s).front());
  int gender_violations = 0;
  for (const Violation& v : check_hard(clash, schedule))
    if (v.rule == HardRule::GenderMix) ++gender_violations;
  CHECK(gender_violations == 1);
}

TEST_CASE("check_hard matches the naive checker on random schedules") {
  std::mt19937_64 rng(42);
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Instance inst = generate_instance(oracle::tiny_params(seed));
    // Random, not necessarily feasible schedules: random admissions, random
    // rooms, random theaters, random roster entries.
    Schedule schedule = Schedule::empty_for(inst);
    for (int p : inst.flexible_patients) {
      if (rng() % 4 == 0) continue;
      schedule.admission[p] = 1 + static_cast<int>(rng() % inst.horizon_days);
      schedule.room[p] = static_cast<int>(rng() % inst.rooms.size());
      schedule.theater[p] = static_cast<int>(rng() % inst.theaters.size());
    }
    for (int r = 0; r < static_cast<int>(inst.rooms.size()); ++r)
      for (int d = 1; d <= inst.horizon_days; ++d)
        for (int s = 0; s < kNumShifts; ++s)
          if (rng() % 3 != 0)
            schedule.set_roster(inst, r, d, s, static_cast<int>(rng() % inst.nurses.size()));

    std::multiset<std::string> mine;
    for (const Violation& v : check_hard(inst, schedule))
      mine.insert(std::string(hard_rule_name(v.rule)) + "|" + v.entity + "|" +
                  std::to_string(v.day));
    CHECK(mine == oracle::naive_hard_violations(inst, schedule));
    ++compared;
  }
  CHECK(compared == 60);
}

TEST_CASE("evaluator equals the naive per-definition oracle on feasible schedules") {
  std::mt19937_64 rng(7);
  int compared = 0;
  for (std::uint64_t seed = 0; compared < 1000 && seed < 4000; ++seed) {
    Instance inst = generate_instance(oracle::tiny_params(seed));
    auto schedule = oracle::random_feasible_schedule(inst, rng, 40);
    if (!schedule) continue;
    const CostBreakdown mine = evaluate(inst, *schedule);
    const oracle::NaiveCosts naive = oracle::naive_evaluate(inst, *schedule);
    CHECK(mine.coc == inst.weights.continuity * naive.coc);
    CHECK(mine.unscheduled == inst.weights.unscheduled * naive.unscheduled);
    CHECK(mine.excess_workload == inst.weights.excess_workload * naive.excess);
    CHECK(mine.open_theaters == inst.weights.open_theater * naive.open_theaters);
    CHECK(mine.delay == inst.weights.delay * naive.delay);
    CHECK(mine.age_mix == inst.weights.age_mix * naive.age_mix);
    CHECK(mine.skill_mismatch == inst.weights.skill * naive.skill);
    CHECK(mine.surgeon_transfer == inst.weights.surgeon_transfer * naive.transfers);
    CHECK(mine.total == naive.weighted_total);
    CHECK(mine.total == mine.component_sum());
    ++compared;
  }
  CHECK(compared == 1000);
}

TEST_CASE("removing an admitted optional never adds violations of rules c-g") {
  std::mt19937_64 rng(99);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Instance inst = generate_instance(oracle::tiny_params(seed));
    auto schedule = oracle::random_feasible_schedule(inst, rng, 30);
    if (!schedule) continue;
    for (int p : inst.flexible_patients) {
      if (inst.patients[p].mandatory() || !schedule->admission[p]) continue;
      Schedule restricted = *schedule;
      restricted.admission[p] = std::nullopt;
      restricted.room[p] = -1;
      restricted.theater[p] = -1;
      for (const Violation& v : check_hard(inst, restricted)) {
        CHECK(v.rule != HardRule::RoomCapacity);
        CHECK(v.rule != HardRule::GenderMix);
        CHECK(v.rule != HardRule::IncompatibleRoom);
        CHECK(v.rule != HardRule::SurgeonCapacity);
        CHECK(v.rule != HardRule::TheaterCapacity);
      }
    }
  }
}

TEST_CASE("solution files round-trip") {
  std::mt19937_64 rng(5);
  int done = 0;
  for (std::uint64_t seed = 0; done < 10 && seed < 100; ++seed) {
    GenParams params = oracle::tiny_params(seed);
    params.occupants = 1;
    Instance inst = generate_instance(params);
    auto schedule = oracle::random_feasible_schedule(inst, rng, 30);
    if (!schedule) continue;
    const std::string bytes = write_solution(inst, *schedule);
    Schedule reread = read_solution(bytes, inst);
    CHECK(reread.admission == schedule->admission);
    CHECK(reread.room == schedule->room);
    CHECK(reread.theater == schedule->theater);
    CHECK(reread.roster == schedule->roster);
    CHECK(write_solution(inst, reread) == bytes);  // byte-identical re-serialization
    ++done;
  }
  CHECK(done == 10);
}

TEST_CASE("solution naming a nonexistent room errors with the id") {
  Instance inst = parse_instance(kMinimalInstance);
  const char* bad = R"({"patients": [], "nurses": [
    {"id": "n0", "assignments": [{"day": 1, "shift": "early", "rooms": ["ghost"]}]}]})";
  CHECK_THROWS_WITH_AS(read_solution(bad, inst), doctest::Contains("ghost"), SemanticError);
}
