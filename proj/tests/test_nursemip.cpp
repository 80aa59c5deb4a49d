#include <random>

#include "doctest.h"
#include "ihtp/instance_gen.hpp"
#include "ihtp/nursemip.hpp"
#include "ihtp/nursesa.hpp"
#include "oracles.hpp"

using namespace ihtp;

namespace {

std::optional<RoomAssignment> random_rooms(const Instance& inst, std::mt19937_64& rng) {
  auto schedule = oracle::random_feasible_schedule(inst, rng, 40);
  if (!schedule) return std::nullopt;
  RoomAssignment fixed;
  fixed.admission = schedule->admission;
  fixed.room = schedule->room;
  return fixed;
}

}  // namespace

TEST_CASE("single occupied room-shift with one nurse prices the forced costs") {
  const char* text = R"({
    "days": 1, "skill_levels": 2, "shift_types": ["early","late","night"],
    "age_groups": ["age0"],
    "weights": {"unscheduled": 1, "delay": 1, "open_theater": 1, "surgeon_transfer": 1,
                "age_mix": 1, "excess_workload": 2, "continuity": 7, "skill": 3},
    "surgeons": [{"id":"s0","capacity":[480]}],
    "operating_theaters": [{"id":"t0","capacity":[480]}],
    "rooms": [{"id":"r0","capacity":2}],
    "nurses": [{"id":"n0","skill":0,"shifts":[
      {"day":1,"shift":"early","capacity":480},{"day":1,"shift":"late","capacity":480},
      {"day":1,"shift":"night","capacity":480}]}],
    "occupants": [{"id":"a0","gender":"female","age_group":"age0","length_of_stay":1,
      "workload_profile":[10,10,10],"skill_profile":[1,1,1],"room":"r0"}],
    "patients": []
  })";
  Instance inst = parse_instance(text);
  RoomAssignment fixed;
  fixed.admission.assign(inst.patients.size(), 1);
  fixed.room.assign(inst.patients.size(), 0);

  NurseMipVars vars;
  milp::MilpModel model = build_nurse_model(inst, fixed, nullptr, &vars);
  milp::MilpOutcome outcome = milp::solve(model, {});
  REQUIRE(outcome.status == milp::MilpStatus::Optimal);
  // One nurse, one patient: continuity 7, skill gap 1 per shift at weight 3.
  CHECK(std::llround(outcome.best()->objective) ==
        inst.weights.continuity + 3 * inst.weights.skill);
}

TEST_CASE("MIP optimum equals exhaustive roster enumeration on micro instances") {
  std::mt19937_64 rng(11);
  int compared = 0;
  for (std::uint64_t seed = 0; compared < 110 && seed < 600; ++seed) {
    GenParams params = oracle::micro_params(seed);
    params.days = 2;
    params.nurses = 2 + static_cast<int>(seed % 2);  // 2..3 nurses
    Instance inst = generate_instance(params);
    auto fixed = random_rooms(inst, rng);
    if (!fixed) continue;
    const auto expected = oracle::roster_enumerate(inst, *fixed);
    if (!expected) continue;

    NurseMipVars vars;
    milp::MilpModel model = build_nurse_model(inst, *fixed, nullptr, &vars);
    milp::MilpOutcome outcome = milp::solve(model, {});
    REQUIRE(outcome.status == milp::MilpStatus::Optimal);
    CHECK(std::llround(outcome.best()->objective) == *expected);

    // The DP oracle and the explicit enumeration agree as well.
    CHECK(oracle::roster_oracle(inst, *fixed) == expected);
    ++compared;
  }
  CHECK(compared == 110);
}

TEST_CASE("warm start produces an immediate incumbent no worse than its cost") {
  std::mt19937_64 rng(13);
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 15 && seed < 200; ++seed) {
    Instance inst = generate_instance(oracle::micro_params(seed));
    auto fixed = random_rooms(inst, rng);
    if (!fixed) continue;
    NurseCostModel cost_model(inst, *fixed);
    if (cost_model.slots().empty()) continue;
    Roster start = construct_initial(inst, *fixed);
    cost_model.reset(start);
    const std::int64_t start_cost = cost_model.cost();

    NurseMipVars vars;
    milp::MilpModel model = build_nurse_model(inst, *fixed, &start, &vars);
    REQUIRE(!model.warm_start.empty());
    std::vector<double> first_objective;
    milp::MilpOutcome outcome =
        milp::solve(model, {}, [&](const milp::MilpIncumbent& inc) {
          first_objective.push_back(inc.objective);
        });
    REQUIRE(!first_objective.empty());
    CHECK(std::llround(first_objective.front()) <= start_cost);
    ++checked;
  }
  CHECK(checked == 15);
}

TEST_CASE("polish never worsens and is idempotent at the optimum") {
  std::mt19937_64 rng(17);
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 40 && seed < 400; ++seed) {
    Instance inst = generate_instance(oracle::micro_params(seed));
    auto fixed = random_rooms(inst, rng);
    if (!fixed) continue;
    NurseCostModel cost_model(inst, *fixed);
    if (cost_model.slots().empty()) continue;

    Roster start = construct_initial(inst, *fixed);
    cost_model.reset(start);
    const std::int64_t start_cost = cost_model.cost();

    PolishResult polished = polish(inst, *fixed, start, {});
    CHECK(polished.cost <= start_cost);
    CHECK(polished.cost == cost_model.recompute_cost(polished.roster));

    const auto optimum = oracle::roster_oracle(inst, *fixed);
    REQUIRE(optimum.has_value());
    CHECK(polished.cost == *optimum);  // exact at micro scale

    // Idempotence: polishing the optimum returns it unchanged.
    PolishResult again = polish(inst, *fixed, polished.roster, {});
    CHECK(again.cost == polished.cost);
    CHECK_FALSE(again.improved);
    ++checked;
  }
  CHECK(checked == 40);
}

TEST_CASE("excess variables cohere with the returned roster") {
  std::mt19937_64 rng(19);
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 15 && seed < 200; ++seed) {
    Instance inst = generate_instance(oracle::micro_params(seed));
    auto fixed = random_rooms(inst, rng);
    if (!fixed) continue;
    NurseCostModel cost_model(inst, *fixed);
    if (cost_model.slots().empty()) continue;

    NurseMipVars vars;
    milp::MilpModel model = build_nurse_model(inst, *fixed, nullptr, &vars);
    milp::MilpOutcome outcome = milp::solve(model, {});
    REQUIRE(outcome.status == milp::MilpStatus::Optimal);
    const auto& values = outcome.best()->values;

    // Recompute per-(nurse, day, shift) load from the assignment variables.
    for (int n = 0; n < static_cast<int>(inst.nurses.size()); ++n)
      for (int d = 1; d <= inst.horizon_days; ++d)
        for (int s = 0; s < kNumShifts; ++s) {
          const int eps = vars.excess[n][inst.slot_index(d, s)];
          if (eps < 0) continue;
          std::int64_t load = 0;
          for (std::size_t i = 0; i < cost_model.slots().size(); ++i) {
            const auto& slot = cost_model.slots()[i];
            if (slot.day != d || slot.shift != s) continue;
            const auto& avail = inst.available_nurses(d, s);
            for (std::size_t k = 0; k < avail.size(); ++k)
              if (avail[k] == n && values[vars.assign[i][k]] > 0.5) load += slot.workload;
          }
          const double expected =
              std::max<double>(0.0, static_cast<double>(load - inst.nurses[n].capacity(d, s)));
          CHECK(values[eps] >= expected - 1e-6);
          // Minimization pins eps to the exact excess.
          CHECK(values[eps] <= expected + 1e-6);
        }
    ++checked;
  }
  CHECK(checked == 15);
}
