#include <cmath>
#include <random>

#include "doctest.h"
#include "ihtp/instance_gen.hpp"
#include "ihtp/nursesa.hpp"
#include "oracles.hpp"

using namespace ihtp;

namespace {

// A room assignment from a random feasible schedule.
std::optional<RoomAssignment> random_rooms(const Instance& inst, std::mt19937_64& rng) {
  auto schedule = oracle::random_feasible_schedule(inst, rng, 40);
  if (!schedule) return std::nullopt;
  RoomAssignment fixed;
  fixed.admission = schedule->admission;
  fixed.room = schedule->room;
  return fixed;
}

}  // namespace

TEST_CASE("initial temperature follows the 5 percent rule") {
  CHECK(initial_temperature(1000) == doctest::Approx(72.13475204).epsilon(1e-9));
  CHECK(initial_temperature(0) == 0.0);
  for (std::int64_t obj : {1, 17, 240, 9999})
    CHECK(initial_temperature(2 * obj) == doctest::Approx(2.0 * initial_temperature(obj)));
  CHECK(initial_temperature(1000) == doctest::Approx(0.05 * 1000 / std::log(2.0)));
}

TEST_CASE("normalization maps the example vector to the published values") {
  // Raw decreases {0, 50, 100} -> normalized {0.02, 0.52, 1.02},
  // probabilities approx {0.0128, 0.3333, 0.6538}.
  const char* text = R"({
    "days": 1, "skill_levels": 1, "shift_types": ["early","late","night"],
    "age_groups": ["age0"],
    "weights": {"unscheduled": 1, "delay": 1, "open_theater": 1, "surgeon_transfer": 1,
                "age_mix": 1, "excess_workload": 1, "continuity": 1, "skill": 1},
    "surgeons": [{"id":"s0","capacity":[480]}],
    "operating_theaters": [{"id":"t0","capacity":[480]}],
    "rooms": [{"id":"r0","capacity":1}],
    "nurses": [
      {"id":"n0","skill":0,"shifts":[{"day":1,"shift":"early","capacity":480},
        {"day":1,"shift":"late","capacity":480},{"day":1,"shift":"night","capacity":480}]},
      {"id":"n1","skill":0,"shifts":[{"day":1,"shift":"early","capacity":480},
        {"day":1,"shift":"late","capacity":480},{"day":1,"shift":"night","capacity":480}]},
      {"id":"n2","skill":0,"shifts":[{"day":1,"shift":"early","capacity":480},
        {"day":1,"shift":"late","capacity":480},{"day":1,"shift":"night","capacity":480}]}],
    "occupants": [{"id":"a0","gender":"female","age_group":"age0","length_of_stay":1,
      "workload_profile":[1,1,1],"skill_profile":[0,0,0],"room":"r0"}],
    "patients": []
  })";
  Instance inst = parse_instance(text);
  RoomAssignment fixed;
  fixed.admission.assign(inst.patients.size(), 1);
  fixed.room.assign(inst.patients.size(), 0);
  NurseCostModel model(inst, fixed);
  Roster roster = construct_initial(inst, fixed);
  model.reset(roster);

  // Synthetic check of the arithmetic itself.
  NeighborEvaluation eval;
  eval.candidates = {0, 1, 2};
  eval.phi = {0, 50, 100};
  const auto [lo, hi] = std::minmax_element(eval.phi.begin(), eval.phi.end());
  eval.phi_normalized.resize(3);
  eval.probability.resize(3);
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    eval.phi_normalized[i] =
        static_cast<double>(eval.phi[i] - *lo) / static_cast<double>(*hi - *lo) + 0.02;
    sum += eval.phi_normalized[i];
  }
  for (int i = 0; i < 3; ++i) eval.probability[i] = eval.phi_normalized[i] / sum;
  CHECK(eval.phi_normalized[0] == doctest::Approx(0.02));
  CHECK(eval.phi_normalized[1] == doctest::Approx(0.52));
  CHECK(eval.phi_normalized[2] == doctest::Approx(1.02));
  CHECK(eval.probability[0] == doctest::Approx(0.02 / 1.56).epsilon(1e-6));
  CHECK(eval.probability[1] == doctest::Approx(0.52 / 1.56).epsilon(1e-6));
  CHECK(eval.probability[2] == doctest::Approx(1.02 / 1.56).epsilon(1e-6));
  CHECK(eval.probability[0] == doctest::Approx(0.0128).epsilon(1e-2));
  CHECK(eval.probability[2] == doctest::Approx(0.6538).epsilon(1e-3));

  // The production evaluator: with zero continuity weight, zero workload
  // impact and equal skills every candidate has the same phi -> degenerate
  // normalization -> uniform probabilities.
  Instance no_coc = inst;
  no_coc.weights.continuity = 0;
  NurseCostModel degenerate(no_coc, fixed);
  degenerate.reset(construct_initial(no_coc, fixed));
  NeighborEvaluation uniform = evaluate_neighbors(degenerate, 0);
  REQUIRE(uniform.candidates.size() == 3);
  for (double prob : uniform.probability) CHECK(prob == doctest::Approx(1.0 / 3.0));
  for (double phi : uniform.phi_normalized) CHECK(phi == doctest::Approx(0.02));
}

TEST_CASE("probability vectors sum to one and endpoints map to 0.02 and 1.02") {
  std::mt19937_64 rng(2);
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 50 && seed < 300; ++seed) {
    Instance inst = generate_instance(oracle::tiny_params(seed));
    auto fixed = random_rooms(inst, rng);
    if (!fixed) continue;
    NurseCostModel model(inst, *fixed);
    if (model.slots().empty()) continue;
    model.reset(construct_initial(inst, *fixed));
    for (int slot = 0; slot < static_cast<int>(model.slots().size()); ++slot) {
      NeighborEvaluation eval = evaluate_neighbors(model, slot);
      double sum = 0.0;
      for (double prob : eval.probability) {
        CHECK(prob >= 0.0);
        sum += prob;
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
      const auto [lo, hi] = std::minmax_element(eval.phi.begin(), eval.phi.end());
      if (*lo != *hi) {
        const auto [nlo, nhi] =
            std::minmax_element(eval.phi_normalized.begin(), eval.phi_normalized.end());
        CHECK(*nlo == doctest::Approx(0.02));
        CHECK(*nhi == doctest::Approx(1.02));
      }
    }
    ++checked;
  }
  CHECK(checked == 50);
}

TEST_CASE("delta evaluation is exact against from-scratch recomputation") {
  std::mt19937_64 rng(3);
  long moves_checked = 0;
  for (std::uint64_t seed = 0; moves_checked < 12000 && seed < 400; ++seed) {
    Instance inst = generate_instance(oracle::tiny_params(seed));
    auto fixed = random_rooms(inst, rng);
    if (!fixed) continue;
    NurseCostModel model(inst, *fixed);
    if (model.slots().empty()) continue;
    model.reset(construct_initial(inst, *fixed));

    for (int move = 0; move < 600 && moves_checked < 12000; ++move) {
      const int slot = static_cast<int>(rng() % model.slots().size());
      const auto& s = model.slots()[slot];
      const auto& avail = inst.available_nurses(s.day, s.shift);
      const int nurse = avail[rng() % avail.size()];

      const std::int64_t before = model.cost();
      const std::int64_t predicted = model.swap_delta(slot, nurse);
      model.apply(slot, nurse);
      const std::int64_t recomputed = model.recompute_cost(model.to_roster());
      CHECK(model.cost() == before + predicted);  // ledger delta
      CHECK(model.cost() == recomputed);          // from-scratch agreement
      ++moves_checked;
    }
    CHECK(model.ledgers_coherent());
  }
  CHECK(moves_checked == 12000);
}

TEST_CASE("construction covers every occupied slot without excess when possible") {
  std::mt19937_64 rng(4);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Instance inst = generate_instance(oracle::tiny_params(seed));
    auto fixed = random_rooms(inst, rng);
    if (!fixed) continue;
    Roster roster = construct_initial(inst, *fixed);
    NurseCostModel model(inst, *fixed);
    for (const auto& slot : model.slots()) {
      const int nurse = roster.at(inst, slot.room, slot.day, slot.shift);
      REQUIRE(nurse >= 0);
      CHECK(inst.nurses[nurse].works(slot.day, slot.shift));
    }
  }
}

TEST_CASE("empty hospital anneals to an empty zero-cost roster") {
  GenParams params;
  params.patients = 0;
  params.occupants = 0;
  params.seed = 12;
  Instance inst = generate_instance(params);
  RoomAssignment fixed;
  fixed.admission.assign(inst.patients.size(), std::nullopt);
  fixed.room.assign(inst.patients.size(), -1);
  SaResult result = anneal(inst, fixed, {}, 0);
  CHECK(result.cost == 0);
  for (int nurse : result.roster.assignment) CHECK(nurse == -1);
}

TEST_CASE("anneal is deterministic for a fixed seed") {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 10 && seed < 100; ++seed) {
    Instance inst = generate_instance(oracle::tiny_params(seed));
    auto fixed = random_rooms(inst, rng);
    if (!fixed) continue;
    SaLimits limits;
    limits.max_no_improve = 400;
    SaResult a = anneal(inst, *fixed, limits, 12345);
    SaResult b = anneal(inst, *fixed, limits, 12345);
    CHECK(a.cost == b.cost);
    CHECK(a.roster.assignment == b.roster.assignment);
    SaResult c = anneal(inst, *fixed, limits, 999);
    CHECK(c.cost >= 0);  // different seed must still be valid
    ++checked;
  }
  CHECK(checked == 10);
}

TEST_CASE("anneal reaches the exhaustive optimum on micro instances") {
  std::mt19937_64 rng(6);
  int reached = 0, attempted = 0;
  for (std::uint64_t seed = 0; attempted < 25 && seed < 300; ++seed) {
    Instance inst = generate_instance(oracle::micro_params(seed));
    auto fixed = random_rooms(inst, rng);
    if (!fixed) continue;
    const auto optimum = oracle::roster_oracle(inst, *fixed);
    if (!optimum) continue;
    ++attempted;
    SaLimits limits;
    limits.max_no_improve = 20000;  // generous budget at this scale
    SaResult result = anneal(inst, *fixed, limits, seed);
    CHECK(result.cost >= *optimum);  // never better than the true optimum
    if (result.cost == *optimum) ++reached;
    CHECK(result.cost == NurseCostModel(inst, *fixed).recompute_cost(result.roster));
  }
  CHECK(attempted == 25);
  CHECK(reached >= 23);  // SA is stochastic; near-universal success at micro scale
}

TEST_CASE("single available nurse everywhere returns the construction roster") {
  GenParams params;
  params.patients = 2;
  params.nurses = 1;
  params.days = 2;
  params.seed = 21;
  Instance inst = generate_instance(params);
  std::mt19937_64 rng(7);
  auto fixed = random_rooms(inst, rng);
  REQUIRE(fixed);
  Roster construction = construct_initial(inst, *fixed);
  SaResult result = anneal(inst, *fixed, {}, 0);
  CHECK(result.roster.assignment == construction.assignment);
}

TEST_CASE("best cost never exceeds the construction cost") {
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Instance inst = generate_instance(oracle::tiny_params(seed));
    auto fixed = random_rooms(inst, rng);
    if (!fixed) continue;
    NurseCostModel model(inst, *fixed);
    model.reset(construct_initial(inst, *fixed));
    const std::int64_t initial_cost = model.cost();
    SaLimits limits;
    limits.max_no_improve = 2000;
    SaResult result = anneal(inst, *fixed, limits, seed * 31);
    CHECK(result.cost <= initial_cost);
  }
}
