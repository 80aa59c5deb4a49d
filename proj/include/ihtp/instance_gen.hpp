#pragma once

#include <cstdint>
#include <string>

#include "ihtp/model.hpp"

namespace ihtp {

// Seeded synthetic instance generator. At tightness <= 0.5 the construction
// guarantees at least one feasible schedule (capacities are sized around a
// reference plan that admits everyone at release in gender-segregated rooms).
struct GenParams {
  int days = 7;
  int patients = 8;
  int occupants = 0;
  int rooms = 3;
  int nurses = 5;
  int theaters = 2;
  int surgeons = 2;
  int skill_levels = 3;
  int age_groups = 3;
  double tightness = 0.3;          // 0 = roomy, 1 = scarce
  double optional_fraction = 0.5;  // share of flexible patients that may be postponed
  std::uint64_t seed = 0;
};

Instance generate_instance(const GenParams& params);
std::string generate_instance_json(const GenParams& params);  // deterministic bytes

}  // namespace ihtp
