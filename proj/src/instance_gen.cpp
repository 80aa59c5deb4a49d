#include "ihtp/instance_gen.hpp"

#include <algorithm>
#include <random>
#include <vector>

#include "json.hpp"

namespace ihtp {

using nlohmann::json;

namespace {

int uniform(std::mt19937_64& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct DraftPatient {
  std::string id;
  bool occupant = false;
  bool mandatory = false;
  int gender = 0;
  int age = 0;
  int release = 1, deadline = 1, stay = 1, duration = 0, surgeon = 0;
  std::vector<int> workload, skill;
  int reference_room = -1;
};

}  // namespace

std::string generate_instance_json(const GenParams& params) {
  if (params.days < 1 || params.rooms < 1 || params.nurses < 1 || params.theaters < 1 ||
      params.surgeons < 1 || params.patients < 0 || params.occupants < 0 ||
      params.skill_levels < 1 || params.age_groups < 1)
    throw std::invalid_argument("contradictory generator parameters");

  std::mt19937_64 rng(params.seed * 0x9e3779b97f4a7c15ULL + 0x1234567);
  const int H = params.days;
  const double slack = 1.0 + std::max(0.0, 1.0 - params.tightness);

  std::vector<DraftPatient> drafts;
  for (int i = 0; i < params.occupants; ++i) {
    DraftPatient d;
    d.id = "a" + std::to_string(i);
    d.occupant = true;
    d.gender = uniform(rng, 0, 1);
    d.age = uniform(rng, 0, params.age_groups - 1);
    d.stay = uniform(rng, 1, std::min(3, H));
    drafts.push_back(std::move(d));
  }
  for (int i = 0; i < params.patients; ++i) {
    DraftPatient d;
    d.id = "p" + std::to_string(i);
    d.gender = uniform(rng, 0, 1);
    d.age = uniform(rng, 0, params.age_groups - 1);
    d.stay = uniform(rng, 1, std::min(4, H));
    d.release = uniform(rng, 1, H);
    d.mandatory = unit(rng) >= params.optional_fraction;
    if (d.mandatory) d.deadline = std::min(H, d.release + uniform(rng, 0, 3));
    d.duration = 15 * uniform(rng, 2, 8);
    d.surgeon = uniform(rng, 0, params.surgeons - 1);
    drafts.push_back(std::move(d));
  }
  for (DraftPatient& d : drafts) {
    d.workload.resize(d.stay * kNumShifts);
    d.skill.resize(d.stay * kNumShifts);
    for (int k = 0; k < d.stay * kNumShifts; ++k) {
      d.workload[k] = unit(rng) < 0.25 ? 0 : 5 * uniform(rng, 1, 12);
      d.skill[k] = uniform(rng, 0, params.skill_levels - 1);
    }
  }

  // Reference plan: everyone admitted at release (occupants day 1), rooms
  // segregated by gender. Capacities are sized so this plan stays feasible.
  std::vector<std::vector<int>> gender_presence(2, std::vector<int>(H + 1, 0));
  for (const DraftPatient& d : drafts) {
    const int start = d.occupant ? 1 : d.release;
    for (int day = start; day <= std::min(H, start + d.stay - 1); ++day)
      ++gender_presence[d.gender][day];
  }
  std::vector<int> room_gender(params.rooms);
  std::vector<int> rooms_of_gender[2];
  for (int r = 0; r < params.rooms; ++r) {
    room_gender[r] = params.rooms == 1 ? 0 : r % 2;
    rooms_of_gender[room_gender[r]].push_back(r);
  }
  std::vector<int> room_capacity(params.rooms, 1);
  for (int g = 0; g < 2; ++g) {
    const int peak = *std::max_element(gender_presence[g].begin(), gender_presence[g].end());
    if (rooms_of_gender[g].empty()) continue;
    const int per_room =
        (peak + static_cast<int>(rooms_of_gender[g].size()) - 1) /
        static_cast<int>(rooms_of_gender[g].size());
    for (int r : rooms_of_gender[g])
      room_capacity[r] = std::max(1, per_room + (params.tightness <= 0.5 ? 1 : 0));
  }
  if (params.rooms == 1) {
    // Single room must host both genders' reference stays; widen it and put
    // everyone into one gender bucket to keep the reference plan legal.
    int peak = 0;
    for (int day = 1; day <= H; ++day)
      peak = std::max(peak, gender_presence[0][day] + gender_presence[1][day]);
    room_capacity[0] = std::max(1, peak + 1);
    for (DraftPatient& d : drafts) d.gender = 0;
  }

  // First-fit reference rooms within the home-gender pool.
  std::vector<std::vector<int>> room_load(params.rooms, std::vector<int>(H + 1, 0));
  for (DraftPatient& d : drafts) {
    const int start = d.occupant ? 1 : d.release;
    const int last = std::min(H, start + d.stay - 1);
    for (int r : rooms_of_gender[d.gender]) {
      bool fits = true;
      for (int day = start; day <= last && fits; ++day)
        if (room_load[r][day] >= room_capacity[r]) fits = false;
      if (fits) {
        d.reference_room = r;
        for (int day = start; day <= last; ++day) ++room_load[r][day];
        break;
      }
    }
    if (d.reference_room < 0) {
      // Capacity math above guarantees space exists; widen defensively.
      d.reference_room = rooms_of_gender[d.gender].empty() ? 0 : rooms_of_gender[d.gender][0];
      ++room_capacity[d.reference_room];
      const int start2 = d.occupant ? 1 : d.release;
      for (int day = start2; day <= std::min(H, start2 + d.stay - 1); ++day)
        ++room_load[d.reference_room][day];
    }
  }

  // Surgeon and theater capacities sized around the reference plan.
  std::vector<std::vector<int>> surgeon_need(params.surgeons, std::vector<int>(H + 1, 0));
  std::vector<int> day_need(H + 1, 0);
  for (const DraftPatient& d : drafts) {
    if (d.occupant) continue;
    surgeon_need[d.surgeon][d.release] += d.duration;
    day_need[d.release] += d.duration;
  }

  json doc;
  doc["days"] = H;
  doc["skill_levels"] = params.skill_levels;
  doc["shift_types"] = {"early", "late", "night"};
  json ages = json::array();
  for (int a = 0; a < params.age_groups; ++a) ages.push_back("age" + std::to_string(a));
  doc["age_groups"] = ages;
  doc["weights"] = {{"unscheduled", 100 * uniform(rng, 1, 8)},
                    {"delay", uniform(rng, 1, 15)},
                    {"open_theater", 10 * uniform(rng, 1, 5)},
                    {"surgeon_transfer", uniform(rng, 1, 10)},
                    {"age_mix", uniform(rng, 1, 5)},
                    {"excess_workload", uniform(rng, 1, 10)},
                    {"continuity", uniform(rng, 1, 5)},
                    {"skill", uniform(rng, 1, 10)}};

  doc["surgeons"] = json::array();
  for (int u = 0; u < params.surgeons; ++u) {
    json capacity = json::array();
    for (int day = 1; day <= H; ++day) {
      int cap = static_cast<int>(surgeon_need[u][day] * slack);
      if (surgeon_need[u][day] == 0)
        cap = unit(rng) < 0.25 * (1.0 + params.tightness) ? 0 : 60 * uniform(rng, 2, 8);
      capacity.push_back(cap);
    }
    doc["surgeons"].push_back({{"id", "s" + std::to_string(u)}, {"capacity", capacity}});
  }

  doc["operating_theaters"] = json::array();
  for (int o = 0; o < params.theaters; ++o) {
    json capacity = json::array();
    for (int day = 1; day <= H; ++day) {
      // The first theater alone hosts the whole reference load of the day.
      int cap = o == 0 ? static_cast<int>(day_need[day] * slack)
                       : 60 * uniform(rng, 0, 8);
      capacity.push_back(cap);
    }
    doc["operating_theaters"].push_back(
        {{"id", "t" + std::to_string(o)}, {"capacity", capacity}});
  }

  doc["rooms"] = json::array();
  for (int r = 0; r < params.rooms; ++r)
    doc["rooms"].push_back({{"id", "r" + std::to_string(r)}, {"capacity", room_capacity[r]}});

  doc["nurses"] = json::array();
  for (int n = 0; n < params.nurses; ++n) {
    json shifts = json::array();
    for (int day = 1; day <= H; ++day)
      for (int s = 0; s < kNumShifts; ++s) {
        const int slot = (day - 1) * kNumShifts + s;
        const bool designated = slot % params.nurses == n;  // guarantees coverage
        if (designated || unit(rng) < 0.35)
          shifts.push_back({{"day", day},
                            {"shift", shift_name(s)},
                            {"capacity", 30 * uniform(rng, 8, 20)}});
      }
    doc["nurses"].push_back(
        {{"id", "n" + std::to_string(n)}, {"skill", uniform(rng, 0, params.skill_levels - 1)},
         {"shifts", shifts}});
  }

  const char* gender_names[2] = {"female", "male"};
  doc["occupants"] = json::array();
  doc["patients"] = json::array();
  for (const DraftPatient& d : drafts) {
    if (d.occupant) {
      doc["occupants"].push_back({{"id", d.id},
                                  {"gender", gender_names[d.gender]},
                                  {"age_group", "age" + std::to_string(d.age)},
                                  {"length_of_stay", d.stay},
                                  {"workload_profile", d.workload},
                                  {"skill_profile", d.skill},
                                  {"room", "r" + std::to_string(d.reference_room)}});
      continue;
    }
    json node = {{"id", d.id},
                 {"mandatory", d.mandatory},
                 {"gender", gender_names[d.gender]},
                 {"age_group", "age" + std::to_string(d.age)},
                 {"surgeon", "s" + std::to_string(d.surgeon)},
                 {"release_day", d.release},
                 {"length_of_stay", d.stay},
                 {"surgery_duration", d.duration},
                 {"workload_profile", d.workload},
                 {"skill_profile", d.skill}};
    if (d.mandatory) node["deadline"] = d.deadline;
    if (params.rooms > 1 && unit(rng) < 0.3 * params.tightness) {
      int avoid = uniform(rng, 0, params.rooms - 1);
      if (avoid == d.reference_room) avoid = (avoid + 1) % params.rooms;
      node["incompatible_rooms"] = {"r" + std::to_string(avoid)};
    }
    doc["patients"].push_back(std::move(node));
  }

  return doc.dump(2) + "\n";
}

Instance generate_instance(const GenParams& params) {
  return parse_instance(generate_instance_json(params));
}

}  // namespace ihtp
