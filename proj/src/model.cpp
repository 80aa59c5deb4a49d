#include "ihtp/model.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ihtp {

using nlohmann::json;

namespace {

const char* const kShiftNames[kNumShifts] = {"early", "late", "night"};

int lookup(const std::vector<std::pair<std::string, int>>& table, const std::string& id) {
  auto it = std::lower_bound(table.begin(), table.end(), id,
                             [](const auto& entry, const std::string& key) {
                               return entry.first < key;
                             });
  if (it == table.end() || it->first != id) return -1;
  return it->second;
}

template <typename T>
std::vector<std::pair<std::string, int>> build_id_table(const std::vector<T>& items) {
  std::vector<std::pair<std::string, int>> table;
  table.reserve(items.size());
  for (int i = 0; i < static_cast<int>(items.size()); ++i) table.emplace_back(items[i].id, i);
  std::sort(table.begin(), table.end());
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (table[i].first == table[i - 1].first)
      throw SemanticError("duplicate id \"" + table[i].first + "\"");
  }
  return table;
}

const json& require(const json& node, const char* key, const std::string& where) {
  auto it = node.find(key);
  if (it == node.end())
    throw ParseError("missing field \"" + std::string(key) + "\" in " + where);
  return *it;
}

int require_int(const json& node, const char* key, const std::string& where) {
  const json& value = require(node, key, where);
  if (!value.is_number_integer())
    throw ParseError("field \"" + std::string(key) + "\" in " + where + " must be an integer");
  return value.get<int>();
}

std::string require_string(const json& node, const char* key, const std::string& where) {
  const json& value = require(node, key, where);
  if (!value.is_string())
    throw ParseError("field \"" + std::string(key) + "\" in " + where + " must be a string");
  return value.get<std::string>();
}

std::vector<int> require_int_array(const json& node, const char* key, const std::string& where,
                                   std::size_t expected_size) {
  const json& value = require(node, key, where);
  if (!value.is_array())
    throw ParseError("field \"" + std::string(key) + "\" in " + where + " must be an array");
  std::vector<int> result;
  result.reserve(value.size());
  for (const json& entry : value) {
    if (!entry.is_number_integer())
      throw ParseError("array \"" + std::string(key) + "\" in " + where +
                       " must contain integers");
    result.push_back(entry.get<int>());
  }
  if (expected_size != 0 && result.size() != expected_size)
    throw ParseError("array \"" + std::string(key) + "\" in " + where + " has " +
                     std::to_string(result.size()) + " entries, expected " +
                     std::to_string(expected_size));
  return result;
}

int age_group_ordinal(const Instance& inst, const std::string& name, const std::string& where) {
  for (int i = 0; i < static_cast<int>(inst.age_group_names.size()); ++i)
    if (inst.age_group_names[i] == name) return i;
  throw SemanticError("unknown age group \"" + name + "\" in " + where);
}

void parse_profiles(const json& node, const std::string& where, int length_of_stay,
                    Patient* patient) {
  patient->workload =
      require_int_array(node, "workload_profile", where, length_of_stay * kNumShifts);
  patient->skill_req =
      require_int_array(node, "skill_profile", where, length_of_stay * kNumShifts);
}

}  // namespace

const char* shift_name(int shift) { return kShiftNames[shift]; }

int shift_index(const std::string& name) {
  for (int s = 0; s < kNumShifts; ++s)
    if (name == kShiftNames[s]) return s;
  throw ParseError("unknown shift \"" + name + "\"");
}

const char* hard_rule_name(HardRule rule) {
  switch (rule) {
    case HardRule::MandatoryUnscheduled: return "mandatory-unscheduled";
    case HardRule::ReleaseDay: return "release-day";
    case HardRule::RoomCapacity: return "room-capacity";
    case HardRule::GenderMix: return "gender-mix";
    case HardRule::IncompatibleRoom: return "incompatible-room";
    case HardRule::SurgeonCapacity: return "surgeon-capacity";
    case HardRule::TheaterCapacity: return "theater-capacity";
    case HardRule::NurseCoverage: return "nurse-coverage";
  }
  return "unknown";
}

int Instance::patient_index(const std::string& id) const { return lookup(patient_ids_, id); }
int Instance::nurse_index(const std::string& id) const { return lookup(nurse_ids_, id); }
int Instance::room_index(const std::string& id) const { return lookup(room_ids_, id); }
int Instance::theater_index(const std::string& id) const { return lookup(theater_ids_, id); }
int Instance::surgeon_index(const std::string& id) const { return lookup(surgeon_ids_, id); }

void Instance::finalize() {
  if (horizon_days < 1) throw SemanticError("horizon must cover at least one day");
  if (shift_names.size() != kNumShifts) throw SemanticError("expected exactly three shift types");
  for (int s = 0; s < kNumShifts; ++s)
    if (shift_names[s] != kShiftNames[s])
      throw SemanticError("shift types must be ordered early, late, night");
  if (age_group_names.empty()) throw SemanticError("at least one age group required");

  patient_ids_ = build_id_table(patients);
  nurse_ids_ = build_id_table(nurses);
  room_ids_ = build_id_table(rooms);
  theater_ids_ = build_id_table(theaters);
  surgeon_ids_ = build_id_table(surgeons);

  flexible_patients.clear();
  occupant_patients.clear();
  for (int p = 0; p < static_cast<int>(patients.size()); ++p) {
    Patient& pat = patients[p];
    const std::string where = "patient \"" + pat.id + "\"";
    if (pat.length_of_stay < 1) throw SemanticError(where + ": length of stay must be >= 1");
    if (pat.workload.size() != static_cast<std::size_t>(pat.length_of_stay * kNumShifts) ||
        pat.skill_req.size() != pat.workload.size())
      throw SemanticError(where + ": profile length mismatch");
    if (pat.age_group < 0 || pat.age_group >= static_cast<int>(age_group_names.size()))
      throw SemanticError(where + ": age group out of range");
    for (int skill : pat.skill_req)
      if (skill < 0 || skill >= skill_levels)
        throw SemanticError(where + ": required skill level out of range");
    for (int r : pat.incompatible_rooms)
      if (r < 0 || r >= static_cast<int>(rooms.size()))
        throw SemanticError(where + ": incompatible room out of range");
    std::sort(pat.incompatible_rooms.begin(), pat.incompatible_rooms.end());
    if (pat.flexible()) {
      flexible_patients.push_back(p);
      if (pat.surgeon < 0 || pat.surgeon >= static_cast<int>(surgeons.size()))
        throw SemanticError(where + ": missing or unknown surgeon");
      if (pat.release_day < 1 || pat.release_day > horizon_days)
        throw SemanticError(where + ": release day outside horizon");
      if (pat.mandatory()) {
        if (!pat.deadline) throw SemanticError(where + ": mandatory patient needs a deadline");
        if (*pat.deadline < pat.release_day)
          throw SemanticError(where + ": deadline before release day");
        if (*pat.deadline > horizon_days)
          throw SemanticError(where + ": deadline outside horizon");
      } else if (pat.deadline) {
        throw SemanticError(where + ": only mandatory patients carry a deadline");
      }
      if (pat.surgery_duration < 0) throw SemanticError(where + ": negative surgery duration");
    } else {
      occupant_patients.push_back(p);
      if (pat.fixed_room < 0 || pat.fixed_room >= static_cast<int>(rooms.size()))
        throw SemanticError(where + ": occupant needs an existing fixed room");
      if (pat.surgeon >= 0 || pat.release_day >= 0 || pat.deadline)
        throw SemanticError(where + ": occupants carry no surgeon, release day or deadline");
    }
  }

  for (const Nurse& nurse : nurses) {
    if (nurse.capacity_by_day.size() != static_cast<std::size_t>(horizon_days))
      throw SemanticError("nurse \"" + nurse.id + "\": roster length mismatch");
    if (nurse.skill < 0 || nurse.skill >= skill_levels)
      throw SemanticError("nurse \"" + nurse.id + "\": skill level out of range");
    for (const auto& day : nurse.capacity_by_day)
      for (int s = 0; s < kNumShifts; ++s)
        if (day[s] == 0) throw SemanticError("nurse \"" + nurse.id + "\": zero-capacity shift");
  }
  for (const Surgeon& surgeon : surgeons)
    if (surgeon.capacity_by_day.size() != static_cast<std::size_t>(horizon_days))
      throw SemanticError("surgeon \"" + surgeon.id + "\": capacity length mismatch");
  for (const Theater& theater : theaters)
    if (theater.capacity_by_day.size() != static_cast<std::size_t>(horizon_days))
      throw SemanticError("theater \"" + theater.id + "\": capacity length mismatch");
  for (const Room& room : rooms)
    if (room.capacity < 0) throw SemanticError("room \"" + room.id + "\": negative capacity");

  nurses_present.assign(horizon_days * kNumShifts, {});
  for (int n = 0; n < static_cast<int>(nurses.size()); ++n)
    for (int d = 1; d <= horizon_days; ++d)
      for (int s = 0; s < kNumShifts; ++s)
        if (nurses[n].works(d, s)) nurses_present[slot_index(d, s)].push_back(n);
}

Instance parse_instance(const std::string& bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("invalid JSON: ") + err.what());
  }
  if (!doc.is_object()) throw ParseError("instance document must be a JSON object");

  Instance inst;
  inst.horizon_days = require_int(doc, "days", "instance");
  inst.skill_levels = require_int(doc, "skill_levels", "instance");
  if (inst.skill_levels < 1) throw ParseError("skill_levels must be >= 1");
  for (const json& name : require(doc, "shift_types", "instance"))
    inst.shift_names.push_back(name.get<std::string>());
  for (const json& name : require(doc, "age_groups", "instance"))
    inst.age_group_names.push_back(name.get<std::string>());

  const json& weights = require(doc, "weights", "instance");
  inst.weights.unscheduled = require_int(weights, "unscheduled", "weights");
  inst.weights.delay = require_int(weights, "delay", "weights");
  inst.weights.open_theater = require_int(weights, "open_theater", "weights");
  inst.weights.surgeon_transfer = require_int(weights, "surgeon_transfer", "weights");
  inst.weights.age_mix = require_int(weights, "age_mix", "weights");
  inst.weights.excess_workload = require_int(weights, "excess_workload", "weights");
  inst.weights.continuity = require_int(weights, "continuity", "weights");
  inst.weights.skill = require_int(weights, "skill", "weights");

  for (const json& node : require(doc, "surgeons", "instance")) {
    Surgeon surgeon;
    surgeon.id = require_string(node, "id", "surgeon");
    surgeon.capacity_by_day = require_int_array(node, "capacity", "surgeon \"" + surgeon.id + "\"",
                                                inst.horizon_days);
    inst.surgeons.push_back(std::move(surgeon));
  }
  for (const json& node : require(doc, "operating_theaters", "instance")) {
    Theater theater;
    theater.id = require_string(node, "id", "operating theater");
    theater.capacity_by_day = require_int_array(node, "capacity", "theater \"" + theater.id + "\"",
                                                inst.horizon_days);
    inst.theaters.push_back(std::move(theater));
  }
  for (const json& node : require(doc, "rooms", "instance")) {
    Room room;
    room.id = require_string(node, "id", "room");
    room.capacity = require_int(node, "capacity", "room \"" + room.id + "\"");
    inst.rooms.push_back(std::move(room));
  }
  for (const json& node : require(doc, "nurses", "instance")) {
    Nurse nurse;
    nurse.id = require_string(node, "id", "nurse");
    const std::string where = "nurse \"" + nurse.id + "\"";
    nurse.skill = require_int(node, "skill", where);
    nurse.capacity_by_day.assign(inst.horizon_days, {-1, -1, -1});
    for (const json& shift : require(node, "shifts", where)) {
      int day = require_int(shift, "day", where);
      if (day < 1 || day > inst.horizon_days)
        throw SemanticError(where + ": shift day outside horizon");
      int s = shift_index(require_string(shift, "shift", where));
      int capacity = require_int(shift, "capacity", where);
      if (capacity <= 0) throw SemanticError(where + ": shift capacity must be positive");
      if (nurse.capacity_by_day[day - 1][s] >= 0)
        throw SemanticError(where + ": duplicate shift entry");
      nurse.capacity_by_day[day - 1][s] = capacity;
    }
    inst.nurses.push_back(std::move(nurse));
  }

  auto room_by_id = [&inst](const std::string& id, const std::string& where) {
    for (int r = 0; r < static_cast<int>(inst.rooms.size()); ++r)
      if (inst.rooms[r].id == id) return r;
    throw SemanticError("unknown room \"" + id + "\" in " + where);
  };

  for (const json& node : require(doc, "occupants", "instance")) {
    Patient pat;
    pat.kind = PatientKind::Occupant;
    pat.id = require_string(node, "id", "occupant");
    const std::string where = "occupant \"" + pat.id + "\"";
    pat.gender = require_string(node, "gender", where);
    pat.age_group = age_group_ordinal(inst, require_string(node, "age_group", where), where);
    pat.length_of_stay = require_int(node, "length_of_stay", where);
    if (pat.length_of_stay < 1) throw SemanticError(where + ": length of stay must be >= 1");
    parse_profiles(node, where, pat.length_of_stay, &pat);
    pat.fixed_room = room_by_id(require_string(node, "room", where), where);
    inst.patients.push_back(std::move(pat));
  }
  for (const json& node : require(doc, "patients", "instance")) {
    Patient pat;
    pat.id = require_string(node, "id", "patient");
    const std::string where = "patient \"" + pat.id + "\"";
    const json& mandatory = require(node, "mandatory", where);
    if (!mandatory.is_boolean()) throw ParseError(where + ": \"mandatory\" must be boolean");
    pat.kind = mandatory.get<bool>() ? PatientKind::Mandatory : PatientKind::Optional;
    pat.gender = require_string(node, "gender", where);
    pat.age_group = age_group_ordinal(inst, require_string(node, "age_group", where), where);
    const std::string surgeon_id = require_string(node, "surgeon", where);
    pat.surgeon = -1;
    for (int u = 0; u < static_cast<int>(inst.surgeons.size()); ++u)
      if (inst.surgeons[u].id == surgeon_id) pat.surgeon = u;
    if (pat.surgeon < 0) throw SemanticError("unknown surgeon \"" + surgeon_id + "\"");
    pat.release_day = require_int(node, "release_day", where);
    if (node.contains("deadline")) pat.deadline = require_int(node, "deadline", where);
    pat.length_of_stay = require_int(node, "length_of_stay", where);
    if (pat.length_of_stay < 1) throw SemanticError(where + ": length of stay must be >= 1");
    pat.surgery_duration = require_int(node, "surgery_duration", where);
    parse_profiles(node, where, pat.length_of_stay, &pat);
    if (node.contains("incompatible_rooms"))
      for (const json& room_id : node["incompatible_rooms"])
        pat.incompatible_rooms.push_back(room_by_id(room_id.get<std::string>(), where));
    inst.patients.push_back(std::move(pat));
  }

  inst.finalize();
  return inst;
}

std::string serialize_instance(const Instance& inst) {
  json doc;
  doc["days"] = inst.horizon_days;
  doc["skill_levels"] = inst.skill_levels;
  doc["shift_types"] = inst.shift_names;
  doc["age_groups"] = inst.age_group_names;
  doc["weights"] = {{"unscheduled", inst.weights.unscheduled},
                    {"delay", inst.weights.delay},
                    {"open_theater", inst.weights.open_theater},
                    {"surgeon_transfer", inst.weights.surgeon_transfer},
                    {"age_mix", inst.weights.age_mix},
                    {"excess_workload", inst.weights.excess_workload},
                    {"continuity", inst.weights.continuity},
                    {"skill", inst.weights.skill}};
  doc["surgeons"] = json::array();
  for (const Surgeon& surgeon : inst.surgeons)
    doc["surgeons"].push_back({{"id", surgeon.id}, {"capacity", surgeon.capacity_by_day}});
  doc["operating_theaters"] = json::array();
  for (const Theater& theater : inst.theaters)
    doc["operating_theaters"].push_back({{"id", theater.id}, {"capacity", theater.capacity_by_day}});
  doc["rooms"] = json::array();
  for (const Room& room : inst.rooms)
    doc["rooms"].push_back({{"id", room.id}, {"capacity", room.capacity}});
  doc["nurses"] = json::array();
  for (const Nurse& nurse : inst.nurses) {
    json shifts = json::array();
    for (int d = 1; d <= inst.horizon_days; ++d)
      for (int s = 0; s < kNumShifts; ++s)
        if (nurse.works(d, s))
          shifts.push_back({{"day", d}, {"shift", shift_name(s)}, {"capacity", nurse.capacity(d, s)}});
    doc["nurses"].push_back({{"id", nurse.id}, {"skill", nurse.skill}, {"shifts", shifts}});
  }
  doc["occupants"] = json::array();
  doc["patients"] = json::array();
  for (const Patient& pat : inst.patients) {
    if (!pat.flexible()) {
      doc["occupants"].push_back({{"id", pat.id},
                                  {"gender", pat.gender},
                                  {"age_group", inst.age_group_names[pat.age_group]},
                                  {"length_of_stay", pat.length_of_stay},
                                  {"workload_profile", pat.workload},
                                  {"skill_profile", pat.skill_req},
                                  {"room", inst.rooms[pat.fixed_room].id}});
    } else {
      json node = {{"id", pat.id},
                   {"mandatory", pat.mandatory()},
                   {"gender", pat.gender},
                   {"age_group", inst.age_group_names[pat.age_group]},
                   {"surgeon", inst.surgeons[pat.surgeon].id},
                   {"release_day", pat.release_day},
                   {"length_of_stay", pat.length_of_stay},
                   {"surgery_duration", pat.surgery_duration},
                   {"workload_profile", pat.workload},
                   {"skill_profile", pat.skill_req}};
      if (pat.deadline) node["deadline"] = *pat.deadline;
      if (!pat.incompatible_rooms.empty()) {
        json rooms = json::array();
        for (int r : pat.incompatible_rooms) rooms.push_back(inst.rooms[r].id);
        node["incompatible_rooms"] = rooms;
      }
      doc["patients"].push_back(std::move(node));
    }
  }
  return doc.dump(2) + "\n";
}

Schedule Schedule::empty_for(const Instance& inst) {
  Schedule schedule;
  schedule.admission.assign(inst.patients.size(), std::nullopt);
  schedule.room.assign(inst.patients.size(), -1);
  schedule.theater.assign(inst.patients.size(), -1);
  schedule.roster.assign(static_cast<std::size_t>(inst.horizon_days) * kNumShifts *
                             inst.rooms.size(),
                         -1);
  for (int p : inst.occupant_patients) {
    schedule.admission[p] = 1;
    schedule.room[p] = inst.patients[p].fixed_room;
  }
  return schedule;
}

std::vector<Violation> check_hard(const Instance& inst, const Schedule& schedule) {
  const int num_patients = static_cast<int>(inst.patients.size());
  if (schedule.admission.size() != static_cast<std::size_t>(num_patients) ||
      schedule.room.size() != schedule.admission.size() ||
      schedule.theater.size() != schedule.admission.size() ||
      schedule.roster.size() !=
          static_cast<std::size_t>(inst.horizon_days) * kNumShifts * inst.rooms.size())
    throw std::logic_error("schedule shape does not match instance");

  std::vector<Violation> violations;
  auto flag = [&violations](HardRule rule, const std::string& entity, int day,
                            std::string detail) {
    violations.push_back({rule, entity, day, std::move(detail)});
  };

  // Per (room, day): occupancy, genders. Per (surgeon, day) and (theater, day): load.
  const int num_rooms = static_cast<int>(inst.rooms.size());
  std::vector<std::vector<int>> room_day_patients(
      static_cast<std::size_t>(num_rooms) * (inst.horizon_days + 1));
  std::vector<std::int64_t> surgeon_load(inst.surgeons.size() * (inst.horizon_days + 1), 0);
  std::vector<std::int64_t> theater_load(inst.theaters.size() * (inst.horizon_days + 1), 0);

  for (int p = 0; p < num_patients; ++p) {
    const Patient& pat = inst.patients[p];
    if (!schedule.admission[p]) {
      if (pat.mandatory())
        flag(HardRule::MandatoryUnscheduled, pat.id, 0, "mandatory patient not admitted");
      continue;
    }
    int day = *schedule.admission[p];
    if (pat.flexible()) {
      if (day < pat.release_day)
        flag(HardRule::ReleaseDay, pat.id, day, "admitted before release day");
      if (pat.deadline && day > *pat.deadline)
        flag(HardRule::MandatoryUnscheduled, pat.id, day, "admitted after deadline");
      if (pat.surgeon >= 0)
        surgeon_load[pat.surgeon * (inst.horizon_days + 1) + day] += pat.surgery_duration;
      if (schedule.theater[p] >= 0)
        theater_load[schedule.theater[p] * (inst.horizon_days + 1) + day] += pat.surgery_duration;
    }
    int room = schedule.room[p];
    if (room >= 0) {
      if (std::binary_search(pat.incompatible_rooms.begin(), pat.incompatible_rooms.end(), room))
        flag(HardRule::IncompatibleRoom, pat.id, day,
             "assigned incompatible room \"" + inst.rooms[room].id + "\"");
      auto [first, last] = inst.stay_days(p, day);
      for (int d = first; d <= last; ++d)
        room_day_patients[room * (inst.horizon_days + 1) + d].push_back(p);
    }
  }

  for (int r = 0; r < num_rooms; ++r) {
    for (int d = 1; d <= inst.horizon_days; ++d) {
      const std::vector<int>& present = room_day_patients[r * (inst.horizon_days + 1) + d];
      if (present.empty()) continue;
      if (static_cast<int>(present.size()) > inst.rooms[r].capacity)
        flag(HardRule::RoomCapacity, inst.rooms[r].id, d,
             std::to_string(present.size()) + " patients in capacity " +
                 std::to_string(inst.rooms[r].capacity));
      const std::string& gender = inst.patients[present.front()].gender;
      for (int p : present) {
        if (inst.patients[p].gender != gender) {
          flag(HardRule::GenderMix, inst.rooms[r].id, d, "mixed genders");
          break;
        }
      }
      for (int s = 0; s < kNumShifts; ++s) {
        int nurse = schedule.roster_at(inst, r, d, s);
        if (nurse < 0) {
          flag(HardRule::NurseCoverage, inst.rooms[r].id, d,
               std::string("no nurse on ") + shift_name(s) + " shift");
        } else if (!inst.nurses[nurse].works(d, s)) {
          flag(HardRule::NurseCoverage, inst.rooms[r].id, d,
               "nurse \"" + inst.nurses[nurse].id + "\" not working " + shift_name(s));
        }
      }
    }
  }

  for (int u = 0; u < static_cast<int>(inst.surgeons.size()); ++u)
    for (int d = 1; d <= inst.horizon_days; ++d) {
      std::int64_t load = surgeon_load[u * (inst.horizon_days + 1) + d];
      if (load > inst.surgeons[u].capacity_by_day[d - 1])
        flag(HardRule::SurgeonCapacity, inst.surgeons[u].id, d,
             std::to_string(load) + " min exceeds " +
                 std::to_string(inst.surgeons[u].capacity_by_day[d - 1]));
    }
  for (int o = 0; o < static_cast<int>(inst.theaters.size()); ++o)
    for (int d = 1; d <= inst.horizon_days; ++d) {
      std::int64_t load = theater_load[o * (inst.horizon_days + 1) + d];
      if (load > inst.theaters[o].capacity_by_day[d - 1])
        flag(HardRule::TheaterCapacity, inst.theaters[o].id, d,
             std::to_string(load) + " min exceeds " +
                 std::to_string(inst.theaters[o].capacity_by_day[d - 1]));
    }

  return violations;
}

CostBreakdown CostBreakdown::from_components(std::int64_t coc, std::int64_t unscheduled,
                                             std::int64_t excess_workload,
                                             std::int64_t open_theaters, std::int64_t delay,
                                             std::int64_t age_mix, std::int64_t skill_mismatch,
                                             std::int64_t surgeon_transfer) {
  CostBreakdown b;
  b.coc = coc;
  b.unscheduled = unscheduled;
  b.excess_workload = excess_workload;
  b.open_theaters = open_theaters;
  b.delay = delay;
  b.age_mix = age_mix;
  b.skill_mismatch = skill_mismatch;
  b.surgeon_transfer = surgeon_transfer;
  b.total = b.component_sum();
  return b;
}

namespace detail {

CostBreakdown evaluate_unchecked(const Instance& inst, const Schedule& schedule) {
  const int num_rooms = static_cast<int>(inst.rooms.size());
  const Weights& w = inst.weights;

  std::int64_t unscheduled_count = 0, delay_days = 0;
  for (int p : inst.flexible_patients) {
    if (!schedule.admission[p]) {
      ++unscheduled_count;
      continue;
    }
    delay_days += *schedule.admission[p] - inst.patients[p].release_day;
  }

  // Presence per (room, day) and per-slot demand per rostered nurse.
  std::vector<std::vector<int>> room_day_patients(
      static_cast<std::size_t>(num_rooms) * (inst.horizon_days + 1));
  for (int p = 0; p < static_cast<int>(inst.patients.size()); ++p) {
    if (!schedule.admission[p] || schedule.room[p] < 0) continue;
    auto [first, last] = inst.stay_days(p, *schedule.admission[p]);
    for (int d = first; d <= last; ++d)
      room_day_patients[schedule.room[p] * (inst.horizon_days + 1) + d].push_back(p);
  }

  std::int64_t age_spread = 0;
  for (int r = 0; r < num_rooms; ++r)
    for (int d = 1; d <= inst.horizon_days; ++d) {
      const std::vector<int>& present = room_day_patients[r * (inst.horizon_days + 1) + d];
      if (present.size() <= 1) continue;
      int lo = inst.patients[present.front()].age_group, hi = lo;
      for (int p : present) {
        lo = std::min(lo, inst.patients[p].age_group);
        hi = std::max(hi, inst.patients[p].age_group);
      }
      age_spread += hi - lo;
    }

  // Nurse-linked terms: continuity of care, excess workload, skill gaps.
  std::int64_t skill_gap = 0;
  std::vector<std::int64_t> nurse_slot_load(inst.nurses.size() * inst.horizon_days * kNumShifts,
                                            0);
  std::vector<std::set<int>> patient_nurses(inst.patients.size());
  for (int r = 0; r < num_rooms; ++r)
    for (int d = 1; d <= inst.horizon_days; ++d) {
      const std::vector<int>& present = room_day_patients[r * (inst.horizon_days + 1) + d];
      if (present.empty()) continue;
      for (int s = 0; s < kNumShifts; ++s) {
        int nurse = schedule.roster_at(inst, r, d, s);
        if (nurse < 0) continue;
        for (int p : present) {
          int delta = d - *schedule.admission[p];
          nurse_slot_load[(nurse * inst.horizon_days + (d - 1)) * kNumShifts + s] +=
              inst.patients[p].workload_at(delta, s);
          skill_gap += std::max(0, inst.patients[p].skill_at(delta, s) - inst.nurses[nurse].skill);
          patient_nurses[p].insert(nurse);
        }
      }
    }

  std::int64_t coc_count = 0;
  for (const auto& nurses : patient_nurses) coc_count += static_cast<std::int64_t>(nurses.size());

  std::int64_t excess = 0;
  for (int n = 0; n < static_cast<int>(inst.nurses.size()); ++n)
    for (int d = 1; d <= inst.horizon_days; ++d)
      for (int s = 0; s < kNumShifts; ++s) {
        std::int64_t load = nurse_slot_load[(n * inst.horizon_days + (d - 1)) * kNumShifts + s];
        if (load == 0) continue;
        std::int64_t cap = inst.nurses[n].works(d, s) ? inst.nurses[n].capacity(d, s) : 0;
        if (load > cap) excess += load - cap;
      }

  // Theater terms.
  std::set<std::pair<int, int>> opened;                   // (theater, day)
  std::map<std::pair<int, int>, std::set<int>> surgeon_theaters;  // (surgeon, day) -> theaters
  for (int p : inst.flexible_patients) {
    if (!schedule.admission[p] || schedule.theater[p] < 0) continue;
    int d = *schedule.admission[p];
    opened.insert({schedule.theater[p], d});
    surgeon_theaters[{inst.patients[p].surgeon, d}].insert(schedule.theater[p]);
  }
  std::int64_t transfers = 0;
  for (const auto& [key, theaters] : surgeon_theaters)
    transfers += static_cast<std::int64_t>(theaters.size()) - 1;

  return CostBreakdown::from_components(
      w.continuity * coc_count, w.unscheduled * unscheduled_count, w.excess_workload * excess,
      w.open_theater * static_cast<std::int64_t>(opened.size()), w.delay * delay_days,
      w.age_mix * age_spread, w.skill * skill_gap, w.surgeon_transfer * transfers);
}

}  // namespace detail

CostBreakdown evaluate(const Instance& inst, const Schedule& schedule) {
  std::vector<Violation> violations = check_hard(inst, schedule);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "schedule violates " << violations.size() << " hard constraint(s); first: "
        << hard_rule_name(violations.front().rule) << " " << violations.front().entity;
    if (violations.front().day > 0) msg << " day " << violations.front().day;
    msg << " (" << violations.front().detail << ")";
    throw HardInfeasibleError(msg.str());
  }
  return detail::evaluate_unchecked(inst, schedule);
}

std::string write_solution(const Instance& inst, const Schedule& schedule) {
  json doc;
  doc["patients"] = json::array();
  for (int p : inst.flexible_patients) {
    json node;
    node["id"] = inst.patients[p].id;
    if (schedule.admission[p]) {
      node["admission_day"] = *schedule.admission[p];
      if (schedule.room[p] >= 0) node["room"] = inst.rooms[schedule.room[p]].id;
      if (schedule.theater[p] >= 0)
        node["operating_theater"] = inst.theaters[schedule.theater[p]].id;
    } else {
      node["admission_day"] = "none";
    }
    doc["patients"].push_back(std::move(node));
  }
  doc["nurses"] = json::array();
  for (int n = 0; n < static_cast<int>(inst.nurses.size()); ++n) {
    json assignments = json::array();
    for (int d = 1; d <= inst.horizon_days; ++d)
      for (int s = 0; s < kNumShifts; ++s) {
        json rooms = json::array();
        for (int r = 0; r < static_cast<int>(inst.rooms.size()); ++r)
          if (schedule.roster_at(inst, r, d, s) == n) rooms.push_back(inst.rooms[r].id);
        if (!rooms.empty())
          assignments.push_back({{"day", d}, {"shift", shift_name(s)}, {"rooms", rooms}});
      }
    doc["nurses"].push_back({{"id", inst.nurses[n].id}, {"assignments", assignments}});
  }
  return doc.dump(2) + "\n";
}

Schedule read_solution(const std::string& bytes, const Instance& inst) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("invalid JSON: ") + err.what());
  }
  Schedule schedule = Schedule::empty_for(inst);

  for (const json& node : require(doc, "patients", "solution")) {
    const std::string id = require_string(node, "id", "solution patient");
    int p = inst.patient_index(id);
    if (p < 0) throw SemanticError("unknown patient \"" + id + "\"");
    if (!inst.patients[p].flexible())
      throw SemanticError("occupant \"" + id + "\" listed in solution");
    const json& day = require(node, "admission_day", "patient \"" + id + "\"");
    if (day.is_string() && day.get<std::string>() == "none") {
      if (inst.patients[p].mandatory())
        throw SemanticError("mandatory patient \"" + id + "\" cannot be postponed");
      continue;
    }
    if (!day.is_number_integer())
      throw ParseError("patient \"" + id + "\": admission_day must be an integer or \"none\"");
    schedule.admission[p] = day.get<int>();
    if (*schedule.admission[p] < 1 || *schedule.admission[p] > inst.horizon_days)
      throw SemanticError("patient \"" + id + "\": admission day outside horizon");
    const std::string room = require_string(node, "room", "patient \"" + id + "\"");
    schedule.room[p] = inst.room_index(room);
    if (schedule.room[p] < 0) throw SemanticError("unknown room \"" + room + "\"");
    const std::string theater =
        require_string(node, "operating_theater", "patient \"" + id + "\"");
    schedule.theater[p] = inst.theater_index(theater);
    if (schedule.theater[p] < 0) throw SemanticError("unknown operating theater \"" + theater + "\"");
  }

  for (const json& node : require(doc, "nurses", "solution")) {
    const std::string id = require_string(node, "id", "solution nurse");
    int n = inst.nurse_index(id);
    if (n < 0) throw SemanticError("unknown nurse \"" + id + "\"");
    for (const json& assignment : require(node, "assignments", "nurse \"" + id + "\"")) {
      int day = require_int(assignment, "day", "nurse \"" + id + "\"");
      if (day < 1 || day > inst.horizon_days)
        throw SemanticError("nurse \"" + id + "\": assignment day outside horizon");
      int s = shift_index(require_string(assignment, "shift", "nurse \"" + id + "\""));
      for (const json& room_id : require(assignment, "rooms", "nurse \"" + id + "\"")) {
        int r = inst.room_index(room_id.get<std::string>());
        if (r < 0) throw SemanticError("unknown room \"" + room_id.get<std::string>() + "\"");
        int previous = schedule.roster_at(inst, r, day, s);
        if (previous >= 0 && previous != n)
          throw SemanticError("room \"" + inst.rooms[r].id + "\" has two nurses on day " +
                              std::to_string(day) + " " + shift_name(s));
        schedule.set_roster(inst, r, day, s, n);
      }
    }
  }
  return schedule;
}

}  // namespace ihtp
