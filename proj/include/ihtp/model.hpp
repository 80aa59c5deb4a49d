#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Core domain model for integrated hospital timetabling: instance data,
// candidate schedules, hard-constraint checking and the weighted
// eight-component soft-cost evaluator. All quantities are integers;
// totals fit in int64_t.
namespace ihtp {

inline constexpr int kNumShifts = 3;  // early < late < night

const char* shift_name(int shift);
int shift_index(const std::string& name);  // throws ParseError on unknown name

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};
struct SemanticError : std::runtime_error {
  explicit SemanticError(const std::string& what) : std::runtime_error(what) {}
};
struct HardInfeasibleError : std::runtime_error {
  explicit HardInfeasibleError(const std::string& what) : std::runtime_error(what) {}
};
struct InfeasibleInstanceError : std::runtime_error {
  explicit InfeasibleInstanceError(const std::string& what) : std::runtime_error(what) {}
};

struct Weights {
  std::int64_t unscheduled = 0;
  std::int64_t delay = 0;
  std::int64_t open_theater = 0;
  std::int64_t surgeon_transfer = 0;
  std::int64_t age_mix = 0;
  std::int64_t excess_workload = 0;
  std::int64_t continuity = 0;
  std::int64_t skill = 0;
};

enum class PatientKind { Occupant, Mandatory, Optional };

struct Patient {
  std::string id;
  PatientKind kind = PatientKind::Optional;
  std::string gender;
  int age_group = 0;
  int surgeon = -1;                  // index into Instance::surgeons; -1 for occupants
  int release_day = -1;              // 1-based day; -1 for occupants
  std::optional<int> deadline;       // mandatory patients only
  int length_of_stay = 1;
  int surgery_duration = 0;          // minutes; 0 for occupants
  std::vector<int> workload;         // length_of_stay * 3, indexed [delta*3 + shift]
  std::vector<int> skill_req;        // same shape as workload
  std::vector<int> incompatible_rooms;  // sorted room indices
  int fixed_room = -1;               // occupants only

  bool flexible() const { return kind != PatientKind::Occupant; }
  bool mandatory() const { return kind == PatientKind::Mandatory; }
  int workload_at(int delta, int shift) const { return workload[delta * kNumShifts + shift]; }
  int skill_at(int delta, int shift) const { return skill_req[delta * kNumShifts + shift]; }
};

struct Nurse {
  std::string id;
  int skill = 0;
  // capacity_by_day[d-1][s] = working minutes, or -1 when not rostered.
  std::vector<std::array<int, kNumShifts>> capacity_by_day;

  bool works(int day, int shift) const { return capacity_by_day[day - 1][shift] >= 0; }
  int capacity(int day, int shift) const { return capacity_by_day[day - 1][shift]; }
};

struct Room {
  std::string id;
  int capacity = 0;
};

struct Theater {
  std::string id;
  std::vector<int> capacity_by_day;  // [d-1], minutes
};

struct Surgeon {
  std::string id;
  std::vector<int> capacity_by_day;  // [d-1], minutes
};

struct Instance {
  int horizon_days = 0;
  int skill_levels = 1;
  std::vector<std::string> shift_names;      // exactly {early, late, night}
  std::vector<std::string> age_group_names;  // index = age-group ordinal
  Weights weights;
  std::vector<Patient> patients;  // occupants and flexible patients together
  std::vector<Nurse> nurses;
  std::vector<Surgeon> surgeons;
  std::vector<Room> rooms;
  std::vector<Theater> theaters;

  // Derived on construction.
  std::vector<int> flexible_patients;  // patient indices, instance order
  std::vector<int> occupant_patients;
  std::vector<std::vector<int>> nurses_present;  // [(d-1)*3+s] -> nurse indices

  int slot_index(int day, int shift) const { return (day - 1) * kNumShifts + shift; }
  const std::vector<int>& available_nurses(int day, int shift) const {
    return nurses_present[slot_index(day, shift)];
  }
  // Inclusive day range [first, last] of a stay starting on admission_day,
  // truncated at the horizon.
  std::pair<int, int> stay_days(int patient, int admission_day) const {
    int last = admission_day + patients[patient].length_of_stay - 1;
    return {admission_day, last > horizon_days ? horizon_days : last};
  }
  std::int64_t total_bed_capacity() const {
    std::int64_t total = 0;
    for (const Room& r : rooms) total += r.capacity;
    return total;
  }

  int patient_index(const std::string& id) const;  // -1 when unknown
  int nurse_index(const std::string& id) const;
  int room_index(const std::string& id) const;
  int theater_index(const std::string& id) const;
  int surgeon_index(const std::string& id) const;

  // Recomputes derived sets and id lookup tables; validates invariants.
  void finalize();

 private:
  std::vector<std::pair<std::string, int>> patient_ids_, nurse_ids_, room_ids_, theater_ids_,
      surgeon_ids_;
};

Instance parse_instance(const std::string& bytes);
std::string serialize_instance(const Instance& instance);

// A complete candidate solution. Occupants always have admission day 1 and
// their fixed room; postponed flexible patients have no admission entry.
struct Schedule {
  std::vector<std::optional<int>> admission;  // per patient: admission day
  std::vector<int> room;                      // per patient: room index or -1
  std::vector<int> theater;                   // per patient: theater index or -1
  std::vector<int> roster;                    // [slot*R + r] -> nurse index or -1

  static Schedule empty_for(const Instance& instance);

  int roster_at(const Instance& inst, int room_idx, int day, int shift) const {
    return roster[inst.slot_index(day, shift) * static_cast<int>(inst.rooms.size()) + room_idx];
  }
  void set_roster(const Instance& inst, int room_idx, int day, int shift, int nurse_idx) {
    roster[inst.slot_index(day, shift) * static_cast<int>(inst.rooms.size()) + room_idx] =
        nurse_idx;
  }
};

enum class HardRule {
  MandatoryUnscheduled,  // (a) mandatory patient postponed or outside [release, deadline]
  ReleaseDay,            // (b) admitted before release day
  RoomCapacity,          // (c)
  GenderMix,             // (d)
  IncompatibleRoom,      // (e)
  SurgeonCapacity,       // (f)
  TheaterCapacity,       // (g)
  NurseCoverage,         // (h) occupied room-shift without exactly one working nurse
};

const char* hard_rule_name(HardRule rule);

struct Violation {
  HardRule rule;
  std::string entity;  // offending id (patient/room/surgeon/theater)
  int day = 0;         // 0 when not day-specific
  std::string detail;
};

std::vector<Violation> check_hard(const Instance& instance, const Schedule& schedule);

struct CostBreakdown {
  std::int64_t coc = 0;
  std::int64_t unscheduled = 0;
  std::int64_t excess_workload = 0;
  std::int64_t open_theaters = 0;
  std::int64_t delay = 0;
  std::int64_t age_mix = 0;
  std::int64_t skill_mismatch = 0;
  std::int64_t surgeon_transfer = 0;
  std::int64_t total = 0;

  // Builds a breakdown from the eight weighted components; total is their sum.
  static CostBreakdown from_components(std::int64_t coc, std::int64_t unscheduled,
                                       std::int64_t excess_workload, std::int64_t open_theaters,
                                       std::int64_t delay, std::int64_t age_mix,
                                       std::int64_t skill_mismatch,
                                       std::int64_t surgeon_transfer);
  std::int64_t component_sum() const {
    return coc + unscheduled + excess_workload + open_theaters + delay + age_mix + skill_mismatch +
           surgeon_transfer;
  }
};

// Weighted soft-cost evaluation. Throws HardInfeasibleError unless
// check_hard(instance, schedule) is empty.
CostBreakdown evaluate(const Instance& instance, const Schedule& schedule);

namespace detail {
// Evaluation without the hard-feasibility precondition check. The schedule
// must still be structurally complete (rooms for present patients, nurses on
// occupied slots); missing roster entries are ignored by the nurse terms.
CostBreakdown evaluate_unchecked(const Instance& instance, const Schedule& schedule);
}  // namespace detail

std::string write_solution(const Instance& instance, const Schedule& schedule);
Schedule read_solution(const std::string& bytes, const Instance& instance);

}  // namespace ihtp
