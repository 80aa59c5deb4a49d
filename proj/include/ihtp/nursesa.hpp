#pragma once

#include <cstdint>
#include <vector>

#include "ihtp/milp.hpp"
#include "ihtp/model.hpp"
#include "ihtp/roomcp.hpp"

namespace ihtp {

// Nurse assignment per occupied (room, day, shift) slot; -1 means none.
struct Roster {
  std::vector<int> assignment;  // indexed like Schedule::roster

  int at(const Instance& inst, int room, int day, int shift) const {
    return assignment[inst.slot_index(day, shift) * static_cast<int>(inst.rooms.size()) + room];
  }
};

// Cost model and incremental ledgers for the three nurse-linked soft terms
// (excess workload, continuity of care, skill gaps) on a fixed room
// assignment. Ledgers stay equal to a from-scratch recomputation after every
// apply().
class NurseCostModel {
 public:
  struct Slot {
    int room, day, shift;
    std::int64_t workload;       // total patient minutes in this room-shift
    std::vector<int> patients;   // present patients
    std::vector<int> skill_req;  // per patient, aligned with `patients`
  };

  NurseCostModel(const Instance& inst, const RoomAssignment& fixed);

  const std::vector<Slot>& slots() const { return slots_; }
  int slot_of(int room, int day, int shift) const {
    return slot_lookup_[inst_.slot_index(day, shift) * static_cast<int>(inst_.rooms.size()) +
                        room];
  }

  // Loads `roster` into the ledgers; the roster must cover every slot.
  void reset(const Roster& roster);

  std::int64_t cost() const { return cost_; }

  // Objective change (new minus current) of putting `nurse` on `slot`.
  std::int64_t swap_delta(int slot, int nurse) const;

  void apply(int slot, int nurse);
  int nurse_at(int slot) const { return current_[slot]; }

  // From-scratch recomputation of the weighted three-term objective.
  std::int64_t recompute_cost(const Roster& roster) const;
  bool ledgers_coherent() const;  // ledger == from-scratch, used by tests

  Roster to_roster() const;
  const Instance& instance() const { return inst_; }

 private:
  std::int64_t excess_of(int nurse, int day, int shift, std::int64_t load) const;

  const Instance& inst_;
  std::vector<Slot> slots_;
  std::vector<int> slot_lookup_;  // dense (room,day,shift) -> slot index or -1
  std::vector<int> current_;      // per slot: nurse

  // Ledgers.
  std::vector<std::int64_t> nurse_load_;   // [nurse][(d,s)] assigned minutes
  std::vector<std::int64_t> contact_;      // [nurse][patient] care count
  std::vector<std::int64_t> skill_gap_;    // [nurse][(d,s)] gap sum
  std::int64_t cost_ = 0;
};

// Greedy construction: a first pass assigns rooms to nurses while their shift
// capacity absorbs the load without excess, a second pass gives leftovers to
// the lowest-loaded available nurse. Throws HardInfeasibleError when an
// occupied slot has no working nurse.
Roster construct_initial(const Instance& inst, const RoomAssignment& fixed);

// T0 = 0.05 * obj0 / ln 2.
double initial_temperature(std::int64_t obj0);

struct NeighborEvaluation {
  std::vector<int> candidates;       // nurses available on the slot's (day, shift)
  std::vector<std::int64_t> phi;     // objective decrease per candidate (larger = better)
  std::vector<double> phi_normalized;  // mapped to [0.02, 1.02]
  std::vector<double> probability;   // sums to 1
};

NeighborEvaluation evaluate_neighbors(const NurseCostModel& model, int slot);

struct SaLimits {
  double wall_time_s = 15.0;
  long max_no_improve = 5000;
  double cooling = 0.999;
  const milp::CancelToken* cancel = nullptr;
};

struct SaResult {
  Roster roster;
  std::int64_t cost = 0;
  long iterations = 0;
};

// Simulated annealing over single-slot nurse replacement moves, probabilistic
// candidate selection, exponential acceptance and per-iteration cooling.
// Deterministic for a fixed seed.
SaResult anneal(const Instance& inst, const RoomAssignment& fixed, const SaLimits& limits,
                std::uint64_t seed);

}  // namespace ihtp
