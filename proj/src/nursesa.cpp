#include "ihtp/nursesa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace ihtp {

namespace {
// Uniform double in [0, 1) from the top 53 bits; stable across platforms.
double canonical_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
}  // namespace

NurseCostModel::NurseCostModel(const Instance& inst, const RoomAssignment& fixed) : inst_(inst) {
  const int num_rooms = static_cast<int>(inst.rooms.size());
  slot_lookup_.assign(static_cast<std::size_t>(inst.horizon_days) * kNumShifts * num_rooms, -1);

  std::vector<std::vector<int>> room_day(static_cast<std::size_t>(num_rooms) *
                                         (inst.horizon_days + 1));
  for (int p = 0; p < static_cast<int>(inst.patients.size()); ++p) {
    if (!fixed.admission[p] || fixed.room[p] < 0) continue;
    auto [first, last] = inst.stay_days(p, *fixed.admission[p]);
    for (int d = first; d <= last; ++d)
      room_day[fixed.room[p] * (inst.horizon_days + 1) + d].push_back(p);
  }
  for (int r = 0; r < num_rooms; ++r)
    for (int d = 1; d <= inst.horizon_days; ++d) {
      const std::vector<int>& present = room_day[r * (inst.horizon_days + 1) + d];
      if (present.empty()) continue;
      for (int s = 0; s < kNumShifts; ++s) {
        Slot slot;
        slot.room = r;
        slot.day = d;
        slot.shift = s;
        slot.workload = 0;
        for (int p : present) {
          const int delta = d - *fixed.admission[p];
          slot.patients.push_back(p);
          slot.skill_req.push_back(inst.patients[p].skill_at(delta, s));
          slot.workload += inst.patients[p].workload_at(delta, s);
        }
        slot_lookup_[inst.slot_index(d, s) * num_rooms + r] = static_cast<int>(slots_.size());
        slots_.push_back(std::move(slot));
      }
    }

  current_.assign(slots_.size(), -1);
  nurse_load_.assign(inst.nurses.size() * inst.horizon_days * kNumShifts, 0);
  skill_gap_.assign(nurse_load_.size(), 0);
  contact_.assign(inst.nurses.size() * inst.patients.size(), 0);
}

std::int64_t NurseCostModel::excess_of(int nurse, int day, int shift, std::int64_t load) const {
  const std::int64_t cap = inst_.nurses[nurse].capacity(day, shift);
  return load > cap ? load - cap : 0;
}

void NurseCostModel::reset(const Roster& roster) {
  std::fill(nurse_load_.begin(), nurse_load_.end(), 0);
  std::fill(skill_gap_.begin(), skill_gap_.end(), 0);
  std::fill(contact_.begin(), contact_.end(), 0);
  cost_ = 0;

  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const Slot& slot = slots_[i];
    const int nurse = roster.at(inst_, slot.room, slot.day, slot.shift);
    current_[i] = nurse;
    if (nurse < 0) continue;
    const std::size_t ds = static_cast<std::size_t>(nurse) * inst_.horizon_days * kNumShifts +
                           inst_.slot_index(slot.day, slot.shift);
    nurse_load_[ds] += slot.workload;
    for (std::size_t k = 0; k < slot.patients.size(); ++k) {
      contact_[static_cast<std::size_t>(nurse) * inst_.patients.size() + slot.patients[k]] += 1;
      skill_gap_[ds] += std::max(0, slot.skill_req[k] - inst_.nurses[nurse].skill);
    }
  }

  // Assemble the weighted objective from the ledgers.
  std::int64_t excess = 0, gaps = 0, contacts = 0;
  for (int n = 0; n < static_cast<int>(inst_.nurses.size()); ++n)
    for (int d = 1; d <= inst_.horizon_days; ++d)
      for (int s = 0; s < kNumShifts; ++s) {
        const std::size_t ds = static_cast<std::size_t>(n) * inst_.horizon_days * kNumShifts +
                               inst_.slot_index(d, s);
        if (nurse_load_[ds] > 0) excess += excess_of(n, d, s, nurse_load_[ds]);
        gaps += skill_gap_[ds];
      }
  for (std::int64_t c : contact_) contacts += c > 0 ? 1 : 0;
  cost_ = inst_.weights.excess_workload * excess + inst_.weights.skill * gaps +
          inst_.weights.continuity * contacts;
}

std::int64_t NurseCostModel::swap_delta(int slot_index, int nurse) const {
  const Slot& slot = slots_[slot_index];
  const int old_nurse = current_[slot_index];
  if (nurse == old_nurse) return 0;

  std::int64_t delta = 0;
  const std::size_t stride = static_cast<std::size_t>(inst_.horizon_days) * kNumShifts;
  const std::size_t ds = inst_.slot_index(slot.day, slot.shift);

  // Workload: the slot's minutes move from the old nurse to the new one.
  if (old_nurse >= 0) {
    const std::int64_t load = nurse_load_[old_nurse * stride + ds];
    delta -= inst_.weights.excess_workload *
             (excess_of(old_nurse, slot.day, slot.shift, load) -
              excess_of(old_nurse, slot.day, slot.shift, load - slot.workload));
  }
  {
    const std::int64_t load = nurse_load_[nurse * stride + ds];
    delta += inst_.weights.excess_workload *
             (excess_of(nurse, slot.day, slot.shift, load + slot.workload) -
              excess_of(nurse, slot.day, slot.shift, load));
  }

  // Skill and continuity per patient in the slot.
  for (std::size_t k = 0; k < slot.patients.size(); ++k) {
    const int p = slot.patients[k];
    if (old_nurse >= 0) {
      delta -= inst_.weights.skill *
               std::max(0, slot.skill_req[k] - inst_.nurses[old_nurse].skill);
      if (contact_[static_cast<std::size_t>(old_nurse) * inst_.patients.size() + p] == 1)
        delta -= inst_.weights.continuity;
    }
    delta += inst_.weights.skill * std::max(0, slot.skill_req[k] - inst_.nurses[nurse].skill);
    if (contact_[static_cast<std::size_t>(nurse) * inst_.patients.size() + p] == 0)
      delta += inst_.weights.continuity;
  }
  return delta;
}

void NurseCostModel::apply(int slot_index, int nurse) {
  const Slot& slot = slots_[slot_index];
  const int old_nurse = current_[slot_index];
  if (nurse == old_nurse) return;
  cost_ += swap_delta(slot_index, nurse);

  const std::size_t stride = static_cast<std::size_t>(inst_.horizon_days) * kNumShifts;
  const std::size_t ds = inst_.slot_index(slot.day, slot.shift);
  if (old_nurse >= 0) {
    nurse_load_[old_nurse * stride + ds] -= slot.workload;
    for (std::size_t k = 0; k < slot.patients.size(); ++k) {
      contact_[static_cast<std::size_t>(old_nurse) * inst_.patients.size() + slot.patients[k]] -=
          1;
      skill_gap_[old_nurse * stride + ds] -=
          std::max(0, slot.skill_req[k] - inst_.nurses[old_nurse].skill);
    }
  }
  nurse_load_[nurse * stride + ds] += slot.workload;
  for (std::size_t k = 0; k < slot.patients.size(); ++k) {
    contact_[static_cast<std::size_t>(nurse) * inst_.patients.size() + slot.patients[k]] += 1;
    skill_gap_[nurse * stride + ds] +=
        std::max(0, slot.skill_req[k] - inst_.nurses[nurse].skill);
  }
  current_[slot_index] = nurse;
}

std::int64_t NurseCostModel::recompute_cost(const Roster& roster) const {
  std::vector<std::int64_t> load(nurse_load_.size(), 0);
  std::vector<std::int64_t> contact(contact_.size(), 0);
  std::int64_t gaps = 0;
  const std::size_t stride = static_cast<std::size_t>(inst_.horizon_days) * kNumShifts;
  for (const Slot& slot : slots_) {
    const int nurse = roster.at(inst_, slot.room, slot.day, slot.shift);
    if (nurse < 0) continue;
    load[nurse * stride + inst_.slot_index(slot.day, slot.shift)] += slot.workload;
    for (std::size_t k = 0; k < slot.patients.size(); ++k) {
      contact[static_cast<std::size_t>(nurse) * inst_.patients.size() + slot.patients[k]] += 1;
      gaps += std::max(0, slot.skill_req[k] - inst_.nurses[nurse].skill);
    }
  }
  std::int64_t excess = 0, contacts = 0;
  for (int n = 0; n < static_cast<int>(inst_.nurses.size()); ++n)
    for (int d = 1; d <= inst_.horizon_days; ++d)
      for (int s = 0; s < kNumShifts; ++s) {
        const std::int64_t l = load[n * stride + inst_.slot_index(d, s)];
        if (l > 0) excess += excess_of(n, d, s, l);
      }
  for (std::int64_t c : contact) contacts += c > 0 ? 1 : 0;
  return inst_.weights.excess_workload * excess + inst_.weights.skill * gaps +
         inst_.weights.continuity * contacts;
}

bool NurseCostModel::ledgers_coherent() const {
  if (recompute_cost(to_roster()) != cost_) return false;
  std::vector<std::int64_t> load(nurse_load_.size(), 0);
  std::vector<std::int64_t> contact(contact_.size(), 0);
  std::vector<std::int64_t> gaps(skill_gap_.size(), 0);
  const std::size_t stride = static_cast<std::size_t>(inst_.horizon_days) * kNumShifts;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const Slot& slot = slots_[i];
    const int nurse = current_[i];
    if (nurse < 0) continue;
    const std::size_t ds = nurse * stride + inst_.slot_index(slot.day, slot.shift);
    load[ds] += slot.workload;
    for (std::size_t k = 0; k < slot.patients.size(); ++k) {
      contact[static_cast<std::size_t>(nurse) * inst_.patients.size() + slot.patients[k]] += 1;
      gaps[ds] += std::max(0, slot.skill_req[k] - inst_.nurses[nurse].skill);
    }
  }
  return load == nurse_load_ && contact == contact_ && gaps == skill_gap_;
}

Roster NurseCostModel::to_roster() const {
  Roster roster;
  roster.assignment.assign(slot_lookup_.size(), -1);
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const Slot& slot = slots_[i];
    roster.assignment[inst_.slot_index(slot.day, slot.shift) *
                          static_cast<int>(inst_.rooms.size()) +
                      slot.room] = current_[i];
  }
  return roster;
}

Roster construct_initial(const Instance& inst, const RoomAssignment& fixed) {
  NurseCostModel model(inst, fixed);
  const int num_rooms = static_cast<int>(inst.rooms.size());
  Roster roster;
  roster.assignment.assign(static_cast<std::size_t>(inst.horizon_days) * kNumShifts * num_rooms,
                           -1);

  std::vector<std::int64_t> load(inst.nurses.size() * inst.horizon_days * kNumShifts, 0);
  auto load_of = [&](int n, int d, int s) -> std::int64_t& {
    return load[static_cast<std::size_t>(n) * inst.horizon_days * kNumShifts +
                inst.slot_index(d, s)];
  };
  std::vector<char> covered(model.slots().size(), 0);

  // First pass: walk nurses and their working shifts, taking rooms while the
  // capacity absorbs them without excess.
  for (int n = 0; n < static_cast<int>(inst.nurses.size()); ++n)
    for (int d = 1; d <= inst.horizon_days; ++d)
      for (int s = 0; s < kNumShifts; ++s) {
        if (!inst.nurses[n].works(d, s)) continue;
        for (std::size_t i = 0; i < model.slots().size(); ++i) {
          const NurseCostModel::Slot& slot = model.slots()[i];
          if (covered[i] || slot.day != d || slot.shift != s) continue;
          if (load_of(n, d, s) + slot.workload > inst.nurses[n].capacity(d, s)) continue;
          roster.assignment[inst.slot_index(d, s) * num_rooms + slot.room] = n;
          load_of(n, d, s) += slot.workload;
          covered[i] = 1;
        }
      }

  // Second pass: leftovers go to the lowest-loaded available nurse.
  for (std::size_t i = 0; i < model.slots().size(); ++i) {
    if (covered[i]) continue;
    const NurseCostModel::Slot& slot = model.slots()[i];
    const std::vector<int>& avail = inst.available_nurses(slot.day, slot.shift);
    if (avail.empty())
      throw HardInfeasibleError("no nurse works day " + std::to_string(slot.day) + " shift " +
                                shift_name(slot.shift) + " but room \"" +
                                inst.rooms[slot.room].id + "\" is occupied");
    int best = avail.front();
    for (int n : avail)
      if (load_of(n, slot.day, slot.shift) < load_of(best, slot.day, slot.shift)) best = n;
    roster.assignment[inst.slot_index(slot.day, slot.shift) * num_rooms + slot.room] = best;
    load_of(best, slot.day, slot.shift) += slot.workload;
    covered[i] = 1;
  }
  return roster;
}

double initial_temperature(std::int64_t obj0) {
  return 0.05 * static_cast<double>(obj0) / std::log(2.0);
}

NeighborEvaluation evaluate_neighbors(const NurseCostModel& model, int slot) {
  NeighborEvaluation eval;
  const NurseCostModel::Slot& s = model.slots()[slot];
  eval.candidates = model.instance().available_nurses(s.day, s.shift);
  eval.phi.reserve(eval.candidates.size());
  for (int n : eval.candidates) eval.phi.push_back(-model.swap_delta(slot, n));

  const auto [lo_it, hi_it] = std::minmax_element(eval.phi.begin(), eval.phi.end());
  const std::int64_t lo = *lo_it, hi = *hi_it;
  eval.phi_normalized.resize(eval.phi.size());
  eval.probability.resize(eval.phi.size());
  if (hi == lo) {
    // Degenerate normalization: uniform probabilities.
    const double uniform = 1.0 / static_cast<double>(eval.phi.size());
    std::fill(eval.phi_normalized.begin(), eval.phi_normalized.end(), 0.02);
    std::fill(eval.probability.begin(), eval.probability.end(), uniform);
    return eval;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < eval.phi.size(); ++i) {
    eval.phi_normalized[i] =
        static_cast<double>(eval.phi[i] - lo) / static_cast<double>(hi - lo) + 0.02;
    sum += eval.phi_normalized[i];
  }
  for (std::size_t i = 0; i < eval.phi.size(); ++i)
    eval.probability[i] = eval.phi_normalized[i] / sum;
  return eval;
}

SaResult anneal(const Instance& inst, const RoomAssignment& fixed, const SaLimits& limits,
                std::uint64_t seed) {
  NurseCostModel model(inst, fixed);
  SaResult result;

  Roster initial = construct_initial(inst, fixed);
  model.reset(initial);
  result.roster = initial;
  result.cost = model.cost();
  if (model.slots().empty()) return result;

  std::mt19937_64 rng(seed);
  double temperature = initial_temperature(model.cost());
  const double cooling = limits.cooling;
  std::int64_t best_cost = model.cost();
  std::int64_t current_cost = model.cost();
  long iter_wo_improve = 0;

  const auto deadline =
      std::chrono::steady_clock::now() +
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(limits.wall_time_s));

  while (iter_wo_improve < limits.max_no_improve) {
    if ((result.iterations & 255) == 0) {
      if (std::chrono::steady_clock::now() >= deadline) break;
      if (limits.cancel && limits.cancel->cancelled()) break;
    }
    ++result.iterations;

    const int slot = static_cast<int>(rng() % model.slots().size());
    NeighborEvaluation eval = evaluate_neighbors(model, slot);

    // Weighted candidate draw.
    double u = canonical_unit(rng);
    std::size_t pick = eval.candidates.size() - 1;
    for (std::size_t i = 0; i < eval.candidates.size(); ++i) {
      u -= eval.probability[i];
      if (u < 0.0) {
        pick = i;
        break;
      }
    }
    const int new_nurse = eval.candidates[pick];
    const std::int64_t candidate_cost = current_cost - eval.phi[pick];

    ++iter_wo_improve;
    if (candidate_cost < best_cost) {
      best_cost = candidate_cost;
      iter_wo_improve = 0;
    }

    bool accept = candidate_cost < current_cost;
    if (!accept) {
      const double delta = static_cast<double>(candidate_cost - current_cost);
      if (delta == 0.0)
        accept = true;
      else if (temperature > 0.0)
        accept = canonical_unit(rng) < std::exp(-delta / temperature);
    }
    if (accept) {
      model.apply(slot, new_nurse);
      current_cost = candidate_cost;
      if (current_cost == best_cost) result.roster = model.to_roster();
    }
    temperature *= cooling;
  }

  result.cost = best_cost;
  return result;
}

}  // namespace ihtp
