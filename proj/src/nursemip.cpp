#include "ihtp/nursemip.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ihtp {

milp::MilpModel build_nurse_model(const Instance& inst, const RoomAssignment& fixed,
                                  const Roster* warm_start, NurseMipVars* vars) {
  NurseCostModel cost_model(inst, fixed);
  const auto& slots = cost_model.slots();

  milp::MilpModel model;
  model.integral_objective = true;
  vars->assign.assign(slots.size(), {});
  vars->excess.assign(inst.nurses.size(),
                      std::vector<int>(inst.horizon_days * kNumShifts, -1));

  std::vector<int> present;
  for (int p = 0; p < static_cast<int>(inst.patients.size()); ++p)
    if (fixed.admission[p] && fixed.room[p] >= 0) present.push_back(p);
  vars->present_patients = present;
  std::vector<int> present_pos(inst.patients.size(), -1);
  for (std::size_t i = 0; i < present.size(); ++i) present_pos[present[i]] = static_cast<int>(i);

  vars->cares.assign(inst.nurses.size(), std::vector<int>(present.size(), -1));

  // Assignment variables per occupied slot and available nurse, with skill-gap
  // objective coefficients and the coverage equality.
  std::vector<std::vector<std::vector<std::pair<int, int>>>> nurse_patient_vars(
      inst.nurses.size());  // [nurse][present pos] -> (var, 1) entries
  for (auto& per_nurse : nurse_patient_vars) per_nurse.resize(present.size());

  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& slot = slots[i];
    const std::vector<int>& avail = inst.available_nurses(slot.day, slot.shift);
    if (avail.empty())
      throw HardInfeasibleError("occupied room-shift without any working nurse");
    std::vector<milp::LinearTerm> coverage;
    vars->assign[i].resize(avail.size());
    for (std::size_t k = 0; k < avail.size(); ++k) {
      const int n = avail[k];
      const int var = model.add_binary("x_n" + std::to_string(n) + "_slot" + std::to_string(i));
      vars->assign[i][k] = var;
      coverage.push_back({var, 1.0});
      std::int64_t gap_sum = 0;
      for (std::size_t j = 0; j < slot.patients.size(); ++j)
        gap_sum += std::max(0, slot.skill_req[j] - inst.nurses[n].skill);
      if (gap_sum > 0)
        model.set_objective_term(var, static_cast<double>(inst.weights.skill * gap_sum));
      for (int p : slot.patients)
        nurse_patient_vars[n][present_pos[p]].push_back({var, 1});
    }
    model.add_row("cover_slot" + std::to_string(i), std::move(coverage), milp::RowSense::Equal,
                  1.0);
  }

  // Continuity linking, aggregated with the tightest valid big-M (the number
  // of x variables of the pair) plus the disaggregated rows.
  for (int n = 0; n < static_cast<int>(inst.nurses.size()); ++n)
    for (std::size_t pos = 0; pos < present.size(); ++pos) {
      const auto& entries = nurse_patient_vars[n][pos];
      if (entries.empty()) continue;
      const int y = model.add_binary("y_n" + std::to_string(n) + "_p" + std::to_string(pos));
      vars->cares[n][pos] = y;
      model.set_objective_term(y, static_cast<double>(inst.weights.continuity));
      std::vector<milp::LinearTerm> aggregated;
      for (const auto& [var, one] : entries) {
        aggregated.push_back({var, 1.0});
        model.add_row("coc_dis", {{var, 1.0}, {y, -1.0}}, milp::RowSense::LessEqual, 0.0);
      }
      const double big_m = static_cast<double>(entries.size());
      aggregated.push_back({y, -big_m});
      model.add_row("coc_agg", std::move(aggregated), milp::RowSense::LessEqual, 0.0);
    }

  // Excess workload per (nurse, day, shift) over the slots the nurse may take.
  std::vector<std::vector<milp::LinearTerm>> excess_rows(inst.nurses.size() * inst.horizon_days *
                                                         kNumShifts);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& slot = slots[i];
    const std::vector<int>& avail = inst.available_nurses(slot.day, slot.shift);
    for (std::size_t k = 0; k < avail.size(); ++k) {
      const std::size_t key = static_cast<std::size_t>(avail[k]) * inst.horizon_days * kNumShifts +
                              inst.slot_index(slot.day, slot.shift);
      excess_rows[key].push_back({vars->assign[i][k], static_cast<double>(slot.workload)});
    }
  }
  for (int n = 0; n < static_cast<int>(inst.nurses.size()); ++n)
    for (int d = 1; d <= inst.horizon_days; ++d)
      for (int s = 0; s < kNumShifts; ++s) {
        const std::size_t key =
            static_cast<std::size_t>(n) * inst.horizon_days * kNumShifts + inst.slot_index(d, s);
        if (excess_rows[key].empty()) continue;
        const int eps = model.add_continuous(
            "eps_n" + std::to_string(n) + "_" + std::to_string(d) + "_" + std::to_string(s), 0.0,
            milp::kInf);
        vars->excess[n][inst.slot_index(d, s)] = eps;
        model.set_objective_term(eps, static_cast<double>(inst.weights.excess_workload));
        std::vector<milp::LinearTerm> row = excess_rows[key];
        row.push_back({eps, -1.0});
        model.add_row("excess_n" + std::to_string(n), std::move(row), milp::RowSense::LessEqual,
                      static_cast<double>(inst.nurses[n].capacity(d, s)));
      }

  if (warm_start) {
    std::vector<double> values(model.variables.size(), 0.0);
    NurseCostModel scratch(inst, fixed);
    scratch.reset(*warm_start);
    bool usable = true;
    for (std::size_t i = 0; i < slots.size() && usable; ++i) {
      const int nurse = warm_start->at(inst, slots[i].room, slots[i].day, slots[i].shift);
      const std::vector<int>& avail = inst.available_nurses(slots[i].day, slots[i].shift);
      const auto it = std::find(avail.begin(), avail.end(), nurse);
      if (it == avail.end()) {
        usable = false;
        break;
      }
      values[vars->assign[i][it - avail.begin()]] = 1.0;
    }
    if (usable) {
      // Derive y and eps from the assignment.
      std::vector<std::int64_t> load(inst.nurses.size() * inst.horizon_days * kNumShifts, 0);
      for (std::size_t i = 0; i < slots.size(); ++i) {
        const int nurse = warm_start->at(inst, slots[i].room, slots[i].day, slots[i].shift);
        load[static_cast<std::size_t>(nurse) * inst.horizon_days * kNumShifts +
             inst.slot_index(slots[i].day, slots[i].shift)] += slots[i].workload;
        for (int p : slots[i].patients)
          if (vars->cares[nurse][present_pos[p]] >= 0)
            values[vars->cares[nurse][present_pos[p]]] = 1.0;
      }
      for (int n = 0; n < static_cast<int>(inst.nurses.size()); ++n)
        for (int d = 1; d <= inst.horizon_days; ++d)
          for (int s = 0; s < kNumShifts; ++s) {
            const int eps = vars->excess[n][inst.slot_index(d, s)];
            if (eps < 0) continue;
            const std::int64_t l =
                load[static_cast<std::size_t>(n) * inst.horizon_days * kNumShifts +
                     inst.slot_index(d, s)];
            values[eps] = static_cast<double>(
                std::max<std::int64_t>(0, l - inst.nurses[n].capacity(d, s)));
          }
      model.warm_start.reserve(values.size());
      for (std::size_t j = 0; j < values.size(); ++j)
        model.warm_start.emplace_back(static_cast<int>(j), values[j]);
    }
  }

  return model;
}

PolishResult polish(const Instance& inst, const RoomAssignment& fixed, const Roster& roster,
                    const milp::MilpLimits& limits) {
  NurseCostModel cost_model(inst, fixed);
  cost_model.reset(roster);
  PolishResult result;
  result.roster = roster;
  result.cost = cost_model.cost();

  NurseMipVars vars;
  milp::MilpModel model = build_nurse_model(inst, fixed, &roster, &vars);
  milp::MilpOutcome outcome = milp::solve(model, limits);
  if (!outcome.best()) return result;

  Roster polished = roster;
  const auto& slots = cost_model.slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const std::vector<int>& avail = inst.available_nurses(slots[i].day, slots[i].shift);
    for (std::size_t k = 0; k < avail.size(); ++k)
      if (outcome.best()->values[vars.assign[i][k]] > 0.5)
        polished.assignment[inst.slot_index(slots[i].day, slots[i].shift) *
                                static_cast<int>(inst.rooms.size()) +
                            slots[i].room] = avail[k];
  }
  const std::int64_t polished_cost = cost_model.recompute_cost(polished);
  if (polished_cost < result.cost) {
    result.roster = std::move(polished);
    result.cost = polished_cost;
    result.improved = true;
  }
  return result;
}

}  // namespace ihtp
