#include "ihtp/admission.hpp"

#include <algorithm>
#include <cmath>

namespace ihtp {

namespace {

// Occupant presence on day d (delta counted from day 1) and their per-slot
// workload, both fixed constants of the model.
int occupant_presence(const Instance& inst, int day) {
  int count = 0;
  for (int p : inst.occupant_patients)
    if (day <= inst.patients[p].length_of_stay) ++count;
  return count;
}

std::int64_t occupant_workload(const Instance& inst, int day, int shift) {
  std::int64_t total = 0;
  for (int p : inst.occupant_patients) {
    const Patient& pat = inst.patients[p];
    if (day <= pat.length_of_stay) total += pat.workload_at(day - 1, shift);
  }
  return total;
}

}  // namespace

AdmissionModel build_admission_model(const Instance& inst, const AdmissionWindows& windows,
                                     const CareBoundTable& care_bounds, int rho) {
  if (rho < 0) throw std::invalid_argument("rho must be nonnegative");
  if (inst.total_bed_capacity() < rho)
    throw DegenerateCapacityError("rho " + std::to_string(rho) +
                                  " exceeds total bed capacity " +
                                  std::to_string(inst.total_bed_capacity()));

  AdmissionModel am;
  milp::MilpModel& model = am.model;
  model.integral_objective = true;

  const int H = inst.horizon_days;
  am.admit_var.assign(inst.patients.size(), std::vector<int>(H, -1));
  am.presence_var.assign(inst.patients.size(), std::vector<int>(H, -1));
  am.postpone_var.assign(inst.patients.size(), -1);
  am.excess_var.assign(H * kNumShifts, -1);
  am.theater_var.assign(inst.theaters.size(), std::vector<int>(H, -1));

  for (int p : inst.flexible_patients) {
    const Patient& pat = inst.patients[p];
    for (int d : windows.of(p)) {
      const int var = model.add_binary("x_" + pat.id + "_d" + std::to_string(d));
      am.admit_var[p][d - 1] = var;
      std::int64_t care = trivial_care_bound(inst, p, d);
      if (care_bounds.contains(p, d)) care = std::max(care, care_bounds.get(p, d));
      const std::int64_t delay_cost =
          inst.weights.delay * static_cast<std::int64_t>(d - pat.release_day);
      model.set_objective_term(var, static_cast<double>(care + delay_cost));
    }
    if (!pat.mandatory()) {
      am.postpone_var[p] = model.add_binary("pi_" + pat.id);
      model.set_objective_term(am.postpone_var[p],
                               static_cast<double>(inst.weights.unscheduled));
    }
    // Admit-once rows (postpone allowed for optional patients).
    std::vector<milp::LinearTerm> once;
    for (int d : windows.of(p)) once.push_back({am.admit_var[p][d - 1], 1.0});
    if (am.postpone_var[p] >= 0) once.push_back({am.postpone_var[p], 1.0});
    model.add_row("once_" + pat.id, std::move(once), milp::RowSense::Equal, 1.0);

    // Presence variables linked to admission choices; continuous is enough,
    // the linking equality forces integrality.
    for (int d = 1; d <= H; ++d) {
      std::vector<milp::LinearTerm> link;
      for (int delta = 0; delta < pat.length_of_stay; ++delta) {
        const int ad = d - delta;
        if (ad < 1) break;
        if (am.admit_var[p][ad - 1] >= 0) link.push_back({am.admit_var[p][ad - 1], -1.0});
      }
      if (link.empty()) continue;  // z is constantly zero on this day
      const int z = model.add_continuous("z_" + pat.id + "_d" + std::to_string(d), 0.0, 1.0);
      am.presence_var[p][d - 1] = z;
      link.push_back({z, 1.0});
      model.add_row("presence_" + pat.id + "_d" + std::to_string(d), std::move(link),
                    milp::RowSense::Equal, 0.0);
    }
  }

  // Surgeon capacity per (surgeon, day).
  for (int u = 0; u < static_cast<int>(inst.surgeons.size()); ++u) {
    for (int d = 1; d <= H; ++d) {
      std::vector<milp::LinearTerm> row;
      for (int p : inst.flexible_patients) {
        if (inst.patients[p].surgeon != u) continue;
        if (am.admit_var[p][d - 1] >= 0)
          row.push_back({am.admit_var[p][d - 1],
                         static_cast<double>(inst.patients[p].surgery_duration)});
      }
      if (row.empty()) continue;
      model.add_row("surgeon_" + inst.surgeons[u].id + "_d" + std::to_string(d), std::move(row),
                    milp::RowSense::LessEqual,
                    static_cast<double>(inst.surgeons[u].capacity_by_day[d - 1]));
    }
  }

  // Theater opening covers the aggregated surgery time per day.
  for (int o = 0; o < static_cast<int>(inst.theaters.size()); ++o)
    for (int d = 1; d <= H; ++d) {
      am.theater_var[o][d - 1] =
          model.add_binary("theta_" + inst.theaters[o].id + "_d" + std::to_string(d));
      model.set_objective_term(am.theater_var[o][d - 1],
                               static_cast<double>(inst.weights.open_theater));
    }
  for (int d = 1; d <= H; ++d) {
    std::vector<milp::LinearTerm> row;
    for (int o = 0; o < static_cast<int>(inst.theaters.size()); ++o)
      row.push_back({am.theater_var[o][d - 1],
                     static_cast<double>(inst.theaters[o].capacity_by_day[d - 1])});
    for (int p : inst.flexible_patients)
      if (am.admit_var[p][d - 1] >= 0)
        row.push_back({am.admit_var[p][d - 1],
                       -static_cast<double>(inst.patients[p].surgery_duration)});
    model.add_row("theater_cover_d" + std::to_string(d), std::move(row),
                  milp::RowSense::GreaterEqual, 0.0);
  }

  // Aggregated bed capacity reduced by rho; occupants enter as constants.
  for (int d = 1; d <= H; ++d) {
    std::vector<milp::LinearTerm> row;
    for (int p : inst.flexible_patients)
      if (am.presence_var[p][d - 1] >= 0) row.push_back({am.presence_var[p][d - 1], 1.0});
    const double rhs =
        static_cast<double>(inst.total_bed_capacity() - rho - occupant_presence(inst, d));
    if (row.empty()) {
      if (rhs < 0.0) {
        // Occupants alone exceed the reduced capacity: force infeasibility.
        const int contradiction = model.add_continuous("infeasible_d" + std::to_string(d), 0.0, 0.0);
        model.add_row("beds_d" + std::to_string(d), {{contradiction, 1.0}},
                      milp::RowSense::GreaterEqual, 1.0);
      }
      continue;
    }
    model.add_row("beds_d" + std::to_string(d), std::move(row), milp::RowSense::LessEqual, rhs);
  }

  // Aggregated nurse-excess lower bounds per (day, shift).
  for (int d = 1; d <= H; ++d)
    for (int s = 0; s < kNumShifts; ++s) {
      const int eps = model.add_continuous(
          "eps_d" + std::to_string(d) + "_s" + std::to_string(s), 0.0, milp::kInf);
      am.excess_var[(d - 1) * kNumShifts + s] = eps;
      model.set_objective_term(eps, static_cast<double>(inst.weights.excess_workload));
      std::int64_t capacity = 0;
      for (int n : inst.available_nurses(d, s)) capacity += inst.nurses[n].capacity(d, s);
      std::vector<milp::LinearTerm> row{{eps, 1.0}};
      for (int p : inst.flexible_patients) {
        const Patient& pat = inst.patients[p];
        for (int delta = 0; delta < pat.length_of_stay; ++delta) {
          const int ad = d - delta;
          if (ad < 1) break;
          if (am.admit_var[p][ad - 1] >= 0 && pat.workload_at(delta, s) != 0)
            row.push_back({am.admit_var[p][ad - 1],
                           static_cast<double>(pat.workload_at(delta, s))});
        }
      }
      const double rhs = static_cast<double>(occupant_workload(inst, d, s) - capacity);
      model.add_row("excess_d" + std::to_string(d) + "_s" + std::to_string(s), std::move(row),
                    milp::RowSense::GreaterEqual, rhs);
    }

  return am;
}

AdmissionSolution extract_admission_solution(const Instance& inst, const AdmissionModel& am,
                                             const milp::MilpIncumbent& incumbent, int rho) {
  AdmissionSolution sol;
  sol.admitted.assign(inst.patients.size(), std::nullopt);
  for (int p : inst.occupant_patients) sol.admitted[p] = 1;
  sol.opened_theaters.assign(inst.horizon_days, {});
  sol.rho = rho;
  sol.bound_contribution = std::llround(incumbent.objective);
  for (int p : inst.flexible_patients)
    for (int d = 1; d <= inst.horizon_days; ++d) {
      const int var = am.admit_var[p][d - 1];
      if (var >= 0 && incumbent.values[var] > 0.5) sol.admitted[p] = d;
    }
  for (int o = 0; o < static_cast<int>(inst.theaters.size()); ++o)
    for (int d = 1; d <= inst.horizon_days; ++d)
      if (incumbent.values[am.theater_var[o][d - 1]] > 0.5)
        sol.opened_theaters[d - 1].push_back(o);
  return sol;
}

void warm_start_admission(const Instance& inst, const AdmissionModel& am,
                          const AdmissionSolution& solution, milp::MilpModel* target) {
  target->warm_start.clear();
  const int H = inst.horizon_days;
  std::vector<double> values(target->variables.size(), 0.0);

  std::vector<std::int64_t> day_surgery(H + 1, 0);
  std::vector<std::vector<std::int64_t>> slot_demand(H + 1,
                                                     std::vector<std::int64_t>(kNumShifts, 0));
  for (int d = 1; d <= H; ++d)
    for (int s = 0; s < kNumShifts; ++s) slot_demand[d][s] = occupant_workload(inst, d, s);

  for (int p : inst.flexible_patients) {
    const Patient& pat = inst.patients[p];
    if (!solution.admitted[p]) {
      if (am.postpone_var[p] < 0) return;  // mandatory postponed: not representable
      values[am.postpone_var[p]] = 1.0;
      continue;
    }
    const int d = *solution.admitted[p];
    if (am.admit_var[p][d - 1] < 0) return;  // day pruned from the new window
    values[am.admit_var[p][d - 1]] = 1.0;
    day_surgery[d] += pat.surgery_duration;
    auto [first, last] = inst.stay_days(p, d);
    for (int day = first; day <= last; ++day) {
      if (am.presence_var[p][day - 1] >= 0) values[am.presence_var[p][day - 1]] = 1.0;
      for (int s = 0; s < kNumShifts; ++s) slot_demand[day][s] += pat.workload_at(day - d, s);
    }
  }

  // Open theaters greedily (largest capacity first) to cover each day's load.
  for (int d = 1; d <= H; ++d) {
    std::vector<int> order(inst.theaters.size());
    for (std::size_t o = 0; o < order.size(); ++o) order[o] = static_cast<int>(o);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return inst.theaters[a].capacity_by_day[d - 1] > inst.theaters[b].capacity_by_day[d - 1];
    });
    std::int64_t remaining = day_surgery[d];
    for (int o : order) {
      if (remaining <= 0) break;
      values[am.theater_var[o][d - 1]] = 1.0;
      remaining -= inst.theaters[o].capacity_by_day[d - 1];
    }
    if (remaining > 0) return;  // cannot cover: skip warm start
    for (int s = 0; s < kNumShifts; ++s) {
      std::int64_t capacity = 0;
      for (int n : inst.available_nurses(d, s)) capacity += inst.nurses[n].capacity(d, s);
      const std::int64_t excess = std::max<std::int64_t>(0, slot_demand[d][s] - capacity);
      values[am.excess_var[(d - 1) * kNumShifts + s]] = static_cast<double>(excess);
    }
  }

  target->warm_start.reserve(values.size());
  for (std::size_t j = 0; j < values.size(); ++j)
    target->warm_start.emplace_back(static_cast<int>(j), values[j]);
}

void exclude_admission_vector(const Instance& inst, const AdmissionModel& am,
                              const AdmissionSolution& solution, milp::MilpModel* target) {
  std::vector<milp::LinearTerm> row;
  for (int p : inst.flexible_patients) {
    if (solution.admitted[p]) {
      const int var = am.admit_var[p][*solution.admitted[p] - 1];
      if (var < 0) return;  // vector not representable in this model: nothing to cut
      row.push_back({var, 1.0});
    } else {
      if (am.postpone_var[p] < 0) return;
      row.push_back({am.postpone_var[p], 1.0});
    }
  }
  const double rhs = static_cast<double>(row.size()) - 1.0;
  target->add_row("nogood", std::move(row), milp::RowSense::LessEqual, rhs);
}

AdmissionRunResult run_admission(const Instance& inst, const AdmissionWindows& windows,
                                 const CareBoundTable& care_bounds, int rho,
                                 const milp::MilpLimits& limits, const AdmissionSink& sink,
                                 const AdmissionSolution* warm_start,
                                 const std::set<std::vector<int>>* exclude) {
  AdmissionModel am = build_admission_model(inst, windows, care_bounds, rho);
  if (warm_start) warm_start_admission(inst, am, *warm_start, &am.model);
  std::set<std::vector<int>> seen;
  if (exclude) {
    seen = *exclude;
    for (const std::vector<int>& key : *exclude) {
      AdmissionSolution ghost;
      ghost.admitted.assign(inst.patients.size(), std::nullopt);
      for (std::size_t i = 0; i < inst.flexible_patients.size(); ++i)
        if (key[i] != 0) ghost.admitted[inst.flexible_patients[i]] = key[i];
      exclude_admission_vector(inst, am, ghost, &am.model);
    }
  }

  AdmissionRunResult result;
  milp::MilpOutcome outcome =
      milp::solve(am.model, limits, [&](const milp::MilpIncumbent& incumbent) {
        AdmissionSolution sol = extract_admission_solution(inst, am, incumbent, rho);
        if (!seen.insert(sol.admission_key(inst)).second) return;
        ++result.emitted;
        if (sink) sink(sol);
      });

  result.dual_bound = outcome.dual_bound;
  switch (outcome.status) {
    case milp::MilpStatus::Optimal: result.status = AdmissionRunStatus::Optimal; break;
    case milp::MilpStatus::Feasible: result.status = AdmissionRunStatus::FeasibleLimit; break;
    case milp::MilpStatus::Infeasible: result.status = AdmissionRunStatus::Infeasible; break;
    case milp::MilpStatus::LimitNoSolution: result.status = AdmissionRunStatus::NoSolution; break;
  }
  return result;
}

}  // namespace ihtp
