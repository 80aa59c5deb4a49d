#include "ihtp/theater.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <thread>

namespace ihtp {

namespace {

// First-fit decreasing by surgery duration with randomized repair retries.
// Used only when the MIP produced no incumbent within its limit.
bool first_fit_plan(const Instance& inst, int day, const std::vector<int>& patients,
                    TheaterDaySolution* out) {
  std::vector<int> order = patients;
  std::mt19937_64 rng(0x51ed);
  for (int attempt = 0; attempt < 64; ++attempt) {
    if (attempt == 0) {
      std::sort(order.begin(), order.end(), [&inst](int a, int b) {
        if (inst.patients[a].surgery_duration != inst.patients[b].surgery_duration)
          return inst.patients[a].surgery_duration > inst.patients[b].surgery_duration;
        return a < b;
      });
    } else {
      std::shuffle(order.begin(), order.end(), rng);
    }
    std::vector<std::int64_t> remaining(inst.theaters.size());
    for (std::size_t o = 0; o < inst.theaters.size(); ++o)
      remaining[o] = inst.theaters[o].capacity_by_day[day - 1];
    std::vector<std::pair<int, int>> assignment;
    bool ok = true;
    for (int p : order) {
      int chosen = -1;
      for (std::size_t o = 0; o < inst.theaters.size(); ++o)
        if (remaining[o] >= inst.patients[p].surgery_duration) {
          chosen = static_cast<int>(o);
          break;
        }
      if (chosen < 0) {
        ok = false;
        break;
      }
      remaining[chosen] -= inst.patients[p].surgery_duration;
      assignment.push_back({p, chosen});
    }
    if (!ok) continue;
    std::sort(assignment.begin(), assignment.end());
    out->assignment = std::move(assignment);
    std::set<int> opened;
    std::set<std::pair<int, int>> incidences;
    for (const auto& [p, o] : out->assignment) {
      opened.insert(o);
      incidences.insert({inst.patients[p].surgeon, o});
    }
    out->opened.assign(opened.begin(), opened.end());
    out->objective = inst.weights.open_theater * static_cast<std::int64_t>(opened.size()) +
                     inst.weights.surgeon_transfer * static_cast<std::int64_t>(incidences.size());
    out->optimal = false;
    return true;
  }
  return false;
}

}  // namespace

TheaterDaySolution solve_day(const Instance& inst, int day,
                             const std::vector<int>& patients_on_day,
                             const milp::MilpLimits& limits) {
  TheaterDaySolution result;
  result.day = day;
  if (patients_on_day.empty()) {
    result.optimal = true;
    return result;
  }

  std::int64_t total_duration = 0, total_capacity = 0;
  std::set<int> surgeons;
  for (int p : patients_on_day) {
    total_duration += inst.patients[p].surgery_duration;
    surgeons.insert(inst.patients[p].surgeon);
  }
  for (const Theater& theater : inst.theaters) total_capacity += theater.capacity_by_day[day - 1];
  if (total_duration > total_capacity)
    throw HardInfeasibleError("theater capacity exceeded on day " + std::to_string(day) +
                              " despite admission-stage guarantee");

  const int num_theaters = static_cast<int>(inst.theaters.size());
  milp::MilpModel model;
  model.integral_objective = true;

  std::vector<int> opened_var(num_theaters);
  for (int o = 0; o < num_theaters; ++o) {
    opened_var[o] = model.add_binary("theta_" + std::to_string(o));
    model.set_objective_term(opened_var[o], static_cast<double>(inst.weights.open_theater));
  }
  std::vector<std::vector<int>> assign_var(patients_on_day.size(),
                                           std::vector<int>(num_theaters));
  std::vector<std::vector<int>> surgeon_var;  // aligned with `surgeon_list`
  std::vector<int> surgeon_list(surgeons.begin(), surgeons.end());
  for (int u : surgeon_list) {
    std::vector<int> vars(num_theaters);
    for (int o = 0; o < num_theaters; ++o) {
      vars[o] = model.add_binary("y_u" + std::to_string(u) + "_o" + std::to_string(o));
      model.set_objective_term(vars[o], static_cast<double>(inst.weights.surgeon_transfer));
    }
    surgeon_var.push_back(std::move(vars));
  }

  for (std::size_t i = 0; i < patients_on_day.size(); ++i) {
    const int p = patients_on_day[i];
    const int u_pos = static_cast<int>(
        std::find(surgeon_list.begin(), surgeon_list.end(), inst.patients[p].surgeon) -
        surgeon_list.begin());
    std::vector<milp::LinearTerm> once;
    for (int o = 0; o < num_theaters; ++o) {
      assign_var[i][o] = model.add_binary("x_p" + std::to_string(p) + "_o" + std::to_string(o));
      once.push_back({assign_var[i][o], 1.0});
      // Disaggregated opening rows and surgeon incidence rows.
      model.add_row("open", {{opened_var[o], 1.0}, {assign_var[i][o], -1.0}},
                    milp::RowSense::GreaterEqual, 0.0);
      model.add_row("surgeon", {{surgeon_var[u_pos][o], 1.0}, {assign_var[i][o], -1.0}},
                    milp::RowSense::GreaterEqual, 0.0);
    }
    model.add_row("once_p" + std::to_string(p), std::move(once), milp::RowSense::Equal, 1.0);
  }
  for (int o = 0; o < num_theaters; ++o) {
    std::vector<milp::LinearTerm> row;
    for (std::size_t i = 0; i < patients_on_day.size(); ++i)
      row.push_back({assign_var[i][o],
                     static_cast<double>(inst.patients[patients_on_day[i]].surgery_duration)});
    row.push_back({opened_var[o],
                   -static_cast<double>(inst.theaters[o].capacity_by_day[day - 1])});
    model.add_row("cap_o" + std::to_string(o), std::move(row), milp::RowSense::LessEqual, 0.0);
  }

  milp::MilpOutcome outcome = milp::solve(model, limits);
  if (!outcome.best()) {
    if (!first_fit_plan(inst, day, patients_on_day, &result))
      throw HardInfeasibleError("no theater plan found for day " + std::to_string(day));
    result.day = day;
    return result;
  }

  const milp::MilpIncumbent& best = *outcome.best();
  result.optimal = outcome.status == milp::MilpStatus::Optimal;
  result.objective = std::llround(best.objective);
  for (std::size_t i = 0; i < patients_on_day.size(); ++i)
    for (int o = 0; o < num_theaters; ++o)
      if (best.values[assign_var[i][o]] > 0.5)
        result.assignment.push_back({patients_on_day[i], o});
  std::sort(result.assignment.begin(), result.assignment.end());
  std::set<int> opened;
  for (const auto& [p, o] : result.assignment) opened.insert(o);
  result.opened.assign(opened.begin(), opened.end());
  return result;
}

std::map<int, TheaterDaySolution> solve_all_days(const Instance& inst,
                                                 const AdmissionSolution& admission,
                                                 double per_day_time_s, int workers,
                                                 const milp::CancelToken* cancel) {
  std::vector<std::vector<int>> by_day(inst.horizon_days + 1);
  for (int p : inst.flexible_patients)
    if (admission.admitted[p]) by_day[*admission.admitted[p]].push_back(p);

  std::vector<int> days;
  for (int d = 1; d <= inst.horizon_days; ++d)
    if (!by_day[d].empty()) days.push_back(d);

  std::map<int, TheaterDaySolution> plans;
  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;

  auto worker = [&]() {
    while (true) {
      const std::size_t index = next.fetch_add(1);
      if (index >= days.size()) return;
      if (cancel && cancel->cancelled()) return;
      milp::MilpLimits limits;
      limits.wall_time_s = per_day_time_s;
      limits.cancel = cancel;
      try {
        TheaterDaySolution plan = solve_day(inst, days[index], by_day[days[index]], limits);
        std::lock_guard<std::mutex> lock(mutex);
        plans[days[index]] = std::move(plan);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mutex);
        if (!error) error = std::current_exception();
      }
    }
  };

  workers = std::max(1, workers);
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return plans;
}

}  // namespace ihtp
