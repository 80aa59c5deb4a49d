#include "ihtp/carebounds.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace ihtp {

using nlohmann::json;

std::int64_t trivial_care_bound(const Instance& inst, int patient, int day) {
  auto [first, last] = inst.stay_days(patient, day);
  const int slots = (last - first + 1) * kNumShifts;
  int best_single_nurse = 0;
  for (int n = 0; n < static_cast<int>(inst.nurses.size()); ++n) {
    int covered = 0;
    for (int d = first; d <= last; ++d)
      for (int s = 0; s < kNumShifts; ++s)
        if (inst.nurses[n].works(d, s)) ++covered;
    best_single_nurse = std::max(best_single_nurse, covered);
  }
  if (best_single_nurse == 0) return CareBoundTable::kUncoverable;
  for (int d = first; d <= last; ++d)
    for (int s = 0; s < kNumShifts; ++s)
      if (inst.available_nurses(d, s).empty()) return CareBoundTable::kUncoverable;
  const std::int64_t min_nurses = (slots + best_single_nurse - 1) / best_single_nurse;
  return inst.weights.continuity * min_nurses;
}

CareBoundTable trivial_table(const Instance& inst, const AdmissionWindows& windows) {
  CareBoundTable table;
  table.bounds.resize(inst.patients.size());
  for (int p : inst.flexible_patients)
    for (int d : windows.of(p)) table.set(p, d, trivial_care_bound(inst, p, d));
  return table;
}

std::int64_t bound_pair(const Instance& inst, int patient, int day,
                        const milp::MilpLimits& limits) {
  auto [first, last] = inst.stay_days(patient, day);

  milp::MilpModel model;
  model.integral_objective = true;
  std::vector<int> nurse_used(inst.nurses.size(), -1);  // y_n

  // One coverage row per stay slot; x variables only where the nurse works.
  std::vector<std::vector<milp::LinearTerm>> cover_rows;
  std::vector<std::vector<int>> nurse_slot_vars(inst.nurses.size());
  for (int d = first; d <= last; ++d) {
    for (int s = 0; s < kNumShifts; ++s) {
      const std::vector<int>& avail = inst.available_nurses(d, s);
      if (avail.empty()) return CareBoundTable::kUncoverable;
      std::vector<milp::LinearTerm> row;
      for (int n : avail) {
        const int var = model.add_binary("x_n" + std::to_string(n) + "_d" + std::to_string(d) +
                                         "_s" + std::to_string(s));
        row.push_back({var, 1.0});
        nurse_slot_vars[n].push_back(var);
        const int gap =
            std::max(0, inst.patients[patient].skill_at(d - day, s) - inst.nurses[n].skill);
        if (gap > 0)
          model.set_objective_term(var, static_cast<double>(inst.weights.skill * gap));
      }
      cover_rows.push_back(std::move(row));
    }
  }
  for (int n = 0; n < static_cast<int>(inst.nurses.size()); ++n) {
    if (nurse_slot_vars[n].empty()) continue;
    nurse_used[n] = model.add_binary("y_n" + std::to_string(n));
    model.set_objective_term(nurse_used[n], static_cast<double>(inst.weights.continuity));
    for (int var : nurse_slot_vars[n])
      model.add_row("coc", {{nurse_used[n], 1.0}, {var, -1.0}}, milp::RowSense::GreaterEqual, 0.0);
  }
  for (std::size_t i = 0; i < cover_rows.size(); ++i)
    model.add_row("cover" + std::to_string(i), std::move(cover_rows[i]),
                  milp::RowSense::GreaterEqual, 1.0);

  milp::MilpOutcome outcome = milp::solve(model, limits);
  if (outcome.status == milp::MilpStatus::Optimal)
    return std::llround(outcome.best()->objective);
  if (outcome.status == milp::MilpStatus::Infeasible) return CareBoundTable::kUncoverable;
  // Limit hit: the dual bound is still a valid lower bound; never weaker than
  // the trivial bound.
  std::int64_t fallback = trivial_care_bound(inst, patient, day);
  if (outcome.dual_bound && fallback != CareBoundTable::kUncoverable)
    fallback = std::max(fallback, static_cast<std::int64_t>(std::ceil(*outcome.dual_bound - 1e-6)));
  return fallback;
}

CareBoundTable bound_all(const Instance& inst, const AdmissionWindows& windows,
                         double wall_time_s, int workers, const milp::CancelToken* cancel,
                         CareBoundStats* stats) {
  CareBoundTable table = trivial_table(inst, windows);

  struct Pair {
    int patient, day;
    std::size_t window_size;
  };
  std::vector<Pair> pairs;
  for (int p : inst.flexible_patients)
    for (int d : windows.of(p)) pairs.push_back({p, d, windows.of(p).size()});
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.window_size != b.window_size) return a.window_size < b.window_size;
    if (a.patient != b.patient) return a.patient < b.patient;
    return a.day < b.day;
  });

  if (stats) {
    *stats = {};
    stats->pairs_total = static_cast<int>(pairs.size());
  }
  if (pairs.empty()) return table;

  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(wall_time_s));
  std::atomic<std::size_t> next{0};
  std::atomic<int> solved{0}, fallback{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t index = next.fetch_add(1);
      if (index >= pairs.size()) return;
      const auto now = std::chrono::steady_clock::now();
      if (now >= deadline || (cancel && cancel->cancelled())) {
        fallback.fetch_add(1);
        continue;  // keep the trivial bound for the remaining pairs
      }
      milp::MilpLimits limits;
      limits.wall_time_s = std::max(
          0.05, std::chrono::duration<double>(deadline - now).count());
      limits.cancel = cancel;
      const std::int64_t bound = bound_pair(inst, pairs[index].patient, pairs[index].day, limits);
      const std::int64_t trivial = table.get(pairs[index].patient, pairs[index].day);
      if (bound == CareBoundTable::kUncoverable || trivial == CareBoundTable::kUncoverable)
        table.bounds[pairs[index].patient][pairs[index].day] = CareBoundTable::kUncoverable;
      else
        table.bounds[pairs[index].patient][pairs[index].day] = std::max(bound, trivial);
      solved.fetch_add(1);
    }
  };

  workers = std::max(1, workers);
  std::vector<std::thread> pool;
  for (int i = 1; i < workers; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  if (stats) {
    stats->pairs_solved = solved.load();
    stats->pairs_fallback = fallback.load();
  }
  return table;
}

std::string instance_digest(const Instance& inst) {
  // FNV-1a over the canonical serialization.
  const std::string bytes = serialize_instance(inst);
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << hash;
  return out.str();
}

std::string serialize_care_bounds(const Instance& inst, const CareBoundTable& table) {
  json doc;
  doc["instance_digest"] = instance_digest(inst);
  json entries = json::array();
  for (std::size_t p = 0; p < table.bounds.size(); ++p)
    for (const auto& [day, bound] : table.bounds[p]) {
      if (bound == CareBoundTable::kUncoverable)
        entries.push_back({{"patient", inst.patients[p].id}, {"day", day}, {"uncoverable", true}});
      else
        entries.push_back({{"patient", inst.patients[p].id}, {"day", day}, {"bound", bound}});
    }
  doc["bounds"] = std::move(entries);
  return doc.dump(2) + "\n";
}

bool deserialize_care_bounds(const std::string& bytes, const Instance& inst,
                             CareBoundTable* table) {
  json doc = json::parse(bytes, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return false;
  if (doc.value("instance_digest", "") != instance_digest(inst)) return false;
  CareBoundTable result;
  result.bounds.resize(inst.patients.size());
  for (const json& entry : doc["bounds"]) {
    const int p = inst.patient_index(entry.at("patient").get<std::string>());
    if (p < 0) return false;
    if (entry.value("uncoverable", false))
      result.set(p, entry.at("day").get<int>(), CareBoundTable::kUncoverable);
    else
      result.set(p, entry.at("day").get<int>(), entry.at("bound").get<std::int64_t>());
  }
  *table = std::move(result);
  return true;
}

}  // namespace ihtp
