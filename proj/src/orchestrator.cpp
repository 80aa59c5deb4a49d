#include "ihtp/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include "ihtp/admission.hpp"
#include "ihtp/nursemip.hpp"
#include "ihtp/nursesa.hpp"
#include "ihtp/preprocess.hpp"
#include "ihtp/roomcp.hpp"
#include "ihtp/theater.hpp"

namespace ihtp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Clock::time_point deadline_after(Clock::time_point from, double seconds) {
  if (!std::isfinite(seconds)) return Clock::time_point::max();
  return from + std::chrono::duration_cast<Clock::duration>(
                    std::chrono::duration<double>(seconds));
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr auto kPollInterval = std::chrono::milliseconds(10);

}  // namespace

RunLog::RunLog(std::ostream* tee) : tee_(tee), start_(Clock::now()) {}

void RunLog::event(const std::string& name,
                   const std::vector<std::pair<std::string, std::string>>& fields) {
  std::ostringstream line;
  line << "t=" << std::fixed << seconds_since(start_) << " event=" << name;
  for (const auto& [key, value] : fields) line << " " << key << "=" << value;
  line << "\n";
  std::lock_guard<std::mutex> lock(mutex_);
  buffer_ += line.str();
  if (tee_) (*tee_) << line.str() << std::flush;
}

std::string RunLog::text() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return buffer_;
}

RunConfig RunConfig::from_key_values(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  auto fail = [](const std::string& where) {
    throw ParseError("config: cannot parse line \"" + where + "\"");
  };
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) fail(line);
      continue;
    }
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "total_time") config.total_time = std::stod(value);
      else if (key == "phase12_budget") config.phase12_budget = std::stod(value);
      else if (key == "phase3_budget") config.phase3_budget = std::stod(value);
      else if (key == "room_cp_time") config.room_cp_time = std::stod(value);
      else if (key == "theater_time_per_day") config.theater_time_per_day = std::stod(value);
      else if (key == "sa_time") config.sa_time = std::stod(value);
      else if (key == "sa_max_no_improve") config.sa_max_no_improve = std::stol(value);
      else if (key == "rho_failure_threshold") config.rho_failure_threshold = std::stoi(value);
      else if (key == "phase3_pool_size") config.phase3_pool_size = std::stoi(value);
      else if (key == "room_solutions_per_admission")
        config.room_solutions_per_admission = std::stoi(value);
      else if (key == "seed") config.seed = std::stoull(value);
      else if (key == "worker_count") config.worker_count = std::stoi(value);
      else if (key == "cooling") config.cooling = std::stod(value);
      else if (key == "time_scale") config.time_scale = std::stod(value);
      else if (key == "care_bound_fraction") config.care_bound_fraction = std::stod(value);
      else if (key == "admission_refill_limit") config.admission_refill_limit = std::stoi(value);
      else fail(line);
    } catch (const std::invalid_argument&) {
      fail(line);
    }
  }
  if (config.total_time <= 0 || config.phase12_budget <= 0 || config.phase3_budget <= 0)
    throw ParseError("config: budgets must be positive");
  return config;
}

std::string RunConfig::to_key_values() const {
  std::ostringstream out;
  out << "total_time=" << total_time << "\n";
  out << "phase12_budget=" << phase12_budget << "\n";
  out << "phase3_budget=" << phase3_budget << "\n";
  out << "room_cp_time=" << room_cp_time << "\n";
  out << "theater_time_per_day=" << theater_time_per_day << "\n";
  out << "sa_time=" << sa_time << "\n";
  out << "sa_max_no_improve=" << sa_max_no_improve << "\n";
  out << "rho_failure_threshold=" << rho_failure_threshold << "\n";
  out << "phase3_pool_size=" << phase3_pool_size << "\n";
  out << "room_solutions_per_admission=" << room_solutions_per_admission << "\n";
  out << "seed=" << seed << "\n";
  out << "worker_count=" << worker_count << "\n";
  out << "cooling=" << cooling << "\n";
  out << "time_scale=" << time_scale << "\n";
  out << "care_bound_fraction=" << care_bound_fraction << "\n";
  out << "admission_refill_limit=" << admission_refill_limit << "\n";
  return out.str();
}

namespace {

struct RoomCandidate {
  std::shared_ptr<const AdmissionSolution> admission;
  RoomSolution rooms;
  std::shared_ptr<const std::map<int, TheaterDaySolution>> theaters;
};

struct CompleteEntry {
  Schedule schedule;
  CostBreakdown breakdown;
  int rho = 0;
};

// Shared pipeline state; coarse single mutex plus 10 ms sleep-polling, the
// stage layout from the four-worker plan.
class Pipeline {
 public:
  Pipeline(const Instance& inst, const RunConfig& config, RunLog* log)
      : inst_(inst), config_(config), log_(log), seed_state_(config.seed) {}

  RunResult execute() {
    RunResult result;
    const Clock::time_point start = Clock::now();
    const double scale = config_.time_scale;
    const auto phase12_deadline = deadline_after(start, config_.phase12_budget * scale);

    AdmissionWindows trivial_windows;
    try {
      trivial_windows = compute_windows(inst_, nullptr);
    } catch (const InfeasibleInstanceError& err) {
      result.status = RunStatus::NoSolution;
      result.diagnostics = err.what();
      log("infeasible_instance", {{"reason", err.what()}});
      return result;
    }

    // ---- Phase 1: initial admission dual bound plus care-cost bounds. ----
    log("phase", {{"phase", "1"}, {"action", "start"}});
    const Clock::time_point phase1_start = Clock::now();
    CareBoundTable care_table;
    {
      milp::CancelToken cancel_phase1;
      std::optional<AdmissionRunResult> phase1_admission;
      std::vector<AdmissionSolution> phase1_solutions;
      std::thread admission_thread([&]() {
        milp::MilpLimits limits;
        limits.wall_time_s = std::chrono::duration<double>(phase12_deadline - Clock::now()).count();
        limits.cancel = &cancel_phase1;
        try {
          CareBoundTable trivial = trivial_table(inst_, trivial_windows);
          phase1_admission = run_admission(
              inst_, trivial_windows, trivial, /*rho=*/0, limits,
              [&](const AdmissionSolution& sol) { phase1_solutions.push_back(sol); });
        } catch (...) {
          // Degenerate models surface later through phase 2 diagnostics.
        }
      });

      const double care_budget =
          std::min(config_.phase12_budget * scale * config_.care_bound_fraction,
                   std::chrono::duration<double>(phase12_deadline - Clock::now()).count());
      care_table = bound_all(inst_, trivial_windows, care_budget,
                             std::max(1, config_.worker_count - 1), nullptr, &result.care_stats);
      cancel_phase1.request_cancel();
      admission_thread.join();
      log("care_bounds", {{"pairs", std::to_string(result.care_stats.pairs_total)},
                          {"solved", std::to_string(result.care_stats.pairs_solved)},
                          {"fallback", std::to_string(result.care_stats.pairs_fallback)}});

      if (phase1_admission && phase1_admission->dual_bound) {
        consider_bound(*phase1_admission->dual_bound, 0, "phase1");
      }
      if (!phase1_solutions.empty()) warm_start_ = phase1_solutions.back();
    }
    result.timings.phase1 = seconds_since(phase1_start);
    log("phase", {{"phase", "1"}, {"action", "end"}});

    // ---- Phase 2: admission -> rooms -> theaters -> nurse SA. ----
    log("phase", {{"phase", "2"}, {"action", "start"}});
    const Clock::time_point phase2_start = Clock::now();
    AdmissionWindows windows;
    try {
      windows = compute_windows(inst_, &care_table);
    } catch (const InfeasibleInstanceError& err) {
      result.status = RunStatus::NoSolution;
      result.diagnostics = err.what();
      log("infeasible_instance", {{"reason", err.what()}});
      return result;
    }

    phase2_deadline_ = phase12_deadline;
    std::thread admission_worker([&]() { admission_loop(windows, care_table); });
    std::thread stage_worker([&]() { room_theater_loop(); });
    std::thread sa_worker([&]() { sa_loop(); });

    // Phase 2 ends at the deadline or when the whole pipeline drained.
    while (Clock::now() < phase2_deadline_) {
      std::this_thread::sleep_for(kPollInterval);
      std::lock_guard<std::mutex> lock(mutex_);
      if (admission_done_ && admission_queue_.empty() && room_pool_.empty() && !stage_busy_ &&
          !sa_busy_)
        break;
    }
    phase2_stop_.store(true);
    admission_cancel_.request_cancel();
    admission_worker.join();
    stage_worker.join();
    sa_worker.join();
    result.timings.phase2 = seconds_since(phase2_start);
    log("phase", {{"phase", "2"}, {"action", "end"},
                  {"complete_solutions", std::to_string(complete_pool_.size())}});

    // ---- Phase 3: exact nurse polish of the best pool entries. ----
    log("phase", {{"phase", "3"}, {"action", "start"}});
    const Clock::time_point phase3_start = Clock::now();
    const auto phase3_deadline = deadline_after(phase3_start, config_.phase3_budget * scale);
    polish_pool(phase3_deadline);
    result.timings.phase3 = seconds_since(phase3_start);
    log("phase", {{"phase", "3"}, {"action", "end"}});

    result.timings.total = seconds_since(start);
    result.admission_solutions = admission_emitted_;
    result.complete_solutions = static_cast<int>(complete_pool_.size());
    result.lower_bound = bound_report_;
    if (complete_pool_.empty()) {
      result.status = RunStatus::NoSolution;
      std::ostringstream diag;
      diag << "no complete solution; admission solutions seen: " << admission_emitted_
           << ", room-feasible: " << room_feasible_count_ << ", final rho: " << current_rho_;
      result.diagnostics = diag.str();
      result.rho_final = current_rho_;
      log("done", {{"status", "no-solution"}, {"rho", std::to_string(current_rho_)}});
      return result;
    }
    const CompleteEntry& best = complete_pool_.front();
    result.status = RunStatus::Feasible;
    result.schedule = best.schedule;
    result.breakdown = best.breakdown;
    result.rho_final = best.rho;
    log("done", {{"status", "feasible"},
                 {"best", std::to_string(best.breakdown.total)},
                 {"rho", std::to_string(best.rho)},
                 {"bound", bound_report_.available ? std::to_string(bound_report_.value) : "-"}});
    return result;
  }

 private:
  void log(const std::string& name,
           const std::vector<std::pair<std::string, std::string>>& fields = {}) {
    if (log_) log_->event(name, fields);
  }

  void consider_bound(double dual, int rho, const std::string& source) {
    const std::int64_t value = static_cast<std::int64_t>(std::ceil(dual - 1e-6));
    const bool valid = rho == 0;
    log("lower_bound", {{"value", std::to_string(value)},
                        {"valid", valid ? "1" : "0"},
                        {"source", source}});
    if (!valid) return;  // heuristic-only, recorded in the log
    std::lock_guard<std::mutex> lock(mutex_);
    if (!bound_report_.available || value > bound_report_.value) {
      bound_report_.available = true;
      bound_report_.value = value;
      bound_report_.valid = true;
      bound_report_.source = source;
    }
  }

  // Handles a pending escalation request under the caller-held lock.
  // Returns false when escalation is impossible (cap reached).
  bool apply_escalation_locked() {
    if (current_rho_ + 1 > inst_.total_bed_capacity()) {
      if (log_) log_->event("rho_cap_reached", {{"rho", std::to_string(current_rho_)}});
      return false;
    }
    penalized_rho_.insert(current_rho_);
    ++current_rho_;
    escalate_requested_ = false;
    if (log_)
      log_->event("rho_escalate",
                  {{"from", std::to_string(current_rho_ - 1)},
                   {"to", std::to_string(current_rho_)},
                   {"after_failures", std::to_string(config_.rho_failure_threshold)},
                   {"reason", "failures"}});
    return true;
  }

  // Worker 1: streams admission solutions, handles rho escalation and
  // no-good refills once the MIP is exhausted.
  void admission_loop(const AdmissionWindows& windows, const CareBoundTable& care_table) {
    int refills = 0;
    bool first_run_at_zero = true;
    while (!phase2_stop_.load()) {
      int rho;
      std::set<std::vector<int>> exclude;
      {
        std::lock_guard<std::mutex> lock(mutex_);
        if (escalate_requested_) {
          if (!apply_escalation_locked()) {
            admission_done_ = true;
            return;
          }
          refills = 0;
        }
        rho = current_rho_;
        exclude = seen_vectors_;
      }
      admission_cancel_.reset();

      milp::MilpLimits limits;
      const double remaining =
          std::chrono::duration<double>(phase2_deadline_ - Clock::now()).count();
      if (remaining <= 0.0) break;
      limits.wall_time_s = remaining;
      limits.cancel = &admission_cancel_;

      const bool pristine = exclude.empty() && rho == 0 && first_run_at_zero;
      AdmissionRunResult run_result;
      try {
        run_result = run_admission(
            inst_, windows, care_table, rho, limits,
            [&](const AdmissionSolution& sol) {
              std::lock_guard<std::mutex> lock(mutex_);
              seen_vectors_.insert(sol.admission_key(inst_));
              admission_queue_.push_back(std::make_shared<AdmissionSolution>(sol));
              ++admission_emitted_;
              if (log_)
                log_->event("admission_incumbent",
                            {{"rho", std::to_string(rho)},
                             {"obj", std::to_string(sol.bound_contribution)}});
            },
            warm_start_ ? &*warm_start_ : nullptr, exclude.empty() ? nullptr : &exclude);
      } catch (const std::exception& err) {
        log("admission_error", {{"what", err.what()}});
        std::lock_guard<std::mutex> lock(mutex_);
        admission_done_ = true;
        return;
      }
      if (pristine) {
        first_run_at_zero = false;
        if (run_result.dual_bound) consider_bound(*run_result.dual_bound, rho, "phase2");
      }
      log("admission_done",
          {{"rho", std::to_string(rho)},
           {"status", std::to_string(static_cast<int>(run_result.status))},
           {"emitted", std::to_string(run_result.emitted)}});

      const bool exhausted = run_result.status == AdmissionRunStatus::Optimal ||
                             run_result.status == AdmissionRunStatus::Infeasible;
      const bool exhausted_empty =
          run_result.status == AdmissionRunStatus::Infeasible && run_result.emitted == 0 &&
          !exclude.empty();
      const bool infeasible_level = run_result.status == AdmissionRunStatus::Infeasible &&
                                    exclude.empty() && run_result.emitted == 0;

      // Decide what to do next: escalate, refill, or finish.
      bool want_refill = false;
      while (!phase2_stop_.load()) {
        bool escalate_pending;
        {
          std::lock_guard<std::mutex> lock(mutex_);
          escalate_pending = escalate_requested_;
        }
        if (escalate_pending) break;  // outer loop applies it
        if (exhausted_empty || infeasible_level) {
          // All distinct vectors are out (or the level itself is infeasible);
          // higher rho admits only subsets, so the stream is finished unless
          // an escalation arrives for still-queued work.
          std::lock_guard<std::mutex> lock(mutex_);
          if (admission_queue_.empty() && !stage_busy_) {
            admission_done_ = true;
            return;
          }
        } else if (exhausted) {
          bool queue_low;
          {
            std::lock_guard<std::mutex> lock(mutex_);
            queue_low = admission_queue_.size() < 2;
          }
          if (queue_low && refills < config_.admission_refill_limit &&
              Clock::now() < phase2_deadline_) {
            want_refill = true;
            break;  // outer loop re-runs with the enlarged exclusion set
          }
          if (refills >= config_.admission_refill_limit) {
            std::lock_guard<std::mutex> lock(mutex_);
            admission_done_ = true;
            return;
          }
        }
        std::this_thread::sleep_for(kPollInterval);
        if (Clock::now() >= phase2_deadline_) {
          std::lock_guard<std::mutex> lock(mutex_);
          admission_done_ = true;
          return;
        }
      }
      if (want_refill) ++refills;
    }
    std::lock_guard<std::mutex> lock(mutex_);
    admission_done_ = true;
  }

  // Workers 2-3: room search (two internal threads) then per-day theater MIPs.
  void room_theater_loop() {
    while (!phase2_stop_.load()) {
      std::shared_ptr<AdmissionSolution> adm;
      {
        std::lock_guard<std::mutex> lock(mutex_);
        // Penalized rho levels queue behind newer ones.
        auto pick = admission_queue_.end();
        for (auto it = admission_queue_.begin(); it != admission_queue_.end(); ++it) {
          const bool penalized = penalized_rho_.count((*it)->rho) > 0;
          if (!penalized) {
            pick = it;
            break;
          }
          if (pick == admission_queue_.end()) pick = it;
        }
        if (pick != admission_queue_.end()) {
          adm = *pick;
          admission_queue_.erase(pick);
          stage_busy_ = true;
        }
      }
      if (!adm) {
        if (admission_done_and_drained()) return;
        std::this_thread::sleep_for(kPollInterval);
        continue;
      }

      try {
        RoomSearchLimits limits;
        limits.wall_time_s = std::min(
            config_.room_cp_time * config_.time_scale,
            std::max(0.05, std::chrono::duration<double>(phase2_deadline_ - Clock::now()).count()));
        limits.workers = 2;
        limits.max_solutions = config_.room_solutions_per_admission;
        limits.seed = splitmix64(seed_state_);
        RoomSearchResult rooms = solve_rooms(inst_, *adm, limits);

        if (rooms.status == RoomSearchStatus::Feasible) {
          auto theaters = std::make_shared<std::map<int, TheaterDaySolution>>(
              solve_all_days(inst_, *adm, config_.theater_time_per_day * config_.time_scale, 2));
          std::lock_guard<std::mutex> lock(mutex_);
          ++room_feasible_count_;
          consecutive_failures_[adm->rho] = 0;
          for (const RoomSolution& sol : rooms.solutions)
            room_pool_.push_back({adm, sol, theaters});
          if (log_)
            log_->event("room_result", {{"rho", std::to_string(adm->rho)},
                                        {"status", "feasible"},
                                        {"solutions", std::to_string(rooms.solutions.size())}});
        } else {
          std::lock_guard<std::mutex> lock(mutex_);
          const int failures = ++consecutive_failures_[adm->rho];
          if (log_)
            log_->event("room_result",
                        {{"rho", std::to_string(adm->rho)},
                         {"status", rooms.status == RoomSearchStatus::Infeasible ? "infeasible"
                                                                                 : "timeout"},
                         {"consecutive_failures", std::to_string(failures)}});
          if (failures >= config_.rho_failure_threshold && adm->rho == current_rho_ &&
              !escalate_requested_) {
            escalate_requested_ = true;
            consecutive_failures_[adm->rho] = 0;
            admission_cancel_.request_cancel();
          }
        }
      } catch (const std::exception& err) {
        log("stage_error", {{"what", err.what()}});
      }
      {
        std::lock_guard<std::mutex> lock(mutex_);
        stage_busy_ = false;
      }
    }
  }

  bool admission_done_and_drained() {
    std::lock_guard<std::mutex> lock(mutex_);
    return admission_done_ && admission_queue_.empty();
  }

  // Worker 4: nurse SA turning room candidates into complete solutions.
  void sa_loop() {
    while (!phase2_stop_.load()) {
      std::optional<RoomCandidate> candidate;
      {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!room_pool_.empty()) {
          candidate = std::move(room_pool_.front());
          room_pool_.pop_front();
          sa_busy_ = true;
        }
      }
      if (!candidate) {
        {
          std::lock_guard<std::mutex> lock(mutex_);
          if (admission_done_ && admission_queue_.empty() && room_pool_.empty() && !stage_busy_)
            return;
        }
        std::this_thread::sleep_for(kPollInterval);
        continue;
      }

      try {
        RoomAssignment fixed;
        fixed.admission = candidate->admission->admitted;
        fixed.room = candidate->rooms.room;

        SaLimits limits;
        limits.wall_time_s = config_.sa_time * config_.time_scale;
        limits.max_no_improve = config_.sa_max_no_improve;
        limits.cooling = config_.cooling;
        SaResult sa = anneal(inst_, fixed, limits, splitmix64(seed_state_));

        Schedule schedule = assemble_schedule(*candidate, sa.roster);
        const std::vector<Violation> violations = check_hard(inst_, schedule);
        if (!violations.empty()) {
          log("pool_reject", {{"violations", std::to_string(violations.size())}});
        } else {
          const CostBreakdown breakdown = detail::evaluate_unchecked(inst_, schedule);
          std::lock_guard<std::mutex> lock(mutex_);
          insert_complete({std::move(schedule), breakdown, candidate->admission->rho});
        }
      } catch (const std::exception& err) {
        log("sa_error", {{"what", err.what()}});
      }
      {
        std::lock_guard<std::mutex> lock(mutex_);
        sa_busy_ = false;
      }
    }
  }

  Schedule assemble_schedule(const RoomCandidate& candidate, const Roster& roster) const {
    Schedule schedule = Schedule::empty_for(inst_);
    for (int p = 0; p < static_cast<int>(inst_.patients.size()); ++p) {
      schedule.admission[p] = candidate.admission->admitted[p];
      if (candidate.rooms.room[p] >= 0) schedule.room[p] = candidate.rooms.room[p];
    }
    for (const auto& [day, plan] : *candidate.theaters)
      for (const auto& [patient, theater] : plan.assignment) schedule.theater[patient] = theater;
    schedule.roster = roster.assignment;
    return schedule;
  }

  // Pool insert keeping ascending total cost; deduplicates identical totals
  // with identical schedules cheaply by total comparison only.
  void insert_complete(CompleteEntry entry) {
    const auto pos = std::lower_bound(
        complete_pool_.begin(), complete_pool_.end(), entry,
        [](const CompleteEntry& a, const CompleteEntry& b) {
          return a.breakdown.total < b.breakdown.total;
        });
    if (log_)
      log_->event("complete_solution", {{"cost", std::to_string(entry.breakdown.total)},
                                        {"rho", std::to_string(entry.rho)},
                                        {"pool", std::to_string(complete_pool_.size() + 1)}});
    complete_pool_.insert(pos, std::move(entry));
  }

  void polish_pool(Clock::time_point deadline) {
    std::vector<CompleteEntry> jobs;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      const int count =
          std::min<int>(config_.phase3_pool_size, static_cast<int>(complete_pool_.size()));
      jobs.assign(complete_pool_.begin(), complete_pool_.begin() + count);
    }
    if (jobs.empty()) return;

    std::vector<std::thread> workers;
    std::mutex jobs_mutex;
    std::size_t next = 0;
    auto work = [&]() {
      while (true) {
        std::size_t index;
        {
          std::lock_guard<std::mutex> lock(jobs_mutex);
          if (next >= jobs.size()) return;
          index = next++;
        }
        CompleteEntry& entry = jobs[index];
        try {
          RoomAssignment fixed;
          fixed.admission = entry.schedule.admission;
          fixed.room = entry.schedule.room;
          Roster roster;
          roster.assignment = entry.schedule.roster;

          milp::MilpLimits limits;
          limits.wall_time_s =
              std::max(0.05, std::chrono::duration<double>(deadline - Clock::now()).count());
          limits.hints = milp::solve_root_relaxation_barrier_hint({});
          PolishResult polished = polish(inst_, fixed, roster, limits);
          if (!polished.improved) {
            log("polish", {{"job", std::to_string(index)}, {"improved", "0"}});
            continue;
          }
          Schedule schedule = entry.schedule;
          schedule.roster = polished.roster.assignment;
          const std::vector<Violation> violations = check_hard(inst_, schedule);
          if (!violations.empty()) continue;
          const CostBreakdown breakdown = detail::evaluate_unchecked(inst_, schedule);
          log("polish", {{"job", std::to_string(index)},
                         {"improved", "1"},
                         {"before", std::to_string(entry.breakdown.total)},
                         {"after", std::to_string(breakdown.total)}});
          std::lock_guard<std::mutex> lock(mutex_);
          insert_complete({std::move(schedule), breakdown, entry.rho});
        } catch (const std::exception& err) {
          log("polish_error", {{"what", err.what()}});
        }
      }
    };
    const int worker_count = std::max(1, std::min<int>(config_.worker_count,
                                                       static_cast<int>(jobs.size())));
    for (int w = 1; w < worker_count; ++w) workers.emplace_back(work);
    work();
    for (std::thread& t : workers) t.join();
  }

  const Instance& inst_;
  const RunConfig& config_;
  RunLog* log_;
  std::uint64_t seed_state_;

  std::mutex mutex_;
  std::deque<std::shared_ptr<AdmissionSolution>> admission_queue_;
  std::deque<RoomCandidate> room_pool_;
  std::vector<CompleteEntry> complete_pool_;
  std::set<std::vector<int>> seen_vectors_;
  std::map<int, int> consecutive_failures_;
  std::set<int> penalized_rho_;
  int current_rho_ = 0;
  bool escalate_requested_ = false;
  bool admission_done_ = false;
  bool stage_busy_ = false;
  bool sa_busy_ = false;
  int admission_emitted_ = 0;
  int room_feasible_count_ = 0;
  std::optional<AdmissionSolution> warm_start_;
  milp::CancelToken admission_cancel_;
  std::atomic<bool> phase2_stop_{false};
  Clock::time_point phase2_deadline_;
  LowerBoundReport bound_report_;
};

}  // namespace

RunResult run(const Instance& inst, const RunConfig& config, RunLog* log) {
  Pipeline pipeline(inst, config, log);
  return pipeline.execute();
}

BoundReport compute_lower_bound(const Instance& inst, const RunConfig& config, RunLog* log,
                                const CareBoundTable* cached_bounds) {
  BoundReport report;
  AdmissionWindows trivial_windows = compute_windows(inst, nullptr);

  CareBoundTable table;
  if (cached_bounds) {
    table = *cached_bounds;
  } else {
    const double budget = config.phase12_budget * config.time_scale * config.care_bound_fraction;
    table = bound_all(inst, trivial_windows, budget, std::max(1, config.worker_count - 1),
                      nullptr, &report.care_stats);
  }
  if (log)
    log->event("care_bounds", {{"pairs", std::to_string(report.care_stats.pairs_total)},
                               {"solved", std::to_string(report.care_stats.pairs_solved)}});

  report.care_table = table;
  AdmissionWindows windows = compute_windows(inst, &table);
  milp::MilpLimits limits;
  limits.wall_time_s = config.phase12_budget * config.time_scale;
  AdmissionModel am = build_admission_model(inst, windows, table, /*rho=*/0);
  milp::MilpOutcome outcome = milp::solve(am.model, limits);
  if (outcome.dual_bound) {
    report.bound.available = true;
    report.bound.value = static_cast<std::int64_t>(std::ceil(*outcome.dual_bound - 1e-6));
    report.bound.valid = true;
    report.bound.source = "phase1";
    if (log)
      log->event("lower_bound", {{"value", std::to_string(report.bound.value)},
                                 {"valid", "1"},
                                 {"source", "phase1"}});
  }
  if (outcome.best()) {
    BoundTermDecomposition terms;
    const milp::MilpIncumbent& best = *outcome.best();
    for (int p : inst.flexible_patients) {
      for (int d = 1; d <= inst.horizon_days; ++d) {
        const int var = am.admit_var[p][d - 1];
        if (var >= 0 && best.values[var] > 0.5) {
          std::int64_t care = trivial_care_bound(inst, p, d);
          if (table.contains(p, d)) care = std::max(care, table.get(p, d));
          terms.delay_and_care +=
              care + inst.weights.delay * (d - inst.patients[p].release_day);
        }
      }
      if (am.postpone_var[p] >= 0 && best.values[am.postpone_var[p]] > 0.5)
        terms.unscheduled += inst.weights.unscheduled;
    }
    for (int key = 0; key < inst.horizon_days * kNumShifts; ++key)
      terms.excess_workload += static_cast<std::int64_t>(
          std::llround(best.values[am.excess_var[key]] * inst.weights.excess_workload));
    for (std::size_t o = 0; o < inst.theaters.size(); ++o)
      for (int d = 1; d <= inst.horizon_days; ++d)
        if (best.values[am.theater_var[o][d - 1]] > 0.5)
          terms.open_theaters += inst.weights.open_theater;
    report.decomposition = terms;
  }
  return report;
}

}  // namespace ihtp
