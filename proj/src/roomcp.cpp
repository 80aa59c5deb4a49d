#include "ihtp/roomcp.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <random>
#include <thread>

namespace ihtp {

namespace {

using Clock = std::chrono::steady_clock;

struct PresentPatient {
  int patient;
  int first_day, last_day;
  int gender;  // index into the instance's distinct gender list
  int age;
  std::vector<char> room_allowed;  // static compatibility (incompatible list, occupant fix)
};

struct SharedState {
  std::atomic<std::int64_t> best_cost{std::numeric_limits<std::int64_t>::max()};
  std::atomic<bool> stop{false};
  std::mutex mutex;
  std::vector<RoomSolution> solutions;  // improving order, ring-capped
  int max_solutions = 8;
  const std::function<void(const RoomSolution&)>* sink = nullptr;
};

// One backtracking worker with its own room-day state. The systematic worker
// (no restarts, deterministic order) is the one that can prove infeasibility
// or optimality; helpers restart with randomized tie-breaking.
class Searcher {
 public:
  Searcher(const Instance& inst, const std::vector<PresentPatient>& patients, int num_genders,
           SharedState* shared, Clock::time_point deadline, const milp::CancelToken* cancel,
           bool randomized, std::uint64_t seed, long restart_budget)
      : inst_(inst),
        patients_(patients),
        shared_(shared),
        deadline_(deadline),
        cancel_(cancel),
        randomized_(randomized),
        rng_(seed),
        restart_budget_(restart_budget) {
    const int cells = static_cast<int>(inst.rooms.size()) * inst.horizon_days;
    occupancy_.assign(cells, 0);
    gender_count_.assign(static_cast<std::size_t>(cells) * num_genders, 0);
    age_count_.assign(static_cast<std::size_t>(cells) * inst.age_group_names.size(), 0);
    spread_.assign(cells, 0);
    num_genders_ = num_genders;
    assigned_.assign(patients.size(), -1);
  }

  // Returns true when the search space was exhausted (complete proof).
  bool run() {
    while (true) {
      failed_nodes_ = 0;
      abort_restart_ = false;
      partial_cost_ = 0;
      std::fill(assigned_.begin(), assigned_.end(), -1);
      std::fill(occupancy_.begin(), occupancy_.end(), 0);
      std::fill(gender_count_.begin(), gender_count_.end(), 0);
      std::fill(age_count_.begin(), age_count_.end(), 0);
      std::fill(spread_.begin(), spread_.end(), 0);
      const bool exhausted = dfs(static_cast<int>(patients_.size()));
      if (exhausted && !abort_restart_) return !stopped();
      if (!randomized_ || stopped()) return false;
      // Randomized restart: reshuffle tie-breaking and go again.
      tie_break_ = static_cast<std::uint64_t>(rng_());
    }
  }

 private:
  bool stopped() {
    if (shared_->stop.load(std::memory_order_relaxed)) return true;
    if ((++tick_ & 1023) == 0) {
      if (Clock::now() >= deadline_ || (cancel_ && cancel_->cancelled())) {
        shared_->stop.store(true, std::memory_order_relaxed);
        return true;
      }
    }
    return false;
  }

  int cell(int room, int day) const { return room * inst_.horizon_days + (day - 1); }

  bool fits(const PresentPatient& pp, int room) const {
    if (!pp.room_allowed[room]) return false;
    for (int d = pp.first_day; d <= pp.last_day; ++d) {
      const int c = cell(room, d);
      if (occupancy_[c] >= inst_.rooms[room].capacity) return false;
      for (int g = 0; g < num_genders_; ++g)
        if (g != pp.gender && gender_count_[static_cast<std::size_t>(c) * num_genders_ + g] > 0)
          return false;
    }
    return true;
  }

  std::int64_t place(const PresentPatient& pp, int room, int direction) {
    std::int64_t cost_delta = 0;
    const int num_ages = static_cast<int>(inst_.age_group_names.size());
    for (int d = pp.first_day; d <= pp.last_day; ++d) {
      const int c = cell(room, d);
      occupancy_[c] += direction;
      gender_count_[static_cast<std::size_t>(c) * num_genders_ + pp.gender] += direction;
      age_count_[static_cast<std::size_t>(c) * num_ages + pp.age] += direction;
      int lo = -1, hi = -1;
      for (int a = 0; a < num_ages; ++a)
        if (age_count_[static_cast<std::size_t>(c) * num_ages + a] > 0) {
          if (lo < 0) lo = a;
          hi = a;
        }
      const int spread = (lo < 0) ? 0 : hi - lo;
      cost_delta += static_cast<std::int64_t>(spread - spread_[c]) * direction;
      spread_[c] = spread;
    }
    partial_cost_ += inst_.weights.age_mix * cost_delta * direction;
    return cost_delta;
  }

  // True iff the subtree was fully explored (no stop, no restart abort).
  bool dfs(int remaining) {
    if (stopped()) return false;
    if (abort_restart_) return false;

    if (remaining == 0) {
      std::int64_t best = shared_->best_cost.load(std::memory_order_relaxed);
      bool improved = false;
      while (partial_cost_ < best) {
        if (shared_->best_cost.compare_exchange_weak(best, partial_cost_)) {
          improved = true;
          break;
        }
      }
      if (improved) emit_solution();
      return true;
    }

    // Fail-first: the unplaced patient with the fewest compatible rooms.
    int chosen = -1, chosen_count = std::numeric_limits<int>::max();
    std::vector<int> domain, chosen_domain;
    for (std::size_t i = 0; i < patients_.size(); ++i) {
      if (assigned_[i] >= 0) continue;
      domain.clear();
      for (int r = 0; r < static_cast<int>(inst_.rooms.size()); ++r)
        if (fits(patients_[i], r)) domain.push_back(r);
      if (static_cast<int>(domain.size()) < chosen_count) {
        chosen_count = static_cast<int>(domain.size());
        chosen = static_cast<int>(i);
        chosen_domain = domain;
        if (chosen_count == 0) break;
      }
    }
    if (chosen_count == 0) {
      ++failed_nodes_;
      if (randomized_ && failed_nodes_ > restart_budget_) abort_restart_ = true;
      return true;  // dead end fully explored
    }

    order_values(patients_[chosen], &chosen_domain);

    bool exhausted = true;
    for (int room : chosen_domain) {
      place(patients_[chosen], room, +1);
      assigned_[chosen] = room;
      const std::int64_t best = shared_->best_cost.load(std::memory_order_relaxed);
      if (partial_cost_ < best) {
        if (!dfs(remaining - 1)) exhausted = false;
      }
      assigned_[chosen] = -1;
      place(patients_[chosen], room, -1);
      if (stopped() || abort_restart_) return false;
    }
    return exhausted;
  }

  void order_values(const PresentPatient& pp, std::vector<int>* domain) {
    struct Key {
      int room;
      std::int64_t cost;
      int occupied_rank;  // 0: hosts same gender already, 1: empty
      std::uint64_t tie;
    };
    std::vector<Key> keys;
    keys.reserve(domain->size());
    const int num_ages = static_cast<int>(inst_.age_group_names.size());
    for (int room : *domain) {
      bool hosts_same = false;
      std::int64_t cost = 0;
      for (int d = pp.first_day; d <= pp.last_day; ++d) {
        const int c = cell(room, d);
        if (occupancy_[c] > 0) hosts_same = true;
        int lo = pp.age, hi = pp.age;
        for (int a = 0; a < num_ages; ++a)
          if (age_count_[static_cast<std::size_t>(c) * num_ages + a] > 0) {
            lo = std::min(lo, a);
            hi = std::max(hi, a);
          }
        cost += (hi - lo) - spread_[c];
      }
      std::uint64_t tie = static_cast<std::uint64_t>(room);
      if (randomized_) tie = (tie * 0x9e3779b97f4a7c15ULL) ^ tie_break_;
      keys.push_back({room, cost, hosts_same ? 0 : 1, tie});
    }
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
      if (a.occupied_rank != b.occupied_rank) return a.occupied_rank < b.occupied_rank;
      if (a.cost != b.cost) return a.cost < b.cost;
      return a.tie < b.tie;
    });
    for (std::size_t i = 0; i < keys.size(); ++i) (*domain)[i] = keys[i].room;
  }

  void emit_solution() {
    RoomSolution solution;
    solution.room.assign(inst_.patients.size(), -1);
    for (std::size_t i = 0; i < patients_.size(); ++i)
      solution.room[patients_[i].patient] = assigned_[i];
    solution.age_mix_cost = partial_cost_;
    std::lock_guard<std::mutex> lock(shared_->mutex);
    if (!shared_->solutions.empty() &&
        shared_->solutions.back().age_mix_cost <= solution.age_mix_cost)
      return;  // a concurrent worker already published something at least as good
    shared_->solutions.push_back(solution);
    if (static_cast<int>(shared_->solutions.size()) > shared_->max_solutions)
      shared_->solutions.erase(shared_->solutions.begin());
    if (shared_->sink && *shared_->sink) (*shared_->sink)(solution);
  }

  const Instance& inst_;
  const std::vector<PresentPatient>& patients_;
  SharedState* shared_;
  Clock::time_point deadline_;
  const milp::CancelToken* cancel_;
  bool randomized_;
  std::mt19937_64 rng_;
  long restart_budget_;
  std::uint64_t tie_break_ = 0;

  int num_genders_ = 0;
  std::vector<int> occupancy_;
  std::vector<int> gender_count_;
  std::vector<int> age_count_;
  std::vector<int> spread_;
  std::vector<int> assigned_;
  std::int64_t partial_cost_ = 0;
  long failed_nodes_ = 0;
  bool abort_restart_ = false;
  unsigned tick_ = 0;
};

}  // namespace

RoomSearchResult solve_rooms(const Instance& inst, const AdmissionSolution& admission,
                             const RoomSearchLimits& limits,
                             const std::function<void(const RoomSolution&)>& sink) {
  RoomSearchResult result;

  std::vector<std::string> genders;
  for (const Patient& pat : inst.patients)
    if (std::find(genders.begin(), genders.end(), pat.gender) == genders.end())
      genders.push_back(pat.gender);
  if (genders.empty()) genders.push_back("");

  std::vector<PresentPatient> present;
  for (int p = 0; p < static_cast<int>(inst.patients.size()); ++p) {
    if (!admission.admitted[p]) continue;
    const Patient& pat = inst.patients[p];
    PresentPatient pp;
    pp.patient = p;
    auto [first, last] = inst.stay_days(p, *admission.admitted[p]);
    pp.first_day = first;
    pp.last_day = last;
    pp.gender = static_cast<int>(
        std::find(genders.begin(), genders.end(), pat.gender) - genders.begin());
    pp.age = pat.age_group;
    pp.room_allowed.assign(inst.rooms.size(), 1);
    for (int r : pat.incompatible_rooms) pp.room_allowed[r] = 0;
    if (!pat.flexible()) {
      pp.room_allowed.assign(inst.rooms.size(), 0);
      pp.room_allowed[pat.fixed_room] = 1;
    }
    present.push_back(std::move(pp));
  }
  // Occupants first so their fixed placements prune the tree at the top.
  std::stable_sort(present.begin(), present.end(),
                   [&inst](const PresentPatient& a, const PresentPatient& b) {
                     return !inst.patients[a.patient].flexible() &&
                            inst.patients[b.patient].flexible();
                   });

  if (present.empty()) {
    RoomSolution empty;
    empty.room.assign(inst.patients.size(), -1);
    result.status = RoomSearchStatus::Feasible;
    result.proved_optimal = true;
    result.solutions.push_back(empty);
    if (sink) sink(empty);
    return result;
  }

  SharedState shared;
  shared.max_solutions = limits.max_solutions;
  shared.sink = &sink;
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(limits.wall_time_s));

  const int workers = std::max(1, limits.workers);
  std::vector<std::thread> helpers;
  for (int w = 1; w < workers; ++w)
    helpers.emplace_back([&, w]() {
      Searcher helper(inst, present, static_cast<int>(genders.size()), &shared, deadline,
                      limits.cancel, /*randomized=*/true, limits.seed + 0x9e37 * w,
                      limits.restart_node_budget);
      helper.run();
    });

  Searcher systematic(inst, present, static_cast<int>(genders.size()), &shared, deadline,
                      limits.cancel, /*randomized=*/false, limits.seed,
                      limits.restart_node_budget);
  const bool complete = systematic.run();
  shared.stop.store(true, std::memory_order_relaxed);
  for (std::thread& t : helpers) t.join();

  result.solutions = shared.solutions;
  if (!result.solutions.empty()) {
    result.status = RoomSearchStatus::Feasible;
    result.proved_optimal = complete;
  } else {
    result.status = complete ? RoomSearchStatus::Infeasible : RoomSearchStatus::Timeout;
  }
  return result;
}

}  // namespace ihtp
