// Command-line entry points: solve, validate, bound, gen.
//
// Exit codes: 0 ok, 2 input error, 3 no solution found, 4 invalid solution.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ihtp/carebounds.hpp"
#include "ihtp/ihtc_format.hpp"
#include "ihtp/instance_gen.hpp"
#include "ihtp/model.hpp"
#include "ihtp/orchestrator.hpp"
#include "json.hpp"

namespace {

using namespace ihtp;
using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read \"" + path + "\"");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write \"" + path + "\"");
  out << bytes;
}

struct CommonFlags {
  double time = 600.0;
  double time_scale = 1.0;
  std::uint64_t seed = 0;
  int threads = 4;
  std::string config_path;
  std::string log_path;
  int verbosity = 0;
};

RunConfig make_config(const CommonFlags& flags) {
  RunConfig config;
  if (!flags.config_path.empty())
    config = RunConfig::from_key_values(read_file(flags.config_path));
  config.total_time = flags.time;
  config.phase12_budget = std::min(config.phase12_budget, flags.time / 2.0);
  config.phase3_budget = std::min(config.phase3_budget, flags.time / 2.0);
  config.time_scale = flags.time_scale;
  config.seed = flags.seed;
  config.worker_count = flags.threads;
  return config;
}

json breakdown_json(const CostBreakdown& b) {
  return json{{"continuity_of_care", b.coc},
              {"unscheduled", b.unscheduled},
              {"excess_workload", b.excess_workload},
              {"open_theaters", b.open_theaters},
              {"delay", b.delay},
              {"age_mix", b.age_mix},
              {"skill_mismatch", b.skill_mismatch},
              {"surgeon_transfer", b.surgeon_transfer},
              {"total", b.total}};
}

int cmd_solve(const std::string& instance_path, const std::string& out_path,
              const CommonFlags& flags) {
  Instance inst = parse_instance_auto(read_file(instance_path));
  RunConfig config = make_config(flags);

  std::ofstream log_file;
  std::unique_ptr<RunLog> log;
  if (!flags.log_path.empty()) {
    log_file.open(flags.log_path);
    log = std::make_unique<RunLog>(&log_file);
  } else {
    log = std::make_unique<RunLog>(flags.verbosity > 0 ? &std::cerr : nullptr);
  }

  RunResult result = run(inst, config, log.get());

  json report;
  report["instance"] = instance_path;
  report["seed"] = config.seed;
  report["status"] = result.status == RunStatus::Feasible ? "feasible" : "no-solution";
  report["rho"] = result.rho_final;
  report["timings"] = {{"phase1", result.timings.phase1},
                       {"phase2", result.timings.phase2},
                       {"phase3", result.timings.phase3},
                       {"total", result.timings.total}};
  if (result.lower_bound.available) {
    report["lower_bound"] = {{"value", result.lower_bound.value},
                             {"valid", result.lower_bound.valid},
                             {"source", result.lower_bound.source}};
  }
  if (result.status != RunStatus::Feasible) {
    report["diagnostics"] = result.diagnostics;
    write_file(out_path + ".report.json", report.dump(2) + "\n");
    std::cerr << "no solution: " << result.diagnostics << "\n";
    return 3;
  }

  report["objective"] = result.breakdown.total;
  report["breakdown"] = breakdown_json(result.breakdown);
  if (result.lower_bound.available && result.breakdown.total > 0) {
    const double gap = 100.0 *
                       static_cast<double>(result.breakdown.total - result.lower_bound.value) /
                       static_cast<double>(result.breakdown.total);
    report["gap_percent"] = gap;
  }
  write_file(out_path, write_solution(inst, *result.schedule));
  write_file(out_path + ".report.json", report.dump(2) + "\n");

  std::cout << "Obj " << result.breakdown.total;
  if (result.lower_bound.available)
    std::cout << "  Bound " << result.lower_bound.value
              << (result.lower_bound.valid ? "" : " (heuristic)");
  std::cout << "  rho " << result.rho_final << "\n";
  return 0;
}

int cmd_validate(const std::string& instance_path, const std::string& solution_path) {
  Instance inst = parse_instance_auto(read_file(instance_path));
  Schedule schedule = read_solution(read_file(solution_path), inst);
  const std::vector<Violation> violations = check_hard(inst, schedule);
  if (!violations.empty()) {
    for (const Violation& v : violations) {
      std::cout << hard_rule_name(v.rule) << " " << v.entity;
      if (v.day > 0) std::cout << " day " << v.day;
      std::cout << ": " << v.detail << "\n";
    }
    std::cout << violations.size() << " hard violation(s)\n";
    return 4;
  }
  const CostBreakdown b = evaluate(inst, schedule);
  std::cout << "continuity_of_care " << b.coc << "\n"
            << "unscheduled " << b.unscheduled << "\n"
            << "excess_workload " << b.excess_workload << "\n"
            << "open_theaters " << b.open_theaters << "\n"
            << "delay " << b.delay << "\n"
            << "age_mix " << b.age_mix << "\n"
            << "skill_mismatch " << b.skill_mismatch << "\n"
            << "surgeon_transfer " << b.surgeon_transfer << "\n"
            << "total " << b.total << "\n";
  return 0;
}

int cmd_bound(const std::string& instance_path, const CommonFlags& flags,
              const std::string& care_cache_path) {
  Instance inst = parse_instance_auto(read_file(instance_path));
  RunConfig config = make_config(flags);
  RunLog log(flags.verbosity > 0 ? &std::cerr : nullptr);

  std::optional<CareBoundTable> cached;
  if (!care_cache_path.empty() && std::filesystem::exists(care_cache_path)) {
    CareBoundTable table;
    if (deserialize_care_bounds(read_file(care_cache_path), inst, &table))
      cached = std::move(table);
  }

  BoundReport report = compute_lower_bound(inst, config, &log, cached ? &*cached : nullptr);
  if (!care_cache_path.empty() && !cached)
    write_file(care_cache_path, serialize_care_bounds(inst, report.care_table));
  if (!report.bound.available) {
    std::cout << "no bound established within limits\n";
    return 0;
  }
  std::cout << "lower_bound " << report.bound.value << (report.bound.valid ? "" : " (heuristic)")
            << "\n";
  if (report.decomposition) {
    std::cout << "  delay_and_care " << report.decomposition->delay_and_care << "\n"
              << "  unscheduled " << report.decomposition->unscheduled << "\n"
              << "  excess_workload " << report.decomposition->excess_workload << "\n"
              << "  open_theaters " << report.decomposition->open_theaters << "\n";
  }
  std::cout << "care_pairs " << report.care_stats.pairs_total << " solved "
            << report.care_stats.pairs_solved << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integrated hospital timetabling solver"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string instance_path, out_path = "solution.json", solution_path, care_cache;

  CLI::App* solve = app.add_subcommand("solve", "solve an instance and write the solution");
  solve->add_option("instance", instance_path, "instance file (canonical or official schema)")
      ->required();
  solve->add_option("-o,--out", out_path, "solution output path");
  solve->add_option("--time", flags.time, "total time budget in seconds");
  solve->add_option("--time-scale", flags.time_scale, "multiplies every working limit");
  solve->add_option("--seed", flags.seed, "random seed");
  solve->add_option("--threads", flags.threads, "worker count");
  solve->add_option("--config", flags.config_path, "key=value config file");
  solve->add_option("--log", flags.log_path, "run-log output path");
  solve->add_flag("-v,--verbose", flags.verbosity, "log to stderr");

  CLI::App* validate = app.add_subcommand("validate", "check a solution and print its cost");
  validate->add_option("instance", instance_path, "instance file")->required();
  validate->add_option("solution", solution_path, "solution file")->required();

  CLI::App* bound = app.add_subcommand("bound", "compute the phase-1 lower bound");
  bound->add_option("instance", instance_path, "instance file")->required();
  bound->add_option("--time", flags.time, "time budget in seconds");
  bound->add_option("--time-scale", flags.time_scale, "multiplies every working limit");
  bound->add_option("--threads", flags.threads, "worker count");
  bound->add_option("--config", flags.config_path, "key=value config file");
  bound->add_option("--care-cache", care_cache, "care-bound cache file");
  bound->add_flag("-v,--verbose", flags.verbosity, "log to stderr");

  GenParams gen_params;
  std::string gen_out;
  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic instance");
  gen->add_option("-o,--out", gen_out, "output path (stdout when omitted)");
  gen->add_option("--days", gen_params.days, "horizon length");
  gen->add_option("--patients", gen_params.patients, "flexible patient count");
  gen->add_option("--occupants", gen_params.occupants, "occupant count");
  gen->add_option("--rooms", gen_params.rooms, "room count");
  gen->add_option("--nurses", gen_params.nurses, "nurse count");
  gen->add_option("--theaters", gen_params.theaters, "operating theater count");
  gen->add_option("--surgeons", gen_params.surgeons, "surgeon count");
  gen->add_option("--skill-levels", gen_params.skill_levels, "number of skill levels");
  gen->add_option("--age-groups", gen_params.age_groups, "number of age groups");
  gen->add_option("--tightness", gen_params.tightness, "capacity scarcity in [0,1]");
  gen->add_option("--optional-fraction", gen_params.optional_fraction,
                  "share of optional patients");
  gen->add_option("--seed", gen_params.seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(instance_path, out_path, flags);
    if (validate->parsed()) return cmd_validate(instance_path, solution_path);
    if (bound->parsed()) return cmd_bound(instance_path, flags, care_cache);
    if (gen->parsed()) {
      const std::string bytes = generate_instance_json(gen_params);
      if (gen_out.empty())
        std::cout << bytes;
      else
        write_file(gen_out, bytes);
      return 0;
    }
  } catch (const ParseError& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return 2;
  } catch (const SemanticError& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return 2;
  } catch (const InfeasibleInstanceError& err) {
    std::cerr << "infeasible instance: " << err.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 1;
}
