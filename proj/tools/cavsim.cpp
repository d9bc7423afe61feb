#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "cav/planner.hpp"
#include "cav/report_io.hpp"
#include "cav/scenario_io.hpp"
#include "cav/simulation.hpp"

namespace {

enum Exit : int {
  kOk = 0,
  kViolations = 1,
  kUsage = 2,
  kPlanningFailure = 3,
  kIoFailure = 4,
};

std::filesystem::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("CAVSIM_OUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "out";
}

void report_parse_error(const cav::ParseError& e) {
  std::cerr << "cavsim: parse error: " << e.what() << "\n";
}

int cmd_run(const std::string& file, const std::string& policy, const std::string& out) {
  auto scenario = cav::load_scenario(file);
  if (!policy.empty()) scenario.policy = cav::parse_policy(policy);
  const auto result = cav::run(scenario);
  const auto dir = output_dir(out);
  cav::write_run_outputs(dir, result);
  const auto& m = result.metrics;
  fmt::print("policy {}: {} vehicles, throughput {:.3f} veh/min, total travel time {:.3f} s, "
             "total energy {:.4f}\n",
             cav::to_string(m.policy), m.vehicles.size(), m.throughput_vpm, m.total_travel_time,
             m.total_energy);
  fmt::print("wrote {} log rows to {}\n", result.log.size(), dir.string());
  if (!result.violations.empty()) {
    for (const auto& v : result.violations) {
      fmt::print(stderr, "violation {} at t={:.3f} vehicle {} amount {:.3e}\n",
                 cav::to_string(v.kind), v.t, v.vehicle, v.amount);
    }
    return kViolations;
  }
  return kOk;
}

int cmd_plan(const std::string& file, long long id) {
  const auto scenario = cav::load_scenario(file);
  auto [protocol, request] = cav::protocol_before(scenario, id);
  const auto result =
      cav::plan_with_policy(request, protocol, scenario.planner_config(), scenario.policy);
  auto entry = cav::to_entry(request, result);
  entry.merging_occupancy = protocol.merging_occupancy(entry);
  std::cout << cav::plan_debug_json(result, entry);
  return kOk;
}

int cmd_compare(const std::string& file) {
  const auto scenario = cav::load_scenario(file);
  const auto c = cav::compare_policies(scenario);
  std::cout << cav::comparison_table(c);
  if (!c.both_ok()) return kPlanningFailure;
  if (!c.optimal->violations.empty() || !c.fifo->violations.empty()) return kViolations;
  return kOk;
}

int cmd_generate(const cav::GeneratorOptions& options, const std::string& out) {
  const auto text = cav::serialize_scenario(cav::generate_scenario(options));
  if (out.empty()) {
    std::cout << text;
  } else {
    cav::write_atomic(out, text);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signal-free intersection crossing simulator"};
  app.require_subcommand(1);

  std::string file;
  std::string policy;
  std::string out;
  long long vehicle = 0;
  cav::GeneratorOptions gen;

  auto* run = app.add_subcommand("run", "Plan and simulate a scenario, write logs and metrics");
  run->add_option("scenario", file, "Scenario JSON file")->required();
  run->add_option("--policy", policy, "Override the scenario policy")
      ->check(CLI::IsMember({"optimal", "fifo"}));
  run->add_option("--out", out, "Output directory (default $CAVSIM_OUT_DIR or ./out)");

  auto* plan = app.add_subcommand("plan", "Print the planning record of one vehicle");
  plan->add_option("scenario", file, "Scenario JSON file")->required();
  plan->add_option("--vehicle", vehicle, "Vehicle id")->required();

  auto* compare = app.add_subcommand("compare", "Run both policies and tabulate travel times");
  compare->add_option("scenario", file, "Scenario JSON file")->required();

  auto* generate = app.add_subcommand("generate", "Write a random scenario");
  generate->add_option("--seed", gen.seed, "Random seed");
  generate->add_option("--vehicles", gen.vehicles, "Number of vehicles")
      ->check(CLI::NonNegativeNumber);
  generate->add_option("--lanes", gen.lanes_per_approach, "Lanes per approach")
      ->check(CLI::PositiveNumber);
  generate->add_option("--out", out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(file, policy, out);
    if (*plan) return cmd_plan(file, vehicle);
    if (*compare) return cmd_compare(file);
    if (*generate) return cmd_generate(gen, out);
  } catch (const cav::ParseError& e) {
    report_parse_error(e);
    return kUsage;
  } catch (const cav::PlanningFailure& e) {
    std::cerr << "cavsim: planning failure for vehicle " << e.vehicle_id() << " ("
              << cav::to_string(e.binding()) << "): " << e.what() << "\n";
    return kPlanningFailure;
  } catch (const cav::IoError& e) {
    std::cerr << "cavsim: I/O error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const std::out_of_range& e) {
    std::cerr << "cavsim: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "cavsim: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
