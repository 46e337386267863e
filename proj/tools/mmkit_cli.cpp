#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmkit/experiments.hpp"

namespace ex = mmkit::experiments;

int main(int argc, char** argv) {
  CLI::App app{"Majorization-minimization experiment runner"};
  app.require_subcommand(1);

  app.add_subcommand("list", "List registered experiments and problems");

  auto* run = app.add_subcommand("run", "Run one or more experiments");
  std::vector<std::string> names;
  ex::ExperimentConfig config;
  double obj_tol = 0.0;
  double alpha = 0.0;
  double viscosity = 0.0;
  std::string policy;
  std::string check_level = "cheap";
  std::string format = "json";
  std::string trace_out;
  std::string report_out;
  std::size_t jobs = 1;

  run->add_option("experiment", names, "Experiment name(s)")->required();
  run->add_option("--max-iters", config.max_iters, "Iteration cap")->capture_default_str();
  run->add_option("--step-tol", config.step_tol, "Stop when a sweep moves less than this")
      ->capture_default_str();
  auto* obj_opt = run->add_option("--obj-tol", obj_tol, "Relative objective-decrease stop test");
  auto* alpha_opt = run->add_option("--alpha", alpha, "Step size override");
  auto* visc_opt = run->add_option("--viscosity", viscosity, "Proximal penalty rho > 0");
  auto* policy_opt = run->add_option("--policy", policy, "Branch policy for the experiment");
  run->add_option("--check-level", check_level, "Engine checks")
      ->check(CLI::IsMember({"off", "cheap", "full"}))
      ->capture_default_str();
  auto* trace_opt = run->add_option("--trace-out", trace_out, "Trace file (directory with --jobs)");
  auto* report_opt =
      run->add_option("--report-out", report_out, "Report file (directory with --jobs)");
  run->add_option("--format", format, "Trace format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  run->add_option("--seed", config.seed, "Seed for problem generation and sampling")
      ->capture_default_str();
  auto* jobs_opt = run->add_option("--jobs", jobs, "Run experiments in parallel")
                       ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ex::ExitCode::Usage);
  }

  const auto& registry = ex::default_registry();
  if (app.got_subcommand("list")) return ex::cmd_list(registry, std::cout);

  if (*obj_opt) config.objective_tol = obj_tol;
  if (*alpha_opt) config.alpha = alpha;
  if (*visc_opt) config.viscosity = viscosity;
  if (*policy_opt) config.policy = policy;
  if (*trace_opt) config.trace_out = trace_out;
  if (*report_opt) config.report_out = report_out;
  static const std::map<std::string, mmkit::CheckLevel> levels = {
      {"off", mmkit::CheckLevel::Off},
      {"cheap", mmkit::CheckLevel::Cheap},
      {"full", mmkit::CheckLevel::Full}};
  config.check_level = levels.at(check_level);
  config.format = format == "csv" ? ex::TraceFormat::Csv : ex::TraceFormat::Json;

  if (names.size() > 1 || *jobs_opt) {
    return ex::cmd_run_batch(registry, names, config, jobs, std::cout, std::cerr);
  }
  config.name = names.front();
  return ex::cmd_run(registry, config, std::cout, std::cerr);
}
