#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmkit/engine.hpp"
#include "mmkit/trace.hpp"

namespace mmkit::experiments {

enum class ExitCode : int {
  Success = 0,
  Usage = 1,
  BoundFailed = 2,
  SolverError = 3,
  UnknownExperiment = 4,
  UnwritablePath = 5,
};

enum class TraceFormat { Json, Csv };

struct ExperimentConfig {
  std::string name;
  std::size_t max_iters = 1000;
  double step_tol = 1e-10;
  std::optional<double> objective_tol;
  std::optional<double> alpha;
  std::optional<double> viscosity;
  std::optional<std::string> policy;
  CheckLevel check_level = CheckLevel::Cheap;
  std::optional<std::string> trace_out;
  std::optional<std::string> report_out;
  TraceFormat format = TraceFormat::Json;
  std::uint64_t seed = 12345;

  StopRule stop_rule() const;
};

struct ExperimentResult {
  IterateTrace trace;
  nlohmann::json report;
  bool passed = true;
};

struct Experiment {
  std::string name;
  std::string description;
  std::function<ExperimentResult(const ExperimentConfig&)> run;
};

using Registry = std::vector<Experiment>;

/// vaida-cycle, tenberge-cycle, tenberge-viscosity, quad-small, lasso-desk,
/// simplex-linear.
const Registry& default_registry();

const Experiment* find_experiment(const Registry& registry, const std::string& name);

/// One record per iteration n = 1..N: {n, f, step_norm, surrogate_gap, extras}.
/// JSON lines or CSV with header "n,f,step_norm,surrogate_gap,extras"; numbers
/// use 17 significant digits, non-finite values become null (JSON) or
/// inf/-inf/nan (CSV).
void write_trace(const IterateTrace& trace, std::ostream& out, TraceFormat format);

/// "%.17g"
std::string format_number(double value);

int cmd_list(const Registry& registry, std::ostream& out);

/// Runs one experiment, writes its trace/report and returns the exit code.
/// Without report_out the report goes to `out`.
int cmd_run(const Registry& registry, const ExperimentConfig& config, std::ostream& out,
            std::ostream& err);

/// Runs several experiments on up to `jobs` threads. trace_out/report_out are
/// treated as directories; files are named <experiment>.trace.<ext> and
/// <experiment>.report.json. Returns the largest exit code.
int cmd_run_batch(const Registry& registry, const std::vector<std::string>& names,
                  const ExperimentConfig& base, std::size_t jobs, std::ostream& out,
                  std::ostream& err);

}  // namespace mmkit::experiments
