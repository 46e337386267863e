#include "mmkit/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "mmkit/bregman.hpp"
#include "mmkit/counterexamples.hpp"
#include "mmkit/diagnostics.hpp"
#include "mmkit/errors.hpp"
#include "mmkit/problems.hpp"

namespace mmkit::experiments {

namespace {

using nlohmann::json;
namespace ce = mmkit::counterexamples;
namespace dg = mmkit::diagnostics;
namespace pb = mmkit::problems;

constexpr std::size_t kSummaIterations = 50;
constexpr std::size_t kSummaSamples = 50;

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json bound_json(const dg::BoundReport& r) {
  return {{"name", r.name},         {"passed", r.passed},
          {"worst_margin", r.worst_margin}, {"worst_index", r.worst_index},
          {"tolerance", r.tolerance},   {"count", r.lhs.size()},
          {"lhs", r.lhs},           {"rhs", r.rhs}};
}

struct ReportBuilder {
  json bounds = json::array();
  json expectations = json::array();
  json diagnostics = json::object();
  bool passed = true;

  void bound(const dg::BoundReport& r) {
    bounds.push_back(bound_json(r));
    passed = passed && r.passed;
  }
  void bound(const std::string& name, bool ok, json detail) {
    detail["name"] = name;
    detail["passed"] = ok;
    bounds.push_back(std::move(detail));
    passed = passed && ok;
  }
  void expect(const std::string& name, bool ok, json detail = json::object()) {
    detail["name"] = name;
    detail["passed"] = ok;
    expectations.push_back(std::move(detail));
    passed = passed && ok;
  }
};

json config_json(const ExperimentConfig& c) {
  json out = {{"name", c.name},
              {"max_iters", c.max_iters},
              {"step_tol", c.step_tol},
              {"check_level", to_string(c.check_level)},
              {"format", c.format == TraceFormat::Json ? "json" : "csv"},
              {"seed", c.seed}};
  out["objective_tol"] = c.objective_tol ? json(*c.objective_tol) : json(nullptr);
  out["alpha"] = c.alpha ? json(*c.alpha) : json(nullptr);
  out["viscosity"] = c.viscosity ? json(*c.viscosity) : json(nullptr);
  out["policy"] = c.policy ? json(*c.policy) : json(nullptr);
  return out;
}

IterateTrace run_engine(const ObjectiveFunction& f, const SurrogateFactory& factory,
                        const Vector& x0, const ExperimentConfig& config, bool detect_cycles) {
  RunOptions options;
  options.check_level = config.check_level;
  options.seed = config.seed;
  options.record_errors = true;
  if (detect_cycles) options.cycle_detection = CycleDetection{};
  return run_mm(f, factory, x0, config.stop_rule(), options);
}

ExperimentResult finish(const ExperimentConfig& config, IterateTrace trace, ReportBuilder rb) {
  ExperimentResult result;
  json report;
  report["experiment"] = config.name;
  report["config"] = config_json(config);
  report["termination"] = to_string(trace.termination);
  report["iterations"] = trace.iterations();
  report["sweep_length"] = trace.sweep_length;
  report["detected_period"] =
      trace.detected_period ? json(*trace.detected_period) : json(nullptr);
  report["initial_objective"] = trace.objective_values.front();
  report["final_objective"] = trace.objective_values.back();
  report["final_iterate"] = vector_json(trace.final_iterate());
  report["final_step_norm"] =
      trace.step_norms.empty() ? json(nullptr) : json(trace.step_norms.back());
  report["error"] = trace.termination == Termination::Error ? json(trace.error_message)
                                                            : json(nullptr);
  report["bounds"] = std::move(rb.bounds);
  report["expectations"] = std::move(rb.expectations);
  report["diagnostics"] = std::move(rb.diagnostics);
  report["passed"] = rb.passed;
  result.passed = rb.passed;
  result.report = std::move(report);
  result.trace = std::move(trace);
  return result;
}

FactoryPtr maybe_viscous(FactoryPtr factory, const std::optional<double>& viscosity) {
  return viscosity ? wrap_viscosity(std::move(factory), *viscosity) : factory;
}

double max_objective_spread(const IterateTrace& t) {
  const auto [lo, hi] = std::minmax_element(t.objective_values.begin(), t.objective_values.end());
  return *hi - *lo;
}

bool objective_nonincreasing(const IterateTrace& t) {
  for (std::size_t n = 0; n + 1 < t.objective_values.size(); ++n) {
    const double fn = t.objective_values[n];
    if (t.objective_values[n + 1] > fn + kDescentSlack * std::max(1.0, std::abs(fn))) {
      return false;
    }
  }
  return true;
}

// SUMMA margins over the first iterations of a trace.
void add_summa(ReportBuilder& rb, const ObjectiveFunction& f, const SurrogateFactory& factory,
               const IterateTrace& trace, const pb::Sampler& sampler, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t steps = std::min(kSummaIterations, trace.iterations());
  double worst = std::numeric_limits<double>::infinity();
  std::size_t worst_iteration = 0;
  std::size_t checked = 0;
  for (std::size_t n = 0; n < steps; ++n) {
    const Vector& x = trace.iterates[n];
    auto samples = sampler(x, rng, kSummaSamples);
    const auto r = bregman::check_summa(f, factory, x, trace.iterates[n + 1], samples, n);
    checked += r.margins.size();
    if (r.worst_margin < worst) {
      worst = r.worst_margin;
      worst_iteration = n;
    }
  }
  rb.bound("summa", steps == 0 || worst >= -1e-9,
           {{"iterations", steps},
            {"checked", checked},
            {"worst_margin", steps == 0 ? json(nullptr) : json(worst)},
            {"worst_iteration", worst_iteration},
            {"tolerance", 1e-9}});
}

void add_summability(ReportBuilder& rb, const IterateTrace& trace, double mu, double f_limit) {
  const auto s = dg::check_step_summability(trace, mu, f_limit);
  rb.bound(s.per_step);
  rb.bound(s.cumulative);
  rb.diagnostics["step_square_summability_stated"] = {
      {"passed", s.cumulative_stated.passed},
      {"worst_margin", s.cumulative_stated.worst_margin},
      {"note", "budget (f0 - f_limit)/mu; not implied by the per-step inequality"}};
}

// --------------------------------------------------------------------------

ExperimentResult run_vaida(const ExperimentConfig& config) {
  const std::string policy = config.policy.value_or("alternating");
  ce::SignRule rule;
  if (policy == "alternating") {
    rule = ce::SignRule::Alternating;
  } else if (policy == "positive") {
    rule = ce::SignRule::PositiveBranch;
  } else {
    fail(ErrorKind::InvalidParameter,
         "vaida-cycle: policy must be 'alternating' or 'positive', got '" + policy + "'");
  }
  const ObjectiveFunction f = ce::vaida_function();
  const auto factory = maybe_viscous(ce::vaida_factory(rule), config.viscosity);
  const ce::VaidaState x0{3.0, 1.0 / std::sqrt(3.0)};
  IterateTrace trace = run_engine(f, *factory, x0.to_vector(), config, true);

  ReportBuilder rb;
  if (trace.termination != Termination::Error) {
    if (rule == ce::SignRule::Alternating) {
      rb.expect("cycle period 2", trace.detected_period == std::size_t{2},
                {{"detected_period", trace.detected_period ? json(*trace.detected_period)
                                                           : json(nullptr)}});
      double deviation = 0.0;
      const double root = 1.0 / std::sqrt(3.0);
      for (std::size_t n = 0; n < trace.iterates.size(); ++n) {
        const Vector& x = trace.iterates[n];
        const double expected_rho = n % 2 == 0 ? root : -root;
        deviation = std::max({deviation, std::abs(x(0) - 3.0), std::abs(x(1) - expected_rho)});
      }
      rb.expect("orbit alternates between (3, +-1/sqrt(3))", deviation <= 1e-12,
                {{"max_deviation", deviation}, {"tolerance", 1e-12}});
      const double spread = max_objective_spread(trace);
      rb.expect("objective constant along orbit", spread <= 1e-12,
                {{"spread", spread}, {"tolerance", 1e-12}});
    } else {
      rb.expect("fixed point reached", trace.termination == Termination::Converged,
                {{"termination", to_string(trace.termination)}});
    }
  }
  return finish(config, std::move(trace), std::move(rb));
}

ExperimentResult run_tenberge(const ExperimentConfig& config, std::optional<double> viscosity) {
  const std::string policy = config.policy.value_or("cycling");
  ce::BlockPolicy block_policy;
  if (policy == "cycling") {
    block_policy = ce::tenberge_cycling_policy();
  } else if (policy == "canonical") {
    block_policy = ce::canonical_policy();
  } else {
    fail(ErrorKind::InvalidParameter,
         "tenberge: policy must be 'cycling' or 'canonical', got '" + policy + "'");
  }
  const auto inst = ce::build_tenberge_instance();
  const ObjectiveFunction f = ce::maxdiff_minimization_objective(inst.problem);
  const auto factory =
      maybe_viscous(ce::tenberge_factory(inst.problem, block_policy), viscosity);
  IterateTrace trace = run_engine(f, *factory, ce::vectorize(inst.initial), config, true);
  const IterateTrace sweeps = trace.sweeps();

  ReportBuilder rb;
  bool stiefel = true;
  for (const Vector& x : trace.iterates) {
    stiefel = stiefel && ce::unvectorize(x, inst.problem).is_feasible(1e-10);
  }
  rb.expect("every iterate is a Stiefel block set", stiefel);
  rb.diagnostics["cycle_maxdiff"] = ce::maxdiff_objective(inst.problem, inst.initial);
  rb.diagnostics["final_maxdiff"] = -trace.objective_values.back();

  if (trace.termination == Termination::Error) {
    return finish(config, std::move(trace), std::move(rb));
  }

  if (!viscosity) {
    if (policy == "cycling") {
      rb.expect("cycle period 4", trace.detected_period == std::size_t{4},
                {{"detected_period", trace.detected_period ? json(*trace.detected_period)
                                                           : json(nullptr)}});
      const auto states = ce::tenberge_cycle_states();
      double deviation = 0.0;
      for (std::size_t k = 0; k < sweeps.iterates.size(); ++k) {
        deviation = std::max(
            deviation,
            (sweeps.iterates[k] - ce::vectorize(states[k % 4])).cwiseAbs().maxCoeff());
      }
      rb.expect("end-of-sweep states follow (J,K,J) -> (-K,J,-K) -> (-J,-K,-J) -> (K,-J,K)",
                deviation <= 1e-10, {{"max_deviation", deviation}, {"tolerance", 1e-10}});
      const double spread = max_objective_spread(trace);
      rb.expect("objective constant along cycle", spread <= 1e-10,
                {{"spread", spread}, {"tolerance", 1e-10}});
    }
    // The block surrogate has no strong convexity modulus; mu = 1 is nominal
    // and a cycle makes the partial sums grow linearly.
    const auto s = dg::check_step_summability(sweeps, 1.0, *std::min_element(
        sweeps.objective_values.begin(), sweeps.objective_values.end()));
    rb.diagnostics["step_summability"] = {
        {"nominal_mu", 1.0},
        {"summable", s.passed()},
        {"per_step", bound_json(s.per_step)},
        {"cumulative", bound_json(s.cumulative)},
        {"cumulative_stated", bound_json(s.cumulative_stated)},
        {"partial_sums", s.partial_sums}};
  } else {
    rb.expect("no cycle detected", trace.termination != Termination::CycleDetected,
              {{"termination", to_string(trace.termination)}});
    const double final_step = sweeps.step_norms.empty() ? 0.0 : sweeps.step_norms.back();
    rb.expect("final sweep step norm below 1e-6", final_step < 1e-6,
              {{"final_step_norm", final_step}});
    rb.expect("objective monotone", objective_nonincreasing(trace));
    add_summability(rb, trace, *viscosity, trace.objective_values.back());
  }
  return finish(config, std::move(trace), std::move(rb));
}

ExperimentResult run_quad(const ExperimentConfig& config) {
  const pb::QuadraticProblem q = pb::random_quadratic(10, 1.0, 4.0, config.seed);
  const ObjectiveFunction f = q.objective();
  const double rho = config.viscosity.value_or(0.0);
  const double L_eff = q.L + rho;
  const auto factory = maybe_viscous(pb::quadratic_upper_bound_factory(f), config.viscosity);
  const Vector x0 = Vector::Constant(10, 5.0);
  IterateTrace trace = run_engine(f, *factory, x0, config, false);

  ReportBuilder rb;
  if (trace.termination != Termination::Error) {
    const double f_star = *q.min_value;
    rb.bound(dg::check_sublinear_bound(trace, dg::gradient_norms(trace, f), L_eff, f_star));
    const auto rate = dg::check_linear_rate(trace, q.mu, L_eff, f_star);
    rb.bound(rate.statement_form);
    rb.bound(rate.proof_chain_form);
    rb.bound(rate.per_step);
    rb.diagnostics["worst_observed_factor"] = rate.worst_observed_factor;
    rb.diagnostics["mu"] = q.mu;
    rb.diagnostics["L"] = q.L;
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 3.0);
    std::vector<Vector> points;
    for (int k = 0; k < 100; ++k) {
      Vector p(10);
      for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = normal(rng);
      points.push_back(p);
    }
    rb.bound(dg::check_pl_inequality(points, f, q.mu, q.L, f_star));
    add_summability(rb, trace, L_eff, f_star);
    rb.diagnostics["distance_to_minimizer"] = (trace.final_iterate() - *q.minimizer).norm();
  }
  return finish(config, std::move(trace), std::move(rb));
}

ExperimentResult run_lasso(const ExperimentConfig& config) {
  const pb::LassoProblem p = pb::lasso_desk(config.seed);
  const double alpha = config.alpha.value_or(p.alpha);
  const auto composite = p.composite();
  const ObjectiveFunction f = composite.objective();
  const auto factory = maybe_viscous(pb::proxgrad_factory(composite, alpha), config.viscosity);
  IterateTrace trace = run_engine(f, *factory, Vector::Zero(p.design.cols()), config, false);

  ReportBuilder rb;
  if (trace.termination != Termination::Error) {
    const Vector reference = pb::lasso_reference_solve(p);
    const double f_ref = p.eval(reference);
    rb.diagnostics["reference_objective"] = f_ref;
    rb.diagnostics["lambda"] = p.lambda;
    rb.diagnostics["L"] = p.L;
    rb.diagnostics["alpha"] = alpha;
    add_summability(rb, trace, 1.0 / alpha + config.viscosity.value_or(0.0),
                    std::min(f_ref, trace.objective_values.back()));
    add_summa(rb, f, *factory, trace, [](const Vector& x, std::mt19937_64& rng, std::size_t n) {
      const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
      std::normal_distribution<double> normal(0.0, scale);
      std::vector<Vector> out;
      for (std::size_t k = 0; k < n; ++k) {
        Vector s = x;
        for (Eigen::Index i = 0; i < s.size(); ++i) s(i) += normal(rng);
        out.push_back(s);
      }
      return out;
    }, config.seed);
    if (trace.termination == Termination::Converged) {
      const double gap = std::abs(trace.objective_values.back() - f_ref);
      rb.expect("objective matches reference solve", gap <= 1e-8,
                {{"gap", gap}, {"tolerance", 1e-8}});
      const double residual = pb::lasso_optimality_residual(p, trace.final_iterate());
      rb.expect("optimality residual", residual <= 1e-8,
                {{"residual", residual}, {"tolerance", 1e-8}});
    }
  }
  return finish(config, std::move(trace), std::move(rb));
}

ExperimentResult run_simplex(const ExperimentConfig& config) {
  const pb::SimplexLinearProblem p = pb::simplex_linear();
  const double alpha = config.alpha.value_or(p.alpha);
  const ObjectiveFunction f = p.objective();
  const auto factory =
      maybe_viscous(pb::exponentiated_gradient_factory(f, alpha), config.viscosity);
  IterateTrace trace = run_engine(f, *factory, p.start(), config, false);

  ReportBuilder rb;
  if (trace.termination != Termination::Error) {
    double sum_dev = 0.0;
    bool positive = true;
    for (const Vector& x : trace.iterates) {
      sum_dev = std::max(sum_dev, std::abs(x.sum() - 1.0));
      positive = positive && (x.array() > 0.0).all();
    }
    rb.expect("iterates stay on the open simplex", sum_dev <= 1e-12 && positive,
              {{"max_sum_deviation", sum_dev}, {"strictly_positive", positive}});

    const auto psi = bregman::negative_entropy_geometry();
    const auto kl = bregman::kl_simplex_projector();
    double mismatch = 0.0;
    for (std::size_t n = 0; n < trace.iterations(); ++n) {
      const Vector md = bregman::mirror_descent_step(f, psi, kl, trace.iterates[n], alpha);
      mismatch = std::max(mismatch, (md - trace.iterates[n + 1]).cwiseAbs().maxCoeff());
    }
    if (!config.viscosity) {
      rb.expect("steps match entropy mirror descent", mismatch <= 1e-10,
                {{"max_mismatch", mismatch}, {"tolerance", 1e-10}});
    }
    const Vector vertex = f.known_minimum->point;
    const double distance = (trace.final_iterate() - vertex).lpNorm<1>();
    rb.expect("final iterate near the minimal-cost vertex", distance < 1e-4,
              {{"l1_distance", distance}, {"tolerance", 1e-4}});
    add_summa(rb, f, *factory, trace,
              [](const Vector& x, std::mt19937_64& rng, std::size_t n) {
                return pb::dirichlet_samples(static_cast<std::size_t>(x.size()), n, rng);
              },
              config.seed);
    add_summability(rb, trace, 1.0 / alpha + config.viscosity.value_or(0.0),
                    f.known_minimum->value);
  }
  return finish(config, std::move(trace), std::move(rb));
}

std::string trace_extension(TraceFormat format) {
  return format == TraceFormat::Json ? "jsonl" : "csv";
}

bool can_open_for_writing(const std::string& path) {
  std::ofstream probe(path, std::ios::out | std::ios::trunc);
  return static_cast<bool>(probe);
}

}  // namespace

StopRule ExperimentConfig::stop_rule() const {
  StopRule rule;
  rule.max_iters = max_iters;
  rule.step_tol = step_tol;
  rule.objective_tol = objective_tol;
  return rule;
}

const Registry& default_registry() {
  static const Registry registry = {
      {"vaida-cycle", "bivariate-normal EM map oscillating between two minima (policy: "
                      "alternating|positive)",
       run_vaida},
      {"tenberge-cycle", "MAXDIFF block relaxation cycling through four states (policy: "
                         "cycling|canonical)",
       [](const ExperimentConfig& c) { return run_tenberge(c, c.viscosity); }},
      {"tenberge-viscosity", "the same block relaxation with a proximal penalty (default 0.1)",
       [](const ExperimentConfig& c) { return run_tenberge(c, c.viscosity.value_or(0.1)); }},
      {"quad-small", "d = 10 quadratic, eigenvalues in [1, 4], quadratic upper bound MM",
       run_quad},
      {"lasso-desk", "n = 40, d = 20 lasso, proximal gradient with alpha = 0.9/L", run_lasso},
      {"simplex-linear", "linear costs on the 5-simplex, exponentiated gradient", run_simplex},
  };
  return registry;
}

const Experiment* find_experiment(const Registry& registry, const std::string& name) {
  for (const Experiment& e : registry) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::string json_number(double value) {
  return std::isfinite(value) ? format_number(value) : "null";
}

}  // namespace

void write_trace(const IterateTrace& trace, std::ostream& out, TraceFormat format) {
  if (format == TraceFormat::Csv) out << "n,f,step_norm,surrogate_gap,extras\n";
  for (std::size_t k = 0; k < trace.iterations(); ++k) {
    const std::size_t n = k + 1;
    const Extras& extras = trace.extras[k];
    if (format == TraceFormat::Json) {
      out << "{\"n\":" << n << ",\"f\":" << json_number(trace.objective_values[n])
          << ",\"step_norm\":" << json_number(trace.step_norms[k])
          << ",\"surrogate_gap\":" << json_number(trace.surrogate_gaps[k]) << ",\"extras\":{";
      bool first = true;
      for (const auto& [name, v] : extras) {
        out << (first ? "" : ",") << json(name).dump() << ":[";
        for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? "," : "") << json_number(v(i));
        out << "]";
        first = false;
      }
      out << "}}\n";
    } else {
      out << n << ',' << format_number(trace.objective_values[n]) << ','
          << format_number(trace.step_norms[k]) << ','
          << format_number(trace.surrogate_gaps[k]) << ',';
      // name:v1 v2;name2:...  (no commas, so no quoting)
      bool first = true;
      for (const auto& [name, v] : extras) {
        out << (first ? "" : ";") << name << ':';
        for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << format_number(v(i));
        first = false;
      }
      out << '\n';
    }
  }
}

int cmd_list(const Registry& registry, std::ostream& out) {
  std::size_t width = 4;
  for (const Experiment& e : registry) width = std::max(width, e.name.size());
  out << "experiments:\n";
  for (const Experiment& e : registry) {
    out << "  " << e.name << std::string(width - e.name.size() + 2, ' ') << e.description
        << '\n';
  }
  out << "problems:\n";
  for (const auto& p : pb::problem_registry()) {
    out << "  " << p.name << std::string(width > p.name.size() ? width - p.name.size() + 2 : 2, ' ')
        << p.description << '\n';
  }
  return static_cast<int>(ExitCode::Success);
}

int cmd_run(const Registry& registry, const ExperimentConfig& config, std::ostream& out,
            std::ostream& err) {
  const Experiment* experiment = find_experiment(registry, config.name);
  if (experiment == nullptr) {
    err << "unknown experiment '" << config.name << "' (see `list`)\n";
    return static_cast<int>(ExitCode::UnknownExperiment);
  }
  for (const auto& path : {config.trace_out, config.report_out}) {
    if (path && !can_open_for_writing(*path)) {
      err << "cannot write to '" << *path << "'\n";
      return static_cast<int>(ExitCode::UnwritablePath);
    }
  }

  ExperimentResult result;
  try {
    result = experiment->run(config);
  } catch (const Error& e) {
    err << config.name << ": " << to_string(e.kind()) << ": " << e.what() << '\n';
    return static_cast<int>(ExitCode::SolverError);
  }

  if (config.trace_out) {
    std::ofstream file(*config.trace_out, std::ios::out | std::ios::trunc);
    write_trace(result.trace, file, config.format);
    if (!file) {
      err << "failed writing '" << *config.trace_out << "'\n";
      return static_cast<int>(ExitCode::UnwritablePath);
    }
  }
  const std::string report = result.report.dump(2) + "\n";
  if (config.report_out) {
    std::ofstream file(*config.report_out, std::ios::out | std::ios::trunc);
    file << report;
    if (!file) {
      err << "failed writing '" << *config.report_out << "'\n";
      return static_cast<int>(ExitCode::UnwritablePath);
    }
    out << config.name << ": " << to_string(result.trace.termination) << " after "
        << result.trace.iterations() << " iterations, "
        << (result.passed ? "all checks passed" : "CHECKS FAILED") << '\n';
  } else {
    out << report;
  }

  if (result.trace.termination == Termination::Error) {
    err << config.name << ": solver error: " << result.trace.error_message << '\n';
    return static_cast<int>(ExitCode::SolverError);
  }
  if (!result.passed) {
    err << config.name << ": a bound or invariant failed\n";
    return static_cast<int>(ExitCode::BoundFailed);
  }
  return static_cast<int>(ExitCode::Success);
}

int cmd_run_batch(const Registry& registry, const std::vector<std::string>& names,
                  const ExperimentConfig& base, std::size_t jobs, std::ostream& out,
                  std::ostream& err) {
  namespace fs = std::filesystem;
  for (const auto& dir : {base.trace_out, base.report_out}) {
    if (dir && !fs::is_directory(*dir)) {
      err << "'" << *dir << "' is not a directory\n";
      return static_cast<int>(ExitCode::UnwritablePath);
    }
  }
  std::vector<std::ostringstream> outs(names.size());
  std::vector<std::ostringstream> errs(names.size());
  std::vector<int> codes(names.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < names.size(); i = next++) {
      ExperimentConfig config = base;
      config.name = names[i];
      if (base.trace_out) {
        config.trace_out =
            (fs::path(*base.trace_out) / (names[i] + ".trace." + trace_extension(base.format)))
                .string();
      }
      if (base.report_out) {
        config.report_out = (fs::path(*base.report_out) / (names[i] + ".report.json")).string();
      }
      codes[i] = cmd_run(registry, config, outs[i], errs[i]);
    }
  };
  std::vector<std::thread> threads;
  const std::size_t count = std::max<std::size_t>(1, std::min(jobs, names.size()));
  for (std::size_t t = 0; t < count; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  int code = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << outs[i].str();
    err << errs[i].str();
    code = std::max(code, codes[i]);
  }
  return code;
}

}  // namespace mmkit::experiments
