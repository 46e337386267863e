#include "mmkit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmkit/errors.hpp"

namespace mmkit::diagnostics {

namespace {

void require_constants(double mu, double L) {
  require(std::isfinite(mu) && mu > 0.0, ErrorKind::InvalidParameter,
          "diagnostics: mu must be positive");
  require(std::isfinite(L) && L >= mu, ErrorKind::InvalidParameter,
          "diagnostics: L must satisfy L >= mu");
}

void require_nonempty(const IterateTrace& trace) {
  require(!trace.iterates.empty() && trace.objective_values.size() == trace.iterates.size(),
          ErrorKind::UnsupportedTrace, "diagnostics: trace has no objective values");
}

}  // namespace

BoundReport make_bound_report(std::string name, std::vector<double> lhs,
                              std::vector<double> rhs, double tolerance) {
  require(lhs.size() == rhs.size(), ErrorKind::Shape, "bound report: lhs/rhs size mismatch");
  BoundReport report;
  report.name = std::move(name);
  report.tolerance = tolerance;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    double margin = rhs[i] - lhs[i];
    if (std::isnan(margin)) margin = -std::numeric_limits<double>::infinity();
    if (margin < report.worst_margin) {
      report.worst_margin = margin;
      report.worst_index = i;
    }
  }
  report.lhs = std::move(lhs);
  report.rhs = std::move(rhs);
  report.passed = report.worst_margin >= -tolerance;
  return report;
}

std::vector<double> gradient_norms(const IterateTrace& trace, const ObjectiveFunction& f) {
  require(f.has_gradient(), ErrorKind::UnsupportedTrace,
          "gradient_norms: objective has no gradient");
  std::vector<double> out;
  out.reserve(trace.iterates.size());
  for (const Vector& x : trace.iterates) out.push_back(f.gradient(x).norm());
  return out;
}

BoundReport check_sublinear_bound(const IterateTrace& trace,
                                  const std::vector<double>& grad_norms, double L,
                                  double f_floor, double tolerance) {
  require_nonempty(trace);
  require(!grad_norms.empty(), ErrorKind::UnsupportedTrace,
          "check_sublinear_bound: gradient norms are missing");
  require(grad_norms.size() >= trace.iterates.size(), ErrorKind::UnsupportedTrace,
          "check_sublinear_bound: fewer gradient norms than iterates");
  require(std::isfinite(L) && L > 0.0, ErrorKind::InvalidParameter,
          "check_sublinear_bound: L must be positive");

  const double budget = trace.objective_values.front() - f_floor;
  std::vector<double> lhs;
  std::vector<double> rhs;
  double running_min = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < trace.iterates.size(); ++n) {
    running_min = std::min(running_min, grad_norms[n] * grad_norms[n]);
    lhs.push_back(running_min);
    rhs.push_back(2.0 * L / static_cast<double>(n + 1) * budget);
  }
  return make_bound_report("sublinear_bound", std::move(lhs), std::move(rhs), tolerance);
}

LinearRateReport check_linear_rate(const IterateTrace& trace, double mu, double L,
                                   double f_star, double tolerance) {
  require_nonempty(trace);
  require_constants(mu, L);
  const double f_min =
      *std::min_element(trace.objective_values.begin(), trace.objective_values.end());
  require(f_star <= f_min + 1e-12 * std::max(1.0, std::abs(f_min)),
          ErrorKind::InconsistentInput, "check_linear_rate: f_star exceeds a trace value");

  const double statement_factor = 1.0 - (mu / L) * (mu / L);
  const double proof_factor = 1.0 - mu * mu / (2.0 * L * L);
  const double gap0 = trace.objective_values.front() - f_star;

  std::vector<double> gaps;
  for (double v : trace.objective_values) gaps.push_back(v - f_star);

  std::vector<double> statement_rhs;
  std::vector<double> proof_rhs;
  for (std::size_t n = 0; n < gaps.size(); ++n) {
    const double power = static_cast<double>(n);
    statement_rhs.push_back(std::pow(statement_factor, power) * gap0);
    proof_rhs.push_back(std::pow(proof_factor, power) * gap0);
  }

  std::vector<double> step_lhs;
  std::vector<double> step_rhs;
  double worst = 0.0;
  for (std::size_t n = 0; n + 1 < gaps.size(); ++n) {
    step_lhs.push_back(gaps[n + 1]);
    step_rhs.push_back(proof_factor * gaps[n]);
    if (gaps[n] > 1e-12) worst = std::max(worst, gaps[n + 1] / gaps[n]);
  }

  LinearRateReport report;
  report.statement_form =
      make_bound_report("linear_rate_statement", gaps, std::move(statement_rhs), tolerance);
  report.proof_chain_form =
      make_bound_report("linear_rate_proof_chain", gaps, std::move(proof_rhs), tolerance);
  report.per_step = make_bound_report("linear_rate_per_step", std::move(step_lhs),
                                      std::move(step_rhs), tolerance);
  report.worst_observed_factor = worst;
  return report;
}

BoundReport check_pl_inequality(const std::vector<Vector>& points, const ObjectiveFunction& f,
                                double mu, double L, double f_star, double tolerance) {
  require_constants(mu, L);
  require(f.has_gradient(), ErrorKind::UnsupportedTrace,
          "check_pl_inequality: objective has no gradient");
  const double coefficient = mu * mu / (2.0 * L);
  std::vector<double> lhs;
  std::vector<double> rhs;
  for (const Vector& x : points) {
    // ||grad||^2 >= c (f - f*) written as c (f - f*) <= ||grad||^2
    lhs.push_back(coefficient * (f(x) - f_star));
    rhs.push_back(f.gradient(x).squaredNorm());
  }
  return make_bound_report("pl_inequality", std::move(lhs), std::move(rhs), tolerance);
}

SummabilityReport check_step_summability(const IterateTrace& trace, double mu, double f_limit,
                                         double tolerance) {
  require_nonempty(trace);
  require(std::isfinite(mu) && mu > 0.0, ErrorKind::InvalidParameter,
          "check_step_summability: mu must be positive");
  require(trace.step_norms.size() + 1 == trace.iterates.size(), ErrorKind::UnsupportedTrace,
          "check_step_summability: step norms do not match iterates");

  SummabilityReport report;
  std::vector<double> step_lhs;
  std::vector<double> step_rhs;
  std::vector<double> cumulative_rhs;
  std::vector<double> stated_rhs;
  // summing the per-step inequality gives 2/mu
  const double budget = 2.0 * (trace.objective_values.front() - f_limit) / mu;
  double sum = 0.0;
  for (std::size_t n = 0; n < trace.step_norms.size(); ++n) {
    const double sq = trace.step_norms[n] * trace.step_norms[n];
    step_lhs.push_back(0.5 * mu * sq);
    step_rhs.push_back(trace.objective_values[n] - trace.objective_values[n + 1]);
    sum += sq;
    report.partial_sums.push_back(sum);
    cumulative_rhs.push_back(budget);
    stated_rhs.push_back(0.5 * budget);
  }
  report.per_step = make_bound_report("step_sufficient_decrease", std::move(step_lhs),
                                      std::move(step_rhs), tolerance);
  report.cumulative = make_bound_report("step_square_summability", report.partial_sums,
                                        std::move(cumulative_rhs), tolerance);
  report.cumulative_stated = make_bound_report("step_square_summability_stated",
                                               report.partial_sums, std::move(stated_rhs),
                                               tolerance);
  return report;
}

std::optional<std::size_t> detect_cycle(std::span<const Vector> iterates, double point_tol,
                                        std::size_t max_period) {
  require(max_period >= 1, ErrorKind::InvalidParameter, "detect_cycle: max_period must be >= 1");
  require(point_tol >= 0.0, ErrorKind::InvalidParameter, "detect_cycle: point_tol must be >= 0");
  const std::size_t total = iterates.size();

  auto close = [&](std::size_t a, std::size_t b) {
    return (iterates[a] - iterates[b]).norm() <= point_tol;
  };

  for (std::size_t p = 1; p <= max_period && 3 * p <= total; ++p) {
    const std::size_t start = total - 3 * p;
    bool periodic = true;
    for (std::size_t k = start; k + p < total && periodic; ++k) periodic = close(k, k + p);
    if (!periodic) continue;

    // minimality within the window: no shorter shift q reproduces it
    bool minimal = true;
    for (std::size_t q = 1; q < p && minimal; ++q) {
      bool shift_repeats = true;
      for (std::size_t k = start; k + q < total && shift_repeats; ++k) {
        shift_repeats = close(k, k + q);
      }
      if (shift_repeats) minimal = false;
    }
    if (minimal) return p;
  }
  return std::nullopt;
}

std::optional<std::size_t> detect_cycle(const IterateTrace& trace, double point_tol,
                                        std::size_t max_period) {
  return detect_cycle(std::span<const Vector>(trace.iterates), point_tol, max_period);
}

}  // namespace mmkit::diagnostics
