#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmkit/engine.hpp"
#include "mmkit/trace.hpp"

namespace mmkit::diagnostics {

inline constexpr double kBoundTol = 1e-9;

/// Per-index comparison lhs <= rhs. passed <=> worst_margin >= -tolerance,
/// where margin = rhs - lhs.
struct BoundReport {
  std::string name;
  std::vector<double> lhs;
  std::vector<double> rhs;
  double worst_margin = 0.0;
  std::size_t worst_index = 0;
  double tolerance = kBoundTol;
  bool passed = true;
};

BoundReport make_bound_report(std::string name, std::vector<double> lhs,
                              std::vector<double> rhs, double tolerance = kBoundTol);

/// ||grad f(x_n)|| along the trace. Throws UnsupportedTrace without a gradient.
std::vector<double> gradient_norms(const IterateTrace& trace, const ObjectiveFunction& f);

/// min_{k<=n} ||grad f(x_k)||^2 <= 2L/(n+1) * (f(x_0) - f_floor) for every prefix n.
BoundReport check_sublinear_bound(const IterateTrace& trace,
                                  const std::vector<double>& grad_norms, double L,
                                  double f_floor, double tolerance = kBoundTol);

struct LinearRateReport {
  // f(x_n) - f* <= (1 - (mu/L)^2)^n (f(x_0) - f*)
  BoundReport statement_form;
  // f(x_n) - f* <= (1 - mu^2/(2L^2))^n (f(x_0) - f*)
  BoundReport proof_chain_form;
  // f(x_{n+1}) - f* <= (1 - mu^2/(2L^2)) (f(x_n) - f*)
  BoundReport per_step;
  // largest observed (f_{n+1} - f*)/(f_n - f*) over steps with f_n - f* > 1e-12
  double worst_observed_factor = 0.0;

  bool passed() const {
    return statement_form.passed && proof_chain_form.passed && per_step.passed;
  }
};

LinearRateReport check_linear_rate(const IterateTrace& trace, double mu, double L,
                                   double f_star, double tolerance = kBoundTol);

/// ||grad f(x)||^2 >= mu^2/(2L) * (f(x) - f*) at every point.
BoundReport check_pl_inequality(const std::vector<Vector>& points, const ObjectiveFunction& f,
                                double mu, double L, double f_star,
                                double tolerance = kBoundTol);

struct SummabilityReport {
  // (mu/2)||x_{n+1} - x_n||^2 <= f(x_n) - f(x_{n+1})
  BoundReport per_step;
  // sum_{k<=n} ||x_{k+1} - x_k||^2 <= 2 (f(x_0) - f_limit)/mu, the sum of the
  // per-step inequalities
  BoundReport cumulative;
  // the same with budget (f(x_0) - f_limit)/mu; not implied by per_step and
  // violated by quadratic-upper-bound MM, so reported but not part of passed()
  BoundReport cumulative_stated;
  std::vector<double> partial_sums;

  bool passed() const { return per_step.passed && cumulative.passed; }
};

SummabilityReport check_step_summability(const IterateTrace& trace, double mu, double f_limit,
                                         double tolerance = kBoundTol);

/// Smallest p <= max_period such that the last 3p iterates repeat with period
/// p to within point_tol, and the final iterate differs from its q-shifts for
/// 0 < q < p. Empty when no such p exists.
std::optional<std::size_t> detect_cycle(std::span<const Vector> iterates, double point_tol,
                                        std::size_t max_period);

std::optional<std::size_t> detect_cycle(const IterateTrace& trace, double point_tol,
                                        std::size_t max_period);

}  // namespace mmkit::diagnostics
