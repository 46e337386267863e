#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmkit/types.hpp"

namespace mmkit {

struct StopRule {
  std::size_t max_iters = 1000;
  double step_tol = 1e-10;
  // Relative objective-decrease test; disabled when empty. Cycling runs keep
  // f constant, so this must stay off for them.
  std::optional<double> objective_tol;

  void validate() const;
};

enum class Termination { Converged, MaxIters, CycleDetected, Error };

const char* to_string(Termination t);

// Named per-iteration side values (e.g. the dual point of a mirror step).
using Extras = std::map<std::string, Vector>;

struct IterateTrace {
  std::vector<Vector> iterates;          // x_0 .. x_N
  std::vector<double> objective_values;  // f(x_0) .. f(x_N)
  std::vector<double> step_norms;        // ||x_{n+1} - x_n||, size N
  std::vector<double> surrogate_gaps;    // g(x_{n+1}|x_n) - f(x_{n+1}), size N
  std::vector<Extras> extras;            // size N
  Termination termination = Termination::MaxIters;
  std::optional<std::size_t> detected_period;
  // Number of iterations forming one sweep of a block-cyclic scheme.
  std::size_t sweep_length = 1;
  std::string error_message;

  std::size_t iterations() const { return step_norms.size(); }
  const Vector& final_iterate() const { return iterates.back(); }

  /// Keeps every `stride`-th iterate (starting with x_0). Step norms are
  /// recomputed between kept iterates; gaps are summed over each stride.
  IterateTrace coarsen(std::size_t stride) const;
  /// coarsen(sweep_length)
  IterateTrace sweeps() const { return coarsen(sweep_length); }
};

}  // namespace mmkit
