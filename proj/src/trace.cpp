#include "mmkit/trace.hpp"

#include "mmkit/errors.hpp"

namespace mmkit {

void StopRule::validate() const {
  require(max_iters >= 1, ErrorKind::InvalidParameter, "stop rule: max_iters must be >= 1");
  require(step_tol >= 0.0, ErrorKind::InvalidParameter, "stop rule: step_tol must be >= 0");
  require(!objective_tol || *objective_tol >= 0.0, ErrorKind::InvalidParameter,
          "stop rule: objective_tol must be >= 0");
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "Converged";
    case Termination::MaxIters: return "MaxIters";
    case Termination::CycleDetected: return "CycleDetected";
    case Termination::Error: return "Error";
  }
  return "Unknown";
}

IterateTrace IterateTrace::coarsen(std::size_t stride) const {
  require(stride >= 1, ErrorKind::InvalidParameter, "coarsen: stride must be >= 1");
  IterateTrace out;
  out.termination = termination;
  out.error_message = error_message;
  out.sweep_length = 1;
  for (std::size_t n = 0; n < iterates.size(); n += stride) {
    out.iterates.push_back(iterates[n]);
    out.objective_values.push_back(objective_values[n]);
    if (n > 0) {
      out.step_norms.push_back((iterates[n] - iterates[n - stride]).norm());
      double gap = 0.0;
      for (std::size_t k = n - stride; k < n; ++k) gap += surrogate_gaps[k];
      out.surrogate_gaps.push_back(gap);
      out.extras.emplace_back();
    }
  }
  if (stride == sweep_length) out.detected_period = detected_period;
  return out;
}

}  // namespace mmkit
