#include "mmkit/errors.hpp"

#include <sstream>

#include "mmkit/types.hpp"

namespace mmkit {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::DescentViolation: return "descent-violation";
    case ErrorKind::MajorizationViolation: return "majorization-violation";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::UnsupportedTrace: return "unsupported-trace";
    case ErrorKind::InconsistentInput: return "inconsistent-input";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Divergence: return "divergence";
  }
  return "unknown";
}

namespace {
std::string descent_message(std::size_t iteration, double before, double after) {
  std::ostringstream os;
  os.precision(17);
  os << "descent violated at iteration " << iteration << ": f went from " << before
     << " to " << after;
  return os.str();
}
}  // namespace

DescentViolation::DescentViolation(std::size_t iteration, double before, double after)
    : Error(ErrorKind::DescentViolation, descent_message(iteration, before, after)),
      iteration_(iteration),
      before_(before),
      after_(after) {}

void require_finite(const Vector& v, const std::string& what) {
  if (!v.allFinite()) fail(ErrorKind::InvalidInput, what + ": non-finite entry");
}

void require_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) fail(ErrorKind::InvalidInput, what + ": non-finite entry");
}

}  // namespace mmkit
