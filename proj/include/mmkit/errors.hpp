#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mmkit {

enum class ErrorKind {
  InvalidInput,
  Shape,
  Domain,
  InvalidParameter,
  DescentViolation,
  MajorizationViolation,
  Numerical,
  UnsupportedTrace,
  InconsistentInput,
  Precondition,
  Divergence,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the MM engine when f(x_{n+1}) exceeds f(x_n) beyond the slack.
class DescentViolation : public Error {
 public:
  DescentViolation(std::size_t iteration, double before, double after);

  std::size_t iteration() const { return iteration_; }
  double before() const { return before_; }
  double after() const { return after_; }

 private:
  std::size_t iteration_;
  double before_;
  double after_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace mmkit
