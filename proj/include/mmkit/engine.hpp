#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "mmkit/trace.hpp"
#include "mmkit/types.hpp"

namespace mmkit {

struct KnownMinimum {
  Vector point;
  double value = 0.0;
};

/// Objective f with optional first-order information and certified constants.
struct ObjectiveFunction {
  std::function<double(const Vector&)> eval;
  std::function<Vector(const Vector&)> gradient;  // empty when f is not differentiable
  std::optional<double> strong_convexity_mu;
  std::optional<double> smoothness_L;
  std::optional<KnownMinimum> known_minimum;
  std::function<bool(const Vector&)> in_domain;  // empty means all of R^d

  double operator()(const Vector& x) const { return eval(x); }
  bool has_gradient() const { return static_cast<bool>(gradient); }
  bool contains(const Vector& x) const { return !in_domain || in_domain(x); }

  /// Throws InvalidParameter on mu < 0, L <= 0 or mu > L.
  void validate() const;
};

/// g(. | anchor). Implementations must satisfy tangency at the anchor and
/// dominance over f; the engine treats minimize() as exact.
class Surrogate {
 public:
  explicit Surrogate(Vector anchor) : anchor_(std::move(anchor)) {}
  virtual ~Surrogate() = default;

  const Vector& anchor() const { return anchor_; }

  virtual double eval(const Vector& x) const = 0;
  virtual Vector minimize() const = 0;

  /// argmin_x g(x|anchor) + (rho/2)||x - anchor||^2. The default throws
  /// InvalidParameter; surrogates that support the viscosity wrapper override it.
  virtual Vector minimize_with_penalty(double rho) const;

  virtual std::optional<Vector> gradient_at_anchor() const { return std::nullopt; }

  /// Side values recorded in the trace for the step anchor -> minimizer.
  virtual Extras extras(const Vector& minimizer) const;

 private:
  Vector anchor_;
};

class SurrogateFactory {
 public:
  virtual ~SurrogateFactory() = default;

  /// `iteration` is the engine's 0-based iteration counter; block-cyclic
  /// schemes use it to pick the active block.
  virtual std::unique_ptr<Surrogate> build(const Vector& anchor,
                                           std::size_t iteration) const = 0;

  /// Iterations per sweep for block-cyclic schemes; stop tests and cycle
  /// detection run on sweep boundaries.
  virtual std::size_t sweep_length() const { return 1; }

  /// Points at which dominance is spot-checked around `anchor`. The default
  /// draws Gaussian perturbations with scale max(1, ||anchor||_inf).
  virtual std::vector<Vector> dominance_samples(const Vector& anchor, std::size_t iteration,
                                                std::mt19937_64& rng,
                                                std::size_t count) const;
};

using FactoryPtr = std::shared_ptr<const SurrogateFactory>;

/// Surrogate assembled from callbacks; handy for ad-hoc factories.
class CallbackSurrogate : public Surrogate {
 public:
  struct Callbacks {
    std::function<double(const Vector&)> eval;
    std::function<Vector()> minimize;
    std::function<Vector(double)> minimize_with_penalty;  // optional
    std::function<Vector()> gradient_at_anchor;           // optional
  };

  CallbackSurrogate(Vector anchor, Callbacks callbacks)
      : Surrogate(std::move(anchor)), callbacks_(std::move(callbacks)) {}

  double eval(const Vector& x) const override { return callbacks_.eval(x); }
  Vector minimize() const override { return callbacks_.minimize(); }
  Vector minimize_with_penalty(double rho) const override;
  std::optional<Vector> gradient_at_anchor() const override;

 private:
  Callbacks callbacks_;
};

FactoryPtr make_factory(
    std::function<std::unique_ptr<Surrogate>(const Vector&, std::size_t)> build);

/// Surrogate g(x|x_n) + (rho/2)||x - x_n||^2; still tangent and dominating.
FactoryPtr wrap_viscosity(FactoryPtr factory, double rho);

enum class CheckLevel { Off, Cheap, Full };

const char* to_string(CheckLevel level);

inline constexpr double kDescentSlack = 1e-12;
inline constexpr double kMajorizationTol = 1e-9;

struct CycleDetection {
  double point_tol = 1e-9;
  std::size_t max_period = 16;
};

struct RunOptions {
  CheckLevel check_level = CheckLevel::Cheap;
  std::optional<CycleDetection> cycle_detection;
  std::size_t dominance_samples = 8;
  std::uint64_t seed = 12345;
  // Throw on descent/numerical failures, or stop and return the partial trace
  // with termination Error.
  bool record_errors = false;
};

IterateTrace run_mm(const ObjectiveFunction& f, const SurrogateFactory& factory,
                    const Vector& x0, const StopRule& stop, const RunOptions& options = {});

struct MajorizationReport {
  double tangency_residual = 0.0;
  // min over samples of g(x|anchor) - f(x); +inf when no sample was usable
  double worst_dominance_margin = 0.0;
  std::vector<double> margins;
  std::size_t skipped = 0;  // samples outside dom f
  bool passed = false;
};

MajorizationReport check_majorization(const ObjectiveFunction& f,
                                      const SurrogateFactory& factory, const Vector& anchor,
                                      const std::vector<Vector>& samples,
                                      std::size_t iteration = 0);

}  // namespace mmkit
