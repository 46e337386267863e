#include "mmkit/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mmkit/diagnostics.hpp"
#include "mmkit/errors.hpp"

namespace mmkit {

namespace {

double relative_scale(double value) { return std::max(1.0, std::abs(value)); }

std::string format_value(const std::string& label, double value) {
  std::ostringstream os;
  os.precision(17);
  os << label << value;
  return os.str();
}

class ViscositySurrogate final : public Surrogate {
 public:
  ViscositySurrogate(std::unique_ptr<Surrogate> inner, double rho)
      : Surrogate(inner->anchor()), inner_(std::move(inner)), rho_(rho) {}

  double eval(const Vector& x) const override {
    return inner_->eval(x) + 0.5 * rho_ * (x - anchor()).squaredNorm();
  }
  Vector minimize() const override { return inner_->minimize_with_penalty(rho_); }
  Vector minimize_with_penalty(double rho) const override {
    return inner_->minimize_with_penalty(rho_ + rho);
  }
  std::optional<Vector> gradient_at_anchor() const override {
    return inner_->gradient_at_anchor();
  }
  Extras extras(const Vector& minimizer) const override { return inner_->extras(minimizer); }

 private:
  std::unique_ptr<Surrogate> inner_;
  double rho_;
};

class ViscosityFactory final : public SurrogateFactory {
 public:
  ViscosityFactory(FactoryPtr inner, double rho) : inner_(std::move(inner)), rho_(rho) {}

  std::unique_ptr<Surrogate> build(const Vector& anchor, std::size_t iteration) const override {
    return std::make_unique<ViscositySurrogate>(inner_->build(anchor, iteration), rho_);
  }
  std::size_t sweep_length() const override { return inner_->sweep_length(); }
  std::vector<Vector> dominance_samples(const Vector& anchor, std::size_t iteration,
                                        std::mt19937_64& rng,
                                        std::size_t count) const override {
    return inner_->dominance_samples(anchor, iteration, rng, count);
  }

 private:
  FactoryPtr inner_;
  double rho_;
};

class CallbackFactory final : public SurrogateFactory {
 public:
  explicit CallbackFactory(
      std::function<std::unique_ptr<Surrogate>(const Vector&, std::size_t)> build)
      : build_(std::move(build)) {}

  std::unique_ptr<Surrogate> build(const Vector& anchor, std::size_t iteration) const override {
    return build_(anchor, iteration);
  }

 private:
  std::function<std::unique_ptr<Surrogate>(const Vector&, std::size_t)> build_;
};

// Returns the dominance margin g(x|anchor) - f(x), or nullopt when x lies
// outside dom f.
std::optional<double> dominance_margin(const ObjectiveFunction& f, const Surrogate& g,
                                       const Vector& x) {
  if (!f.contains(x)) return std::nullopt;
  const double fx = f(x);
  if (!std::isfinite(fx)) return std::nullopt;
  const double gx = g.eval(x);
  if (gx == std::numeric_limits<double>::infinity()) return gx;
  return gx - fx;
}

}  // namespace

void ObjectiveFunction::validate() const {
  require(static_cast<bool>(eval), ErrorKind::InvalidParameter, "objective: eval is missing");
  if (strong_convexity_mu) {
    require(*strong_convexity_mu >= 0.0, ErrorKind::InvalidParameter,
            "objective: strong convexity modulus must be >= 0");
  }
  if (smoothness_L) {
    require(*smoothness_L > 0.0, ErrorKind::InvalidParameter,
            "objective: smoothness constant must be > 0");
  }
  if (strong_convexity_mu && smoothness_L) {
    require(*strong_convexity_mu <= *smoothness_L, ErrorKind::InvalidParameter,
            "objective: mu must not exceed L");
  }
}

Vector Surrogate::minimize_with_penalty(double /*rho*/) const {
  fail(ErrorKind::InvalidParameter, "surrogate does not support a proximal penalty");
}

Extras Surrogate::extras(const Vector& /*minimizer*/) const { return {}; }

std::vector<Vector> SurrogateFactory::dominance_samples(const Vector& anchor,
                                                        std::size_t /*iteration*/,
                                                        std::mt19937_64& rng,
                                                        std::size_t count) const {
  const double scale = std::max(1.0, anchor.cwiseAbs().maxCoeff());
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    Vector x = anchor;
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += normal(rng);
    out.push_back(std::move(x));
  }
  return out;
}

Vector CallbackSurrogate::minimize_with_penalty(double rho) const {
  if (!callbacks_.minimize_with_penalty) return Surrogate::minimize_with_penalty(rho);
  return callbacks_.minimize_with_penalty(rho);
}

std::optional<Vector> CallbackSurrogate::gradient_at_anchor() const {
  if (!callbacks_.gradient_at_anchor) return std::nullopt;
  return callbacks_.gradient_at_anchor();
}

FactoryPtr make_factory(
    std::function<std::unique_ptr<Surrogate>(const Vector&, std::size_t)> build) {
  return std::make_shared<CallbackFactory>(std::move(build));
}

FactoryPtr wrap_viscosity(FactoryPtr factory, double rho) {
  require(rho > 0.0 && std::isfinite(rho), ErrorKind::InvalidParameter,
          "wrap_viscosity: rho must be positive");
  require(factory != nullptr, ErrorKind::InvalidParameter, "wrap_viscosity: null factory");
  return std::make_shared<ViscosityFactory>(std::move(factory), rho);
}

const char* to_string(CheckLevel level) {
  switch (level) {
    case CheckLevel::Off: return "off";
    case CheckLevel::Cheap: return "cheap";
    case CheckLevel::Full: return "full";
  }
  return "unknown";
}

MajorizationReport check_majorization(const ObjectiveFunction& f,
                                      const SurrogateFactory& factory, const Vector& anchor,
                                      const std::vector<Vector>& samples,
                                      std::size_t iteration) {
  const auto g = factory.build(anchor, iteration);
  const double f_anchor = f(anchor);
  MajorizationReport report;
  report.tangency_residual = std::abs(g->eval(anchor) - f_anchor);
  report.worst_dominance_margin = std::numeric_limits<double>::infinity();
  bool dominance_ok = true;
  for (const Vector& x : samples) {
    const auto margin = dominance_margin(f, *g, x);
    if (!margin) {
      ++report.skipped;
      report.margins.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    report.margins.push_back(*margin);
    report.worst_dominance_margin = std::min(report.worst_dominance_margin, *margin);
    if (*margin < -kMajorizationTol * relative_scale(f(x))) dominance_ok = false;
  }
  report.passed =
      report.tangency_residual <= kMajorizationTol * relative_scale(f_anchor) && dominance_ok;
  return report;
}

IterateTrace run_mm(const ObjectiveFunction& f, const SurrogateFactory& factory,
                    const Vector& x0, const StopRule& stop, const RunOptions& options) {
  f.validate();
  stop.validate();
  require_finite(x0, "run_mm x0");
  require(f.contains(x0), ErrorKind::Domain, "run_mm: x0 outside the domain of f");

  const std::size_t sweep = std::max<std::size_t>(1, factory.sweep_length());
  std::mt19937_64 rng(options.seed);

  IterateTrace trace;
  trace.sweep_length = sweep;
  const double f0 = f(x0);
  if (!std::isfinite(f0)) fail(ErrorKind::Numerical, "run_mm: f(x0) is not finite");
  trace.iterates.push_back(x0);
  trace.objective_values.push_back(f0);

  std::vector<Vector> boundary_iterates{x0};

  auto step_once = [&](std::size_t n) {
    const Vector& x = trace.iterates.back();
    const double fx = trace.objective_values.back();
    const auto g = factory.build(x, n);

    if (options.check_level == CheckLevel::Full) {
      const double residual = std::abs(g->eval(x) - fx);
      if (residual > kMajorizationTol * relative_scale(fx)) {
        fail(ErrorKind::MajorizationViolation,
             format_value("tangency violated at iteration " + std::to_string(n) +
                              ", residual ",
                          residual));
      }
    }

    Vector next = g->minimize();
    if (!next.allFinite()) {
      fail(ErrorKind::Numerical,
           "surrogate minimizer is not finite at iteration " + std::to_string(n + 1));
    }
    const double f_next = f(next);
    if (!std::isfinite(f_next)) {
      fail(ErrorKind::Numerical,
           "objective is not finite at iteration " + std::to_string(n + 1));
    }

    if (options.check_level == CheckLevel::Full) {
      auto samples = factory.dominance_samples(x, n, rng, options.dominance_samples);
      samples.push_back(next);
      for (const Vector& s : samples) {
        const auto margin = dominance_margin(f, *g, s);
        if (margin && *margin < -kMajorizationTol * relative_scale(f(s))) {
          fail(ErrorKind::MajorizationViolation,
               format_value("dominance violated at iteration " + std::to_string(n) +
                                ", margin ",
                            *margin));
        }
      }
    }
    if (options.check_level != CheckLevel::Off &&
        f_next > fx + kDescentSlack * relative_scale(fx)) {
      throw DescentViolation(n + 1, fx, f_next);
    }

    trace.step_norms.push_back((next - x).norm());
    trace.surrogate_gaps.push_back(g->eval(next) - f_next);
    trace.extras.push_back(g->extras(next));
    trace.iterates.push_back(std::move(next));
    trace.objective_values.push_back(f_next);
  };

  for (std::size_t n = 0; n < stop.max_iters; ++n) {
    try {
      step_once(n);
    } catch (const Error& e) {
      if (!options.record_errors) throw;
      trace.termination = Termination::Error;
      trace.error_message = e.what();
      return trace;
    }

    if ((n + 1) % sweep != 0) continue;
    const Vector& current = trace.iterates.back();
    const double sweep_step = (current - boundary_iterates.back()).norm();
    const double f_current = trace.objective_values.back();
    const double f_previous = trace.objective_values[trace.objective_values.size() - 1 - sweep];
    boundary_iterates.push_back(current);

    if (sweep_step <= stop.step_tol) {
      trace.termination = Termination::Converged;
      return trace;
    }
    if (stop.objective_tol &&
        f_previous - f_current <= *stop.objective_tol * relative_scale(f_previous)) {
      trace.termination = Termination::Converged;
      return trace;
    }
    if (options.cycle_detection) {
      const auto period =
          diagnostics::detect_cycle(boundary_iterates, options.cycle_detection->point_tol,
                                    options.cycle_detection->max_period);
      if (period && *period == 1) {
        trace.termination = Termination::Converged;
        return trace;
      }
      if (period) {
        trace.termination = Termination::CycleDetected;
        trace.detected_period = period;
        return trace;
      }
    }
  }
  trace.termination = Termination::MaxIters;
  return trace;
}

}  // namespace mmkit
