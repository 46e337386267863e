#include "mmkit/bregman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mmkit/errors.hpp"

namespace mmkit::bregman {

namespace {

bool strictly_positive(const Vector& x) { return (x.array() > 0.0).all(); }

}  // namespace

BregmanGeometry euclidean_geometry(double scale) {
  require(std::isfinite(scale) && scale > 0.0, ErrorKind::InvalidParameter,
          "euclidean_geometry: scale must be positive");
  BregmanGeometry g;
  g.name = "euclidean";
  g.phi = [scale](const Vector& x) { return 0.5 * scale * x.squaredNorm(); };
  g.gradient = [scale](const Vector& x) -> Vector { return scale * x; };
  g.conjugate_gradient = [scale](const Vector& y) -> Vector { return y / scale; };
  g.strong_convexity_mu = scale;
  g.smoothness_L = scale;
  return g;
}

BregmanGeometry negative_entropy_geometry() {
  BregmanGeometry g;
  g.name = "negative_entropy";
  g.phi = [](const Vector& x) {
    return (x.array() * x.array().log() - x.array()).sum();
  };
  g.gradient = [](const Vector& x) -> Vector { return x.array().log().matrix(); };
  g.conjugate_gradient = [](const Vector& y) -> Vector { return y.array().exp().matrix(); };
  g.strong_convexity_mu = 1.0;
  g.in_interior = strictly_positive;
  return g;
}

BregmanGeometry proximal_gradient_geometry(const ObjectiveFunction& f0, double alpha) {
  require(f0.has_gradient(), ErrorKind::InvalidParameter,
          "proximal_gradient_geometry: f0 needs a gradient");
  require(std::isfinite(alpha) && alpha > 0.0, ErrorKind::InvalidParameter,
          "proximal_gradient_geometry: alpha must be positive");
  BregmanGeometry g;
  g.name = "proximal_gradient";
  g.phi = [f0, alpha](const Vector& x) { return 0.5 / alpha * x.squaredNorm() - f0(x); };
  g.gradient = [f0, alpha](const Vector& x) -> Vector { return x / alpha - f0.gradient(x); };
  g.strong_convexity_mu = std::max(0.0, 1.0 / alpha - f0.smoothness_L.value_or(0.0));
  g.smoothness_L = 1.0 / alpha;
  return g;
}

BregmanGeometry mirror_descent_geometry(const BregmanGeometry& psi, const ObjectiveFunction& f,
                                        double alpha) {
  require(f.has_gradient(), ErrorKind::InvalidParameter,
          "mirror_descent_geometry: f needs a gradient");
  require(std::isfinite(alpha) && alpha > 0.0, ErrorKind::InvalidParameter,
          "mirror_descent_geometry: alpha must be positive");
  BregmanGeometry g;
  g.name = "mirror_descent(" + psi.name + ")";
  g.phi = [psi, f, alpha](const Vector& x) { return psi.phi(x) / alpha - f(x); };
  g.gradient = [psi, f, alpha](const Vector& x) -> Vector {
    return psi.gradient(x) / alpha - f.gradient(x);
  };
  g.strong_convexity_mu =
      std::max(0.0, psi.strong_convexity_mu / alpha - f.smoothness_L.value_or(0.0));
  g.in_interior = psi.in_interior;
  return g;
}

double bregman_divergence(const BregmanGeometry& geometry, const Vector& x, const Vector& y) {
  require(x.size() == y.size(), ErrorKind::Shape, "bregman_divergence: dimension mismatch");
  require_finite(x, "bregman_divergence x");
  require_finite(y, "bregman_divergence y");
  require(geometry.contains(x) && geometry.contains(y), ErrorKind::Domain,
          "bregman_divergence: point outside int dom phi");
  return geometry.phi(x) - geometry.phi(y) - geometry.gradient(y).dot(x - y);
}

Vector soft_threshold(const Vector& v, double threshold) {
  return (v.array().sign() * (v.array().abs() - threshold).max(0.0)).matrix();
}

ProximalTerm zero_term() {
  ProximalTerm h;
  h.name = "zero";
  h.eval = [](const Vector&) { return 0.0; };
  h.prox = [](const Vector& v, double) { return v; };
  return h;
}

ProximalTerm l1_term(double lambda) {
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorKind::InvalidParameter,
          "l1_term: lambda must be >= 0");
  ProximalTerm h;
  h.name = "l1";
  h.eval = [lambda](const Vector& x) { return lambda * x.lpNorm<1>(); };
  h.prox = [lambda](const Vector& v, double t) { return soft_threshold(v, lambda * t); };
  return h;
}

ProximalTerm mcp_term(double lambda, double gamma) {
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorKind::InvalidParameter,
          "mcp_term: lambda must be >= 0");
  require(std::isfinite(gamma) && gamma > 0.0, ErrorKind::InvalidParameter,
          "mcp_term: gamma must be positive");
  ProximalTerm h;
  h.name = "mcp";
  h.weak_convexity = 1.0 / gamma;
  h.eval = [lambda, gamma](const Vector& x) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double a = std::abs(x(i));
      total += a <= gamma * lambda ? lambda * a - a * a / (2.0 * gamma)
                                   : 0.5 * gamma * lambda * lambda;
    }
    return total;
  };
  // firm thresholding; requires t < gamma
  h.prox = [lambda, gamma](const Vector& v, double t) {
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double a = std::abs(v(i));
      if (a <= t * lambda) {
        out(i) = 0.0;
      } else if (a <= gamma * lambda) {
        out(i) = std::copysign((a - t * lambda) / (1.0 - t / gamma), v(i));
      } else {
        out(i) = v(i);
      }
    }
    return out;
  };
  return h;
}

ProximalTerm indicator_term(projection::ProjectionOperator set) {
  ProximalTerm h;
  h.name = "indicator(" + set.description() + ")";
  h.eval = [set](const Vector& x) {
    return set.contains(x, 1e-9) ? 0.0 : std::numeric_limits<double>::infinity();
  };
  h.prox = [set](const Vector& v, double) { return set(v); };
  return h;
}

double CompositeProblem::smoothness() const {
  require(smooth.smoothness_L.has_value(), ErrorKind::InvalidParameter,
          "composite problem: smooth part has no smoothness constant");
  return *smooth.smoothness_L;
}

ObjectiveFunction CompositeProblem::objective() const {
  ObjectiveFunction f;
  f.eval = [smooth = smooth, h = nonsmooth](const Vector& x) { return smooth(x) + h.eval(x); };
  f.in_domain = smooth.in_domain;
  return f;
}

void validate_step_size(double alpha, std::optional<double> L, const StepOptions& options,
                        const char* who) {
  require(std::isfinite(alpha) && alpha > 0.0, ErrorKind::InvalidParameter,
          std::string(who) + ": step size must be positive");
  if (!L) return;
  const double limit = (options.allow_extended_step ? 2.0 : 1.0) / *L;
  if (!(alpha < limit)) {
    std::ostringstream os;
    os.precision(17);
    os << who << ": step size " << alpha << " must be below "
       << (options.allow_extended_step ? "2/L = " : "1/L = ") << limit;
    fail(ErrorKind::InvalidParameter, os.str());
  }
}

Vector proximal_gradient_step(const CompositeProblem& problem, const Vector& x, double alpha,
                              const StepOptions& options) {
  require(problem.smooth.has_gradient(), ErrorKind::InvalidParameter,
          "proximal_gradient_step: smooth part needs a gradient");
  require_finite(x, "proximal_gradient_step x");
  validate_step_size(alpha, problem.smoothness(), options, "proximal_gradient_step");
  if (problem.nonsmooth.weak_convexity) {
    require(*problem.nonsmooth.weak_convexity * alpha < 1.0, ErrorKind::InvalidParameter,
            "proximal_gradient_step: weakly convex h needs rho * alpha < 1");
  }
  return problem.nonsmooth.prox(x - alpha * problem.smooth.gradient(x), alpha);
}

BregmanProjector identity_projector() {
  return {"identity", [](const Vector& x) { return x; }};
}

BregmanProjector kl_simplex_projector() { return {"kl_simplex", kl_project_simplex}; }

BregmanProjector euclidean_projector(projection::ProjectionOperator set) {
  return {"euclidean(" + set.description() + ")",
          [set](const Vector& x) { return set(x); }};
}

MirrorStep mirror_descent_step_detailed(const ObjectiveFunction& f, const BregmanGeometry& psi,
                                        const BregmanProjector& project, const Vector& x,
                                        double alpha, const StepOptions& options) {
  require(f.has_gradient(), ErrorKind::InvalidParameter, "mirror_descent_step: f needs a gradient");
  require(static_cast<bool>(psi.conjugate_gradient), ErrorKind::InvalidParameter,
          "mirror_descent_step: psi needs a conjugate gradient");
  require(psi.strong_convexity_mu >= 1.0, ErrorKind::InvalidParameter,
          "mirror_descent_step: psi must be at least 1-strongly convex");
  require_finite(x, "mirror_descent_step x");
  require(psi.contains(x), ErrorKind::Domain, "mirror_descent_step: x outside int dom psi");
  validate_step_size(alpha, f.smoothness_L, options, "mirror_descent_step");

  MirrorStep step;
  step.dual_point = psi.gradient(x) - alpha * f.gradient(x);
  step.mirrored = psi.conjugate_gradient(step.dual_point);
  if (!step.mirrored.allFinite()) {
    fail(ErrorKind::Domain, "mirror_descent_step: mirrored point outside dom psi*");
  }
  step.next = project(step.mirrored);
  return step;
}

Vector mirror_descent_step(const ObjectiveFunction& f, const BregmanGeometry& psi,
                           const BregmanProjector& project, const Vector& x, double alpha,
                           const StepOptions& options) {
  return mirror_descent_step_detailed(f, psi, project, x, alpha, options).next;
}

bool on_open_simplex(const Vector& x, double tol) {
  return x.size() >= 1 && strictly_positive(x) && std::abs(x.sum() - 1.0) <= tol;
}

Vector exponentiated_gradient_step(const ObjectiveFunction& f, const Vector& x, double alpha) {
  require(f.has_gradient(), ErrorKind::InvalidParameter,
          "exponentiated_gradient_step: f needs a gradient");
  require_finite(x, "exponentiated_gradient_step x");
  require(strictly_positive(x), ErrorKind::Domain,
          "exponentiated_gradient_step: entries must be strictly positive");
  require(std::abs(x.sum() - 1.0) <= 1e-9, ErrorKind::Domain,
          "exponentiated_gradient_step: x must sum to 1");
  require(std::isfinite(alpha) && alpha > 0.0, ErrorKind::InvalidParameter,
          "exponentiated_gradient_step: alpha must be positive");

  // log-domain weights, shifted by their maximum before exponentiating
  Vector logits = x.array().log().matrix() - alpha * f.gradient(x);
  logits.array() -= logits.maxCoeff();
  Vector weights = logits.array().exp().matrix();
  weights /= weights.sum();
  // Eigen's vectorized exp clamps to subnormals instead of returning 0
  if ((weights.array() < std::numeric_limits<double>::min()).any()) {
    fail(ErrorKind::Numerical, "exponentiated_gradient_step: an entry underflowed to zero");
  }
  return weights;
}

Vector kl_project_simplex(const Vector& y) {
  require_finite(y, "kl_project_simplex y");
  require(y.size() >= 1 && strictly_positive(y), ErrorKind::Domain,
          "kl_project_simplex: entries must be strictly positive");
  return y / y.sum();
}

SummaReport check_summa(const ObjectiveFunction& f, const SurrogateFactory& factory,
                        const Vector& x_n, const Vector& x_next,
                        const std::vector<Vector>& samples, std::size_t iteration,
                        double tolerance) {
  const auto g_n = factory.build(x_n, iteration);
  const auto g_next = factory.build(x_next, iteration + 1);
  const double at_next = g_n->eval(x_next);

  SummaReport report;
  report.tolerance = tolerance;
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (const Vector& x : samples) {
    const double left = g_n->eval(x) - at_next;
    const double right = g_next->eval(x) - f(x);
    double margin = left - right;
    if (std::isnan(margin)) margin = -std::numeric_limits<double>::infinity();
    report.margins.push_back(margin);
    report.worst_margin = std::min(report.worst_margin, margin);
  }
  report.passed = report.worst_margin >= -tolerance;
  return report;
}

}  // namespace mmkit::bregman
