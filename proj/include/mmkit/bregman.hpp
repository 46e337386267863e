#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mmkit/engine.hpp"
#include "mmkit/projection.hpp"
#include "mmkit/types.hpp"

namespace mmkit::bregman {

/// Convex generator phi with its gradient and, when available, the inverse
/// gradient map grad phi^*.
struct BregmanGeometry {
  std::string name;
  std::function<double(const Vector&)> phi;
  std::function<Vector(const Vector&)> gradient;
  std::function<Vector(const Vector&)> conjugate_gradient;  // may be empty
  double strong_convexity_mu = 0.0;
  std::optional<double> smoothness_L;
  std::function<bool(const Vector&)> in_interior;  // empty means all of R^d

  bool contains(const Vector& x) const { return !in_interior || in_interior(x); }
};

/// phi(x) = (scale/2)||x||^2
BregmanGeometry euclidean_geometry(double scale = 1.0);

/// phi(x) = sum x_i log x_i - x_i on the positive orthant; 1-strongly convex
/// with respect to the l1 norm on the simplex.
BregmanGeometry negative_entropy_geometry();

/// phi(x) = (1/(2 alpha))||x||^2 - f0(x); (1/alpha - L)-strongly convex when
/// alpha < 1/L. Turns f0 + h + B_phi into the proximal-gradient surrogate.
BregmanGeometry proximal_gradient_geometry(const ObjectiveFunction& f0, double alpha);

/// phi(x) = psi(x)/alpha - f(x); the mirror-descent surrogate generator.
BregmanGeometry mirror_descent_geometry(const BregmanGeometry& psi, const ObjectiveFunction& f,
                                        double alpha);

/// B_phi(x||y) = phi(x) - phi(y) - <grad phi(y), x - y>. Throws Domain when x or
/// y lies outside int dom phi.
double bregman_divergence(const BregmanGeometry& geometry, const Vector& x, const Vector& y);

/// Nonsmooth term h with an exact proximal map
/// prox(v, t) = argmin_x h(x) + ||x - v||^2 / (2t).
struct ProximalTerm {
  std::string name;
  std::function<double(const Vector&)> eval;
  std::function<Vector(const Vector&, double)> prox;
  // rho such that h + (rho/2)||.||^2 is convex, for weakly convex h
  std::optional<double> weak_convexity;
};

ProximalTerm zero_term();
ProximalTerm l1_term(double lambda);
/// Minimax concave penalty; weakly convex with modulus 1/gamma.
ProximalTerm mcp_term(double lambda, double gamma);
/// Indicator of a convex set; its prox is the projection.
ProximalTerm indicator_term(projection::ProjectionOperator set);

Vector soft_threshold(const Vector& v, double threshold);

/// f = f0 + h with f0 L-smooth.
struct CompositeProblem {
  ObjectiveFunction smooth;
  ProximalTerm nonsmooth;
  std::string constraint = "R^d";

  double eval(const Vector& x) const { return smooth(x) + nonsmooth.eval(x); }
  double smoothness() const;
  /// f as an ObjectiveFunction (no gradient, no constants).
  ObjectiveFunction objective() const;
};

struct StepOptions {
  // Accept 1/L <= alpha < 2/L. The MM interpretation is lost there; the engine
  // descent check still applies.
  bool allow_extended_step = false;
};

/// Validates 0 < alpha < 1/L (or < 2/L with allow_extended_step).
void validate_step_size(double alpha, std::optional<double> L, const StepOptions& options,
                        const char* who);

/// prox_{alpha h}(x - alpha grad f0(x)). Throws InvalidParameter for alpha out
/// of range or, for weakly convex h, rho * alpha >= 1.
Vector proximal_gradient_step(const CompositeProblem& problem, const Vector& x, double alpha,
                              const StepOptions& options = {});

/// P_C^d as a callable.
struct BregmanProjector {
  std::string name;
  std::function<Vector(const Vector&)> project;

  Vector operator()(const Vector& x) const { return project(x); }
};

BregmanProjector identity_projector();
/// KL projection onto the simplex: y / sum(y).
BregmanProjector kl_simplex_projector();
BregmanProjector euclidean_projector(projection::ProjectionOperator set);

struct MirrorStep {
  Vector dual_point;  // grad psi(x_n) - alpha grad f(x_n)
  Vector mirrored;    // grad psi^*(dual_point)
  Vector next;        // projection of mirrored onto C
};

/// Gradient step in the dual, mirroring back, Bregman projection.
MirrorStep mirror_descent_step_detailed(const ObjectiveFunction& f, const BregmanGeometry& psi,
                                        const BregmanProjector& project, const Vector& x,
                                        double alpha, const StepOptions& options = {});

Vector mirror_descent_step(const ObjectiveFunction& f, const BregmanGeometry& psi,
                           const BregmanProjector& project, const Vector& x, double alpha,
                           const StepOptions& options = {});

/// x ⊙ exp(-alpha grad f(x)) / Z on the simplex.
Vector exponentiated_gradient_step(const ObjectiveFunction& f, const Vector& x, double alpha);

Vector kl_project_simplex(const Vector& y);

/// Checks that x lies in the open simplex: strictly positive, sum within tol of 1.
bool on_open_simplex(const Vector& x, double tol = 1e-9);

struct SummaReport {
  std::vector<double> margins;
  double worst_margin = 0.0;
  double tolerance = 1e-9;
  bool passed = true;
};

/// For each sample x: [g(x|x_n) - g(x_{n+1}|x_n)] - [g(x|x_{n+1}) - f(x)] >= -tol.
SummaReport check_summa(const ObjectiveFunction& f, const SurrogateFactory& factory,
                        const Vector& x_n, const Vector& x_next,
                        const std::vector<Vector>& samples, std::size_t iteration = 0,
                        double tolerance = 1e-9);

}  // namespace mmkit::bregman
