#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mmkit/bregman.hpp"
#include "mmkit/engine.hpp"
#include "mmkit/types.hpp"

namespace mmkit::problems {

/// f(x) = 1/2 x^T H x - b^T x with mu = lambda_min(H), L = lambda_max(H).
struct QuadraticProblem {
  Matrix hessian;
  Vector linear;
  double mu = 0.0;
  double L = 0.0;
  std::optional<Vector> minimizer;  // set when mu > 0
  std::optional<double> min_value;

  double eval(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  ObjectiveFunction objective() const;
};

/// Symmetrizes H and computes mu, L and the minimizer by eigen-decomposition.
/// Throws InvalidInput if H is not symmetric to 1e-12 or not PSD.
QuadraticProblem make_quadratic(const Matrix& hessian, const Vector& linear);

/// H = Q diag(lambda) Q^T with Q Haar-orthogonal; lambda spans [lo, hi] with both
/// endpoints attained. b is Gaussian.
QuadraticProblem random_quadratic(std::size_t dim, double lo, double hi, std::uint64_t seed);

/// g(x|x_n) = f(x_n) + <grad f(x_n), x - x_n> + (L/2)||x - x_n||^2 with L taken
/// from f. minimize() = x_n - grad f(x_n) / L.
FactoryPtr quadratic_upper_bound_factory(const ObjectiveFunction& f);

/// Minimizers of f + B_phi(.||anchor); the penalty variant adds
/// (rho/2)||x - anchor||^2. Extras are optional.
struct BregmanSolver {
  std::function<Vector(const Vector& anchor)> minimize;
  std::function<Vector(const Vector& anchor, double rho)> minimize_with_penalty;
  std::function<Extras(const Vector& anchor, const Vector& next)> extras;
};

using Sampler =
    std::function<std::vector<Vector>(const Vector& anchor, std::mt19937_64&, std::size_t)>;

/// g(x|x_n) = f(x) + B_phi(x||x_n); +inf where x leaves int dom phi. Throws
/// Domain at build time for an anchor outside int dom phi.
FactoryPtr bregman_factory(const ObjectiveFunction& f, const bregman::BregmanGeometry& geometry,
                           BregmanSolver solver, Sampler sampler = {});

enum class InnerSolve { ClosedForm, Iterative };

inline constexpr double kInnerTolerance = 1e-10;

/// Bregman factory with phi = ||x||^2/(2 alpha) - f0. ClosedForm uses the prox
/// map; Iterative runs proximal gradient on the surrogate itself until the
/// fixed-point residual drops below kInnerTolerance.
FactoryPtr proxgrad_factory(const bregman::CompositeProblem& problem, double alpha,
                            InnerSolve inner = InnerSolve::ClosedForm,
                            const bregman::StepOptions& options = {});

/// Bregman factory with phi = psi/alpha - f restricted to the simplex (+inf off
/// it); minimize() is the exponentiated-gradient step.
FactoryPtr exponentiated_gradient_factory(const ObjectiveFunction& f, double alpha);

/// Bregman factory with phi = psi/alpha - f; minimize() is the three-stage
/// mirror step with dual point and mirrored point recorded as extras.
/// `feasible` restricts the surrogate to C (+inf outside); empty means R^d.
FactoryPtr mirror_descent_factory(const ObjectiveFunction& f, const bregman::BregmanGeometry& psi,
                                  const bregman::BregmanProjector& project, double alpha,
                                  std::function<bool(const Vector&)> feasible = {});

/// Points of the open simplex, Dirichlet(1,...,1).
std::vector<Vector> dirichlet_samples(std::size_t dim, std::size_t count, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Lasso

struct LassoProblem {
  Matrix design;    // n x d
  Vector response;  // n
  double lambda = 0.0;
  double L = 0.0;   // lambda_max(A^T A)
  double alpha = 0.0;

  /// 1/2 ||Ax - y||^2 + lambda ||x||_1
  double eval(const Vector& x) const;
  Vector smooth_gradient(const Vector& x) const;
  bregman::CompositeProblem composite() const;
};

/// n = 40, d = 20, Gaussian design scaled by 1/sqrt(n), 5-sparse truth plus
/// noise of scale 0.01, lambda = 0.1 ||A^T y||_inf, alpha = 0.9 / L.
LassoProblem lasso_desk(std::uint64_t seed = 12345);

/// Cyclic coordinate descent with exact coordinate minimization, run until
/// the optimality residual is below `tol`.
Vector lasso_reference_solve(const LassoProblem& p, double tol = 1e-13,
                             std::size_t max_sweeps = 100000);

/// max_i dist(0, [grad f0(x)]_i + lambda d|x_i|)
double lasso_optimality_residual(const LassoProblem& p, const Vector& x);

// ---------------------------------------------------------------------------
// Linear objective on the simplex

struct SimplexLinearProblem {
  Vector costs;  // distinct entries
  double alpha = 0.1;

  std::size_t argmin() const;
  ObjectiveFunction objective() const;
  Vector start() const;  // simplex center
};

/// costs (0.7, 0.2, 0.9, 0.4, 0.6), alpha 0.1.
SimplexLinearProblem simplex_linear();

struct ProblemInfo {
  std::string name;
  std::string description;
};

/// quad-small, lasso-desk, simplex-linear.
std::vector<ProblemInfo> problem_registry();

}  // namespace mmkit::problems
