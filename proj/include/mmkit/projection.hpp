#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmkit/trace.hpp"
#include "mmkit/types.hpp"

namespace mmkit::projection {

using Map = std::function<Vector(const Vector&)>;

/// Euclidean projection onto a closed convex set.
class ProjectionOperator {
 public:
  ProjectionOperator(std::string description, Map project,
                     std::function<bool(const Vector&, double)> contains);

  Vector operator()(const Vector& x) const { return project(x); }
  Vector project(const Vector& x) const;
  bool contains(const Vector& x, double tol = 1e-10) const;
  const std::string& description() const { return description_; }

 private:
  std::string description_;
  Map project_;
  std::function<bool(const Vector&, double)> contains_;
};

ProjectionOperator ball(Vector center, double radius);
ProjectionOperator box(Vector lower, Vector upper);
/// {x : A x = b}; A must have full row rank.
ProjectionOperator affine(Matrix a, Vector b);
/// Probability simplex in R^dim.
ProjectionOperator simplex(std::size_t dim);

Vector project_ball(const Vector& x, const Vector& center, double radius);
Vector project_box(const Vector& x, const Vector& lower, const Vector& upper);
Vector project_simplex_euclidean(const Vector& x);

struct MinkowskiResult {
  Vector a_part;
  Vector b_part;
  std::size_t iterations = 0;
  double final_step_norm = 0.0;
  bool converged = false;
  // 0.5||x - a - b||^2 after every half-step, starting from (a_0, P_B(x - a_0))
  std::vector<double> half_step_objectives;
};

/// Nearest point of A + B to x by alternating b <- P_B(x - a), a <- P_A(x - b).
/// A and B must be convex with A + B closed (not checked). a0 defaults to
/// P_A(x). Step norm is ||a_{n+1} - a_n||. Exhausting max_iters returns with
/// converged == false; both parts remain feasible.
MinkowskiResult minkowski_project(const Vector& x, const ProjectionOperator& pa,
                                  const ProjectionOperator& pb,
                                  const std::optional<Vector>& a0, const StopRule& stop);

/// T(a) = P_A[x - P_B(x - a)]
Map minkowski_map(const Vector& x, const ProjectionOperator& pa, const ProjectionOperator& pb);

struct FixedPointResult {
  Vector point;
  std::size_t iterations = 0;
  bool converged = false;
};

/// x_{n+1} = T_{n mod r}(x_n). Stops once the summed movement over one full
/// cycle of maps is at most step_tol. Throws Divergence when ||x_n|| exceeds
/// the bound (default 1e8 (1 + ||x_0||)).
FixedPointResult cyclic_fixed_point(std::span<const Map> maps, const Vector& x0,
                                    const StopRule& stop,
                                    std::optional<double> divergence_bound = std::nullopt);

struct PropertyReport {
  std::string property;
  std::size_t checked = 0;
  std::size_t exempt = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;
  double worst_margin = 0.0;
  bool passed = true;
};

using PointPair = std::pair<Vector, Vector>;

/// ||T(x) - T(y)|| <= ||x - y|| + tol over the pairs; worst_ratio is the
/// largest ||T(x) - T(y)|| / ||x - y||.
PropertyReport check_nonexpansive(const Map& op, std::span<const PointPair> pairs,
                                  double tol = 1e-10);

/// ||T(x) - T(y)||^2 <= <x - y, T(x) - T(y)> + tol over the pairs.
PropertyReport check_firmly_nonexpansive(const Map& op, std::span<const PointPair> pairs,
                                         double tol = 1e-10);

/// ||T(x) - y|| < ||x - y|| (1 - 1e-12) for samples x that are not fixed
/// (||T(x) - x|| > 1e-8); fixed samples are exempt. Throws Precondition when
/// fixed_point is not fixed to 1e-8.
PropertyReport check_paracontractive(const Map& op, const Vector& fixed_point,
                                     std::span<const Vector> samples);

/// Seeded Gaussian pairs with entries of standard deviation `scale`.
std::vector<PointPair> random_pairs(std::size_t dim, std::size_t count, double scale,
                                    std::mt19937_64& rng);
std::vector<Vector> random_points(std::size_t dim, std::size_t count, double scale,
                                  std::mt19937_64& rng);

}  // namespace mmkit::projection
