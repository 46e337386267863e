#include "mmkit/projection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "mmkit/errors.hpp"

namespace mmkit::projection {

ProjectionOperator::ProjectionOperator(std::string description, Map project,
                                       std::function<bool(const Vector&, double)> contains)
    : description_(std::move(description)),
      project_(std::move(project)),
      contains_(std::move(contains)) {}

Vector ProjectionOperator::project(const Vector& x) const {
  require_finite(x, "projection input");
  return project_(x);
}

bool ProjectionOperator::contains(const Vector& x, double tol) const {
  return contains_(x, tol);
}

Vector project_ball(const Vector& x, const Vector& center, double radius) {
  require(x.size() == center.size(), ErrorKind::Shape, "project_ball: dimension mismatch");
  const Vector offset = x - center;
  const double dist = offset.norm();
  if (dist <= radius) return x;
  return center + (radius / dist) * offset;
}

Vector project_box(const Vector& x, const Vector& lower, const Vector& upper) {
  require(x.size() == lower.size(), ErrorKind::Shape, "project_box: dimension mismatch");
  return x.cwiseMax(lower).cwiseMin(upper);
}

Vector project_simplex_euclidean(const Vector& x) {
  require(x.size() >= 1, ErrorKind::Shape, "project_simplex_euclidean: empty vector");
  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double running = 0.0;
  double threshold = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    running += sorted[j];
    const double candidate = (running - 1.0) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) threshold = candidate;
  }
  return (x.array() - threshold).max(0.0).matrix();
}

ProjectionOperator ball(Vector center, double radius) {
  require(std::isfinite(radius) && radius > 0.0, ErrorKind::InvalidParameter,
          "ball: radius must be positive");
  require_finite(center, "ball center");
  const std::string description = "ball(radius=" + std::to_string(radius) + ")";
  return ProjectionOperator(
      description,
      [center, radius](const Vector& x) { return project_ball(x, center, radius); },
      [center, radius](const Vector& x, double tol) {
        return x.size() == center.size() && (x - center).norm() <= radius + tol;
      });
}

ProjectionOperator box(Vector lower, Vector upper) {
  require(lower.size() == upper.size(), ErrorKind::Shape, "box: bound dimension mismatch");
  require((lower.array() <= upper.array()).all(), ErrorKind::InvalidParameter,
          "box: lower bound exceeds upper bound");
  return ProjectionOperator(
      "box",
      [lower, upper](const Vector& x) { return project_box(x, lower, upper); },
      [lower, upper](const Vector& x, double tol) {
        return x.size() == lower.size() && (x.array() >= lower.array() - tol).all() &&
               (x.array() <= upper.array() + tol).all();
      });
}

ProjectionOperator affine(Matrix a, Vector b) {
  require(a.rows() == b.size(), ErrorKind::Shape, "affine: A rows differ from b length");
  require(a.rows() >= 1 && a.rows() <= a.cols(), ErrorKind::Shape,
          "affine: A must be wide or square");
  require_finite(a, "affine A");
  require_finite(b, "affine b");
  Eigen::FullPivLU<Matrix> lu(a);
  require(lu.rank() == a.rows(), ErrorKind::InvalidParameter,
          "affine: A must have full row rank");
  const Matrix gram = a * a.transpose();
  const Eigen::LDLT<Matrix> solver(gram);
  return ProjectionOperator(
      "affine",
      [a, b, solver](const Vector& x) -> Vector {
        require(x.size() == a.cols(), ErrorKind::Shape, "affine: dimension mismatch");
        return x - a.transpose() * solver.solve(a * x - b);
      },
      [a, b](const Vector& x, double tol) {
        return x.size() == a.cols() && (a * x - b).cwiseAbs().maxCoeff() <= tol;
      });
}

ProjectionOperator simplex(std::size_t dim) {
  require(dim >= 1, ErrorKind::InvalidParameter, "simplex: dimension must be >= 1");
  const auto size = static_cast<Eigen::Index>(dim);
  return ProjectionOperator(
      "simplex",
      [size](const Vector& x) {
        require(x.size() == size, ErrorKind::Shape, "simplex: dimension mismatch");
        return project_simplex_euclidean(x);
      },
      [size](const Vector& x, double tol) {
        return x.size() == size && (x.array() >= -tol).all() && std::abs(x.sum() - 1.0) <= tol;
      });
}

MinkowskiResult minkowski_project(const Vector& x, const ProjectionOperator& pa,
                                  const ProjectionOperator& pb,
                                  const std::optional<Vector>& a0, const StopRule& stop) {
  stop.validate();
  require_finite(x, "minkowski_project x");
  MinkowskiResult result;
  Vector a = a0 ? pa(*a0) : pa(x);
  Vector b = pb(x - a);
  auto objective = [&x](const Vector& ap, const Vector& bp) {
    return 0.5 * (x - ap - bp).squaredNorm();
  };
  result.half_step_objectives.push_back(objective(a, b));

  for (std::size_t n = 0; n < stop.max_iters; ++n) {
    if (n > 0) {
      b = pb(x - a);
      result.half_step_objectives.push_back(objective(a, b));
    }
    Vector next = pa(x - b);
    result.half_step_objectives.push_back(objective(next, b));
    result.final_step_norm = (next - a).norm();
    a = std::move(next);
    result.iterations = n + 1;
    if (result.final_step_norm <= stop.step_tol) {
      result.converged = true;
      break;
    }
  }
  result.a_part = std::move(a);
  result.b_part = std::move(b);
  return result;
}

Map minkowski_map(const Vector& x, const ProjectionOperator& pa, const ProjectionOperator& pb) {
  return [x, pa, pb](const Vector& a) { return pa(x - pb(x - a)); };
}

FixedPointResult cyclic_fixed_point(std::span<const Map> maps, const Vector& x0,
                                    const StopRule& stop,
                                    std::optional<double> divergence_bound) {
  require(!maps.empty(), ErrorKind::InvalidParameter, "cyclic_fixed_point: no maps");
  stop.validate();
  require_finite(x0, "cyclic_fixed_point x0");
  const double bound = divergence_bound.value_or(1e8 * (1.0 + x0.norm()));

  FixedPointResult result;
  result.point = x0;
  double cycle_movement = 0.0;
  for (std::size_t n = 0; n < stop.max_iters; ++n) {
    Vector next = maps[n % maps.size()](result.point);
    require_finite(next, "cyclic_fixed_point iterate");
    cycle_movement += (next - result.point).norm();
    result.point = std::move(next);
    result.iterations = n + 1;
    if (result.point.norm() > bound) {
      fail(ErrorKind::Divergence, "cyclic_fixed_point: iterate norm exceeded the bound");
    }
    if ((n + 1) % maps.size() == 0) {
      if (cycle_movement <= stop.step_tol) {
        result.converged = true;
        break;
      }
      cycle_movement = 0.0;
    }
  }
  return result;
}

PropertyReport check_nonexpansive(const Map& op, std::span<const PointPair> pairs, double tol) {
  PropertyReport report;
  report.property = "nonexpansive";
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : pairs) {
    const double in = (x - y).norm();
    const double out = (op(x) - op(y)).norm();
    ++report.checked;
    if (in > 0.0) report.worst_ratio = std::max(report.worst_ratio, out / in);
    const double margin = in - out;
    report.worst_margin = std::min(report.worst_margin, margin);
    if (margin < -tol) ++report.violations;
  }
  report.passed = report.violations == 0;
  return report;
}

PropertyReport check_firmly_nonexpansive(const Map& op, std::span<const PointPair> pairs,
                                         double tol) {
  PropertyReport report;
  report.property = "firmly_nonexpansive";
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : pairs) {
    const Vector diff_out = op(x) - op(y);
    const Vector diff_in = x - y;
    const double margin = diff_in.dot(diff_out) - diff_out.squaredNorm();
    ++report.checked;
    if (diff_in.norm() > 0.0) {
      report.worst_ratio = std::max(report.worst_ratio, diff_out.norm() / diff_in.norm());
    }
    report.worst_margin = std::min(report.worst_margin, margin);
    if (margin < -tol) ++report.violations;
  }
  report.passed = report.violations == 0;
  return report;
}

PropertyReport check_paracontractive(const Map& op, const Vector& fixed_point,
                                     std::span<const Vector> samples) {
  require((op(fixed_point) - fixed_point).norm() <= 1e-8, ErrorKind::Precondition,
          "check_paracontractive: the supplied point is not fixed");
  PropertyReport report;
  report.property = "paracontractive";
  report.worst_margin = std::numeric_limits<double>::infinity();
  for (const Vector& x : samples) {
    const Vector tx = op(x);
    if ((tx - x).norm() <= 1e-8) {
      ++report.exempt;
      continue;
    }
    ++report.checked;
    const double before = (x - fixed_point).norm();
    const double after = (tx - fixed_point).norm();
    if (before > 0.0) report.worst_ratio = std::max(report.worst_ratio, after / before);
    const double margin = before - 1e-12 * before - after;
    report.worst_margin = std::min(report.worst_margin, margin);
    if (!(margin > 0.0)) ++report.violations;
  }
  report.passed = report.violations == 0;
  return report;
}

std::vector<PointPair> random_pairs(std::size_t dim, std::size_t count, double scale,
                                    std::mt19937_64& rng) {
  std::vector<PointPair> out;
  out.reserve(count);
  const auto points = random_points(dim, 2 * count, scale, rng);
  for (std::size_t i = 0; i < count; ++i) out.emplace_back(points[2 * i], points[2 * i + 1]);
  return out;
}

std::vector<Vector> random_points(std::size_t dim, std::size_t count, double scale,
                                  std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = normal(rng);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace mmkit::projection
