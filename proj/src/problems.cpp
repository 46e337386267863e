#include "mmkit/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmkit/errors.hpp"

namespace mmkit::problems {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix haar_orthogonal(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(dim, dim);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (qr.matrixQR()(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

class QubSurrogate final : public Surrogate {
 public:
  QubSurrogate(const Vector& anchor, double f_anchor, Vector grad, double L)
      : Surrogate(anchor), f_anchor_(f_anchor), grad_(std::move(grad)), L_(L) {}

  double eval(const Vector& x) const override {
    const Vector d = x - anchor();
    return f_anchor_ + grad_.dot(d) + 0.5 * L_ * d.squaredNorm();
  }
  Vector minimize() const override { return anchor() - grad_ / L_; }
  Vector minimize_with_penalty(double rho) const override {
    return anchor() - grad_ / (L_ + rho);
  }
  std::optional<Vector> gradient_at_anchor() const override { return grad_; }

 private:
  double f_anchor_;
  Vector grad_;
  double L_;
};

class QubFactory final : public SurrogateFactory {
 public:
  explicit QubFactory(ObjectiveFunction f) : f_(std::move(f)) {}

  std::unique_ptr<Surrogate> build(const Vector& anchor, std::size_t) const override {
    return std::make_unique<QubSurrogate>(anchor, f_(anchor), f_.gradient(anchor),
                                          *f_.smoothness_L);
  }

 private:
  ObjectiveFunction f_;
};

class BregmanSurrogate final : public Surrogate {
 public:
  BregmanSurrogate(const Vector& anchor, const ObjectiveFunction& f,
                   const bregman::BregmanGeometry& geometry, const BregmanSolver& solver)
      : Surrogate(anchor), f_(f), geometry_(geometry), solver_(solver) {}

  double eval(const Vector& x) const override {
    if (x.size() != anchor().size() || !x.allFinite() || !geometry_.contains(x) ||
        !f_.contains(x)) {
      return kInf;
    }
    return f_(x) + bregman::bregman_divergence(geometry_, x, anchor());
  }
  Vector minimize() const override { return solver_.minimize(anchor()); }
  Vector minimize_with_penalty(double rho) const override {
    if (!solver_.minimize_with_penalty) return Surrogate::minimize_with_penalty(rho);
    return solver_.minimize_with_penalty(anchor(), rho);
  }
  Extras extras(const Vector& minimizer) const override {
    if (!solver_.extras) return {};
    return solver_.extras(anchor(), minimizer);
  }

 private:
  const ObjectiveFunction& f_;
  const bregman::BregmanGeometry& geometry_;
  const BregmanSolver& solver_;
};

class BregmanFactory final : public SurrogateFactory {
 public:
  BregmanFactory(ObjectiveFunction f, bregman::BregmanGeometry geometry, BregmanSolver solver,
                 Sampler sampler)
      : f_(std::move(f)),
        geometry_(std::move(geometry)),
        solver_(std::move(solver)),
        sampler_(std::move(sampler)) {}

  std::unique_ptr<Surrogate> build(const Vector& anchor, std::size_t) const override {
    require(geometry_.contains(anchor), ErrorKind::Domain,
            "bregman factory: anchor outside int dom phi");
    return std::make_unique<BregmanSurrogate>(anchor, f_, geometry_, solver_);
  }

  std::vector<Vector> dominance_samples(const Vector& anchor, std::size_t iteration,
                                        std::mt19937_64& rng,
                                        std::size_t count) const override {
    if (!sampler_) return SurrogateFactory::dominance_samples(anchor, iteration, rng, count);
    return sampler_(anchor, rng, count);
  }

 private:
  ObjectiveFunction f_;
  bregman::BregmanGeometry geometry_;
  BregmanSolver solver_;
  Sampler sampler_;
};

// argmin <c, x> + (1/(2t))||x - anchor||^2 + h(x) by proximal gradient with
// step t/2; the problem is (1/t)-strongly convex and (1/t)-smooth.
Vector inner_prox_solve(const bregman::ProximalTerm& h, const Vector& anchor, const Vector& c,
                        double t) {
  const double step = 0.5 * t;
  Vector z = anchor;
  for (int k = 0; k < 10000; ++k) {
    const Vector grad = c + (z - anchor) / t;
    const Vector next = h.prox(z - step * grad, step);
    const double residual = (next - z).norm() / step;
    z = next;
    if (residual <= kInnerTolerance) return z;
  }
  fail(ErrorKind::Numerical, "proxgrad inner solve did not reach its tolerance");
}

}  // namespace

double QuadraticProblem::eval(const Vector& x) const {
  return 0.5 * x.dot(hessian * x) - linear.dot(x);
}

Vector QuadraticProblem::gradient(const Vector& x) const { return hessian * x - linear; }

ObjectiveFunction QuadraticProblem::objective() const {
  ObjectiveFunction f;
  const Matrix h = hessian;
  const Vector b = linear;
  f.eval = [h, b](const Vector& x) { return 0.5 * x.dot(h * x) - b.dot(x); };
  f.gradient = [h, b](const Vector& x) -> Vector { return h * x - b; };
  f.strong_convexity_mu = mu;
  f.smoothness_L = L;
  if (minimizer) f.known_minimum = KnownMinimum{*minimizer, *min_value};
  return f;
}

QuadraticProblem make_quadratic(const Matrix& hessian, const Vector& linear) {
  require(hessian.rows() == hessian.cols() && hessian.rows() == linear.size(), ErrorKind::Shape,
          "quadratic: H must be square and match b");
  require_finite(hessian, "quadratic H");
  require_finite(linear, "quadratic b");
  const double scale = std::max(1.0, hessian.cwiseAbs().maxCoeff());
  require((hessian - hessian.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
          ErrorKind::InvalidInput, "quadratic: H must be symmetric");

  QuadraticProblem q;
  q.hessian = 0.5 * (hessian + hessian.transpose());
  q.linear = linear;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q.hessian, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  q.L = eig.eigenvalues().maxCoeff();
  require(q.L > 0.0, ErrorKind::InvalidInput, "quadratic: H must be nonzero");
  require(lo >= -1e-12 * q.L, ErrorKind::InvalidInput, "quadratic: H must be PSD");
  q.mu = std::max(0.0, lo);
  if (q.mu > 0.0) {
    q.minimizer = q.hessian.ldlt().solve(linear);
    q.min_value = -0.5 * linear.dot(*q.minimizer);
  }
  return q;
}

QuadraticProblem random_quadratic(std::size_t dim, double lo, double hi, std::uint64_t seed) {
  require(dim >= 2, ErrorKind::InvalidParameter, "random_quadratic: dim must be >= 2");
  require(0.0 < lo && lo <= hi, ErrorKind::InvalidParameter,
          "random_quadratic: need 0 < lo <= hi");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(lo, hi);
  Vector lambda(dim);
  lambda(0) = lo;
  lambda(dim - 1) = hi;
  for (std::size_t i = 1; i + 1 < dim; ++i) lambda(i) = uniform(rng);
  const Matrix q = haar_orthogonal(dim, rng);
  Matrix h = q * lambda.asDiagonal() * q.transpose();
  h = 0.5 * (h + h.transpose()).eval();
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector b(dim);
  for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = normal(rng);
  return make_quadratic(h, b);
}

FactoryPtr quadratic_upper_bound_factory(const ObjectiveFunction& f) {
  require(f.has_gradient(), ErrorKind::UnsupportedTrace,
          "quadratic upper bound: f needs a gradient");
  require(f.smoothness_L.has_value() && *f.smoothness_L > 0.0, ErrorKind::InvalidParameter,
          "quadratic upper bound: f needs a smoothness constant");
  return std::make_shared<QubFactory>(f);
}

FactoryPtr bregman_factory(const ObjectiveFunction& f, const bregman::BregmanGeometry& geometry,
                           BregmanSolver solver, Sampler sampler) {
  require(static_cast<bool>(solver.minimize), ErrorKind::InvalidParameter,
          "bregman factory: a minimizer is required");
  return std::make_shared<BregmanFactory>(f, geometry, std::move(solver), std::move(sampler));
}

FactoryPtr proxgrad_factory(const bregman::CompositeProblem& problem, double alpha,
                            InnerSolve inner, const bregman::StepOptions& options) {
  require(problem.smooth.has_gradient(), ErrorKind::InvalidParameter,
          "proxgrad factory: smooth part needs a gradient");
  bregman::validate_step_size(alpha, problem.smoothness(), options, "proxgrad factory");
  if (problem.nonsmooth.weak_convexity) {
    require(*problem.nonsmooth.weak_convexity * alpha < 1.0, ErrorKind::InvalidParameter,
            "proxgrad factory: weakly convex h needs rho * alpha < 1");
  }
  const ObjectiveFunction f0 = problem.smooth;
  const bregman::ProximalTerm h = problem.nonsmooth;

  // min <grad f0(x_n), x> + (1/(2t))||x - x_n||^2 + h(x)
  auto solve = [f0, h, inner](const Vector& anchor, double t) -> Vector {
    const Vector grad = f0.gradient(anchor);
    if (inner == InnerSolve::ClosedForm) return h.prox(anchor - t * grad, t);
    return inner_prox_solve(h, anchor, grad, t);
  };

  BregmanSolver solver;
  solver.minimize = [solve, alpha](const Vector& anchor) { return solve(anchor, alpha); };
  solver.minimize_with_penalty = [solve, alpha](const Vector& anchor, double rho) {
    return solve(anchor, 1.0 / (1.0 / alpha + rho));
  };
  return bregman_factory(problem.objective(), bregman::proximal_gradient_geometry(f0, alpha),
                         std::move(solver));
}

std::vector<Vector> dirichlet_samples(std::size_t dim, std::size_t count, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Vector x(dim);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = expo(rng) + 1e-300;
    out.push_back(x / x.sum());
  }
  return out;
}

FactoryPtr exponentiated_gradient_factory(const ObjectiveFunction& f, double alpha) {
  require(f.has_gradient(), ErrorKind::InvalidParameter,
          "exponentiated gradient factory: f needs a gradient");
  require(std::isfinite(alpha) && alpha > 0.0, ErrorKind::InvalidParameter,
          "exponentiated gradient factory: alpha must be positive");
  bregman::BregmanGeometry geometry =
      bregman::mirror_descent_geometry(bregman::negative_entropy_geometry(), f, alpha);
  geometry.in_interior = [](const Vector& x) { return bregman::on_open_simplex(x); };

  BregmanSolver solver;
  solver.minimize = [f, alpha](const Vector& anchor) {
    return bregman::exponentiated_gradient_step(f, anchor, alpha);
  };
  solver.extras = [f, alpha](const Vector& anchor, const Vector&) {
    return Extras{{"dual_point", Vector(anchor.array().log().matrix() - alpha * f.gradient(anchor))}};
  };
  Sampler sampler = [](const Vector& anchor, std::mt19937_64& rng, std::size_t count) {
    return dirichlet_samples(static_cast<std::size_t>(anchor.size()), count, rng);
  };
  return bregman_factory(f, geometry, std::move(solver), std::move(sampler));
}

FactoryPtr mirror_descent_factory(const ObjectiveFunction& f, const bregman::BregmanGeometry& psi,
                                  const bregman::BregmanProjector& project, double alpha,
                                  std::function<bool(const Vector&)> feasible) {
  bregman::BregmanGeometry geometry = bregman::mirror_descent_geometry(psi, f, alpha);
  if (feasible) {
    geometry.in_interior = [psi, feasible](const Vector& x) {
      return psi.contains(x) && feasible(x);
    };
  }
  BregmanSolver solver;
  solver.minimize = [f, psi, project, alpha](const Vector& anchor) {
    return bregman::mirror_descent_step(f, psi, project, anchor, alpha);
  };
  solver.extras = [f, psi, project, alpha](const Vector& anchor, const Vector&) {
    const auto step = bregman::mirror_descent_step_detailed(f, psi, project, anchor, alpha);
    return Extras{{"dual_point", step.dual_point}, {"mirrored", step.mirrored}};
  };
  return bregman_factory(f, geometry, std::move(solver));
}

double LassoProblem::eval(const Vector& x) const {
  return 0.5 * (design * x - response).squaredNorm() + lambda * x.lpNorm<1>();
}

Vector LassoProblem::smooth_gradient(const Vector& x) const {
  return design.transpose() * (design * x - response);
}

bregman::CompositeProblem LassoProblem::composite() const {
  bregman::CompositeProblem c;
  const Matrix a = design;
  const Vector y = response;
  c.smooth.eval = [a, y](const Vector& x) { return 0.5 * (a * x - y).squaredNorm(); };
  c.smooth.gradient = [a, y](const Vector& x) -> Vector { return a.transpose() * (a * x - y); };
  c.smooth.smoothness_L = L;
  c.nonsmooth = bregman::l1_term(lambda);
  return c;
}

LassoProblem lasso_desk(std::uint64_t seed) {
  constexpr std::size_t n = 40;
  constexpr std::size_t d = 20;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  LassoProblem p;
  p.design.resize(n, d);
  for (Eigen::Index j = 0; j < p.design.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.design.rows(); ++i) p.design(i, j) = normal(rng);
  }
  p.design /= std::sqrt(static_cast<double>(n));

  Vector truth = Vector::Zero(d);
  truth(1) = 1.5;
  truth(5) = -2.0;
  truth(9) = 1.0;
  truth(13) = -1.2;
  truth(17) = 0.8;
  Vector noise(n);
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise(i) = 0.01 * normal(rng);
  p.response = p.design * truth + noise;

  p.lambda = 0.1 * (p.design.transpose() * p.response).cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(p.design.transpose() * p.design,
                                            Eigen::EigenvaluesOnly);
  p.L = eig.eigenvalues().maxCoeff();
  p.alpha = 0.9 / p.L;
  return p;
}

double lasso_optimality_residual(const LassoProblem& p, const Vector& x) {
  const Vector g = p.smooth_gradient(x);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double r = x(i) != 0.0 ? std::abs(g(i) + p.lambda * (x(i) > 0.0 ? 1.0 : -1.0))
                                 : std::max(0.0, std::abs(g(i)) - p.lambda);
    worst = std::max(worst, r);
  }
  return worst;
}

Vector lasso_reference_solve(const LassoProblem& p, double tol, std::size_t max_sweeps) {
  const Matrix& a = p.design;
  const Eigen::Index d = a.cols();
  const Vector col_sq = a.colwise().squaredNorm().transpose();
  Vector x = Vector::Zero(d);
  Vector residual = p.response;  // y - A x
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double rho = a.col(j).dot(residual) + col_sq(j) * x(j);
      const double shrunk = std::copysign(std::max(0.0, std::abs(rho) - p.lambda), rho);
      const double next = shrunk / col_sq(j);
      if (next != x(j)) {
        residual -= (next - x(j)) * a.col(j);
        x(j) = next;
      }
    }
    residual = p.response - a * x;
    if (lasso_optimality_residual(p, x) <= tol) return x;
  }
  fail(ErrorKind::Numerical, "lasso reference solve did not reach its tolerance");
}

std::size_t SimplexLinearProblem::argmin() const {
  Eigen::Index i = 0;
  costs.minCoeff(&i);
  return static_cast<std::size_t>(i);
}

ObjectiveFunction SimplexLinearProblem::objective() const {
  ObjectiveFunction f;
  const Vector c = costs;
  f.eval = [c](const Vector& x) { return c.dot(x); };
  f.gradient = [c](const Vector&) -> Vector { return c; };
  Vector vertex = Vector::Zero(c.size());
  vertex(static_cast<Eigen::Index>(argmin())) = 1.0;
  f.known_minimum = KnownMinimum{vertex, c.minCoeff()};
  return f;
}

Vector SimplexLinearProblem::start() const {
  return Vector::Constant(costs.size(), 1.0 / static_cast<double>(costs.size()));
}

SimplexLinearProblem simplex_linear() {
  SimplexLinearProblem p;
  p.costs = Vector{{0.7, 0.2, 0.9, 0.4, 0.6}};
  p.alpha = 0.1;
  return p;
}

std::vector<ProblemInfo> problem_registry() {
  return {
      {"quad-small", "d = 10 quadratic, eigenvalues in [1, 4], quadratic upper bound MM"},
      {"lasso-desk", "n = 40, d = 20 lasso, proximal gradient with alpha = 0.9/L"},
      {"simplex-linear", "linear costs on the 5-simplex, exponentiated gradient"},
  };
}

}  // namespace mmkit::problems
