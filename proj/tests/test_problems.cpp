#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "mmkit/errors.hpp"
#include "mmkit/problems.hpp"
#include "shipped_factories.hpp"

using namespace mmkit;
using namespace mmkit::problems;

TEST_CASE("quadratic upper bound examples") {
  const auto half = make_quadratic(Matrix::Identity(1, 1), Vector::Zero(1));
  const auto f1 = half.objective();
  CHECK(quadratic_upper_bound_factory(f1)->build(Vector::Constant(1, 2.0), 0)->minimize()(0) == 0.0);

  const auto q = make_quadratic(Vector{{1.0, 4.0}}.asDiagonal(), Vector::Zero(2));
  const auto f = q.objective();
  const auto g = quadratic_upper_bound_factory(f)->build(Vector{{1.0, 1.0}}, 0);
  const Vector step = g->minimize();
  CHECK((step - Vector{{0.75, 0.0}}).norm() <= 1e-15);

  // oracle: grid search on the surrogate
  double best = std::numeric_limits<double>::infinity();
  Vector best_x;
  for (int i = 0; i <= 400; ++i) {
    for (int j = 0; j <= 400; ++j) {
      const Vector x{{-1.0 + 0.005 * i, -1.0 + 0.005 * j}};
      const double v = g->eval(x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
  }
  CHECK((best_x - step).cwiseAbs().maxCoeff() <= 0.005);

  // dominance margin at anchor + e_1 is (L - h_11)/2
  const Vector anchor{{1.0, 1.0}};
  const Vector x = anchor + Vector{{1.0, 0.0}};
  CHECK(g->eval(x) - f(x) == doctest::Approx((4.0 - 1.0) / 2.0));
}

TEST_CASE("quadratic upper bound needs a gradient and L") {
  ObjectiveFunction f;
  f.eval = [](const Vector& x) { return x.squaredNorm(); };
  f.smoothness_L = 2.0;
  CHECK_THROWS_AS(quadratic_upper_bound_factory(f), Error);
  f.gradient = [](const Vector& x) -> Vector { return 2.0 * x; };
  f.smoothness_L.reset();
  CHECK_THROWS_AS(quadratic_upper_bound_factory(f), Error);
}

TEST_CASE("make_quadratic constants and errors") {
  const auto q = make_quadratic(Vector{{1.0, 2.0, 5.0}}.asDiagonal(), Vector{{1.0, 2.0, 5.0}});
  CHECK(q.mu == doctest::Approx(1.0));
  CHECK(q.L == doctest::Approx(5.0));
  CHECK((*q.minimizer - Vector::Ones(3)).norm() <= 1e-14);
  CHECK(*q.min_value == doctest::Approx(-4.0));
  CHECK(q.eval(*q.minimizer) == doctest::Approx(*q.min_value));

  Matrix asym(2, 2);
  asym << 1.0, 0.5, 0.4, 1.0;
  CHECK_THROWS_AS(make_quadratic(asym, Vector::Zero(2)), Error);
  CHECK_THROWS_AS(make_quadratic(Vector{{1.0, -1.0}}.asDiagonal(), Vector::Zero(2)), Error);
  CHECK_THROWS_AS(make_quadratic(Matrix::Identity(2, 2), Vector::Zero(3)), Error);
}

TEST_CASE("random quadratic attains its eigenvalue endpoints") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto q = random_quadratic(6, 0.5, 8.0, seed);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(q.hessian);
    CHECK(eig.eigenvalues().minCoeff() == doctest::Approx(0.5));
    CHECK(eig.eigenvalues().maxCoeff() == doctest::Approx(8.0));
    CHECK(q.mu == doctest::Approx(0.5));
    CHECK(q.L == doctest::Approx(8.0));
    CHECK((q.hessian - q.hessian.transpose()).norm() <= 1e-12);
  }
  const auto a = random_quadratic(4, 1.0, 2.0, 9);
  const auto b = random_quadratic(4, 1.0, 2.0, 9);
  CHECK(a.hessian == b.hessian);
  CHECK(a.linear == b.linear);
}

TEST_CASE("Bregman factory examples") {
  // Euclidean phi = ||x||^2/(2 alpha) - f0 reproduces the prox-grad surrogate
  const auto lasso = lasso_desk();
  const auto composite = lasso.composite();
  const auto factory = proxgrad_factory(composite, lasso.alpha);
  std::mt19937_64 rng(41);
  for (int k = 0; k < 20; ++k) {
    const Vector anchor = testing::gaussian_vector(20, rng, 1.0);
    const auto g = factory->build(anchor, 0);
    const Vector grad = lasso.smooth_gradient(anchor);
    const double f0 = 0.5 * (lasso.design * anchor - lasso.response).squaredNorm();
    for (int j = 0; j < 5; ++j) {
      const Vector x = testing::gaussian_vector(20, rng, 1.0);
      const double expected = f0 + grad.dot(x - anchor) + (x - anchor).squaredNorm() / (2.0 * lasso.alpha) +
                              lasso.lambda * x.lpNorm<1>();
      CHECK(g->eval(x) == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(g->eval(anchor) == doctest::Approx(lasso.eval(anchor)).epsilon(1e-14));
  }

  // entropy geometry with linear f gives the exponentiated-gradient iterate
  const auto simplex = simplex_linear();
  const auto sf = simplex.objective();
  const auto eg = exponentiated_gradient_factory(sf, simplex.alpha);
  const Vector x0 = simplex.start();
  const Vector expected = bregman::exponentiated_gradient_step(sf, x0, simplex.alpha);
  CHECK((eg->build(x0, 0)->minimize() - expected).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(eg->build(x0, 0)->eval(x0) == doctest::Approx(sf(x0)).epsilon(1e-15));

  // anchor outside int dom phi
  CHECK_THROWS_AS(eg->build(Vector{{0.0, 0.5, 0.5, 0.0, 0.0}}, 0), Error);
}

TEST_CASE("every shipped factory majorizes at 100 anchors") {
  for (const auto& c : testing::shipped_factory_cases()) {
    CAPTURE(c.name);
    const auto sweep = testing::sweep_majorization(c, 100, 50, 42);
    CHECK(sweep.anchors == 100);
    CHECK(sweep.failures == 0);
    CHECK(sweep.worst_tangency <= 1e-9);
    CHECK(sweep.worst_dominance >= -1e-9);
  }
}

TEST_CASE("quadratic upper bound MM contracts at the proof-chain rate") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto q = random_quadratic(8, 1.0, 5.0, seed);
    const auto f = q.objective();
    StopRule stop;
    stop.max_iters = 100;
    stop.step_tol = 0.0;
    const auto t = run_mm(f, *quadratic_upper_bound_factory(f), Vector::Constant(8, 4.0), stop);
    const double factor = 1.0 - q.mu * q.mu / (2.0 * q.L * q.L);
    for (std::size_t n = 0; n + 1 < t.objective_values.size(); ++n) {
      const double gap = t.objective_values[n] - *q.min_value;
      if (gap <= 1e-12) break;
      CHECK(t.objective_values[n + 1] - *q.min_value <= factor * gap + 1e-12);
    }
  }
}

TEST_CASE("iterative and closed-form prox-grad inner solves agree") {
  const auto lasso = lasso_desk();
  const auto composite = lasso.composite();
  const auto closed = proxgrad_factory(composite, lasso.alpha);
  const auto iterative = proxgrad_factory(composite, lasso.alpha, InnerSolve::Iterative);
  std::mt19937_64 rng(43);
  for (int k = 0; k < 50; ++k) {
    const Vector anchor = testing::gaussian_vector(20, rng, 1.0);
    const Vector a = closed->build(anchor, 0)->minimize();
    const Vector b = iterative->build(anchor, 0)->minimize();
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-8);
    const Vector pa = closed->build(anchor, 0)->minimize_with_penalty(0.3);
    const Vector pb = iterative->build(anchor, 0)->minimize_with_penalty(0.3);
    CHECK((pa - pb).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("lasso desk problem and reference solve") {
  const auto lasso = lasso_desk();
  CHECK(lasso.design.rows() == 40);
  CHECK(lasso.design.cols() == 20);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(lasso.design.transpose() * lasso.design);
  CHECK(lasso.L == doctest::Approx(eig.eigenvalues().maxCoeff()));
  CHECK(lasso.alpha == doctest::Approx(0.9 / lasso.L));
  CHECK(lasso.lambda ==
        doctest::Approx(0.1 * (lasso.design.transpose() * lasso.response).lpNorm<Eigen::Infinity>()));

  const Vector x = lasso_reference_solve(lasso);
  CHECK(lasso_optimality_residual(lasso, x) <= 1e-12);
  // oracle: no coordinate perturbation improves the objective
  const double fx = lasso.eval(x);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    for (double h : {-1e-4, 1e-4}) {
      Vector y = x;
      y(i) += h;
      CHECK(lasso.eval(y) >= fx - 1e-14);
    }
  }
  CHECK(lasso_optimality_residual(lasso, Vector::Zero(20)) > 0.1);
  CHECK(lasso_desk(12345).response == lasso.response);
}

TEST_CASE("simplex linear problem") {
  const auto p = simplex_linear();
  CHECK(p.argmin() == 1);
  CHECK((p.start() - Vector::Constant(5, 0.2)).norm() <= 1e-15);
  const auto f = p.objective();
  REQUIRE(f.known_minimum.has_value());
  CHECK(f(Vector::Unit(5, 1)) == doctest::Approx(0.2));
}

TEST_CASE("problem registry names") {
  std::vector<std::string> names;
  for (const auto& info : problem_registry()) names.push_back(info.name);
  CHECK(names == std::vector<std::string>{"quad-small", "lasso-desk", "simplex-linear"});
}
