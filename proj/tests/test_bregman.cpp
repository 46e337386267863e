#include <doctest.h>

#include <cmath>
#include <random>

#include "mmkit/bregman.hpp"
#include "mmkit/errors.hpp"
#include "mmkit/problems.hpp"
#include "mmkit/projection.hpp"

using namespace mmkit;
using namespace mmkit::bregman;

namespace {

ObjectiveFunction linear(const Vector& c) {
  ObjectiveFunction f;
  f.eval = [c](const Vector& x) { return c.dot(x); };
  f.gradient = [c](const Vector&) -> Vector { return c; };
  return f;
}

Vector gaussian(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidInput;
}

CompositeProblem random_composite(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
  Matrix a(n, d);
  for (Eigen::Index j = 0; j < d; ++j) a.col(j) = gaussian(n, rng);
  const Vector y = gaussian(n, rng);
  CompositeProblem p;
  p.smooth.eval = [a, y](const Vector& x) { return 0.5 * (a * x - y).squaredNorm(); };
  p.smooth.gradient = [a, y](const Vector& x) -> Vector { return a.transpose() * (a * x - y); };
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a.transpose() * a, Eigen::EigenvaluesOnly);
  p.smooth.smoothness_L = eig.eigenvalues().maxCoeff();
  std::uniform_real_distribution<double> lam(0.05, 1.0);
  p.nonsmooth = l1_term(lam(rng));
  return p;
}

}  // namespace

TEST_CASE("euclidean divergence is half the squared distance") {
  const auto g = euclidean_geometry();
  CHECK(bregman_divergence(g, Vector{{1.0, 2.0}}, Vector{{0.0, 0.0}}) == doctest::Approx(2.5));
}

TEST_CASE("divergence of a point from itself is zero") {
  std::mt19937_64 rng(1);
  const auto eu = euclidean_geometry(3.0);
  const auto ent = negative_entropy_geometry();
  for (int k = 0; k < 100; ++k) {
    const Vector x = gaussian(4, rng);
    CHECK(std::abs(bregman_divergence(eu, x, x)) <= 1e-14);
    const Vector p = x.cwiseAbs().array() + 0.01;
    CHECK(std::abs(bregman_divergence(ent, p, p)) <= 1e-14);
  }
}

TEST_CASE("negative entropy divergence is the KL divergence") {
  // oracle evaluated in long double
  const long double kl = 0.5L * std::log(0.5L / 0.25L) + 0.5L * std::log(0.5L / 0.75L);
  const double value =
      bregman_divergence(negative_entropy_geometry(), Vector{{0.5, 0.5}}, Vector{{0.25, 0.75}});
  CHECK(value == doctest::Approx(static_cast<double>(kl)).epsilon(1e-14));
  CHECK(value == doctest::Approx(0.1438).epsilon(1e-3));
}

TEST_CASE("divergence rejects points outside the domain") {
  const auto ent = negative_entropy_geometry();
  CHECK(kind_of([&] { bregman_divergence(ent, Vector{{0.0, 1.0}}, Vector{{0.5, 0.5}}); }) ==
        ErrorKind::Domain);
  CHECK(kind_of([&] { bregman_divergence(ent, Vector{{0.5, 0.5}}, Vector{{-0.5, 1.5}}); }) ==
        ErrorKind::Domain);
}

TEST_CASE("geometry invariants: inverse gradient and strong convexity") {
  std::mt19937_64 rng(2);
  const auto ent = negative_entropy_geometry();
  const auto eu = euclidean_geometry(2.0);
  for (int k = 0; k < 200; ++k) {
    const Vector x = problems::dirichlet_samples(5, 1, rng).front();
    const Vector y = problems::dirichlet_samples(5, 1, rng).front();
    CHECK((ent.conjugate_gradient(ent.gradient(x)) - x).cwiseAbs().maxCoeff() <= 1e-8);
    // 1-strong convexity w.r.t. the l1 norm on the simplex (Pinsker)
    const double l1 = (x - y).lpNorm<1>();
    CHECK(bregman_divergence(ent, x, y) >= 0.5 * l1 * l1 - 1e-12);

    const Vector u = gaussian(3, rng), v = gaussian(3, rng);
    CHECK((eu.conjugate_gradient(eu.gradient(u)) - u).norm() <= 1e-12);
    CHECK(bregman_divergence(eu, u, v) >= 0.5 * eu.strong_convexity_mu * (u - v).squaredNorm() - 1e-12);
  }
}

TEST_CASE("divergence positivity over seeded pairs, zero only on the diagonal") {
  std::mt19937_64 rng(3);
  const auto ent = negative_entropy_geometry();
  const auto eu = euclidean_geometry();
  for (int k = 0; k < 1000; ++k) {
    const Vector x = problems::dirichlet_samples(4, 1, rng).front();
    const Vector y = problems::dirichlet_samples(4, 1, rng).front();
    const double d = bregman_divergence(ent, x, y);
    CHECK(d >= -1e-12);
    if (d <= 1e-16) CHECK((x - y).norm() <= 1e-8);
    CHECK(bregman_divergence(eu, gaussian(3, rng), gaussian(3, rng)) >= 0.0);
  }
}

TEST_CASE("proximal gradient step examples") {
  // h = 0, f0 = 1/2||x - b||^2: b is fixed
  CompositeProblem quad;
  const Vector b{{1.0, -2.0, 0.5}};
  quad.smooth.eval = [b](const Vector& x) { return 0.5 * (x - b).squaredNorm(); };
  quad.smooth.gradient = [b](const Vector& x) -> Vector { return x - b; };
  quad.smooth.smoothness_L = 1.0;
  quad.nonsmooth = zero_term();
  CHECK((proximal_gradient_step(quad, b, 0.5) - b).norm() == 0.0);

  CompositeProblem scalar;
  scalar.smooth.eval = [](const Vector& x) { return 0.5 * (x(0) - 4.0) * (x(0) - 4.0); };
  scalar.smooth.gradient = [](const Vector& x) -> Vector { return Vector::Constant(1, x(0) - 4.0); };
  scalar.smooth.smoothness_L = 1.0;
  scalar.nonsmooth = l1_term(1.0);
  // grid-search oracle value, see the engine suite
  CHECK(proximal_gradient_step(scalar, Vector::Zero(1), 0.5)(0) == doctest::Approx(1.5));
}

TEST_CASE("step size validation") {
  CompositeProblem p;
  p.smooth.eval = [](const Vector& x) { return x.squaredNorm(); };
  p.smooth.gradient = [](const Vector& x) -> Vector { return 2.0 * x; };
  p.smooth.smoothness_L = 2.0;
  p.nonsmooth = l1_term(0.1);
  const Vector x = Vector::Ones(2);
  CHECK(kind_of([&] { proximal_gradient_step(p, x, 0.5); }) == ErrorKind::InvalidParameter);
  CHECK(kind_of([&] { proximal_gradient_step(p, x, 0.0); }) == ErrorKind::InvalidParameter);
  CHECK_NOTHROW(proximal_gradient_step(p, x, 0.49));
  StepOptions extended;
  extended.allow_extended_step = true;
  CHECK_NOTHROW(proximal_gradient_step(p, x, 0.9, extended));
  CHECK(kind_of([&] { proximal_gradient_step(p, x, 1.0, extended); }) ==
        ErrorKind::InvalidParameter);

  // weakly convex MCP needs rho * alpha < 1
  p.smooth.smoothness_L = 0.1;
  p.nonsmooth = mcp_term(1.0, 2.0);
  CHECK_NOTHROW(proximal_gradient_step(p, x, 1.9));
  CHECK(kind_of([&] { proximal_gradient_step(p, x, 2.0); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("MCP prox matches a grid-search oracle") {
  const auto h = mcp_term(1.0, 3.0);
  for (double v : {-4.0, -2.2, -0.7, 0.3, 1.4, 2.5, 3.5}) {
    const double t = 0.8;
    double best = 0.0, best_val = 1e300;
    for (int i = 0; i <= 200000; ++i) {
      const double x = -10.0 + 1e-4 * i;
      const double val = h.eval(Vector::Constant(1, x)) + (x - v) * (x - v) / (2.0 * t);
      if (val < best_val) {
        best_val = val;
        best = x;
      }
    }
    CHECK(h.prox(Vector::Constant(1, v), t)(0) == doctest::Approx(best).epsilon(2e-4));
  }
}

TEST_CASE("prox-grad step equals the generic MM step with the prox-grad geometry") {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    const auto p = random_composite(rng, 8, 5);
    const double alpha = 0.9 / p.smoothness();
    const Vector x = gaussian(5, rng);
    const auto factory = problems::proxgrad_factory(p, alpha, problems::InnerSolve::Iterative);
    StopRule one;
    one.max_iters = 1;
    RunOptions off;
    off.check_level = CheckLevel::Off;
    const auto trace = run_mm(p.objective(), *factory, x, one, off);
    CHECK((trace.iterates[1] - proximal_gradient_step(p, x, alpha)).cwiseAbs().maxCoeff() <=
          1e-8);
  }
}

TEST_CASE("mirror descent reductions") {
  std::mt19937_64 rng(5);
  ObjectiveFunction f;
  const Vector b{{1.0, 2.0, -1.0}};
  f.eval = [b](const Vector& x) { return 0.5 * (x - b).squaredNorm(); };
  f.gradient = [b](const Vector& x) -> Vector { return x - b; };
  f.smoothness_L = 1.0;
  const Vector x = gaussian(3, rng);
  const Vector md = mirror_descent_step(f, euclidean_geometry(), identity_projector(), x, 0.4);
  CHECK((md - (x - 0.4 * f.gradient(x))).norm() <= 1e-15);

  const Vector center = Vector::Constant(4, 0.25);
  const Vector same = mirror_descent_step(linear(Vector::Zero(4)), negative_entropy_geometry(),
                                          kl_simplex_projector(), center, 0.7);
  CHECK((same - center).cwiseAbs().maxCoeff() <= 1e-15);

  const auto detail = mirror_descent_step_detailed(f, euclidean_geometry(), identity_projector(), x, 0.4);
  CHECK((detail.dual_point - (x - 0.4 * f.gradient(x))).norm() <= 1e-15);
  CHECK(detail.mirrored == detail.next);
}

TEST_CASE("entropy mirror descent and exponentiated gradient agree") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> step(0.01, 2.0);
  for (int k = 0; k < 100; ++k) {
    const Vector c = gaussian(5, rng);
    const Vector x = problems::dirichlet_samples(5, 1, rng).front();
    const double alpha = step(rng);
    const auto f = linear(c);
    const Vector eg = exponentiated_gradient_step(f, x, alpha);
    const Vector md = mirror_descent_step(f, negative_entropy_geometry(), kl_simplex_projector(), x, alpha);
    CHECK((eg - md).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(eg.sum() - 1.0) <= 1e-12);
    CHECK((eg.array() > 0.0).all());
  }
}

TEST_CASE("mirror step outside the conjugate domain is a domain error") {
  const auto f = linear(Vector{{-1e6, 0.0}});
  CHECK(kind_of([&] {
          mirror_descent_step(f, negative_entropy_geometry(), kl_simplex_projector(),
                              Vector{{0.5, 0.5}}, 1.0);
        }) == ErrorKind::Domain);
  auto weak = euclidean_geometry(0.5);
  CHECK(kind_of([&] {
          mirror_descent_step(linear(Vector::Ones(2)), weak, identity_projector(),
                              Vector::Zero(2), 0.1);
        }) == ErrorKind::InvalidParameter);
}

TEST_CASE("mirror descent descends on convex smooth objectives") {
  std::mt19937_64 rng(7);
  const auto box = projection::box(Vector::Constant(3, -1.0), Vector::Constant(3, 1.0));
  for (int k = 0; k < 20; ++k) {
    const auto q = problems::random_quadratic(3, 0.5, 2.0, 100 + k);
    const auto f = q.objective();
    Vector x = box(gaussian(3, rng));
    for (int n = 0; n < 30; ++n) {
      const Vector next = mirror_descent_step(f, euclidean_geometry(), euclidean_projector(box), x,
                                              0.9 / q.L);
      CHECK(f(next) <= f(x) + 1e-12 * std::max(1.0, std::abs(f(x))));
      x = next;
    }
  }
}

TEST_CASE("exponentiated gradient examples") {
  const Vector x{{0.5, 0.5}};
  CHECK((exponentiated_gradient_step(linear(Vector::Zero(2)), x, 1.0) - x).norm() == 0.0);

  // oracle: closed-form softmax of log x - alpha c
  const double e = std::exp(-1.0);
  const Vector expected{{e / (1.0 + e), 1.0 / (1.0 + e)}};
  const Vector got = exponentiated_gradient_step(linear(Vector{{1.0, 0.0}}), x, 1.0);
  CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(got(0) == doctest::Approx(0.26894).epsilon(1e-4));
  CHECK(got(1) == doctest::Approx(0.73106).epsilon(1e-4));

  const Vector c{{0.3, -1.0, 2.0, 0.0}};
  const Vector uniform = Vector::Constant(4, 0.25);
  Vector weights = (-0.6 * c).array().exp();
  weights /= weights.sum();
  CHECK((exponentiated_gradient_step(linear(c), uniform, 0.6) - weights).cwiseAbs().maxCoeff() <=
        1e-15);
}

TEST_CASE("exponentiated gradient domain and underflow errors") {
  CHECK(kind_of([] { exponentiated_gradient_step(linear(Vector::Ones(2)), Vector{{0.0, 1.0}}, 1.0); }) ==
        ErrorKind::Domain);
  CHECK(kind_of([] { exponentiated_gradient_step(linear(Vector::Ones(2)), Vector{{0.3, 0.3}}, 1.0); }) ==
        ErrorKind::Domain);
  CHECK(kind_of([] {
          exponentiated_gradient_step(linear(Vector{{0.0, 1e6}}), Vector{{0.5, 0.5}}, 1.0);
        }) == ErrorKind::Numerical);
}

TEST_CASE("KL projection onto the simplex") {
  CHECK((kl_project_simplex(Vector{{2.0, 2.0}}) - Vector{{0.5, 0.5}}).norm() == 0.0);
  CHECK((kl_project_simplex(Vector{{1.0, 3.0}}) - Vector{{0.25, 0.75}}).norm() == 0.0);
  const Vector p{{0.2, 0.3, 0.5}};
  CHECK((kl_project_simplex(p) - p).norm() <= 1e-16);
  CHECK(kind_of([] { kl_project_simplex(Vector{{1.0, 0.0}}); }) == ErrorKind::Domain);
}

TEST_CASE("SUMMA holds for a Bregman factory with convex f") {
  std::mt19937_64 rng(8);
  const auto p = random_composite(rng, 10, 4);
  const double alpha = 0.5 / p.smoothness();
  const auto factory = problems::proxgrad_factory(p, alpha);
  const auto f = p.objective();
  Vector x = gaussian(4, rng);
  for (int n = 0; n < 20; ++n) {
    const Vector next = factory->build(x, n)->minimize();
    std::vector<Vector> samples;
    for (int s = 0; s < 50; ++s) samples.push_back(gaussian(4, rng, 3.0));
    samples.push_back(next);
    const auto r = check_summa(f, *factory, x, next, samples, n);
    CHECK(r.passed);
    // at x = x_{n+1} the right side vanishes and the left side is 0
    CHECK(std::abs(r.margins.back()) <= 1e-9);
    x = next;
  }
}

TEST_CASE("SUMMA fails for a nonconvex objective") {
  // f = -||x||^2 on [-1, 1]^2 with phi = 2||x||^2; the surrogate minimizer is
  // clip(2 x_n)
  ObjectiveFunction f;
  f.eval = [](const Vector& x) { return -x.squaredNorm(); };
  f.in_domain = [](const Vector& x) { return (x.cwiseAbs().array() <= 1.0).all(); };
  const auto geometry = euclidean_geometry(4.0);
  problems::BregmanSolver solver;
  solver.minimize = [](const Vector& a) -> Vector {
    return (2.0 * a).cwiseMax(-1.0).cwiseMin(1.0);
  };
  const auto factory = problems::bregman_factory(f, geometry, solver);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Vector xn{{0.2, -0.1}};
  const Vector next = factory->build(xn, 0)->minimize();
  std::vector<Vector> samples;
  for (int s = 0; s < 1000; ++s) samples.push_back(Vector{{u(rng), u(rng)}});
  const auto r = check_summa(f, *factory, xn, next, samples);
  CHECK_FALSE(r.passed);
  CHECK(r.worst_margin < -1e-3);
}
