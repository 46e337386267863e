#include <doctest.h>

#include <cmath>
#include <limits>

#include "mmkit/counterexamples.hpp"
#include "mmkit/engine.hpp"
#include "mmkit/errors.hpp"
#include "mmkit/problems.hpp"

using namespace mmkit;

namespace {

ObjectiveFunction square(double L) {
  ObjectiveFunction f;
  f.eval = [](const Vector& x) { return x.squaredNorm(); };
  f.gradient = [](const Vector& x) -> Vector { return 2.0 * x; };
  f.smoothness_L = L;
  return f;
}

// g(x|a) = f(x); minimize returns the known minimizer
FactoryPtr exact_factory(const ObjectiveFunction& f, Vector minimizer) {
  return make_factory([f, minimizer](const Vector& anchor, std::size_t) {
    CallbackSurrogate::Callbacks cb;
    cb.eval = f.eval;
    cb.minimize = [minimizer] { return minimizer; };
    return std::make_unique<CallbackSurrogate>(anchor, cb);
  });
}

bregman::CompositeProblem scalar_lasso(double b) {
  bregman::CompositeProblem p;
  p.smooth.eval = [b](const Vector& x) { return 0.5 * (x(0) - b) * (x(0) - b); };
  p.smooth.gradient = [b](const Vector& x) -> Vector { return Vector::Constant(1, x(0) - b); };
  p.smooth.smoothness_L = 1.0;
  p.nonsmooth = bregman::l1_term(1.0);
  return p;
}

}  // namespace

TEST_CASE("quadratic upper bound with matching curvature is exact: one step to 0") {
  const auto f = square(2.0);
  const auto factory = problems::quadratic_upper_bound_factory(f);
  const auto trace = run_mm(f, *factory, Vector::Constant(1, 1.0), StopRule{});
  REQUIRE(trace.iterations() >= 1);
  CHECK(trace.iterates[1](0) == 0.0);
  CHECK(trace.termination == Termination::Converged);
  CHECK(trace.final_iterate()(0) == 0.0);
}

TEST_CASE("prox-grad factory step matches a grid-search oracle on the surrogate") {
  // oracle: minimize the surrogate f0(x_n) + f0'(x_n)(x - x_n) + (x - x_n)^2/(2 alpha) + |x|
  // over [-6, 6] with step 1e-4
  const double b = 4.0, alpha = 0.5, xn = 0.0;
  double best_x = 0.0, best_g = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 120000; ++i) {
    const double x = -6.0 + 1e-4 * i;
    const double g = 0.5 * (xn - b) * (xn - b) + (xn - b) * (x - xn) +
                     (x - xn) * (x - xn) / (2.0 * alpha) + std::abs(x);
    if (g < best_g) {
      best_g = g;
      best_x = x;
    }
  }
  CHECK(best_x == doctest::Approx(1.5).epsilon(1e-4));

  const auto p = scalar_lasso(b);
  const auto factory = problems::proxgrad_factory(p, alpha, problems::InnerSolve::ClosedForm);
  StopRule stop;
  stop.max_iters = 1;
  const auto trace = run_mm(p.objective(), *factory, Vector::Zero(1), stop);
  CHECK(trace.iterates[1](0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(std::abs(trace.iterates[1](0) - best_x) <= 1e-4);
}

TEST_CASE("vaida factory cycles with period 2") {
  RunOptions options;
  options.cycle_detection = CycleDetection{};
  const counterexamples::VaidaState x0{3.0, 1.0 / std::sqrt(3.0)};
  const auto trace =
      run_mm(counterexamples::vaida_function(),
             *counterexamples::vaida_factory(counterexamples::SignRule::Alternating),
             x0.to_vector(), StopRule{}, options);
  CHECK(trace.termination == Termination::CycleDetected);
  REQUIRE(trace.detected_period.has_value());
  CHECK(*trace.detected_period == 2);
}

TEST_CASE("viscosity wrapper: small rho, tangency, parameter validation") {
  const auto f = square(4.0);
  const auto base = problems::quadratic_upper_bound_factory(f);
  const auto wrapped = wrap_viscosity(base, 1e-14);
  const Vector anchor = Vector::Constant(2, 0.7);
  const Vector x{{-1.0, 2.5}};
  CHECK(wrapped->build(anchor, 0)->eval(x) ==
        doctest::Approx(base->build(anchor, 0)->eval(x)).epsilon(1e-12));

  const auto visc = wrap_viscosity(base, 0.5);
  CHECK(visc->build(anchor, 0)->eval(anchor) == doctest::Approx(f(anchor)).epsilon(1e-15));
  CHECK(check_majorization(f, *visc, anchor, {x, anchor + Vector::Ones(2)}).passed);

  for (double bad : {0.0, -1.0, std::nan("")}) {
    try {
      wrap_viscosity(base, bad);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidParameter);
    }
  }
}

TEST_CASE("viscous Ten Berge run stops cycling") {
  const auto inst = counterexamples::build_tenberge_instance();
  const auto f = counterexamples::maxdiff_minimization_objective(inst.problem);
  const auto factory = wrap_viscosity(
      counterexamples::tenberge_factory(inst.problem, counterexamples::tenberge_cycling_policy()),
      0.1);
  StopRule stop;
  stop.max_iters = 500;
  RunOptions options;
  options.cycle_detection = CycleDetection{};
  const auto trace = run_mm(f, *factory, counterexamples::vectorize(inst.initial), stop, options);
  CHECK(trace.termination != Termination::CycleDetected);
  CHECK(trace.step_norms.back() < 1e-6);
}

TEST_CASE("check_majorization reports exact, understated and Bregman surrogates") {
  const auto f = square(2.0);
  const Vector anchor = Vector::Constant(1, 0.3);

  const auto exact = exact_factory(f, Vector::Zero(1));
  const auto r1 = check_majorization(f, *exact, anchor, {Vector::Constant(1, 1.3)});
  CHECK(r1.tangency_residual == 0.0);
  CHECK(r1.worst_dominance_margin == 0.0);
  CHECK(r1.passed);

  // L/2 = 1 understates the curvature 2; at anchor + 1 the margin is
  // a^2 + 2a + 1/2 - (a + 1)^2 = -1/2
  const auto low = problems::quadratic_upper_bound_factory(square(1.0));
  const auto r2 = check_majorization(f, *low, anchor, {anchor + Vector::Ones(1)});
  CHECK(r2.worst_dominance_margin == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK_FALSE(r2.passed);

  // f + B_phi(.||anchor) with phi = 1/2||.||^2: margin equals B_phi >= 0
  const auto geometry = bregman::euclidean_geometry();
  problems::BregmanSolver solver;
  solver.minimize = [](const Vector& a) -> Vector { return a / 3.0; };
  const auto breg = problems::bregman_factory(f, geometry, solver);
  std::vector<Vector> samples;
  for (int i = -5; i <= 5; ++i) samples.push_back(Vector::Constant(1, 0.4 * i));
  const auto r3 = check_majorization(f, *breg, anchor, samples);
  CHECK(r3.passed);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(r3.margins[i] ==
          doctest::Approx(bregman::bregman_divergence(geometry, samples[i], anchor)));
  }
}

TEST_CASE("descent violation carries the offending iteration") {
  const auto f = square(2.0);
  // moves away from the minimizer on the second iteration
  const auto bad = make_factory([f](const Vector& anchor, std::size_t n) {
    CallbackSurrogate::Callbacks cb;
    cb.eval = f.eval;
    cb.minimize = [anchor, n]() -> Vector { return n == 1 ? Vector(3.0 * anchor) : Vector(0.5 * anchor); };
    return std::make_unique<CallbackSurrogate>(anchor, cb);
  });
  try {
    run_mm(f, *bad, Vector::Constant(1, 1.0), StopRule{});
    FAIL("expected a descent violation");
  } catch (const DescentViolation& e) {
    CHECK(e.iteration() == 2);
    CHECK(e.before() == doctest::Approx(0.25));
    CHECK(e.after() == doctest::Approx(2.25));
    CHECK(e.kind() == ErrorKind::DescentViolation);
  }

  RunOptions record;
  record.record_errors = true;
  const auto trace = run_mm(f, *bad, Vector::Constant(1, 1.0), StopRule{}, record);
  CHECK(trace.termination == Termination::Error);
  CHECK(trace.iterations() == 1);

  RunOptions off;
  off.check_level = CheckLevel::Off;
  StopRule two;
  two.max_iters = 2;
  CHECK(run_mm(f, *bad, Vector::Constant(1, 1.0), two, off).iterations() == 2);
}

TEST_CASE("non-finite minimizer raises a numerical error") {
  const auto f = square(2.0);
  const auto nan_factory = make_factory([f](const Vector& anchor, std::size_t) {
    CallbackSurrogate::Callbacks cb;
    cb.eval = f.eval;
    cb.minimize = [] { return Vector::Constant(1, std::nan("")); };
    return std::make_unique<CallbackSurrogate>(anchor, cb);
  });
  try {
    run_mm(f, *nan_factory, Vector::Constant(1, 1.0), StopRule{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numerical);
  }
}

TEST_CASE("full checks catch a non-dominating surrogate") {
  const auto f = square(2.0);
  const auto low = problems::quadratic_upper_bound_factory(square(0.5));
  RunOptions options;
  options.check_level = CheckLevel::Full;
  options.record_errors = true;
  StopRule stop;
  stop.max_iters = 3;
  const auto trace = run_mm(f, *low, Vector::Constant(1, 1.0), stop, options);
  CHECK(trace.termination == Termination::Error);
}

TEST_CASE("stop rule validation and the objective test") {
  StopRule bad;
  bad.max_iters = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.max_iters = 5;
  bad.step_tol = -1.0;
  CHECK_THROWS_AS(bad.validate(), Error);

  const auto q = problems::random_quadratic(4, 1.0, 4.0, 1);
  const auto f = q.objective();
  StopRule stop;
  stop.objective_tol = 1e-3;
  stop.step_tol = 0.0;
  const auto trace =
      run_mm(f, *problems::quadratic_upper_bound_factory(f), Vector::Constant(4, 3.0), stop);
  CHECK(trace.termination == Termination::Converged);
  CHECK(trace.iterations() < 100);
}

TEST_CASE("invalid objective constants are rejected") {
  auto f = square(2.0);
  f.strong_convexity_mu = 3.0;
  CHECK_THROWS_AS(f.validate(), Error);
  f.strong_convexity_mu = -1.0;
  f.smoothness_L = std::nullopt;
  CHECK_THROWS_AS(f.validate(), Error);
}

TEST_CASE("traces: descent, gap nonnegativity, viscosity step control, reproducibility") {
  const auto lasso = problems::lasso_desk();
  const auto comp = lasso.composite();
  const auto f = comp.objective();
  const double rho = 0.3;
  const auto factory = wrap_viscosity(problems::proxgrad_factory(comp, lasso.alpha), rho);
  StopRule stop;
  stop.max_iters = 200;
  const Vector x0 = Vector::Zero(lasso.design.cols());
  const auto t1 = run_mm(f, *factory, x0, stop);
  const auto t2 = run_mm(f, *factory, x0, stop);
  REQUIRE(t1.iterations() == t2.iterations());
  for (std::size_t n = 0; n < t1.iterations(); ++n) {
    const double fn = t1.objective_values[n];
    const double fn1 = t1.objective_values[n + 1];
    CHECK(fn1 <= fn + 1e-12 * std::max(1.0, std::abs(fn)));
    CHECK(t1.surrogate_gaps[n] >= -1e-9);
    CHECK(0.5 * rho * t1.step_norms[n] * t1.step_norms[n] <= fn - fn1 + 1e-9);
    CHECK(t1.iterates[n + 1] == t2.iterates[n + 1]);
    CHECK(t1.objective_values[n + 1] == t2.objective_values[n + 1]);
  }
}

TEST_CASE("coarsening a block trace to sweeps") {
  const auto inst = counterexamples::build_tenberge_instance();
  const auto f = counterexamples::maxdiff_minimization_objective(inst.problem);
  const auto factory =
      counterexamples::tenberge_factory(inst.problem, counterexamples::tenberge_cycling_policy());
  StopRule stop;
  stop.max_iters = 12;
  const auto trace = run_mm(f, *factory, counterexamples::vectorize(inst.initial), stop);
  CHECK(trace.sweep_length == 3);
  const auto sweeps = trace.sweeps();
  CHECK(sweeps.iterations() == 4);
  CHECK(sweeps.iterates[1] == trace.iterates[3]);
  CHECK(sweeps.step_norms[0] == doctest::Approx((trace.iterates[3] - trace.iterates[0]).norm()));
}
