#include "catopt/gradient_descent.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <optional>

#include "catopt/problems.hpp"
#include "catopt/solver.hpp"

namespace catopt {
namespace {

Objective scalar_half_square() {
  Objective obj;
  obj.dim = 1;
  obj.value = [](const Vector& x) { return 0.5 * x[0] * x[0]; };
  obj.gradient = [](const Vector& x) { return x; };
  obj.hessian = [](const Vector&) { return Matrix::Identity(1, 1); };
  return obj;
}

// Brute-force scan of the sufficient-decrease set: the smallest qualifying
// backtracking index, computed directly from the oracle.
std::optional<long> smallest_qualifying_index(const Objective& obj, const Vector& x,
                                              double eta_prev, double c, double mu,
                                              int cap = 10) {
  const double f_x = obj.value(x);
  const Vector g = obj.gradient(x);
  const double g_sq = g.squaredNorm();
  double eta = eta_prev;
  for (int i = 0; i <= cap; ++i) {
    if (obj.value(x - eta * g) <= f_x - c * eta * g_sq) return i;
    eta *= mu;
  }
  return std::nullopt;
}

TEST(ArmijoStep, FullStepAcceptedAtEquality) {
  // f = x^2/2 at x = 1 with c = 1/2: the condition holds with equality at
  // eta = 1, so the scan accepts i = 0.
  const auto obj = scalar_half_square();
  CountingOracle oracle(obj);
  Vector x(1);
  x << 1.0;
  const auto step = armijo_step(oracle, x, 0.5, x, 1.0, 0.5, 0.5);
  ASSERT_TRUE(step.has_value());
  EXPECT_EQ(step->backtracks, 0);
  EXPECT_DOUBLE_EQ(step->eta, 1.0);
  EXPECT_DOUBLE_EQ(step->x_next[0], 0.0);
  EXPECT_DOUBLE_EQ(step->f_next, 0.0);
  EXPECT_EQ(oracle.counts().n_f, 1);  // one value probe per tested index
}

TEST(ArmijoStep, BacktracksMatchTheBruteForceScan) {
  const auto obj = scalar_half_square();
  CountingOracle oracle(obj);
  Vector x(1);
  x << 1.0;
  const auto expected = smallest_qualifying_index(obj, x, 4.0, 0.5, 0.5);
  ASSERT_TRUE(expected.has_value());
  const auto step = armijo_step(oracle, x, 0.5, x, 4.0, 0.5, 0.5);
  ASSERT_TRUE(step.has_value());
  EXPECT_EQ(step->backtracks, *expected);
  EXPECT_EQ(*expected, 2);  // eta = 4 * 0.5^2 = 1 is the first qualifying step
  EXPECT_DOUBLE_EQ(step->eta, 1.0);
  EXPECT_DOUBLE_EQ(step->x_next[0], 0.0);
  EXPECT_EQ(oracle.counts().n_f, 3);  // i = 0, 1, 2 were tested
}

TEST(ArmijoStep, TinyGradientAcceptsTheFirstIndex) {
  const auto problem = make_problem("rosenbrock", 2);
  CountingOracle oracle(problem.objective);
  Vector x = problem.spec.x1;
  // Near-stationary direction: the curvature term is second order, so i = 0
  // qualifies.
  Vector x_near(2);
  x_near << 1.0 + 1e-9, 1.0 + 2e-9;
  const double f_x = problem.objective.value(x_near);
  const Vector g = problem.objective.gradient(x_near);
  ASSERT_GT(g.norm(), 0.0);
  const auto step = armijo_step(oracle, x_near, f_x, g, 1e-3, 1e-4, 0.5);
  ASSERT_TRUE(step.has_value());
  EXPECT_EQ(step->backtracks, 0);
}

TEST(ArmijoStep, CapIsAFailure) {
  // A gradient direction that never achieves sufficient decrease: claim a
  // descent direction while the function increases along it.
  Objective obj;
  obj.dim = 1;
  obj.value = [](const Vector& x) { return x[0]; };
  obj.gradient = [](const Vector&) { return (-1.0 * Vector::Ones(1)).eval(); };
  obj.hessian = [](const Vector&) { return Matrix::Zero(1, 1); };
  CountingOracle oracle(obj);
  Vector x(1);
  x << 0.0;
  EXPECT_FALSE(armijo_step(oracle, x, 0.0, obj.gradient(x), 1.0, 0.5, 0.5).has_value());
  EXPECT_EQ(oracle.counts().n_f, kArmijoBacktrackCap + 1);
}

TEST(GdSolve, QuadraticDecreasesByTheArmijoAmountEachStep) {
  const auto problem = make_problem("convex_quadratic", 10);
  ArmijoConfig cfg;
  cfg.collect_trace = true;
  std::vector<GdTraceRecord> trace;
  const auto result = gd_solve(problem.objective, problem.spec.x1, cfg, &trace);
  EXPECT_EQ(result.status, Status::Optimal);
  EXPECT_LE(result.grad_norm_final, cfg.eps_tol);
  ASSERT_FALSE(trace.empty());
  for (const auto& t : trace) {
    // Exact recomputation of the accepted sufficient-decrease test.
    const Vector g = problem.objective.gradient(t.x);
    const double f_next = problem.objective.value(t.x - t.eta * g);
    EXPECT_EQ(f_next, t.f_next);
    EXPECT_LE(f_next, t.f - cfg.c * t.eta * g.squaredNorm());
  }
  // One gradient per iteration plus the terminating check.
  EXPECT_EQ(result.counts.n_grad, result.iterations + 1);
  EXPECT_EQ(result.counts.n_hess, 0);
  EXPECT_EQ(result.counts.n_fact, 0);
}

TEST(GdSolve, EtaNeverGrows) {
  const auto problem = make_problem("rosenbrock", 2);
  ArmijoConfig cfg;
  cfg.collect_trace = true;
  std::vector<GdTraceRecord> trace;
  gd_solve(problem.objective, problem.spec.x1, cfg, &trace);
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
    EXPECT_LE(trace[i + 1].eta, trace[i].eta);
  }
}

TEST(GdSolve, ImmediateOptimalityAtStationaryStart) {
  const auto problem = make_problem("sphere", 3);
  ArmijoConfig cfg;
  const auto result = gd_solve(problem.objective, Vector::Zero(3), cfg);
  EXPECT_EQ(result.status, Status::Optimal);
  EXPECT_EQ(result.iterations, 0);
  EXPECT_EQ(result.counts.n_grad, 1);
  EXPECT_EQ(result.counts.n_f, 1);
}

TEST(GdSolve, RosenbrockNeedsFarMoreGradientsThanTheTrustRegionSolver) {
  const auto problem = make_problem("rosenbrock", 2);
  ArmijoConfig acfg;
  const auto gd = gd_solve(problem.objective, problem.spec.x1, acfg);
  EXPECT_EQ(gd.status, Status::Optimal);

  SolverConfig cfg;
  const auto tr = solve(problem.objective, problem.spec.x1, cfg);
  EXPECT_EQ(tr.status, Status::Optimal);
  EXPECT_GT(gd.counts.n_grad, tr.counts.n_grad);
}

TEST(GdSolve, InvalidConfigurationIsReported) {
  const auto problem = make_problem("sphere", 2);
  ArmijoConfig cfg;
  cfg.mu = 1.5;
  const auto result = gd_solve(problem.objective, problem.spec.x1, cfg);
  EXPECT_EQ(result.status, Status::ConfigError);
  EXPECT_NE(result.message.find("mu"), std::string::npos);
}

TEST(GdSolve, MaxIterationsIsReported) {
  const auto problem = make_problem("rosenbrock", 2);
  ArmijoConfig cfg;
  cfg.max_iter = 5;
  const auto result = gd_solve(problem.objective, problem.spec.x1, cfg);
  EXPECT_EQ(result.status, Status::MaxIterations);
  EXPECT_EQ(result.iterations, 5);
}

}  // namespace
}  // namespace catopt
