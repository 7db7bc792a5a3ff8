#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "catopt/oracle.hpp"
#include "catopt/solver.hpp"
#include "catopt/types.hpp"

namespace catopt {

// Parameters of gradient descent with the backtracking (Armijo) rule.
struct ArmijoConfig {
  double eta0 = 1.0;  // initial step size
  double c = 1e-4;    // sufficient-decrease constant
  double mu = 0.5;    // backtracking factor
  double eps_tol = 1e-5;
  long max_iter = 100000;
  double max_time = 18000.0;
  bool collect_trace = false;
  std::size_t trace_limit = 1u << 20;
};

inline std::optional<std::string> validate_armijo_config(const ArmijoConfig& c) {
  if (!(c.eta0 > 0.0)) return "eta0 must be positive";
  if (!(c.c > 0.0 && c.c < 1.0)) return "c must satisfy 0 < c < 1";
  if (!(c.mu > 0.0 && c.mu < 1.0)) return "mu must satisfy 0 < mu < 1";
  if (!(c.eps_tol > 0.0)) return "eps_tol must be positive";
  if (!(c.max_iter >= 1)) return "max_iter must be a positive integer";
  if (!(c.max_time > 0.0)) return "max_time must be positive";
  return std::nullopt;
}

inline constexpr int kArmijoBacktrackCap = 100;

struct ArmijoStep {
  double eta = 0.0;
  Vector x_next;
  double f_next = 0.0;
  long backtracks = 0;  // the accepted index i
};

// Forward scan for the smallest i >= 0 such that eta_prev mu^i satisfies
// f(x - eta g) <= f(x) - c eta ||g||^2. The base step never grows, so eta is
// nonincreasing across iterations. Returns nullopt past the backtrack cap.
inline std::optional<ArmijoStep> armijo_step(CountingOracle& oracle, const Vector& x,
                                             double f_x, const Vector& g, double eta_prev,
                                             double c, double mu) {
  const double g_sq = g.squaredNorm();
  double eta = eta_prev;
  for (int i = 0; i <= kArmijoBacktrackCap; ++i) {
    Vector x_next = x - eta * g;
    const double f_next = oracle.value(x_next);
    if (f_next <= f_x - c * eta * g_sq) {
      return ArmijoStep{eta, std::move(x_next), f_next, i};
    }
    eta *= mu;
  }
  return std::nullopt;
}

struct GdTraceRecord {
  long k = 0;
  Vector x;          // iterate before the step
  double f = 0.0;
  double grad_norm = 0.0;
  double eta = 0.0;
  long backtracks = 0;
  double f_next = 0.0;
};

// Gradient descent with the Armijo rule, sharing the counting oracle and
// result types with the trust-region solver (n_hess and n_fact stay zero).
inline SolveResult gd_solve(const Objective& objective, const Vector& x1,
                            const ArmijoConfig& cfg,
                            std::vector<GdTraceRecord>* trace = nullptr) {
  SolveResult result;
  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed = [&t_start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  if (auto err = validate_armijo_config(cfg)) {
    result.status = Status::ConfigError;
    result.message = *err;
    return result;
  }
  if (x1.size() != objective.dim) {
    result.status = Status::ConfigError;
    result.message = "starting point dimension does not match the objective";
    return result;
  }

  CountingOracle oracle(objective);
  const auto finish = [&](Status status, std::string message = {}) {
    result.status = status;
    result.message = std::move(message);
    result.counts = oracle.counts();
    result.wall_seconds = elapsed();
    return result;
  };

  Vector x = x1;
  double f = oracle.value(x);
  result.x_final = x;
  result.f_final = f;
  if (!std::isfinite(f)) {
    return finish(Status::SubproblemError, "non-finite objective value at the starting point");
  }
  double eta = cfg.eta0;

  for (long k = 1; k <= cfg.max_iter; ++k) {
    if (elapsed() > cfg.max_time) return finish(Status::MaxTime);
    Vector g = oracle.gradient(x);
    if (!g.allFinite()) return finish(Status::SubproblemError, "non-finite gradient");
    const double grad_norm = g.norm();
    result.x_final = x;
    result.f_final = f;
    result.grad_norm_final = grad_norm;
    if (grad_norm <= cfg.eps_tol) return finish(Status::Optimal);

    auto step = armijo_step(oracle, x, f, g, eta, cfg.c, cfg.mu);
    if (!step) {
      return finish(Status::SubproblemError, "backtracking cap reached without sufficient decrease");
    }
    if (!std::isfinite(step->f_next)) {
      return finish(Status::SubproblemError, "non-finite trial objective value");
    }
    if (trace && cfg.collect_trace && trace->size() < cfg.trace_limit) {
      trace->push_back({k, x, f, grad_norm, step->eta, step->backtracks, step->f_next});
    }
    result.iterations = k;
    x = std::move(step->x_next);
    f = step->f_next;
    eta = step->eta;
  }
  // Report the last point whose gradient was actually evaluated.
  return finish(Status::MaxIterations);
}

}  // namespace catopt
