#pragma once

#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "catopt/config.hpp"
#include "catopt/model.hpp"
#include "catopt/oracle.hpp"
#include "catopt/trs.hpp"
#include "catopt/types.hpp"

namespace catopt {

// One row per outer iteration, captured when SolverConfig::collect_trace is
// set. Everything the run invariants are stated in terms of.
struct TraceRecord {
  long k = 0;
  double f = 0.0;          // f(x_k)
  double grad_norm = 0.0;  // ||grad f(x_k)||
  double eps = 0.0;        // eps_k at the start of the iteration
  double radius = 0.0;     // r_k
  double step_norm = 0.0;  // ||d_k||
  double delta = 0.0;      // multiplier returned by the subproblem solver
  double f_trial = 0.0;
  double b_k = 0.0;
  double trial_grad_norm = std::numeric_limits<double>::quiet_NaN();  // NaN when skipped
  double rho = 0.0;        // reduction ratio used for the decisions
  bool trial_grad_evaluated = false;
  bool accepted = false;
  bool successful = false;
};

struct SolveResult {
  Status status = Status::ConfigError;
  std::string message;
  Vector x_final;                 // best tracked point
  double f_final = 0.0;
  double grad_norm_final = 0.0;   // equals the final eps for the trust-region solver
  long iterations = 0;
  EvalCounts counts;
  double wall_seconds = 0.0;
  std::vector<TraceRecord> trace;
};

// Spectral norm estimate by power iteration from a deterministic start
// vector. Estimates below 1e-30 are treated as an exactly zero Hessian by
// the radius heuristic.
inline double spectral_norm_estimate(const Matrix& H, int max_iter = 50, double rel_tol = 1e-6) {
  if (H.rows() == 0) return 0.0;
  Vector v = Vector::Ones(H.rows());
  v /= v.norm();
  double estimate = 0.0;
  for (int i = 0; i < max_iter; ++i) {
    Vector w = H * v;
    const double next = w.norm();
    if (!(next > 0.0)) return 0.0;  // start vector in the null space
    const bool converged = std::abs(next - estimate) <= rel_tol * next;
    estimate = next;
    if (converged) break;
    v = w / next;
  }
  return estimate;
}

// Initial radius: an explicit override wins, then the fixed-radius ablation,
// then the scaling heuristic 10 ||g1|| / ||H1||, with 1 as the fallback when
// the Hessian (or gradient) vanishes at the start.
inline double initial_radius(double grad_norm, const Matrix& H, const SolverConfig& cfg) {
  if (cfg.r1_override) return *cfg.r1_override;
  if (cfg.fixed_initial_radius) return 1.0;
  const double h_norm = spectral_norm_estimate(H);
  if (h_norm < 1e-30 || grad_norm == 0.0) return 1.0;
  return 10.0 * grad_norm / h_norm;
}

// Function-increase tolerance gating trial-gradient evaluation. The absolute
// floor keeps arithmetic noise near termination from suppressing the
// gradient check.
inline double function_increase_tolerance(double eps_k, double step_norm, double f_value,
                                          const SolverConfig& cfg) {
  return cfg.xi_hat * eps_k * step_norm + cfg.abs_floor_coeff * (std::abs(f_value) + 1.0);
}

// Radius update. Default rule: grow to max(omega2 ||d||, r) on successful
// steps, shrink to r/omega1 otherwise. The conference-rule ablation re-centers
// both branches on ||d||.
inline double radius_update(double radius, double step_norm, double rho,
                            const SolverConfig& cfg) {
  if (cfg.conference_radius_rule) {
    return rho >= cfg.beta ? cfg.omega1 * step_norm : step_norm / cfg.omega1;
  }
  return rho >= cfg.beta ? std::max(cfg.omega2 * step_norm, radius) : radius / cfg.omega1;
}

// Gated epsilon update: the trial gradient norm enters only when the trial
// value did not overshoot f by more than b_k.
inline double update_epsilon(double eps_k, double f_value, double f_trial, double b_k,
                             std::optional<double> trial_grad_norm) {
  if (f_trial <= f_value + b_k) {
    if (!trial_grad_norm) {
      throw std::logic_error("update_epsilon: trial gradient norm required on the qualifying branch");
    }
    return std::min(eps_k, *trial_grad_norm);
  }
  return eps_k;
}

inline bool accept_step(double f_value, double f_trial, double rho, double sigma) {
  return f_trial <= f_value && rho >= sigma;
}

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace detail

// The adaptive trust-region loop. Per iteration: solve the subproblem at
// (eps_k, warm-started delta), test the step-size limit, evaluate the trial
// value, lazily evaluate the trial gradient iff f_trial <= f + b_k, form the
// reduction ratio, decide acceptance, update eps/radius, and stop the moment
// eps reaches the tolerance. The returned point is the best gradient-norm
// point observed, which may be a trial point that was never accepted.
inline SolveResult solve(const Objective& objective, const Vector& x1, const SolverConfig& cfg) {
  SolveResult result;
  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed = [&t_start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  if (auto err = validate_config(cfg)) {
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

  double f = oracle.value(x1);
  if (!std::isfinite(f)) {
    result.x_final = x1;
    result.f_final = f;
    return finish(Status::SubproblemError, "non-finite objective value at the starting point");
  }
  Vector g = oracle.gradient(x1);
  if (!g.allFinite()) {
    result.x_final = x1;
    result.f_final = f;
    return finish(Status::SubproblemError, "non-finite gradient at the starting point");
  }
  double grad_norm = g.norm();
  double eps = grad_norm;

  Vector x = x1;
  // Best point: running argmin of the gradient norm over the start and every
  // qualifying trial point; eps is exactly this running minimum.
  result.x_final = x1;
  result.f_final = f;
  result.grad_norm_final = grad_norm;

  if (eps <= cfg.eps_tol) return finish(Status::Optimal);

  Matrix hessian = oracle.hessian(x);
  if (!hessian.allFinite()) {
    return finish(Status::SubproblemError, "non-finite Hessian at the starting point");
  }
  double radius = initial_radius(grad_norm, hessian, cfg);
  double delta_warm = 0.0;
  bool hessian_fresh = true;

  for (long k = 1; k <= cfg.max_iter; ++k) {
    if (elapsed() > cfg.max_time) return finish(Status::MaxTime);
    result.iterations = k;

    if (!hessian_fresh) {
      hessian = oracle.hessian(x);
      if (!hessian.allFinite()) return finish(Status::SubproblemError, "non-finite Hessian");
      hessian_fresh = true;
    }

    SubproblemInput input{g,          hessian,    radius,     eps,
                          delta_warm, cfg.gamma1, cfg.gamma2, cfg.gamma3,
                          detail::mix_seed(cfg.seed, static_cast<std::uint64_t>(k))};
    SubproblemSolution sol;
    long fact = 0;
    bool sub_ok = true;
    std::string sub_message;
    try {
      sol = solve_subproblem(input, fact);
    } catch (const SubproblemError& e) {
      sub_ok = false;
      sub_message = e.what();
    }
    oracle.count_factorizations(fact);
    if (!sub_ok) return finish(Status::SubproblemError, sub_message);
    assert(satisfies_termination_criteria(input, sol.d, sol.delta, 64.0));

    const double step_norm = sol.d.norm();
    if (step_norm < cfg.step_size_limit) return finish(Status::StepSizeLimit);

    const Vector x_trial = x + sol.d;
    const double f_trial = oracle.value(x_trial);
    if (!std::isfinite(f_trial)) {
      return finish(Status::SubproblemError, "non-finite trial objective value");
    }

    const double b_k = function_increase_tolerance(eps, step_norm, f, cfg);
    const bool qualifying = f_trial <= f + b_k;
    double trial_grad_norm = std::numeric_limits<double>::quiet_NaN();
    Vector g_trial;
    if (qualifying) {
      g_trial = oracle.gradient(x_trial);
      if (!g_trial.allFinite()) {
        return finish(Status::SubproblemError, "non-finite trial gradient");
      }
      trial_grad_norm = g_trial.norm();
      if (trial_grad_norm < result.grad_norm_final) {
        result.x_final = x_trial;
        result.f_final = f_trial;
        result.grad_norm_final = trial_grad_norm;
      }
    }

    // When the trial gradient was skipped the ratio falls back to ||g_k||;
    // that can only happen with a negative numerator, where every downstream
    // comparison already fails.
    const double min_grad_norm = qualifying ? std::min(grad_norm, trial_grad_norm) : grad_norm;
    const double m_val = model_value(g, hessian, sol.d);
    const double rho = cfg.use_classic_rho
                           ? rho_classic(f, f_trial, m_val)
                           : rho_hat(f, f_trial, m_val, min_grad_norm, step_norm, cfg.theta);
    const bool accepted = accept_step(f, f_trial, rho, cfg.sigma);
    const bool successful = rho >= cfg.beta;

    if (cfg.collect_trace && result.trace.size() < cfg.trace_limit) {
      result.trace.push_back({k, f, grad_norm, eps, radius, step_norm, sol.delta, f_trial, b_k,
                              trial_grad_norm, rho, qualifying, accepted, successful});
    }

    // Successful-step progress: rho >= beta forces a reduction of at least
    // (beta theta / 2) min(||g||, ||g_trial||) ||d||.
    assert(!(successful && qualifying && !cfg.use_classic_rho) ||
           f - f_trial >= cfg.beta * cfg.theta * 0.5 * min_grad_norm * step_norm *
                              (1.0 - 1e-12) -
                          1e-12 * std::abs(f));

    eps = update_epsilon(eps, f, f_trial, b_k,
                         qualifying ? std::optional<double>(trial_grad_norm) : std::nullopt);
    radius = radius_update(radius, step_norm, rho, cfg);
    delta_warm = sol.delta;
    if (accepted) {
      x = x_trial;
      f = f_trial;
      g = std::move(g_trial);
      grad_norm = trial_grad_norm;
      hessian_fresh = false;
    }
    if (eps <= cfg.eps_tol) return finish(Status::Optimal);
  }
  return finish(Status::MaxIterations);
}

}  // namespace catopt
