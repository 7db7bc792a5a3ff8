#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace catopt {

// Problem-independent parameters of the adaptive trust-region solver plus run
// limits. Defaults are the benchmark configuration.
struct SolverConfig {
  double theta = 0.1;   // coefficient of the extra term in the reduction ratio
  double beta = 0.1;    // success threshold on the ratio
  double sigma = 0.0;   // acceptance threshold on the ratio
  double omega1 = 8.0;  // radius shrink factor on unsuccessful steps
  double omega2 = 16.0; // radius growth factor on successful steps
  double gamma1 = 0.01; // residual budget factor in the subproblem criteria
  double gamma2 = 0.8;  // lower fraction of the radius in the criteria
  double gamma3 = 0.5;  // model-reduction factor in the criteria

  double eps_tol = 1e-5;              // gradient-norm termination tolerance
  std::optional<double> r1_override;  // explicit initial radius, bypasses the heuristic
  long max_iter = 100000;
  double max_time = 18000.0;          // seconds
  double step_size_limit = 2e-16;     // terminate when ||d_k|| falls below this

  // Coefficients of the function-increase tolerance
  // b_k = xi_hat * eps_k * ||d_k|| + abs_floor_coeff * (|f(x_k)| + 1).
  double xi_hat = 0.1;
  double abs_floor_coeff = 1e-8;

  // Ablation switches.
  bool use_classic_rho = false;        // plain reduction ratio instead of the padded one
  bool conference_radius_rule = false; // r <- omega1*||d|| / ||d||/omega1 instead of the default
  bool fixed_initial_radius = false;   // r1 = 1 instead of the scaling heuristic

  std::uint64_t seed = 0;  // drives the subproblem solver's random vectors

  bool collect_trace = false;
  std::size_t trace_limit = 1u << 20;
};

// Open upper bound on gamma1 implied by (theta, beta, gamma3).
inline double gamma1_upper_bound(double theta, double beta, double gamma3) {
  return 0.5 * (1.0 - beta * theta / (gamma3 * (1.0 - beta)));
}

// Checks every parameter constraint. Returns the first violated one as a
// human-readable inequality, or nullopt when the configuration is valid.
inline std::optional<std::string> validate_config(const SolverConfig& c) {
  if (!(c.theta > 0.0 && c.theta < 1.0)) return "theta must satisfy 0 < theta < 1";
  if (!(c.beta > 0.0 && c.beta < 1.0)) return "beta must satisfy 0 < beta < 1";
  if (!(c.sigma >= 0.0 && c.sigma <= c.beta)) return "sigma must satisfy 0 <= sigma <= beta";
  if (!(c.omega1 > 1.0)) return "omega1 must satisfy omega1 > 1";
  if (!(c.omega2 >= c.omega1)) return "omega2 must satisfy omega2 >= omega1";
  if (!(c.gamma2 > 1.0 / c.omega1 && c.gamma2 <= 1.0)) {
    return "gamma2 must satisfy 1/omega1 < gamma2 <= 1";
  }
  if (!(c.gamma3 > 0.0 && c.gamma3 <= 1.0)) return "gamma3 must satisfy 0 < gamma3 <= 1";
  if (!(c.gamma1 >= 0.0 && c.gamma1 < gamma1_upper_bound(c.theta, c.beta, c.gamma3))) {
    return "gamma1 must satisfy 0 <= gamma1 < (1 - beta*theta/(gamma3*(1-beta)))/2";
  }
  if (!(c.eps_tol > 0.0)) return "eps_tol must be positive";
  if (c.r1_override && !(*c.r1_override > 0.0)) return "r1_override must be positive";
  if (!(c.max_iter >= 1)) return "max_iter must be a positive integer";
  if (!(c.max_time > 0.0)) return "max_time must be positive";
  if (!(c.step_size_limit > 0.0)) return "step_size_limit must be positive";
  if (!(c.xi_hat > 0.0)) return "xi_hat must be positive";
  if (!(c.abs_floor_coeff >= 0.0)) return "abs_floor_coeff must be nonnegative";
  return std::nullopt;
}

}  // namespace catopt
