#pragma once

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

#include "catopt/model.hpp"
#include "catopt/types.hpp"

namespace catopt {

// Raised when the subproblem solver exhausts an iteration cap without
// producing a direction that certifies the termination criteria.
struct SubproblemError : std::runtime_error {
  explicit SubproblemError(const std::string& what) : std::runtime_error(what) {}
};

// All internal loops share one iteration cap.
inline constexpr int kTrsLoopCap = 100;

struct SubproblemInput {
  Vector g;
  Matrix H;               // symmetric
  double radius = 1.0;    // trust radius r > 0
  double eps_k = 0.0;     // epsilon at the start of the outer iteration
  double delta_warm = 0.0;
  double gamma1 = 0.01;
  double gamma2 = 0.8;
  double gamma3 = 0.5;
  std::uint64_t rng_seed = 0;
};

struct SubproblemSolution {
  Vector d;
  double delta = 0.0;
  bool hard_case = false;
  long factorizations = 0;
};

// Verifies the four termination criteria for the pair (d, delta):
//   (a) ||H d + g + delta d|| <= gamma1 eps_k
//   (b) gamma2 delta r <= delta ||d||
//   (c) ||d|| <= r
//   (d) m(d) <= -gamma3 (delta/2) ||d||^2
// Comparisons carry an allowance of `ulp_factor` rounding units of the
// magnitudes involved, so boundary solutions constructed to hold with
// equality are not rejected for last-ulp noise.
inline bool satisfies_termination_criteria(const Vector& g, const Matrix& H, double radius,
                                           double eps_k, double gamma1, double gamma2,
                                           double gamma3, const Vector& d, double delta,
                                           double ulp_factor = 8.0) {
  if (!d.allFinite() || !std::isfinite(delta) || delta < 0.0) return false;
  const double eps = std::numeric_limits<double>::epsilon();
  const double d_norm = d.norm();
  const Vector hd = H * d;

  const double residual = (hd + g + delta * d).norm();
  const double mag_a = hd.norm() + g.norm() + delta * d_norm;
  if (residual > gamma1 * eps_k + ulp_factor * eps * mag_a) return false;

  const double mag_b = delta * std::max(radius, d_norm);
  if (gamma2 * delta * radius > delta * d_norm + ulp_factor * eps * mag_b) return false;

  if (d_norm > radius * (1.0 + ulp_factor * eps)) return false;

  const double quad = 0.5 * d.dot(hd);
  const double lin = g.dot(d);
  const double mag_d = std::abs(quad) + std::abs(lin) + 0.5 * delta * d_norm * d_norm;
  if (quad + lin > -gamma3 * 0.5 * delta * d_norm * d_norm + ulp_factor * eps * mag_d) {
    return false;
  }
  return true;
}

inline bool satisfies_termination_criteria(const SubproblemInput& in, const Vector& d,
                                           double delta, double ulp_factor = 8.0) {
  return satisfies_termination_criteria(in.g, in.H, in.radius, in.eps_k, in.gamma1, in.gamma2,
                                        in.gamma3, d, delta, ulp_factor);
}

// Newton shortcut: if H is positive definite and the unconstrained minimizer
// lies inside the region, it certifies the criteria with delta = 0.
// Counts one factorization attempt either way.
inline std::optional<Vector> try_newton_step(const Vector& g, const Matrix& H, double radius,
                                             long& n_fact) {
  Eigen::LLT<Matrix> llt(H);
  ++n_fact;
  if (llt.info() != Eigen::Success) return std::nullopt;
  Vector d = llt.solve(-g);
  if (!d.allFinite() || d.norm() > radius) return std::nullopt;
  return d;
}

struct PhiResult {
  int sign = +1;                 // +1, 0 or -1
  std::optional<Vector> d;       // shifted Newton direction, when the factorization succeeded
  double certified_delta = 0.0;  // multiplier certified when sign == 0
};

// One factorization probe of the nonincreasing sign function phi(delta):
//   +1  H + delta I not positive definite, or ||d_delta|| > r
//    0  d_delta certifies the termination criteria
//   -1  ||d_delta|| < gamma2 r
// where d_delta = -(H + delta I)^{-1} g. A zero sign via the shifted residual
// certifies delta itself; a zero sign via the unshifted model gradient
// certifies delta = 0 (criteria (b) and (d) then hold trivially).
inline PhiResult phi(const SubproblemInput& in, double delta, long& n_fact) {
  PhiResult out;
  if (!std::isfinite(delta)) return out;
  Matrix shifted = in.H;
  shifted.diagonal().array() += delta;
  Eigen::LLT<Matrix> llt(shifted);
  ++n_fact;
  if (llt.info() != Eigen::Success) return out;
  Vector d = llt.solve(-in.g);
  if (!d.allFinite()) return out;
  const double d_norm = d.norm();
  out.d = std::move(d);
  if (d_norm > in.radius) return out;

  const Vector& dir = *out.d;
  const double budget = in.gamma1 * in.eps_k;
  if (d_norm >= in.gamma2 * in.radius && (in.H * dir + in.g + delta * dir).norm() <= budget) {
    out.sign = 0;
    out.certified_delta = delta;
    return out;
  }
  if ((in.H * dir + in.g).norm() <= budget) {
    out.sign = 0;
    out.certified_delta = 0.0;
    return out;
  }
  out.sign = (d_norm < in.gamma2 * in.radius) ? -1 : +1;
  return out;
}

// Geometric expansion away from the warm start until phi changes sign.
// Returns a bracket [lo, hi] with phi(lo) = +1 and phi(hi) = -1, or a
// degenerate [x, x] when a zero of phi is hit directly. The expansion
// multiplies by 2^(i^2) in the direction given by the sign at the base point
// (a zero warm start is replaced by 1 first).
inline std::pair<double, double> find_initial_interval(const SubproblemInput& in, long& n_fact) {
  double base = in.delta_warm;
  if (phi(in, base, n_fact).sign == 0) return {base, base};
  if (base == 0.0) base = 1.0;

  int direction = 0;
  for (int i = 1; i <= kTrsLoopCap; ++i) {
    const double x = (i == 1) ? base : std::ldexp(base, direction * (i - 1) * (i - 1));
    const int phi_x = phi(in, x, n_fact).sign;
    if (phi_x == 0) return {x, x};
    if (i == 1) direction = phi_x;
    const double y = std::ldexp(base, direction * i * i);
    const int phi_y = phi(in, y, n_fact).sign;
    if (phi_y == 0) return {y, y};
    if (phi_x * phi_y < 0) return {std::min(x, y), std::max(x, y)};
  }
  throw SubproblemError("find_initial_interval: no sign change within the iteration cap");
}

struct BisectionOutcome {
  double delta = 0.0;            // multiplier of the candidate direction
  double certified_delta = 0.0;  // multiplier to report with the direction
  Vector d;
  bool hard_case = false;
};

// Bisects a bracket with phi(lo) = +1, phi(hi) = -1 (or a degenerate zero
// interval). Stops at a zero of phi, or flags the hard case once the bracket
// is tight enough that an approximate minimum eigenvector can finish the job:
//   hi - lo <= gamma1 eps_k / (6r)  and  ||H d_hi + g + hi d_hi|| <= gamma1 eps_k / 3.
inline BisectionOutcome bisection(const SubproblemInput& in, double lo, double hi,
                                  long& n_fact) {
  const double budget = in.gamma1 * in.eps_k;
  std::optional<Vector> d_hi;  // direction at the current hi endpoint
  for (int i = 1; i <= kTrsLoopCap; ++i) {
    const double mid = 0.5 * (lo + hi);
    PhiResult pr = phi(in, mid, n_fact);
    if (pr.sign == 0) {
      return {mid, pr.certified_delta, std::move(*pr.d), false};
    }
    if (pr.sign > 0) {
      lo = mid;
    } else {
      hi = mid;
      d_hi = std::move(pr.d);
    }
    if (hi - lo <= budget / (6.0 * in.radius)) {
      if (!d_hi) {
        // hi has not been probed yet in this loop; solve once for its direction.
        Matrix shifted = in.H;
        shifted.diagonal().array() += hi;
        Eigen::LLT<Matrix> llt(shifted);
        ++n_fact;
        if (llt.info() == Eigen::Success) {
          Vector d = llt.solve(-in.g);
          if (d.allFinite()) d_hi = std::move(d);
        }
      }
      if (d_hi && (in.H * (*d_hi) + in.g + hi * (*d_hi)).norm() <= budget / 3.0) {
        return {hi, hi, *d_hi, true};
      }
    }
  }
  throw SubproblemError("bisection: iteration cap reached without a zero or a hard-case bracket");
}

// Root of ||d_base + alpha y|| = r, i.e. alpha^2 + 2 alpha (d_base.y) +
// ||d_base||^2 - r^2 = 0 for a unit vector y. Of the two roots, returns the
// one with the smaller model value.
inline double solve_boundary_alpha(const Vector& g, const Matrix& H, const Vector& d_base,
                                   const Vector& y_unit, double radius) {
  const double b = d_base.dot(y_unit);
  const double c = d_base.squaredNorm() - radius * radius;
  const double disc = b * b - c;
  if (disc < 0.0) throw SubproblemError("solve_boundary_alpha: negative discriminant");
  const double root = std::sqrt(disc);
  const double alpha_plus = -b + root;
  const double alpha_minus = -b - root;
  const double m_plus = model_value(g, H, d_base + alpha_plus * y_unit);
  const double m_minus = model_value(g, H, d_base + alpha_minus * y_unit);
  return m_plus <= m_minus ? alpha_plus : alpha_minus;
}

// Hard case: d_hi is the (interior) shifted Newton direction at delta_hi and
// the boundary must be reached along an approximate minimum eigenvector of H,
// computed by inverse power iteration on H + delta_hi I. One factorization is
// reused across all solves. Returns as soon as d_hi + alpha y certifies the
// full criteria with delta = delta_hi.
inline Vector inverse_power_iteration(const SubproblemInput& in, double delta_hi,
                                      const Vector& d_hi, long& n_fact) {
  Matrix shifted = in.H;
  shifted.diagonal().array() += delta_hi;
  Eigen::LLT<Matrix> llt(shifted);
  ++n_fact;
  if (llt.info() != Eigen::Success) {
    throw SubproblemError("inverse_power_iteration: shifted Hessian not positive definite");
  }

  std::mt19937_64 rng(in.rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector y(in.g.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = normal(rng);

  for (int i = 1; i <= kTrsLoopCap; ++i) {
    y = llt.solve(y);
    const double y_norm = y.norm();
    if (!y.allFinite() || !(y_norm > 0.0)) {
      throw SubproblemError("inverse_power_iteration: degenerate iterate");
    }
    y /= y_norm;
    const double alpha = solve_boundary_alpha(in.g, in.H, d_hi, y, in.radius);
    Vector d = d_hi + alpha * y;
    // Rounding can leave ||d|| a hair beyond r; pull it back onto the sphere.
    const double d_norm = d.norm();
    if (d_norm > in.radius && d_norm > 0.0) d *= in.radius / d_norm;
    if (satisfies_termination_criteria(in, d, delta_hi)) return d;
  }
  throw SubproblemError("inverse_power_iteration: iteration cap reached");
}

namespace detail {

inline SubproblemSolution solve_subproblem_pipeline(const SubproblemInput& in, long& n_fact) {
  if (auto newton = try_newton_step(in.g, in.H, in.radius, n_fact)) {
    if (satisfies_termination_criteria(in, *newton, 0.0)) {
      return {std::move(*newton), 0.0, false, 0};
    }
  }
  auto [lo, hi] = find_initial_interval(in, n_fact);
  BisectionOutcome out = bisection(in, lo, hi, n_fact);
  if (!out.hard_case) {
    if (!satisfies_termination_criteria(in, out.d, out.certified_delta)) {
      throw SubproblemError("bisection zero failed the termination criteria re-check");
    }
    return {std::move(out.d), out.certified_delta, false, 0};
  }
  Vector d = inverse_power_iteration(in, out.delta, out.d, n_fact);
  return {std::move(d), out.delta, true, 0};
}

}  // namespace detail

// Full pipeline: Newton shortcut, then the phi bracket/bisection, then the
// hard-case machinery. A failure is retried once with a slightly perturbed
// gradient g + (gamma1 eps_k / 2) u for a random unit u; the retry's direction
// must still certify against the original gradient. Factorization attempts
// accumulate into n_fact as they happen, including on failure.
inline SubproblemSolution solve_subproblem(const SubproblemInput& in, long& n_fact) {
  const long before = n_fact;
  try {
    SubproblemSolution s = detail::solve_subproblem_pipeline(in, n_fact);
    s.factorizations = n_fact - before;
    return s;
  } catch (const SubproblemError&) {
    SubproblemInput perturbed = in;
    std::mt19937_64 rng(in.rng_seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector u(in.g.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = normal(rng);
    const double u_norm = u.norm();
    if (u_norm > 0.0) u /= u_norm;
    perturbed.g = in.g + 0.5 * in.gamma1 * in.eps_k * u;

    SubproblemSolution s = detail::solve_subproblem_pipeline(perturbed, n_fact);
    if (!satisfies_termination_criteria(in, s.d, s.delta)) {
      throw SubproblemError("perturbed retry failed the criteria for the original gradient");
    }
    s.factorizations = n_fact - before;
    return s;
  }
}

inline SubproblemSolution solve_subproblem(const SubproblemInput& in) {
  long n_fact = 0;
  return solve_subproblem(in, n_fact);
}

}  // namespace catopt
