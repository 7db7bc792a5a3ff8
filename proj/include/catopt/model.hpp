#pragma once

#include <limits>

#include "catopt/types.hpp"

namespace catopt {

// Quadratic model of f around the current iterate: m(d) = d'Hd/2 + g'd.
inline double model_value(const Vector& g, const Matrix& H, const Vector& d) {
  return 0.5 * d.dot(H * d) + g.dot(d);
}

// Gradient of the shifted model: H d + g + delta d.
inline Vector model_gradient(const Vector& g, const Matrix& H, const Vector& d, double delta) {
  return H * d + g + delta * d;
}

namespace detail {
// Sign-correct sentinel for a vanishing predicted reduction: the ratio is
// only ever compared against thresholds, so +/-inf and 0 preserve every
// downstream decision.
inline double ratio_with_sentinel(double num, double denom) {
  if (denom == 0.0) {
    if (num > 0.0) return std::numeric_limits<double>::infinity();
    if (num < 0.0) return -std::numeric_limits<double>::infinity();
    return 0.0;
  }
  return num / denom;
}
}  // namespace detail

// Classic actual-to-predicted reduction ratio.
inline double rho_classic(double f0, double f_trial, double m_val) {
  return detail::ratio_with_sentinel(f0 - f_trial, -m_val);
}

// Modified ratio: the predicted reduction is padded with
// (theta/2) * min(||g||, ||g_trial||) * ||d||, which guarantees a function
// reduction proportional to the gradient norm on successful steps.
inline double rho_hat(double f0, double f_trial, double m_val, double min_grad_norm,
                      double d_norm, double theta) {
  return detail::ratio_with_sentinel(f0 - f_trial,
                                     -m_val + 0.5 * theta * min_grad_norm * d_norm);
}

}  // namespace catopt
