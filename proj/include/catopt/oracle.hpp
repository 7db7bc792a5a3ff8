#pragma once

#include <functional>
#include <stdexcept>

#include "catopt/types.hpp"

namespace catopt {

// A twice-differentiable objective: f, its gradient, its Hessian, and the
// problem dimension. Evaluations must be deterministic in x.
struct Objective {
  int dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
};

// Per-run wrapper counting every evaluation. One instance per solver run;
// distinct runs on distinct instances may proceed in parallel.
class CountingOracle {
 public:
  explicit CountingOracle(const Objective& inner) : inner_(&inner) {
    if (inner.dim <= 0 || !inner.value || !inner.gradient || !inner.hessian) {
      throw std::invalid_argument("objective must supply dim > 0, f, gradient and hessian");
    }
  }

  int dim() const { return inner_->dim; }

  double value(const Vector& x) {
    ++counts_.n_f;
    return inner_->value(x);
  }

  Vector gradient(const Vector& x) {
    ++counts_.n_grad;
    return inner_->gradient(x);
  }

  // Hessians are symmetrized as (H + H^T)/2 on ingestion; the downstream
  // Cholesky factorizations assume exact symmetry.
  Matrix hessian(const Vector& x) {
    ++counts_.n_hess;
    Matrix h = inner_->hessian(x);
    return ((h + h.transpose()) * 0.5).eval();
  }

  // Attempted Cholesky factorizations (successful or failed) are reported
  // here by the subproblem solver.
  void count_factorizations(long n) { counts_.n_fact += n; }

  const EvalCounts& counts() const { return counts_; }
  void reset() { counts_ = EvalCounts{}; }

 private:
  const Objective* inner_;
  EvalCounts counts_;
};

}  // namespace catopt
