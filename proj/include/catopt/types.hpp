#pragma once

#include <Eigen/Core>

namespace catopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Terminal status of a solver run. Exactly one per run.
enum class Status {
  Optimal,
  MaxIterations,
  MaxTime,
  StepSizeLimit,
  SubproblemError,
  ConfigError,
};

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::MaxIterations: return "max_iterations";
    case Status::MaxTime: return "max_time";
    case Status::StepSizeLimit: return "step_size_limit";
    case Status::SubproblemError: return "subproblem_error";
    case Status::ConfigError: return "config_error";
  }
  return "unknown";
}

struct EvalCounts {
  long n_f = 0;
  long n_grad = 0;
  long n_hess = 0;
  long n_fact = 0;
};

}  // namespace catopt
