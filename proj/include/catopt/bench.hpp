#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "catopt/types.hpp"

namespace catopt {

// One benchmark run of one solver on one problem.
struct BenchRecord {
  std::string problem;
  std::string solver;
  Status status = Status::SubproblemError;
  long iterations = 0;
  long n_f = 0;
  long n_grad = 0;
  long n_hess = 0;
  long n_fact = 0;
  double wall_seconds = 0.0;
  double f_final = 0.0;
  double grad_norm_final = 0.0;
};

inline const std::vector<std::string>& aggregate_metrics() {
  static const std::vector<std::string> metrics = {"n_f", "n_grad", "n_hess", "n_fact",
                                                   "wall_seconds"};
  return metrics;
}

// exp(mean(log(v + shift))) - shift.
inline double shifted_geometric_mean(const std::vector<double>& values, double shift) {
  if (values.empty()) throw std::invalid_argument("shifted_geometric_mean: empty input");
  double log_sum = 0.0;
  for (double v : values) {
    if (!(v + shift > 0.0)) {
      throw std::invalid_argument("shifted_geometric_mean: value + shift must be positive");
    }
    log_sum += std::log(v + shift);
  }
  return std::exp(log_sum / static_cast<double>(values.size())) - shift;
}

// Midpoint convention for even sizes.
inline double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Metric value with the failure substitution: runs that did not reach the
// tolerance contribute twice the iteration limit on count metrics and twice
// the time limit on wall time.
inline double penalized_metric(const BenchRecord& r, const std::string& metric, long max_iter,
                               double max_time) {
  const bool failed = r.status != Status::Optimal;
  if (metric == "wall_seconds") return failed ? 2.0 * max_time : r.wall_seconds;
  if (failed) return 2.0 * static_cast<double>(max_iter);
  if (metric == "n_f") return static_cast<double>(r.n_f);
  if (metric == "n_grad") return static_cast<double>(r.n_grad);
  if (metric == "n_hess") return static_cast<double>(r.n_hess);
  if (metric == "n_fact") return static_cast<double>(r.n_fact);
  if (metric == "iterations") return static_cast<double>(r.iterations);
  throw std::invalid_argument("unknown metric: " + metric);
}

struct AggregateRow {
  std::string solver;
  std::string metric;
  double shifted_geomean = 0.0;
  double median = 0.0;
};

// Per-solver, per-metric aggregates over a benchmark sweep, shift 1.0.
inline std::vector<AggregateRow> aggregate_records(const std::vector<BenchRecord>& records,
                                                   long max_iter, double max_time) {
  std::vector<std::string> solvers;
  for (const auto& r : records) {
    if (std::find(solvers.begin(), solvers.end(), r.solver) == solvers.end()) {
      solvers.push_back(r.solver);
    }
  }
  std::sort(solvers.begin(), solvers.end());
  std::vector<AggregateRow> rows;
  for (const auto& solver : solvers) {
    for (const auto& metric : aggregate_metrics()) {
      std::vector<double> values;
      for (const auto& r : records) {
        if (r.solver == solver) values.push_back(penalized_metric(r, metric, max_iter, max_time));
      }
      rows.push_back({solver, metric, shifted_geometric_mean(values, 1.0), median(values)});
    }
  }
  return rows;
}

struct ProfileRow {
  std::string metric;
  std::string solver;
  double budget = 0.0;
  double fraction = 0.0;
};

namespace detail {

inline std::vector<double> log_spaced_grid(double lo, double hi, int points) {
  std::vector<double> grid(points);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < points; ++i) {
    grid[i] = std::exp(a + (b - a) * static_cast<double>(i) / (points - 1));
  }
  return grid;
}

}  // namespace detail

// Fraction-of-problems-solved curves: for each budget metric, the fraction of
// problems a solver brought to the tolerance within budget x; plus the
// objective-difference-from-best curve, which counts every run whose final
// objective is within x of the best final objective across solvers.
inline std::vector<ProfileRow> performance_profile(const std::vector<BenchRecord>& records,
                                                   long max_iter, double max_time,
                                                   int grid_points = 64) {
  std::vector<std::string> solvers;
  std::vector<std::string> problems;
  for (const auto& r : records) {
    if (std::find(solvers.begin(), solvers.end(), r.solver) == solvers.end()) {
      solvers.push_back(r.solver);
    }
    if (std::find(problems.begin(), problems.end(), r.problem) == problems.end()) {
      problems.push_back(r.problem);
    }
  }
  std::sort(solvers.begin(), solvers.end());
  const double n_problems = static_cast<double>(problems.size());

  std::vector<ProfileRow> rows;
  const auto emit_metric = [&](const std::string& metric, const std::vector<double>& grid) {
    for (const auto& solver : solvers) {
      for (double budget : grid) {
        long solved = 0;
        for (const auto& r : records) {
          if (r.solver != solver || r.status != Status::Optimal) continue;
          if (penalized_metric(r, metric, max_iter, max_time) <= budget) ++solved;
        }
        rows.push_back({metric, solver, budget, solved / n_problems});
      }
    }
  };
  const auto count_grid = detail::log_spaced_grid(1.0, 2.0 * static_cast<double>(max_iter),
                                                  grid_points);
  emit_metric("n_f", count_grid);
  emit_metric("n_grad", count_grid);
  emit_metric("n_hess", count_grid);
  emit_metric("n_fact", count_grid);
  emit_metric("wall_seconds",
              detail::log_spaced_grid(1e-6, 2.0 * max_time, grid_points));

  // Objective difference from the best across all solvers, per problem.
  std::map<std::string, double> best_f;
  for (const auto& r : records) {
    auto it = best_f.find(r.problem);
    if (it == best_f.end() || r.f_final < it->second) best_f[r.problem] = r.f_final;
  }
  const auto diff_grid = detail::log_spaced_grid(1e-16, 1e8, grid_points);
  for (const auto& solver : solvers) {
    for (double budget : diff_grid) {
      long within = 0;
      for (const auto& r : records) {
        if (r.solver != solver) continue;
        if (r.f_final - best_f.at(r.problem) <= budget) ++within;
      }
      rows.push_back({"obj_diff_from_best", solver, budget, within / n_problems});
    }
  }
  return rows;
}

namespace detail {

inline std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

}  // namespace detail

// CSV writers. Schemas are versioned in a leading comment; records and
// aggregates carry the sweep limits so they can be recomputed independently.

inline void write_records_csv(const std::string& path, const std::vector<BenchRecord>& records,
                              long max_iter, double max_time) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# catopt-records v1 max_iter=" << max_iter
      << " max_time=" << detail::format_double(max_time) << "\n";
  out << "problem,solver,status,iterations,n_f,n_grad,n_hess,n_fact,wall_seconds,f_final,"
         "grad_norm_final\n";
  for (const auto& r : records) {
    out << r.problem << ',' << r.solver << ',' << to_string(r.status) << ',' << r.iterations
        << ',' << r.n_f << ',' << r.n_grad << ',' << r.n_hess << ',' << r.n_fact << ','
        << detail::format_double(r.wall_seconds) << ',' << detail::format_double(r.f_final)
        << ',' << detail::format_double(r.grad_norm_final) << "\n";
  }
}

inline void write_aggregates_csv(const std::string& path, const std::vector<AggregateRow>& rows,
                                 long max_iter, double max_time) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# catopt-aggregates v1 shift=1 max_iter=" << max_iter
      << " max_time=" << detail::format_double(max_time) << "\n";
  out << "solver,metric,shifted_geomean,median\n";
  for (const auto& r : rows) {
    out << r.solver << ',' << r.metric << ',' << detail::format_double(r.shifted_geomean) << ','
        << detail::format_double(r.median) << "\n";
  }
}

inline void write_profile_csv(const std::string& path, const std::vector<ProfileRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# catopt-profile v1\n";
  out << "metric,solver,budget,fraction\n";
  for (const auto& r : rows) {
    out << r.metric << ',' << r.solver << ',' << detail::format_double(r.budget) << ','
        << detail::format_double(r.fraction) << "\n";
  }
}

}  // namespace catopt
