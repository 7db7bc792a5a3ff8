#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "catopt/oracle.hpp"
#include "catopt/types.hpp"

namespace catopt {

struct ProblemSpec {
  std::string name;
  int dim = 0;
  Vector x1;
  // Known stationary minimizer (x*, f*) for assertions, when one exists.
  std::optional<std::pair<Vector, double>> known_opt;
};

// Raised on malformed problem files, with line/field diagnostics.
struct ProblemParseError : std::runtime_error {
  explicit ProblemParseError(const std::string& what) : std::runtime_error(what) {}
};

struct Problem {
  Objective objective;
  ProblemSpec spec;
};

namespace detail {

inline Problem make_sphere(int n) {
  Objective obj;
  obj.dim = n;
  obj.value = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  obj.gradient = [](const Vector& x) { return x; };
  obj.hessian = [n](const Vector&) { return Matrix::Identity(n, n); };
  Vector x1 = Vector::Zero(n);
  x1[0] = 3.0;
  if (n > 1) x1[1] = 4.0;
  return {std::move(obj), {"sphere", n, std::move(x1), {{Vector::Zero(n), 0.0}}}};
}

// Diagonal convex quadratic with eigenvalues log-spaced in [1, kappa].
inline Problem make_convex_quadratic(int n, double kappa = 100.0) {
  Vector diag(n);
  for (int i = 0; i < n; ++i) {
    diag[i] = n > 1 ? std::pow(kappa, static_cast<double>(i) / (n - 1)) : 1.0;
  }
  Objective obj;
  obj.dim = n;
  obj.value = [diag](const Vector& x) { return 0.5 * x.dot(diag.asDiagonal() * x); };
  obj.gradient = [diag](const Vector& x) { return (diag.asDiagonal() * x).eval(); };
  obj.hessian = [diag](const Vector&) { return Matrix(diag.asDiagonal()); };
  return {std::move(obj),
          {"convex_quadratic", n, Vector::Ones(n), {{Vector::Zero(n), 0.0}}}};
}

// Chained Rosenbrock: sum over i of 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2.
inline Problem make_rosenbrock(int n) {
  Objective obj;
  obj.dim = n;
  obj.value = [](const Vector& x) {
    double f = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
      const double t = x[i + 1] - x[i] * x[i];
      const double u = 1.0 - x[i];
      f += 100.0 * t * t + u * u;
    }
    return f;
  };
  obj.gradient = [](const Vector& x) {
    Vector g = Vector::Zero(x.size());
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
      const double t = x[i + 1] - x[i] * x[i];
      g[i] += -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
      g[i + 1] += 200.0 * t;
    }
    return g;
  };
  obj.hessian = [](const Vector& x) {
    Matrix h = Matrix::Zero(x.size(), x.size());
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
      h(i, i) += 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0;
      h(i + 1, i + 1) += 200.0;
      h(i, i + 1) += -400.0 * x[i];
      h(i + 1, i) += -400.0 * x[i];
    }
    return h;
  };
  Vector x1(n);
  for (int i = 0; i < n; ++i) x1[i] = (i % 2 == 0) ? -1.2 : 1.0;
  return {std::move(obj), {"rosenbrock", n, std::move(x1), {{Vector::Ones(n), 0.0}}}};
}

// Pairwise (uncoupled) Rosenbrock blocks; dim must be even.
inline Problem make_extended_rosenbrock(int n) {
  Objective obj;
  obj.dim = n;
  obj.value = [](const Vector& x) {
    double f = 0.0;
    for (Eigen::Index j = 0; j + 1 < x.size(); j += 2) {
      const double t = x[j + 1] - x[j] * x[j];
      const double u = 1.0 - x[j];
      f += 100.0 * t * t + u * u;
    }
    return f;
  };
  obj.gradient = [](const Vector& x) {
    Vector g = Vector::Zero(x.size());
    for (Eigen::Index j = 0; j + 1 < x.size(); j += 2) {
      const double t = x[j + 1] - x[j] * x[j];
      g[j] = -400.0 * x[j] * t - 2.0 * (1.0 - x[j]);
      g[j + 1] = 200.0 * t;
    }
    return g;
  };
  obj.hessian = [](const Vector& x) {
    Matrix h = Matrix::Zero(x.size(), x.size());
    for (Eigen::Index j = 0; j + 1 < x.size(); j += 2) {
      h(j, j) = 1200.0 * x[j] * x[j] - 400.0 * x[j + 1] + 2.0;
      h(j + 1, j + 1) = 200.0;
      h(j, j + 1) = -400.0 * x[j];
      h(j + 1, j) = -400.0 * x[j];
    }
    return h;
  };
  Vector x1(n);
  for (int i = 0; i < n; ++i) x1[i] = (i % 2 == 0) ? -1.2 : 1.0;
  return {std::move(obj), {"extended_rosenbrock", n, std::move(x1), {{Vector::Ones(n), 0.0}}}};
}

// Powell's singular function in blocks of four; the Hessian is singular at
// the minimizer (the origin).
inline Problem make_powell_singular(int n) {
  Objective obj;
  obj.dim = n;
  obj.value = [](const Vector& x) {
    double f = 0.0;
    for (Eigen::Index j = 0; j + 3 < x.size(); j += 4) {
      const double a = x[j], b = x[j + 1], c = x[j + 2], d = x[j + 3];
      const double t1 = a + 10.0 * b;
      const double t2 = c - d;
      const double t3 = b - 2.0 * c;
      const double t4 = a - d;
      f += t1 * t1 + 5.0 * t2 * t2 + t3 * t3 * t3 * t3 + 10.0 * t4 * t4 * t4 * t4;
    }
    return f;
  };
  obj.gradient = [](const Vector& x) {
    Vector g = Vector::Zero(x.size());
    for (Eigen::Index j = 0; j + 3 < x.size(); j += 4) {
      const double a = x[j], b = x[j + 1], c = x[j + 2], d = x[j + 3];
      const double t1 = a + 10.0 * b;
      const double t2 = c - d;
      const double t3 = b - 2.0 * c;
      const double t4 = a - d;
      g[j] = 2.0 * t1 + 40.0 * t4 * t4 * t4;
      g[j + 1] = 20.0 * t1 + 4.0 * t3 * t3 * t3;
      g[j + 2] = 10.0 * t2 - 8.0 * t3 * t3 * t3;
      g[j + 3] = -10.0 * t2 - 40.0 * t4 * t4 * t4;
    }
    return g;
  };
  obj.hessian = [](const Vector& x) {
    Matrix h = Matrix::Zero(x.size(), x.size());
    for (Eigen::Index j = 0; j + 3 < x.size(); j += 4) {
      const double a = x[j], b = x[j + 1], c = x[j + 2], d = x[j + 3];
      const double t3 = b - 2.0 * c;
      const double t4 = a - d;
      h(j, j) = 2.0 + 120.0 * t4 * t4;
      h(j, j + 1) = h(j + 1, j) = 20.0;
      h(j, j + 3) = h(j + 3, j) = -120.0 * t4 * t4;
      h(j + 1, j + 1) = 200.0 + 12.0 * t3 * t3;
      h(j + 1, j + 2) = h(j + 2, j + 1) = -24.0 * t3 * t3;
      h(j + 2, j + 2) = 10.0 + 48.0 * t3 * t3;
      h(j + 2, j + 3) = h(j + 3, j + 2) = -10.0;
      h(j + 3, j + 3) = 10.0 + 120.0 * t4 * t4;
    }
    return h;
  };
  Vector x1(n);
  for (int i = 0; i < n; ++i) {
    switch (i % 4) {
      case 0: x1[i] = 3.0; break;
      case 1: x1[i] = -1.0; break;
      case 2: x1[i] = 0.0; break;
      default: x1[i] = 1.0; break;
    }
  }
  return {std::move(obj), {"powell_singular", n, std::move(x1), {{Vector::Zero(n), 0.0}}}};
}

inline Problem make_quadratic_objective(std::string name, Matrix a, Vector b, double c,
                                        Vector x1) {
  const int n = static_cast<int>(b.size());
  Matrix sym = 0.5 * (a + a.transpose());
  Objective obj;
  obj.dim = n;
  obj.value = [sym, b, c](const Vector& x) { return 0.5 * x.dot(sym * x) + b.dot(x) + c; };
  obj.gradient = [sym, b](const Vector& x) { return (sym * x + b).eval(); };
  obj.hessian = [sym](const Vector&) { return sym; };
  return {std::move(obj), {std::move(name), n, std::move(x1), std::nullopt}};
}

// Fixed 2-d indefinite quadratic with H = diag(1, -2) and b = (1, 1); the
// Newton shortcut must always fail on it.
inline Problem make_indefinite_quadratic(int n) {
  if (n != 2) throw std::invalid_argument("indefinite_quadratic is 2-dimensional");
  Matrix a(2, 2);
  a << 1.0, 0.0, 0.0, -2.0;
  Vector b(2);
  b << 1.0, 1.0;
  return make_quadratic_objective("indefinite_quadratic", std::move(a), std::move(b), 0.0,
                                  Vector::Zero(2));
}

// Quadratic whose gradient at the default start is exactly orthogonal to the
// minimum-eigenvalue eigenspace of the Hessian: H = diag(-1, 1, ..., 1),
// g(x1) = (0, 1, ..., 1)/sqrt(n-1) at x1 = 0.
inline Problem make_hard_case_synthetic(int n) {
  if (n < 2) throw std::invalid_argument("hard_case_synthetic needs dim >= 2");
  Matrix a = Matrix::Identity(n, n);
  a(0, 0) = -1.0;
  Vector b = Vector::Ones(n) / std::sqrt(static_cast<double>(n - 1));
  b[0] = 0.0;
  return make_quadratic_objective("hard_case_synthetic", std::move(a), std::move(b), 0.0,
                                  Vector::Zero(n));
}

}  // namespace detail

inline const std::vector<std::string>& builtin_problem_names() {
  static const std::vector<std::string> names = {
      "sphere",          "convex_quadratic",     "rosenbrock",
      "extended_rosenbrock", "powell_singular",  "indefinite_quadratic",
      "hard_case_synthetic"};
  return names;
}

inline int default_problem_dim(const std::string& name) {
  if (name == "sphere") return 2;
  if (name == "convex_quadratic") return 10;
  if (name == "rosenbrock") return 2;
  if (name == "extended_rosenbrock") return 8;
  if (name == "powell_singular") return 4;
  if (name == "indefinite_quadratic") return 2;
  if (name == "hard_case_synthetic") return 10;
  throw std::invalid_argument("unknown problem: " + name);
}

inline Problem make_problem(const std::string& name, int dim) {
  if (dim <= 0) throw std::invalid_argument("problem dimension must be positive");
  if (name == "sphere") return detail::make_sphere(dim);
  if (name == "convex_quadratic") return detail::make_convex_quadratic(dim);
  if (name == "rosenbrock") {
    if (dim < 2) throw std::invalid_argument("rosenbrock needs dim >= 2");
    return detail::make_rosenbrock(dim);
  }
  if (name == "extended_rosenbrock") {
    if (dim < 2 || dim % 2 != 0) {
      throw std::invalid_argument("extended_rosenbrock needs an even dim >= 2");
    }
    return detail::make_extended_rosenbrock(dim);
  }
  if (name == "powell_singular") {
    if (dim < 4 || dim % 4 != 0) {
      throw std::invalid_argument("powell_singular needs a dim divisible by 4");
    }
    return detail::make_powell_singular(dim);
  }
  if (name == "indefinite_quadratic") return detail::make_indefinite_quadratic(dim);
  if (name == "hard_case_synthetic") return detail::make_hard_case_synthetic(dim);
  throw std::invalid_argument("unknown problem: " + name);
}

struct FiniteDiffReport {
  double max_rel_err_grad = 0.0;
  double max_rel_err_hess = 0.0;
};

// Central-difference check of the analytic derivatives: gradient against
// values of f, Hessian against analytic gradients. Relative errors use the
// denominator max(1, |true value|).
inline FiniteDiffReport finite_diff_check(const Objective& obj, const Vector& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_check: h must be positive");
  FiniteDiffReport report;
  const Vector g = obj.gradient(x);
  const Matrix hess = obj.hessian(x);
  Vector probe = x;
  for (int i = 0; i < obj.dim; ++i) {
    probe[i] = x[i] + h;
    const double f_plus = obj.value(probe);
    probe[i] = x[i] - h;
    const double f_minus = obj.value(probe);
    probe[i] = x[i];
    const double est = (f_plus - f_minus) / (2.0 * h);
    const double err = std::abs(est - g[i]) / std::max(1.0, std::abs(g[i]));
    report.max_rel_err_grad = std::max(report.max_rel_err_grad, err);
  }
  for (int j = 0; j < obj.dim; ++j) {
    probe[j] = x[j] + h;
    const Vector g_plus = obj.gradient(probe);
    probe[j] = x[j] - h;
    const Vector g_minus = obj.gradient(probe);
    probe[j] = x[j];
    for (int i = 0; i < obj.dim; ++i) {
      const double est = (g_plus[i] - g_minus[i]) / (2.0 * h);
      const double err = std::abs(est - hess(i, j)) / std::max(1.0, std::abs(hess(i, j)));
      report.max_rel_err_hess = std::max(report.max_rel_err_hess, err);
    }
  }
  return report;
}

// Quadratic problem file:
//   line 1: "dim n"
//   n lines of n numbers (A), one line of n numbers (b), one line with c,
//   then optionally one line of n numbers (x1).
// '#' starts a comment; blank lines are skipped. A is symmetrized on load.
inline Problem load_quadratic(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ProblemParseError("cannot open quadratic problem file: " + path);

  struct Line {
    int number;
    std::vector<std::string> tokens;
  };
  std::vector<Line> lines;
  std::string raw;
  int line_number = 0;
  while (std::getline(file, raw)) {
    ++line_number;
    if (auto pos = raw.find('#'); pos != std::string::npos) raw.erase(pos);
    std::istringstream stream(raw);
    Line line{line_number, {}};
    std::string token;
    while (stream >> token) line.tokens.push_back(token);
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }

  std::size_t cursor = 0;
  const auto fail = [&](const std::string& field, const std::string& what) {
    const std::string where =
        cursor < lines.size() ? "line " + std::to_string(lines[cursor].number) : "end of file";
    throw ProblemParseError(path + ": " + where + ": " + field + ": " + what);
  };
  const auto parse_row = [&](const std::string& field, std::size_t count) {
    if (cursor >= lines.size()) fail(field, "missing");
    const Line& line = lines[cursor];
    if (line.tokens.size() != count) {
      fail(field, "expected " + std::to_string(count) + " values, got " +
                      std::to_string(line.tokens.size()));
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
      try {
        std::size_t used = 0;
        values[i] = std::stod(line.tokens[i], &used);
        if (used != line.tokens[i].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        fail(field, "invalid number '" + line.tokens[i] + "'");
      }
    }
    ++cursor;
    return values;
  };

  if (cursor >= lines.size()) fail("header", "missing");
  if (lines[cursor].tokens.size() != 2 || lines[cursor].tokens[0] != "dim") {
    fail("header", "expected 'dim n'");
  }
  int n = 0;
  try {
    n = std::stoi(lines[cursor].tokens[1]);
  } catch (const std::exception&) {
    fail("header", "invalid dimension '" + lines[cursor].tokens[1] + "'");
  }
  if (n <= 0) fail("header", "dimension must be positive");
  ++cursor;

  Matrix a(n, n);
  for (int i = 0; i < n; ++i) {
    const auto row = parse_row("A row " + std::to_string(i + 1), static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) a(i, j) = row[j];
  }
  const auto b_row = parse_row("b", static_cast<std::size_t>(n));
  Vector b = Eigen::Map<const Vector>(b_row.data(), n);
  const double c = parse_row("c", 1)[0];
  Vector x1 = Vector::Zero(n);
  if (cursor < lines.size()) {
    const auto x_row = parse_row("x1", static_cast<std::size_t>(n));
    x1 = Eigen::Map<const Vector>(x_row.data(), n);
  }
  if (cursor < lines.size()) fail("trailing data", "unexpected extra line");

  std::string name = path;
  if (auto pos = name.find_last_of("/\\"); pos != std::string::npos) name.erase(0, pos + 1);
  if (auto pos = name.find_last_of('.'); pos != std::string::npos) name.erase(pos);
  return detail::make_quadratic_objective(std::move(name), std::move(a), std::move(b), c,
                                          std::move(x1));
}

}  // namespace catopt
