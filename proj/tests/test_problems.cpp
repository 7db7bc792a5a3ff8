#include "catopt/problems.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace catopt {
namespace {

TEST(MakeProblem, SphereClosedForm) {
  const auto p = make_problem("sphere", 2);
  Vector x(2);
  x << 3.0, 4.0;
  EXPECT_DOUBLE_EQ(p.objective.value(x), 12.5);
  EXPECT_TRUE(p.objective.gradient(x).isApprox(x));
  EXPECT_TRUE(p.objective.hessian(x).isApprox(Matrix::Identity(2, 2)));
  EXPECT_TRUE(p.spec.x1.isApprox(x));
}

TEST(MakeProblem, RosenbrockStartValue) {
  const auto p = make_problem("rosenbrock", 2);
  EXPECT_DOUBLE_EQ(p.spec.x1[0], -1.2);
  EXPECT_DOUBLE_EQ(p.spec.x1[1], 1.0);
  EXPECT_NEAR(p.objective.value(p.spec.x1), 24.2, 1e-12);
  ASSERT_TRUE(p.spec.known_opt.has_value());
  EXPECT_LE(p.objective.gradient(p.spec.known_opt->first).norm(), 1e-8);
}

TEST(MakeProblem, IndefiniteQuadraticIsFixed) {
  const auto p = make_problem("indefinite_quadratic", 2);
  const Matrix h = p.objective.hessian(Vector::Zero(2));
  EXPECT_DOUBLE_EQ(h(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(h(1, 1), -2.0);
  EXPECT_DOUBLE_EQ(h(0, 1), 0.0);
  const Vector g = p.objective.gradient(Vector::Zero(2));
  EXPECT_DOUBLE_EQ(g[0], 1.0);
  EXPECT_DOUBLE_EQ(g[1], 1.0);
}

TEST(MakeProblem, KnownOptimaAreStationary) {
  for (const auto& name : builtin_problem_names()) {
    const auto p = make_problem(name, default_problem_dim(name));
    if (!p.spec.known_opt) continue;
    EXPECT_LE(p.objective.gradient(p.spec.known_opt->first).norm(), 1e-8) << name;
    EXPECT_NEAR(p.objective.value(p.spec.known_opt->first), p.spec.known_opt->second, 1e-12)
        << name;
  }
}

TEST(MakeProblem, HardCaseGradientIsOrthogonalToTheMinimumEigenvector) {
  for (int dim : {2, 3, 10}) {
    const auto p = make_problem("hard_case_synthetic", dim);
    const Vector g = p.objective.gradient(p.spec.x1);
    const Matrix h = p.objective.hessian(p.spec.x1);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    const Vector v_min = eig.eigenvectors().col(0);
    EXPECT_LE(std::abs(g.dot(v_min)) / g.norm(), 1e-12) << "dim " << dim;
    EXPECT_NEAR(g.norm(), 1.0, 1e-12);  // normalized by construction
  }
}

TEST(MakeProblem, RejectsBadNamesAndDims) {
  EXPECT_THROW(make_problem("does_not_exist", 2), std::invalid_argument);
  EXPECT_THROW(make_problem("sphere", 0), std::invalid_argument);
  EXPECT_THROW(make_problem("rosenbrock", 1), std::invalid_argument);
  EXPECT_THROW(make_problem("extended_rosenbrock", 7), std::invalid_argument);
  EXPECT_THROW(make_problem("powell_singular", 6), std::invalid_argument);
  EXPECT_THROW(make_problem("indefinite_quadratic", 3), std::invalid_argument);
  EXPECT_THROW(make_problem("hard_case_synthetic", 1), std::invalid_argument);
}

TEST(FiniteDiffCheck, ExactQuadraticsAreTight) {
  const auto p = make_problem("sphere", 4);
  Vector x(4);
  x << 0.3, -1.7, 2.0, 0.0;
  const auto report = finite_diff_check(p.objective, x, 1e-5);
  EXPECT_LE(report.max_rel_err_grad, 1e-6);
  EXPECT_LE(report.max_rel_err_hess, 1e-6);
}

TEST(FiniteDiffCheck, RosenbrockGradientAtTheStart) {
  const auto p = make_problem("rosenbrock", 2);
  const auto report = finite_diff_check(p.objective, p.spec.x1, 1e-5);
  EXPECT_LE(report.max_rel_err_grad, 1e-5);
}

TEST(FiniteDiffCheck, ZeroFunctionHasZeroErrors) {
  Objective zero;
  zero.dim = 2;
  zero.value = [](const Vector&) { return 0.0; };
  zero.gradient = [](const Vector&) { return Vector::Zero(2).eval(); };
  zero.hessian = [](const Vector&) { return Matrix::Zero(2, 2).eval(); };
  const auto report = finite_diff_check(zero, Vector::Ones(2), 1e-5);
  EXPECT_EQ(report.max_rel_err_grad, 0.0);
  EXPECT_EQ(report.max_rel_err_hess, 0.0);
}

TEST(FiniteDiffCheck, AllBuiltinsAtRandomPoints) {
  std::mt19937_64 rng(321);
  std::uniform_real_distribution<double> offset(-1.0, 1.0);
  for (const auto& name : builtin_problem_names()) {
    const auto p = make_problem(name, default_problem_dim(name));
    for (int trial = 0; trial < 5; ++trial) {
      Vector x = p.spec.x1;
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += offset(rng);
      const auto report = finite_diff_check(p.objective, x, 1e-5);
      EXPECT_LE(report.max_rel_err_grad, 1e-4) << name << " trial " << trial;
      EXPECT_LE(report.max_rel_err_hess, 1e-3) << name << " trial " << trial;
    }
  }
}

class LoadQuadraticTest : public ::testing::Test {
 protected:
  std::string write_file(const std::string& contents) {
    const auto path = std::filesystem::temp_directory_path() /
                      ("catopt_quadratic_" + std::to_string(counter_++) + ".txt");
    std::ofstream out(path);
    out << contents;
    paths_.push_back(path);
    return path.string();
  }

  void TearDown() override {
    for (const auto& p : paths_) std::filesystem::remove(p);
  }

  std::vector<std::filesystem::path> paths_;
  static int counter_;
};

int LoadQuadraticTest::counter_ = 0;

TEST_F(LoadQuadraticTest, IdentityQuadratic) {
  const auto path = write_file(
      "# identity quadratic\n"
      "dim 2\n"
      "1 0\n"
      "0 1\n"
      "0 0\n"
      "0\n");
  const auto p = load_quadratic(path);
  Vector x(2);
  x << 1.0, 1.0;
  EXPECT_DOUBLE_EQ(p.objective.value(x), 1.0);
  EXPECT_TRUE(p.spec.x1.isApprox(Vector::Zero(2)));
}

TEST_F(LoadQuadraticTest, MatchesTheIndefiniteBuiltin) {
  const auto path = write_file(
      "dim 2\n"
      "1 0\n"
      "0 -2\n"
      "1 1\n"
      "0\n"
      "0.5 -0.25  # explicit start\n");
  const auto loaded = load_quadratic(path);
  const auto builtin = make_problem("indefinite_quadratic", 2);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    Vector x(2);
    x << normal(rng), normal(rng);
    EXPECT_DOUBLE_EQ(loaded.objective.value(x), builtin.objective.value(x));
    EXPECT_TRUE(loaded.objective.gradient(x).isApprox(builtin.objective.gradient(x)));
  }
  EXPECT_DOUBLE_EQ(loaded.spec.x1[0], 0.5);
  EXPECT_DOUBLE_EQ(loaded.spec.x1[1], -0.25);
}

TEST_F(LoadQuadraticTest, AsymmetricMatrixIsSymmetrizedOnLoad) {
  const auto path = write_file(
      "dim 2\n"
      "1 4\n"
      "0 1\n"
      "0 0\n"
      "0\n");
  const auto p = load_quadratic(path);
  const Matrix h = p.objective.hessian(Vector::Zero(2));
  EXPECT_DOUBLE_EQ(h(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(h(1, 0), 2.0);
}

TEST_F(LoadQuadraticTest, MalformedHeaderNamesTheField) {
  const auto path = write_file("size 2\n1 0\n0 1\n0 0\n0\n");
  try {
    load_quadratic(path);
    FAIL() << "expected a parse error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("header"), std::string::npos) << e.what();
  }
}

TEST_F(LoadQuadraticTest, ShortRowNamesTheField) {
  const auto path = write_file("dim 2\n1 0\n0\n0 0\n0\n");
  try {
    load_quadratic(path);
    FAIL() << "expected a parse error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("A row 2"), std::string::npos) << e.what();
  }
}

TEST_F(LoadQuadraticTest, BadNumberNamesTheField) {
  const auto path = write_file("dim 2\n1 0\n0 1\n0 zebra\n0\n");
  try {
    load_quadratic(path);
    FAIL() << "expected a parse error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("b"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("zebra"), std::string::npos) << e.what();
  }
}

TEST_F(LoadQuadraticTest, MissingFileFails) {
  EXPECT_THROW(load_quadratic("/nonexistent/path/q.txt"), std::runtime_error);
}

}  // namespace
}  // namespace catopt
