#include <nlocal/least_squares.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace nlocal;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// r = (10 (x1 - x0^2), 1 - x0)
void rosenbrock(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* j) {
  r.resize(2);
  r << 10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0];
  if (j) {
    j->resize(2, 2);
    *j << -20.0 * x[0], 10.0, -1.0, 0.0;
  }
}

}  // namespace

TEST(least_squares, linear_problem_exact) {
  Eigen::MatrixXd a(4, 2);
  a << 1, 0, 1, 1, 1, 2, 1, 3;
  const Eigen::VectorXd b = vec({1.0, 3.1, 4.9, 7.2});
  auto fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* j) {
    r = a * x - b;
    if (j) *j = a;
  };
  const auto res = minimize_least_squares(fn, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, -kInf),
                                          Eigen::VectorXd::Constant(2, kInf));
  const Eigen::VectorXd expected = a.colPivHouseholderQr().solve(b);
  EXPECT_LT((res.x - expected).norm(), 1e-8);
  EXPECT_TRUE(res.converged);
}

TEST(least_squares, rosenbrock_unbounded) {
  const auto res = minimize_least_squares(rosenbrock, vec({-1.2, 1.0}), Eigen::VectorXd::Constant(2, -kInf),
                                          Eigen::VectorXd::Constant(2, kInf));
  EXPECT_NEAR(res.x[0], 1.0, 1e-6);
  EXPECT_NEAR(res.x[1], 1.0, 1e-6);
  EXPECT_LT(res.cost, 1e-14);
  ASSERT_FALSE(res.cost_history.empty());
  for (std::size_t i = 1; i < res.cost_history.size(); ++i) {
    EXPECT_LE(res.cost_history[i], res.cost_history[i - 1]);
  }
}

TEST(least_squares, active_bound) {
  // Unconstrained minimum at x = 3, box stops at 2.
  auto fn = [](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* j) {
    r = vec({x[0] - 3.0, x[1] + 1.0});
    if (j) *j = Eigen::MatrixXd::Identity(2, 2);
  };
  const auto res = minimize_least_squares(fn, vec({0.0, 0.0}), vec({-5.0, -5.0}), vec({2.0, 5.0}));
  EXPECT_DOUBLE_EQ(res.x[0], 2.0);
  EXPECT_NEAR(res.x[1], -1.0, 1e-8);
  EXPECT_NEAR(res.cost, 0.5, 1e-10);
}

TEST(least_squares, start_outside_box_is_projected) {
  auto fn = [](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* j) {
    r = x;
    if (j) *j = Eigen::MatrixXd::Identity(1, 1);
  };
  const auto res = minimize_least_squares(fn, vec({10.0}), vec({1.0}), vec({4.0}));
  EXPECT_DOUBLE_EQ(res.x[0], 1.0);
}

TEST(least_squares, iteration_cap_reports_not_converged) {
  LeastSquaresOptions opt;
  opt.max_iterations = 2;
  const auto res = minimize_least_squares(rosenbrock, vec({-1.2, 1.0}), Eigen::VectorXd::Constant(2, -kInf),
                                          Eigen::VectorXd::Constant(2, kInf), opt);
  EXPECT_FALSE(res.converged);
  EXPECT_LE(res.iterations, 2);
  EXPECT_LT(res.cost, 0.5 * (4.84 * 4.84 * 100.0 + 2.2 * 2.2));
}
