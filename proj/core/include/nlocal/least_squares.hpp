#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace nlocal {

struct LeastSquaresOptions {
  int max_iterations = 500;
  double ftol = 1e-12;  // relative reduction of the cost on an accepted step
  double xtol = 1e-10;  // step length relative to |x| + xtol
  double initial_damping = 1e-3;
};

// Fills residual r(x) and, when jacobian != nullptr, the Jacobian dr/dx.
using ResidualFunction =
    std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& residual, Eigen::MatrixXd* jacobian)>;

struct LeastSquaresResult {
  Eigen::VectorXd x;
  double cost = 0.0;  // 0.5 * |r|^2
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  std::vector<double> cost_history;
  std::string stop_reason;
};

// Box-constrained Levenberg-Marquardt (trust-region flavour): Marquardt-scaled
// damping, steps projected onto [lower, upper], gain-ratio controlled damping
// updates. Reaching max_iterations returns the best point with converged=false.
LeastSquaresResult minimize_least_squares(const ResidualFunction& fn, Eigen::VectorXd x0,
                                          const Eigen::VectorXd& lower,
                                          const Eigen::VectorXd& upper,
                                          const LeastSquaresOptions& options = {});

}  // namespace nlocal
