#include "nlocal/least_squares.hpp"

#include "nlocal/errors.hpp"

#include <algorithm>
#include <cmath>

namespace nlocal {

LeastSquaresResult minimize_least_squares(const ResidualFunction& fn, Eigen::VectorXd x0,
                                          const Eigen::VectorXd& lower,
                                          const Eigen::VectorXd& upper,
                                          const LeastSquaresOptions& options) {
  const Eigen::Index p = x0.size();
  if (lower.size() != p || upper.size() != p) {
    throw DimensionMismatchError("minimize_least_squares: bound sizes differ from x0");
  }
  if ((lower.array() > upper.array()).any()) {
    throw std::invalid_argument("minimize_least_squares: lower bound exceeds upper bound");
  }

  LeastSquaresResult result;
  Eigen::VectorXd x = x0.cwiseMax(lower).cwiseMin(upper);
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  fn(x, r, &jac);
  ++result.evaluations;
  double cost = 0.5 * r.squaredNorm();
  result.cost_history.push_back(cost);

  Eigen::MatrixXd normal = jac.transpose() * jac;
  Eigen::VectorXd grad = jac.transpose() * r;
  Eigen::VectorXd scale = normal.diagonal().cwiseMax(1e-300);

  double damping = options.initial_damping;
  double growth = 2.0;
  Eigen::VectorXd r_trial;
  Eigen::MatrixXd jac_trial;

  for (result.iterations = 0; result.iterations < options.max_iterations &&
                               result.evaluations < 10 * options.max_iterations;) {
    if (cost <= 1e-300) {
      result.converged = true;
      result.stop_reason = "zero residual";
      break;
    }
    // Parameters pinned at a bound with the gradient pushing outward are held
    // fixed; the damped normal equations are solved over the rest.
    Eigen::MatrixXd system = normal;
    system.diagonal() += damping * scale;
    Eigen::VectorXd rhs = -grad;
    for (Eigen::Index j = 0; j < p; ++j) {
      const bool pinned = (x[j] <= lower[j] && grad[j] > 0.0) || (x[j] >= upper[j] && grad[j] < 0.0);
      if (!pinned) continue;
      system.row(j).setZero();
      system.col(j).setZero();
      system(j, j) = 1.0;
      rhs[j] = 0.0;
    }
    Eigen::VectorXd step = system.ldlt().solve(rhs);
    Eigen::VectorXd x_trial = (x + step).cwiseMax(lower).cwiseMin(upper);
    step = x_trial - x;

    if (step.norm() <= options.xtol * (x.norm() + options.xtol)) {
      result.converged = true;
      result.stop_reason = "step below xtol";
      break;
    }

    fn(x_trial, r_trial, &jac_trial);
    ++result.evaluations;
    const double cost_trial = 0.5 * r_trial.squaredNorm();
    const double predicted = -(grad.dot(step) + 0.5 * step.dot(normal * step));
    const double gain = predicted > 0.0 ? (cost - cost_trial) / predicted : -1.0;

    if (gain > 1e-4 && cost_trial < cost) {
      ++result.iterations;
      const double relative = (cost - cost_trial) / cost;
      x = std::move(x_trial);
      r.swap(r_trial);
      jac.swap(jac_trial);
      cost = cost_trial;
      result.cost_history.push_back(cost);
      normal = jac.transpose() * jac;
      grad = jac.transpose() * r;
      scale = scale.cwiseMax(normal.diagonal());
      damping *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * gain - 1.0, 3));
      growth = 2.0;
      if (relative < options.ftol) {
        result.converged = true;
        result.stop_reason = "cost change below ftol";
        break;
      }
    } else {
      damping *= growth;
      growth *= 2.0;
      if (damping > 1e20) {
        // No descent direction left at machine precision: a stationary point.
        result.converged = true;
        result.stop_reason = "damping saturated";
        break;
      }
    }
  }
  if (result.stop_reason.empty()) result.stop_reason = "iteration budget exhausted";

  result.x = std::move(x);
  result.cost = cost;
  return result;
}

}  // namespace nlocal
