#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

namespace valley::lsq {

// Residuals r(x) (length n) and, optionally, the Jacobian dr/dx (n x p).
using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct Options {
  int max_iterations = 500;
  double step_tolerance = 1e-10;  // relative step size that counts as converged
  Eigen::VectorXd lower;          // empty = unbounded
  Eigen::VectorXd upper;
};

struct Solution {
  Eigen::VectorXd x;
  Eigen::VectorXd residuals;
  Eigen::MatrixXd jacobian;
  double cost = 0.0;  // sum of squared residuals
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) with simple box constraints
/// enforced by projection. When `jacobian` is empty a forward-difference
/// Jacobian is used.
Solution minimize(const ResidualFn& residual, const std::optional<JacobianFn>& jacobian,
                  Eigen::VectorXd x0, const Options& opts = {});

/// Forward-difference Jacobian.
Eigen::MatrixXd numeric_jacobian(const ResidualFn& residual, const Eigen::VectorXd& x);

/// Parameter covariance s^2 (J^T J)^-1 with s^2 = cost/(n - p). Empty when
/// J^T J is numerically singular or n <= p.
std::optional<Eigen::MatrixXd> covariance(const Solution& sol);

}  // namespace valley::lsq
