#include "valley/least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace valley::lsq {

namespace {

Eigen::VectorXd project(Eigen::VectorXd x, const Options& opts) {
  if (opts.lower.size() == x.size()) x = x.cwiseMax(opts.lower);
  if (opts.upper.size() == x.size()) x = x.cwiseMin(opts.upper);
  return x;
}

}  // namespace

Eigen::MatrixXd numeric_jacobian(const ResidualFn& residual, const Eigen::VectorXd& x) {
  const Eigen::VectorXd r0 = residual(x);
  Eigen::MatrixXd jac(r0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd xh = x;
    const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
    xh[j] += h;
    jac.col(j) = (residual(xh) - r0) / h;
  }
  return jac;
}

Solution minimize(const ResidualFn& residual, const std::optional<JacobianFn>& jacobian,
                  Eigen::VectorXd x0, const Options& opts) {
  auto jac_at = [&](const Eigen::VectorXd& x) {
    return jacobian ? (*jacobian)(x) : numeric_jacobian(residual, x);
  };

  Solution s;
  s.x = project(std::move(x0), opts);
  s.residuals = residual(s.x);
  s.cost = s.residuals.squaredNorm();
  if (!std::isfinite(s.cost)) {
    s.jacobian = Eigen::MatrixXd::Zero(s.residuals.size(), s.x.size());
    return s;
  }
  s.jacobian = jac_at(s.x);

  double damping = 1e-3;
  for (s.iterations = 0; s.iterations < opts.max_iterations; ++s.iterations) {
    const Eigen::MatrixXd jtj = s.jacobian.transpose() * s.jacobian;
    const Eigen::VectorXd grad = s.jacobian.transpose() * s.residuals;
    if (grad.lpNorm<Eigen::Infinity>() == 0.0) {
      s.converged = true;
      break;
    }
    Eigen::VectorXd scale = jtj.diagonal().cwiseMax(1e-12 * std::max(1.0, jtj.diagonal().maxCoeff()));

    bool accepted = false;
    double step_norm = 0.0;
    for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += damping * scale;
      const Eigen::VectorXd delta = a.ldlt().solve(-grad);
      const Eigen::VectorXd trial = project(s.x + delta, opts);
      const Eigen::VectorXd r_trial = residual(trial);
      const double cost_trial = r_trial.squaredNorm();
      step_norm = (trial - s.x).norm();
      if (std::isfinite(cost_trial) && cost_trial <= s.cost) {
        accepted = true;
        const bool tiny = step_norm <= opts.step_tolerance * (s.x.norm() + opts.step_tolerance);
        s.x = trial;
        s.residuals = r_trial;
        s.cost = cost_trial;
        s.jacobian = jac_at(s.x);
        damping = std::max(damping / 3.0, 1e-12);
        if (tiny) {
          s.converged = true;
        }
      } else {
        damping *= 4.0;
        if (step_norm <= opts.step_tolerance * (s.x.norm() + opts.step_tolerance)) break;
      }
    }
    if (s.converged) {
      ++s.iterations;
      break;
    }
    if (!accepted) {
      // No downhill step at any damping: the current point is stationary to
      // working precision.
      s.converged = step_norm <= std::sqrt(opts.step_tolerance) * (s.x.norm() + 1.0);
      break;
    }
  }
  return s;
}

std::optional<Eigen::MatrixXd> covariance(const Solution& sol) {
  const auto n = sol.residuals.size();
  const auto p = sol.x.size();
  if (n <= p) return std::nullopt;
  const Eigen::MatrixXd jtj = sol.jacobian.transpose() * sol.jacobian;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jtj, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(0) > 0.0) ||
      sv(sv.size() - 1) < sv(0) * 1e3 * std::numeric_limits<double>::epsilon()) {
    return std::nullopt;
  }
  const double s2 = sol.cost / static_cast<double>(n - p);
  const Eigen::MatrixXd inv =
      svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  return s2 * inv;
}

}  // namespace valley::lsq
