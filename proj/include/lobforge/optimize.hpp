#pragma once

#include <functional>

#include <Eigen/Dense>

namespace lobforge {

using ScalarObjective = std::function<double(const Eigen::VectorXd&)>;

struct OptimOptions {
  int max_iter = 500;
  double grad_tol = 1e-8;
  /// Gradient size below which a stalled quasi-Newton run still counts as converged.
  double accept_tol = 1e-5;
  double initial_step = 0.1;
  double line_tol = 0.1;
  /// Relative central-difference step for gradients.
  double fd_step = 1e-6;
};

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Unconstrained minimisation: quasi-Newton (GSL bfgs2) on finite-difference
/// gradients, followed by a Nelder-Mead pass when the quasi-Newton run stalls
/// or hits a non-finite value. Non-finite objective values count as +inf.
OptimResult minimize(const ScalarObjective& f, const Eigen::VectorXd& x0, const OptimOptions& options = {});

Eigen::VectorXd numeric_gradient(const ScalarObjective& f, const Eigen::VectorXd& x, double rel_step = 1e-6);
/// Central-difference Hessian with the given per-coordinate steps.
Eigen::MatrixXd numeric_hessian(const ScalarObjective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& steps);

}  // namespace lobforge
