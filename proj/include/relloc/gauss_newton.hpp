#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace relloc {

struct GaussNewtonOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-10;
  double residual_tolerance = 1e-10;
  double damping_initial = 1e-3;
};

struct GaussNewtonResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
  /// Sum of squared residuals at the start and after every accepted step.
  std::vector<double> cost_trace;
};

using ResidualMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianMap = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
/// Second-order part of the least-squares Hessian, sum_i r_i * Hess(r_i),
/// evaluated at x given the residual r there.
using CurvatureMap = std::function<Eigen::MatrixXd(const Eigen::VectorXd& x, const Eigen::VectorXd& r)>;

/// Damped Gauss-Newton. Each iteration first tries the plain Gauss-Newton
/// step; if that does not lower the cost, Levenberg damping mu I is added
/// with mu = damping * max(diag(J^T J)), damping growing x10 per rejection
/// and shrinking /10 after an accepted damped step. Stops when the step
/// norm drops below step_tolerance, the residual norm below
/// residual_tolerance, or after max_iterations. Damping beyond 1e16 without
/// an acceptable step ends the run unconverged.
GaussNewtonResult gauss_newton(const ResidualMap& residual, const JacobianMap& jacobian,
                               Eigen::VectorXd initial_guess, const GaussNewtonOptions& opts);

/// Same loop, but each iteration first tries the full Newton step with
/// J^T J + curvature(x, r) (used when that matrix is positive definite),
/// then falls back to the Gauss-Newton / Levenberg sequence above. Converges
/// quadratically near a minimum where plain Gauss-Newton is only linear.
GaussNewtonResult gauss_newton(const ResidualMap& residual, const JacobianMap& jacobian,
                               const CurvatureMap& curvature, Eigen::VectorXd initial_guess,
                               const GaussNewtonOptions& opts);

}  // namespace relloc
