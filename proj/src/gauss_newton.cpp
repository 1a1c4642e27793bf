#include "relloc/gauss_newton.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "relloc/errors.hpp"

namespace relloc {

namespace {

constexpr double kMaxDamping = 1e16;
// Relative cost change treated as evaluation noise for Newton steps.
constexpr double kCostNoise = 1e-12;

bool solve_step(const Eigen::MatrixXd& a, const Eigen::VectorXd& g, Eigen::VectorXd& dx) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
  const Eigen::VectorXd d = ldlt.vectorD();
  if (!(d.minCoeff() > 1e-15 * d.maxCoeff())) return false;
  dx = ldlt.solve(-g);
  return dx.allFinite();
}

}  // namespace

GaussNewtonResult gauss_newton(const ResidualMap& residual, const JacobianMap& jacobian,
                               Eigen::VectorXd initial_guess, const GaussNewtonOptions& opts) {
  return gauss_newton(residual, jacobian, CurvatureMap{}, std::move(initial_guess), opts);
}

GaussNewtonResult gauss_newton(const ResidualMap& residual, const JacobianMap& jacobian,
                               const CurvatureMap& curvature, Eigen::VectorXd initial_guess,
                               const GaussNewtonOptions& opts) {
  if (opts.max_iterations < 1 || !(opts.step_tolerance > 0.0) ||
      !(opts.residual_tolerance > 0.0) || !(opts.damping_initial > 0.0)) {
    throw InvalidArgument("invalid Gauss-Newton options");
  }
  GaussNewtonResult out;
  out.x = std::move(initial_guess);
  Eigen::VectorXd r = residual(out.x);
  double cost = r.squaredNorm();
  out.cost_trace.push_back(cost);
  out.residual_norm = std::sqrt(cost);
  if (!std::isfinite(cost)) return out;
  if (out.residual_norm < opts.residual_tolerance) {
    out.converged = true;
    return out;
  }

  double damping = opts.damping_initial;
  Eigen::VectorXd dx, x_new, r_new;
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    out.iterations = iter;
    const Eigen::MatrixXd j = jacobian(out.x);
    const Eigen::MatrixXd a = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * r;

    bool accepted = false;
    bool tiny_step = false;
    double cost_new = cost;
    auto attempt = [&](const Eigen::MatrixXd& normal, double slack, bool undamped) {
      if (!solve_step(normal, g, dx)) return false;
      if (undamped && dx.norm() < opts.step_tolerance) {
        tiny_step = true;
        return false;
      }
      x_new = out.x + dx;
      r_new = residual(x_new);
      cost_new = r_new.squaredNorm();
      if (!std::isfinite(cost_new)) return false;
      return slack > 0.0 ? cost_new <= cost * (1.0 + slack) : cost_new < cost;
    };

    if (curvature) accepted = attempt(a + curvature(out.x, r), kCostNoise, true);
    if (!accepted && !tiny_step) accepted = attempt(a, 0.0, true);
    if (!accepted && !tiny_step) {
      const double scale = std::max(a.diagonal().maxCoeff(), 1e-300);
      while (damping <= kMaxDamping) {
        Eigen::MatrixXd damped = a;
        damped.diagonal().array() += damping * scale;
        if (attempt(damped, 0.0, false)) {
          accepted = true;
          damping = std::max(damping / 10.0, 1e-12);
          break;
        }
        damping *= 10.0;
      }
    }

    if (tiny_step) {
      // The undamped step is below tolerance. It still goes in unless the cost
      // rises beyond evaluation noise, folded into the previous iteration.
      x_new = out.x + dx;
      r_new = residual(x_new);
      cost_new = r_new.squaredNorm();
      if (cost_new <= cost * (1.0 + kCostNoise)) {
        out.x = x_new;
        cost = cost_new;
        if (cost < out.cost_trace.back()) out.cost_trace.back() = cost;
        out.residual_norm = std::sqrt(cost);
      }
      out.iterations = iter - 1;
      out.converged = true;
      return out;
    }
    if (accepted) {
      out.x = x_new;
      r = r_new;
      cost = cost_new;
      out.cost_trace.push_back(cost);
      out.residual_norm = std::sqrt(cost);
    }
    if (!accepted) return out;  // damping exhausted
    if (out.residual_norm < opts.residual_tolerance) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace relloc
