#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "relloc/edm.hpp"
#include "relloc/gauss_newton.hpp"
#include "relloc/geometry.hpp"
#include "relloc/ranging.hpp"

namespace relloc {

enum class Initializer { kTT, kEDMT, kEDMTJointly, kEDMTIndividually, kExplicit };

std::string to_string(Initializer init);
/// Accepts tt, edmt, edmt-jointly, edmt-individually, explicit.
Initializer initializer_from_string(const std::string& s);

struct SolverOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-10;     // cm (rad for attitude components)
  double residual_tolerance = 1e-10;
  double damping_initial = 1e-3;
  Initializer initializer = Initializer::kTT;
  /// Used with Initializer::kExplicit: 3 entries (sensor) or 6 (x, y, z,
  /// roll, pitch, yaw) for an agent.
  Eigen::VectorXd initial_guess;
  /// Extra agent starts with the initial yaw rotated by multiples of
  /// 2 pi / (multi_start + 1); the lowest-cost run wins.
  int multi_start = 0;

  void validate() const;
  GaussNewtonOptions gauss_newton() const;
};

template <class Estimate>
struct EstimateReport {
  Estimate estimate;
  int iterations = 0;
  double final_residual_norm = 0.0;
  double final_objective = 0.0;  // squared residual norm
  bool converged = false;
  Initializer initializer_used = Initializer::kTT;
  double wall_time = 0.0;  // seconds
};

using SensorReport = EstimateReport<Vec3>;
using AgentReport = EstimateReport<Pose6D>;

/// Linearized trilateration from consecutive (cyclic) differences of the
/// squared range equations, solved by least squares.
Vec3 tt_sensor(const SensorConfig& config, const RangeVector& measured);
AgentEstimate tt_agent(const SensorConfig& config_a, const RangeMatrix& measured,
                       const SensorConfig& config_b);

/// Minimizes sum_i (dhat_i^2 - d_i(p)^2)^2.
SensorReport frocvx_sensor(const SensorConfig& config, const RangeVector& measured,
                           const SolverOptions& opts = {});
/// Minimizes sum_{i,j} (dhat_ij^2 - d_ij(beta)^2)^2 over the 6-vector beta.
AgentReport frocvx_agent(const SensorConfig& config_a, const RangeMatrix& measured,
                         const SensorConfig& config_b, const SolverOptions& opts = {});

/// Minimizes sum_i (dhat_i - d_i(p))^2, the Gaussian negative log-likelihood
/// up to scale. Requires noise.sigma0 > 0.
SensorReport mle_sensor(const SensorConfig& config, const RangeVector& measured,
                        const NoiseModel& noise, const SolverOptions& opts = {});
AgentReport mle_agent(const SensorConfig& config_a, const RangeMatrix& measured,
                      const SensorConfig& config_b, const NoiseModel& noise,
                      const SolverOptions& opts = {});

// Objective functions, exposed for diagnostics and gradient checks.
double frocvx_objective(const SensorConfig& config, const RangeVector& measured, const Vec3& p);
double frocvx_objective(const SensorConfig& config_a, const RangeMatrix& measured,
                        const SensorConfig& config_b, const Pose6D& pose);
double mle_objective(const SensorConfig& config, const RangeVector& measured, const Vec3& p);
double mle_objective(const SensorConfig& config_a, const RangeMatrix& measured,
                     const SensorConfig& config_b, const Pose6D& pose);

/// Analytic objective gradients (3 and 6 entries).
Eigen::VectorXd frocvx_gradient(const SensorConfig& config, const RangeVector& measured, const Vec3& p);
Eigen::VectorXd frocvx_gradient(const SensorConfig& config_a, const RangeMatrix& measured,
                                const SensorConfig& config_b, const Pose6D& pose);
Eigen::VectorXd mle_gradient(const SensorConfig& config, const RangeVector& measured, const Vec3& p);
Eigen::VectorXd mle_gradient(const SensorConfig& config_a, const RangeMatrix& measured,
                             const SensorConfig& config_b, const Pose6D& pose);

Eigen::Matrix<double, 6, 1> pose_to_vector(const Pose6D& pose);
Pose6D pose_from_vector(const Eigen::VectorXd& beta);

}  // namespace relloc
