#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "relloc/geometry.hpp"

namespace relloc {

/// One range per anchor, cm.
using RangeVector = Eigen::VectorXd;
/// Entry (i, j) is the range from sensor A_i to sensor B_j, cm.
using RangeMatrix = Eigen::Matrix4d;
/// Stacked agent Jacobian: row 4 j + i is d(d_{A_i B_j}) / d(x, y, z, gamma, theta, psi).
using AgentJacobian = Eigen::Matrix<double, 16, 6>;

/// i.i.d. zero-mean Gaussian range noise.
struct NoiseModel {
  double sigma0 = 0.0;  // cm
  std::uint64_t seed = 0;
};

/// Gaussian draws keyed by (seed, stream). Two streams with the same key
/// produce the same sequence regardless of which thread asks for them.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t stream);
  double next(double sigma);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> unit_{0.0, 1.0};
};

/// Stream index for Monte-Carlo trial `trial` at sweep point `point`.
constexpr std::uint64_t trial_stream(std::uint64_t point, std::uint64_t trial) {
  return (point << 32) ^ trial;
}

RangeVector true_ranges_sensor(const SensorConfig& config, const Vec3& target);
RangeMatrix true_ranges_agent(const SensorConfig& config_a, const Pose6D& pose_b,
                              const SensorConfig& config_b);

/// Adds N(0, sigma0^2) to every entry. No clamping at zero.
RangeVector add_noise(const RangeVector& ranges, const NoiseModel& noise, std::uint64_t stream = 0);
RangeMatrix add_noise(const RangeMatrix& ranges, const NoiseModel& noise, std::uint64_t stream = 0);

/// k x 3, row i = (p_T - p_Ai)^T / d_{A_i T}.
Eigen::MatrixX3d jacobian_sensor(const SensorConfig& config, const Vec3& target);

AgentJacobian jacobian_agent(const SensorConfig& config_a, const Pose6D& pose_b,
                             const SensorConfig& config_b);

// Derivatives of the basic rotations with respect to their angle.
Mat3 drot_x(double gamma);
Mat3 drot_y(double theta);
Mat3 drot_z(double psi);

}  // namespace relloc
