#include "relloc/ranging.hpp"

#include <cmath>

#include "relloc/errors.hpp"

namespace relloc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double checked_distance(const Vec3& a, const Vec3& b) {
  const double d = (a - b).norm();
  if (!(d > 1e-12)) throw DegenerateGeometry("target coincides with a sensor");
  return d;
}

}  // namespace

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(splitmix64(seed) ^ stream)) {}

double NoiseStream::next(double sigma) { return sigma * unit_(engine_); }

RangeVector true_ranges_sensor(const SensorConfig& config, const Vec3& target) {
  RangeVector d(config.size());
  for (int i = 0; i < config.size(); ++i) d(i) = checked_distance(config.position(i), target);
  return d;
}

RangeMatrix true_ranges_agent(const SensorConfig& config_a, const Pose6D& pose_b,
                              const SensorConfig& config_b) {
  if (config_a.size() != 4 || config_b.size() != 4) {
    throw InvalidArgument("agent ranging needs four sensors on each agent");
  }
  const Eigen::Matrix3Xd pb = transform_body_points(pose_b, config_b);
  RangeMatrix d;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) d(i, j) = checked_distance(config_a.position(i), pb.col(j));
  return d;
}

RangeVector add_noise(const RangeVector& ranges, const NoiseModel& noise, std::uint64_t stream) {
  if (noise.sigma0 == 0.0) return ranges;
  NoiseStream gen(noise.seed, stream);
  RangeVector out = ranges;
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += gen.next(noise.sigma0);
  return out;
}

RangeMatrix add_noise(const RangeMatrix& ranges, const NoiseModel& noise, std::uint64_t stream) {
  if (noise.sigma0 == 0.0) return ranges;
  NoiseStream gen(noise.seed, stream);
  RangeMatrix out = ranges;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out(i, j) += gen.next(noise.sigma0);
  return out;
}

Eigen::MatrixX3d jacobian_sensor(const SensorConfig& config, const Vec3& target) {
  Eigen::MatrixX3d h(config.size(), 3);
  for (int i = 0; i < config.size(); ++i) {
    const Vec3 diff = target - config.position(i);
    const double d = diff.norm();
    if (!(d > 1e-12)) throw DegenerateGeometry("target coincides with a sensor");
    h.row(i) = diff.transpose() / d;
  }
  return h;
}

Mat3 drot_x(double g) {
  const double c = std::cos(g), s = std::sin(g);
  Mat3 r;
  r << 0, 0, 0,
       0, -s, -c,
       0, c, -s;
  return r;
}

Mat3 drot_y(double t) {
  const double c = std::cos(t), s = std::sin(t);
  Mat3 r;
  r << -s, 0, c,
       0, 0, 0,
       -c, 0, -s;
  return r;
}

Mat3 drot_z(double p) {
  const double c = std::cos(p), s = std::sin(p);
  Mat3 r;
  r << -s, -c, 0,
       c, -s, 0,
       0, 0, 0;
  return r;
}

AgentJacobian jacobian_agent(const SensorConfig& config_a, const Pose6D& pose_b,
                             const SensorConfig& config_b) {
  if (config_a.size() != 4 || config_b.size() != 4) {
    throw InvalidArgument("agent Jacobian needs four sensors on each agent");
  }
  const auto& a = pose_b.attitude;
  const Mat3 rx = rot_x(a.gamma), ry = rot_y(a.theta), rz = rot_z(a.psi);
  // C_B^A = (Rx Ry Rz)^T, so each partial is the transposed partial of R.
  const Mat3 c = (rx * ry * rz).transpose();
  const Mat3 dc_dgamma = (drot_x(a.gamma) * ry * rz).transpose();
  const Mat3 dc_dtheta = (rx * drot_y(a.theta) * rz).transpose();
  const Mat3 dc_dpsi = (rx * ry * drot_z(a.psi)).transpose();

  AgentJacobian h;
  for (int j = 0; j < 4; ++j) {
    const Vec3 pj = config_b.position(j);
    const Vec3 pbj = pose_b.position + c * pj;
    const Vec3 dg = dc_dgamma * pj, dt = dc_dtheta * pj, dp = dc_dpsi * pj;
    for (int i = 0; i < 4; ++i) {
      const Vec3 diff = pbj - config_a.position(i);
      const double d = diff.norm();
      if (!(d > 1e-12)) throw DegenerateGeometry("sensor pair coincides");
      const Vec3 u = diff / d;
      auto row = h.row(4 * j + i);
      row.head<3>() = u.transpose();
      row(3) = u.dot(dg);
      row(4) = u.dot(dt);
      row(5) = u.dot(dp);
    }
  }
  return h;
}

}  // namespace relloc
