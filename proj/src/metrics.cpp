#include "relloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "relloc/errors.hpp"

namespace relloc {

namespace {

// Inverse of a symmetric positive definite normal matrix through its
// eigen-decomposition, rejecting ill-conditioned ones.
template <int N>
Eigen::Matrix<double, N, N> checked_inverse(const Eigen::Matrix<double, N, N>& normal) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> eig(normal);
  const auto& lambda = eig.eigenvalues();
  const double lo = lambda(0), hi = lambda(N - 1);
  if (!(lo > 0.0) || hi / lo > kMaxConditionNumber) {
    throw DegenerateGeometry("normal matrix is singular or ill-conditioned");
  }
  return eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::vector<double> GridAxis::points() const {
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  for (long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

void SphericalGrid::validate() const {
  for (const GridAxis* axis : {&radial, &polar, &azimuth}) {
    if (!(axis->step > 0.0)) throw InvalidArgument("grid steps must be positive");
    if (!(axis->stop >= axis->start)) throw InvalidArgument("grid range is empty");
  }
  if (!(radial.start > 0.0)) throw InvalidArgument("radial range must be positive");
}

Vec3 spherical_to_cartesian(double r, double polar_deg, double azimuth_deg) {
  const double t = deg2rad(polar_deg), p = deg2rad(azimuth_deg);
  return r * Vec3(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t));
}

double gdop_sensor(const SensorConfig& config, const Vec3& target) {
  const Eigen::MatrixX3d h = jacobian_sensor(config, target);
  const Mat3 normal = h.transpose() * h;
  return std::sqrt(checked_inverse<3>(normal).trace());
}

AgentGdop gdop_agent(const SensorConfig& config_a, const Pose6D& pose_b,
                     const SensorConfig& config_b) {
  const AgentJacobian h = jacobian_agent(config_a, pose_b, config_b);
  const Eigen::Matrix<double, 6, 6> normal = h.transpose() * h;
  const Eigen::Matrix<double, 6, 6> d = checked_inverse<6>(normal);
  return {std::sqrt(d(0, 0) + d(1, 1) + d(2, 2)), std::sqrt(d(3, 3)), std::sqrt(d(4, 4)),
          std::sqrt(d(5, 5))};
}

double crlb_sensor(double gdop, const NoiseModel& noise) {
  if (!std::isfinite(gdop)) throw InvalidArgument("GDOP must be finite");
  return noise.sigma0 * gdop;
}

AgentCrlb crlb_agent(const AgentGdop& g, const NoiseModel& noise) {
  return {crlb_sensor(g.position, noise), crlb_sensor(g.roll, noise),
          crlb_sensor(g.pitch, noise), crlb_sensor(g.yaw, noise)};
}

GdopSweep gdop_sweep(const SensorConfig& config, const SphericalGrid& grid) {
  grid.validate();
  GdopSweep out;
  double sum = 0.0;
  for (double r : grid.radial.points()) {
    for (double polar : grid.polar.points()) {
      for (double az : grid.azimuth.points()) {
        try {
          const double g = gdop_sensor(config, spherical_to_cartesian(r, polar, az));
          out.samples.push_back({r, polar, az, g});
          sum += g;
          out.maximum = std::max(out.maximum, g);
        } catch (const DegenerateGeometry&) {
          ++out.missing;
        }
      }
    }
  }
  if (!out.samples.empty()) out.average = sum / static_cast<double>(out.samples.size());
  return out;
}

void write_sweep_csv(std::ostream& os, const GdopSweep& sweep) {
  os << "r_cm,polar_deg,azimuth_deg,gdop\n";
  for (const auto& s : sweep.samples) {
    os << fmt(s.r_cm) << ',' << fmt(s.polar_deg) << ',' << fmt(s.azimuth_deg) << ','
       << fmt(s.gdop) << '\n';
  }
  os << "average,,," << fmt(sweep.average) << '\n';
  os << "maximum,,," << fmt(sweep.maximum) << '\n';
  os << "missing,,," << sweep.missing << '\n';
}

}  // namespace relloc
