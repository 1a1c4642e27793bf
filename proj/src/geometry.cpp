#include "relloc/geometry.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "relloc/errors.hpp"

namespace relloc {

namespace {

constexpr double kOrthoTol = 1e-10;
constexpr double kGimbalMargin = 1e-9;

}  // namespace

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

EulerAngles EulerAngles::normalized() const {
  return {wrap_angle(gamma), theta, wrap_angle(psi)};
}

RotationMatrix::RotationMatrix(const Mat3& m) : m_(m) {
  if (!m.allFinite()) throw InvalidArgument("rotation matrix has non-finite entries");
  const double ortho_err = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > kOrthoTol) throw InvalidArgument("matrix is not orthonormal");
  if (std::abs(m.determinant() - 1.0) > kOrthoTol) {
    throw InvalidArgument("matrix is not a proper rotation (det != +1)");
  }
}

RotationMatrix RotationMatrix::transpose() const {
  return RotationMatrix(m_.transpose(), Unchecked{});
}

RotationMatrix orthonormal_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) throw InvalidArgument("matrix is a reflection");
  return RotationMatrix(r, RotationMatrix::Unchecked{});
}

Mat3 rot_x(double g) {
  const double c = std::cos(g), s = std::sin(g);
  Mat3 r;
  r << 1, 0, 0,
       0, c, -s,
       0, s, c;
  return r;
}

Mat3 rot_y(double t) {
  const double c = std::cos(t), s = std::sin(t);
  Mat3 r;
  r << c, 0, s,
       0, 1, 0,
       -s, 0, c;
  return r;
}

Mat3 rot_z(double p) {
  const double c = std::cos(p), s = std::sin(p);
  Mat3 r;
  r << c, -s, 0,
       s, c, 0,
       0, 0, 1;
  return r;
}

RotationMatrix rotation_from_euler(const EulerAngles& a) {
  if (!std::isfinite(a.gamma) || !std::isfinite(a.theta) || !std::isfinite(a.psi)) {
    throw InvalidArgument("Euler angles must be finite");
  }
  return RotationMatrix(rot_x(a.gamma) * rot_y(a.theta) * rot_z(a.psi),
                        RotationMatrix::Unchecked{});
}

EulerAngles euler_from_rotation(const RotationMatrix& r) {
  const double r13 = r(0, 2);
  if (std::abs(r13) >= 1.0 - kGimbalMargin) {
    throw GimbalLock("pitch at +-90 degrees, roll and yaw are not separable");
  }
  EulerAngles e;
  e.psi = std::atan2(-r(0, 1), r(0, 0));
  e.theta = std::asin(r13);
  e.gamma = std::atan2(-r(1, 2), r(2, 2));
  return e;
}

SensorConfig::SensorConfig(Eigen::Matrix3Xd positions) : positions_(std::move(positions)) {
  if (positions_.cols() < 4) {
    throw InvalidArgument("sensor configuration needs at least 4 sensors, got " +
                          std::to_string(positions_.cols()));
  }
  if (!positions_.allFinite()) throw InvalidArgument("sensor positions must be finite");
  const Eigen::Matrix3Xd centered = positions_.colwise() - centroid();
  Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(centered);
  const Vec3 sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(2) <= 1e-9 * sv(0)) {
    throw InvalidArgument("sensor configuration is coplanar or colinear");
  }
}

SensorConfig SensorConfig::unchecked(Eigen::Matrix3Xd positions) {
  return SensorConfig(std::move(positions), Unchecked{});
}

Eigen::Matrix3Xd transform_body_points(const Pose6D& pose, const SensorConfig& config) {
  const Mat3 c_ba = rotation_from_euler(pose.attitude).matrix().transpose();
  Eigen::Matrix3Xd out = c_ba * config.positions();
  out.colwise() += pose.position;
  return out;
}

namespace {

// Base triangle in z = 0 with a vertex on +y, apex above; not yet centered.
Eigen::Matrix<double, 3, 4> raw_regular(double side) {
  const double rb = side / std::sqrt(3.0);
  const double h = side * std::sqrt(2.0 / 3.0);
  Eigen::Matrix<double, 3, 4> p;
  p.col(0) = Vec3(0.0, 0.0, h);
  p.col(1) = Vec3(rb * std::cos(deg2rad(210.0)), rb * std::sin(deg2rad(210.0)), 0.0);
  p.col(2) = Vec3(rb * std::cos(deg2rad(330.0)), rb * std::sin(deg2rad(330.0)), 0.0);
  p.col(3) = Vec3(0.0, rb, 0.0);
  return p;
}

Eigen::Matrix3Xd centered(const Eigen::Matrix3Xd& p) {
  const Vec3 c = p.rowwise().mean();
  return p.colwise() - c;
}

}  // namespace

SensorConfig regular_tetrahedron(double side) {
  if (!(side > 0.0) || !std::isfinite(side)) {
    throw InvalidArgument("tetrahedron side must be positive");
  }
  return SensorConfig(centered(raw_regular(side)));
}

SensorConfig isosceles_tetrahedron(double vertex_angle_deg, double unit_edge) {
  if (!(vertex_angle_deg > 0.0 && vertex_angle_deg < 120.0)) {
    throw InvalidArgument("vertex angle must lie in (0, 120) degrees");
  }
  if (!(unit_edge > 0.0) || !std::isfinite(unit_edge)) {
    throw InvalidArgument("unit edge must be positive");
  }
  // Sensors 2 and 3 span the hinge; the apex swings around it while keeping
  // unit distance to both. Its distance to sensor 4 is the varying edge.
  Eigen::Matrix3Xd p = raw_regular(unit_edge);
  const Vec3 hinge_mid = 0.5 * (p.col(1) + p.col(2));
  const double rho = unit_edge * std::sqrt(3.0) / 2.0;
  const Vec3 w1 = (p.col(3) - hinge_mid) / rho;
  Vec3 w2 = (p.col(0) - hinge_mid) - w1.dot(p.col(0) - hinge_mid) * w1;
  w2.normalize();
  const double half = std::asin(2.0 / std::sqrt(3.0) * std::sin(deg2rad(vertex_angle_deg) / 2.0));
  const double phi = 2.0 * half;
  p.col(0) = hinge_mid + rho * (std::cos(phi) * w1 + std::sin(phi) * w2);
  return SensorConfig(centered(p));
}

}  // namespace relloc
