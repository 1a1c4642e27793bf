#pragma once

#include <vector>

#include <Eigen/Core>

namespace relloc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Roll (gamma, about x), pitch (theta, about y), yaw (psi, about z), radians.
struct EulerAngles {
  double gamma = 0.0;
  double theta = 0.0;
  double psi = 0.0;

  /// Wraps gamma/psi to (-pi, pi]. theta is left alone; callers that need
  /// the principal branch should go through rotation_from_euler and back.
  EulerAngles normalized() const;
  bool operator==(const EulerAngles&) const = default;
};

/// Proper rotation matrix. Construction from a raw matrix checks
/// orthonormality and det = +1 to 1e-10.
class RotationMatrix {
 public:
  RotationMatrix() : m_(Mat3::Identity()) {}
  explicit RotationMatrix(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }
  RotationMatrix transpose() const;

 private:
  struct Unchecked {};
  RotationMatrix(const Mat3& m, Unchecked) : m_(m) {}
  friend RotationMatrix rotation_from_euler(const EulerAngles&);
  friend RotationMatrix orthonormal_rotation(const Mat3&);

  Mat3 m_;
};

/// Anchor layout in the body frame, one column per sensor, centimeters.
class SensorConfig {
 public:
  /// Validates k >= 4 and full 3D rank of the centered layout.
  explicit SensorConfig(Eigen::Matrix3Xd positions);

  /// Skips the layout checks. Only for analysing degenerate layouts
  /// (coplanar anchors and the like); estimators may throw on these.
  static SensorConfig unchecked(Eigen::Matrix3Xd positions);

  const Eigen::Matrix3Xd& positions() const { return positions_; }
  Vec3 position(int i) const { return positions_.col(i); }
  int size() const { return static_cast<int>(positions_.cols()); }
  Vec3 centroid() const { return positions_.rowwise().mean(); }

 private:
  struct Unchecked {};
  SensorConfig(Eigen::Matrix3Xd positions, Unchecked) : positions_(std::move(positions)) {}

  Eigen::Matrix3Xd positions_;
};

/// Agent state: translation of the body origin (cm) and attitude.
struct Pose6D {
  Vec3 position = Vec3::Zero();
  EulerAngles attitude;
};

// Basic rotations about x, y, z.
Mat3 rot_x(double gamma);
Mat3 rot_y(double theta);
Mat3 rot_z(double psi);

/// R = Rx(gamma) * Ry(theta) * Rz(psi), i.e. the A-to-B frame rotation
/// for the yaw-pitch-roll sequence.
RotationMatrix rotation_from_euler(const EulerAngles& angles);

/// Inverse of rotation_from_euler on the principal branch. Throws GimbalLock
/// when |R13| >= 1 - 1e-9.
EulerAngles euler_from_rotation(const RotationMatrix& r);

/// Re-orthonormalizes a near-rotation (polar factor) and wraps it. Used on
/// matrices assembled from SVD factors, which are orthonormal to roundoff.
RotationMatrix orthonormal_rotation(const Mat3& m);

/// p_Bj = p_B + C_B^A p_j with C_B^A = R(gamma, theta, psi)^T.
Eigen::Matrix3Xd transform_body_points(const Pose6D& pose, const SensorConfig& config);

/// Four sensors on a regular tetrahedron with the given edge length. Apex
/// first, on +z; base triangle parallel to the xy-plane with a vertex on +y.
/// Centroid at the origin.
SensorConfig regular_tetrahedron(double side);

/// Tetrahedron with five edges equal to unit_edge and the edge between the
/// apex (sensor 1) and sensor 4 equal to 2 unit_edge sin(vertex_angle / 2).
/// Matches regular_tetrahedron(unit_edge) at 60 degrees; coplanar at 120.
SensorConfig isosceles_tetrahedron(double vertex_angle_deg, double unit_edge);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

constexpr double kPi = 3.14159265358979323846;
inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace relloc
