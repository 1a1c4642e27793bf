#pragma once

#include <vector>

#include <Eigen/Core>

#include "relloc/geometry.hpp"
#include "relloc/ranging.hpp"

namespace relloc {

/// Hollow, symmetric, nonnegative n x n matrix of squared distances (cm^2).
/// Not necessarily a Euclidean distance matrix; see is_edm.
class SquaredDistanceMatrix {
 public:
  /// Checks symmetry (1e-9 relative to the largest entry), zero diagonal
  /// and nonnegativity. Throws InvalidArgument otherwise.
  explicit SquaredDistanceMatrix(Eigen::MatrixXd entries);

  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  int size() const { return static_cast<int>(m_.rows()); }

 private:
  Eigen::MatrixXd m_;
};

struct EdmCheck {
  bool valid = false;
  int embed_rank = 0;
};

struct GramFactor {
  Eigen::MatrixXd gram;       // Gram matrix with the first point at the origin
  Eigen::Matrix3Xd realized;  // realized^T realized = gram, first column zero
};

/// Estimated sensors of the target agent plus the pose they imply.
struct AgentEstimate {
  Pose6D pose;
  Eigen::Matrix<double, 3, 4> vertices;
};

/// Which anchors fix the rotation when aligning an EDMT-jointly realization.
/// kFirstThree reproduces the three-column variant of the published listing.
enum class AnchorAlignment { kAllFour, kFirstThree };

/// Relative eigenvalue tolerance for PSD and rank decisions.
constexpr double kEigenTolerance = 1e-10;

SquaredDistanceMatrix build_sdm(const Eigen::Matrix3Xd& points);

/// Schoenberg test on -Vc m Vc. Tolerances are relative to the largest
/// eigenvalue magnitude of that matrix.
EdmCheck is_edm(const SquaredDistanceMatrix& m, double tol = kEigenTolerance);

/// Closest EDM of embedding dimension <= target_rank in the centered
/// eigenvalue-clipping sense (s = 1/n weights).
SquaredDistanceMatrix closest_edm(const SquaredDistanceMatrix& m, int target_rank = 3);

/// Realizes an EDM of embedding rank <= 3 with its first point at the
/// origin. Throws InconsistentInput if the Gram matrix is not PSD.
GramFactor realize_from_edm(const SquaredDistanceMatrix& e);

/// Proper rotation Q minimizing ||source - Q reference||_F for
/// column-centered 3 x m inputs. A reflection optimum is turned into the
/// best proper rotation by flipping the weakest singular direction.
RotationMatrix procrustes(const Eigen::Matrix3Xd& source, const Eigen::Matrix3Xd& reference);

/// Unconstrained orthogonal Procrustes: may return a reflection. Needed when
/// the reference comes out of an EDM realization, whose handedness is arbitrary.
Mat3 orthogonal_procrustes(const Eigen::Matrix3Xd& source, const Eigen::Matrix3Xd& reference);

/// Pose of agent B from estimated positions of its four sensors: centroid
/// plus the Procrustes attitude against config_b.
Pose6D pose_from_vertices(const Eigen::Matrix<double, 3, 4>& vertices, const SensorConfig& config_b);

/// EDM-based trilateration of a single target from k anchor ranges.
Vec3 edmt_sensor(const SensorConfig& config, const RangeVector& measured);

AgentEstimate edmt_agent_jointly(const SensorConfig& config_a, const RangeMatrix& measured,
                                 const SensorConfig& config_b,
                                 AnchorAlignment alignment = AnchorAlignment::kAllFour);

/// edmt_sensor on each B sensor's column, then pose_from_vertices.
AgentEstimate edmt_agent_individually(const SensorConfig& config_a, const RangeMatrix& measured,
                                      const SensorConfig& config_b);

}  // namespace relloc
