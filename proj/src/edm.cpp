#include "relloc/edm.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "relloc/errors.hpp"

namespace relloc {

namespace {

template <int N>
using MatN = Eigen::Matrix<double, N, N>;

constexpr double kGramPsdTolerance = 1e-8;
// |det| / |m|_F^3 above which the polar factor comes from Newton iteration.
constexpr double kPolarNewtonConditioning = 1e-6;

// -Vc m Vc with Vc = I - 11^T / n, computed by double centering.
template <int N>
MatN<N> neg_double_centered(const MatN<N>& m) {
  const auto row_mean = m.rowwise().mean().eval();
  const auto col_mean = m.colwise().mean().eval();
  const double grand = m.mean();
  MatN<N> b = -m;
  b.colwise() += row_mean;
  b.rowwise() += col_mean;
  b.array() -= grand;
  return b;
}

template <int N>
EdmCheck classify(const Eigen::Matrix<double, N, 1>& lambda, double tol) {
  const double scale = lambda.cwiseAbs().maxCoeff();
  EdmCheck out;
  if (scale == 0.0) {
    out.valid = true;
    return out;
  }
  out.valid = lambda.minCoeff() >= -tol * scale;
  out.embed_rank = static_cast<int>((lambda.array() > tol * scale).count());
  return out;
}

// Clip the spectrum of -Vc m Vc to its top `rank` nonnegative eigenvalues
// and map the resulting centered Gram matrix back to an EDM.
template <int N>
MatN<N> project_spectrum(const Eigen::SelfAdjointEigenSolver<MatN<N>>& eig, int rank) {
  const auto& lambda = eig.eigenvalues();  // ascending
  const auto& t = eig.eigenvectors();
  const Eigen::Index n = lambda.size();
  MatN<N> b = MatN<N>::Zero(n, n);
  for (Eigen::Index k = n - 1; k >= std::max<Eigen::Index>(0, n - rank); --k) {
    const double l = std::max(lambda(k), 0.0);
    if (l > 0.0) b.noalias() += l * t.col(k) * t.col(k).transpose();
  }
  const auto half_diag = (0.5 * b.diagonal()).eval();
  MatN<N> e = -b;
  e.colwise() += half_diag;
  e.rowwise() += half_diag.transpose();
  e.diagonal().setZero();
  return e;
}

template <int N>
constexpr int kReduced = N == Eigen::Dynamic ? Eigen::Dynamic : N - 1;

// Rank-3 realization of the closest EDM, centered on its centroid. Rigidly
// equivalent to realizing the projected EDM with its first point at the
// origin, without the second eigendecomposition. The all-ones null vector of
// the centered matrix is reflected onto the last axis and dropped, so the
// eigensolver sees one dimension less.
template <int N>
Eigen::Matrix<double, 3, N> centered_realization(const MatN<N>& measured) {
  using VecN = Eigen::Matrix<double, N, 1>;
  constexpr int R = kReduced<N>;
  const MatN<N> b = neg_double_centered<N>(measured);
  const Eigen::Index n = b.rows();
  VecN w = VecN::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  w(n - 1) -= 1.0;
  w.normalize();
  MatN<N> qbq = b - 2.0 * w * (w.transpose() * b);
  qbq -= 2.0 * (qbq * w) * w.transpose();
  const Eigen::Matrix<double, R, R> reduced = qbq.topLeftCorner(n - 1, n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, R, R>> eig(reduced);
  const auto& lambda = eig.eigenvalues();
  const Eigen::Index m = lambda.size();
  Eigen::Matrix<double, 3, N> p(3, n);
  p.setZero();
  for (int k = 0; k < 3 && k < m; ++k) {
    const Eigen::Index idx = m - 1 - k;
    VecN v = VecN::Zero(n);
    v.head(m) = eig.eigenvectors().col(idx);
    v -= 2.0 * w.dot(v) * w;
    p.row(k) = std::sqrt(0.5 * std::max(lambda(idx), 0.0)) * v.transpose();
  }
  return p;
}

// Gram matrix with point 1 at the origin and its rank-3 factor.
template <int N>
Eigen::Matrix<double, 3, N> realize_first_at_origin(const MatN<N>& e, MatN<N>* gram_out = nullptr) {
  const auto e1 = e.col(0).eval();
  MatN<N> g = e;
  g.colwise() -= e1;
  g.rowwise() -= e1.transpose();
  g *= -0.5;
  Eigen::SelfAdjointEigenSolver<MatN<N>> eig(g);
  const auto& lambda = eig.eigenvalues();
  const double scale = lambda.cwiseAbs().maxCoeff();
  if (lambda.minCoeff() < -kGramPsdTolerance * scale) {
    throw InconsistentInput("Gram matrix of the EDM is not positive semi-definite");
  }
  const Eigen::Index n = lambda.size();
  Eigen::Matrix<double, 3, N> p(3, n);
  p.setZero();
  for (int k = 0; k < 3 && k < n; ++k) {
    const Eigen::Index idx = n - 1 - k;
    p.row(k) = std::sqrt(std::max(lambda(idx), 0.0)) * eig.eigenvectors().col(idx).transpose();
  }
  if (gram_out) *gram_out = g;
  return p;
}

// Orthogonal polar factor of m^T, i.e. V U^T for m = U S V^T.
Mat3 polar_factor_transposed(const Mat3& m) {
  const double norm = m.norm();
  if (std::abs(m.determinant()) > kPolarNewtonConditioning * norm * norm * norm) {
    // Scaled Newton iteration.
    Mat3 x = m.transpose();
    for (int it = 0; it < 30; ++it) {
      const Mat3 inv_t = x.inverse().transpose();
      const double gamma = it < 10 ? std::sqrt(inv_t.norm() / x.norm()) : 1.0;
      const Mat3 next = 0.5 * (gamma * x + inv_t / gamma);
      const double change = (next - x).norm();
      x = next;
      if (change <= 1e-15) return x;
      if (change <= 1e-8) {
        x = 0.5 * (x + x.inverse().transpose());
        return x;
      }
    }
  }
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();
  if (!(s(0) > 0.0) || s(2) <= 1e-12 * s(0)) {
    throw AlignmentUnderdetermined("point sets do not span three dimensions");
  }
  return svd.matrixV() * svd.matrixU().transpose();
}

// Translates and rotates a realization so that its first k columns land on
// the anchors (translation from the anchor centroids, rotation by orthogonal
// Procrustes), returning every realized point in the anchor frame.
template <int N>
Eigen::Matrix<double, 3, N> align_to_anchors(const Eigen::Matrix<double, 3, N>& realized,
                                             const Eigen::Matrix3Xd& anchors,
                                             AnchorAlignment alignment) {
  const Eigen::Index k = anchors.cols();
  const Vec3 c_anchor = anchors.rowwise().mean();
  const Vec3 c_real = realized.leftCols(k).rowwise().mean();
  Eigen::Matrix<double, 3, N> rel = realized;
  rel.colwise() -= c_real;  // P1 - c_A
  const Eigen::Index used = alignment == AnchorAlignment::kAllFour ? k : 3;
  if (used < 3) throw InvalidArgument("Procrustes needs matching 3 x m inputs with m >= 3");
  Mat3 m = Mat3::Zero();
  for (Eigen::Index i = 0; i < used; ++i) m.noalias() += rel.col(i) * (anchors.col(i) - c_anchor).transpose();
  Eigen::Matrix<double, 3, N> out = polar_factor_transposed(m) * rel;
  out.colwise() += c_anchor;
  return out;
}

template <int N>
MatN<N> anchor_block_edm(const Eigen::Matrix3Xd& p, Eigen::Index size) {
  MatN<N> e = MatN<N>::Zero(size, size);
  const Eigen::Index k = p.cols();
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j) e(i, j) = e(j, i) = (p.col(i) - p.col(j)).squaredNorm();
  return e;
}

template <int N>
Vec3 edmt_sensor_impl(const SensorConfig& config, const RangeVector& measured) {
  const Eigen::Index k = config.size();
  MatN<N> e = anchor_block_edm<N>(config.positions(), k + 1);
  for (Eigen::Index i = 0; i < k; ++i) e(i, k) = e(k, i) = measured(i) * measured(i);
  const Eigen::Matrix<double, 3, N> aligned =
      align_to_anchors<N>(centered_realization<N>(e), config.positions(), AnchorAlignment::kAllFour);
  return aligned.col(k);
}

}  // namespace

SquaredDistanceMatrix::SquaredDistanceMatrix(Eigen::MatrixXd entries) : m_(std::move(entries)) {
  if (m_.rows() != m_.cols() || m_.rows() < 2) {
    throw InvalidArgument("squared distance matrix must be square with n >= 2");
  }
  if (!m_.allFinite()) throw InvalidArgument("squared distance matrix has non-finite entries");
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw InvalidArgument("squared distance matrix is not symmetric");
  }
  if (m_.diagonal().cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw InvalidArgument("squared distance matrix diagonal is not zero");
  }
  if (m_.minCoeff() < 0.0) throw InvalidArgument("squared distance matrix has negative entries");
}

SquaredDistanceMatrix build_sdm(const Eigen::Matrix3Xd& points) {
  const Eigen::Index n = points.cols();
  if (n < 2) throw InvalidArgument("need at least two points");
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      e(i, j) = e(j, i) = (points.col(i) - points.col(j)).squaredNorm();
  return SquaredDistanceMatrix(std::move(e));
}

EdmCheck is_edm(const SquaredDistanceMatrix& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      neg_double_centered<Eigen::Dynamic>(m.matrix()), Eigen::EigenvaluesOnly);
  return classify<Eigen::Dynamic>(eig.eigenvalues(), tol);
}

SquaredDistanceMatrix closest_edm(const SquaredDistanceMatrix& m, int target_rank) {
  if (target_rank < 1 || target_rank >= m.size()) {
    throw InvalidArgument("target rank must lie in [1, n)");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(neg_double_centered<Eigen::Dynamic>(m.matrix()));
  Eigen::MatrixXd e = project_spectrum<Eigen::Dynamic>(eig, target_rank);
  // Roundoff can leave tiny negative off-diagonal entries for near-coincident points.
  e = e.cwiseMax(0.0);
  e = 0.5 * (e + e.transpose()).eval();
  return SquaredDistanceMatrix(std::move(e));
}

GramFactor realize_from_edm(const SquaredDistanceMatrix& e) {
  GramFactor out;
  Eigen::MatrixXd gram;
  out.realized = realize_first_at_origin<Eigen::Dynamic>(e.matrix(), &gram);
  out.gram = std::move(gram);
  return out;
}

Mat3 orthogonal_procrustes(const Eigen::Matrix3Xd& source, const Eigen::Matrix3Xd& reference) {
  if (source.cols() != reference.cols() || source.cols() < 3) {
    throw InvalidArgument("Procrustes needs matching 3 x m inputs with m >= 3");
  }
  return polar_factor_transposed(reference * source.transpose());
}

RotationMatrix procrustes(const Eigen::Matrix3Xd& source, const Eigen::Matrix3Xd& reference) {
  if (source.cols() != reference.cols() || source.cols() < 3) {
    throw InvalidArgument("Procrustes needs matching 3 x m inputs with m >= 3");
  }
  const Mat3 m = reference * source.transpose();
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();
  if (!(s(0) > 0.0) || s(1) <= 1e-12 * s(0)) {
    throw AlignmentUnderdetermined("cross-covariance has rank < 2");
  }
  const Mat3 v = svd.matrixV();
  const Mat3 u = svd.matrixU();
  Mat3 fix = Mat3::Identity();
  if ((v * u.transpose()).determinant() < 0.0) fix(2, 2) = -1.0;
  return orthonormal_rotation(v * fix * u.transpose());
}

Pose6D pose_from_vertices(const Eigen::Matrix<double, 3, 4>& vertices, const SensorConfig& config_b) {
  if (config_b.size() != 4) throw InvalidArgument("agent B must carry four sensors");
  const Vec3 c_est = vertices.rowwise().mean();
  const Vec3 c_body = config_b.centroid();
  // vertices - c_est ~= C_B^A (p_j - c_body); C_A^B is its transpose.
  const RotationMatrix c_ba =
      procrustes(vertices.colwise() - c_est, config_b.positions().colwise() - c_body);
  Pose6D pose;
  pose.attitude = euler_from_rotation(c_ba.transpose());
  pose.position = c_est - c_ba.matrix() * c_body;
  return pose;
}

Vec3 edmt_sensor(const SensorConfig& config, const RangeVector& measured) {
  if (measured.size() != config.size()) throw InvalidArgument("one range per anchor expected");
  if (!measured.allFinite()) throw InvalidArgument("measured ranges must be finite");
  if (config.size() == 4) return edmt_sensor_impl<5>(config, measured);
  return edmt_sensor_impl<Eigen::Dynamic>(config, measured);
}

AgentEstimate edmt_agent_jointly(const SensorConfig& config_a, const RangeMatrix& measured,
                                 const SensorConfig& config_b, AnchorAlignment alignment) {
  if (config_a.size() != 4 || config_b.size() != 4) {
    throw InvalidArgument("agent localization needs four sensors on each agent");
  }
  if (!measured.allFinite()) throw InvalidArgument("measured ranges must be finite");
  MatN<8> e = MatN<8>::Zero();
  const auto& pa = config_a.positions();
  const auto& pb = config_b.positions();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i < j) {
        e(i, j) = e(j, i) = (pa.col(i) - pa.col(j)).squaredNorm();
        e(4 + i, 4 + j) = e(4 + j, 4 + i) = (pb.col(i) - pb.col(j)).squaredNorm();
      }
      e(i, 4 + j) = e(4 + j, i) = measured(i, j) * measured(i, j);
    }
  }
  const Eigen::Matrix<double, 3, 8> aligned =
      align_to_anchors<8>(centered_realization<8>(e), pa, alignment);
  AgentEstimate out;
  out.vertices = aligned.rightCols<4>();
  out.pose = pose_from_vertices(out.vertices, config_b);
  return out;
}

AgentEstimate edmt_agent_individually(const SensorConfig& config_a, const RangeMatrix& measured,
                                      const SensorConfig& config_b) {
  if (config_a.size() != 4 || config_b.size() != 4) {
    throw InvalidArgument("agent localization needs four sensors on each agent");
  }
  AgentEstimate out;
  for (int j = 0; j < 4; ++j) out.vertices.col(j) = edmt_sensor(config_a, measured.col(j));
  out.pose = pose_from_vertices(out.vertices, config_b);
  return out;
}

}  // namespace relloc
