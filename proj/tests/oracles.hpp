#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library; plain loops over std::array / Eigen storage only.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace oracle {

using M3 = std::array<std::array<double, 3>, 3>;

inline M3 to_m3(const Eigen::Matrix3d& m) {
  M3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i][j] = m(i, j);
  return out;
}

inline Eigen::Matrix3d from_m3(const M3& m) {
  Eigen::Matrix3d out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = m[i][j];
  return out;
}

inline M3 product(const M3& a, const M3& b) {
  M3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
      c[i][j] = s;
    }
  return c;
}

// Basic rotations written out entry by entry.
inline M3 rx(double g) { return {{{1, 0, 0}, {0, std::cos(g), -std::sin(g)}, {0, std::sin(g), std::cos(g)}}}; }
inline M3 ry(double t) { return {{{std::cos(t), 0, std::sin(t)}, {0, 1, 0}, {-std::sin(t), 0, std::cos(t)}}}; }
inline M3 rz(double p) { return {{{std::cos(p), -std::sin(p), 0}, {std::sin(p), std::cos(p), 0}, {0, 0, 1}}}; }

inline double det3(const M3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Inverse through the adjugate.
inline M3 adjugate_inverse(const M3& m) {
  const double d = det3(m);
  M3 inv{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / d;
    }
  return inv;
}

// Gauss-Jordan elimination with partial pivoting; returns the inverse.
inline std::vector<std::vector<double>> gauss_inverse(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const double p = a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] /= p;
      inv[c][k] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

inline double dist(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

inline std::vector<double> sorted_pairwise(const Eigen::Matrix3Xd& p) {
  std::vector<double> d;
  for (Eigen::Index i = 0; i < p.cols(); ++i)
    for (Eigen::Index j = i + 1; j < p.cols(); ++j) d.push_back(dist(p.col(i), p.col(j)));
  std::sort(d.begin(), d.end());
  return d;
}

// Central differences of f: R^n -> R^m.
inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, const Eigen::VectorXd& h) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd j(f0.size(), x.size());
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    Eigen::VectorXd xp = x, xm = x;
    xp(c) += h(c);
    xm(c) -= h(c);
    j.col(c) = (f(xp) - f(xm)) / (2.0 * h(c));
  }
  return j;
}

inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    Eigen::VectorXd xp = x, xm = x;
    xp(c) += h;
    xm(c) -= h;
    g(c) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Uniform random rotation from a normalized Gaussian quaternion.
inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  double q[4];
  double norm = 0.0;
  for (double& v : q) {
    v = n(rng);
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (double& v : q) v /= norm;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
       2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
       2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
  return r;
}

// Signed volume (times 6) spanned by four points.
inline double tetra_volume6(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                            const Eigen::Vector3d& d) {
  M3 m{};
  for (int k = 0; k < 3; ++k) {
    m[0][k] = b[k] - a[k];
    m[1][k] = c[k] - a[k];
    m[2][k] = d[k] - a[k];
  }
  return det3(m);
}

}  // namespace oracle
