#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "relloc/errors.hpp"
#include "relloc/ranging.hpp"

using namespace relloc;

namespace {

SensorConfig single_anchor_at_origin() {
  Eigen::Matrix3Xd p = Eigen::Matrix3Xd::Zero(3, 1);
  return SensorConfig::unchecked(p);
}

}  // namespace

TEST_SUITE("ranging") {

TEST_CASE("sensor ranges") {
  const SensorConfig tet = regular_tetrahedron(100);
  SUBCASE("straight above the apex") {
    const RangeVector d = true_ranges_sensor(tet, tet.position(0) + Vec3(0, 0, 100));
    CHECK(d(0) == doctest::Approx(100.0).epsilon(1e-14));
  }
  SUBCASE("3-4-5") {
    const RangeVector d = true_ranges_sensor(single_anchor_at_origin(), Vec3(3, 4, 0));
    CHECK(d(0) == 5.0);
  }
  SUBCASE("on the symmetry axis the base ranges coincide") {
    const Vec3 t(0, 0, 300);
    const RangeVector d = true_ranges_sensor(tet, t);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(d(i) - oracle::dist(tet.position(i), t)) < 1e-12);
    CHECK(std::abs(d(1) - d(2)) < 1e-12);
    CHECK(std::abs(d(1) - d(3)) < 1e-12);
    CHECK(d(0) < d(1));
  }
  SUBCASE("target on an anchor") {
    CHECK_THROWS_AS(true_ranges_sensor(tet, tet.position(2)), DegenerateGeometry);
  }
}

TEST_CASE("agent ranges") {
  const SensorConfig tet = regular_tetrahedron(100);
  SUBCASE("entries are distances to transformed B sensors") {
    const Pose6D pose{Vec3(40, -70, 250), {0.3, -0.2, 1.1}};
    const RangeMatrix m = true_ranges_agent(tet, pose, tet);
    const oracle::M3 r = oracle::product(oracle::product(oracle::rx(0.3), oracle::ry(-0.2)), oracle::rz(1.1));
    for (int j = 0; j < 4; ++j) {
      // p_Bj = p_B + R^T p_j
      Vec3 bj = pose.position;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) bj(a) += r[b][a] * tet.position(j)(b);
      for (int i = 0; i < 4; ++i) CHECK(std::abs(m(i, j) - oracle::dist(tet.position(i), bj)) < 1e-10);
    }
  }
  SUBCASE("on-axis identical tetrahedra keep the base symmetry") {
    const RangeMatrix m = true_ranges_agent(tet, {Vec3(0, 0, 300), {}}, tet);
    CHECK(std::abs(m(1, 1) - m(2, 2)) < 1e-10);
    CHECK(std::abs(m(1, 1) - m(3, 3)) < 1e-10);
    CHECK(std::abs(m(0, 1) - m(0, 2)) < 1e-10);
    CHECK(std::abs(m(1, 0) - m(2, 0)) < 1e-10);
    CHECK(std::abs(m(1, 2) - m(2, 1)) < 1e-10);
  }
  SUBCASE("translation only matches per-sensor ranges") {
    const Vec3 t(10, 20, 200);
    const RangeMatrix m = true_ranges_agent(tet, {t, {}}, tet);
    for (int j = 0; j < 4; ++j) {
      const RangeVector col = true_ranges_sensor(tet, t + tet.position(j));
      for (int i = 0; i < 4; ++i) CHECK(std::abs(m(i, j) - col(i)) < 1e-12);
    }
  }
  SUBCASE("yaw is periodic") {
    const RangeMatrix a = true_ranges_agent(tet, {Vec3(0, 0, 300), {}}, tet);
    const RangeMatrix b = true_ranges_agent(tet, {Vec3(0, 0, 300), {0, 0, 2 * kPi}}, tet);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("coincident sensors") {
    CHECK_THROWS_AS(true_ranges_agent(tet, Pose6D{}, tet), DegenerateGeometry);
  }
}

TEST_CASE("noise") {
  const RangeVector clean = true_ranges_sensor(regular_tetrahedron(100), Vec3(50, 60, 300));
  SUBCASE("zero sigma is exact") {
    CHECK(add_noise(clean, {0.0, 7}, 3) == clean);
    const RangeMatrix m = RangeMatrix::Constant(250.0);
    CHECK(add_noise(m, {0.0, 7}, 3) == m);
  }
  SUBCASE("same key, same draws") {
    CHECK(add_noise(clean, {5.0, 11}, 9) == add_noise(clean, {5.0, 11}, 9));
    CHECK(add_noise(clean, {5.0, 11}, 9) != add_noise(clean, {5.0, 11}, 10));
    CHECK(add_noise(clean, {5.0, 11}, 9) != add_noise(clean, {5.0, 12}, 9));
  }
  SUBCASE("sample moments over a million draws") {
    NoiseStream s(42, 0);
    const int n = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = 300.0 + s.next(5.0);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sum2 - n * mean * mean) / (n - 1));
    CHECK(std::abs(mean - 300.0) < 0.02);
    CHECK(std::abs(sd - 5.0) < 0.05);
  }
  SUBCASE("noise does not depend on the signal") {
    const RangeVector shifted = clean.array() + 17.0;
    const RangeVector a = add_noise(clean, {5.0, 1}, 4);
    const RangeVector b = add_noise(shifted, {5.0, 1}, 4);
    CHECK(((b - a).array() - 17.0).abs().maxCoeff() < 1e-12);
  }
  SUBCASE("small ranges are not clamped") {
    const RangeVector tiny = RangeVector::Constant(64, 0.01);
    CHECK(add_noise(tiny, {5.0, 3}, 0).minCoeff() < 0.0);
  }
}

TEST_CASE("sensor jacobian") {
  const SensorConfig origin = single_anchor_at_origin();
  CHECK((jacobian_sensor(origin, Vec3(1, 0, 0)).row(0).transpose() - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK((jacobian_sensor(origin, Vec3(3, 4, 0)).row(0).transpose() - Vec3(0.6, 0.8, 0)).norm() < 1e-15);
  CHECK_THROWS_AS(jacobian_sensor(origin, Vec3::Zero()), DegenerateGeometry);

  const SensorConfig tet = regular_tetrahedron(100);
  const Vec3 t(120, -40, 210);
  const Eigen::MatrixX3d h = jacobian_sensor(tet, t);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(h.row(i).norm() - 1.0) < 1e-14);
  const Eigen::MatrixXd fd = oracle::fd_jacobian(
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return true_ranges_sensor(tet, Vec3(x)); },
      Eigen::VectorXd(t), Eigen::VectorXd::Constant(3, 1e-4));
  CHECK((fd - Eigen::MatrixXd(h)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("rotation derivatives") {
  for (double a : {-2.0, 0.0, 0.4, 3.0}) {
    const double h = 1e-6;
    CHECK((drot_x(a) - (rot_x(a + h) - rot_x(a - h)) / (2 * h)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((drot_y(a) - (rot_y(a + h) - rot_y(a - h)) / (2 * h)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((drot_z(a) - (rot_z(a + h) - rot_z(a - h)) / (2 * h)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("agent jacobian") {
  const SensorConfig tet = regular_tetrahedron(100);
  SUBCASE("translation block at identity attitude") {
    const Pose6D pose{Vec3(30, 80, 260), {}};
    const AgentJacobian j = jacobian_agent(tet, pose, tet);
    for (int b = 0; b < 4; ++b) {
      const Eigen::MatrixX3d hs = jacobian_sensor(tet, pose.position + tet.position(b));
      for (int a = 0; a < 4; ++a) CHECK((j.block<1, 3>(4 * b + a, 0) - hs.row(a)).norm() < 1e-14);
    }
  }
  SUBCASE("finite differences") {
    const Pose6D pose{Vec3(-60, 90, 240), {0.2, -0.4, 0.9}};
    Eigen::VectorXd beta(6);
    beta << -60, 90, 240, 0.2, -0.4, 0.9;
    Eigen::VectorXd h(6);
    h << 1e-4, 1e-4, 1e-4, 1e-5, 1e-5, 1e-5;
    const Eigen::MatrixXd fd = oracle::fd_jacobian(
        [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
          const RangeMatrix m = true_ranges_agent(tet, {Vec3(x(0), x(1), x(2)), {x(3), x(4), x(5)}}, tet);
          return Eigen::Map<const Eigen::VectorXd>(m.data(), 16);
        },
        beta, h);
    const AgentJacobian j = jacobian_agent(tet, pose, tet);
    CHECK((fd - Eigen::MatrixXd(j)).cwiseAbs().maxCoeff() < 1e-5);
  }
  SUBCASE("yaw is weakly observable on the axis") {
    const AgentJacobian j = jacobian_agent(tet, {Vec3(0, 0, 400), {}}, tet);
    CHECK(j.col(3).norm() > j.col(5).norm());
    CHECK(j.col(4).norm() > j.col(5).norm());
  }
}

}  // TEST_SUITE
