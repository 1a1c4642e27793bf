#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "relloc/errors.hpp"
#include "relloc/solvers.hpp"

using namespace relloc;

namespace {

// Consecutive squared-range differences, solved through the adjugate.
Vec3 tt_oracle(const SensorConfig& c, const RangeVector& d) {
  const int k = c.size();
  oracle::M3 n{};
  double rhs[3] = {0, 0, 0};
  for (int i = 0; i < k; ++i) {
    const int m = (i + 1) % k;
    double row[3];
    double sa = 0, sb = 0;
    for (int a = 0; a < 3; ++a) {
      row[a] = 2.0 * (c.position(m)[a] - c.position(i)[a]);
      sa += c.position(i)[a] * c.position(i)[a];
      sb += c.position(m)[a] * c.position(m)[a];
    }
    const double v = sb - sa - (d(m) * d(m) - d(i) * d(i));
    for (int a = 0; a < 3; ++a) {
      rhs[a] += row[a] * v;
      for (int b = 0; b < 3; ++b) n[a][b] += row[a] * row[b];
    }
  }
  const oracle::M3 inv = oracle::adjugate_inverse(n);
  Vec3 out;
  for (int a = 0; a < 3; ++a) out[a] = inv[a][0] * rhs[0] + inv[a][1] * rhs[1] + inv[a][2] * rhs[2];
  return out;
}

RangeVector noisy(const RangeVector& d, std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> n(0.0, sigma);
  RangeVector out = d;
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += n(rng);
  return out;
}

RangeMatrix noisy(const RangeMatrix& d, std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> n(0.0, sigma);
  RangeMatrix out = d;
  for (int i = 0; i < 16; ++i) out.data()[i] += n(rng);
  return out;
}

void check_pose(const Pose6D& got, const Pose6D& want, double pos_tol, double ang_tol) {
  CHECK((got.position - want.position).norm() < pos_tol);
  CHECK(std::abs(wrap_angle(got.attitude.gamma - want.attitude.gamma)) < ang_tol);
  CHECK(std::abs(wrap_angle(got.attitude.theta - want.attitude.theta)) < ang_tol);
  CHECK(std::abs(wrap_angle(got.attitude.psi - want.attitude.psi)) < ang_tol);
}

}  // namespace

TEST_SUITE("solvers") {

TEST_CASE("tt sensor") {
  const SensorConfig tet = regular_tetrahedron(100);
  const Vec3 truth(50, 60, 300);
  const RangeVector d = true_ranges_sensor(tet, truth);
  CHECK((tt_sensor(tet, d) - truth).norm() < 1e-6);

  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i) {
    const RangeVector m = noisy(d, rng, 5.0);
    CHECK((tt_sensor(tet, m) - tt_oracle(tet, m)).norm() < 1e-9);
  }

  Eigen::Matrix3Xd planar(3, 4);
  planar << 0, 100, 0, 100, 0, 0, 100, 100, 0, 0, 0, 0;
  CHECK_THROWS_AS(tt_sensor(SensorConfig::unchecked(planar), d), DegenerateGeometry);
  CHECK_THROWS_AS(tt_sensor(tet, d.head(3)), InvalidArgument);
}

TEST_CASE("tt agent") {
  const SensorConfig tet = regular_tetrahedron(100);
  const Pose6D truth{Vec3(40, 50, 280), {0.1, 0.2, 0.3}};
  const RangeMatrix d = true_ranges_agent(tet, truth, tet);
  const AgentEstimate e = tt_agent(tet, d, tet);
  check_pose(e.pose, truth, 1e-6, 1e-8);
  std::mt19937_64 rng(2);
  const RangeMatrix m = noisy(d, rng, 5.0);
  const AgentEstimate n = tt_agent(tet, m, tet);
  Vec3 mean = Vec3::Zero();
  for (int j = 0; j < 4; ++j) mean += tt_sensor(tet, m.col(j));
  CHECK((n.pose.position - mean / 4.0).norm() < 1e-12);
}

TEST_CASE("fro-cvx sensor") {
  const SensorConfig tet = regular_tetrahedron(100);
  const Vec3 truth(50, 60, 300);
  const RangeVector d = true_ranges_sensor(tet, truth);
  SUBCASE("noiseless") {
    const SensorReport r = frocvx_sensor(tet, d);
    CHECK((r.estimate - truth).norm() < 1e-6);
    CHECK(r.final_objective <= 1e-12);
    CHECK(r.converged);
    CHECK(r.initializer_used == Initializer::kTT);
  }
  SUBCASE("local optimality against perturbations") {
    std::mt19937_64 rng(3);
    const RangeVector m = noisy(d, rng, 5.0);
    const SensorReport r = frocvx_sensor(tet, m);
    const double best = frocvx_objective(tet, m, r.estimate);
    CHECK(r.final_objective == doctest::Approx(best));
    std::normal_distribution<double> n(0.0, 1.0);
    int beaten = 0;
    for (int i = 0; i < 10000; ++i) {
      Vec3 dir(n(rng), n(rng), n(rng));
      const Vec3 p = r.estimate + dir.normalized() * std::cbrt(std::uniform_real_distribution<double>(0, 1)(rng));
      if (frocvx_objective(tet, m, p) < best) ++beaten;
    }
    CHECK(beaten == 0);
    const Eigen::VectorXd g = frocvx_gradient(tet, m, r.estimate);
    const Eigen::VectorXd fd = oracle::fd_gradient(
        [&](const Eigen::VectorXd& x) { return frocvx_objective(tet, m, Vec3(x)); }, Eigen::VectorXd(r.estimate), 1e-3);
    CHECK((g - fd).norm() < 1e-3 * std::max(1.0, fd.norm()) + 1e-2);
  }
}

TEST_CASE("mle sensor") {
  const SensorConfig tet = regular_tetrahedron(100);
  const Vec3 truth(50, 60, 300);
  const RangeVector d = true_ranges_sensor(tet, truth);
  SUBCASE("noiseless") {
    CHECK((mle_sensor(tet, d, {5.0, 0}).estimate - truth).norm() < 1e-6);
  }
  SUBCASE("sigma must be positive") {
    CHECK_THROWS_AS(mle_sensor(tet, d, {0.0, 0}), InvalidArgument);
    CHECK_THROWS_AS(mle_sensor(tet, d, {-1.0, 0}), InvalidArgument);
  }
  SUBCASE("grid search") {
    std::mt19937_64 rng(4);
    for (int inst = 0; inst < 20; ++inst) {
      const RangeVector m = noisy(d, rng, 5.0);
      SolverOptions o;
      o.initializer = Initializer::kEDMT;
      const SensorReport r = mle_sensor(tet, m, {5.0, 0}, o);
      // coarse pass over a 10 cm cube around the estimate, then a 1 mm pass
      Vec3 best = r.estimate;
      double best_f = 1e300;
      for (double step : {1.0, 0.1}) {
        const Vec3 centre = best;
        const double half = step == 1.0 ? 5.0 : 1.0;
        const int n = static_cast<int>(std::lround(2 * half / step));
        for (int a = 0; a <= n; ++a)
          for (int b = 0; b <= n; ++b)
            for (int c = 0; c <= n; ++c) {
              const Vec3 p = centre + Vec3(-half + a * step, -half + b * step, -half + c * step);
              const double f = mle_objective(tet, m, p);
              if (f < best_f) {
                best_f = f;
                best = p;
              }
            }
      }
      CHECK((best - r.estimate).norm() < 0.2);
      CHECK(mle_objective(tet, m, r.estimate) <= best_f + 1e-9);
    }
  }
  SUBCASE("never worse than its initializers") {
    std::mt19937_64 rng(5);
    for (int inst = 0; inst < 20; ++inst) {
      const RangeVector m = noisy(d, rng, 5.0);
      for (Initializer init : {Initializer::kTT, Initializer::kEDMT}) {
        SolverOptions o;
        o.initializer = init;
        const SensorReport r = mle_sensor(tet, m, {5.0, 0}, o);
        CHECK(r.initializer_used == init);
        CHECK(mle_objective(tet, m, r.estimate) <= mle_objective(tet, m, tt_sensor(tet, m)) + 1e-12);
        CHECK(mle_objective(tet, m, r.estimate) <= mle_objective(tet, m, edmt_sensor(tet, m)) + 1e-12);
      }
    }
  }
  SUBCASE("explicit initial guess") {
    SolverOptions o;
    o.initializer = Initializer::kExplicit;
    o.initial_guess = Eigen::Vector3d(0, 0, 250);
    CHECK((mle_sensor(tet, d, {5.0, 0}, o).estimate - truth).norm() < 1e-6);
    o.initial_guess = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(mle_sensor(tet, d, {5.0, 0}, o), InvalidArgument);
  }
  SUBCASE("iteration cap reports non-convergence") {
    SolverOptions o;
    o.max_iterations = 1;
    o.initializer = Initializer::kExplicit;
    o.initial_guess = Eigen::Vector3d(200, -200, 50);
    const SensorReport r = mle_sensor(tet, d, {5.0, 0}, o);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 1);
  }
}

TEST_CASE("agent solvers") {
  const SensorConfig tet = regular_tetrahedron(100);
  const Pose6D truth{Vec3(0, 0, 300), {0.1, 0.2, 0.3}};
  const RangeMatrix d = true_ranges_agent(tet, truth, tet);
  SUBCASE("noiseless fro-cvx") {
    const AgentReport r = frocvx_agent(tet, d, tet);
    check_pose(r.estimate, truth, 1e-6, 1e-8);
    CHECK(r.final_objective <= 1e-10);
  }
  SUBCASE("noiseless mle from every initializer") {
    for (Initializer init : {Initializer::kTT, Initializer::kEDMTJointly, Initializer::kEDMTIndividually}) {
      SolverOptions o;
      o.initializer = init;
      const AgentReport r = mle_agent(tet, d, tet, {5.0, 0}, o);
      check_pose(r.estimate, truth, 1e-6, 1e-8);
      CHECK(r.converged);
    }
  }
  SUBCASE("accepted iterations lower the objective") {
    std::mt19937_64 rng(6);
    const RangeMatrix m = noisy(d, rng, 5.0);
    SolverOptions o;
    o.initializer = Initializer::kEDMTJointly;
    const AgentReport r = mle_agent(tet, m, tet, {5.0, 0}, o);
    const double start = mle_objective(tet, m, tet, edmt_agent_jointly(tet, m, tet).pose);
    CHECK(r.final_objective <= start);
    const Eigen::VectorXd g = mle_gradient(tet, m, tet, r.estimate);
    CHECK(g.norm() < 1e-6);
  }
  SUBCASE("gradients match finite differences") {
    std::mt19937_64 rng(7);
    const RangeMatrix m = noisy(d, rng, 5.0);
    const Pose6D p{Vec3(5, -3, 290), {0.12, 0.18, 0.33}};
    auto as_pose = [](const Eigen::VectorXd& x) { return Pose6D{Vec3(x(0), x(1), x(2)), {x(3), x(4), x(5)}}; };
    const Eigen::VectorXd x = pose_to_vector(p);
    const Eigen::VectorXd fd_mle =
        oracle::fd_gradient([&](const Eigen::VectorXd& v) { return mle_objective(tet, m, tet, as_pose(v)); }, x, 1e-6);
    CHECK((mle_gradient(tet, m, tet, p) - fd_mle).norm() < 1e-5 * fd_mle.norm());
    const Eigen::VectorXd fd_fro = oracle::fd_gradient(
        [&](const Eigen::VectorXd& v) { return frocvx_objective(tet, m, tet, as_pose(v)); }, x, 1e-6);
    CHECK((frocvx_gradient(tet, m, tet, p) - fd_fro).norm() < 1e-5 * fd_fro.norm());
  }
  SUBCASE("multi-start keeps the lowest cost") {
    std::mt19937_64 rng(8);
    const RangeMatrix m = noisy(d, rng, 5.0);
    SolverOptions one;
    SolverOptions many;
    many.multi_start = 3;
    const AgentReport a = mle_agent(tet, m, tet, {5.0, 0}, one);
    const AgentReport b = mle_agent(tet, m, tet, {5.0, 0}, many);
    CHECK(b.final_objective <= a.final_objective + 1e-9);
  }
  SUBCASE("bad inputs") {
    CHECK_THROWS_AS(mle_agent(tet, d, tet, {0.0, 0}), InvalidArgument);
    RangeMatrix bad = d;
    bad(1, 2) = std::nan("");
    CHECK_THROWS_AS(frocvx_agent(tet, bad, tet), InvalidArgument);
    SolverOptions o;
    o.initializer = Initializer::kExplicit;
    o.initial_guess = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(frocvx_agent(tet, d, tet, o), InvalidArgument);
  }
}

TEST_CASE("rigid-motion equivariance") {
  std::mt19937_64 rng(10);
  const SensorConfig tet = regular_tetrahedron(100);
  const Mat3 q = oracle::random_rotation(rng);
  const Vec3 shift(30, -70, 12);
  const SensorConfig moved((q * tet.positions()).colwise() + shift);
  const Vec3 truth(-80, 120, 260);
  const RangeVector m = noisy(true_ranges_sensor(tet, truth), rng, 5.0);
  const Vec3 base = mle_sensor(tet, m, {5.0, 0}).estimate;
  const Vec3 other = mle_sensor(moved, m, {5.0, 0}).estimate;
  CHECK((q * base + shift - other).norm() < 1e-6);
  const Vec3 fb = frocvx_sensor(tet, m).estimate;
  const Vec3 fo = frocvx_sensor(moved, m).estimate;
  CHECK((q * fb + shift - fo).norm() < 1e-6);
  CHECK((q * edmt_sensor(tet, m) + shift - edmt_sensor(moved, m)).norm() < 1e-6);
  CHECK((q * tt_sensor(tet, m) + shift - tt_sensor(moved, m)).norm() < 1e-6);
}

TEST_CASE("options and helpers") {
  SolverOptions o;
  CHECK_NOTHROW(o.validate());
  o.max_iterations = 0;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  o = {};
  o.step_tolerance = 0;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  o = {};
  o.damping_initial = -1;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);
  o = {};
  o.multi_start = -1;
  CHECK_THROWS_AS(o.validate(), InvalidArgument);

  for (Initializer i : {Initializer::kTT, Initializer::kEDMT, Initializer::kEDMTJointly,
                        Initializer::kEDMTIndividually, Initializer::kExplicit})
    CHECK(initializer_from_string(to_string(i)) == i);
  CHECK_THROWS_AS(initializer_from_string("newton"), InvalidArgument);

  const Pose6D p{Vec3(1, 2, 3), {0.1, -0.2, 3.0}};
  const Pose6D back = pose_from_vector(pose_to_vector(p));
  CHECK(back.position == p.position);
  CHECK(back.attitude == p.attitude);
  Eigen::VectorXd over(6);
  over << 0, 0, 0, 0.1, 2.0, 0.3;
  const Pose6D folded = pose_from_vector(over);
  CHECK(std::abs(folded.attitude.theta) <= kPi / 2);
  const Mat3 r0 = rotation_from_euler({0.1, 2.0, 0.3}).matrix();
  CHECK((rotation_from_euler(folded.attitude).matrix() - r0).norm() < 1e-12);
}

}  // TEST_SUITE
