#include "relloc/solvers.hpp"

#include <array>
#include <chrono>
#include <cmath>

#include <Eigen/Dense>

#include "relloc/errors.hpp"

namespace relloc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_sensor_inputs(const SensorConfig& config, const RangeVector& measured) {
  if (measured.size() != config.size()) throw InvalidArgument("one range per anchor expected");
  if (!measured.allFinite()) throw InvalidArgument("measured ranges must be finite");
}

void check_agent_inputs(const SensorConfig& a, const RangeMatrix& measured, const SensorConfig& b) {
  if (a.size() != 4 || b.size() != 4) {
    throw InvalidArgument("agent localization needs four sensors on each agent");
  }
  if (!measured.allFinite()) throw InvalidArgument("measured ranges must be finite");
}

// Sensor B_j positions and their partials with respect to beta.
struct AgentModel {
  Eigen::Matrix<double, 3, 4> points;
  std::array<Eigen::Matrix<double, 3, 6>, 4> partials;
};

AgentModel agent_model(const Eigen::VectorXd& beta, const SensorConfig& config_b) {
  const Mat3 rx = rot_x(beta(3)), ry = rot_y(beta(4)), rz = rot_z(beta(5));
  const Mat3 c = (rx * ry * rz).transpose();
  const Mat3 dg = (drot_x(beta(3)) * ry * rz).transpose();
  const Mat3 dt = (rx * drot_y(beta(4)) * rz).transpose();
  const Mat3 dp = (rx * ry * drot_z(beta(5))).transpose();
  AgentModel m;
  for (int j = 0; j < 4; ++j) {
    const Vec3 pj = config_b.position(j);
    m.points.col(j) = beta.head<3>() + c * pj;
    m.partials[j].leftCols<3>().setIdentity();
    m.partials[j].col(3) = dg * pj;
    m.partials[j].col(4) = dt * pj;
    m.partials[j].col(5) = dp * pj;
  }
  return m;
}

Mat3 d2rot_x(double g) { Mat3 r = -rot_x(g); r(0, 0) = 0.0; return r; }
Mat3 d2rot_y(double t) { Mat3 r = -rot_y(t); r(1, 1) = 0.0; return r; }
Mat3 d2rot_z(double p) { Mat3 r = -rot_z(p); r(2, 2) = 0.0; return r; }

// Second derivatives of C_B^A with respect to (gamma, theta, psi).
std::array<std::array<Mat3, 3>, 3> rotation_hessian(const Eigen::VectorXd& beta) {
  const std::array<Mat3, 3> f0{rot_x(beta(3)), rot_y(beta(4)), rot_z(beta(5))};
  const std::array<Mat3, 3> f1{drot_x(beta(3)), drot_y(beta(4)), drot_z(beta(5))};
  const std::array<Mat3, 3> f2{d2rot_x(beta(3)), d2rot_y(beta(4)), d2rot_z(beta(5))};
  std::array<std::array<Mat3, 3>, 3> h;
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) {
      std::array<const Mat3*, 3> f{&f0[0], &f0[1], &f0[2]};
      if (a == b) {
        f[a] = &f2[a];
      } else {
        f[a] = &f1[a];
        f[b] = &f1[b];
      }
      h[a][b] = ((*f[0]) * (*f[1]) * (*f[2])).transpose();
      h[b][a] = h[a][b];
    }
  }
  return h;
}

// Residual/Jacobian pairs. `squared` selects the Frobenius (squared range)
// form; otherwise plain range residuals.
Eigen::VectorXd sensor_residual(const SensorConfig& cfg, const RangeVector& meas,
                                const Eigen::VectorXd& p, bool squared) {
  Eigen::VectorXd r(cfg.size());
  for (int i = 0; i < cfg.size(); ++i) {
    const double d2 = (p - cfg.position(i)).squaredNorm();
    r(i) = squared ? d2 - meas(i) * meas(i) : std::sqrt(d2) - meas(i);
  }
  return r;
}

Eigen::MatrixXd sensor_jacobian(const SensorConfig& cfg, const Eigen::VectorXd& p, bool squared) {
  Eigen::MatrixXd j(cfg.size(), 3);
  for (int i = 0; i < cfg.size(); ++i) {
    const Vec3 diff = p - cfg.position(i);
    if (squared) {
      j.row(i) = 2.0 * diff.transpose();
    } else {
      const double d = diff.norm();
      if (!(d > 1e-12)) throw DegenerateGeometry("estimate coincides with an anchor");
      j.row(i) = diff.transpose() / d;
    }
  }
  return j;
}

Eigen::VectorXd agent_residual(const SensorConfig& a, const RangeMatrix& meas, const SensorConfig& b,
                               const Eigen::VectorXd& beta, bool squared) {
  const AgentModel m = agent_model(beta, b);
  Eigen::VectorXd r(16);
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) {
      const double d2 = (m.points.col(j) - a.position(i)).squaredNorm();
      r(4 * j + i) = squared ? d2 - meas(i, j) * meas(i, j) : std::sqrt(d2) - meas(i, j);
    }
  }
  return r;
}

Eigen::MatrixXd agent_jacobian(const SensorConfig& a, const SensorConfig& b,
                               const Eigen::VectorXd& beta, bool squared) {
  const AgentModel m = agent_model(beta, b);
  Eigen::MatrixXd jac(16, 6);
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) {
      const Vec3 diff = m.points.col(j) - a.position(i);
      Vec3 w;
      if (squared) {
        w = 2.0 * diff;
      } else {
        const double d = diff.norm();
        if (!(d > 1e-12)) throw DegenerateGeometry("sensor estimates coincide");
        w = diff / d;
      }
      jac.row(4 * j + i) = w.transpose() * m.partials[j];
    }
  }
  return jac;
}

// sum_i r_i Hess(r_i), the part of the least-squares Hessian that
// Gauss-Newton drops.
Eigen::MatrixXd sensor_curvature(const SensorConfig& cfg, const Eigen::VectorXd& p,
                                 const Eigen::VectorXd& r, bool squared) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(3, 3);
  for (int i = 0; i < cfg.size(); ++i) {
    if (squared) {
      s.diagonal().array() += 2.0 * r(i);
    } else {
      const Vec3 diff = p - cfg.position(i);
      const double d = diff.norm();
      if (!(d > 1e-12)) throw DegenerateGeometry("estimate coincides with an anchor");
      const Vec3 u = diff / d;
      s += r(i) / d * (Mat3::Identity() - u * u.transpose());
    }
  }
  return s;
}

Eigen::MatrixXd agent_curvature(const SensorConfig& a, const SensorConfig& b, const Eigen::VectorXd& beta,
                                const Eigen::VectorXd& r, bool squared) {
  const AgentModel m = agent_model(beta, b);
  const auto h = rotation_hessian(beta);
  Eigen::Matrix<double, 6, 6> s = Eigen::Matrix<double, 6, 6>::Zero();
  for (int j = 0; j < 4; ++j) {
    const Vec3 pj = b.position(j);
    const auto& pd = m.partials[j];
    for (int i = 0; i < 4; ++i) {
      const double ri = r(4 * j + i);
      const Vec3 diff = m.points.col(j) - a.position(i);
      Vec3 w;
      if (squared) {
        s += 2.0 * ri * pd.transpose() * pd;
        w = 2.0 * diff;
      } else {
        const double d = diff.norm();
        if (!(d > 1e-12)) throw DegenerateGeometry("sensor estimates coincide");
        const Vec3 u = diff / d;
        s += ri / d * pd.transpose() * (Mat3::Identity() - u * u.transpose()) * pd;
        w = u;
      }
      for (int x = 0; x < 3; ++x) {
        for (int y = 0; y < 3; ++y) s(3 + x, 3 + y) += ri * w.dot(h[x][y] * pj);
      }
    }
  }
  return s;
}

Vec3 sensor_initial_guess(const SensorConfig& cfg, const RangeVector& meas, const SolverOptions& opts) {
  switch (opts.initializer) {
    case Initializer::kTT:
      return tt_sensor(cfg, meas);
    case Initializer::kEDMT:
    case Initializer::kEDMTJointly:
    case Initializer::kEDMTIndividually:
      return edmt_sensor(cfg, meas);
    case Initializer::kExplicit:
      if (opts.initial_guess.size() != 3) throw InvalidArgument("explicit sensor guess needs 3 entries");
      return opts.initial_guess;
  }
  throw InvalidArgument("unknown initializer");
}

Eigen::VectorXd agent_initial_guess(const SensorConfig& a, const RangeMatrix& meas,
                                    const SensorConfig& b, const SolverOptions& opts) {
  switch (opts.initializer) {
    case Initializer::kTT:
      return pose_to_vector(tt_agent(a, meas, b).pose);
    case Initializer::kEDMT:
    case Initializer::kEDMTJointly:
      return pose_to_vector(edmt_agent_jointly(a, meas, b).pose);
    case Initializer::kEDMTIndividually:
      return pose_to_vector(edmt_agent_individually(a, meas, b).pose);
    case Initializer::kExplicit:
      if (opts.initial_guess.size() != 6) throw InvalidArgument("explicit agent guess needs 6 entries");
      return opts.initial_guess;
  }
  throw InvalidArgument("unknown initializer");
}

SensorReport solve_sensor(const SensorConfig& cfg, const RangeVector& meas, const SolverOptions& opts,
                          bool squared) {
  const auto t0 = Clock::now();
  opts.validate();
  check_sensor_inputs(cfg, meas);
  const Vec3 x0 = sensor_initial_guess(cfg, meas, opts);
  const GaussNewtonResult gn = gauss_newton(
      [&](const Eigen::VectorXd& x) { return sensor_residual(cfg, meas, x, squared); },
      [&](const Eigen::VectorXd& x) { return sensor_jacobian(cfg, x, squared); },
      [&](const Eigen::VectorXd& x, const Eigen::VectorXd& r) {
        return sensor_curvature(cfg, x, r, squared);
      },
      x0,
      opts.gauss_newton());
  SensorReport rep;
  rep.estimate = gn.x;
  rep.iterations = gn.iterations;
  rep.final_residual_norm = gn.residual_norm;
  rep.final_objective = gn.residual_norm * gn.residual_norm;
  rep.converged = gn.converged;
  rep.initializer_used = opts.initializer;
  rep.wall_time = seconds_since(t0);
  return rep;
}

AgentReport solve_agent(const SensorConfig& a, const RangeMatrix& meas, const SensorConfig& b,
                        const SolverOptions& opts, bool squared) {
  const auto t0 = Clock::now();
  opts.validate();
  check_agent_inputs(a, meas, b);
  const Eigen::VectorXd x0 = agent_initial_guess(a, meas, b, opts);
  const auto residual = [&](const Eigen::VectorXd& x) { return agent_residual(a, meas, b, x, squared); };
  const auto jacobian = [&](const Eigen::VectorXd& x) { return agent_jacobian(a, b, x, squared); };
  const auto curvature = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& r) {
    return Eigen::MatrixXd(agent_curvature(a, b, x, r, squared));
  };

  GaussNewtonResult best = gauss_newton(residual, jacobian, curvature, x0, opts.gauss_newton());
  for (int s = 1; s <= opts.multi_start; ++s) {
    Eigen::VectorXd start = x0;
    start(5) = wrap_angle(start(5) + 2.0 * kPi * s / (opts.multi_start + 1));
    GaussNewtonResult alt = gauss_newton(residual, jacobian, curvature, start, opts.gauss_newton());
    if (alt.residual_norm < best.residual_norm) best = std::move(alt);
  }
  AgentReport rep;
  rep.estimate = pose_from_vector(best.x);
  rep.iterations = best.iterations;
  rep.final_residual_norm = best.residual_norm;
  rep.final_objective = best.residual_norm * best.residual_norm;
  rep.converged = best.converged;
  rep.initializer_used = opts.initializer;
  rep.wall_time = seconds_since(t0);
  return rep;
}

void check_sigma(const NoiseModel& noise) {
  if (!(noise.sigma0 > 0.0) || !std::isfinite(noise.sigma0)) {
    throw InvalidArgument("maximum likelihood needs sigma0 > 0");
  }
}

}  // namespace

std::string to_string(Initializer init) {
  switch (init) {
    case Initializer::kTT: return "tt";
    case Initializer::kEDMT: return "edmt";
    case Initializer::kEDMTJointly: return "edmt-jointly";
    case Initializer::kEDMTIndividually: return "edmt-individually";
    case Initializer::kExplicit: return "explicit";
  }
  return "unknown";
}

Initializer initializer_from_string(const std::string& s) {
  if (s == "tt") return Initializer::kTT;
  if (s == "edmt") return Initializer::kEDMT;
  if (s == "edmt-jointly") return Initializer::kEDMTJointly;
  if (s == "edmt-individually") return Initializer::kEDMTIndividually;
  if (s == "explicit") return Initializer::kExplicit;
  throw InvalidArgument("unknown initializer '" + s + "'");
}

void SolverOptions::validate() const {
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
  if (!(step_tolerance > 0.0) || !(residual_tolerance > 0.0)) {
    throw InvalidArgument("solver tolerances must be positive");
  }
  if (!(damping_initial > 0.0)) throw InvalidArgument("damping_initial must be positive");
  if (multi_start < 0) throw InvalidArgument("multi_start must be >= 0");
}

GaussNewtonOptions SolverOptions::gauss_newton() const {
  return {max_iterations, step_tolerance, residual_tolerance, damping_initial};
}

Eigen::Matrix<double, 6, 1> pose_to_vector(const Pose6D& pose) {
  Eigen::Matrix<double, 6, 1> v;
  v << pose.position, pose.attitude.gamma, pose.attitude.theta, pose.attitude.psi;
  return v;
}

Pose6D pose_from_vector(const Eigen::VectorXd& beta) {
  Pose6D pose;
  pose.position = beta.head<3>();
  const EulerAngles raw{beta(3), beta(4), beta(5)};
  if (std::abs(wrap_angle(raw.theta)) <= kPi / 2.0 && std::abs(raw.theta) <= kPi / 2.0) {
    pose.attitude = raw.normalized();
  } else {
    // Pitch left the principal branch; re-read the same rotation on it.
    pose.attitude = euler_from_rotation(rotation_from_euler(raw));
  }
  return pose;
}

Vec3 tt_sensor(const SensorConfig& config, const RangeVector& measured) {
  check_sensor_inputs(config, measured);
  const int k = config.size();
  Eigen::MatrixX3d j(k, 3);
  Eigen::VectorXd n(k);
  for (int i = 0; i < k; ++i) {
    const int next = (i + 1) % k;
    const Vec3 a = config.position(i), b = config.position(next);
    j.row(i) = 2.0 * (b - a).transpose();
    n(i) = (b.squaredNorm() - a.squaredNorm()) -
           (measured(next) * measured(next) - measured(i) * measured(i));
  }
  const Mat3 normal = j.transpose() * j;
  const Eigen::LDLT<Mat3> ldlt(normal);
  const Vec3 pivots = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || !(pivots.minCoeff() > 1e-12 * pivots.maxCoeff())) {
    throw DegenerateGeometry("trilateration normal matrix is singular (coplanar anchors)");
  }
  return ldlt.solve(j.transpose() * n);
}

AgentEstimate tt_agent(const SensorConfig& config_a, const RangeMatrix& measured,
                       const SensorConfig& config_b) {
  check_agent_inputs(config_a, measured, config_b);
  AgentEstimate out;
  for (int j = 0; j < 4; ++j) out.vertices.col(j) = tt_sensor(config_a, measured.col(j));
  out.pose = pose_from_vertices(out.vertices, config_b);
  return out;
}

SensorReport frocvx_sensor(const SensorConfig& config, const RangeVector& measured,
                           const SolverOptions& opts) {
  return solve_sensor(config, measured, opts, true);
}

AgentReport frocvx_agent(const SensorConfig& config_a, const RangeMatrix& measured,
                         const SensorConfig& config_b, const SolverOptions& opts) {
  return solve_agent(config_a, measured, config_b, opts, true);
}

SensorReport mle_sensor(const SensorConfig& config, const RangeVector& measured,
                        const NoiseModel& noise, const SolverOptions& opts) {
  check_sigma(noise);
  return solve_sensor(config, measured, opts, false);
}

AgentReport mle_agent(const SensorConfig& config_a, const RangeMatrix& measured,
                      const SensorConfig& config_b, const NoiseModel& noise,
                      const SolverOptions& opts) {
  check_sigma(noise);
  return solve_agent(config_a, measured, config_b, opts, false);
}

double frocvx_objective(const SensorConfig& config, const RangeVector& measured, const Vec3& p) {
  return sensor_residual(config, measured, p, true).squaredNorm();
}

double frocvx_objective(const SensorConfig& a, const RangeMatrix& measured, const SensorConfig& b,
                        const Pose6D& pose) {
  return agent_residual(a, measured, b, pose_to_vector(pose), true).squaredNorm();
}

double mle_objective(const SensorConfig& config, const RangeVector& measured, const Vec3& p) {
  return sensor_residual(config, measured, p, false).squaredNorm();
}

double mle_objective(const SensorConfig& a, const RangeMatrix& measured, const SensorConfig& b,
                     const Pose6D& pose) {
  return agent_residual(a, measured, b, pose_to_vector(pose), false).squaredNorm();
}

Eigen::VectorXd frocvx_gradient(const SensorConfig& config, const RangeVector& measured, const Vec3& p) {
  return 2.0 * sensor_jacobian(config, p, true).transpose() * sensor_residual(config, measured, p, true);
}

Eigen::VectorXd frocvx_gradient(const SensorConfig& a, const RangeMatrix& measured, const SensorConfig& b,
                                const Pose6D& pose) {
  const Eigen::VectorXd beta = pose_to_vector(pose);
  return 2.0 * agent_jacobian(a, b, beta, true).transpose() * agent_residual(a, measured, b, beta, true);
}

Eigen::VectorXd mle_gradient(const SensorConfig& config, const RangeVector& measured, const Vec3& p) {
  return 2.0 * sensor_jacobian(config, p, false).transpose() * sensor_residual(config, measured, p, false);
}

Eigen::VectorXd mle_gradient(const SensorConfig& a, const RangeMatrix& measured, const SensorConfig& b,
                             const Pose6D& pose) {
  const Eigen::VectorXd beta = pose_to_vector(pose);
  return 2.0 * agent_jacobian(a, b, beta, false).transpose() * agent_residual(a, measured, b, beta, false);
}

}  // namespace relloc
