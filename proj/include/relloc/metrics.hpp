#pragma once

#include <iosfwd>
#include <vector>

#include "relloc/geometry.hpp"
#include "relloc/ranging.hpp"

namespace relloc {

/// Square roots of the diagonal blocks of (H^T H)^-1 for the stacked agent
/// Jacobian: position from D11 + D22 + D33, then D44, D55, D66.
struct AgentGdop {
  double position = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// Same layout as AgentGdop, scaled by sigma0 (cm for position, rad for angles).
struct AgentCrlb {
  double position = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// Inclusive arithmetic range; the last point is kept if it lies within
/// 1e-9 steps of stop.
struct GridAxis {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  std::vector<double> points() const;
};

/// Polar angle from +z, azimuth from +x in the xy-plane, both degrees.
struct SphericalGrid {
  GridAxis radial{80.0, 500.0, 10.0};
  GridAxis polar{0.0, 180.0, 5.0};
  GridAxis azimuth{30.0, 90.0, 5.0};

  void validate() const;
};

struct GdopSample {
  double r_cm;
  double polar_deg;
  double azimuth_deg;
  double gdop;
};

struct GdopSweep {
  double average = 0.0;
  double maximum = 0.0;
  std::vector<GdopSample> samples;
  int missing = 0;  // degenerate grid points, excluded from the statistics
};

/// Normal matrices whose condition number exceeds this are degenerate.
constexpr double kMaxConditionNumber = 1e12;

Vec3 spherical_to_cartesian(double r, double polar_deg, double azimuth_deg);

double gdop_sensor(const SensorConfig& config, const Vec3& target);
AgentGdop gdop_agent(const SensorConfig& config_a, const Pose6D& pose_b,
                     const SensorConfig& config_b);

double crlb_sensor(double gdop, const NoiseModel& noise);
AgentCrlb crlb_agent(const AgentGdop& g, const NoiseModel& noise);

GdopSweep gdop_sweep(const SensorConfig& config, const SphericalGrid& grid);

/// Columns r_cm, polar_deg, azimuth_deg, gdop; then rows labelled
/// average, maximum and missing carrying the summary in the gdop column.
void write_sweep_csv(std::ostream& os, const GdopSweep& sweep);

}  // namespace relloc
