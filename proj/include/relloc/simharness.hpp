#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "relloc/geometry.hpp"
#include "relloc/metrics.hpp"
#include "relloc/ranging.hpp"
#include "relloc/solvers.hpp"

namespace relloc {

enum class Scenario { kSensor, kAgent };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

/// Range noise is only modeled up to this distance; rows beyond it are
/// flagged as extrapolated.
constexpr double kModeledRangeLimit = 600.0;

/// Library version written into JSON metadata.
std::string version();

struct ExperimentConfig {
  Scenario scenario = Scenario::kSensor;
  double side_a = 100.0;  // cm, regular tetrahedron edge (both agents in the agent case)
  std::vector<double> distances;
  double polar_deg = 60.0;
  double azimuth_deg = 60.0;
  EulerAngles attitude{deg2rad(10.0), deg2rad(20.0), deg2rad(30.0)};
  double sigma0 = 5.0;
  int trials = 1000;
  std::vector<std::string> methods;
  std::uint64_t seed = 0;
  int threads = 1;  // workers; results do not depend on it
  SolverOptions solver;

  /// Throws InvalidArgument on trials < 1, non-positive distances, an empty
  /// or unknown method list and the like.
  void validate() const;
};

/// Parses the JSON experiment document. Missing keys keep their defaults.
/// Throws ParseError on malformed JSON or wrongly typed fields.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// "start:stop:step" (inclusive, within floating tolerance) or a comma list.
std::vector<double> parse_range_list(const std::string& text);

/// Method labels accepted per scenario.
const std::vector<std::string>& sensor_methods();
const std::vector<std::string>& agent_methods();

using SensorEstimator = std::function<Vec3(const RangeVector&)>;
using AgentEstimator = std::function<Pose6D(const RangeMatrix&)>;

/// Binds a method label to its estimator for the given configuration.
SensorEstimator make_sensor_estimator(const std::string& method, const ExperimentConfig& cfg);
AgentEstimator make_agent_estimator(const std::string& method, const ExperimentConfig& cfg);

/// One (method, distance) cell. Angle fields stay zero in the sensor case.
/// se_* are Monte-Carlo standard errors of the RMSE (delta method).
struct RmseRow {
  std::string method;
  double distance = 0.0;
  int trials = 0;
  int failures = 0;
  double rmse_position = 0.0;
  double rmse_roll = 0.0;
  double rmse_pitch = 0.0;
  double rmse_yaw = 0.0;
  double se_position = 0.0;
  double se_roll = 0.0;
  double se_pitch = 0.0;
  double se_yaw = 0.0;
  double crlb_position = 0.0;
  double crlb_roll = 0.0;
  double crlb_pitch = 0.0;
  double crlb_yaw = 0.0;
  bool extrapolated = false;
};

struct RmseSummary {
  ExperimentConfig config;
  std::vector<RmseRow> rows;  // method-major, distances in config order

  /// Throws InvalidArgument if the cell is absent.
  const RmseRow& at(const std::string& method, double distance) const;
};

RmseSummary run_sensor_experiment(const ExperimentConfig& cfg);
RmseSummary run_agent_experiment(const ExperimentConfig& cfg);
RmseSummary run_experiment(const ExperimentConfig& cfg);

struct ConfigStudyRow {
  double angle_deg = 0.0;
  double avg_gdop = 0.0;
  double max_gdop = 0.0;
  int missing = 0;
};

/// GDOP sweep of isosceles_tetrahedron(angle, unit_edge) for every angle.
std::vector<ConfigStudyRow> run_config_study(const std::vector<double>& angles_deg,
                                             const SphericalGrid& grid, double unit_edge = 100.0);

struct BenchEntry {
  std::string method;
  double total_seconds = 0.0;
  double ratio = 1.0;  // to the fastest method
  int trials = 0;
};

struct BenchReport {
  Scenario scenario = Scenario::kSensor;
  std::vector<BenchEntry> entries;
};

/// Single-threaded timing on inputs generated before the clock starts.
/// Trials cycle through cfg.distances.
BenchReport run_bench(const std::vector<std::string>& methods, Scenario scenario, int trials,
                      const ExperimentConfig& cfg);

struct RunMetadata {
  std::uint64_t seed = 0;
  std::string version;
  std::string timestamp;  // ISO 8601, UTC

  static RunMetadata now(std::uint64_t seed);
};

void write_rmse_csv(std::ostream& os, const RmseSummary& summary);
void write_rmse_json(std::ostream& os, const RmseSummary& summary, const RunMetadata& meta);
void write_config_study_csv(std::ostream& os, const std::vector<ConfigStudyRow>& rows);
void write_config_study_json(std::ostream& os, const std::vector<ConfigStudyRow>& rows,
                             const RunMetadata& meta);
void write_bench_csv(std::ostream& os, const BenchReport& report);
void write_bench_json(std::ostream& os, const BenchReport& report, const RunMetadata& meta);

/// "%.10g", the number format shared by every CSV writer.
std::string format_number(double v);

}  // namespace relloc
