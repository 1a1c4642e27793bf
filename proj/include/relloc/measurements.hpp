#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "relloc/geometry.hpp"
#include "relloc/ranging.hpp"

namespace relloc {

/// Range measurements plus the configuration they were taken with.
///
/// Layout:
///
///   # side_a: 100          regular tetrahedron edge, or explicit anchors:
///   # anchor: x,y,z        one line per ego sensor A_i
///   # anchor_b: x,y,z      one line per target sensor B_j (agent case)
///   # units: cm            cm (default), mm or m; values are stored in cm
///   d1,d2,d3,d4            header row, required
///   301.2,298.7,...        4 ranges (sensor) or 16 ranges, A_i x B_j row-major
///
/// Blank lines and further '#' lines are ignored.
struct MeasurementFile {
  std::optional<double> side_a;  // cm
  std::vector<Vec3> anchors;     // cm
  std::vector<Vec3> anchors_b;   // cm
  std::string units = "cm";
  std::vector<std::string> columns;
  std::vector<Eigen::VectorXd> rows;  // cm
  std::vector<int> row_lines;         // 1-based source line of each row

  int width() const { return static_cast<int>(columns.size()); }
  bool agent() const { return width() == 16; }

  /// Explicit anchors if given, else regular_tetrahedron(side_a), else
  /// regular_tetrahedron(fallback_side).
  SensorConfig config_a(double fallback_side = 100.0) const;
  /// anchor_b lines if given, otherwise the same layout as config_a.
  SensorConfig config_b(double fallback_side = 100.0) const;

  RangeVector sensor_row(std::size_t i) const;
  RangeMatrix agent_row(std::size_t i) const;
};

/// Throws IoError if the file cannot be opened and ParseError (with the
/// line number) on malformed content.
MeasurementFile read_measurements(const std::string& path);
MeasurementFile parse_measurements(std::istream& in);

/// Writes `file` back in the layout above; values with %.10g.
void write_measurements(std::ostream& os, const MeasurementFile& file);

}  // namespace relloc
