#include "relloc/measurements.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "relloc/errors.hpp"
#include "relloc/simharness.hpp"

namespace relloc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, sep);) out.push_back(trim(tok));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  std::size_t used = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size() && std::isfinite(v);
}

double unit_scale(const std::string& units, int line) {
  if (units == "cm") return 1.0;
  if (units == "mm") return 0.1;
  if (units == "m") return 100.0;
  throw ParseError("unknown units '" + units + "' (expected cm, mm or m)", line);
}

Vec3 parse_point(const std::string& value, int line) {
  const auto parts = split(value, ',');
  Vec3 p;
  if (parts.size() != 3) throw ParseError("anchor needs three coordinates x,y,z", line);
  for (int k = 0; k < 3; ++k) {
    if (!parse_double(parts[k], p(k))) {
      throw ParseError("anchor coordinate '" + parts[k] + "' is not a finite number", line);
    }
  }
  return p;
}

SensorConfig layout(const std::vector<Vec3>& pts) {
  Eigen::Matrix3Xd m(3, pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) m.col(i) = pts[i];
  return SensorConfig(m);
}

}  // namespace

SensorConfig MeasurementFile::config_a(double fallback_side) const {
  if (!anchors.empty()) return layout(anchors);
  return regular_tetrahedron(side_a.value_or(fallback_side));
}

SensorConfig MeasurementFile::config_b(double fallback_side) const {
  if (!anchors_b.empty()) return layout(anchors_b);
  return config_a(fallback_side);
}

RangeVector MeasurementFile::sensor_row(std::size_t i) const {
  if (agent()) throw InvalidArgument("file holds agent rows");
  return rows.at(i);
}

RangeMatrix MeasurementFile::agent_row(std::size_t i) const {
  if (!agent()) throw InvalidArgument("file holds sensor rows");
  const Eigen::VectorXd& r = rows.at(i);
  RangeMatrix m;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) m(a, b) = r(4 * a + b);
  return m;
}

MeasurementFile parse_measurements(std::istream& in) {
  MeasurementFile out;
  std::vector<std::pair<Vec3, int>> raw_a, raw_b;
  int units_line = 0;
  bool have_header = false;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      if (have_header) continue;
      const std::string body = trim(t.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = trim(body.substr(0, colon));
      const std::string value = trim(body.substr(colon + 1));
      if (key == "side_a") {
        double v = 0.0;
        if (!parse_double(value, v) || !(v > 0.0)) {
          throw ParseError("side_a must be a positive number, got '" + value + "'", lineno);
        }
        out.side_a = v;
      } else if (key == "anchor") {
        raw_a.emplace_back(parse_point(value, lineno), lineno);
      } else if (key == "anchor_b") {
        raw_b.emplace_back(parse_point(value, lineno), lineno);
      } else if (key == "units") {
        out.units = value;
        units_line = lineno;
        unit_scale(value, lineno);
      }
      continue;
    }
    const auto cells = split(t, ',');
    if (!have_header) {
      if (cells.size() != 4 && cells.size() != 16) {
        throw ParseError("header row has " + std::to_string(cells.size()) +
                             " columns, expected 4 (sensor) or 16 (agent)",
                         lineno);
      }
      double probe = 0.0;
      bool numeric = true;
      for (const auto& c : cells) numeric = numeric && parse_double(c, probe);
      if (numeric) throw ParseError("header row missing before the first data row", lineno);
      out.columns = cells;
      have_header = true;
      continue;
    }
    if (static_cast<int>(cells.size()) != out.width()) {
      throw ParseError("row has " + std::to_string(cells.size()) + " columns, expected " +
                           std::to_string(out.width()),
                       lineno);
    }
    Eigen::VectorXd row(out.width());
    for (int c = 0; c < out.width(); ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v)) {
        throw ParseError("cell " + std::to_string(c + 1) + " (" + out.columns[c] + ") value '" +
                             cells[c] + "' is not a finite number",
                         lineno);
      }
      if (!(v > 0.0)) {
        throw ParseError("cell " + std::to_string(c + 1) + " (" + out.columns[c] + ") value '" +
                             cells[c] + "' must be a positive range",
                         lineno);
      }
      row(c) = v;
    }
    out.rows.push_back(row);
    out.row_lines.push_back(lineno);
  }
  if (!have_header) throw ParseError("no header row found");

  const double scale = unit_scale(out.units, units_line);
  if (out.side_a) *out.side_a *= scale;
  for (auto& r : out.rows) r *= scale;
  for (auto& [p, l] : raw_a) out.anchors.push_back(scale * p);
  for (auto& [p, l] : raw_b) out.anchors_b.push_back(scale * p);

  const int need = out.agent() ? 4 : 0;
  if (!out.anchors.empty() && out.anchors.size() < 4) {
    throw ParseError("need at least 4 anchor lines, got " + std::to_string(out.anchors.size()),
                     raw_a.back().second);
  }
  if (out.agent() && !out.anchors.empty() && static_cast<int>(out.anchors.size()) != need) {
    throw ParseError("agent files need exactly 4 anchor lines", raw_a.back().second);
  }
  if (!out.anchors_b.empty() && static_cast<int>(out.anchors_b.size()) != 4) {
    throw ParseError("need exactly 4 anchor_b lines", raw_b.back().second);
  }
  if (!out.agent() && !out.anchors.empty() &&
      static_cast<int>(out.anchors.size()) != out.width()) {
    throw ParseError("sensor rows carry " + std::to_string(out.width()) + " ranges but " +
                         std::to_string(out.anchors.size()) + " anchors are declared",
                     raw_a.back().second);
  }
  out.units = "cm";
  return out;
}

MeasurementFile read_measurements(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open measurement file " + path);
  return parse_measurements(in);
}

void write_measurements(std::ostream& os, const MeasurementFile& file) {
  if (file.side_a) os << "# side_a: " << format_number(*file.side_a) << '\n';
  auto point = [&](const char* key, const Vec3& p) {
    os << "# " << key << ": " << format_number(p.x()) << ',' << format_number(p.y()) << ','
       << format_number(p.z()) << '\n';
  };
  for (const auto& p : file.anchors) point("anchor", p);
  for (const auto& p : file.anchors_b) point("anchor_b", p);
  os << "# units: cm\n";
  for (int c = 0; c < file.width(); ++c) os << (c ? "," : "") << file.columns[c];
  os << '\n';
  for (const auto& r : file.rows) {
    for (Eigen::Index c = 0; c < r.size(); ++c) os << (c ? "," : "") << format_number(r(c));
    os << '\n';
  }
}

}  // namespace relloc
