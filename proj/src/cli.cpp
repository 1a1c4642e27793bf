#include "relloc/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "relloc/errors.hpp"
#include "relloc/measurements.hpp"
#include "relloc/metrics.hpp"
#include "relloc/simharness.hpp"
#include "relloc/solvers.hpp"

namespace relloc {

namespace {

using ojson = nlohmann::ordered_json;

enum class LogLevel { kOff, kInfo, kDebug };

LogLevel log_level_from_env() {
  const char* v = std::getenv("RELLOC_LOG");
  if (!v) return LogLevel::kOff;
  const std::string s(v);
  if (s == "info") return LogLevel::kInfo;
  if (s == "debug") return LogLevel::kDebug;
  return LogLevel::kOff;
}

class Logger {
 public:
  Logger(std::ostream& os, LogLevel level) : os_(os), level_(level) {}
  void info(const std::string& msg) const {
    if (level_ >= LogLevel::kInfo) os_ << "[info] " << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level_ >= LogLevel::kDebug) os_ << "[debug] " << msg << '\n';
  }

 private:
  std::ostream& os_;
  LogLevel level_;
};

// Bad flag values found after CLI11 accepted the syntax.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

Vec3 parse_vec3(const std::string& s, const char* flag) {
  std::vector<double> v;
  try {
    v = parse_range_list(s);
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
  if (v.size() != 3 || s.find(':') != std::string::npos) {
    throw UsageError(std::string(flag) + " expects three comma-separated numbers");
  }
  return {v[0], v[1], v[2]};
}

std::vector<double> parse_list_flag(const std::string& s, const char* flag) {
  try {
    return parse_range_list(s);
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

GridAxis parse_axis(const std::string& s, const char* flag) {
  std::vector<double> v;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ':');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + " expects start:stop:step");
    }
  }
  if (v.size() != 3) throw UsageError(std::string(flag) + " expects start:stop:step");
  return {v[0], v[1], v[2]};
}

struct Common {
  std::string output = "csv";
  std::optional<std::uint64_t> seed;
  std::string out_path;
  int threads = 1;
};

void emit_meta(ojson& doc, const RunMetadata& meta) {
  doc["schema_version"] = 1;
  doc["metadata"] = {{"seed", meta.seed}, {"version", meta.version}, {"timestamp", meta.timestamp}};
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Logger log(err, log_level_from_env());

  CLI::App app{"Range-only relative localization toolkit", "relloc"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--output", common.output, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", common.seed, "Random seed");
  app.add_option("--out", common.out_path, "Write results to this file instead of stdout");
  app.add_option("--threads", common.threads, "Worker threads for simulations")
      ->check(CLI::PositiveNumber);

  // gdop
  auto* gdop = app.add_subcommand("gdop", "GDOP at a point, over a spherical sweep, or for an agent pose");
  double g_side = 100.0;
  std::optional<double> g_angle;
  std::string g_target, g_attitude = "0,0,0", g_radial = "80:500:10", g_polar = "0:180:5",
                        g_azimuth = "30:90:5";
  bool g_sweep = false, g_agent = false;
  std::optional<double> g_sigma;
  gdop->add_option("--side", g_side, "Tetrahedron edge, cm")->check(CLI::PositiveNumber);
  gdop->add_option("--angle", g_angle, "Use the isosceles layout with this vertex angle, degrees");
  gdop->add_option("--target", g_target, "x,y,z in cm (body origin of B with --agent)");
  gdop->add_flag("--sweep", g_sweep, "Sweep the spherical grid instead of a single point");
  gdop->add_option("--radial", g_radial, "Sweep radii start:stop:step, cm");
  gdop->add_option("--polar", g_polar, "Sweep polar angles start:stop:step, degrees");
  gdop->add_option("--azimuth", g_azimuth, "Sweep azimuths start:stop:step, degrees");
  gdop->add_flag("--agent", g_agent, "Agent pose GDOP (position, roll, pitch, yaw)");
  gdop->add_option("--attitude", g_attitude, "roll,pitch,yaw of B in degrees (with --agent)");
  gdop->add_option("--sigma", g_sigma, "Also report the CRLB for this range noise, cm");

  // config-study
  auto* study = app.add_subcommand("config-study", "Average and maximum GDOP per isosceles vertex angle");
  std::string s_angles = "10:110:10", s_radial = "80:500:10", s_polar = "0:180:5", s_azimuth = "30:90:5";
  double s_edge = 100.0;
  study->add_option("--angles", s_angles, "Vertex angles, list or start:stop:step, degrees");
  study->add_option("--unit-edge", s_edge, "Edge length, cm")->check(CLI::PositiveNumber);
  study->add_option("--radial", s_radial, "Radii start:stop:step, cm");
  study->add_option("--polar", s_polar, "Polar angles start:stop:step, degrees");
  study->add_option("--azimuth", s_azimuth, "Azimuths start:stop:step, degrees");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo RMSE study");
  std::string m_scenario, m_config, m_distances, m_methods, m_attitude;
  std::optional<double> m_side, m_sigma, m_polar, m_azimuth;
  std::optional<int> m_trials, m_multi;
  sim->add_option("scenario", m_scenario, "sensor or agent")
      ->required()
      ->check(CLI::IsMember({"sensor", "agent"}));
  sim->add_option("--config", m_config, "Experiment JSON; flags override its fields");
  sim->add_option("--side", m_side, "Tetrahedron edge, cm")->check(CLI::PositiveNumber);
  sim->add_option("--sigma", m_sigma, "Range noise standard deviation, cm")->check(CLI::NonNegativeNumber);
  sim->add_option("--trials", m_trials, "Trials per distance")->check(CLI::PositiveNumber);
  sim->add_option("--distances", m_distances, "start:stop:step or list, cm");
  sim->add_option("--methods", m_methods, "Comma-separated method labels");
  sim->add_option("--polar", m_polar, "Target polar angle, degrees");
  sim->add_option("--azimuth", m_azimuth, "Target azimuth, degrees");
  sim->add_option("--attitude", m_attitude, "roll,pitch,yaw of B in degrees (agent)");
  sim->add_option("--multi-start", m_multi, "Extra yaw starts for iterative agent solvers")
      ->check(CLI::NonNegativeNumber);

  // localize
  auto* loc = app.add_subcommand("localize", "Estimate positions or poses from a measurement file");
  std::string l_method, l_input;
  double l_side = 100.0, l_sigma = 1.0;
  loc->add_option("--method", l_method, "Method label")->required();
  loc->add_option("--input", l_input, "Measurement CSV")->required();
  loc->add_option("--side", l_side, "Edge used when the file declares no layout, cm")
      ->check(CLI::PositiveNumber);
  loc->add_option("--sigma", l_sigma, "Noise scale passed to MLE methods, cm")->check(CLI::PositiveNumber);

  // bench
  auto* bench = app.add_subcommand("bench", "Single-threaded timing of the estimators");
  std::string b_scenario, b_methods, b_distances;
  int b_trials = 0;
  double b_sigma = 5.0, b_side = 100.0;
  bench->add_option("scenario", b_scenario, "sensor or agent")
      ->required()
      ->check(CLI::IsMember({"sensor", "agent"}));
  bench->add_option("--trials", b_trials, "Trials (default 100000 sensor, 10000 agent)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--methods", b_methods, "Comma-separated method labels");
  bench->add_option("--distances", b_distances, "start:stop:step or list, cm");
  bench->add_option("--sigma", b_sigma, "Range noise, cm")->check(CLI::NonNegativeNumber);
  bench->add_option("--side", b_side, "Tetrahedron edge, cm")->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  std::ofstream file_out;
  std::ostream* os = &out;
  const std::uint64_t seed = common.seed.value_or(0);
  const bool json = common.output == "json";

  try {
    if (!common.out_path.empty()) {
      file_out.open(common.out_path);
      if (!file_out) throw IoError("cannot write " + common.out_path);
      os = &file_out;
    }

    if (*gdop) {
      SensorConfig config_a = g_angle ? isosceles_tetrahedron(*g_angle, g_side) : regular_tetrahedron(g_side);
      if (g_sweep) {
        SphericalGrid grid{parse_axis(g_radial, "--radial"), parse_axis(g_polar, "--polar"),
                           parse_axis(g_azimuth, "--azimuth")};
        grid.validate();
        log.info("sweeping GDOP over " + std::to_string(grid.radial.points().size() *
                                                        grid.polar.points().size() *
                                                        grid.azimuth.points().size()) +
                 " grid points");
        const GdopSweep sweep = gdop_sweep(config_a, grid);
        if (json) {
          ojson doc;
          emit_meta(doc, RunMetadata::now(seed));
          doc["kind"] = "gdop_sweep";
          doc["average"] = sweep.average;
          doc["maximum"] = sweep.maximum;
          doc["missing"] = sweep.missing;
          ojson samples = ojson::array();
          for (const auto& s : sweep.samples) {
            samples.push_back({s.r_cm, s.polar_deg, s.azimuth_deg, s.gdop});
          }
          doc["samples"] = std::move(samples);
          *os << doc.dump(2) << '\n';
        } else {
          write_sweep_csv(*os, sweep);
        }
        return kExitOk;
      }
      if (g_target.empty()) throw UsageError("gdop needs --target or --sweep");
      const Vec3 target = parse_vec3(g_target, "--target");
      log.info(std::string(g_agent ? "agent" : "sensor") + " GDOP at " + g_target);
      const NoiseModel noise{g_sigma.value_or(0.0), seed};
      if (g_agent) {
        const Vec3 att = parse_vec3(g_attitude, "--attitude");
        const Pose6D pose{target, {deg2rad(att(0)), deg2rad(att(1)), deg2rad(att(2))}};
        const AgentGdop g = gdop_agent(config_a, pose, config_a);
        const AgentCrlb c = crlb_agent(g, noise);
        if (json) {
          ojson doc;
          emit_meta(doc, RunMetadata::now(seed));
          doc["kind"] = "gdop_agent";
          doc["gdop"] = {{"position", g.position}, {"roll", g.roll}, {"pitch", g.pitch}, {"yaw", g.yaw}};
          if (g_sigma) {
            doc["crlb"] = {{"position_cm", c.position}, {"roll_rad", c.roll},
                           {"pitch_rad", c.pitch}, {"yaw_rad", c.yaw}};
          }
          *os << doc.dump(2) << '\n';
        } else {
          *os << "gdop_position,gdop_roll,gdop_pitch,gdop_yaw";
          if (g_sigma) *os << ",crlb_position_cm,crlb_roll_rad,crlb_pitch_rad,crlb_yaw_rad";
          *os << '\n'
              << format_number(g.position) << ',' << format_number(g.roll) << ','
              << format_number(g.pitch) << ',' << format_number(g.yaw);
          if (g_sigma) {
            *os << ',' << format_number(c.position) << ',' << format_number(c.roll) << ','
                << format_number(c.pitch) << ',' << format_number(c.yaw);
          }
          *os << '\n';
        }
        return kExitOk;
      }
      const double g = gdop_sensor(config_a, target);
      if (json) {
        ojson doc;
        emit_meta(doc, RunMetadata::now(seed));
        doc["kind"] = "gdop";
        doc["target_cm"] = {target.x(), target.y(), target.z()};
        doc["gdop"] = g;
        if (g_sigma) doc["crlb_cm"] = crlb_sensor(g, noise);
        *os << doc.dump(2) << '\n';
      } else {
        *os << "gdop";
        if (g_sigma) *os << ",crlb_cm";
        *os << '\n' << format_number(g);
        if (g_sigma) *os << ',' << format_number(crlb_sensor(g, noise));
        *os << '\n';
      }
      return kExitOk;
    }

    if (*study) {
      const std::vector<double> angles = parse_list_flag(s_angles, "--angles");
      SphericalGrid grid{parse_axis(s_radial, "--radial"), parse_axis(s_polar, "--polar"),
                         parse_axis(s_azimuth, "--azimuth")};
      log.info("config study over " + std::to_string(angles.size()) + " vertex angles");
      const auto rows = run_config_study(angles, grid, s_edge);
      if (json) {
        write_config_study_json(*os, rows, RunMetadata::now(seed));
      } else {
        write_config_study_csv(*os, rows);
      }
      return kExitOk;
    }

    if (*sim) {
      ExperimentConfig cfg;
      if (!m_config.empty()) cfg = load_experiment_config(m_config);
      cfg.scenario = scenario_from_string(m_scenario);
      if (m_side) cfg.side_a = *m_side;
      if (m_sigma) cfg.sigma0 = *m_sigma;
      if (m_trials) cfg.trials = *m_trials;
      if (!m_distances.empty()) cfg.distances = parse_list_flag(m_distances, "--distances");
      if (cfg.distances.empty()) {
        cfg.distances = parse_range_list(cfg.scenario == Scenario::kSensor ? "100:600:50" : "200:500:50");
      }
      if (!m_methods.empty()) cfg.methods = split_list(m_methods);
      if (cfg.methods.empty()) {
        cfg.methods = cfg.scenario == Scenario::kSensor ? sensor_methods() : agent_methods();
      }
      if (m_polar) cfg.polar_deg = *m_polar;
      if (m_azimuth) cfg.azimuth_deg = *m_azimuth;
      if (!m_attitude.empty()) {
        const Vec3 att = parse_vec3(m_attitude, "--attitude");
        cfg.attitude = {deg2rad(att(0)), deg2rad(att(1)), deg2rad(att(2))};
      }
      if (m_multi) cfg.solver.multi_start = *m_multi;
      if (common.seed) cfg.seed = *common.seed;
      cfg.threads = common.threads;
      try {
        cfg.validate();
      } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
      }
      log.info("simulate " + to_string(cfg.scenario) + ": " + std::to_string(cfg.distances.size()) +
               " distances x " + std::to_string(cfg.trials) + " trials, seed " + std::to_string(cfg.seed));
      const RmseSummary summary = run_experiment(cfg);
      for (const auto& r : summary.rows) {
        if (r.failures > 0) {
          log.info(r.method + " at " + format_number(r.distance) + " cm: " + std::to_string(r.failures) +
                   " failed trials");
        }
        log.debug(r.method + " " + format_number(r.distance) + " rmse " + format_number(r.rmse_position));
      }
      if (json) {
        write_rmse_json(*os, summary, RunMetadata::now(cfg.seed));
      } else {
        write_rmse_csv(*os, summary);
      }
      return kExitOk;
    }

    if (*loc) {
      const MeasurementFile file = read_measurements(l_input);
      const bool agent = file.agent();
      const auto& known = agent ? agent_methods() : sensor_methods();
      if (std::find(known.begin(), known.end(), l_method) == known.end()) {
        throw UsageError("method '" + l_method + "' does not apply to " +
                         (agent ? std::string("agent") : std::string("sensor")) + " rows");
      }
      ExperimentConfig cfg;
      cfg.sigma0 = l_sigma;
      cfg.seed = seed;
      auto layout = [&](bool b) {
        try {
          return b ? file.config_b(l_side) : file.config_a(l_side);
        } catch (const InvalidArgument& e) {
          throw ParseError(l_input + ": " + e.what());
        }
      };
      const SensorConfig config_a = layout(false);
      const SensorConfig config_b = layout(true);
      log.info("localizing " + std::to_string(file.rows.size()) + " rows with " + l_method);
      ojson rows = ojson::array();
      if (!json) {
        *os << "row,x_cm,y_cm,z_cm";
        if (agent) *os << ",roll_rad,pitch_rad,yaw_rad";
        *os << '\n';
      }
      SolverOptions opts;
      const NoiseModel noise{l_sigma, seed};
      for (std::size_t i = 0; i < file.rows.size(); ++i) {
        Vec3 p;
        EulerAngles a;
        if (agent) {
          const RangeMatrix m = file.agent_row(i);
          Pose6D pose;
          if (l_method == "tt") {
            pose = tt_agent(config_a, m, config_b).pose;
          } else if (l_method == "edmt-jointly") {
            pose = edmt_agent_jointly(config_a, m, config_b).pose;
          } else if (l_method == "edmt-jointly3") {
            pose = edmt_agent_jointly(config_a, m, config_b, AnchorAlignment::kFirstThree).pose;
          } else if (l_method == "edmt-individually") {
            pose = edmt_agent_individually(config_a, m, config_b).pose;
          } else if (l_method == "frocvx") {
            pose = frocvx_agent(config_a, m, config_b, opts).estimate;
          } else {
            SolverOptions o = opts;
            o.initializer = l_method == "mle-tt"             ? Initializer::kTT
                            : l_method == "mle-edmt-jointly" ? Initializer::kEDMTJointly
                                                             : Initializer::kEDMTIndividually;
            pose = mle_agent(config_a, m, config_b, noise, o).estimate;
          }
          p = pose.position;
          a = pose.attitude;
        } else {
          const RangeVector m = file.sensor_row(i);
          if (l_method == "tt") {
            p = tt_sensor(config_a, m);
          } else if (l_method == "edmt") {
            p = edmt_sensor(config_a, m);
          } else if (l_method == "frocvx") {
            p = frocvx_sensor(config_a, m, opts).estimate;
          } else {
            SolverOptions o = opts;
            o.initializer = l_method == "mle-tt" ? Initializer::kTT : Initializer::kEDMT;
            p = mle_sensor(config_a, m, noise, o).estimate;
          }
        }
        log.debug("row " + std::to_string(i + 1) + " (line " + std::to_string(file.row_lines[i]) + ") done");
        if (json) {
          ojson r = {{"row", i + 1}, {"position_cm", {p.x(), p.y(), p.z()}}};
          if (agent) r["attitude_rad"] = {{"roll", a.gamma}, {"pitch", a.theta}, {"yaw", a.psi}};
          rows.push_back(std::move(r));
        } else {
          *os << (i + 1) << ',' << format_number(p.x()) << ',' << format_number(p.y()) << ','
              << format_number(p.z());
          if (agent) {
            *os << ',' << format_number(a.gamma) << ',' << format_number(a.theta) << ','
                << format_number(a.psi);
          }
          *os << '\n';
        }
      }
      if (json) {
        ojson doc;
        emit_meta(doc, RunMetadata::now(seed));
        doc["kind"] = "localize";
        doc["method"] = l_method;
        doc["rows"] = std::move(rows);
        *os << doc.dump(2) << '\n';
      }
      return kExitOk;
    }

    if (*bench) {
      const Scenario scenario = scenario_from_string(b_scenario);
      ExperimentConfig cfg;
      cfg.scenario = scenario;
      cfg.side_a = b_side;
      cfg.sigma0 = b_sigma;
      cfg.seed = seed;
      cfg.distances = parse_list_flag(
          !b_distances.empty() ? b_distances : (scenario == Scenario::kSensor ? "100:600:50" : "200:500:50"),
          "--distances");
      std::vector<std::string> methods = split_list(b_methods);
      if (methods.empty()) methods = scenario == Scenario::kSensor ? sensor_methods() : agent_methods();
      const int trials = b_trials > 0 ? b_trials : (scenario == Scenario::kSensor ? 100000 : 10000);
      cfg.methods = methods;
      cfg.trials = trials;
      try {
        cfg.validate();
      } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
      }
      log.info("bench " + b_scenario + ": " + std::to_string(trials) + " trials per method");
      const BenchReport report = run_bench(methods, scenario, trials, cfg);
      if (json) {
        write_bench_json(*os, report, RunMetadata::now(seed));
      } else {
        write_bench_csv(*os, report);
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace relloc
