#include "relloc/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "relloc/edm.hpp"
#include "relloc/errors.hpp"

#ifndef RELLOC_VERSION
#define RELLOC_VERSION "0.0.0"
#endif

namespace relloc {

namespace {

using ojson = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

// Keeps benchmarked results observable.
volatile double g_sink = 0.0;

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

// Sum of squares plus sum of fourth powers, enough for the RMSE and the
// delta-method standard error of the RMSE.
struct Moments {
  double s2 = 0.0;
  double s4 = 0.0;
  int n = 0;

  void add(double e) {
    const double e2 = e * e;
    s2 += e2;
    s4 += e2 * e2;
    ++n;
  }
  double rmse() const { return n > 0 ? std::sqrt(s2 / n) : 0.0; }
  double se() const {
    if (n < 2) return 0.0;
    const double m = s2 / n;
    const double var = std::max(0.0, (s4 / n - m * m)) / (n - 1);
    return m > 0.0 ? std::sqrt(var) / (2.0 * std::sqrt(m)) : 0.0;
  }
};

// Per-trial outcome: position error and wrapped angle errors.
struct TrialError {
  bool failed = false;
  double pos = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

// Runs body(t) for t in [0, n) on up to `threads` workers. Each index is
// written by exactly one worker, so the caller's reduction stays ordered.
template <class F>
void parallel_for(int n, int threads, F&& body) {
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int t = 0; t < n; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (int t = next++; t < n && !failed; t = next++) body(t);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// Stand-in scale for the likelihood when the simulated noise is zero; the
// minimizer does not depend on it.
NoiseModel likelihood_noise(const ExperimentConfig& cfg) {
  return {cfg.sigma0 > 0.0 ? cfg.sigma0 : 1.0, cfg.seed};
}

SolverOptions with_initializer(SolverOptions opts, Initializer init) {
  opts.initializer = init;
  return opts;
}

RmseRow summarize(const std::string& method, double distance, const std::vector<TrialError>& errs,
                  bool agent) {
  Moments pos, roll, pitch, yaw;
  RmseRow row;
  row.method = method;
  row.distance = distance;
  row.trials = static_cast<int>(errs.size());
  for (const TrialError& e : errs) {
    if (e.failed) {
      ++row.failures;
      continue;
    }
    pos.add(e.pos);
    if (agent) {
      roll.add(e.roll);
      pitch.add(e.pitch);
      yaw.add(e.yaw);
    }
  }
  row.rmse_position = pos.rmse();
  row.se_position = pos.se();
  row.rmse_roll = roll.rmse();
  row.se_roll = roll.se();
  row.rmse_pitch = pitch.rmse();
  row.se_pitch = pitch.se();
  row.rmse_yaw = yaw.rmse();
  row.se_yaw = yaw.se();
  row.extrapolated = distance > kModeledRangeLimit;
  return row;
}

std::vector<double> json_number_list(const ojson& j, const char* key) {
  if (!j.is_array()) throw ParseError(std::string("'") + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ParseError(std::string("'") + key + "' must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

template <class T>
T json_get(const ojson& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("field '") + key + "' has the wrong type");
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

void json_metadata(ojson& doc, const RunMetadata& meta) {
  doc["schema_version"] = kSchemaVersion;
  doc["metadata"] = {{"seed", meta.seed}, {"version", meta.version}, {"timestamp", meta.timestamp}};
}

}  // namespace

std::string to_string(Scenario s) { return s == Scenario::kSensor ? "sensor" : "agent"; }

Scenario scenario_from_string(const std::string& s) {
  if (s == "sensor") return Scenario::kSensor;
  if (s == "agent") return Scenario::kAgent;
  throw InvalidArgument("unknown scenario '" + s + "' (expected sensor or agent)");
}

std::string version() { return RELLOC_VERSION; }

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

const std::vector<std::string>& sensor_methods() {
  static const std::vector<std::string> m{"tt", "edmt", "frocvx", "mle-tt", "mle-edmt"};
  return m;
}

const std::vector<std::string>& agent_methods() {
  static const std::vector<std::string> m{
      "tt",     "edmt-jointly", "edmt-jointly3",    "edmt-individually",
      "frocvx", "mle-tt",       "mle-edmt-jointly", "mle-edmt-individually"};
  return m;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (!(side_a > 0.0) || !std::isfinite(side_a)) throw InvalidArgument("side_a must be positive");
  if (distances.empty()) throw InvalidArgument("distance list is empty");
  for (double d : distances) {
    if (!(d > 0.0) || !std::isfinite(d)) throw InvalidArgument("distances must be positive");
  }
  if (!(sigma0 >= 0.0) || !std::isfinite(sigma0)) throw InvalidArgument("sigma0 must be >= 0");
  if (!std::isfinite(polar_deg) || !std::isfinite(azimuth_deg)) {
    throw InvalidArgument("direction angles must be finite");
  }
  if (threads < 1) throw InvalidArgument("threads must be >= 1");
  if (methods.empty()) throw InvalidArgument("method list is empty");
  const auto& known = scenario == Scenario::kSensor ? sensor_methods() : agent_methods();
  for (const auto& m : methods) {
    if (!contains(known, m)) {
      throw InvalidArgument("unknown " + to_string(scenario) + " method '" + m + "'");
    }
  }
  solver.validate();
}

namespace {
ExperimentConfig config_from_json(const ojson& j);
}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  ojson j;
  try {
    j = ojson::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("experiment config must be a JSON object");
  try {
    return config_from_json(j);
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
}

namespace {

ExperimentConfig config_from_json(const ojson& j) {
  ExperimentConfig cfg;
  if (j.contains("scenario")) cfg.scenario = scenario_from_string(json_get<std::string>(j, "scenario"));
  if (j.contains("side_a")) cfg.side_a = json_get<double>(j, "side_a");
  if (j.contains("distances")) {
    const ojson& d = j.at("distances");
    cfg.distances = d.is_string() ? parse_range_list(d.get<std::string>()) : json_number_list(d, "distances");
  }
  if (j.contains("direction")) {
    const ojson& d = j.at("direction");
    if (d.contains("polar_deg")) cfg.polar_deg = json_get<double>(d, "polar_deg");
    if (d.contains("azimuth_deg")) cfg.azimuth_deg = json_get<double>(d, "azimuth_deg");
  }
  if (j.contains("attitude_deg")) {
    const ojson& a = j.at("attitude_deg");
    if (a.contains("roll")) cfg.attitude.gamma = deg2rad(json_get<double>(a, "roll"));
    if (a.contains("pitch")) cfg.attitude.theta = deg2rad(json_get<double>(a, "pitch"));
    if (a.contains("yaw")) cfg.attitude.psi = deg2rad(json_get<double>(a, "yaw"));
  }
  if (j.contains("sigma0")) cfg.sigma0 = json_get<double>(j, "sigma0");
  if (j.contains("trials")) cfg.trials = json_get<int>(j, "trials");
  if (j.contains("methods")) cfg.methods = json_get<std::vector<std::string>>(j, "methods");
  if (j.contains("seed")) cfg.seed = json_get<std::uint64_t>(j, "seed");
  if (j.contains("threads")) cfg.threads = json_get<int>(j, "threads");
  if (j.contains("solver")) {
    const ojson& s = j.at("solver");
    if (s.contains("max_iterations")) cfg.solver.max_iterations = json_get<int>(s, "max_iterations");
    if (s.contains("step_tolerance")) cfg.solver.step_tolerance = json_get<double>(s, "step_tolerance");
    if (s.contains("residual_tolerance")) {
      cfg.solver.residual_tolerance = json_get<double>(s, "residual_tolerance");
    }
    if (s.contains("damping_initial")) cfg.solver.damping_initial = json_get<double>(s, "damping_initial");
    if (s.contains("multi_start")) cfg.solver.multi_start = json_get<int>(s, "multi_start");
  }
  return cfg;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::vector<double> parse_range_list(const std::string& text) {
  const std::string s = trim(text);
  auto to_double = [&](const std::string& tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(trim(tok), &used);
    } catch (const std::exception&) {
      throw InvalidArgument("bad number '" + tok + "' in '" + text + "'");
    }
    if (used != trim(tok).size() || !std::isfinite(v)) {
      throw InvalidArgument("bad number '" + tok + "' in '" + text + "'");
    }
    return v;
  };
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
    if (parts.size() != 3) throw InvalidArgument("range '" + text + "' must be start:stop:step");
    GridAxis axis{to_double(parts[0]), to_double(parts[1]), to_double(parts[2])};
    if (!(axis.step > 0.0)) throw InvalidArgument("range step must be positive in '" + text + "'");
    if (axis.stop < axis.start) throw InvalidArgument("range stop precedes start in '" + text + "'");
    return axis.points();
  }
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) out.push_back(to_double(tok));
  if (out.empty()) throw InvalidArgument("empty list");
  return out;
}

SensorEstimator make_sensor_estimator(const std::string& method, const ExperimentConfig& cfg) {
  const SensorConfig config = regular_tetrahedron(cfg.side_a);
  const SolverOptions opts = cfg.solver;
  const NoiseModel noise = likelihood_noise(cfg);
  if (method == "tt") return [config](const RangeVector& m) { return tt_sensor(config, m); };
  if (method == "edmt") return [config](const RangeVector& m) { return edmt_sensor(config, m); };
  if (method == "frocvx") {
    const SolverOptions o = with_initializer(opts, Initializer::kTT);
    return [config, o](const RangeVector& m) { return frocvx_sensor(config, m, o).estimate; };
  }
  if (method == "mle-tt" || method == "mle-edmt") {
    const SolverOptions o =
        with_initializer(opts, method == "mle-tt" ? Initializer::kTT : Initializer::kEDMT);
    return [config, o, noise](const RangeVector& m) { return mle_sensor(config, m, noise, o).estimate; };
  }
  throw InvalidArgument("unknown sensor method '" + method + "'");
}

AgentEstimator make_agent_estimator(const std::string& method, const ExperimentConfig& cfg) {
  const SensorConfig config = regular_tetrahedron(cfg.side_a);
  const SolverOptions opts = cfg.solver;
  const NoiseModel noise = likelihood_noise(cfg);
  if (method == "tt") return [config](const RangeMatrix& m) { return tt_agent(config, m, config).pose; };
  if (method == "edmt-jointly" || method == "edmt-jointly3") {
    const AnchorAlignment align =
        method == "edmt-jointly" ? AnchorAlignment::kAllFour : AnchorAlignment::kFirstThree;
    return [config, align](const RangeMatrix& m) {
      return edmt_agent_jointly(config, m, config, align).pose;
    };
  }
  if (method == "edmt-individually") {
    return [config](const RangeMatrix& m) { return edmt_agent_individually(config, m, config).pose; };
  }
  if (method == "frocvx") {
    const SolverOptions o = with_initializer(opts, Initializer::kTT);
    return [config, o](const RangeMatrix& m) { return frocvx_agent(config, m, config, o).estimate; };
  }
  Initializer init;
  if (method == "mle-tt") {
    init = Initializer::kTT;
  } else if (method == "mle-edmt-jointly") {
    init = Initializer::kEDMTJointly;
  } else if (method == "mle-edmt-individually") {
    init = Initializer::kEDMTIndividually;
  } else {
    throw InvalidArgument("unknown agent method '" + method + "'");
  }
  const SolverOptions o = with_initializer(opts, init);
  return [config, o, noise](const RangeMatrix& m) {
    return mle_agent(config, m, config, noise, o).estimate;
  };
}

const RmseRow& RmseSummary::at(const std::string& method, double distance) const {
  for (const RmseRow& r : rows) {
    if (r.method == method && std::abs(r.distance - distance) <= 1e-9 * std::max(1.0, distance)) {
      return r;
    }
  }
  throw InvalidArgument("no row for " + method + " at " + format_number(distance) + " cm");
}

RmseSummary run_sensor_experiment(const ExperimentConfig& cfg) {
  if (cfg.scenario != Scenario::kSensor) throw InvalidArgument("config scenario is not 'sensor'");
  cfg.validate();
  const SensorConfig config = regular_tetrahedron(cfg.side_a);
  const NoiseModel noise{cfg.sigma0, cfg.seed};
  std::vector<SensorEstimator> est;
  for (const auto& m : cfg.methods) est.push_back(make_sensor_estimator(m, cfg));
  const std::size_t nm = est.size();

  RmseSummary out;
  out.config = cfg;
  std::vector<std::vector<RmseRow>> by_method(nm);
  for (std::size_t di = 0; di < cfg.distances.size(); ++di) {
    const double dist = cfg.distances[di];
    const Vec3 truth = spherical_to_cartesian(dist, cfg.polar_deg, cfg.azimuth_deg);
    const RangeVector clean = true_ranges_sensor(config, truth);
    std::vector<TrialError> errs(nm * cfg.trials);
    parallel_for(cfg.trials, cfg.threads, [&](int t) {
      const RangeVector meas = add_noise(clean, noise, trial_stream(di, t));
      for (std::size_t k = 0; k < nm; ++k) {
        TrialError& e = errs[k * cfg.trials + t];
        try {
          const Vec3 p = est[k](meas);
          if (!p.allFinite()) {
            e.failed = true;
          } else {
            e.pos = (p - truth).norm();
          }
        } catch (const std::exception&) {
          e.failed = true;
        }
      }
    });
    double crlb = std::nan("");
    try {
      crlb = crlb_sensor(gdop_sensor(config, truth), noise);
    } catch (const DegenerateGeometry&) {
    }
    for (std::size_t k = 0; k < nm; ++k) {
      std::vector<TrialError> slice(errs.begin() + k * cfg.trials, errs.begin() + (k + 1) * cfg.trials);
      RmseRow row = summarize(cfg.methods[k], dist, slice, false);
      row.crlb_position = crlb;
      by_method[k].push_back(std::move(row));
    }
  }
  for (auto& rows : by_method) {
    for (auto& r : rows) out.rows.push_back(std::move(r));
  }
  return out;
}

RmseSummary run_agent_experiment(const ExperimentConfig& cfg) {
  if (cfg.scenario != Scenario::kAgent) throw InvalidArgument("config scenario is not 'agent'");
  cfg.validate();
  const SensorConfig config = regular_tetrahedron(cfg.side_a);
  const NoiseModel noise{cfg.sigma0, cfg.seed};
  std::vector<AgentEstimator> est;
  for (const auto& m : cfg.methods) est.push_back(make_agent_estimator(m, cfg));
  const std::size_t nm = est.size();

  RmseSummary out;
  out.config = cfg;
  std::vector<std::vector<RmseRow>> by_method(nm);
  for (std::size_t di = 0; di < cfg.distances.size(); ++di) {
    const double dist = cfg.distances[di];
    Pose6D truth;
    truth.position = spherical_to_cartesian(dist, cfg.polar_deg, cfg.azimuth_deg);
    truth.attitude = cfg.attitude;
    const RangeMatrix clean = true_ranges_agent(config, truth, config);
    std::vector<TrialError> errs(nm * cfg.trials);
    parallel_for(cfg.trials, cfg.threads, [&](int t) {
      const RangeMatrix meas = add_noise(clean, noise, trial_stream(di, t));
      for (std::size_t k = 0; k < nm; ++k) {
        TrialError& e = errs[k * cfg.trials + t];
        try {
          const Pose6D p = est[k](meas);
          e.pos = (p.position - truth.position).norm();
          e.roll = wrap_angle(p.attitude.gamma - truth.attitude.gamma);
          e.pitch = wrap_angle(p.attitude.theta - truth.attitude.theta);
          e.yaw = wrap_angle(p.attitude.psi - truth.attitude.psi);
          e.failed = !std::isfinite(e.pos + e.roll + e.pitch + e.yaw);
        } catch (const std::exception&) {
          e.failed = true;
        }
      }
    });
    AgentCrlb crlb{std::nan(""), std::nan(""), std::nan(""), std::nan("")};
    try {
      crlb = crlb_agent(gdop_agent(config, truth, config), noise);
    } catch (const DegenerateGeometry&) {
    }
    for (std::size_t k = 0; k < nm; ++k) {
      std::vector<TrialError> slice(errs.begin() + k * cfg.trials, errs.begin() + (k + 1) * cfg.trials);
      RmseRow row = summarize(cfg.methods[k], dist, slice, true);
      row.crlb_position = crlb.position;
      row.crlb_roll = crlb.roll;
      row.crlb_pitch = crlb.pitch;
      row.crlb_yaw = crlb.yaw;
      by_method[k].push_back(std::move(row));
    }
  }
  for (auto& rows : by_method) {
    for (auto& r : rows) out.rows.push_back(std::move(r));
  }
  return out;
}

RmseSummary run_experiment(const ExperimentConfig& cfg) {
  return cfg.scenario == Scenario::kSensor ? run_sensor_experiment(cfg) : run_agent_experiment(cfg);
}

std::vector<ConfigStudyRow> run_config_study(const std::vector<double>& angles_deg,
                                             const SphericalGrid& grid, double unit_edge) {
  if (angles_deg.empty()) throw InvalidArgument("angle list is empty");
  grid.validate();
  std::vector<ConfigStudyRow> rows;
  for (double a : angles_deg) {
    const GdopSweep sweep = gdop_sweep(isosceles_tetrahedron(a, unit_edge), grid);
    rows.push_back({a, sweep.average, sweep.maximum, sweep.missing});
  }
  return rows;
}

BenchReport run_bench(const std::vector<std::string>& methods, Scenario scenario, int trials,
                      const ExperimentConfig& cfg) {
  if (trials < 1) throw InvalidArgument("trials must be >= 1");
  if (methods.empty()) throw InvalidArgument("method list is empty");
  ExperimentConfig c = cfg;
  c.scenario = scenario;
  c.methods = methods;
  c.trials = trials;
  c.validate();
  const SensorConfig config = regular_tetrahedron(c.side_a);
  const NoiseModel noise{c.sigma0, c.seed};
  using Clock = std::chrono::steady_clock;

  BenchReport report;
  report.scenario = scenario;
  if (scenario == Scenario::kSensor) {
    std::vector<RangeVector> inputs;
    inputs.reserve(trials);
    for (int t = 0; t < trials; ++t) {
      const std::size_t di = t % c.distances.size();
      const Vec3 truth = spherical_to_cartesian(c.distances[di], c.polar_deg, c.azimuth_deg);
      inputs.push_back(add_noise(true_ranges_sensor(config, truth), noise, trial_stream(di, t)));
    }
    for (const auto& m : methods) {
      const SensorEstimator f = make_sensor_estimator(m, c);
      Vec3 sink = Vec3::Zero();
      const auto t0 = Clock::now();
      for (const auto& in : inputs) {
        try {
          sink += f(in);
        } catch (const std::exception&) {
        }
      }
      const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
      g_sink = sink.sum();
      report.entries.push_back({m, secs, 1.0, trials});
    }
  } else {
    std::vector<RangeMatrix> inputs;
    inputs.reserve(trials);
    for (int t = 0; t < trials; ++t) {
      const std::size_t di = t % c.distances.size();
      Pose6D truth;
      truth.position = spherical_to_cartesian(c.distances[di], c.polar_deg, c.azimuth_deg);
      truth.attitude = c.attitude;
      inputs.push_back(add_noise(true_ranges_agent(config, truth, config), noise, trial_stream(di, t)));
    }
    for (const auto& m : methods) {
      const AgentEstimator f = make_agent_estimator(m, c);
      Vec3 sink = Vec3::Zero();
      const auto t0 = Clock::now();
      for (const auto& in : inputs) {
        try {
          sink += f(in).position;
        } catch (const std::exception&) {
        }
      }
      const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
      g_sink = sink.sum();
      report.entries.push_back({m, secs, 1.0, trials});
    }
  }
  double fastest = report.entries.front().total_seconds;
  for (const auto& e : report.entries) fastest = std::min(fastest, e.total_seconds);
  for (auto& e : report.entries) e.ratio = fastest > 0.0 ? e.total_seconds / fastest : 1.0;
  return report;
}

RunMetadata RunMetadata::now(std::uint64_t seed) {
  const std::time_t t = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&t, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return {seed, relloc::version(), buf};
}

void write_rmse_csv(std::ostream& os, const RmseSummary& summary) {
  const bool agent = summary.config.scenario == Scenario::kAgent;
  os << "method,distance_cm,trials,failures,rmse_position_cm,se_position_cm,crlb_position_cm";
  if (agent) {
    os << ",rmse_roll_rad,se_roll_rad,crlb_roll_rad,rmse_pitch_rad,se_pitch_rad,crlb_pitch_rad"
          ",rmse_yaw_rad,se_yaw_rad,crlb_yaw_rad";
  }
  os << ",extrapolated\n";
  for (const RmseRow& r : summary.rows) {
    os << r.method << ',' << format_number(r.distance) << ',' << r.trials << ',' << r.failures << ','
       << format_number(r.rmse_position) << ',' << format_number(r.se_position) << ','
       << format_number(r.crlb_position);
    if (agent) {
      for (const double v : {r.rmse_roll, r.se_roll, r.crlb_roll, r.rmse_pitch, r.se_pitch,
                             r.crlb_pitch, r.rmse_yaw, r.se_yaw, r.crlb_yaw}) {
        os << ',' << format_number(v);
      }
    }
    os << ',' << (r.extrapolated ? 1 : 0) << '\n';
  }
}

void write_rmse_json(std::ostream& os, const RmseSummary& summary, const RunMetadata& meta) {
  const ExperimentConfig& c = summary.config;
  const bool agent = c.scenario == Scenario::kAgent;
  ojson doc;
  json_metadata(doc, meta);
  doc["kind"] = "rmse_summary";
  doc["config"] = {{"scenario", to_string(c.scenario)},
                   {"side_a", c.side_a},
                   {"distances", c.distances},
                   {"direction", {{"polar_deg", c.polar_deg}, {"azimuth_deg", c.azimuth_deg}}},
                   {"sigma0", c.sigma0},
                   {"trials", c.trials},
                   {"methods", c.methods},
                   {"seed", c.seed}};
  if (agent) {
    doc["config"]["attitude_deg"] = {{"roll", rad2deg(c.attitude.gamma)},
                                     {"pitch", rad2deg(c.attitude.theta)},
                                     {"yaw", rad2deg(c.attitude.psi)}};
  }
  ojson rows = ojson::array();
  for (const RmseRow& r : summary.rows) {
    ojson row = {{"method", r.method},
                 {"distance_cm", r.distance},
                 {"trials", r.trials},
                 {"failures", r.failures},
                 {"rmse_position_cm", r.rmse_position},
                 {"se_position_cm", r.se_position},
                 {"crlb_position_cm", r.crlb_position}};
    if (agent) {
      row["rmse_rad"] = {{"roll", r.rmse_roll}, {"pitch", r.rmse_pitch}, {"yaw", r.rmse_yaw}};
      row["se_rad"] = {{"roll", r.se_roll}, {"pitch", r.se_pitch}, {"yaw", r.se_yaw}};
      row["crlb_rad"] = {{"roll", r.crlb_roll}, {"pitch", r.crlb_pitch}, {"yaw", r.crlb_yaw}};
    }
    row["extrapolated"] = r.extrapolated;
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  os << doc.dump(2) << '\n';
}

void write_config_study_csv(std::ostream& os, const std::vector<ConfigStudyRow>& rows) {
  os << "angle_deg,avg_gdop,max_gdop,missing\n";
  for (const auto& r : rows) {
    os << format_number(r.angle_deg) << ',' << format_number(r.avg_gdop) << ','
       << format_number(r.max_gdop) << ',' << r.missing << '\n';
  }
}

void write_config_study_json(std::ostream& os, const std::vector<ConfigStudyRow>& rows,
                             const RunMetadata& meta) {
  ojson doc;
  json_metadata(doc, meta);
  doc["kind"] = "config_study";
  ojson arr = ojson::array();
  for (const auto& r : rows) {
    arr.push_back({{"angle_deg", r.angle_deg},
                   {"avg_gdop", r.avg_gdop},
                   {"max_gdop", r.max_gdop},
                   {"missing", r.missing}});
  }
  doc["rows"] = std::move(arr);
  os << doc.dump(2) << '\n';
}

void write_bench_csv(std::ostream& os, const BenchReport& report) {
  os << "method,trials,total_seconds,ratio\n";
  for (const auto& e : report.entries) {
    os << e.method << ',' << e.trials << ',' << format_number(e.total_seconds) << ','
       << format_number(e.ratio) << '\n';
  }
}

void write_bench_json(std::ostream& os, const BenchReport& report, const RunMetadata& meta) {
  ojson doc;
  json_metadata(doc, meta);
  doc["kind"] = "bench";
  doc["scenario"] = to_string(report.scenario);
  ojson arr = ojson::array();
  for (const auto& e : report.entries) {
    arr.push_back({{"method", e.method},
                   {"trials", e.trials},
                   {"total_seconds", e.total_seconds},
                   {"ratio", e.ratio}});
  }
  doc["entries"] = std::move(arr);
  os << doc.dump(2) << '\n';
}

}  // namespace relloc
