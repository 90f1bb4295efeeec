#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "hrfi/cli.hpp"
#include "hrfi/errors.hpp"
#include "hrfi/io.hpp"
#include "json.hpp"

namespace hrfi::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json parse_object(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("configuration must be a JSON object");
  return j;
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw SchemaError("unknown key '" + key + "' in " + where);
    }
  }
}

void check_version(const json& j) {
  if (!j.contains("schema_version")) throw SchemaError("missing schema_version");
  if (j.at("schema_version") != kSchemaVersion) {
    throw SchemaError("unsupported schema_version");
  }
}

template <typename T>
void read(const json& j, const char* key, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("bad value for '") + key + "': " + e.what());
  }
}

// Writes `content` to out_dir/name and records its hash.
class OutputSet {
 public:
  explicit OutputSet(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw SchemaError("cannot create " + dir_ + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = fs::path(dir_) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write " + path.string());
    out << content;
    if (!out) throw SchemaError("write failed: " + path.string());
    manifest_.push_back({{"path", name}, {"sha1", io::git_blob_hash(content)}});
  }

  const json& manifest() const { return manifest_; }

 private:
  std::string dir_;
  json manifest_ = json::array();
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

const char* direction_name(stats::Direction d) {
  return d == stats::Direction::kLess ? "less" : "greater";
}

const char* status_name(FitStatus s) {
  switch (s) {
    case FitStatus::kConverged: return "converged";
    case FitStatus::kIterationLimit: return "iteration_limit";
    case FitStatus::kBoundary: return "boundary";
  }
  return "unknown";
}

json fit_json(const FitResult& fit) {
  return {{"alpha", fit.params.alpha()},
          {"beta", fit.params.beta()},
          {"gamma", implicit_equilibrium(fit.params).value()},
          {"rmse", fit.rmse},
          {"n_trials", fit.n_trials},
          {"converged", fit.converged},
          {"status", status_name(fit.status)},
          {"iterations", fit.iterations},
          {"gradient_norm", fit.gradient_norm}};
}

json region_json(const std::optional<UnstableRegion>& region) {
  if (!region) return nullptr;
  const auto rep = region->reported();
  return {{"lower", region->lower()},
          {"upper", region->upper()},
          {"error_radius", region->error_radius()},
          {"reported",
           {{"lower", rep.lower},
            {"upper", rep.upper},
            {"error_radius", rep.error_radius}}}};
}

json stability_json(const RegionEstimate& estimate) {
  json levels = json::array();
  for (const auto& t : estimate.levels) {
    levels.push_back({{"level", t.level},
                      {"source", t.source_id},
                      {"n", t.n},
                      {"mean_e", t.mean_e},
                      {"p_value", t.p_value},
                      {"significant", t.significant}});
  }
  return {{"levels", levels}, {"region", region_json(estimate.region)}};
}

json test_json(const std::optional<stats::TestResult>& t) {
  if (!t) return nullptr;
  return {{"t", t->statistic},
          {"dof", t->dof},
          {"p_value", t->p_value},
          {"direction", direction_name(t->direction)}};
}

json cohort_config_json(const CohortConfig& c) {
  return {{"schema_version", kSchemaVersion},
          {"seed", c.seed},
          {"agents", c.agents},
          {"beta", c.beta},
          {"gamma_mean", c.gamma_mean},
          {"gamma_sd", c.gamma_sd},
          {"noise_sigma", c.noise_sigma},
          {"robot_noise_sigma", c.robot_noise_sigma},
          {"force_levels", c.force_levels},
          {"repetitions", c.repetitions},
          {"phases", c.phases},
          {"significance", c.significance},
          {"exclude_outliers", c.exclude_outliers}};
}

std::string agent_file(const char* stem, std::size_t index) {
  std::ostringstream name;
  name << stem << "_agent" << std::setw(3) << std::setfill('0') << index
       << ".csv";
  return name.str();
}

template <typename Fn>
int guarded(Streams io, Fn&& fn) {
  try {
    return fn();
  } catch (const SchemaError& e) {
    io.err << "error: " << e.what() << '\n';
    return kIoOrSchema;
  } catch (const DegenerateError& e) {
    io.err << "degenerate: " << e.what() << '\n';
    return kDegenerate;
  } catch (const DivergenceError& e) {
    io.err << "diverged: " << e.what() << '\n';
    return kDivergence;
  } catch (const DomainError& e) {
    io.err << "invalid input: " << e.what() << '\n';
    return kIoOrSchema;
  }
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CohortConfig parse_experiment_config(const std::string& json_text) {
  const json j = parse_object(json_text);
  check_version(j);
  check_keys(j,
             {"schema_version", "seed", "agents", "beta", "gamma_mean",
              "gamma_sd", "noise_sigma", "robot_noise_sigma", "force_levels",
              "repetitions", "phases", "significance", "exclude_outliers",
              "threads"},
             "experiment config");
  CohortConfig c;
  read(j, "seed", c.seed);
  read(j, "agents", c.agents);
  read(j, "beta", c.beta);
  read(j, "gamma_mean", c.gamma_mean);
  read(j, "gamma_sd", c.gamma_sd);
  read(j, "noise_sigma", c.noise_sigma);
  read(j, "robot_noise_sigma", c.robot_noise_sigma);
  read(j, "force_levels", c.force_levels);
  read(j, "repetitions", c.repetitions);
  read(j, "phases", c.phases);
  read(j, "significance", c.significance);
  read(j, "exclude_outliers", c.exclude_outliers);
  read(j, "threads", c.threads);
  try {
    validate(c);
  } catch (const DomainError& e) {
    throw SchemaError(std::string("experiment config: ") + e.what());
  }
  return c;
}

ServoConfig parse_servo_config(const std::string& json_text) {
  const json j = parse_object(json_text);
  check_version(j);
  check_keys(j, {"schema_version", "controller", "plant", "scenario"},
             "servo config");
  ServoConfig c;
  if (j.contains("controller")) {
    const json& k = j.at("controller");
    check_keys(k,
               {"nominal_inertia", "nominal_torque_constant", "force_gain",
                "position_gain", "velocity_gain", "dob_cutoff", "pd_cutoff",
                "observer_cutoff", "nominal_friction", "dt"},
               "controller");
    auto& x = c.controller;
    read(k, "nominal_inertia", x.nominal_inertia);
    read(k, "nominal_torque_constant", x.nominal_torque_constant);
    read(k, "force_gain", x.force_gain);
    read(k, "position_gain", x.position_gain);
    read(k, "velocity_gain", x.velocity_gain);
    read(k, "dob_cutoff", x.dob_cutoff);
    read(k, "pd_cutoff", x.pd_cutoff);
    read(k, "observer_cutoff", x.observer_cutoff);
    read(k, "nominal_friction", x.nominal_friction);
    read(k, "dt", x.dt);
  }
  if (j.contains("plant")) {
    const json& p = j.at("plant");
    check_keys(p,
               {"inertia", "torque_constant", "friction", "tau_ext",
                "load_stiffness", "load_damping"},
               "plant");
    auto& x = c.plant;
    read(p, "inertia", x.inertia);
    read(p, "torque_constant", x.torque_constant);
    read(p, "friction", x.friction);
    read(p, "tau_ext", x.tau_ext);
    read(p, "load_stiffness", x.load_stiffness);
    read(p, "load_damping", x.load_damping);
  }
  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    check_keys(s,
               {"torque_cmd", "duration", "load_stiffness", "load_damping",
                "disturbance_torque", "disturbance_time", "hold_torque",
                "lever_arm", "tolerance", "decimation"},
               "scenario");
    auto& x = c.scenario;
    read(s, "torque_cmd", x.torque_cmd);
    read(s, "duration", x.duration);
    read(s, "load_stiffness", x.load_stiffness);
    read(s, "load_damping", x.load_damping);
    read(s, "disturbance_torque", x.disturbance_torque);
    read(s, "disturbance_time", x.disturbance_time);
    read(s, "hold_torque", x.hold_torque);
    read(s, "lever_arm", x.lever_arm);
    read(s, "tolerance", x.tolerance);
    read(s, "decimation", x.decimation);
  }
  try {
    servo::validate(c.controller);
    servo::validate(c.plant);
  } catch (const DomainError& e) {
    throw SchemaError(std::string("servo config: ") + e.what());
  }
  const auto& s = c.scenario;
  if (!(s.duration > 0.0)) throw SchemaError("scenario.duration must be > 0");
  if (s.duration < c.controller.dt) {
    throw SchemaError("scenario.duration is shorter than one sample");
  }
  if (!(s.torque_cmd != 0.0) || !std::isfinite(s.torque_cmd)) {
    throw SchemaError("scenario.torque_cmd must be finite and non-zero");
  }
  if (s.disturbance_torque != 0.0 &&
      !(s.disturbance_time > 0.0 && s.disturbance_time < s.duration)) {
    throw SchemaError("scenario.disturbance_time must lie inside the run");
  }
  if (!(s.lever_arm > 0.0)) throw SchemaError("scenario.lever_arm must be > 0");
  if (!(s.tolerance > 0.0)) throw SchemaError("scenario.tolerance must be > 0");
  if (s.decimation < 1) throw SchemaError("scenario.decimation must be >= 1");
  if (!(s.load_stiffness >= 0.0) || !(s.load_damping >= 0.0)) {
    throw SchemaError("scenario load impedance must be non-negative");
  }
  return c;
}

SimulateConfig parse_simulate_config(const std::string& json_text) {
  const json j = parse_object(json_text);
  check_version(j);
  check_keys(j,
             {"schema_version", "alpha", "beta", "r0", "phases",
              "noise_sigma", "bias", "seed"},
             "simulate config");
  SimulateConfig c;
  read(j, "alpha", c.alpha);
  read(j, "beta", c.beta);
  read(j, "r0", c.r0);
  read(j, "phases", c.phases);
  read(j, "noise_sigma", c.noise_sigma);
  read(j, "bias", c.bias);
  read(j, "seed", c.seed);
  return c;
}

int cmd_fit(const std::string& trials_csv, const std::string& out_dir,
            Streams io) {
  return guarded(io, [&] {
    const auto trials = io::read_trials_file(trials_csv);
    const FitResult fit = fit_power_law(trials);
    json report = fit_json(fit);
    report["schema_version"] = kSchemaVersion;
    report["command"] = "fit";
    report["input"] = {{"path", trials_csv},
                       {"sha1", io::git_blob_hash(read_file(trials_csv))}};
    OutputSet outputs(out_dir);
    outputs.write("fit.json", dump(report));

    io.out << "alpha " << io::format_double(fit.params.alpha()) << '\n'
           << "beta  " << io::format_double(fit.params.beta()) << '\n'
           << "gamma "
           << io::format_double(implicit_equilibrium(fit.params).value())
           << '\n'
           << "rmse  " << io::format_double(fit.rmse) << '\n'
           << "status " << status_name(fit.status) << " after "
           << fit.iterations << " iterations\n";
    return fit.converged ? kSuccess : kDegenerate;
  });
}

int cmd_simulate(const SimulateConfig& cfg, const std::string& out_dir,
                 Streams io) {
  return guarded(io, [&] {
    const BiasParameters params(cfg.alpha, cfg.beta);
    std::vector<InteractionTrace> traces;
    if (cfg.noise_sigma > 0.0) {
      traces = run_interaction_experiment(
          {params, cfg.noise_sigma, cfg.seed}, {{cfg.r0}, cfg.phases, 0.0});
    } else {
      traces.push_back(simulate(params, ForceLevel(cfg.r0), cfg.phases,
                                cfg.bias ? BiasMode::kEnabled
                                         : BiasMode::kDisabled));
    }
    std::ostringstream csv;
    io::write_traces(csv, traces);
    OutputSet outputs(out_dir);
    outputs.write("trace.csv", csv.str());
    const double gamma = implicit_equilibrium(params).value();
    io.out << "gamma " << io::format_double(gamma) << '\n'
           << "final " << io::format_double(traces.front().final_force())
           << '\n';
    return kSuccess;
  });
}

int cmd_stability(const std::vector<std::string>& trial_csvs,
                  double significance, const std::string& out_dir,
                  Streams io) {
  return guarded(io, [&] {
    if (trial_csvs.empty()) throw SchemaError("no trial files given");
    std::vector<EvaluationSample> pooled;
    json sources = json::array();
    for (std::size_t i = 0; i < trial_csvs.size(); ++i) {
      const auto trials = io::read_trials_file(trial_csvs[i]);
      const FitResult fit = fit_power_law(trials);
      const double gamma = implicit_equilibrium(fit.params).value();
      const auto samples =
          evaluation_samples(trials, gamma, "source" + std::to_string(i));
      pooled.insert(pooled.end(), samples.begin(), samples.end());
      sources.push_back({{"path", trial_csvs[i]}, {"fit", fit_json(fit)}});
    }
    RegionEstimate estimate;
    try {
      estimate = estimate_unstable_region(group_by_level(pooled), significance);
    } catch (const DomainError& e) {
      throw DegenerateError(e.what());
    }
    const EvaluationCounts counts = count_evaluations(pooled);
    json report = {{"schema_version", kSchemaVersion},
                   {"command", "stability"},
                   {"significance", significance},
                   {"sources", sources},
                   {"stability", stability_json(estimate)},
                   {"evaluation_counts",
                    {{"convergent", counts.convergent},
                     {"divergent", counts.divergent}}}};
    OutputSet outputs(out_dir);
    outputs.write("stability.json", dump(report));
    if (estimate.region) {
      io.out << "unstable region " << io::format_double(estimate.region->lower())
             << " < r/gamma < " << io::format_double(estimate.region->upper())
             << ", |e|/gamma < "
             << io::format_double(estimate.region->error_radius()) << '\n';
    } else {
      io.out << "no unstable region detected\n";
    }
    return kSuccess;
  });
}

int cmd_experiment(const CohortConfig& cfg, const std::string& out_dir,
                   Streams io) {
  return guarded(io, [&] {
    const CohortResult result = run_cohort(cfg);
    OutputSet outputs(out_dir);

    json agents = json::array();
    for (const auto& a : result.agents) {
      std::ostringstream trials_csv;
      io::write_trials(trials_csv, a.trials);
      outputs.write(agent_file("trials", a.index), trials_csv.str());
      std::ostringstream traces_csv;
      io::write_traces(traces_csv, a.traces);
      outputs.write(agent_file("traces", a.index), traces_csv.str());
      agents.push_back(
          {{"index", a.index},
           {"seed", a.seed},
           {"true_alpha", a.true_params.alpha()},
           {"true_beta", a.true_params.beta()},
           {"true_gamma", implicit_equilibrium(a.true_params).value()},
           {"fit", fit_json(a.fit)}});
    }

    json groups = json::array();
    for (const auto& g : result.group_tests) {
      groups.push_back({{"group", g.group},
                        {"n", g.n},
                        {"mean_initial_error", g.mean_initial},
                        {"mean_final_error", g.mean_final},
                        {"initial_in_unstable_region",
                         g.initial_in_unstable_region},
                        {"direction", direction_name(g.direction)},
                        {"test", test_json(g.test)}});
    }

    const json config = cohort_config_json(cfg);
    json report = {
        {"schema_version", kSchemaVersion},
        {"command", "experiment"},
        {"config", config},
        {"config_hash", io::git_blob_hash(config.dump())},
        {"agents", agents},
        {"stability",
         result.stability ? stability_json(*result.stability) : json(nullptr)},
        {"stability_error", result.stability_error},
        {"evaluation_counts",
         {{"convergent", result.counts.convergent},
          {"divergent", result.counts.divergent}}},
        {"divergence_rate", result.divergence_rate},
        {"asymptotic_convergence_rate", result.asymptotic_convergence_rate},
        {"outliers", result.outliers},
        {"group_tests", groups},
        {"outputs", outputs.manifest()}};
    outputs.write("report.json", dump(report));

    io.out << "agents " << result.agents.size() << '\n';
    if (result.stability && result.stability->region) {
      const auto& r = *result.stability->region;
      io.out << "unstable region " << io::format_double(r.lower())
             << " < r/gamma < " << io::format_double(r.upper()) << '\n';
    } else {
      io.out << "no unstable region detected\n";
    }
    io.out << "divergence rate " << io::format_double(result.divergence_rate)
           << " %\nasymptotic convergence rate "
           << io::format_double(result.asymptotic_convergence_rate) << " %\n";
    return kSuccess;
  });
}

int cmd_servo(const ServoConfig& cfg, const std::string& out_dir, Streams io) {
  return guarded(io, [&] {
    using namespace servo;
    const auto& sc = cfg.scenario;

    PlantParams contact = cfg.plant;
    contact.load_stiffness += sc.load_stiffness;
    contact.load_damping += sc.load_damping;
    ServoState state = initial_state(cfg.controller);
    const auto force = run(
        Mode::kForce, state, cfg.controller,
        [&](double t) {
          PlantParams p = contact;
          if (sc.disturbance_torque != 0.0 && t >= sc.disturbance_time) {
            p.tau_ext += sc.disturbance_torque;
          }
          return p;
        },
        [&](double) { return sc.torque_cmd; }, sc.duration);

    const bool disturbed = sc.disturbance_torque != 0.0;
    const double step_end = disturbed ? sc.disturbance_time : sc.duration;
    std::vector<Sample> before;
    std::vector<Sample> after;
    for (const auto& s : force) {
      (s.time < step_end ? before : after).push_back(s);
    }
    const double settle = settling_time(before, sc.torque_cmd, sc.tolerance);
    const double tail = std::min(0.1, 0.5 * step_end);
    const double steady_error =
        std::abs(window_mean(before, tail) - sc.torque_cmd) /
        std::abs(sc.torque_cmd);

    json disturbance = nullptr;
    if (disturbed) {
      const double recovered =
          settling_time(after, sc.torque_cmd, sc.tolerance);
      const double residual =
          std::abs(window_mean(after, std::min(0.1, 0.5 * (sc.duration -
                                                              step_end))) -
                   sc.torque_cmd) /
          std::abs(sc.torque_cmd);
      disturbance = {
          {"torque", sc.disturbance_torque},
          {"onset", sc.disturbance_time},
          {"recovery_time",
           recovered < 0.0 ? json(nullptr) : json(recovered - step_end)},
          {"residual_error", residual}};
    }

    PlantParams pushing = cfg.plant;
    pushing.tau_ext += sc.hold_torque;
    state = initial_state(cfg.controller);
    const auto hold =
        run(Mode::kPosition, state, cfg.controller,
            [&](double) { return pushing; }, [](double) { return 0.0; },
            sc.duration);
    double max_theta = 0.0;
    for (const auto& s : hold) max_theta = std::max(max_theta, std::abs(s.theta));

    std::vector<io::TraceRow> rows;
    for (std::size_t i = 0; i < force.size(); i += sc.decimation) {
      rows.push_back({0, i, io::Phase::kRobot,
                      force[i].reaction_estimate / sc.lever_arm});
    }
    for (std::size_t i = 0; i < hold.size(); i += sc.decimation) {
      rows.push_back({1, i, io::Phase::kHuman,
                      hold[i].reaction_estimate / sc.lever_arm});
    }
    std::ostringstream csv;
    io::write_trace_rows(csv, rows);

    json metrics = {
        {"schema_version", kSchemaVersion},
        {"command", "servo"},
        {"dt", cfg.controller.dt},
        {"force_control",
         {{"torque_cmd", sc.torque_cmd},
          {"settling_time", settle < 0.0 ? json(nullptr) : json(settle)},
          {"steady_error", steady_error},
          {"disturbance", disturbance}}},
        {"position_control",
         {{"hold_torque", sc.hold_torque},
          {"max_abs_theta", max_theta},
          {"final_theta", hold.back().theta},
          {"reaction_estimate", window_mean(hold, 0.1)}}}};
    OutputSet outputs(out_dir);
    outputs.write("servo_timeseries.csv", csv.str());
    outputs.write("servo_metrics.json", dump(metrics));

    io.out << "settling time "
           << (settle < 0.0 ? std::string("never") : io::format_double(settle))
           << " s\nsteady error " << io::format_double(steady_error) << '\n';
    return kSuccess;
  });
}

int cmd_report(const std::string& traces_csv, double gamma,
               const std::string& out_dir, Streams io) {
  return guarded(io, [&] {
    if (!(gamma > 0.0)) throw SchemaError("--gamma must be positive");
    const auto traces = io::read_traces_file(traces_csv);
    json runs = json::array();
    std::ostringstream csv;
    csv << "run,k,eps_robot,eps_human\n";
    for (std::size_t i = 0; i < traces.size(); ++i) {
      const auto errors = normalized_errors(traces[i], gamma);
      for (std::size_t k = 0; k < errors.size(); ++k) {
        csv << i << ',' << k << ',' << io::format_double(errors[k].robot)
            << ',' << io::format_double(errors[k].human) << '\n';
      }
      runs.push_back({{"run", i},
                      {"initial_error", errors.front().robot},
                      {"final_error", errors.back().human},
                      {"final_normalized_force",
                       traces[i].final_force() / gamma}});
    }
    json groups = nullptr;
    if (traces.size() == 10) {
      groups = json::array();
      for (const auto& g : group_interactions(traces, gamma)) {
        groups.push_back({{"group", g.group},
                          {"run", g.trace_index},
                          {"initial_error", g.initial_error},
                          {"final_error", g.final_error}});
      }
    }
    const double rate = asymptotic_convergence_rate(traces, gamma);
    json report = {{"schema_version", kSchemaVersion},
                   {"command", "report"},
                   {"gamma", gamma},
                   {"runs", runs},
                   {"groups", groups},
                   {"asymptotic_convergence_rate", rate}};
    OutputSet outputs(out_dir);
    outputs.write("errors.csv", csv.str());
    outputs.write("report.json", dump(report));
    io.out << "asymptotic convergence rate " << io::format_double(rate)
           << " %\n";
    return kSuccess;
  });
}

}  // namespace hrfi::cli
